//! Smooth positive densities sigma(x) defining the measure d(mu) = sigma dx.

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::linalg;
use crate::metric::MetricSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureSpec {
    /// sigma = 1.
    Lebesgue,
    /// sigma = exp(-|x|^2 / 2).
    Gaussian,
    /// sigma = sqrt(det a(x)) of the metric's Riemannian part; the canonical
    /// volume for Riemannian members of the family.
    RiemannianVolume,
}

impl Default for MeasureSpec {
    fn default() -> Self {
        MeasureSpec::Lebesgue
    }
}

impl MeasureSpec {
    pub fn sigma(&self, spec: &MetricSpec, x: &[f64]) -> f64 {
        match self {
            MeasureSpec::Lebesgue => 1.0,
            MeasureSpec::Gaussian => (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp(),
            MeasureSpec::RiemannianVolume => {
                let a = spec.a.eval(x);
                linalg::det_spd(a.view()).map(f64::sqrt).unwrap_or(f64::NAN)
            }
        }
    }

    pub fn log_sigma(&self, spec: &MetricSpec, x: &[f64]) -> f64 {
        self.sigma(spec, x).ln()
    }

    pub fn check_positive(&self, spec: &MetricSpec, x: &[f64]) -> Result<()> {
        let s = self.sigma(spec, x);
        if !(s > 0.0) {
            return Err(FinslerError::InvalidParameter(format!(
                "measure density sigma({x:?}) = {s} is not positive"
            )));
        }
        Ok(())
    }
}
