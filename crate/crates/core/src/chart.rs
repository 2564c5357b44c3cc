//! Single-chart domains: periodic or open boxes in R^n.

use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    PeriodicBox,
    OpenBox,
}

/// Coordinate box carrying the chart. Curvature and estimate operations
/// assume n >= 2; one-dimensional boxes are accepted for the line solves
/// (the heteroclinic profile lives on an interval).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub dim: usize,
    pub topology: Topology,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ChartDomain {
    pub fn new(topology: Topology, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(FinslerError::InvalidParameter(
                "domain bounds must be nonempty and of equal length".into(),
            ));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if !(l < u) {
                return Err(FinslerError::InvalidParameter(format!(
                    "domain requires lower < upper per axis, got [{l}, {u}]"
                )));
            }
        }
        Ok(ChartDomain {
            dim: lower.len(),
            topology,
            lower,
            upper,
        })
    }

    pub fn periodic(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::new(Topology::PeriodicBox, lower, upper)
    }

    pub fn open(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        Self::new(Topology::OpenBox, lower, upper)
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn min_extent(&self) -> f64 {
        (0..self.dim)
            .map(|k| self.extent(k))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self.topology {
            Topology::PeriodicBox => true,
            Topology::OpenBox => x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&l, &u))| xi >= l && xi <= u),
        }
    }

    /// Wrap a point into the fundamental box (periodic topology only).
    pub fn wrap(&self, x: &mut [f64]) {
        if self.topology == Topology::PeriodicBox {
            for k in 0..self.dim {
                let len = self.extent(k);
                let mut t = (x[k] - self.lower[k]) % len;
                if t < 0.0 {
                    t += len;
                }
                x[k] = self.lower[k] + t;
            }
        }
    }

    /// Step size for x-direction finite differences on this chart.
    pub fn fd_step(&self, axis: usize) -> f64 {
        1e-4 * self.extent(axis)
    }

    /// Check that an x-stencil of half-width `h` in every axis stays inside
    /// an open box; periodic boxes always pass.
    pub fn stencil_ok(&self, x: &[f64], h: &[f64]) -> Result<()> {
        if self.topology == Topology::OpenBox {
            for k in 0..self.dim {
                if x[k] - h[k] < self.lower[k] || x[k] + h[k] > self.upper[k] {
                    return Err(FinslerError::StencilOutOfDomain(x.to_vec()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_and_contains() {
        let d = ChartDomain::periodic(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let mut x = vec![1.25, -0.5];
        d.wrap(&mut x);
        assert!((x[0] - 0.25).abs() < 1e-15 && (x[1] - 1.5).abs() < 1e-15);

        let o = ChartDomain::open(vec![-1.0], vec![1.0]).unwrap();
        assert!(o.contains(&[0.3]) && !o.contains(&[1.5]));
        assert!(o.stencil_ok(&[0.9999], &[0.01]).is_err());
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(ChartDomain::open(vec![1.0], vec![1.0]).is_err());
        assert!(ChartDomain::open(vec![], vec![]).is_err());
    }
}
