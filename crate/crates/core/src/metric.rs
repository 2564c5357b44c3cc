//! Metric families and the pointwise tensors built from y-derivatives of F².
//!
//! The Euclidean, Riemannian and Randers families carry hard-wired analytic
//! derivative formulas; `finite-difference` mode (and the custom family)
//! falls back to the stencils in [`crate::stencil`], which doubles as an
//! independent cross-check of the analytic path in the tests.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2, Array3, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::linalg;
use crate::stencil;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricFamily {
    Euclidean,
    Riemannian,
    Randers,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
}

/// One monomial of a polynomial matrix entry: `c * prod_k x_k^{p_k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub c: f64,
    pub p: Vec<u32>,
}

impl PolyTerm {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.c;
        for (k, &pow) in self.p.iter().enumerate() {
            v *= x[k].powi(pow as i32);
        }
        v
    }
}

/// Symmetric matrix-valued function of x (the Riemannian part).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixField {
    Preset(MatrixPreset),
    ConformalSin {
        #[serde(rename = "conformal-sin")]
        amplitude: f64,
    },
    Poly {
        poly: Vec<Vec<Vec<PolyTerm>>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixPreset {
    Identity,
    SphereChart,
}

impl MatrixField {
    pub fn eval(&self, x: &[f64]) -> Array2<f64> {
        let n = x.len();
        match self {
            MatrixField::Preset(MatrixPreset::Identity) => Array2::eye(n),
            MatrixField::Preset(MatrixPreset::SphereChart) => {
                let mut m = Array2::eye(n);
                // polar chart of the round sphere: diag(1, sin^2 x1)
                m[[1, 1]] = x[0].sin().powi(2);
                m
            }
            MatrixField::ConformalSin { amplitude } => {
                let phi = amplitude * (2.0 * std::f64::consts::PI * x[0]).sin();
                Array2::eye(n) * (2.0 * phi).exp()
            }
            MatrixField::Poly { poly } => {
                let mut m = Array2::zeros((n, n));
                for i in 0..n {
                    for j in 0..n {
                        m[[i, j]] = poly[i][j].iter().map(|t| t.eval(x)).sum();
                    }
                }
                m
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            MatrixField::Preset(MatrixPreset::Identity) => true,
            MatrixField::Preset(MatrixPreset::SphereChart) => false,
            MatrixField::ConformalSin { amplitude } => *amplitude == 0.0,
            MatrixField::Poly { poly } => poly
                .iter()
                .flatten()
                .flatten()
                .all(|t| t.p.iter().all(|&pw| pw == 0)),
        }
    }

    pub fn identity() -> Self {
        MatrixField::Preset(MatrixPreset::Identity)
    }
}

/// Covector-valued function of x (the Randers drift).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovectorField {
    Constant(Vec<f64>),
    Wave {
        constant: Vec<f64>,
        amplitude: Vec<f64>,
        axis: usize,
    },
}

impl CovectorField {
    pub fn eval(&self, x: &[f64]) -> Array1<f64> {
        match self {
            CovectorField::Constant(b) => Array1::from_vec(b.clone()),
            CovectorField::Wave {
                constant,
                amplitude,
                axis,
            } => {
                let s = (2.0 * std::f64::consts::PI * x[*axis]).sin();
                Array1::from_iter(constant.iter().zip(amplitude).map(|(c, a)| c + a * s))
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            CovectorField::Constant(_) => true,
            CovectorField::Wave { amplitude, .. } => amplitude.iter().all(|&a| a == 0.0),
        }
    }

    pub fn negated(&self) -> Self {
        match self {
            CovectorField::Constant(b) => CovectorField::Constant(b.iter().map(|v| -v).collect()),
            CovectorField::Wave {
                constant,
                amplitude,
                axis,
            } => CovectorField::Wave {
                constant: constant.iter().map(|v| -v).collect(),
                amplitude: amplitude.iter().map(|v| -v).collect(),
                axis: *axis,
            },
        }
    }
}

/// Black-box norm evaluator for the custom family.
#[derive(Clone)]
pub struct CustomEval(pub Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>);

impl fmt::Debug for CustomEval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomEval(..)")
    }
}

/// A point of the slit tangent bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl TangentPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        TangentPoint { x, y }
    }
}

/// Per-(x, y) tensor package: norm, fundamental tensor and its inverse,
/// Cartan tensor and the angular metric form.
#[derive(Debug, Clone)]
pub struct FundamentalData {
    pub f: f64,
    pub g: Array2<f64>,
    pub g_inv: Array2<f64>,
    pub cartan: Array3<f64>,
    pub angular: Array2<f64>,
}

/// Declarative description of a Finsler metric family on a chart.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MetricSpec {
    pub family: MetricFamily,
    #[serde(default)]
    pub dim: usize,
    #[serde(default = "MatrixField::identity")]
    pub a: MatrixField,
    #[serde(default)]
    pub b: Option<CovectorField>,
    #[serde(default = "default_mode")]
    pub derivative_mode: DerivativeMode,
    #[serde(skip)]
    pub custom: Option<CustomEval>,
}

fn default_mode() -> DerivativeMode {
    DerivativeMode::Analytic
}

impl MetricSpec {
    pub fn euclidean(dim: usize) -> Self {
        MetricSpec {
            family: MetricFamily::Euclidean,
            dim,
            a: MatrixField::identity(),
            b: None,
            derivative_mode: DerivativeMode::Analytic,
            custom: None,
        }
    }

    pub fn riemannian(dim: usize, a: MatrixField) -> Self {
        MetricSpec {
            family: MetricFamily::Riemannian,
            dim,
            a,
            b: None,
            derivative_mode: DerivativeMode::Analytic,
            custom: None,
        }
    }

    pub fn randers(dim: usize, a: MatrixField, b: CovectorField) -> Self {
        MetricSpec {
            family: MetricFamily::Randers,
            dim,
            a,
            b: Some(b),
            derivative_mode: DerivativeMode::Analytic,
            custom: None,
        }
    }

    pub fn custom(dim: usize, f: Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>) -> Self {
        MetricSpec {
            family: MetricFamily::Custom,
            dim,
            a: MatrixField::identity(),
            b: None,
            derivative_mode: DerivativeMode::FiniteDifference,
            custom: Some(CustomEval(f)),
        }
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.derivative_mode = mode;
        self
    }

    fn drift(&self, x: &[f64]) -> Option<Array1<f64>> {
        match self.family {
            MetricFamily::Randers => Some(
                self.b
                    .as_ref()
                    .map(|b| b.eval(x))
                    .unwrap_or_else(|| Array1::zeros(self.dim)),
            ),
            _ => None,
        }
    }

    /// True when F(x, y) does not depend on x; geodesics are then straight
    /// lines and distances reduce to F(q - p).
    pub fn is_x_independent(&self) -> bool {
        match self.family {
            MetricFamily::Euclidean => true,
            MetricFamily::Riemannian => self.a.is_constant(),
            MetricFamily::Randers => {
                self.a.is_constant() && self.b.as_ref().map_or(true, |b| b.is_constant())
            }
            MetricFamily::Custom => false,
        }
    }

    /// The reverse metric F(x, -y); stays inside the same families.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        match self.family {
            MetricFamily::Euclidean | MetricFamily::Riemannian => {}
            MetricFamily::Randers => {
                out.b = Some(
                    self.b
                        .as_ref()
                        .map(|b| b.negated())
                        .unwrap_or(CovectorField::Constant(vec![0.0; self.dim])),
                );
            }
            MetricFamily::Custom => {
                let inner = self.custom.as_ref().expect("custom evaluator").0.clone();
                out.custom = Some(CustomEval(Arc::new(move |x: &[f64], y: &[f64]| {
                    let neg: Vec<f64> = y.iter().map(|v| -v).collect();
                    inner(x, &neg)
                })));
            }
        }
        out
    }

    /// F(x, y) without precondition checks; y = 0 returns 0.
    pub fn f(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.family {
            MetricFamily::Euclidean => y.iter().map(|v| v * v).sum::<f64>().sqrt(),
            MetricFamily::Riemannian => {
                let a = self.a.eval(x);
                linalg::quad(a.view(), aview(y), aview(y)).max(0.0).sqrt()
            }
            MetricFamily::Randers => {
                let a = self.a.eval(x);
                let b = self.drift(x).unwrap();
                let alpha = linalg::quad(a.view(), aview(y), aview(y)).max(0.0).sqrt();
                let beta = linalg::dot(b.view(), aview(y));
                alpha + beta
            }
            MetricFamily::Custom => (self.custom.as_ref().expect("custom evaluator").0)(x, y),
        }
    }

    pub fn f2(&self, x: &[f64], y: &[f64]) -> f64 {
        let f = self.f(x, y);
        f * f
    }

    /// F(x, y) with the preconditions of the metric axioms enforced.
    pub fn norm(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if y.iter().all(|&v| v == 0.0) {
            return Err(FinslerError::ZeroVector);
        }
        if self.family == MetricFamily::Randers {
            let a = self.a.eval(x);
            let b = self.drift(x).unwrap();
            let a_inv = linalg::inverse_spd(a.view()).map_err(|_| FinslerError::MetricNotPositive {
                x: x.to_vec(),
                detail: "Riemannian part is not positive definite".into(),
            })?;
            let bb = linalg::quad(a_inv.view(), b.view(), b.view());
            if bb >= 1.0 {
                return Err(FinslerError::MetricNotPositive {
                    x: x.to_vec(),
                    detail: format!("Randers drift has ||b||_a = {:.6} >= 1", bb.sqrt()),
                });
            }
        }
        let f = self.f(x, y);
        if !(f > 0.0) {
            return Err(FinslerError::MetricNotPositive {
                x: x.to_vec(),
                detail: format!("F(x, y) = {f} is not positive"),
            });
        }
        Ok(f)
    }

    /// d(F^2)/dy, analytic where the family allows it.
    pub fn f2_grad_y(&self, x: &[f64], y: &[f64]) -> Array1<f64> {
        match (self.family, self.derivative_mode) {
            (MetricFamily::Euclidean, DerivativeMode::Analytic) => {
                Array1::from_iter(y.iter().map(|v| 2.0 * v))
            }
            (MetricFamily::Riemannian, DerivativeMode::Analytic) => {
                let a = self.a.eval(x);
                2.0 * linalg::mat_vec(a.view(), aview(y))
            }
            (MetricFamily::Randers, DerivativeMode::Analytic) => {
                let (a, b) = (self.a.eval(x), self.drift(x).unwrap());
                let ay = linalg::mat_vec(a.view(), aview(y));
                let alpha = linalg::dot(ay.view(), aview(y)).sqrt();
                let beta = linalg::dot(b.view(), aview(y));
                let f = alpha + beta;
                // dF/dy = ay/alpha + b, dF^2/dy = 2F dF/dy
                Array1::from_iter(
                    ay.iter()
                        .zip(b.iter())
                        .map(|(ayi, bi)| 2.0 * f * (ayi / alpha + bi)),
                )
            }
            _ => {
                let h = self.y_step(x, y);
                let f2 = |yy: &[f64]| self.f2(x, yy);
                stencil::gradient(&f2, y, h)
            }
        }
    }

    fn y_step(&self, x: &[f64], y: &[f64]) -> f64 {
        1e-3 * self.f(x, y).max(1e-8)
    }

    /// Fundamental tensor, Cartan tensor and angular metric at (x, y).
    pub fn fundamental(&self, p: &TangentPoint) -> Result<FundamentalData> {
        let (x, y) = (p.x.as_slice(), p.y.as_slice());
        if y.iter().all(|&v| v == 0.0) {
            return Err(FinslerError::ZeroVector);
        }
        let n = y.len();
        let (g, cartan) = match (self.family, self.derivative_mode) {
            (MetricFamily::Euclidean, DerivativeMode::Analytic) => {
                (Array2::eye(n), Array3::zeros((n, n, n)))
            }
            (MetricFamily::Riemannian, DerivativeMode::Analytic) => {
                (self.a.eval(x), Array3::zeros((n, n, n)))
            }
            (MetricFamily::Randers, DerivativeMode::Analytic) => {
                let (a, b) = (self.a.eval(x), self.drift(x).unwrap());
                let ay = linalg::mat_vec(a.view(), aview(y));
                let alpha = linalg::dot(ay.view(), aview(y)).sqrt();
                let beta = linalg::dot(b.view(), aview(y));
                let f = alpha + beta;
                let l = &ay / alpha;
                let m = &l + &b;
                // h^alpha_ij = a_ij - l_i l_j, p_i = b_i - (beta/alpha) l_i
                let mut g = Array2::zeros((n, n));
                let mut ha = Array2::zeros((n, n));
                for i in 0..n {
                    for j in 0..n {
                        ha[[i, j]] = a[[i, j]] - l[i] * l[j];
                        g[[i, j]] = (f / alpha) * ha[[i, j]] + m[i] * m[j];
                    }
                }
                let pvec: Array1<f64> =
                    Array1::from_iter(b.iter().zip(l.iter()).map(|(bi, li)| bi - (beta / alpha) * li));
                let mut c = Array3::zeros((n, n, n));
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            c[[i, j, k]] = (pvec[i] * ha[[j, k]]
                                + pvec[j] * ha[[i, k]]
                                + pvec[k] * ha[[i, j]])
                                / (2.0 * alpha);
                        }
                    }
                }
                (g, c)
            }
            _ => {
                let h = self.y_step(x, y);
                let f2 = |yy: &[f64]| self.f2(x, yy);
                let g = stencil::hessian(&f2, y, h) * 0.5;
                let c = stencil::third(&f2, y, h) * 0.25;
                (g, c)
            }
        };
        let f = self.f(x, y);
        let g_inv = linalg::inverse_spd(g.view()).map_err(|_| {
            let eigenvalues = linalg::sym_eigenvalues(g.view());
            FinslerError::NotPositiveDefinite {
                x: x.to_vec(),
                y: y.to_vec(),
                eigenvalues,
            }
        })?;
        // angular metric h_ij = g_ij - l_i l_j / F^2 with l = g y
        let gy = linalg::mat_vec(g.view(), aview(y));
        let mut angular = g.clone();
        for i in 0..n {
            for j in 0..n {
                angular[[i, j]] -= gy[i] * gy[j] / (f * f);
            }
        }
        Ok(FundamentalData {
            f,
            g,
            g_inv,
            cartan,
            angular,
        })
    }

    /// The Legendre map l(y) = g_y(y, .), i.e. half the y-gradient of F².
    pub fn legendre(&self, x: &[f64], y: &[f64]) -> Array1<f64> {
        self.f2_grad_y(x, y) * 0.5
    }

    /// Inverse Legendre transform: the vector y with g_y(y, .) = xi.
    ///
    /// The zero covector maps to the zero vector. Randers metrics use the
    /// closed-form dual; other families run a Newton iteration from the
    /// Riemannian dual guess.
    pub fn legendre_inverse(&self, x: &[f64], xi: &[f64]) -> Result<Array1<f64>> {
        let n = xi.len();
        if xi.iter().all(|&v| v == 0.0) {
            return Ok(Array1::zeros(n));
        }
        match (self.family, self.derivative_mode) {
            (MetricFamily::Euclidean, _) => Ok(Array1::from_vec(xi.to_vec())),
            (MetricFamily::Riemannian, _) => {
                let a = self.a.eval(x);
                linalg::solve_spd(a.view(), aview(xi))
            }
            (MetricFamily::Randers, _) => self.randers_dual_vector(x, xi),
            _ => self.legendre_newton(x, xi),
        }
    }

    /// Dual norm F*(x, xi) = F(x, legendre_inverse(xi)).
    pub fn dual_norm(&self, x: &[f64], xi: &[f64]) -> Result<f64> {
        if xi.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        match self.family {
            MetricFamily::Randers => {
                let (fstar, _, _) = self.randers_dual_parts(x, xi)?;
                Ok(fstar)
            }
            _ => {
                let y = self.legendre_inverse(x, xi)?;
                Ok(self.f(x, y.as_slice().unwrap()))
            }
        }
    }

    /// Randers dual data: F*(xi) plus the pieces needed for the dual vector.
    fn randers_dual_parts(&self, x: &[f64], xi: &[f64]) -> Result<(f64, Array1<f64>, Array1<f64>)> {
        let (a, b) = (self.a.eval(x), self.drift(x).unwrap());
        let a_inv = linalg::inverse_spd(a.view())?;
        let b_up = linalg::mat_vec(a_inv.view(), b.view());
        let bb = linalg::dot(b_up.view(), b.view());
        if bb >= 1.0 {
            return Err(FinslerError::MetricNotPositive {
                x: x.to_vec(),
                detail: format!("Randers drift has ||b||_a = {:.6} >= 1", bb.sqrt()),
            });
        }
        let lambda = 1.0 - bb;
        let n = xi.len();
        // dual Randers data: a*^{ij} = (lambda a^{ij} + b^i b^j)/lambda^2, b*^i = -b^i/lambda
        let mut a_star = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                a_star[[i, j]] = (lambda * a_inv[[i, j]] + b_up[i] * b_up[j]) / (lambda * lambda);
            }
        }
        let alpha_star = linalg::quad(a_star.view(), aview(xi), aview(xi)).sqrt();
        let beta_star = -linalg::dot(b_up.view(), aview(xi)) / lambda;
        let fstar = alpha_star + beta_star;
        let a_star_xi = linalg::mat_vec(a_star.view(), aview(xi));
        let b_star = -&b_up / lambda;
        Ok((fstar, a_star_xi / alpha_star, b_star))
    }

    fn randers_dual_vector(&self, x: &[f64], xi: &[f64]) -> Result<Array1<f64>> {
        // y = F*(xi) dF*/dxi since F*^2/2 is the Legendre conjugate of F^2/2
        let (fstar, unit, b_star) = self.randers_dual_parts(x, xi)?;
        Ok((unit + b_star) * fstar)
    }

    fn legendre_newton(&self, x: &[f64], xi: &[f64]) -> Result<Array1<f64>> {
        let a = self.a.eval(x);
        let mut y = linalg::solve_spd(a.view(), aview(xi))
            .unwrap_or_else(|_| Array1::from_vec(xi.to_vec()));
        let scale = xi.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let tol = 1e-12 * scale;
        for _ in 0..50 {
            let ys = y.as_slice().unwrap();
            let ell = self.legendre(x, ys);
            let res = Array1::from_iter(xi.iter().zip(ell.iter()).map(|(t, e)| t - e));
            let rmax = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if rmax <= tol {
                return Ok(y);
            }
            let fd = self.fundamental(&TangentPoint::new(x.to_vec(), ys.to_vec()))?;
            let step = linalg::solve_spd(fd.g.view(), res.view())?;
            y = &y + &step;
        }
        let ys = y.as_slice().unwrap();
        let ell = self.legendre(x, ys);
        let rmax = xi
            .iter()
            .zip(ell.iter())
            .fold(0.0f64, |m, (t, e)| m.max((t - e).abs()));
        Err(FinslerError::LegendreDiverged {
            iterations: 50,
            residual: rmax,
        })
    }

    /// Sanity checks on a sample grid: SPD Riemannian part, admissible
    /// Randers drift, positive 1-homogeneity for custom evaluators.
    pub fn validate(&self, domain: &crate::chart::ChartDomain, samples_per_axis: usize) -> Result<()> {
        if self.dim == 0 || self.dim != domain.dim {
            return Err(FinslerError::InvalidParameter(format!(
                "metric dim {} does not match domain dim {}",
                self.dim, domain.dim
            )));
        }
        let pts = sample_grid(domain, samples_per_axis);
        for x in &pts {
            let a = self.a.eval(x);
            linalg::cholesky(a.view()).map_err(|_| FinslerError::MetricNotPositive {
                x: x.clone(),
                detail: "Riemannian part is not positive definite".into(),
            })?;
            if self.family == MetricFamily::Randers {
                let b = self.drift(x).unwrap();
                let a_inv = linalg::inverse_spd(a.view())?;
                let bb = linalg::quad(a_inv.view(), b.view(), b.view());
                if bb >= 1.0 {
                    return Err(FinslerError::MetricNotPositive {
                        x: x.clone(),
                        detail: format!("Randers drift has ||b||_a = {:.6} >= 1", bb.sqrt()),
                    });
                }
            }
            if self.family == MetricFamily::Custom {
                let dirs = crate::sampling::unit_directions(self.dim, 8);
                for d in &dirs {
                    let f1 = self.f(x, d.as_slice().unwrap());
                    if !(f1 > 0.0) {
                        return Err(FinslerError::MetricNotPositive {
                            x: x.clone(),
                            detail: "custom F is not positive on the sample set".into(),
                        });
                    }
                    for k in [0.5, 2.0, 3.0] {
                        let scaled: Vec<f64> = d.iter().map(|v| v * k).collect();
                        let fk = self.f(x, &scaled);
                        if (fk - k * f1).abs() > 1e-8 * f1.max(1.0) * k {
                            return Err(FinslerError::InvalidParameter(format!(
                                "custom F is not positively 1-homogeneous: F(ky)/kF(y) = {}",
                                fk / (k * f1)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Mixed angular metric form h_{V, W}(X, Y) built on the reference V,
/// with the pole direction W (typically a gradient).
pub fn mixed_angular_metric(
    spec: &MetricSpec,
    x: &[f64],
    v: &[f64],
    pole: &[f64],
    xv: &[f64],
    yv: &[f64],
) -> Result<f64> {
    if v.iter().all(|&t| t == 0.0) || pole.iter().all(|&t| t == 0.0) {
        return Err(FinslerError::ZeroVector);
    }
    let fd = spec.fundamental(&TangentPoint::new(x.to_vec(), v.to_vec()))?;
    let g = fd.g.view();
    let gxw = linalg::quad(g, aview(xv), aview(pole));
    let gyw = linalg::quad(g, aview(yv), aview(pole));
    let gww = linalg::quad(g, aview(pole), aview(pole));
    Ok(linalg::quad(g, aview(xv), aview(yv)) - gxw * gyw / gww)
}

pub(crate) fn aview(s: &[f64]) -> ArrayView1<'_, f64> {
    ArrayView1::from(s)
}

pub(crate) fn sample_grid(domain: &crate::chart::ChartDomain, per_axis: usize) -> Vec<Vec<f64>> {
    let n = domain.dim;
    let mut pts = vec![vec![0.0; n]];
    for k in 0..n {
        let mut next = Vec::new();
        for p in &pts {
            for i in 0..per_axis {
                // keep sample points strictly interior
                let t = (i as f64 + 0.5) / per_axis as f64;
                let mut q = p.clone();
                q[k] = domain.lower[k] + t * domain.extent(k);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartDomain;

    fn randers_half() -> MetricSpec {
        MetricSpec::randers(
            2,
            MatrixField::identity(),
            CovectorField::Constant(vec![0.5, 0.0]),
        )
    }

    #[test]
    fn euclidean_norm_is_pythagorean() {
        let spec = MetricSpec::euclidean(2);
        assert_eq!(spec.norm(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(matches!(
            spec.norm(&[0.0, 0.0], &[0.0, 0.0]),
            Err(FinslerError::ZeroVector)
        ));
    }

    #[test]
    fn randers_norm_and_homogeneity() {
        let spec = randers_half();
        let f = spec.norm(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((f - 1.5).abs() < 1e-15);
        for y in [[0.3, -0.8], [1.0, 2.0], [-0.2, 0.1]] {
            let f1 = spec.f(&[0.1, 0.2], &y);
            let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
            assert!((spec.f(&[0.1, 0.2], &y2) - 2.0 * f1).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_overlong_drift() {
        let bad = MetricSpec::randers(
            2,
            MatrixField::identity(),
            CovectorField::Constant(vec![1.1, 0.0]),
        );
        assert!(bad.norm(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn fundamental_tensor_matches_fd_for_randers() {
        let spec = randers_half();
        let fd_spec = randers_half().with_mode(DerivativeMode::FiniteDifference);
        let p = TangentPoint::new(vec![0.0, 0.0], vec![1.0, 0.7]);
        let an = spec.fundamental(&p).unwrap();
        let fd = fd_spec.fundamental(&p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((an.g[[i, j]] - fd.g[[i, j]]).abs() < 1e-8);
                for k in 0..2 {
                    assert!((an.cartan[[i, j, k]] - fd.cartan[[i, j, k]]).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn cartan_annihilates_reference_vector() {
        let spec = randers_half();
        let y = vec![0.4, -1.1];
        let fd = spec.fundamental(&TangentPoint::new(vec![0.0, 0.0], y.clone())).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                let s: f64 = (0..2).map(|i| fd.cartan[[i, j, k]] * y[i]).sum();
                assert!(s.abs() < 1e-14);
            }
        }
        // angular metric kills the reference direction too
        let hy: f64 = (0..2)
            .map(|i| (0..2).map(|j| fd.angular[[i, j]] * y[j]).sum::<f64>().abs())
            .sum();
        assert!(hy < 1e-12);
    }

    #[test]
    fn legendre_roundtrip_and_zero_convention() {
        let spec = randers_half();
        let x = [0.0, 0.0];
        let zero = spec.legendre_inverse(&x, &[0.0, 0.0]).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        for xi in [[1.0, 0.0], [0.3, -0.9], [-1.2, 0.4]] {
            let y = spec.legendre_inverse(&x, &xi).unwrap();
            let ell = spec.legendre(&x, y.as_slice().unwrap());
            for i in 0..2 {
                assert!((ell[i] - xi[i]).abs() < 1e-12, "residual {:?}", &ell - &aview(&xi));
            }
            // F(y) = F*(xi)
            let fstar = spec.dual_norm(&x, &xi).unwrap();
            assert!((spec.f(&x, y.as_slice().unwrap()) - fstar).abs() < 1e-12);
        }
    }

    #[test]
    fn newton_matches_closed_form_dual() {
        let spec = randers_half();
        let x = [0.0, 0.0];
        let xi = [0.7, -0.2];
        let closed = spec.randers_dual_vector(&x, &xi).unwrap();
        let newton = spec.legendre_newton(&x, &xi).unwrap();
        for i in 0..2 {
            assert!((closed[i] - newton[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn mixed_angular_reduces_and_vanishes() {
        let spec = MetricSpec::euclidean(2);
        let x = [0.0, 0.0];
        let h = mixed_angular_metric(&spec, &x, &[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 0.0])
            .unwrap();
        assert!((h - 1.0).abs() < 1e-14);
        // X = Y = pole with V = pole gives zero
        let z = mixed_angular_metric(&spec, &x, &[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0], &[0.0, 1.0])
            .unwrap();
        assert!(z.abs() < 1e-14);
    }

    #[test]
    fn spec_json_roundtrip() {
        let json = r#"{"family": "randers", "a": "identity", "b": [0.5, 0.0], "derivative_mode": "analytic"}"#;
        let spec: MetricSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.family, MetricFamily::Randers);
        match spec.b.as_ref().unwrap() {
            CovectorField::Constant(b) => assert_eq!(b, &vec![0.5, 0.0]),
            _ => panic!("expected constant drift"),
        }
    }

    #[test]
    fn validates_on_domain() {
        let dom = ChartDomain::open(vec![0.3, 0.0], vec![2.8, 6.0]).unwrap();
        let spec = MetricSpec::riemannian(2, MatrixField::Preset(MatrixPreset::SphereChart));
        let mut spec = spec;
        spec.dim = 2;
        assert!(spec.validate(&dom, 4).is_ok());
    }
}
