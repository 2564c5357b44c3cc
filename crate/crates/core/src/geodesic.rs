//! Spray geodesics: fixed-step RK4 integration, the exponential map,
//! shooting-based forward distances and distance fields.

use ndarray::Array1;
use serde::Serialize;

use crate::chart::{ChartDomain, Topology};
use crate::connection::spray;
use crate::error::{FinslerError, Result};
use crate::grid::GridField;
use crate::metric::{MetricSpec, TangentPoint};
use crate::optim::NelderMead;
use crate::sampling;

/// One integrated geodesic: samples of (t, x, x') with the speed record.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicPath {
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub speed: Vec<f64>,
    /// Set when the path left an open-box domain and was truncated.
    pub truncated: bool,
}

impl GeodesicPath {
    pub fn endpoint(&self) -> (&[f64], &[f64]) {
        (
            self.x.last().expect("nonempty path"),
            self.v.last().expect("nonempty path"),
        )
    }

    /// Max relative drift of F(gamma, gamma') along the path.
    pub fn speed_drift(&self) -> f64 {
        let s0 = self.speed[0];
        self.speed
            .iter()
            .fold(0.0f64, |m, s| m.max((s - s0).abs() / s0))
    }

    /// CSV rows `t, x^1..x^n, speed`.
    pub fn to_csv(&self) -> String {
        let n = self.x[0].len();
        let mut out = String::from("t");
        for k in 1..=n {
            out.push_str(&format!(",x{k}"));
        }
        out.push_str(",speed\n");
        for i in 0..self.t.len() {
            out.push_str(&format!("{:.17e}", self.t[i]));
            for v in &self.x[i] {
                out.push_str(&format!(",{:.17e}", v));
            }
            out.push_str(&format!(",{:.17e}\n", self.speed[i]));
        }
        out
    }
}

fn accel(spec: &MetricSpec, domain: &ChartDomain, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let g = spray(spec, domain, &TangentPoint::new(x.to_vec(), v.to_vec()))?;
    Ok(g.iter().map(|gi| -2.0 * gi).collect())
}

/// Classical RK4 on the spray ODE x'' + 2G(x, x') = 0 with fixed step.
///
/// `t_max` may be negative (the same integral curve run backwards). On an
/// open box the path is truncated with a flag when it exits.
pub fn integrate_geodesic(
    spec: &MetricSpec,
    domain: &ChartDomain,
    x0: &[f64],
    y0: &[f64],
    t_max: f64,
    steps: usize,
) -> Result<GeodesicPath> {
    if y0.iter().all(|&v| v == 0.0) {
        return Err(FinslerError::ZeroVector);
    }
    let n = x0.len();
    let dt = t_max / steps as f64;
    let mut x = x0.to_vec();
    let mut v = y0.to_vec();
    let mut path = GeodesicPath {
        t: vec![0.0],
        x: vec![x.clone()],
        v: vec![v.clone()],
        speed: vec![spec.f(&x, &v)],
        truncated: false,
    };
    for step in 1..=steps {
        let k1x = v.clone();
        let k1v = accel(spec, domain, &x, &v)?;
        let xa: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * dt * k1x[i]).collect();
        let va: Vec<f64> = (0..n).map(|i| v[i] + 0.5 * dt * k1v[i]).collect();
        let k2x = va.clone();
        let k2v = accel(spec, domain, &xa, &va)?;
        let xb: Vec<f64> = (0..n).map(|i| x[i] + 0.5 * dt * k2x[i]).collect();
        let vb: Vec<f64> = (0..n).map(|i| v[i] + 0.5 * dt * k2v[i]).collect();
        let k3x = vb.clone();
        let k3v = accel(spec, domain, &xb, &vb)?;
        let xc: Vec<f64> = (0..n).map(|i| x[i] + dt * k3x[i]).collect();
        let vc: Vec<f64> = (0..n).map(|i| v[i] + dt * k3v[i]).collect();
        let k4x = vc.clone();
        let k4v = accel(spec, domain, &xc, &vc)?;
        for i in 0..n {
            x[i] += dt / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
        if domain.topology == Topology::OpenBox && !domain.contains(&x) {
            path.truncated = true;
            break;
        }
        path.t.push(step as f64 * dt);
        path.x.push(x.clone());
        path.v.push(v.clone());
        path.speed.push(spec.f(&x, &v));
    }
    Ok(path)
}

/// Endpoint of the unit-time geodesic from (x0, y0).
pub fn exp_map(
    spec: &MetricSpec,
    domain: &ChartDomain,
    x0: &[f64],
    y0: &[f64],
    steps: usize,
) -> Result<Vec<f64>> {
    if y0.iter().all(|&v| v == 0.0) {
        return Ok(x0.to_vec());
    }
    let path = integrate_geodesic(spec, domain, x0, y0, 1.0, steps)?;
    if path.truncated {
        return Err(FinslerError::GeodesicLeftDomain {
            t: *path.t.last().unwrap(),
        });
    }
    Ok(path.endpoint().0.to_vec())
}

fn euclid_gap(a: &[f64], b: &[f64], domain: &ChartDomain) -> f64 {
    let mut s = 0.0;
    for k in 0..a.len() {
        let mut d = a[k] - b[k];
        if domain.topology == Topology::PeriodicBox {
            let len = domain.extent(k);
            d = d.rem_euclid(len);
            if d > 0.5 * len {
                d -= len;
            }
        }
        s += d * d;
    }
    s.sqrt()
}

/// Forward distance d(p, q) >= 0.
///
/// For x-independent metrics the minimizer is the straight segment and
/// d = F(q - p). Otherwise a shooting method minimizes the endpoint
/// mismatch of exp_p(r v) over the direction angles and the radius r,
/// with multi-starts; `d` is the optimal r (unit-speed parametrization).
pub fn forward_distance(
    spec: &MetricSpec,
    domain: &ChartDomain,
    p: &[f64],
    q: &[f64],
    steps: usize,
) -> Result<f64> {
    let n = p.len();
    if p == q {
        return Ok(0.0);
    }
    if spec.is_x_independent() {
        let d: Vec<f64> = (0..n).map(|i| q[i] - p[i]).collect();
        return Ok(spec.f(p, &d));
    }
    let adim = sampling::angle_dim(n);
    let chord: Vec<f64> = (0..n).map(|i| q[i] - p[i]).collect();
    let chord_angles = sampling::angles_of_direction(n, &chord);
    let r0 = spec.f(p, &chord);
    let objective = |params: &[f64]| -> f64 {
        let r = params[adim].abs().max(1e-12);
        let dir = sampling::direction_from_angles(n, &params[..adim]);
        let fdir = spec.f(p, dir.as_slice().unwrap());
        let y: Vec<f64> = dir.iter().map(|v| r * v / fdir).collect();
        match exp_map(spec, domain, p, &y, steps) {
            Ok(end) => euclid_gap(&end, q, domain),
            Err(_) => f64::INFINITY,
        }
    };
    let nm = NelderMead {
        max_iter: 300,
        ftol: 1e-16,
        initial_step: 0.05,
    };
    let mut best: Option<(f64, f64)> = None; // (mismatch, r)
    for start in 0..8 {
        let mut p0 = chord_angles.clone();
        if start > 0 {
            let jitter = 0.3 * start as f64;
            for a in p0.iter_mut() {
                *a += jitter * if start % 2 == 0 { 1.0 } else { -1.0 };
            }
        }
        p0.push(r0 * (1.0 + 0.1 * (start % 3) as f64));
        let (arg, mismatch) = nm.minimize(&p0, objective);
        let r = arg[adim].abs();
        if best.map_or(true, |(m, _)| mismatch < m) {
            best = Some((mismatch, r));
        }
        if mismatch <= 1e-7 {
            break;
        }
    }
    let (mismatch, r) = best.unwrap();
    if mismatch > 1e-7 * (1.0 + r0) {
        return Err(FinslerError::ShootingFailed {
            mismatch,
            starts: 8,
        });
    }
    Ok(r)
}

/// Forward distance from `p` to every node of `grid`, for the cut-off
/// profiles of the local estimates.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub origin: Vec<f64>,
    pub field: GridField,
    pub method: &'static str,
}

pub fn distance_field(
    spec: &MetricSpec,
    domain: &ChartDomain,
    p: &[f64],
    resolution: &[usize],
    steps: usize,
) -> Result<DistanceField> {
    let mut field = GridField::zeros(domain.clone(), resolution.to_vec())?;
    let direct = spec.is_x_independent();
    for idx in 0..field.len() {
        let x = field.node_position(idx);
        let d = if x == p {
            0.0
        } else {
            forward_distance(spec, domain, p, &x, steps)?
        };
        field.values[idx] = d;
    }
    Ok(DistanceField {
        origin: p.to_vec(),
        field,
        method: if direct { "direct" } else { "shooting" },
    })
}
