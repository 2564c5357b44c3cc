//! Global scalar invariants of a metric on a region: reversibility,
//! uniform convexity/smoothness constants and the misalignment.
//!
//! Suprema are approached by deterministic sampling (uniform angles in 2D,
//! a Fibonacci sphere in 3D) followed by simplex refinement from the best
//! sample; the reported numbers are lower bounds for maxima (upper bounds
//! for minima) at the recorded resolution.

use serde::{Deserialize, Serialize};

use crate::chart::ChartDomain;
use crate::error::Result;
use crate::linalg;
use crate::metric::{aview, sample_grid, MetricSpec, TangentPoint};
use crate::optim::NelderMead;
use crate::sampling;

/// Sampling resolution used when estimating the invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingResolution {
    pub points_per_axis: usize,
    pub directions: usize,
    pub refined: bool,
}

impl Default for SamplingResolution {
    fn default() -> Self {
        SamplingResolution {
            points_per_axis: 5,
            directions: 64,
            refined: true,
        }
    }
}

/// Reversibility, uniform constants and misalignment with their resolution
/// record. `rho` and `alpha` are sampled lower bounds of suprema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalInvariants {
    pub rho: f64,
    pub kappa: f64,
    pub kappa_star: f64,
    pub alpha: f64,
    pub resolution: SamplingResolution,
}

/// Reversibility rho = sup F(x, y) / F(x, -y).
pub fn reversibility(
    spec: &MetricSpec,
    region: &ChartDomain,
    res: SamplingResolution,
) -> Result<f64> {
    let dirs = sampling::unit_directions(region.dim, res.directions.max(64));
    let pts = sample_grid(region, res.points_per_axis);
    let ratio = |x: &[f64], y: &[f64]| -> f64 {
        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        spec.f(x, y) / spec.f(x, &neg)
    };
    let mut best = 1.0f64;
    let mut best_arg: Option<(Vec<f64>, Vec<f64>)> = None;
    for x in &pts {
        for d in &dirs {
            let r = ratio(x, d.as_slice().unwrap());
            if r > best {
                best = r;
                best_arg = Some((x.clone(), d.to_vec()));
            }
        }
    }
    if res.refined {
        if let Some((x0, d0)) = best_arg {
            let adim = sampling::angle_dim(region.dim);
            let mut p0 = x0.clone();
            p0.extend(sampling::angles_of_direction(region.dim, &d0));
            let nm = NelderMead {
                max_iter: 300,
                ftol: 1e-14,
                initial_step: 0.05,
            };
            let dim = region.dim;
            let (_, refined) = nm.maximize(&p0, |p| {
                let mut x = p[..dim].to_vec();
                region.wrap(&mut x);
                if !region.contains(&x) {
                    return f64::NEG_INFINITY;
                }
                let d = sampling::direction_from_angles(dim, &p[dim..dim + adim]);
                ratio(&x, d.as_slice().unwrap())
            });
            best = best.max(refined);
        }
    }
    Ok(best)
}

/// Uniform smoothness and convexity constants:
/// kappa = sup g_V(y, y)/F^2(y), kappa* = inf over reference V and test y.
pub fn uniform_constants(
    spec: &MetricSpec,
    region: &ChartDomain,
    res: SamplingResolution,
) -> Result<(f64, f64)> {
    let dirs = sampling::unit_directions(region.dim, res.directions.max(64));
    let pts = sample_grid(region, res.points_per_axis);
    let ratio = |x: &[f64], v: &[f64], y: &[f64]| -> Result<f64> {
        let fd = spec.fundamental(&TangentPoint::new(x.to_vec(), v.to_vec()))?;
        let f = spec.f(x, y);
        Ok(linalg::quad(fd.g.view(), aview(y), aview(y)) / (f * f))
    };
    let mut kmax = f64::NEG_INFINITY;
    let mut kmin = f64::INFINITY;
    let mut arg_max: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None;
    let mut arg_min: Option<(Vec<f64>, Vec<f64>, Vec<f64>)> = None;
    for x in &pts {
        for v in &dirs {
            let fd = spec.fundamental(&TangentPoint::new(x.clone(), v.to_vec()))?;
            for y in &dirs {
                let f = spec.f(x, y.as_slice().unwrap());
                let r = linalg::quad(fd.g.view(), y.view(), y.view()) / (f * f);
                if r > kmax {
                    kmax = r;
                    arg_max = Some((x.clone(), v.to_vec(), y.to_vec()));
                }
                if r < kmin {
                    kmin = r;
                    arg_min = Some((x.clone(), v.to_vec(), y.to_vec()));
                }
            }
        }
    }
    if res.refined {
        let adim = sampling::angle_dim(region.dim);
        let dim = region.dim;
        let nm = NelderMead {
            max_iter: 300,
            ftol: 1e-14,
            initial_step: 0.05,
        };
        let eval = |p: &[f64]| -> Option<f64> {
            let mut x = p[..dim].to_vec();
            region.wrap(&mut x);
            if !region.contains(&x) {
                return None;
            }
            let v = sampling::direction_from_angles(dim, &p[dim..dim + adim]);
            let y = sampling::direction_from_angles(dim, &p[dim + adim..dim + 2 * adim]);
            ratio(&x, v.as_slice().unwrap(), y.as_slice().unwrap()).ok()
        };
        if let Some((x0, v0, y0)) = arg_max {
            let mut p0 = x0;
            p0.extend(sampling::angles_of_direction(dim, &v0));
            p0.extend(sampling::angles_of_direction(dim, &y0));
            let (_, r) = nm.maximize(&p0, |p| eval(p).unwrap_or(f64::NEG_INFINITY));
            kmax = kmax.max(r);
        }
        if let Some((x0, v0, y0)) = arg_min {
            let mut p0 = x0;
            p0.extend(sampling::angles_of_direction(dim, &v0));
            p0.extend(sampling::angles_of_direction(dim, &y0));
            let (_, r) = nm.minimize(&p0, |p| eval(p).unwrap_or(f64::INFINITY));
            kmin = kmin.min(r);
        }
    }
    Ok((kmax, kmin))
}

/// Misalignment alpha = sup over x and direction triples (V, W, Y) of
/// g_V(Y, Y) / g_W(Y, Y).
pub fn misalignment(
    spec: &MetricSpec,
    region: &ChartDomain,
    res: SamplingResolution,
) -> Result<f64> {
    let dirs = sampling::unit_directions(region.dim, res.directions.max(64));
    let pts = sample_grid(region, res.points_per_axis);
    let mut best = 1.0f64;
    let mut best_arg: Option<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> = None;
    for x in &pts {
        // for each Y: max over V of g_V(Y,Y), min over W of g_W(Y,Y)
        let gs: Vec<_> = dirs
            .iter()
            .map(|v| spec.fundamental(&TangentPoint::new(x.clone(), v.to_vec())))
            .collect::<Result<Vec<_>>>()?;
        for y in &dirs {
            let mut num = f64::NEG_INFINITY;
            let mut den = f64::INFINITY;
            let mut viopt = 0usize;
            let mut wiopt = 0usize;
            for (i, fd) in gs.iter().enumerate() {
                let q = linalg::quad(fd.g.view(), y.view(), y.view());
                if q > num {
                    num = q;
                    viopt = i;
                }
                if q < den {
                    den = q;
                    wiopt = i;
                }
            }
            let r = num / den;
            if r > best {
                best = r;
                best_arg = Some((x.clone(), dirs[viopt].to_vec(), dirs[wiopt].to_vec(), y.to_vec()));
            }
        }
    }
    if res.refined {
        if let Some((x0, v0, w0, y0)) = best_arg {
            let dim = region.dim;
            let adim = sampling::angle_dim(dim);
            let mut p0 = x0;
            p0.extend(sampling::angles_of_direction(dim, &v0));
            p0.extend(sampling::angles_of_direction(dim, &w0));
            p0.extend(sampling::angles_of_direction(dim, &y0));
            let nm = NelderMead {
                max_iter: 400,
                ftol: 1e-14,
                initial_step: 0.05,
            };
            let (_, refined) = nm.maximize(&p0, |p| {
                let mut x = p[..dim].to_vec();
                region.wrap(&mut x);
                if !region.contains(&x) {
                    return f64::NEG_INFINITY;
                }
                let v = sampling::direction_from_angles(dim, &p[dim..dim + adim]);
                let w = sampling::direction_from_angles(dim, &p[dim + adim..dim + 2 * adim]);
                let y = sampling::direction_from_angles(dim, &p[dim + 2 * adim..dim + 3 * adim]);
                let gv = match spec.fundamental(&TangentPoint::new(x.clone(), v.to_vec())) {
                    Ok(fd) => fd.g,
                    Err(_) => return f64::NEG_INFINITY,
                };
                let gw = match spec.fundamental(&TangentPoint::new(x, w.to_vec())) {
                    Ok(fd) => fd.g,
                    Err(_) => return f64::NEG_INFINITY,
                };
                linalg::quad(gv.view(), y.view(), y.view())
                    / linalg::quad(gw.view(), y.view(), y.view())
            });
            best = best.max(refined);
        }
    }
    Ok(best)
}

/// All four invariants at once.
pub fn global_invariants(
    spec: &MetricSpec,
    region: &ChartDomain,
    res: SamplingResolution,
) -> Result<GlobalInvariants> {
    let rho = reversibility(spec, region, res)?;
    let (kappa, kappa_star) = uniform_constants(spec, region, res)?;
    let alpha = misalignment(spec, region, res)?;
    Ok(GlobalInvariants {
        rho,
        kappa,
        kappa_star,
        alpha,
        resolution: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{CovectorField, MatrixField};

    fn torus() -> ChartDomain {
        ChartDomain::periodic(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn euclidean_invariants_are_one() {
        let spec = MetricSpec::euclidean(2);
        let inv = global_invariants(&spec, &torus(), SamplingResolution {
            points_per_axis: 2,
            directions: 64,
            refined: false,
        })
        .unwrap();
        assert!((inv.rho - 1.0).abs() < 1e-12);
        assert!((inv.kappa - 1.0).abs() < 1e-12);
        assert!((inv.kappa_star - 1.0).abs() < 1e-12);
        assert!((inv.alpha - 1.0).abs() < 1e-12);
    }

    #[test]
    fn randers_reversibility_hits_closed_form() {
        // (1 + c cos t)/(1 - c cos t) maximized at t = 0: (1+c)/(1-c) = 3 for c = 1/2
        let spec = MetricSpec::randers(
            2,
            MatrixField::identity(),
            CovectorField::Constant(vec![0.5, 0.0]),
        );
        let rho = reversibility(&spec, &torus(), SamplingResolution::default()).unwrap();
        assert!((rho - 3.0).abs() < 1e-6, "rho = {rho}");
    }

    #[test]
    fn eq12_ordering_holds_for_randers() {
        let spec = MetricSpec::randers(
            2,
            MatrixField::identity(),
            CovectorField::Constant(vec![0.3, 0.2]),
        );
        let inv = global_invariants(&spec, &torus(), SamplingResolution::default()).unwrap();
        assert!(inv.rho >= 1.0);
        let cap = inv.kappa.sqrt().min((1.0 / inv.kappa_star).sqrt());
        assert!(inv.rho <= cap + 1e-6, "rho = {}, cap = {}", inv.rho, cap);
        assert!(inv.alpha >= 1.0);
    }
}
