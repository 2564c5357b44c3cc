//! Spray coefficients, nonlinear connection and Chern connection
//! coefficients. y-derivatives ride on the metric's analytic jets where
//! available; x-derivatives are 2nd-order central differences with the
//! chart-scaled step, wrapping around periodic boxes.

use ndarray::{Array1, Array2, Array3};

use crate::chart::ChartDomain;
use crate::error::Result;
use crate::linalg;
use crate::metric::{aview, MetricSpec, TangentPoint};
use crate::stencil;

/// Spray coefficients, nonlinear connection and Chern coefficients at (x, y).
#[derive(Debug, Clone)]
pub struct ConnectionData {
    /// Spray coefficients G^i (geodesics solve x'' + 2G = 0).
    pub spray: Array1<f64>,
    /// Nonlinear connection N^i_j = dG^i/dy^j.
    pub nonlinear: Array2<f64>,
    /// Chern connection coefficients Gamma^i_{jk}(x, y).
    pub gamma: Array3<f64>,
}

/// Shift x along `axis` by `delta`, wrapping on periodic boxes.
pub(crate) fn shifted(domain: &ChartDomain, x: &[f64], axis: usize, delta: f64) -> Vec<f64> {
    let mut p = x.to_vec();
    p[axis] += delta;
    domain.wrap(&mut p);
    p
}

/// d/dx^k of a scalar-valued closure, 2nd-order central.
pub(crate) fn dx<F: Fn(&[f64]) -> f64>(
    domain: &ChartDomain,
    f: &F,
    x: &[f64],
    axis: usize,
) -> f64 {
    let h = domain.fd_step(axis);
    (f(&shifted(domain, x, axis, h)) - f(&shifted(domain, x, axis, -h))) / (2.0 * h)
}

/// Spray coefficients G^i = 1/4 g^{il} (y^k d^2F^2/(dx^k dy^l) - dF^2/dx^l).
pub fn spray(
    spec: &MetricSpec,
    domain: &ChartDomain,
    p: &TangentPoint,
) -> Result<Array1<f64>> {
    let (x, y) = (p.x.as_slice(), p.y.as_slice());
    let n = x.len();
    let fd = spec.fundamental(p)?;
    let hx: Vec<f64> = (0..n).map(|k| domain.fd_step(k)).collect();
    domain.stencil_ok(x, &hx)?;
    // mixed term: y^k d/dx^k of the y-gradient of F^2
    let mut mixed = Array1::<f64>::zeros(n);
    for k in 0..n {
        if y[k] == 0.0 {
            continue;
        }
        let plus = spec.f2_grad_y(&shifted(domain, x, k, hx[k]), y);
        let minus = spec.f2_grad_y(&shifted(domain, x, k, -hx[k]), y);
        for l in 0..n {
            mixed[l] += y[k] * (plus[l] - minus[l]) / (2.0 * hx[k]);
        }
    }
    let mut rhs = Array1::<f64>::zeros(n);
    for l in 0..n {
        let f2l = dx(domain, &|xx: &[f64]| spec.f2(xx, y), x, l);
        rhs[l] = mixed[l] - f2l;
    }
    Ok(linalg::mat_vec(fd.g_inv.view(), rhs.view()) * 0.25)
}

/// N^i_j = dG^i/dy^j by 4th-order differencing of the spray.
pub fn nonlinear_connection(
    spec: &MetricSpec,
    domain: &ChartDomain,
    p: &TangentPoint,
) -> Result<Array2<f64>> {
    let (x, y) = (p.x.as_slice(), p.y.as_slice());
    let n = x.len();
    let h = 1e-3 * spec.f(x, y).max(1e-8);
    let mut nmat = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let g_at = |delta: f64| -> Result<Array1<f64>> {
            let mut yy = y.to_vec();
            yy[j] += delta;
            spray(spec, domain, &TangentPoint::new(x.to_vec(), yy))
        };
        let gp2 = g_at(2.0 * h)?;
        let gp = g_at(h)?;
        let gm = g_at(-h)?;
        let gm2 = g_at(-2.0 * h)?;
        for i in 0..n {
            nmat[[i, j]] = (-gp2[i] + 8.0 * gp[i] - 8.0 * gm[i] + gm2[i]) / (12.0 * h);
        }
    }
    Ok(nmat)
}

/// Full connection package at (x, y). The Chern coefficients come from the
/// Christoffel-type combination of horizontal derivatives of g,
/// `Gamma^i_{jk} = 1/2 g^{il} (dg_{lj}/dx^k + dg_{lk}/dx^j - dg_{jk}/dx^l)`
/// with d/dx the horizontal derivative d/dx^k - N^m_k d/dy^m.
pub fn connection_data(
    spec: &MetricSpec,
    domain: &ChartDomain,
    p: &TangentPoint,
) -> Result<ConnectionData> {
    let (x, y) = (p.x.as_slice(), p.y.as_slice());
    let n = x.len();
    let fd = spec.fundamental(p)?;
    let g_spray = spray(spec, domain, p)?;
    let nmat = nonlinear_connection(spec, domain, p)?;

    // horizontal derivative of g: dg_ij/dx^k - N^m_k * 2 C_ijm
    let mut hgrad = Array3::<f64>::zeros((n, n, n)); // [i, j, k] = delta g_ij / delta x^k
    for k in 0..n {
        let h = domain.fd_step(k);
        let gp = spec
            .fundamental(&TangentPoint::new(shifted(domain, x, k, h), y.to_vec()))?
            .g;
        let gm = spec
            .fundamental(&TangentPoint::new(shifted(domain, x, k, -h), y.to_vec()))?
            .g;
        for i in 0..n {
            for j in 0..n {
                let mut v = (gp[[i, j]] - gm[[i, j]]) / (2.0 * h);
                for m in 0..n {
                    v -= nmat[[m, k]] * 2.0 * fd.cartan[[i, j, m]];
                }
                hgrad[[i, j, k]] = v;
            }
        }
    }

    let mut gamma = Array3::<f64>::zeros((n, n, n));
    for j in 0..n {
        for k in 0..n {
            let mut lower = Array1::<f64>::zeros(n);
            for l in 0..n {
                lower[l] = 0.5 * (hgrad[[l, j, k]] + hgrad[[l, k, j]] - hgrad[[j, k, l]]);
            }
            let up = linalg::mat_vec(fd.g_inv.view(), lower.view());
            for i in 0..n {
                gamma[[i, j, k]] = up[i];
            }
        }
    }

    Ok(ConnectionData {
        spray: g_spray,
        nonlinear: nmat,
        gamma,
    })
}

/// Berwald coefficients d^2 G^i / dy^j dy^k; the Landsberg tensor is their
/// difference from the Chern coefficients.
pub fn berwald_coefficients(
    spec: &MetricSpec,
    domain: &ChartDomain,
    p: &TangentPoint,
) -> Result<Array3<f64>> {
    let (x, y) = (p.x.as_slice(), p.y.as_slice());
    let n = x.len();
    let h = 1e-2 * spec.f(x, y).max(1e-8);
    let mut b = Array3::<f64>::zeros((n, n, n));
    for i in 0..n {
        let gi = |yy: &[f64]| -> f64 {
            spray(spec, domain, &TangentPoint::new(x.to_vec(), yy.to_vec()))
                .map(|g| g[i])
                .unwrap_or(f64::NAN)
        };
        let hess = stencil::hessian(&gi, y, h);
        for j in 0..n {
            for k in 0..n {
                b[[i, j, k]] = hess[[j, k]];
            }
        }
    }
    Ok(b)
}

/// Check helper: the spray must satisfy G^i = 1/2 Gamma^i_{jk} y^j y^k.
pub fn spray_from_gamma(conn: &ConnectionData, y: &[f64]) -> Array1<f64> {
    let n = y.len();
    let mut g = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                s += conn.gamma[[i, j, k]] * y[j] * y[k];
            }
        }
        g[i] = 0.5 * s;
    }
    g
}

/// Horizontal differential of the distortion-like scalar `f(x, y)` on TM:
/// df/dx^i - N^m_i df/dy^m, with the vertical part supplied analytically
/// by the caller.
pub(crate) fn horizontal_dx<F: Fn(&[f64]) -> f64>(
    domain: &ChartDomain,
    f_of_x: &F,
    x: &[f64],
    n_mat: &Array2<f64>,
    df_dy: &Array1<f64>,
) -> Array1<f64> {
    let n = x.len();
    let mut out = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut v = dx(domain, f_of_x, x, i);
        for m in 0..n {
            v -= n_mat[[m, i]] * df_dy[m];
        }
        out[i] = v;
    }
    out
}

#[allow(dead_code)]
pub(crate) fn dot_slice(a: &[f64], b: &[f64]) -> f64 {
    linalg::dot(aview(a), aview(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{CovectorField, MatrixField, MatrixPreset};

    fn sphere_domain() -> ChartDomain {
        ChartDomain::open(vec![0.3, 0.0], vec![2.8, 6.28]).unwrap()
    }

    #[test]
    fn euclidean_connection_vanishes() {
        let spec = MetricSpec::euclidean(2);
        let dom = ChartDomain::periodic(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let p = TangentPoint::new(vec![0.2, 0.7], vec![0.5, -1.0]);
        let conn = connection_data(&spec, &dom, &p).unwrap();
        assert!(conn.spray.iter().all(|v| v.abs() < 1e-12));
        assert!(conn.nonlinear.iter().all(|v| v.abs() < 1e-12));
        assert!(conn.gamma.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn sphere_chart_matches_classical_christoffels() {
        let spec = MetricSpec::riemannian(2, MatrixField::Preset(MatrixPreset::SphereChart));
        let dom = sphere_domain();
        let p = TangentPoint::new(vec![0.9, 1.3], vec![0.4, 0.8]);
        let conn = connection_data(&spec, &dom, &p).unwrap();
        let theta = 0.9f64;
        let expected_theta_phiphi = -theta.sin() * theta.cos();
        let expected_phi_thetaphi = theta.cos() / theta.sin();
        assert!((conn.gamma[[0, 1, 1]] - expected_theta_phiphi).abs() < 1e-6);
        assert!((conn.gamma[[1, 0, 1]] - expected_phi_thetaphi).abs() < 1e-6);
        assert!((conn.gamma[[1, 1, 0]] - expected_phi_thetaphi).abs() < 1e-6);
        assert!(conn.gamma[[0, 0, 0]].abs() < 1e-6);

        // G^i = 1/2 Gamma^i_jk y^j y^k must close the loop
        let g2 = spray_from_gamma(&conn, &p.y);
        for i in 0..2 {
            assert!((conn.spray[i] - g2[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn spray_is_degree_two_homogeneous() {
        let spec = MetricSpec::randers(
            2,
            MatrixField::identity(),
            CovectorField::Wave {
                constant: vec![0.3, 0.0],
                amplitude: vec![0.1, 0.0],
                axis: 0,
            },
        );
        let dom = ChartDomain::periodic(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let x = vec![0.3, 0.6];
        let y = vec![0.7, -0.4];
        let g1 = spray(&spec, &dom, &TangentPoint::new(x.clone(), y.clone())).unwrap();
        let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        let g2 = spray(&spec, &dom, &TangentPoint::new(x, y2)).unwrap();
        for i in 0..2 {
            assert!((g2[i] - 4.0 * g1[i]).abs() < 1e-8 * (1.0 + g1[i].abs()));
        }
    }

    #[test]
    fn constant_randers_is_locally_minkowski() {
        let spec = MetricSpec::randers(
            2,
            MatrixField::identity(),
            CovectorField::Constant(vec![0.5, 0.0]),
        );
        let dom = ChartDomain::periodic(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let p = TangentPoint::new(vec![0.4, 0.1], vec![1.0, 0.3]);
        let conn = connection_data(&spec, &dom, &p).unwrap();
        assert!(conn.spray.iter().all(|v| v.abs() < 1e-10));
        assert!(conn.gamma.iter().all(|v| v.abs() < 1e-10));
    }
}
