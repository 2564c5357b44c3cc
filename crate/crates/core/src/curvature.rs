//! Curvatures of the metric and of the metric measure coupling.
//!
//! Riemannian-type data (Chern curvatures R and P, flag and Ricci), the
//! distortion/S-curvature family, weighted and mixed weighted Ricci, the
//! non-Riemannian tensors entering the local estimates (T, U, the
//! distortion-gradient difference, the horizontal Cartan divergence), and
//! the comparison right-hand sides.

use ndarray::{Array1, Array2, Array3, Array4};
use serde::Serialize;

use crate::chart::ChartDomain;
use crate::connection::{
    berwald_coefficients, connection_data, dx, nonlinear_connection, shifted, spray,
};
use crate::error::{FinslerError, Result};
use crate::geodesic::integrate_geodesic;
use crate::linalg;
use crate::measure::MeasureSpec;
use crate::metric::{aview, sample_grid, DerivativeMode, MetricFamily, MetricSpec, TangentPoint};
use crate::sampling;

/// Chern curvatures and derived scalars at one (x, y).
#[derive(Debug, Clone)]
pub struct CurvatureData {
    /// Chern Riemannian curvature R^i_{jkl}, antisymmetric in (k, l).
    pub r: Array4<f64>,
    /// Chern non-Riemannian curvature P^i_{jkl} = -dGamma^i_{jk}/dy^l.
    pub p: Array4<f64>,
    /// Landsberg coefficients: Berwald minus Chern connection.
    pub landsberg: Array3<f64>,
    /// Ricci scalar at (x, y).
    pub ric: f64,
}

/// Distortion and its first two derivatives along the spray geodesic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SCurvatureData {
    pub tau: f64,
    pub s: f64,
    pub s_dot: f64,
}

/// Sampled maxima of the non-Riemannian norms. `k0` bounds the sum
/// F(U) + F*(tau-difference) + F*(div C); the T-curvature maximum is
/// reported alongside as a diagnostic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NonRiemannianNorms {
    pub t_norm: f64,
    pub u_norm: f64,
    pub tau_tensor_norm: f64,
    pub div_cartan_norm: f64,
    pub k0: f64,
}

fn riemannian_fast(spec: &MetricSpec) -> bool {
    matches!(
        spec.family,
        MetricFamily::Euclidean | MetricFamily::Riemannian
    ) && spec.derivative_mode == DerivativeMode::Analytic
}

/// Christoffel symbols of a symmetric matrix field by central x-differences.
pub fn christoffel_of_matrix<F: Fn(&[f64]) -> Array2<f64>>(
    domain: &ChartDomain,
    a_of_x: &F,
    x: &[f64],
) -> Result<Array3<f64>> {
    let n = x.len();
    let hx: Vec<f64> = (0..n).map(|k| domain.fd_step(k)).collect();
    domain.stencil_ok(x, &hx)?;
    let a = a_of_x(x);
    let a_inv = linalg::inverse_spd(a.view())?;
    let mut da = Array3::<f64>::zeros((n, n, n)); // [i, j, k] = d a_ij / d x^k
    for k in 0..n {
        let ap = a_of_x(&shifted(domain, x, k, hx[k]));
        let am = a_of_x(&shifted(domain, x, k, -hx[k]));
        for i in 0..n {
            for j in 0..n {
                da[[i, j, k]] = (ap[[i, j]] - am[[i, j]]) / (2.0 * hx[k]);
            }
        }
    }
    let mut gamma = Array3::<f64>::zeros((n, n, n));
    for j in 0..n {
        for k in 0..n {
            let mut lower = Array1::<f64>::zeros(n);
            for l in 0..n {
                lower[l] = 0.5 * (da[[l, j, k]] + da[[l, k, j]] - da[[j, k, l]]);
            }
            let up = linalg::mat_vec(a_inv.view(), lower.view());
            for i in 0..n {
                gamma[[i, j, k]] = up[i];
            }
        }
    }
    Ok(gamma)
}

/// Chern connection coefficients with the Riemannian shortcut.
pub fn gamma_at(spec: &MetricSpec, domain: &ChartDomain, p: &TangentPoint) -> Result<Array3<f64>> {
    if riemannian_fast(spec) {
        christoffel_of_matrix(domain, &|xx: &[f64]| spec.a.eval(xx), &p.x)
    } else {
        Ok(connection_data(spec, domain, p)?.gamma)
    }
}

fn nonlinear_at(spec: &MetricSpec, domain: &ChartDomain, p: &TangentPoint) -> Result<Array2<f64>> {
    if riemannian_fast(spec) {
        let gamma = gamma_at(spec, domain, p)?;
        let n = p.y.len();
        let mut nm = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += gamma[[i, j, k]] * p.y[k];
                }
                nm[[i, j]] = s;
            }
        }
        Ok(nm)
    } else {
        nonlinear_connection(spec, domain, p)
    }
}

/// Chern curvatures at (x, y):
/// R^i_{jkl} = dGamma^i_{jl}/dx^k - dGamma^i_{jk}/dx^l
///           + Gamma^i_{km} Gamma^m_{jl} - Gamma^i_{lm} Gamma^m_{jk}
/// (horizontal derivatives, antisymmetric convention in k, l) and
/// P^i_{jkl} = -dGamma^i_{jk}/dy^l.
pub fn chern_curvature(
    spec: &MetricSpec,
    domain: &ChartDomain,
    p: &TangentPoint,
) -> Result<CurvatureData> {
    let (x, y) = (p.x.as_slice(), p.y.as_slice());
    let n = x.len();
    let fast = riemannian_fast(spec);
    let gamma = gamma_at(spec, domain, p)?;

    // vertical derivative of Gamma (zero for the Riemannian shortcut)
    let mut dgamma_dy: Vec<Array3<f64>> = Vec::with_capacity(n);
    if fast {
        for _ in 0..n {
            dgamma_dy.push(Array3::zeros((n, n, n)));
        }
    } else {
        let h = 1e-3 * spec.f(x, y).max(1e-8);
        for m in 0..n {
            let mut yp = y.to_vec();
            yp[m] += h;
            let mut ym = y.to_vec();
            ym[m] -= h;
            let gp = gamma_at(spec, domain, &TangentPoint::new(x.to_vec(), yp))?;
            let gm = gamma_at(spec, domain, &TangentPoint::new(x.to_vec(), ym))?;
            dgamma_dy.push((gp - gm) / (2.0 * h));
        }
    }

    // horizontal derivative: dGamma/dx^k - N^m_k dGamma/dy^m
    let nmat = nonlinear_at(spec, domain, p)?;
    let hx: Vec<f64> = (0..n).map(|k| domain.fd_step(k)).collect();
    domain.stencil_ok(x, &hx)?;
    let mut hgamma: Vec<Array3<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let gp = gamma_at(
            spec,
            domain,
            &TangentPoint::new(shifted(domain, x, k, hx[k]), y.to_vec()),
        )?;
        let gm = gamma_at(
            spec,
            domain,
            &TangentPoint::new(shifted(domain, x, k, -hx[k]), y.to_vec()),
        )?;
        let mut d = (gp - gm) / (2.0 * hx[k]);
        for m in 0..n {
            d = d - &dgamma_dy[m] * nmat[[m, k]];
        }
        hgamma.push(d);
    }

    let mut r = Array4::<f64>::zeros((n, n, n, n));
    let mut pt = Array4::<f64>::zeros((n, n, n, n));
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = hgamma[k][[i, j, l]] - hgamma[l][[i, j, k]];
                    for m in 0..n {
                        v += gamma[[i, k, m]] * gamma[[m, j, l]]
                            - gamma[[i, l, m]] * gamma[[m, j, k]];
                    }
                    r[[i, j, k, l]] = v;
                    pt[[i, j, k, l]] = -dgamma_dy[l][[i, j, k]];
                }
            }
        }
    }

    let landsberg = if fast {
        Array3::zeros((n, n, n))
    } else {
        berwald_coefficients(spec, domain, p)? - &gamma
    };

    let ric = ricci_from_r(spec, p, &r)?;
    Ok(CurvatureData {
        r,
        p: pt,
        landsberg,
        ric,
    })
}

/// Jacobi-type operator with pole y: u -> R^i_{jkl} y^j u^k y^l.
pub fn jacobi_matrix(r: &Array4<f64>, y: &[f64]) -> Array2<f64> {
    let n = y.len();
    let mut jac = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for k in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                for l in 0..n {
                    s += r[[i, j, k, l]] * y[j] * y[l];
                }
            }
            jac[[i, k]] = s;
        }
    }
    jac
}

fn ricci_from_r(spec: &MetricSpec, p: &TangentPoint, r: &Array4<f64>) -> Result<f64> {
    let fd = spec.fundamental(p)?;
    let basis = linalg::orthonormal_basis(fd.g.view(), aview(&p.y))?;
    let jac = jacobi_matrix(r, &p.y);
    // F^2 sum of flags over the orthonormal completion of y/F
    let mut ric = 0.0;
    for e in basis.iter().skip(1) {
        let je = linalg::mat_vec(jac.view(), e.view());
        ric += linalg::quad(fd.g.view(), je.view(), e.view());
    }
    Ok(ric)
}

/// Flag curvature with pole y and flag direction u.
pub fn flag_curvature(
    spec: &MetricSpec,
    domain: &ChartDomain,
    p: &TangentPoint,
    u: &[f64],
) -> Result<f64> {
    let fd = spec.fundamental(p)?;
    let hu = linalg::quad(fd.angular.view(), aview(u), aview(u));
    let gu = linalg::quad(fd.g.view(), aview(u), aview(u));
    if hu <= 1e-12 * gu.max(1e-300) {
        return Err(FinslerError::InvalidParameter(
            "flag direction is parallel to the pole".into(),
        ));
    }
    let data = chern_curvature(spec, domain, p)?;
    let jac = jacobi_matrix(&data.r, &p.y);
    let ju = linalg::mat_vec(jac.view(), aview(u));
    Ok(linalg::quad(fd.g.view(), ju.view(), aview(u)) / (fd.f * fd.f * hu))
}

/// Ricci curvature Ric(y) = F^2 sum_i K(y, e_i).
pub fn ricci(spec: &MetricSpec, domain: &ChartDomain, p: &TangentPoint) -> Result<f64> {
    Ok(chern_curvature(spec, domain, p)?.ric)
}

/// Distortion tau = log(sqrt(det g(x, y)) / sigma(x)).
pub fn distortion(spec: &MetricSpec, mu: &MeasureSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let fd = spec.fundamental(&TangentPoint::new(x.to_vec(), y.to_vec()))?;
    let det = linalg::det_spd(fd.g.view())?;
    Ok(det.sqrt().ln() - mu.log_sigma(spec, x))
}

/// Distortion with S and S-dot obtained by differencing tau along a short
/// integrated spray geodesic (5-point stencil).
pub fn s_curvature(
    spec: &MetricSpec,
    mu: &MeasureSpec,
    domain: &ChartDomain,
    p: &TangentPoint,
) -> Result<SCurvatureData> {
    let dt = 1e-3 * domain.min_extent();
    let tau0 = distortion(spec, mu, &p.x, &p.y)?;
    let mut taus = [0.0f64; 5]; // t = -2dt, -dt, 0, dt, 2dt
    taus[2] = tau0;
    for (sign, slots) in [(1.0f64, [3usize, 4usize]), (-1.0, [1, 0])] {
        let path = integrate_geodesic(spec, domain, &p.x, &p.y, sign * 2.0 * dt, 8)?;
        if path.truncated {
            return Err(FinslerError::GeodesicLeftDomain {
                t: *path.t.last().unwrap(),
            });
        }
        // samples 4 and 8 sit at |t| = dt and 2dt
        taus[slots[0]] = distortion(spec, mu, &path.x[4], &path.v[4])?;
        taus[slots[1]] = distortion(spec, mu, &path.x[8], &path.v[8])?;
    }
    let s = (-taus[4] + 8.0 * taus[3] - 8.0 * taus[1] + taus[0]) / (12.0 * dt);
    let s_dot =
        (-taus[4] + 16.0 * taus[3] - 30.0 * taus[2] + 16.0 * taus[1] - taus[0]) / (12.0 * dt * dt);
    Ok(SCurvatureData {
        tau: tau0,
        s,
        s_dot,
    })
}

fn finite_branch(n_param: f64, n_dim: usize, base: f64, s: f64) -> Result<f64> {
    let n = n_dim as f64;
    if n_param.is_infinite() {
        return Ok(base);
    }
    if n_param < n {
        return Err(FinslerError::InvalidParameter(format!(
            "weighted dimension N = {n_param} must be >= n = {n}"
        )));
    }
    if (n_param - n).abs() < 1e-12 {
        // the k = n branch collapses unless S vanishes
        if s.abs() > 1e-9 {
            return Ok(f64::NEG_INFINITY);
        }
        return Ok(base);
    }
    Ok(base - s * s / (n_param - n))
}

/// Weighted Ricci curvature Ric_N(y).
pub fn weighted_ricci(
    spec: &MetricSpec,
    mu: &MeasureSpec,
    domain: &ChartDomain,
    n_param: f64,
    p: &TangentPoint,
) -> Result<f64> {
    let ric = ricci(spec, domain, p)?;
    let sc = s_curvature(spec, mu, domain, p)?;
    finite_branch(n_param, domain.dim, ric + sc.s_dot, sc.s)
}

/// Mixed weighted Ricci: the flag trace taken against g(x, W), plus the
/// S-curvature terms of the reference V. A zero W falls back to the
/// ordinary weighted Ricci.
pub fn mixed_weighted_ricci(
    spec: &MetricSpec,
    mu: &MeasureSpec,
    domain: &ChartDomain,
    n_param: f64,
    x: &[f64],
    v: &[f64],
    w: &[f64],
) -> Result<f64> {
    let pv = TangentPoint::new(x.to_vec(), v.to_vec());
    if w.iter().all(|&t| t == 0.0) {
        return weighted_ricci(spec, mu, domain, n_param, &pv);
    }
    let data = chern_curvature(spec, domain, &pv)?;
    let jac = jacobi_matrix(&data.r, v);
    let gv = spec.fundamental(&pv)?.g;
    let gw_inv = spec
        .fundamental(&TangentPoint::new(x.to_vec(), w.to_vec()))?
        .g_inv;
    // tr_W R_V = g^{ij}(W) g_V(R_V(e_i, V)V, e_j) in the coordinate frame
    let n = x.len();
    let mut tr = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut gvj = 0.0;
            for m in 0..n {
                gvj += gv[[j, m]] * jac[[m, i]];
            }
            tr += gw_inv[[i, j]] * gvj;
        }
    }
    let sc = s_curvature(spec, mu, domain, &pv)?;
    finite_branch(n_param, domain.dim, tr + sc.s_dot, sc.s)
}

/// Weighted flag curvature K^k(V; W).
pub fn weighted_flag(
    spec: &MetricSpec,
    mu: &MeasureSpec,
    domain: &ChartDomain,
    k_param: f64,
    x: &[f64],
    v: &[f64],
    w: &[f64],
) -> Result<f64> {
    let pv = TangentPoint::new(x.to_vec(), v.to_vec());
    let base_flag = flag_curvature(spec, domain, &pv, w)?;
    let sc = s_curvature(spec, mu, domain, &pv)?;
    let n = domain.dim as f64;
    if n < 2.0 {
        return Err(FinslerError::InvalidParameter(
            "weighted flag curvature needs n >= 2".into(),
        ));
    }
    let f2 = spec.f2(x, v);
    let base = base_flag + sc.s_dot / ((n - 1.0) * f2);
    let correction = |s: f64, k: f64| s * s / ((n - 1.0) * (k - n) * f2);
    if k_param.is_infinite() {
        return Ok(base);
    }
    if k_param < n {
        return Err(FinslerError::InvalidParameter(format!(
            "weighted flag parameter k = {k_param} must be >= n = {n}"
        )));
    }
    if (k_param - n).abs() < 1e-12 {
        if sc.s.abs() > 1e-9 {
            return Ok(f64::NEG_INFINITY);
        }
        return Ok(base);
    }
    Ok(base - correction(sc.s, k_param))
}

/// T curvature: the connection difference between the Chern connection at
/// (x, y) and the Levi-Civita connection of the frozen metric g(., v),
/// contracted with v twice and measured against g_y(., y).
pub fn t_curvature(
    spec: &MetricSpec,
    domain: &ChartDomain,
    x: &[f64],
    y: &[f64],
    v: &[f64],
) -> Result<f64> {
    if y.iter().all(|&t| t == 0.0) || v.iter().all(|&t| t == 0.0) {
        return Err(FinslerError::ZeroVector);
    }
    let n = x.len();
    let py = TangentPoint::new(x.to_vec(), y.to_vec());
    let gamma = gamma_at(spec, domain, &py)?;
    let frozen = |xx: &[f64]| {
        spec.fundamental(&TangentPoint::new(xx.to_vec(), v.to_vec()))
            .map(|fd| fd.g)
            .unwrap_or_else(|_| Array2::eye(n))
    };
    let gamma_hat = christoffel_of_matrix(domain, &frozen, x)?;
    let mut diff = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            for k in 0..n {
                s += (gamma[[i, j, k]] - gamma_hat[[i, j, k]]) * v[j] * v[k];
            }
        }
        diff[i] = s;
    }
    let gy = spec.fundamental(&py)?.g;
    Ok(linalg::quad(gy.view(), diff.view(), aview(y)))
}

/// U tensor: trace-type connection difference in a g(x, W)-orthonormal
/// frame, between the Chern connection at reference W and the Levi-Civita
/// connection of the metric frozen in the direction y. Returns the vector
/// U(y, W) and the scalar g_W(U, W).
pub fn u_tensor(
    spec: &MetricSpec,
    domain: &ChartDomain,
    x: &[f64],
    y: &[f64],
    w: &[f64],
) -> Result<(Array1<f64>, f64)> {
    if y.iter().all(|&t| t == 0.0) || w.iter().all(|&t| t == 0.0) {
        return Err(FinslerError::ZeroVector);
    }
    let n = x.len();
    let pw = TangentPoint::new(x.to_vec(), w.to_vec());
    let gw = spec.fundamental(&pw)?;
    let frame = linalg::orthonormal_basis(gw.g.view(), aview(w))?;
    let gamma_w = gamma_at(spec, domain, &pw)?;
    let frozen = |xx: &[f64]| {
        spec.fundamental(&TangentPoint::new(xx.to_vec(), y.to_vec()))
            .map(|fd| fd.g)
            .unwrap_or_else(|_| Array2::eye(n))
    };
    let gamma_hat = christoffel_of_matrix(domain, &frozen, x)?;
    let mut u = Array1::<f64>::zeros(n);
    for e in &frame {
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += (gamma_w[[i, j, k]] - gamma_hat[[i, j, k]]) * e[j] * e[k];
                }
            }
            u[i] += s;
        }
    }
    let scalar = linalg::quad(gw.g.view(), u.view(), aview(w));
    Ok((u, scalar))
}

/// Horizontal differential of the distortion at reference z:
/// (d tau / d x^i)(x, z) dx^i with the vertical correction through N.
pub fn horizontal_distortion_gradient(
    spec: &MetricSpec,
    mu: &MeasureSpec,
    domain: &ChartDomain,
    x: &[f64],
    z: &[f64],
) -> Result<Array1<f64>> {
    let n = x.len();
    let pz = TangentPoint::new(x.to_vec(), z.to_vec());
    let fd = spec.fundamental(&pz)?;
    // d tau / d y^m = g^{ij} C_{ijm}
    let mut dtau_dy = Array1::<f64>::zeros(n);
    for m in 0..n {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += fd.g_inv[[i, j]] * fd.cartan[[i, j, m]];
            }
        }
        dtau_dy[m] = s;
    }
    let nmat = nonlinear_at(spec, domain, &pz)?;
    let tau_of_x = |xx: &[f64]| distortion(spec, mu, xx, z).unwrap_or(f64::NAN);
    let mut out = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut val = dx(domain, &tau_of_x, x, i);
        for m in 0..n {
            val -= nmat[[m, i]] * dtau_dy[m];
        }
        out[i] = val;
    }
    Ok(out)
}

/// Difference of the horizontal distortion gradients at two references; a
/// covector, antisymmetric in (V, W).
pub fn tau_difference(
    spec: &MetricSpec,
    mu: &MeasureSpec,
    domain: &ChartDomain,
    x: &[f64],
    v: &[f64],
    w: &[f64],
) -> Result<Array1<f64>> {
    if v.iter().all(|&t| t == 0.0) || w.iter().all(|&t| t == 0.0) {
        return Err(FinslerError::ZeroVector);
    }
    let dv = horizontal_distortion_gradient(spec, mu, domain, x, v)?;
    let dw = horizontal_distortion_gradient(spec, mu, domain, x, w)?;
    Ok(dv - dw)
}

/// Horizontal Chern divergence of the Cartan tensor contracted with V:
/// components C^{ij}_{k|i}(V) V^k and the dual norm of the result.
pub fn div_cartan(
    spec: &MetricSpec,
    domain: &ChartDomain,
    x: &[f64],
    v: &[f64],
) -> Result<(Array1<f64>, f64)> {
    if v.iter().all(|&t| t == 0.0) {
        return Err(FinslerError::ZeroVector);
    }
    let n = x.len();
    let pv = TangentPoint::new(x.to_vec(), v.to_vec());
    let raised = |xx: &[f64], yy: &[f64]| -> Result<Array3<f64>> {
        let fd = spec.fundamental(&TangentPoint::new(xx.to_vec(), yy.to_vec()))?;
        let mut c = Array3::<f64>::zeros((n, n, n)); // C^{ij}_k
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for a in 0..n {
                        for b in 0..n {
                            s += fd.g_inv[[i, a]] * fd.g_inv[[j, b]] * fd.cartan[[a, b, k]];
                        }
                    }
                    c[[i, j, k]] = s;
                }
            }
        }
        Ok(c)
    };
    let c0 = raised(x, v)?;
    let gamma = gamma_at(spec, domain, &pv)?;
    let nmat = nonlinear_at(spec, domain, &pv)?;

    // vertical derivative of the raised Cartan tensor
    let hy = 1e-3 * spec.f(x, v).max(1e-8);
    let mut dc_dy: Vec<Array3<f64>> = Vec::with_capacity(n);
    for m in 0..n {
        let mut vp = v.to_vec();
        vp[m] += hy;
        let mut vm = v.to_vec();
        vm[m] -= hy;
        dc_dy.push((raised(x, &vp)? - raised(x, &vm)?) / (2.0 * hy));
    }
    // horizontal derivative per axis
    let hx: Vec<f64> = (0..n).map(|k| domain.fd_step(k)).collect();
    domain.stencil_ok(x, &hx)?;
    let mut hderiv: Vec<Array3<f64>> = Vec::with_capacity(n);
    for l in 0..n {
        let cp = raised(&shifted(domain, x, l, hx[l]), v)?;
        let cm = raised(&shifted(domain, x, l, -hx[l]), v)?;
        let mut d = (cp - cm) / (2.0 * hx[l]);
        for m in 0..n {
            d = d - &dc_dy[m] * nmat[[m, l]];
        }
        hderiv.push(d);
    }

    let mut div = Array1::<f64>::zeros(n);
    for j in 0..n {
        let mut s = 0.0;
        for k in 0..n {
            for i in 0..n {
                let mut cov = hderiv[i][[i, j, k]];
                for m in 0..n {
                    cov += c0[[m, j, k]] * gamma[[i, m, i]] + c0[[i, m, k]] * gamma[[j, m, i]]
                        - c0[[i, j, m]] * gamma[[m, k, i]];
                }
                s += cov * v[k];
            }
        }
        div[j] = s;
    }
    let norm = spec.dual_norm(x, div.as_slice().unwrap())?;
    Ok((div, norm))
}

/// Sampled maxima of the non-Riemannian norms over a region; `k0` is the
/// bound for F(U) + F*(tau difference) + F*(div C).
pub fn k0_bound(
    spec: &MetricSpec,
    mu: &MeasureSpec,
    domain: &ChartDomain,
    points_per_axis: usize,
    directions: usize,
) -> Result<NonRiemannianNorms> {
    let pts = sample_grid(domain, points_per_axis);
    let dirs = sampling::unit_directions(domain.dim, directions);
    let mut t_norm = 0.0f64;
    let mut u_norm = 0.0f64;
    let mut tau_norm = 0.0f64;
    let mut div_norm = 0.0f64;
    for x in &pts {
        for (i, d1v) in dirs.iter().enumerate() {
            let v = d1v.as_slice().unwrap();
            let (_, dn) = div_cartan(spec, domain, x, v)?;
            div_norm = div_norm.max(dn);
            for (j, d2v) in dirs.iter().enumerate() {
                if i == j {
                    continue;
                }
                let w = d2v.as_slice().unwrap();
                t_norm = t_norm.max(t_curvature(spec, domain, x, v, w)?.abs());
                let (uvec, _) = u_tensor(spec, domain, x, v, w)?;
                if uvec.iter().any(|&t| t != 0.0) {
                    u_norm = u_norm.max(spec.f(x, uvec.as_slice().unwrap()));
                }
                let tdiff = tau_difference(spec, mu, domain, x, v, w)?;
                tau_norm = tau_norm.max(spec.dual_norm(x, tdiff.as_slice().unwrap())?);
            }
        }
    }
    Ok(NonRiemannianNorms {
        t_norm,
        u_norm,
        tau_tensor_norm: tau_norm,
        div_cartan_norm: div_norm,
        k0: u_norm + tau_norm + div_norm,
    })
}

/// The comparison profile: sqrt(c) cot(sqrt(c) r) for c > 0 (r < pi/sqrt(c)),
/// 1/r at c = 0, sqrt(-c) coth(sqrt(-c) r) for c < 0.
pub fn ct(c: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(FinslerError::InvalidParameter(format!(
            "ct requires r > 0, got {r}"
        )));
    }
    if c > 0.0 {
        let sc = c.sqrt();
        if r >= std::f64::consts::PI / sc {
            return Err(FinslerError::InvalidParameter(format!(
                "ct with c = {c} requires r < pi/sqrt(c), got {r}"
            )));
        }
        let z = sc * r;
        Ok(sc * z.cos() / z.sin())
    } else if c == 0.0 {
        Ok(1.0 / r)
    } else {
        let sc = (-c).sqrt();
        let z = sc * r;
        Ok(sc / z.tanh())
    }
}

/// Right-hand side of the weighted Hessian comparison:
/// (N-1)/(n-1) ct_c(r) (g_{grad r}(X, X) - g_{grad r}(grad r, X)^2).
pub fn hessian_comparison_rhs(
    n_param: f64,
    n_dim: usize,
    c: f64,
    r: f64,
    g_grad_r: &Array2<f64>,
    grad_r: &[f64],
    x_vec: &[f64],
) -> Result<f64> {
    if n_dim < 2 {
        return Err(FinslerError::InvalidParameter(
            "the Hessian comparison needs n >= 2".into(),
        ));
    }
    if n_param <= n_dim as f64 {
        return Err(FinslerError::InvalidParameter(
            "the Hessian comparison needs N > n".into(),
        ));
    }
    let ang = linalg::quad(g_grad_r.view(), aview(x_vec), aview(x_vec))
        - linalg::quad(g_grad_r.view(), aview(grad_r), aview(x_vec)).powi(2);
    Ok((n_param - 1.0) / (n_dim as f64 - 1.0) * ct(c, r)? * ang)
}

/// C(N, alpha) = N + (alpha - 1) n - alpha.
pub fn comparison_constant(n_param: f64, n_dim: usize, alpha: f64) -> f64 {
    n_param + (alpha - 1.0) * n_dim as f64 - alpha
}

/// Right-hand side of the nonlinear Laplacian comparison:
/// C(N, alpha) ct_{-K/C}(r) + sqrt(alpha) K0.
pub fn laplacian_comparison_rhs(
    n_param: f64,
    n_dim: usize,
    alpha: f64,
    k: f64,
    k0: f64,
    r: f64,
) -> Result<f64> {
    if n_param <= n_dim as f64 {
        return Err(FinslerError::InvalidParameter(
            "the Laplacian comparison needs N > n".into(),
        ));
    }
    if alpha < 1.0 || k < 0.0 || !(r > 0.0) {
        return Err(FinslerError::InvalidParameter(
            "the Laplacian comparison needs alpha >= 1, K >= 0, r > 0".into(),
        ));
    }
    let c_na = comparison_constant(n_param, n_dim, alpha);
    if c_na <= 0.0 {
        return Err(FinslerError::InvalidParameter(format!(
            "C(N, alpha) = {c_na} must be positive"
        )));
    }
    let l = k / c_na;
    Ok(c_na * ct(-l, r)? + alpha.sqrt() * k0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{CovectorField, MatrixField, MatrixPreset};

    fn sphere() -> (MetricSpec, ChartDomain) {
        (
            MetricSpec::riemannian(2, MatrixField::Preset(MatrixPreset::SphereChart)),
            ChartDomain::open(vec![0.3, -0.5], vec![2.8, 6.5]).unwrap(),
        )
    }

    fn torus() -> ChartDomain {
        ChartDomain::periodic(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn euclidean_curvature_vanishes() {
        let spec = MetricSpec::euclidean(2);
        let dom = torus();
        let p = TangentPoint::new(vec![0.3, 0.4], vec![1.0, -0.5]);
        let data = chern_curvature(&spec, &dom, &p).unwrap();
        assert!(data.r.iter().all(|v| v.abs() < 1e-10));
        assert!(data.p.iter().all(|v| v.abs() < 1e-10));
        assert!(data.ric.abs() < 1e-10);
    }

    #[test]
    fn sphere_chart_has_unit_flag_curvature() {
        let (spec, dom) = sphere();
        for (x, y, u) in [
            (vec![1.2, 0.5], vec![0.7, 0.2], vec![-0.1, 0.9]),
            (vec![0.9, 2.0], vec![0.0, 1.0], vec![1.0, 0.0]),
            (vec![1.8, 4.0], vec![0.5, -0.3], vec![0.2, 0.8]),
        ] {
            let p = TangentPoint::new(x, y);
            let k = flag_curvature(&spec, &dom, &p, &u).unwrap();
            assert!((k - 1.0).abs() < 2e-4, "flag = {k}");
        }
    }

    #[test]
    fn sphere_r_tensor_matches_constant_curvature_form() {
        let (spec, dom) = sphere();
        let p = TangentPoint::new(vec![1.1, 0.7], vec![0.4, 0.5]);
        let data = chern_curvature(&spec, &dom, &p).unwrap();
        // K = 1: R^i_{jkl} = delta^i_k a_jl - delta^i_l a_jk
        let a = spec.a.eval(&p.x);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let expect = (if i == k { a[[j, l]] } else { 0.0 })
                            - (if i == l { a[[j, k]] } else { 0.0 });
                        assert!(
                            (data.r[[i, j, k, l]] - expect).abs() < 2e-4,
                            "R[{i}{j}{k}{l}] = {} vs {}",
                            data.r[[i, j, k, l]],
                            expect
                        );
                        // antisymmetry in the horizontal pair
                        assert!(
                            (data.r[[i, j, k, l]] + data.r[[i, j, l, k]]).abs() < 1e-9
                        );
                    }
                }
            }
        }
        // n = 2 unit vector: Ric = F^2 K = 1 at unit speed
        let f = spec.f(&p.x, &p.y);
        assert!((data.ric / (f * f) - 1.0).abs() < 2e-4);
    }

    #[test]
    fn flag_is_invariant_under_flag_plane_shifts() {
        let (spec, dom) = sphere();
        let p = TangentPoint::new(vec![1.3, 1.0], vec![0.6, 0.1]);
        let u = vec![0.2, 0.9];
        let k1 = flag_curvature(&spec, &dom, &p, &u).unwrap();
        let shifted_u: Vec<f64> = (0..2).map(|i| 2.0 * u[i] + 3.0 * p.y[i]).collect();
        let k2 = flag_curvature(&spec, &dom, &p, &shifted_u).unwrap();
        assert!((k1 - k2).abs() < 1e-8, "{k1} vs {k2}");
    }

    #[test]
    fn ricci_is_basis_independent() {
        let (spec, dom) = sphere();
        let p = TangentPoint::new(vec![1.0, 0.4], vec![0.3, 0.8]);
        let data = chern_curvature(&spec, &dom, &p).unwrap();
        // coordinate trace of the Jacobi operator equals the basis sum
        let jac = jacobi_matrix(&data.r, &p.y);
        let trace = jac[[0, 0]] + jac[[1, 1]];
        assert!((data.ric - trace).abs() < 1e-8);
    }

    #[test]
    fn berwald_randers_has_zero_nonriemannian_curvatures() {
        let spec = MetricSpec::randers(
            2,
            MatrixField::identity(),
            CovectorField::Constant(vec![0.5, 0.0]),
        );
        let dom = torus();
        let p = TangentPoint::new(vec![0.4, 0.3], vec![1.0, 0.4]);
        let data = chern_curvature(&spec, &dom, &p).unwrap();
        assert!(data.r.iter().all(|v| v.abs() < 1e-9));
        assert!(data.p.iter().all(|v| v.abs() < 1e-9));
        let t = t_curvature(&spec, &dom, &p.x, &p.y, &[0.2, 0.9]).unwrap();
        assert!(t.abs() < 1e-9, "T = {t}");
        let (_, u) = u_tensor(&spec, &dom, &p.x, &p.y, &[0.2, 0.9]).unwrap();
        assert!(u.abs() < 1e-9, "U = {u}");
        let (_, dn) = div_cartan(&spec, &dom, &p.x, &p.y).unwrap();
        assert!(dn < 1e-9, "divC = {dn}");
    }

    #[test]
    fn landsberg_contracts_to_zero_with_pole() {
        let spec = MetricSpec::randers(
            2,
            MatrixField::identity(),
            CovectorField::Wave {
                constant: vec![0.3, 0.0],
                amplitude: vec![0.15, 0.0],
                axis: 0,
            },
        );
        let dom = torus();
        let p = TangentPoint::new(vec![0.37, 0.61], vec![0.8, 0.5]);
        let data = chern_curvature(&spec, &dom, &p).unwrap();
        for i in 0..2 {
            for k in 0..2 {
                let s: f64 = (0..2).map(|j| data.landsberg[[i, j, k]] * p.y[j]).sum();
                assert!(s.abs() < 1e-6, "L y contraction = {s}");
            }
        }
    }

    #[test]
    fn distortion_and_s_vanish_for_lebesgue_euclidean() {
        let spec = MetricSpec::euclidean(2);
        let dom = torus();
        let sc = s_curvature(
            &spec,
            &MeasureSpec::Lebesgue,
            &dom,
            &TangentPoint::new(vec![0.3, 0.3], vec![0.5, 0.2]),
        )
        .unwrap();
        assert!(sc.tau.abs() < 1e-14 && sc.s.abs() < 1e-10 && sc.s_dot.abs() < 1e-7);
    }

    #[test]
    fn gaussian_measure_weighted_ricci_is_one() {
        // tau = |x|^2/2, S = <x, y>, S-dot = |y|^2 along straight lines
        let spec = MetricSpec::euclidean(2);
        let dom = ChartDomain::open(vec![-3.0, -3.0], vec![3.0, 3.0]).unwrap();
        let p = TangentPoint::new(vec![0.4, -0.7], vec![0.6, 0.8]);
        let sc = s_curvature(&spec, &MeasureSpec::Gaussian, &dom, &p).unwrap();
        let expect_s = 0.4 * 0.6 + (-0.7) * 0.8;
        assert!((sc.s - expect_s).abs() < 1e-8, "S = {}", sc.s);
        assert!((sc.s_dot - 1.0).abs() < 1e-6, "S-dot = {}", sc.s_dot);
        let ric_inf =
            weighted_ricci(&spec, &MeasureSpec::Gaussian, &dom, f64::INFINITY, &p).unwrap();
        assert!((ric_inf - 1.0).abs() < 1e-6);
    }

    #[test]
    fn weighted_ricci_is_monotone_in_n() {
        let spec = MetricSpec::euclidean(2);
        let dom = ChartDomain::open(vec![-3.0, -3.0], vec![3.0, 3.0]).unwrap();
        let p = TangentPoint::new(vec![0.5, 0.2], vec![1.0, 0.0]);
        let mu = MeasureSpec::Gaussian;
        let r3 = weighted_ricci(&spec, &mu, &dom, 3.0, &p).unwrap();
        let r5 = weighted_ricci(&spec, &mu, &dom, 5.0, &p).unwrap();
        let rinf = weighted_ricci(&spec, &mu, &dom, f64::INFINITY, &p).unwrap();
        assert!(r3 <= r5 + 1e-12 && r5 <= rinf + 1e-12);
        assert!(weighted_ricci(&spec, &mu, &dom, 1.5, &p).is_err());
    }

    #[test]
    fn mixed_ricci_reduces_when_w_equals_v() {
        let spec = MetricSpec::randers(
            2,
            MatrixField::identity(),
            CovectorField::Wave {
                constant: vec![0.3, 0.0],
                amplitude: vec![0.1, 0.0],
                axis: 0,
            },
        );
        let dom = torus();
        let mu = MeasureSpec::Lebesgue;
        let x = vec![0.3, 0.6];
        let v = vec![0.8, 0.4];
        let direct = weighted_ricci(&spec, &mu, &dom, 4.0, &TangentPoint::new(x.clone(), v.clone()))
            .unwrap();
        let mixed = mixed_weighted_ricci(&spec, &mu, &dom, 4.0, &x, &v, &v).unwrap();
        assert!((direct - mixed).abs() < 1e-8, "{direct} vs {mixed}");
        // W = 0 falls back to the weighted Ricci
        let fallback = mixed_weighted_ricci(&spec, &mu, &dom, 4.0, &x, &v, &[0.0, 0.0]).unwrap();
        assert!((direct - fallback).abs() < 1e-12);
    }

    #[test]
    fn tau_difference_is_antisymmetric() {
        let spec = MetricSpec::randers(
            2,
            MatrixField::identity(),
            CovectorField::Wave {
                constant: vec![0.3, 0.0],
                amplitude: vec![0.15, 0.0],
                axis: 0,
            },
        );
        let dom = torus();
        let mu = MeasureSpec::Lebesgue;
        let x = vec![0.21, 0.55];
        let v = vec![1.0, 0.2];
        let w = vec![-0.3, 0.9];
        let tvw = tau_difference(&spec, &mu, &dom, &x, &v, &w).unwrap();
        let twv = tau_difference(&spec, &mu, &dom, &x, &w, &v).unwrap();
        for i in 0..2 {
            assert!((tvw[i] + twv[i]).abs() < 1e-12);
        }
        let tvv = tau_difference(&spec, &mu, &dom, &x, &v, &v).unwrap();
        assert!(tvv.iter().all(|t| t.abs() < 1e-15));
        assert!(tvw.iter().any(|t| t.abs() > 1e-6), "wave drift should misalign tau");
    }

    #[test]
    fn riemannian_nonriemannian_norms_vanish() {
        let (spec, dom) = sphere();
        let mu = MeasureSpec::RiemannianVolume;
        let region = ChartDomain::open(vec![0.8, 1.0], vec![2.0, 3.0]).unwrap();
        let norms = k0_bound(&spec, &mu, &region, 2, 4).unwrap();
        let _ = dom;
        assert!(norms.t_norm < 1e-8, "T = {}", norms.t_norm);
        assert!(norms.u_norm < 1e-8, "U = {}", norms.u_norm);
        assert!(norms.tau_tensor_norm < 1e-8);
        assert!(norms.div_cartan_norm < 1e-8);
        assert!(norms.k0 < 1e-8);
    }

    #[test]
    fn ct_examples_and_monotonicity() {
        assert!((ct(0.0, 2.0).unwrap() - 0.5).abs() < 1e-15);
        let coth1 = 1.0 / 1.0f64.tanh();
        assert!((ct(-1.0, 1.0).unwrap() - coth1).abs() < 1e-12);
        assert!(ct(1.0, 4.0).is_err());
        for c in [-0.5, 0.0, 0.7] {
            let mut prev = f64::INFINITY;
            for i in 1..40 {
                let r = 0.1 + 0.05 * i as f64;
                if c > 0.0 && r >= std::f64::consts::PI / c.sqrt() {
                    break;
                }
                let v = ct(c, r).unwrap();
                assert!(v < prev);
                prev = v;
            }
        }
        for pm in [1e-6, -1e-6] {
            for i in 0..100 {
                let r = 0.1 + 9.9 * i as f64 / 99.0;
                assert!((ct(pm, r).unwrap() - 1.0 / r).abs() <= 1e-5);
            }
        }
    }

    #[test]
    fn comparison_rhs_examples() {
        // angular factor kills X = grad r
        let g = Array2::eye(2);
        let grad_r = [1.0, 0.0];
        let rhs = hessian_comparison_rhs(3.0, 2, 0.0, 1.0, &g, &grad_r, &grad_r).unwrap();
        assert!(rhs.abs() < 1e-14);
        let xperp = [0.0, 1.0];
        let rhs2 = hessian_comparison_rhs(3.0, 2, 0.0, 1.0, &g, &grad_r, &xperp).unwrap();
        assert!((rhs2 - 2.0).abs() < 1e-14);
        // alpha = 1 collapses C(N, alpha) to N - 1
        assert!((comparison_constant(3.0, 2, 1.0) - 2.0).abs() < 1e-15);
        let v = laplacian_comparison_rhs(3.0, 2, 1.0, 0.0, 0.0, 2.0).unwrap();
        assert!((v - 1.0).abs() < 1e-15); // C/r = 2/2
        let with_k = laplacian_comparison_rhs(3.0, 2, 1.0, 1.0, 0.0, 1.0).unwrap();
        let expect = 2.0 * (0.5f64.sqrt()) * (1.0 / (0.5f64.sqrt()).tanh());
        assert!((with_k - expect).abs() < 1e-12, "{with_k} vs {expect}");
    }
}
