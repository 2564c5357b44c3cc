//! Dense helpers for the tiny (n <= 3) systems that show up pointwise.
//!
//! Everything works on `ndarray` views so callers can keep tensors in
//! `Array2`/`Array3` form. The dimension is small and known at run time,
//! so plain loops beat any factorization library here.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{FinslerError, Result};

pub fn dot(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn mat_vec(m: ArrayView2<f64>, v: ArrayView1<f64>) -> Array1<f64> {
    let n = v.len();
    let mut out = Array1::zeros(n);
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            s += m[[i, j]] * v[j];
        }
        out[i] = s;
    }
    out
}

/// Quadratic form v^T M w.
pub fn quad(m: ArrayView2<f64>, v: ArrayView1<f64>, w: ArrayView1<f64>) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += m[[i, j]] * v[i] * w[j];
        }
    }
    s
}

/// Cholesky factor (lower) of an SPD matrix; errors on a non-positive pivot.
pub fn cholesky(m: ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = m.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(FinslerError::SingularMatrix { pivot: i, value: s });
                }
                l[[i, j]] = s.sqrt();
            } else {
                l[[i, j]] = s / l[[j, j]];
            }
        }
    }
    Ok(l)
}

pub fn det_spd(m: ArrayView2<f64>) -> Result<f64> {
    let l = cholesky(m)?;
    let mut d = 1.0;
    for i in 0..l.nrows() {
        d *= l[[i, i]];
    }
    Ok(d * d)
}

/// Solve M x = b for SPD M via Cholesky.
pub fn solve_spd(m: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<Array1<f64>> {
    let l = cholesky(m)?;
    let n = b.len();
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * y[k];
        }
        y[i] = s / l[[i, i]];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * x[k];
        }
        x[i] = s / l[[i, i]];
    }
    Ok(x)
}

/// Inverse of an SPD matrix.
pub fn inverse_spd(m: ArrayView2<f64>) -> Result<Array2<f64>> {
    let n = m.nrows();
    let mut inv = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut e = Array1::<f64>::zeros(n);
        e[j] = 1.0;
        let col = solve_spd(m, e.view())?;
        for i in 0..n {
            inv[[i, j]] = col[i];
        }
    }
    Ok(inv)
}

/// Eigenvalues of a symmetric matrix, ascending. Jacobi rotations; n <= 4 in practice.
pub fn sym_eigenvalues(m: ArrayView2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.to_owned();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[[i, j]] * a[[i, j]];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Gram-Schmidt a basis orthonormal w.r.t. the inner product `g`, starting
/// from `first` (kept as the first direction, normalized).
pub fn orthonormal_basis(g: ArrayView2<f64>, first: ArrayView1<f64>) -> Result<Vec<Array1<f64>>> {
    let n = g.nrows();
    let mut basis: Vec<Array1<f64>> = Vec::with_capacity(n);
    let norm0 = quad(g, first, first).sqrt();
    if !(norm0 > 0.0) {
        return Err(FinslerError::ZeroVector);
    }
    basis.push(first.to_owned() / norm0);
    // complete with coordinate directions, skipping near-dependent ones
    for k in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = Array1::<f64>::zeros(n);
        v[k] = 1.0;
        for b in &basis {
            let c = quad(g, v.view(), b.view());
            v = &v - &(b * c);
        }
        let nv = quad(g, v.view(), v.view()).sqrt();
        if nv > 1e-8 {
            basis.push(v / nv);
        }
    }
    if basis.len() != n {
        return Err(FinslerError::InvalidParameter(
            "failed to complete an orthonormal basis".into(),
        ));
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn cholesky_solve_roundtrip() {
        let m = array![[4.0, 1.0, 0.2], [1.0, 3.0, 0.5], [0.2, 0.5, 2.0]];
        let b = array![1.0, -2.0, 0.5];
        let x = solve_spd(m.view(), b.view()).unwrap();
        let r = mat_vec(m.view(), x.view()) - &b;
        assert!(r.iter().all(|v| v.abs() < 1e-12));
        let inv = inverse_spd(m.view()).unwrap();
        let id = inv.dot(&m);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[[i, j]] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spd_rejected_when_indefinite() {
        let m = array![[1.0, 2.0], [2.0, 1.0]];
        assert!(cholesky(m.view()).is_err());
        let eigs = sym_eigenvalues(m.view());
        assert!((eigs[0] + 1.0).abs() < 1e-12 && (eigs[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn basis_is_orthonormal() {
        let g = array![[2.0, 0.3], [0.3, 1.0]];
        let first = array![1.0, 1.0];
        let basis = orthonormal_basis(g.view(), first.view()).unwrap();
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((quad(g.view(), a.view(), b.view()) - e).abs() < 1e-10);
            }
        }
    }
}
