//! Central finite-difference stencils over closures.
//!
//! Used for the y-derivative fallback path (custom metrics or
//! `finite-difference` mode) and for all x-derivatives of tensor fields.
//! Pure second derivatives use the 4th-order 5-point stencil; mixed ones a
//! Richardson-extrapolated cross stencil; third derivatives are 2nd order.

use ndarray::{Array1, Array2, Array3};

fn at<F: Fn(&[f64]) -> f64>(f: &F, base: &[f64], deltas: &[(usize, f64)]) -> f64 {
    let mut p = base.to_vec();
    for &(axis, d) in deltas {
        p[axis] += d;
    }
    f(&p)
}

/// 4th-order first derivative along `axis`.
pub fn d1<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], axis: usize, h: f64) -> f64 {
    (-at(f, y, &[(axis, 2.0 * h)]) + 8.0 * at(f, y, &[(axis, h)])
        - 8.0 * at(f, y, &[(axis, -h)])
        + at(f, y, &[(axis, -2.0 * h)]))
        / (12.0 * h)
}

/// 2nd-order first derivative along `axis`.
pub fn d1_o2<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], axis: usize, h: f64) -> f64 {
    (at(f, y, &[(axis, h)]) - at(f, y, &[(axis, -h)])) / (2.0 * h)
}

/// 4th-order pure second derivative along `axis`.
pub fn d2<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], axis: usize, h: f64) -> f64 {
    (-at(f, y, &[(axis, 2.0 * h)]) + 16.0 * at(f, y, &[(axis, h)]) - 30.0 * f(y)
        + 16.0 * at(f, y, &[(axis, -h)])
        - at(f, y, &[(axis, -2.0 * h)]))
        / (12.0 * h * h)
}

fn cross<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], i: usize, j: usize, hi: f64, hj: f64) -> f64 {
    (at(f, y, &[(i, hi), (j, hj)]) + at(f, y, &[(i, -hi), (j, -hj)])
        - at(f, y, &[(i, hi), (j, -hj)])
        - at(f, y, &[(i, -hi), (j, hj)]))
        / (4.0 * hi * hj)
}

/// Mixed second derivative, Richardson-extrapolated to 4th order.
pub fn d2_mixed<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], i: usize, j: usize, h: f64) -> f64 {
    let coarse = cross(f, y, i, j, h, h);
    let fine = cross(f, y, i, j, 0.5 * h, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

pub fn gradient<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], h: f64) -> Array1<f64> {
    Array1::from_iter((0..y.len()).map(|k| d1(f, y, k, h)))
}

pub fn hessian<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], h: f64) -> Array2<f64> {
    let n = y.len();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = d2(f, y, i, h);
        for j in (i + 1)..n {
            let v = d2_mixed(f, y, i, j, h);
            m[[i, j]] = v;
            m[[j, i]] = v;
        }
    }
    m
}

/// Totally symmetric third-derivative tensor, 2nd-order stencils.
pub fn third<F: Fn(&[f64]) -> f64>(f: &F, y: &[f64], h: f64) -> Array3<f64> {
    let n = y.len();
    let mut t = Array3::zeros((n, n, n));
    let pure3 = |i: usize| {
        (at(f, y, &[(i, 2.0 * h)]) - 2.0 * at(f, y, &[(i, h)]) + 2.0 * at(f, y, &[(i, -h)])
            - at(f, y, &[(i, -2.0 * h)]))
            / (2.0 * h * h * h)
    };
    // d/dy_j of the 3-point second difference in i
    let iij = |i: usize, j: usize| {
        let d2i = |dj: f64| {
            (at(f, y, &[(i, h), (j, dj)]) - 2.0 * at(f, y, &[(j, dj)])
                + at(f, y, &[(i, -h), (j, dj)]))
                / (h * h)
        };
        (d2i(h) - d2i(-h)) / (2.0 * h)
    };
    let ijk = |i: usize, j: usize, k: usize| {
        let mut s = 0.0;
        for &si in &[1.0f64, -1.0] {
            for &sj in &[1.0f64, -1.0] {
                for &sk in &[1.0f64, -1.0] {
                    s += si * sj * sk * at(f, y, &[(i, si * h), (j, sj * h), (k, sk * h)]);
                }
            }
        }
        s / (8.0 * h * h * h)
    };
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let v = if i == j && j == k {
                    pure3(i)
                } else if i == j {
                    iij(i, k)
                } else if j == k {
                    iij(j, i)
                } else {
                    ijk(i, j, k)
                };
                // write all permutations
                for perm in [
                    [i, j, k],
                    [i, k, j],
                    [j, i, k],
                    [j, k, i],
                    [k, i, j],
                    [k, j, i],
                ] {
                    t[[perm[0], perm[1], perm[2]]] = v;
                }
            }
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    // polynomial test function with known derivatives
    fn poly(y: &[f64]) -> f64 {
        let (a, b) = (y[0], y[1]);
        a * a * a * b + 2.0 * a * b * b + 0.5 * b * b * b
    }

    #[test]
    fn stencils_hit_polynomials() {
        let y = [0.7, -0.4];
        let h = 1e-2;
        assert!((d1(&poly, &y, 0, h) - (3.0 * y[0] * y[0] * y[1] + 2.0 * y[1] * y[1])).abs() < 1e-10);
        assert!((d2(&poly, &y, 0, h) - 6.0 * y[0] * y[1]).abs() < 1e-9);
        assert!((d2_mixed(&poly, &y, 0, 1, h) - (3.0 * y[0] * y[0] + 4.0 * y[1])).abs() < 1e-9);
        let t = third(&poly, &y, 0.05);
        assert!((t[[0, 0, 0]] - 6.0 * y[1]).abs() < 1e-8);
        assert!((t[[0, 0, 1]] - 6.0 * y[0]).abs() < 1e-8);
        assert!((t[[0, 1, 1]] - 4.0).abs() < 1e-8);
        assert!((t[[1, 1, 1]] - 3.0).abs() < 1e-8);
    }
}
