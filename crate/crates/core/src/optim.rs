//! Nelder-Mead simplex minimizer for the low-dimensional refinement and
//! shooting problems (1-4 parameters).

pub struct NelderMead {
    pub max_iter: usize,
    pub ftol: f64,
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_iter: 200,
            ftol: 1e-12,
            initial_step: 0.1,
        }
    }
}

impl NelderMead {
    /// Minimize `f` from `x0`; returns (argmin, min).
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, x0: &[f64], mut f: F) -> (Vec<f64>, f64) {
        let n = x0.len();
        if n == 0 {
            let v = f(x0);
            return (x0.to_vec(), v);
        }
        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), f(x0)));
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += self.initial_step.max(1e-6);
            let v = f(&p);
            simplex.push((p, v));
        }
        for _ in 0..self.max_iter {
            simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
            if (simplex[n].1 - simplex[0].1).abs() <= self.ftol * (1.0 + simplex[0].1.abs()) {
                break;
            }
            let mut centroid = vec![0.0; n];
            for item in simplex.iter().take(n) {
                for k in 0..n {
                    centroid[k] += item.0[k] / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let reflect: Vec<f64> = (0..n)
                .map(|k| centroid[k] + alpha * (centroid[k] - worst.0[k]))
                .collect();
            let fr = f(&reflect);
            if fr < simplex[0].1 {
                let expand: Vec<f64> = (0..n)
                    .map(|k| centroid[k] + gamma * (reflect[k] - centroid[k]))
                    .collect();
                let fe = f(&expand);
                simplex[n] = if fe < fr { (expand, fe) } else { (reflect, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (reflect, fr);
            } else {
                let contract: Vec<f64> = (0..n)
                    .map(|k| centroid[k] + rho * (worst.0[k] - centroid[k]))
                    .collect();
                let fc = f(&contract);
                if fc < worst.1 {
                    simplex[n] = (contract, fc);
                } else {
                    let best = simplex[0].0.clone();
                    for item in simplex.iter_mut().skip(1) {
                        let p: Vec<f64> = (0..n)
                            .map(|k| best[k] + sigma * (item.0[k] - best[k]))
                            .collect();
                        let v = f(&p);
                        *item = (p, v);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        simplex[0].clone()
    }

    /// Maximize by minimizing the negation.
    pub fn maximize<F: FnMut(&[f64]) -> f64>(&self, x0: &[f64], mut f: F) -> (Vec<f64>, f64) {
        let (x, v) = self.minimize(x0, |p| -f(p));
        (x, -v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let nm = NelderMead {
            max_iter: 500,
            ftol: 1e-14,
            initial_step: 0.5,
        };
        let (x, v) = nm.minimize(&[3.0, -2.0], |p| {
            (p[0] - 1.0).powi(2) + 2.0 * (p[1] + 0.5).powi(2)
        });
        assert!(v < 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] + 0.5).abs() < 1e-4);
    }

    #[test]
    fn refines_a_1d_maximum() {
        let nm = NelderMead::default();
        let (_, v) = nm.maximize(&[0.4], |p| 1.0 / (1.0 + (p[0] - 0.7).powi(2)));
        assert!((v - 1.0).abs() < 1e-6);
    }
}
