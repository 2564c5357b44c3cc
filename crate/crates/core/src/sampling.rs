//! Deterministic direction and grid sampling for the supremum-type
//! invariants. Reported values are lower bounds of suprema at the recorded
//! resolution; a local refinement step tightens the best sample.

use ndarray::Array1;

/// Unit (Euclidean) directions: signs in 1D, uniform angles in 2D, a
/// Fibonacci sphere in 3D.
pub fn unit_directions(dim: usize, count: usize) -> Vec<Array1<f64>> {
    match dim {
        1 => vec![Array1::from_vec(vec![1.0]), Array1::from_vec(vec![-1.0])],
        2 => (0..count)
            .map(|i| {
                let theta = 2.0 * std::f64::consts::PI * (i as f64) / (count as f64);
                Array1::from_vec(vec![theta.cos(), theta.sin()])
            })
            .collect(),
        3 => {
            let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
            (0..count)
                .map(|i| {
                    let t = (i as f64 + 0.5) / count as f64;
                    let z = 1.0 - 2.0 * t;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = 2.0 * std::f64::consts::PI * (i as f64) / golden;
                    Array1::from_vec(vec![r * phi.cos(), r * phi.sin(), z])
                })
                .collect()
        }
        _ => panic!("direction sampling supports dim 1..=3, got {dim}"),
    }
}

/// Angles -> unit vector, the chart used by the refinement optimizer.
pub fn direction_from_angles(dim: usize, angles: &[f64]) -> Array1<f64> {
    match dim {
        1 => Array1::from_vec(vec![if angles.is_empty() || angles[0] >= 0.0 { 1.0 } else { -1.0 }]),
        2 => Array1::from_vec(vec![angles[0].cos(), angles[0].sin()]),
        3 => {
            let (theta, phi) = (angles[0], angles[1]);
            Array1::from_vec(vec![
                theta.sin() * phi.cos(),
                theta.sin() * phi.sin(),
                theta.cos(),
            ])
        }
        _ => panic!("direction sampling supports dim 1..=3, got {dim}"),
    }
}

pub fn angles_of_direction(dim: usize, v: &[f64]) -> Vec<f64> {
    match dim {
        1 => vec![if v[0] >= 0.0 { 1.0 } else { -1.0 }],
        2 => vec![v[1].atan2(v[0])],
        3 => {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            vec![(v[2] / r).acos(), v[1].atan2(v[0])]
        }
        _ => panic!("direction sampling supports dim 1..=3, got {dim}"),
    }
}

/// Number of angle parameters for a direction in `dim` dimensions.
pub fn angle_dim(dim: usize) -> usize {
    dim.saturating_sub(1)
}
