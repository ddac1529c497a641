//! Chebyshev extremal points, the collocation differentiation matrix and
//! barycentric interpolation on them.

use crate::linalg::RMat;
use std::f64::consts::PI;

/// `x_k = cos(k pi / N)`, `k = 0..=N`, running from 1 down to -1.
pub fn extremal_points(n: usize) -> Vec<f64> {
    (0..=n).map(|k| if 2 * k == n { 0.0 } else { (k as f64 * PI / n as f64).cos() }).collect()
}

/// Points mapped onto `[-tau_max, 0]`: `theta_0 = 0`, `theta_N = -tau_max`.
pub fn scaled_points(n: usize, tau_max: f64) -> Vec<f64> {
    let mut t: Vec<f64> = extremal_points(n).iter().map(|x| 0.5 * tau_max * (x - 1.0)).collect();
    t[0] = 0.0;
    t[n] = -tau_max;
    t
}

/// Differentiation matrix on the extremal points of `[-1, 1]`, with the
/// diagonal set by negative row sums.
pub fn differentiation_matrix(n: usize) -> RMat {
    let x = extremal_points(n);
    let c = |k: usize| {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        if k == 0 || k == n {
            2.0 * sign
        } else {
            sign
        }
    };
    let mut d = RMat::zeros(n + 1, n + 1);
    for i in 0..=n {
        let mut row = 0.0;
        for j in 0..=n {
            if i != j {
                let v = c(i) / c(j) / (x[i] - x[j]);
                d[(i, j)] = v;
                row += v;
            }
        }
        d[(i, i)] = -row;
    }
    d
}

/// Barycentric weights of the extremal points (a common factor dropped).
pub fn barycentric_weights(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| {
            let w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                0.5 * w
            } else {
                w
            }
        })
        .collect()
}

/// Values `l_j(t)` of the Lagrange basis on `nodes` at `t`.
pub fn lagrange_row(nodes: &[f64], weights: &[f64], t: f64) -> Vec<f64> {
    let scale = nodes.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    if let Some(k) = nodes.iter().position(|&x| (t - x).abs() <= 1e-14 * scale) {
        let mut l = vec![0.0; nodes.len()];
        l[k] = 1.0;
        return l;
    }
    let terms: Vec<f64> = nodes.iter().zip(weights).map(|(x, w)| w / (t - x)).collect();
    let total: f64 = terms.iter().sum();
    terms.into_iter().map(|v| v / total).collect()
}
