//! Hard-margin dual solved by two-coordinate descent with second-order
//! working-set selection.

use crate::monotone::LabeledPoint;

/// KKT violation at which the solver stops.
pub const KKT_TOLERANCE: f64 = 1e-6;
const TAU: f64 = 1e-12;
/// Iteration cap; narrow-margin fits at small widths can stall far below
/// float resolution of the alphas.
pub const MAX_ITERATIONS: usize = 100_000;

pub(crate) fn kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

pub(crate) fn gram(data: &[LabeledPoint], gamma: f64) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in 0..i {
            let v = kernel(data[i].point.coords(), data[j].point.coords(), gamma);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

pub(crate) struct Solution {
    pub alphas: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimizes `½ Σ α_i α_j y_i y_j K_ij - Σ α_i` subject to `Σ α_i y_i = 0`
/// and `α >= 0`, from a feasible `start` (zero if absent).
pub(crate) fn solve_from(y: &[f64], k: &[Vec<f64>], start: Option<Vec<f64>>) -> Solution {
    let n = y.len();
    // row-major Q_ij = y_i y_j K_ij
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] = y[i] * y[j] * k[i][j];
        }
    }
    let diag: Vec<f64> = (0..n).map(|i| k[i][i]).collect();
    let mut alpha = start.unwrap_or_else(|| vec![0.0; n]);
    let mut grad = vec![-1.0; n];
    for (j, a) in alpha.iter().enumerate() {
        if *a != 0.0 {
            for (t, g) in grad.iter_mut().enumerate() {
                *g += q[t * n + j] * a;
            }
        }
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        // i: most violating index from the "up" set
        let mut g_max = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            let up = y[t] > 0.0 || alpha[t] > 0.0;
            if up && -y[t] * grad[t] > g_max {
                g_max = -y[t] * grad[t];
                i_sel = t;
            }
        }
        let mut g_min = f64::INFINITY;
        let mut j_sel = usize::MAX;
        let mut obj_min = f64::INFINITY;
        if i_sel != usize::MAX {
            let i = i_sel;
            let ki = &k[i];
            for t in 0..n {
                let low = y[t] < 0.0 || alpha[t] > 0.0;
                if !low {
                    continue;
                }
                let v = -y[t] * grad[t];
                g_min = g_min.min(v);
                let b = g_max - v;
                if b > 0.0 {
                    let a = (diag[i] + diag[t] - 2.0 * ki[t]).max(TAU);
                    let obj = -(b * b) / a;
                    if obj < obj_min {
                        obj_min = obj;
                        j_sel = t;
                    }
                }
            }
        }
        if i_sel == usize::MAX || j_sel == usize::MAX || g_max - g_min < KKT_TOLERANCE {
            converged = true;
            break;
        }
        iterations += 1;
        let (i, j) = (i_sel, j_sel);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let (qii, qjj, qij) = (q[i * n + i], q[j * n + j], q[i * n + j]);
        if y[i] != y[j] {
            let quad = (qii + qjj + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
        } else {
            let quad = (qii + qjj - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        let (qi, qj) = (&q[i * n..(i + 1) * n], &q[j * n..(j + 1) * n]);
        for ((g, a), b) in grad.iter_mut().zip(qi).zip(qj) {
            *g += a * di + b * dj;
        }
    }
    Solution {
        alphas: alpha,
        converged,
        iterations,
    }
}
