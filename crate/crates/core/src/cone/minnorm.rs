//! Wolfe's minimum-norm-point algorithm over the convex hull of a finite
//! point set. Used two ways: the hull of a cone's normals certifies whether
//! the cone interior is nonempty (margin 0 ⟺ origin in the hull), and by
//! the minimax identity the same margin equals the best achievable escape
//! rate max_{‖v‖ ≤ 1} min_i ⟨n_i, v⟩.
//!
//! The result is self-certifying: x is the minimum-norm point of the hull
//! iff ⟨x, p_j⟩ ≥ ‖x‖² for every vertex p_j, which callers (and the test
//! suite) can check directly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Minimum-norm point together with hull coefficients: point = Σ wᵢ pᵢ,
/// wᵢ ≥ 0, Σ wᵢ = 1.
#[derive(Debug, Clone)]
pub struct MinNormPoint {
    pub point: DVector<f64>,
    pub weights: Vec<f64>,
}

impl MinNormPoint {
    pub fn norm(&self) -> f64 {
        self.point.norm()
    }

    /// Largest violation of the optimality condition ⟨x, pⱼ⟩ ≥ ‖x‖²;
    /// nonpositive (up to roundoff) at the true minimizer.
    pub fn optimality_gap(&self, points: &[DVector<f64>]) -> f64 {
        let xx = self.point.dot(&self.point);
        points.iter().map(|p| xx - self.point.dot(p)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Minimum-norm point of aff{points[S]}: solve the bordered Gram system
/// [[G, 1], [1ᵀ, 0]] [α; ν] = [0; 1].
fn affine_minimizer(points: &[DVector<f64>], corral: &[usize]) -> Option<Vec<f64>> {
    let k = corral.len();
    let mut m = DMatrix::zeros(k + 1, k + 1);
    for (i, &pi) in corral.iter().enumerate() {
        for (j, &pj) in corral.iter().enumerate() {
            m[(i, j)] = points[pi].dot(&points[pj]);
        }
        m[(i, k)] = 1.0;
        m[(k, i)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;

    let solved = m.clone().lu().solve(&rhs).or_else(|| m.svd(true, true).solve(&rhs, 1e-13).ok());
    let sol = solved?;
    let mut alpha: Vec<f64> = sol.iter().take(k).copied().collect();
    let total: f64 = alpha.iter().sum();
    if !total.is_finite() || total.abs() < 1e-12 {
        return None;
    }
    for a in &mut alpha {
        *a /= total;
    }
    Some(alpha)
}

/// Minimum-norm point of conv{points}. `tol` bounds the accepted optimality
/// gap ‖x‖² − min_j ⟨x, p_j⟩, scaled by the largest squared point norm.
pub fn min_norm_point(points: &[DVector<f64>], tol: f64) -> Result<MinNormPoint> {
    if points.is_empty() {
        return Err(Error::Validation("min-norm point of an empty set".into()));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Shape("points have mixed dimensions".into()));
    }
    let scale = points.iter().map(|p| p.dot(p)).fold(0.0_f64, f64::max).max(1.0);
    let gap_tol = tol * scale;

    let start =
        (0..points.len()).min_by(|&i, &j| points[i].norm().total_cmp(&points[j].norm())).unwrap();
    let mut corral = vec![start];
    let mut w = vec![1.0];
    let mut x = points[start].clone();

    let max_major = 16 * points.len() + 100;
    let drop_tol = 1e-14;

    for _ in 0..max_major {
        let xx = x.dot(&x);
        let jmin = (0..points.len())
            .min_by(|&i, &j| x.dot(&points[i]).total_cmp(&x.dot(&points[j])))
            .unwrap();
        if x.dot(&points[jmin]) >= xx - gap_tol || corral.contains(&jmin) {
            break;
        }
        corral.push(jmin);
        w.push(0.0);

        // Minor cycle: pull the affine minimizer back into the hull, dropping
        // vertices whose coefficient hits zero. Each pass removes at least
        // one vertex, so it terminates.
        loop {
            let Some(alpha) = affine_minimizer(points, &corral) else {
                // Degenerate Gram system: discard the vertex just added and
                // accept the current corral point.
                corral.pop();
                w.pop();
                break;
            };
            if alpha.iter().all(|&a| a > drop_tol) {
                w = alpha;
                break;
            }
            let mut theta = 1.0_f64;
            for (&wi, &ai) in w.iter().zip(&alpha) {
                if ai <= drop_tol && wi > ai {
                    theta = theta.min(wi / (wi - ai));
                }
            }
            let theta = theta.clamp(0.0, 1.0);
            for (wi, &ai) in w.iter_mut().zip(&alpha) {
                *wi = (1.0 - theta) * *wi + theta * ai;
            }
            let keep: Vec<bool> = w.iter().map(|&wi| wi > drop_tol).collect();
            if keep.iter().all(|&k| k) {
                // Roundoff kept every coefficient positive; drop the smallest
                // to guarantee progress.
                let imin = (0..w.len()).min_by(|&i, &j| w[i].total_cmp(&w[j])).unwrap();
                corral.remove(imin);
                w.remove(imin);
            } else {
                let mut idx = 0;
                corral.retain(|_| {
                    idx += 1;
                    keep[idx - 1]
                });
                let mut idx = 0;
                w.retain(|_| {
                    idx += 1;
                    keep[idx - 1]
                });
            }
            let total: f64 = w.iter().sum();
            for wi in &mut w {
                *wi /= total;
            }
        }

        x = DVector::zeros(dim);
        for (&i, &wi) in corral.iter().zip(&w) {
            x.axpy(wi, &points[i], 1.0);
        }
    }

    let gap = {
        let xx = x.dot(&x);
        points.iter().map(|p| xx - x.dot(p)).fold(f64::NEG_INFINITY, f64::max)
    };
    if gap > 10.0 * gap_tol.max(1e-12 * scale) {
        return Err(Error::Solver {
            message: "min-norm point iteration stalled before reaching optimality".into(),
            residual: gap,
        });
    }

    let mut weights = vec![0.0; points.len()];
    for (&i, &wi) in corral.iter().zip(&w) {
        weights[i] += wi;
    }
    Ok(MinNormPoint { point: x, weights })
}
