//! Projection of the origin onto K₁ = {q : ⟨nᵢ, q⟩ ≥ 1 ∀i}, the unit
//! equidistant polyhedron of a cone with unit normals. Its solution q*
//! determines the escape certificate: rate = 1/‖q*‖, direction = q*/‖q*‖.
//!
//! Two independent solvers:
//!
//! * an exact active-set enumerator for few constraints: for every subset S
//!   the least-norm point of {⟨nᵢ, q⟩ = 1, i ∈ S} is A_Sᵀ G_S⁻¹ 1; the true
//!   projection is the smallest-norm candidate that is feasible for all
//!   constraints, so scanning all subsets is exact up to roundoff;
//! * Hildreth's cyclic dual coordinate ascent for larger systems, stopped on
//!   the KKT residual max_i |min(λᵢ, ⟨nᵢ, q⟩ − 1)|.
//!
//! The two tiers are kept separate so they can check each other; `verify`
//! runs both on the same cones and compares.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Constraint counts up to this use the exact enumerator when tiering.
pub const ENUM_LIMIT: usize = 10;

/// Hard cap for the enumerator itself (2^20 subsets).
const ENUM_HARD_LIMIT: usize = 20;

/// Default KKT residual target for the dual ascent.
pub const DEFAULT_PROJ_TOL: f64 = 1e-10;

/// Default sweep budget for the dual ascent.
pub const DEFAULT_MAX_SWEEPS: usize = 200_000;

/// Feasibility slack when filtering enumerator candidates.
const FEAS_TOL: f64 = 1e-9;

/// Tiered projection: exact enumeration for at most [`ENUM_LIMIT`]
/// constraints, dual coordinate ascent beyond.
pub fn project_origin_k1(normals: &[DVector<f64>], tol: f64) -> Result<DVector<f64>> {
    if normals.len() <= ENUM_LIMIT {
        project_origin_k1_enumerated(normals)
    } else {
        project_origin_k1_dual(normals, tol, DEFAULT_MAX_SWEEPS)
    }
}

/// Exact projection by active-set enumeration. Subsets with a singular Gram
/// matrix are skipped: a maximal independent subset of the same active set
/// produces the identical candidate point.
pub fn project_origin_k1_enumerated(normals: &[DVector<f64>]) -> Result<DVector<f64>> {
    let m = normals.len();
    if m == 0 {
        return Err(Error::Validation("projection needs at least one constraint".into()));
    }
    if m > ENUM_HARD_LIMIT {
        return Err(Error::Domain(format!(
            "active-set enumeration over {m} constraints is intractable (limit {ENUM_HARD_LIMIT})"
        )));
    }
    let dim = normals[0].len();
    let mut best: Option<(f64, DVector<f64>)> = None;

    for mask in 1_u64..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let k = rows.len();
        let mut gram = DMatrix::zeros(k, k);
        for (i, &ri) in rows.iter().enumerate() {
            for (j, &rj) in rows.iter().enumerate() {
                gram[(i, j)] = normals[ri].dot(&normals[rj]);
            }
        }
        let Some(chol) = Cholesky::new(gram) else {
            continue;
        };
        let mu = chol.solve(&DVector::from_element(k, 1.0));
        let mut q = DVector::zeros(dim);
        for (i, &ri) in rows.iter().enumerate() {
            q.axpy(mu[i], &normals[ri], 1.0);
        }
        if normals.iter().any(|n| n.dot(&q) < 1.0 - FEAS_TOL) {
            continue;
        }
        let nn = q.dot(&q);
        if best.as_ref().is_none_or(|(b, _)| nn < *b) {
            best = Some((nn, q));
        }
    }

    best.map(|(_, q)| q).ok_or(Error::Solver {
        message: "no feasible active-set candidate; the polyhedron is likely empty".into(),
        residual: f64::INFINITY,
    })
}

/// Hildreth's method: cyclic coordinate ascent on the dual of
/// min ½‖q‖² s.t. ⟨nᵢ, q⟩ ≥ 1, maintaining q = Σ λᵢ nᵢ with λ ≥ 0.
/// Converges for any consistent system; stops once the KKT residual
/// max_i |min(λᵢ, ⟨nᵢ, q⟩ − 1)| drops to `tol`.
pub fn project_origin_k1_dual(
    normals: &[DVector<f64>],
    tol: f64,
    max_sweeps: usize,
) -> Result<DVector<f64>> {
    if normals.is_empty() {
        return Err(Error::Validation("projection needs at least one constraint".into()));
    }
    let dim = normals[0].len();
    let mut q = DVector::zeros(dim);
    let mut lambda = vec![0.0_f64; normals.len()];
    let mut residual = f64::INFINITY;

    for _ in 0..max_sweeps {
        for (i, n) in normals.iter().enumerate() {
            // Unit normals make the exact coordinate maximizer a unit step.
            let delta = (1.0 - n.dot(&q)).max(-lambda[i]);
            if delta != 0.0 {
                lambda[i] += delta;
                q.axpy(delta, n, 1.0);
            }
        }
        residual = normals
            .iter()
            .zip(&lambda)
            .map(|(n, &l)| l.min(n.dot(&q) - 1.0).abs())
            .fold(0.0_f64, f64::max);
        if residual <= tol {
            return Ok(q);
        }
    }

    Err(Error::Solver {
        message: format!("dual ascent did not reach tolerance {tol} in {max_sweeps} sweeps"),
        residual,
    })
}
