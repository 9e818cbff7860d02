//! Central hyperplane and subspace arrangements, their chambers, and global
//! escape rates.
//!
//! The collision locus of an n-body system lifts here: in mass-weighted
//! coordinates each pair subspace {q_a = q_b} has an orthonormal complement
//! basis of one vector per spatial axis, and choosing one axis per pair
//! replaces the subspace by a central hyperplane containing it. Distances
//! only shrink under the replacement, so escape certificates for the lifted
//! arrangement remain valid for the original locus. Chambers of the lifted
//! arrangement are polyhedral cones; the smallest chamber escape rate is the
//! system-wide worst case.

use std::collections::BTreeSet;

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;

use crate::cone::minnorm::min_norm_point;
use crate::cone::{EscapeCertificate, Escaper, PolyhedralCone, MEMBERSHIP_TOL, UNIT_NORM_TOL};
use crate::error::{Error, Result};
use crate::nbody::MassSystem;

/// Chamber enumeration is capped at 2^(k−1) sign patterns; beyond this many
/// hyperplanes use [`sample_chambers`].
pub const DEFAULT_MAX_HYPERPLANES: usize = 20;

/// Sign patterns whose hull margin exceeds this are genuine chambers.
pub const FEASIBLE_MARGIN: f64 = 1e-7;

/// Functional values at or below this (in absolute value) count as lying on
/// the hyperplane.
pub const ON_HYPERPLANE_TOL: f64 = 1e-12;

/// A finite set of distinct central hyperplanes, each given by a unit normal.
#[derive(Debug, Clone)]
pub struct HyperplaneArrangement {
    normals: Vec<DVector<f64>>,
    dim: usize,
}

/// A finite set of central subspaces, each given by an orthonormal basis of
/// its orthogonal complement.
#[derive(Debug, Clone)]
pub struct SubspaceArrangement {
    complement_bases: Vec<Vec<DVector<f64>>>,
    dim: usize,
}

/// Which complement basis vector a subspace contributes as its hyperplane
/// normal when lifting. For collision arrangements the basis vectors are
/// indexed by spatial axis, so `Axis(0)` is the first-coordinate rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftRule {
    Axis(usize),
}

impl Default for LiftRule {
    fn default() -> Self {
        LiftRule::Axis(0)
    }
}

/// A chamber of an arrangement: the sign pattern and the cone it bounds.
#[derive(Debug, Clone)]
pub struct Chamber {
    pub signs: Vec<i8>,
    pub cone: PolyhedralCone,
}

/// A chamber together with its escape certificate.
#[derive(Debug, Clone)]
pub struct ChamberEscape {
    pub chamber: Chamber,
    pub certificate: EscapeCertificate,
}

/// Full escape analysis of an arrangement: every chamber's certificate and
/// the global (worst-chamber) rate.
#[derive(Debug, Clone)]
pub struct EscapeAnalysis {
    arrangement: HyperplaneArrangement,
    chambers: Vec<ChamberEscape>,
    global_rate: f64,
    min_index: usize,
}

impl HyperplaneArrangement {
    /// Unit normals, pairwise non-coincident (a hyperplane equals its
    /// antipodal normal's, so |cos| ≈ 1 is rejected).
    pub fn new(normals: Vec<DVector<f64>>) -> Result<Self> {
        if normals.is_empty() {
            return Err(Error::Validation("arrangement needs at least one hyperplane".into()));
        }
        let dim = normals[0].len();
        let mut cleaned: Vec<DVector<f64>> = Vec::with_capacity(normals.len());
        for n in normals {
            if n.len() != dim {
                return Err(Error::Shape(format!(
                    "normal has dimension {}, expected {dim}",
                    n.len()
                )));
            }
            if n.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation("normals must have finite entries".into()));
            }
            let norm = n.norm();
            if (norm - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::NotUnitNormal { norm, tol: UNIT_NORM_TOL });
            }
            cleaned.push(n / norm);
        }
        for i in 0..cleaned.len() {
            for j in i + 1..cleaned.len() {
                if cleaned[i].dot(&cleaned[j]).abs() > 1.0 - 1e-12 {
                    return Err(Error::CoincidentHyperplanes(i, j));
                }
            }
        }
        Ok(Self { normals: cleaned, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    pub fn normals(&self) -> &[DVector<f64>] {
        &self.normals
    }

    fn check_dim(&self, q: &DVector<f64>) -> Result<()> {
        if q.len() != self.dim {
            return Err(Error::Shape(format!(
                "point has dimension {}, arrangement lives in {}",
                q.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// The functional values ⟨nᵢ, q⟩.
    pub fn functional_values(&self, q: &DVector<f64>) -> Result<Vec<f64>> {
        self.check_dim(q)?;
        Ok(self.normals.iter().map(|n| n.dot(q)).collect())
    }

    /// Distance from q to the union of hyperplanes: min_i |⟨nᵢ, q⟩|.
    pub fn dist_to_union(&self, q: &DVector<f64>) -> Result<f64> {
        Ok(self.functional_values(q)?.into_iter().map(f64::abs).fold(f64::INFINITY, f64::min))
    }

    /// Signs of the functionals, with |value| ≤ tol collapsing to 0.
    pub fn sign_vector(&self, q: &DVector<f64>, tol: f64) -> Result<Vec<i8>> {
        Ok(self
            .functional_values(q)?
            .into_iter()
            .map(|v| {
                if v.abs() <= tol {
                    0
                } else if v > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect())
    }
}

impl SubspaceArrangement {
    /// Orthonormal complement bases (validated to 1e-8), no subspace
    /// contained in another.
    pub fn new(complement_bases: Vec<Vec<DVector<f64>>>, dim: usize) -> Result<Self> {
        if complement_bases.is_empty() {
            return Err(Error::Validation("arrangement needs at least one subspace".into()));
        }
        for (s, basis) in complement_bases.iter().enumerate() {
            if basis.is_empty() {
                return Err(Error::Validation(format!(
                    "subspace {s} has an empty complement basis (codimension 0)"
                )));
            }
            for v in basis {
                if v.len() != dim {
                    return Err(Error::Shape(format!(
                        "subspace {s} basis vector has dimension {}, expected {dim}",
                        v.len()
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Validation("basis vectors must be finite".into()));
                }
            }
            for i in 0..basis.len() {
                for j in i..basis.len() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    if (basis[i].dot(&basis[j]) - want).abs() > 1e-8 {
                        return Err(Error::Validation(format!(
                            "subspace {s} complement basis is not orthonormal"
                        )));
                    }
                }
            }
        }
        // Containment: L_i ⊆ L_j ⟺ span(C_j) ⊆ span(C_i).
        for i in 0..complement_bases.len() {
            for j in 0..complement_bases.len() {
                if i == j {
                    continue;
                }
                let contained = complement_bases[j].iter().all(|v| {
                    let mut residual = v.clone();
                    for c in &complement_bases[i] {
                        residual.axpy(-c.dot(v), c, 1.0);
                    }
                    residual.norm() <= 1e-8
                });
                if contained {
                    return Err(Error::Validation(format!(
                        "subspace {i} is contained in subspace {j}"
                    )));
                }
            }
        }
        Ok(Self { complement_bases, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.complement_bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complement_bases.is_empty()
    }

    pub fn complement_basis(&self, i: usize) -> &[DVector<f64>] {
        &self.complement_bases[i]
    }

    /// Distance from q to subspace i: the norm of q's component in the
    /// orthogonal complement.
    pub fn dist_to_subspace(&self, q: &DVector<f64>, i: usize) -> Result<f64> {
        if q.len() != self.dim {
            return Err(Error::Shape(format!(
                "point has dimension {}, arrangement lives in {}",
                q.len(),
                self.dim
            )));
        }
        Ok(self.complement_bases[i].iter().map(|c| c.dot(q).powi(2)).sum::<f64>().sqrt())
    }

    pub fn dist_to_union(&self, q: &DVector<f64>) -> Result<f64> {
        (0..self.len())
            .map(|i| self.dist_to_subspace(q, i))
            .try_fold(f64::INFINITY, |acc, d| Ok(acc.min(d?)))
    }
}

/// Replace each subspace by the central hyperplane normal to one of its
/// complement basis vectors. Containing hyperplanes can only decrease
/// distances, so escape certificates transfer to the original arrangement.
pub fn lift_to_hyperplanes(
    sub: &SubspaceArrangement,
    rule: LiftRule,
) -> Result<HyperplaneArrangement> {
    let LiftRule::Axis(axis) = rule;
    let mut normals = Vec::with_capacity(sub.len());
    for i in 0..sub.len() {
        let basis = sub.complement_basis(i);
        if axis >= basis.len() {
            return Err(Error::Domain(format!(
                "lift rule axis {axis} out of range for subspace {i} of codimension {}",
                basis.len()
            )));
        }
        normals.push(basis[axis].clone());
    }
    HyperplaneArrangement::new(normals).map_err(|e| match e {
        Error::CoincidentHyperplanes(i, j) => Error::DegenerateLift(i, j),
        other => other,
    })
}

fn signs_to_key(signs: &[i8]) -> Vec<u8> {
    signs.iter().map(|&s| if s > 0 { 0 } else { 1 }).collect()
}

fn chamber_from_signs(arr: &HyperplaneArrangement, signs: &[i8]) -> Option<Chamber> {
    let signed: Vec<DVector<f64>> =
        arr.normals().iter().zip(signs).map(|(n, &s)| if s > 0 { n.clone() } else { -n }).collect();
    let hull = min_norm_point(&signed, 1e-13).ok()?;
    let margin = hull.norm();
    if margin <= FEASIBLE_MARGIN {
        return None;
    }
    let interior = &hull.point / margin;
    Some(Chamber {
        signs: signs.to_vec(),
        cone: PolyhedralCone::from_certified(signed, interior, margin),
    })
}

/// All chambers of the arrangement, by exhaustive sweep over sign patterns.
/// Antipodal patterns describe mirror chambers, so only half the patterns
/// are solved. Errors if the hyperplane count exceeds `cap`.
pub fn enumerate_chambers_with_cap(
    arr: &HyperplaneArrangement,
    cap: usize,
) -> Result<Vec<Chamber>> {
    let k = arr.len();
    if k > cap {
        return Err(Error::TooManyHyperplanes { count: k, max: cap });
    }
    let half: Vec<Chamber> = (0_u64..1 << (k - 1))
        .into_par_iter()
        .filter_map(|mask| {
            let mut signs = vec![1_i8; k];
            for (i, s) in signs.iter_mut().enumerate().skip(1) {
                if mask >> (i - 1) & 1 == 1 {
                    *s = -1;
                }
            }
            chamber_from_signs(arr, &signs)
        })
        .collect();

    let mut chambers = Vec::with_capacity(2 * half.len());
    for ch in half {
        let mirrored = Chamber {
            signs: ch.signs.iter().map(|s| -s).collect(),
            cone: PolyhedralCone::from_certified(
                ch.cone.normals().iter().map(|n| -n).collect(),
                -ch.cone.interior_direction().clone(),
                ch.cone.hull_margin(),
            ),
        };
        chambers.push(ch);
        chambers.push(mirrored);
    }
    chambers.sort_by_key(|c| signs_to_key(&c.signs));
    Ok(chambers)
}

pub fn enumerate_chambers(arr: &HyperplaneArrangement) -> Result<Vec<Chamber>> {
    enumerate_chambers_with_cap(arr, DEFAULT_MAX_HYPERPLANES)
}

/// Monte-Carlo chamber discovery for arrangements too large to enumerate:
/// sign patterns of random Gaussian points, deduplicated. Finds every
/// chamber with probability approaching one but makes no completeness
/// guarantee.
pub fn sample_chambers<R: Rng>(
    arr: &HyperplaneArrangement,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<Chamber>> {
    let mut seen = BTreeSet::new();
    let mut chambers = Vec::new();
    for _ in 0..samples {
        let x = DVector::from_fn(arr.dim(), |_, _| gaussian(rng));
        let signs = arr.sign_vector(&x, ON_HYPERPLANE_TOL)?;
        if signs.contains(&0) {
            continue;
        }
        if !seen.insert(signs_to_key(&signs)) {
            continue;
        }
        if let Some(ch) = chamber_from_signs(arr, &signs) {
            chambers.push(ch);
        }
    }
    chambers.sort_by_key(|c| signs_to_key(&c.signs));
    Ok(chambers)
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller; u1 bounded away from 0.
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

impl EscapeAnalysis {
    /// Enumerate chambers and certify an escape rate for each; the global
    /// rate is the minimum. Chambers are in lexicographic sign order
    /// (+ before −), which fixes every tie deterministically.
    pub fn analyze(arr: HyperplaneArrangement, cap: usize, proj_tol: f64) -> Result<Self> {
        let chambers = enumerate_chambers_with_cap(&arr, cap)?;
        let escapes: Vec<ChamberEscape> = chambers
            .into_par_iter()
            .map(|chamber| {
                let certificate = chamber.cone.escape_rate(proj_tol)?;
                Ok(ChamberEscape { chamber, certificate })
            })
            .collect::<Result<_>>()?;
        let min_index = escapes
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.certificate.rate.total_cmp(&b.certificate.rate))
            .map(|(i, _)| i)
            .expect("nonempty chamber list");
        let global_rate = escapes[min_index].certificate.rate;
        Ok(Self { arrangement: arr, chambers: escapes, global_rate, min_index })
    }

    pub fn arrangement(&self) -> &HyperplaneArrangement {
        &self.arrangement
    }

    pub fn chambers(&self) -> &[ChamberEscape] {
        &self.chambers
    }

    pub fn global_rate(&self) -> f64 {
        self.global_rate
    }

    /// Index of the chamber realizing the global rate (first in sign order
    /// among ties).
    pub fn min_chamber(&self) -> &ChamberEscape {
        &self.chambers[self.min_index]
    }

    /// Escaper for an arbitrary point: among chambers whose closure contains
    /// the point, take the one with the largest rate (ties to the first in
    /// sign order). A point on every hyperplane gets the global minimum
    /// chamber instead, the conservative choice for the worst-case start.
    pub fn escaper_from_point(&self, x: &DVector<f64>, level: f64) -> Result<(Escaper, usize)> {
        let values = self.arrangement.functional_values(x)?;
        let chosen = if values.iter().all(|v| v.abs() <= ON_HYPERPLANE_TOL) {
            self.min_index
        } else {
            let mut best: Option<usize> = None;
            for (i, ce) in self.chambers.iter().enumerate() {
                let in_closure = ce
                    .chamber
                    .signs
                    .iter()
                    .zip(&values)
                    .all(|(&s, &v)| s as f64 * v >= -MEMBERSHIP_TOL);
                if in_closure
                    && best.is_none_or(|b| ce.certificate.rate > self.chambers[b].certificate.rate)
                {
                    best = Some(i);
                }
            }
            best.ok_or_else(|| {
                Error::Domain("point lies in no chamber closure; inconsistent arrangement".into())
            })?
        };
        let ce = &self.chambers[chosen];
        let escaper = ce.chamber.cone.make_escaper(x, level, &ce.certificate)?;
        Ok((escaper, chosen))
    }
}

/// The collision subspaces {q_a = q_b} of a mass system, in mass-weighted
/// coordinates. The complement basis vector for pair (a, b) and axis j has
/// block a equal to (k_ab/√m_a)·e_j and block b equal to −(k_ab/√m_b)·e_j.
pub fn collision_subspace_arrangement(sys: &MassSystem) -> Result<SubspaceArrangement> {
    let d = sys.dim();
    let dim = sys.space_dim();
    let mut bases = Vec::new();
    for (a, b) in sys.pairs() {
        let k = sys.pair_k(a, b)?;
        let mut basis = Vec::with_capacity(d);
        for j in 0..d {
            let mut v = DVector::zeros(dim);
            v[a * d + j] = k / sys.mass(a).sqrt();
            v[b * d + j] = -k / sys.mass(b).sqrt();
            basis.push(v);
        }
        bases.push(basis);
    }
    SubspaceArrangement::new(bases, dim)
}

/// The hyperplane lift of the collision arrangement under `rule`.
pub fn collision_hyperplane_arrangement(
    sys: &MassSystem,
    rule: LiftRule,
) -> Result<HyperplaneArrangement> {
    lift_to_hyperplanes(&collision_subspace_arrangement(sys)?, rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nbody::Configuration;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    fn coordinate_arrangement(n: usize) -> HyperplaneArrangement {
        let normals = (0..n)
            .map(|i| {
                let mut v = DVector::zeros(n);
                v[i] = 1.0;
                v
            })
            .collect();
        HyperplaneArrangement::new(normals).unwrap()
    }

    #[test]
    fn hyperplane_validation() {
        assert!(HyperplaneArrangement::new(vec![]).is_err());
        assert!(matches!(
            HyperplaneArrangement::new(vec![dv(&[0.5, 0.0])]),
            Err(Error::NotUnitNormal { .. })
        ));
        assert!(matches!(
            HyperplaneArrangement::new(vec![dv(&[1.0, 0.0]), dv(&[-1.0, 0.0])]),
            Err(Error::CoincidentHyperplanes(0, 1))
        ));
    }

    #[test]
    fn sign_vectors_and_union_distance() {
        let arr = coordinate_arrangement(2);
        assert_eq!(arr.sign_vector(&dv(&[2.0, -3.0]), 1e-12).unwrap(), vec![1, -1]);
        assert_eq!(arr.sign_vector(&dv(&[0.0, 4.0]), 1e-12).unwrap(), vec![0, 1]);
        assert_relative_eq!(arr.dist_to_union(&dv(&[2.0, -3.0])).unwrap(), 2.0);
    }

    #[test]
    fn subspace_validation_rejects_containment_and_skew_bases() {
        // {x = 0} ⊂ R³ has complement span{e_x}; {x = y = 0} has span{e_x, e_y}.
        let l1 = vec![dv(&[1.0, 0.0, 0.0])];
        let l2 = vec![dv(&[1.0, 0.0, 0.0]), dv(&[0.0, 1.0, 0.0])];
        assert!(SubspaceArrangement::new(vec![l1.clone(), l2], 3).is_err());
        // Non-orthonormal complement basis.
        let skew = vec![dv(&[1.0, 0.0, 0.0]), dv(&[0.8, 0.6, 0.0])];
        assert!(SubspaceArrangement::new(vec![skew], 3).is_err());
        // A valid pair of distinct lines' complements in the plane.
        let ok = SubspaceArrangement::new(vec![vec![dv(&[1.0, 0.0])], vec![dv(&[0.0, 1.0])]], 2)
            .unwrap();
        assert_relative_eq!(ok.dist_to_subspace(&dv(&[3.0, 4.0]), 0).unwrap(), 3.0);
        assert_relative_eq!(ok.dist_to_union(&dv(&[3.0, 4.0])).unwrap(), 3.0);
    }

    #[test]
    fn collision_subspaces_reproduce_pair_distances() {
        let sys = MassSystem::new(vec![1.0, 2.5, 0.4], 3).unwrap();
        let arr = collision_subspace_arrangement(&sys).unwrap();
        let q = Configuration::from_blocks(&[
            vec![0.2, -0.5, 1.0],
            vec![1.0, 0.3, -0.4],
            vec![-0.7, 0.9, 0.1],
        ])
        .unwrap();
        let x = sys.weighted(&q).unwrap();
        for (idx, (a, b)) in sys.pairs().enumerate() {
            assert_relative_eq!(
                arr.dist_to_subspace(&x, idx).unwrap(),
                sys.dist_to_pair_collision(&q, a, b).unwrap(),
                max_relative = 1e-13
            );
        }
        assert_relative_eq!(
            arr.dist_to_union(&x).unwrap(),
            sys.dist_to_collision(&q).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn lift_rule_picks_an_axis() {
        let sys = MassSystem::new(vec![1.0, 1.0], 2).unwrap();
        let sub = collision_subspace_arrangement(&sys).unwrap();
        let first = lift_to_hyperplanes(&sub, LiftRule::Axis(0)).unwrap();
        let second = lift_to_hyperplanes(&sub, LiftRule::Axis(1)).unwrap();
        assert!((first.normals()[0].dot(&second.normals()[0])).abs() < 1e-12);
        assert!(lift_to_hyperplanes(&sub, LiftRule::Axis(2)).is_err());
    }

    #[test]
    fn lift_distances_never_exceed_subspace_distances() {
        let sys = MassSystem::new(vec![1.0, 3.0, 0.5], 2).unwrap();
        let sub = collision_subspace_arrangement(&sys).unwrap();
        let arr = lift_to_hyperplanes(&sub, LiftRule::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x = DVector::from_fn(6, |_, _| gaussian(&mut rng));
            assert!(arr.dist_to_union(&x).unwrap() <= sub.dist_to_union(&x).unwrap() + 1e-12);
        }
    }

    #[test]
    fn coordinate_chambers_are_quadrants() {
        let arr = coordinate_arrangement(2);
        let chambers = enumerate_chambers(&arr).unwrap();
        assert_eq!(chambers.len(), 4);
        assert_eq!(chambers[0].signs, vec![1, 1]);
        for ch in &chambers {
            let cert = ch.cone.escape_rate(1e-12).unwrap();
            assert_relative_eq!(cert.rate, std::f64::consts::FRAC_1_SQRT_2, max_relative = 1e-12);
        }
        // Mirror pairs both present.
        let keys: Vec<_> = chambers.iter().map(|c| c.signs.clone()).collect();
        for ch in &chambers {
            let neg: Vec<i8> = ch.signs.iter().map(|s| -s).collect();
            assert!(keys.contains(&neg));
        }
    }

    #[test]
    fn braid_three_bodies_has_six_congruent_chambers() {
        let sys = MassSystem::new(vec![1.0, 1.0, 1.0], 1).unwrap();
        let arr = collision_hyperplane_arrangement(&sys, LiftRule::default()).unwrap();
        let analysis = EscapeAnalysis::analyze(arr, DEFAULT_MAX_HYPERPLANES, 1e-12).unwrap();
        assert_eq!(analysis.chambers().len(), 6);
        for ce in analysis.chambers() {
            assert_relative_eq!(ce.certificate.rate, 0.5, max_relative = 1e-10);
        }
        assert_relative_eq!(analysis.global_rate(), 0.5, max_relative = 1e-10);
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let sys = MassSystem::new(vec![1.0; 7], 1).unwrap();
        // 21 pair hyperplanes exceed the default cap.
        let arr = collision_hyperplane_arrangement(&sys, LiftRule::default()).unwrap();
        assert_eq!(arr.len(), 21);
        assert!(matches!(
            enumerate_chambers(&arr),
            Err(Error::TooManyHyperplanes { count: 21, max: 20 })
        ));
    }

    #[test]
    fn sampled_chambers_are_a_subset_of_enumerated_ones() {
        let sys = MassSystem::new(vec![1.0, 1.0, 1.0, 1.0], 1).unwrap();
        let arr = collision_hyperplane_arrangement(&sys, LiftRule::default()).unwrap();
        let all = enumerate_chambers(&arr).unwrap();
        assert_eq!(all.len(), 24); // 4! orderings
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let sampled = sample_chambers(&arr, 2000, &mut rng).unwrap();
        assert!(!sampled.is_empty());
        let keys: BTreeSet<_> = all.iter().map(|c| signs_to_key(&c.signs)).collect();
        for ch in &sampled {
            assert!(keys.contains(&signs_to_key(&ch.signs)));
        }
    }

    #[test]
    fn escaper_prefers_fastest_closure_chamber() {
        // Hyperplanes x = 0 and the 30°-tilted one: chambers have different
        // apertures, so a point on a shared wall has a strict best choice.
        let theta: f64 = std::f64::consts::PI / 6.0;
        let arr =
            HyperplaneArrangement::new(vec![dv(&[1.0, 0.0]), dv(&[theta.sin(), -theta.cos()])])
                .unwrap();
        let analysis = EscapeAnalysis::analyze(arr, 20, 1e-12).unwrap();
        // On the wall {x = 0, y > 0}: closures (+,−) aperture 5π/6 and
        // (−,−) aperture π/6 (and their relabelings); fastest wins.
        let on_wall = dv(&[0.0, 3.0]);
        let (esc, idx) = analysis.escaper_from_point(&on_wall, 1.0).unwrap();
        let best_rate = analysis.chambers()[idx].certificate.rate;
        for ce in analysis.chambers() {
            let in_closure = ce
                .chamber
                .signs
                .iter()
                .zip(analysis.arrangement().functional_values(&on_wall).unwrap())
                .all(|(&s, v)| s as f64 * v >= -1e-9);
            if in_closure {
                assert!(ce.certificate.rate <= best_rate + 1e-12);
            }
        }
        assert!(esc.exit_arclength > 0.0);
        // The exact origin falls back to the global minimum chamber.
        let (_, idx0) = analysis.escaper_from_point(&dv(&[0.0, 0.0]), 1.0).unwrap();
        assert_relative_eq!(
            analysis.chambers()[idx0].certificate.rate,
            analysis.global_rate(),
            max_relative = 1e-12
        );
    }
}
