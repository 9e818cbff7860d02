//! Polyhedral cones K = {q : ⟨nᵢ, q⟩ ≥ 0} with unit normals, their inner
//! equidistant polyhedra K_t = {q : ⟨nᵢ, q⟩ ≥ t}, and escape certificates.
//!
//! With unit normals, min_i ⟨nᵢ, q⟩ is exactly the distance from q ∈ K to
//! ∂K, redundant constraints included: each functional is 1-Lipschitz, so
//! the minimum is a lower bound on the distance, and the active halfspace
//! realizes it. Consequently K_t = {q ∈ K : dist(q, ∂K) ≥ t}, and a unit
//! ray from q ∈ K with min_i ⟨nᵢ, v⟩ = c crosses into K_t after arclength
//! at most t/c. The best such slope c over unit v is the cone's escape
//! rate; it is computed by projecting the origin onto K₁ and equals the
//! distance from the origin to the convex hull of the normals.

pub mod minnorm;
pub mod project;

use nalgebra::DVector;

use crate::error::{Error, Result};
use minnorm::min_norm_point;

/// Accepted deviation of an input normal from unit length.
pub const UNIT_NORM_TOL: f64 = 1e-6;

/// Normals with pairwise cosine above 1 − this are merged.
pub const DEDUPE_TOL: f64 = 1e-12;

/// Hull margins at or below this mean the cone has empty interior.
pub const INTERIOR_MARGIN_TOL: f64 = 1e-9;

/// Slack accepted on membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A closed polyhedral cone with nonempty interior, normalized and deduped
/// normals, and a certified interior direction from construction.
#[derive(Debug, Clone)]
pub struct PolyhedralCone {
    normals: Vec<DVector<f64>>,
    dim: usize,
    interior_dir: DVector<f64>,
    hull_margin: f64,
}

/// Escape certificate for a cone: the unit direction of steepest boundary
/// clearance, its rate min_i ⟨nᵢ, direction⟩, and the projection point
/// q* ∈ K₁ it came from (direction = q*/‖q*‖, rate = 1/‖q*‖).
#[derive(Debug, Clone)]
pub struct EscapeCertificate {
    pub direction: DVector<f64>,
    pub rate: f64,
    pub q_star: DVector<f64>,
}

/// The inner polyhedron K_t of points at boundary distance at least t.
#[derive(Debug, Clone)]
pub struct EquidistantPolyhedron {
    cone: PolyhedralCone,
    t: f64,
}

/// A unit-speed ray start + s·direction inside a cone, guaranteed to reach
/// boundary distance `level` by arclength `exit_arclength`.
#[derive(Debug, Clone)]
pub struct Escaper {
    pub start: DVector<f64>,
    pub direction: DVector<f64>,
    pub rate: f64,
    pub level: f64,
    pub exit_arclength: f64,
}

impl PolyhedralCone {
    /// Validates, renormalizes, and dedupes the normals, then certifies the
    /// interior is nonempty by computing the min-norm point of their hull.
    pub fn new(normals: Vec<DVector<f64>>) -> Result<Self> {
        let cleaned = Self::clean_normals(normals)?;
        let hull = min_norm_point(&cleaned, 1e-13)?;
        let margin = hull.norm();
        if margin <= INTERIOR_MARGIN_TOL {
            return Err(Error::DegenerateCone { margin });
        }
        let interior_dir = &hull.point / margin;
        let dim = cleaned[0].len();
        Ok(Self { normals: cleaned, dim, interior_dir, hull_margin: margin })
    }

    /// Construction path for chamber enumeration, where the hull margin and
    /// interior direction are already known from the feasibility solve.
    pub(crate) fn from_certified(
        normals: Vec<DVector<f64>>,
        interior_dir: DVector<f64>,
        hull_margin: f64,
    ) -> Self {
        let dim = normals[0].len();
        Self { normals, dim, interior_dir, hull_margin }
    }

    fn clean_normals(normals: Vec<DVector<f64>>) -> Result<Vec<DVector<f64>>> {
        if normals.is_empty() {
            return Err(Error::Validation("a cone needs at least one normal".into()));
        }
        let dim = normals[0].len();
        if dim == 0 {
            return Err(Error::Validation("normals must have positive dimension".into()));
        }
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
            let unit = n / norm;
            if !cleaned.iter().any(|seen| seen.dot(&unit) > 1.0 - DEDUPE_TOL) {
                cleaned.push(unit);
            }
        }
        Ok(cleaned)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_normals(&self) -> usize {
        self.normals.len()
    }

    pub fn normals(&self) -> &[DVector<f64>] {
        &self.normals
    }

    /// Unit direction strictly inside the cone, from the construction
    /// certificate.
    pub fn interior_direction(&self) -> &DVector<f64> {
        &self.interior_dir
    }

    /// Distance from the origin to the hull of the normals; positive by
    /// construction, and equal (up to solver tolerance) to the escape rate.
    pub fn hull_margin(&self) -> f64 {
        self.hull_margin
    }

    fn check_dim(&self, q: &DVector<f64>) -> Result<()> {
        if q.len() != self.dim {
            return Err(Error::Shape(format!(
                "point has dimension {}, cone lives in {}",
                q.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// The constraint values ⟨nᵢ, q⟩.
    pub fn constraint_values(&self, q: &DVector<f64>) -> Result<Vec<f64>> {
        self.check_dim(q)?;
        Ok(self.normals.iter().map(|n| n.dot(q)).collect())
    }

    pub fn min_constraint(&self, q: &DVector<f64>) -> Result<f64> {
        Ok(self.constraint_values(q)?.into_iter().fold(f64::INFINITY, f64::min))
    }

    pub fn contains(&self, q: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.min_constraint(q)? >= -tol)
    }

    /// Distance from a cone point to the boundary: min_i ⟨nᵢ, q⟩.
    /// Errors if q is outside beyond [`MEMBERSHIP_TOL`].
    pub fn dist_to_boundary(&self, q: &DVector<f64>) -> Result<f64> {
        let min = self.min_constraint(q)?;
        if min < -MEMBERSHIP_TOL {
            return Err(Error::OutsideCone { violation: min });
        }
        Ok(min.max(0.0))
    }

    /// Escape certificate via projection of the origin onto K₁.
    pub fn escape_rate(&self, tol: f64) -> Result<EscapeCertificate> {
        let q_star = project::project_origin_k1(&self.normals, tol)?;
        let norm = q_star.norm();
        Ok(EscapeCertificate { direction: &q_star / norm, rate: 1.0 / norm, q_star })
    }

    /// Inner polyhedron at clearance t ≥ 0.
    pub fn equidistant(&self, t: f64) -> Result<EquidistantPolyhedron> {
        EquidistantPolyhedron::new(self.clone(), t)
    }

    /// Unit-speed straight escaper from `start` toward the certificate
    /// direction, with its certified arclength to reach clearance `level`.
    pub fn make_escaper(
        &self,
        start: &DVector<f64>,
        level: f64,
        cert: &EscapeCertificate,
    ) -> Result<Escaper> {
        self.check_dim(start)?;
        if !level.is_finite() || level <= 0.0 {
            return Err(Error::Domain(format!("clearance level must be positive, got {level}")));
        }
        let values = self.constraint_values(start)?;
        let worst = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if worst < -MEMBERSHIP_TOL {
            return Err(Error::OutsideCone { violation: worst });
        }
        // Exit time: first s with every constraint ≥ level. Slopes are at
        // least the rate, which is positive, so each deficit closes linearly.
        let mut exit = 0.0_f64;
        for (v, n) in values.iter().zip(&self.normals) {
            if *v < level {
                let slope = n.dot(&cert.direction);
                exit = exit.max((level - v) / slope);
            }
        }
        Ok(Escaper {
            start: start.clone(),
            direction: cert.direction.clone(),
            rate: cert.rate,
            level,
            exit_arclength: exit,
        })
    }
}

impl EquidistantPolyhedron {
    pub fn new(cone: PolyhedralCone, t: f64) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::Domain(format!("clearance t must be nonnegative, got {t}")));
        }
        Ok(Self { cone, t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn cone(&self) -> &PolyhedralCone {
        &self.cone
    }

    pub fn contains(&self, q: &DVector<f64>, tol: f64) -> Result<bool> {
        Ok(self.cone.min_constraint(q)? >= self.t - tol)
    }
}

impl Escaper {
    /// Point after arclength s ≥ 0.
    pub fn point_at(&self, s: f64) -> DVector<f64> {
        &self.start + &self.direction * s
    }
}

/// The cone {z ≥ a|x|, z ≥ b|y|} ⊂ R³ with unit normals; its K₁ slices
/// have half-widths (z − √(a²+1))/a along x and (z − √(b²+1))/b along y.
pub fn appendix_b_cone(a: f64, b: f64) -> Result<PolyhedralCone> {
    for (name, v) in [("a", a), ("b", b)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Domain(format!(
                "slope {name} must be positive and finite, got {v}"
            )));
        }
    }
    let na = (a * a + 1.0).sqrt();
    let nb = (b * b + 1.0).sqrt();
    PolyhedralCone::new(vec![
        DVector::from_row_slice(&[-a / na, 0.0, 1.0 / na]),
        DVector::from_row_slice(&[a / na, 0.0, 1.0 / na]),
        DVector::from_row_slice(&[0.0, -b / nb, 1.0 / nb]),
        DVector::from_row_slice(&[0.0, b / nb, 1.0 / nb]),
    ])
}

/// Half-width of the slice K₁ ∩ {q[height_axis] = z} along coordinate
/// `axis`, i.e. the largest s with z·e_h + s·e_axis ∈ K₁, derived from the
/// constraint data. Errors if the slice center itself is outside K₁;
/// returns +∞ if no constraint bounds the direction.
pub fn slice_half_width(
    cone: &PolyhedralCone,
    height_axis: usize,
    z: f64,
    axis: usize,
) -> Result<f64> {
    if height_axis >= cone.dim() || axis >= cone.dim() {
        return Err(Error::Domain(format!(
            "axes ({height_axis}, {axis}) out of range for dimension {}",
            cone.dim()
        )));
    }
    let mut width = f64::INFINITY;
    for n in cone.normals() {
        let at_center = z * n[height_axis];
        let slope = n[axis];
        if slope >= 0.0 {
            if slope == 0.0 && at_center < 1.0 - 1e-12 {
                return Err(Error::Domain(format!("slice at z = {z} does not meet K₁")));
            }
            continue;
        }
        if at_center < 1.0 {
            return Err(Error::Domain(format!("slice at z = {z} does not meet K₁")));
        }
        width = width.min((at_center - 1.0) / -slope);
    }
    Ok(width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(v)
    }

    fn orthant(n: usize) -> PolyhedralCone {
        let normals = (0..n)
            .map(|i| {
                let mut v = DVector::zeros(n);
                v[i] = 1.0;
                v
            })
            .collect();
        PolyhedralCone::new(normals).unwrap()
    }

    #[test]
    fn construction_validates_normals() {
        assert!(PolyhedralCone::new(vec![]).is_err());
        assert!(matches!(
            PolyhedralCone::new(vec![dv(&[2.0, 0.0])]),
            Err(Error::NotUnitNormal { .. })
        ));
        assert!(PolyhedralCone::new(vec![dv(&[1.0, 0.0]), dv(&[1.0])]).is_err());
        assert!(PolyhedralCone::new(vec![dv(&[f64::NAN, 0.0])]).is_err());
        // Slightly off unit length is renormalized.
        let c = PolyhedralCone::new(vec![dv(&[1.0 + 5e-7, 0.0])]).unwrap();
        assert_relative_eq!(c.normals()[0].norm(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn duplicate_normals_are_merged() {
        let c = PolyhedralCone::new(vec![
            dv(&[1.0, 0.0]),
            dv(&[1.0, 0.0]),
            dv(&[1.0 - 1e-13, 1e-7]).normalize(),
            dv(&[0.0, 1.0]),
        ])
        .unwrap();
        assert_eq!(c.num_normals(), 2);
    }

    #[test]
    fn degenerate_cones_are_rejected() {
        assert!(matches!(
            PolyhedralCone::new(vec![dv(&[1.0, 0.0]), dv(&[-1.0, 0.0])]),
            Err(Error::DegenerateCone { .. })
        ));
        // Three normals at 120° in the plane bound only the origin.
        let third = 2.0 * std::f64::consts::PI / 3.0;
        assert!(matches!(
            PolyhedralCone::new(vec![
                dv(&[1.0, 0.0]),
                dv(&[third.cos(), third.sin()]),
                dv(&[(2.0 * third).cos(), (2.0 * third).sin()]),
            ]),
            Err(Error::DegenerateCone { .. })
        ));
    }

    #[test]
    fn interior_direction_is_certified() {
        let c = orthant(3);
        let v = c.interior_direction();
        assert_relative_eq!(v.norm(), 1.0, max_relative = 1e-12);
        assert!(c.min_constraint(v).unwrap() > 0.0);
        assert_relative_eq!(c.hull_margin(), 1.0 / 3.0_f64.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn boundary_distance_is_min_constraint() {
        let c = orthant(3);
        let q = dv(&[0.5, 2.0, 1.0]);
        assert_relative_eq!(c.dist_to_boundary(&q).unwrap(), 0.5, max_relative = 1e-15);
        assert!(matches!(
            c.dist_to_boundary(&dv(&[-0.1, 1.0, 1.0])),
            Err(Error::OutsideCone { .. })
        ));
        // A redundant face never beats the true minimum.
        let mut normals: Vec<_> = c.normals().to_vec();
        normals.push(dv(&[1.0, 1.0, 0.0]).normalize());
        let with_redundant = PolyhedralCone::new(normals).unwrap();
        assert_relative_eq!(
            with_redundant.dist_to_boundary(&q).unwrap(),
            0.5,
            max_relative = 1e-15
        );
    }

    #[test]
    fn escape_certificate_matches_closed_forms() {
        let c = orthant(4);
        let cert = c.escape_rate(1e-12).unwrap();
        assert_relative_eq!(cert.rate, 0.5, max_relative = 1e-12);
        assert_relative_eq!(cert.direction.norm(), 1.0, max_relative = 1e-12);
        assert_relative_eq!(cert.rate * cert.q_star.norm(), 1.0, max_relative = 1e-12);
        // Rate equals the construction-time hull margin (dual routes agree).
        assert!((cert.rate - c.hull_margin()).abs() < 1e-9);
    }

    #[test]
    fn equidistant_polyhedron_tracks_clearance() {
        let c = orthant(2);
        let k_half = c.equidistant(0.5).unwrap();
        assert!(k_half.contains(&dv(&[0.5, 0.7]), 1e-12).unwrap());
        assert!(!k_half.contains(&dv(&[0.49, 0.7]), 1e-12).unwrap());
        assert!(c.equidistant(-1.0).is_err());
    }

    #[test]
    fn escaper_reaches_the_level_set() {
        let c = orthant(2);
        let cert = c.escape_rate(1e-12).unwrap();
        let start = dv(&[0.0, 2.0]);
        let esc = c.make_escaper(&start, 1.0, &cert).unwrap();
        // x-deficit of 1 closes at slope 1/√2.
        assert_relative_eq!(esc.exit_arclength, 2.0_f64.sqrt(), max_relative = 1e-12);
        let exit = esc.point_at(esc.exit_arclength);
        assert_relative_eq!(c.dist_to_boundary(&exit).unwrap(), 1.0, max_relative = 1e-12);
        // Clearance along the ray grows at least at the certified rate.
        let d0 = c.dist_to_boundary(&start).unwrap();
        for step in 1..=20 {
            let s = esc.exit_arclength * step as f64 / 20.0;
            let d = c.dist_to_boundary(&esc.point_at(s)).unwrap();
            assert!(d + 1e-12 >= d0 + esc.rate * s);
        }
        // Starting beyond the level set means zero exit arclength.
        let deep = c.make_escaper(&dv(&[2.0, 2.0]), 1.0, &cert).unwrap();
        assert_eq!(deep.exit_arclength, 0.0);
        assert!(matches!(
            c.make_escaper(&dv(&[-1.0, 0.0]), 1.0, &cert),
            Err(Error::OutsideCone { .. })
        ));
    }

    #[test]
    fn appendix_cone_slices_have_expected_half_widths() {
        let c = appendix_b_cone(1.0, 0.5).unwrap();
        for z in [2.0_f64, 5.0, 40.0] {
            let wx = slice_half_width(&c, 2, z, 0).unwrap();
            let wy = slice_half_width(&c, 2, z, 1).unwrap();
            assert_relative_eq!(wx, z - 2.0_f64.sqrt(), max_relative = 1e-13);
            assert_relative_eq!(wy, (z - 1.25_f64.sqrt()) / 0.5, max_relative = 1e-13);
        }
        // Below z = √2 the slice misses K₁ entirely.
        assert!(slice_half_width(&c, 2, 1.2, 0).is_err());
        assert!(appendix_b_cone(0.0, 1.0).is_err());
    }
}
