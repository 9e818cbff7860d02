//! Metric path lengths and diameter certificates for the Hill region at
//! energy −1: ds² = 2(U − 1)·⟨dq, dq⟩, clamped to zero outside {U ≥ 1}.
//!
//! The certificate chain: the collision lift's global escape rate c turns
//! the potential sandwich U ≤ Λ/dist into the envelope U(γ(t)) ≤ 1/(kt)
//! along any chamber escaper, with k = c/Λ. The envelope crosses 1 by
//! t = 1/k, so every Hill point reaches the boundary along a straight ray of
//! metric length at most
//!
//!   bound_single = √2 ∫₀^{1/k} √(max(1/(kt) − 1, 0)) dt = (√2/k)·(π/2),
//!
//! and the diameter is at most twice that. The integral is always computed
//! by quadrature (after t = u², the integrand is the smooth 2√(1/k − u²));
//! the closed form serves as an independent oracle in the tests.

use serde::{Deserialize, Serialize};

use crate::arrangement::{
    collision_hyperplane_arrangement, EscapeAnalysis, LiftRule, DEFAULT_MAX_HYPERPLANES,
};
use crate::cone::project::DEFAULT_PROJ_TOL;
use crate::cone::Escaper;
use crate::error::{Error, Result};
use crate::nbody::{Configuration, MassSystem, HILL_BOUNDARY_TOL};
use crate::quad::{
    integrate, integrate_improper_left, integrate_improper_right, QuadOpts, Quadrature,
};

/// Piecewise-linear path in configuration space.
#[derive(Debug, Clone)]
pub struct Polyline {
    vertices: Vec<Configuration>,
}

#[derive(Debug, Clone, Default)]
pub struct JmOpts {
    pub quad: QuadOpts,
    /// Allow path endpoints on the collision locus, integrating the
    /// endpoint blowup by substitution.
    pub improper_endpoints: bool,
}

impl Polyline {
    /// At least one vertex, uniform shape, consecutive vertices distinct.
    pub fn new(vertices: Vec<Configuration>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Validation("polyline needs at least one vertex".into()));
        }
        let (bodies, dim) = (vertices[0].bodies(), vertices[0].dim());
        for v in &vertices {
            if v.bodies() != bodies || v.dim() != dim {
                return Err(Error::Shape("polyline vertices have mixed shapes".into()));
            }
        }
        for pair in vertices.windows(2) {
            if (pair[1].coords() - pair[0].coords()).norm() == 0.0 {
                return Err(Error::Validation("consecutive polyline vertices coincide".into()));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Configuration] {
        &self.vertices
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Ok(Self {
            vertices: self.vertices.iter().map(|v| v.scaled(lambda)).collect::<Result<_>>()?,
        })
    }
}

fn segment_length_at_energy(
    sys: &MassSystem,
    p: &Configuration,
    r: &Configuration,
    e: f64,
    opts: &JmOpts,
) -> Result<f64> {
    let seg = r.sub(p)?;
    let len = sys.mass_norm(&seg)?;
    let dir = seg.scaled(1.0 / len)?;
    let f = |s: f64| -> f64 {
        let q = p.add_scaled(&dir, s).expect("shape fixed");
        let u = sys.potential(&q).expect("shape fixed");
        (2.0 * (u + e).max(0.0)).sqrt()
    };

    let p_singular = sys.potential(p)?.is_infinite();
    let r_singular = sys.potential(r)?.is_infinite();
    if (p_singular || r_singular) && !opts.improper_endpoints {
        return Err(Error::SingularPath);
    }
    let quadrature: Quadrature = if p_singular && r_singular {
        let left = integrate_improper_left(f, 0.0, len / 2.0, &opts.quad).map_err(map_quad_err)?;
        let right =
            integrate_improper_right(f, len / 2.0, len, &opts.quad).map_err(map_quad_err)?;
        Quadrature {
            value: left.value + right.value,
            abs_err: left.abs_err + right.abs_err,
            panels: left.panels + right.panels,
        }
    } else if p_singular {
        integrate_improper_left(f, 0.0, len, &opts.quad).map_err(map_quad_err)?
    } else if r_singular {
        integrate_improper_right(f, 0.0, len, &opts.quad).map_err(map_quad_err)?
    } else {
        integrate(f, 0.0, len, &opts.quad).map_err(map_quad_err)?
    };
    Ok(quadrature.value)
}

/// A non-finite integrand inside a segment means the segment crosses the
/// collision locus.
fn map_quad_err(e: Error) -> Error {
    match e {
        Error::Domain(_) => Error::SingularPath,
        other => other,
    }
}

/// Metric length of a polyline in ds² = 2·max(U + e, 0)·⟨dq, dq⟩ at energy
/// level e < 0. Paths may touch the collision locus only at segment
/// endpoints, and only with `opts.improper_endpoints` set.
pub fn jm_length_at_energy(
    path: &Polyline,
    sys: &MassSystem,
    e: f64,
    opts: &JmOpts,
) -> Result<f64> {
    if !e.is_finite() || e >= 0.0 {
        return Err(Error::Domain(format!("energy level must be negative, got {e}")));
    }
    let mut total = 0.0;
    for pair in path.vertices().windows(2) {
        total += segment_length_at_energy(sys, &pair[0], &pair[1], e, opts)?;
    }
    Ok(total)
}

/// Metric length at the reference energy −1.
pub fn jm_length(path: &Polyline, sys: &MassSystem, opts: &JmOpts) -> Result<f64> {
    jm_length_at_energy(path, sys, -1.0, opts)
}

/// Metric length of the worst-case escaper envelope:
/// √2 ∫₀^{1/k} √(max(1/(kt) − 1, 0)) dt, by quadrature on the substituted
/// smooth integrand 2√(1/k − u²), u ∈ [0, 1/√k].
pub fn escaper_jm_bound(k: f64) -> Result<f64> {
    if !k.is_finite() || k <= 0.0 {
        return Err(Error::Domain(format!("envelope constant k must be positive, got {k}")));
    }
    let opts = QuadOpts { rel_tol: 1e-12, ..QuadOpts::default() };
    let inv_k = 1.0 / k;
    let q = integrate(|u| 2.0 * (inv_k - u * u).max(0.0).sqrt(), 0.0, inv_k.sqrt(), &opts)?;
    Ok(std::f64::consts::SQRT_2 * q.value)
}

/// The constants assembled by a diameter certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateConstants {
    /// Smallest pair constant λ_ab = G m_a m_b k_ab.
    pub lambda_star: f64,
    /// Sum of the pair constants.
    #[serde(rename = "Lambda")]
    pub lambda_sum: f64,
    /// Lower sandwich constant: U ≥ 1 forces dist ≤ Λ, i.e. c₁ = 1/Λ.
    pub c1: f64,
    /// Upper sandwich constant C = 1/λ_*: dist ≥ λ_*/U rearranges to
    /// 1/(U·dist) ≤ C.
    #[serde(rename = "C")]
    pub c_upper: f64,
    /// Global escape rate of the lifted collision arrangement.
    pub rate: f64,
    /// Envelope constant k = c₁ · rate.
    pub k: f64,
    /// Arclength by which the envelope reaches the Hill boundary: 1/k.
    pub t_cross: f64,
}

/// Certified upper bounds on Hill-boundary distance and diameter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiameterCertificate {
    pub masses: Vec<f64>,
    pub dim: usize,
    pub g: f64,
    /// Complement axis used by the hyperplane lift.
    #[serde(rename = "lift_rule")]
    pub lift_axis: usize,
    pub constants: CertificateConstants,
    /// Upper bound on the metric distance from any Hill point to the boundary.
    pub bound_single: f64,
    /// Upper bound on the metric diameter: twice `bound_single`.
    pub bound_diameter: f64,
}

/// One computed escape: the straight path from a Hill point to the boundary
/// crossing, its measured metric length, and the certificate data behind it.
#[derive(Debug, Clone)]
pub struct EscapeRecord {
    pub path: Polyline,
    pub jm_length: f64,
    pub crossing_arclength: f64,
    /// None when the start already lies on the Hill boundary.
    pub escaper: Option<Escaper>,
    pub chamber_index: Option<usize>,
}

/// Escape analysis of a mass system's collision lift plus everything needed
/// to walk individual points out of the Hill region.
#[derive(Debug, Clone)]
pub struct EscapePlanner {
    sys: MassSystem,
    analysis: EscapeAnalysis,
    certificate: DiameterCertificate,
}

impl EscapePlanner {
    pub fn new(
        sys: MassSystem,
        rule: LiftRule,
        max_hyperplanes: usize,
        proj_tol: f64,
    ) -> Result<Self> {
        let arr = collision_hyperplane_arrangement(&sys, rule)?;
        let analysis = EscapeAnalysis::analyze(arr, max_hyperplanes, proj_tol)?;
        let rate = analysis.global_rate();
        let lambda_star = sys.lambda_min();
        let lambda_sum = sys.lambda_sum();
        let c1 = 1.0 / lambda_sum;
        let k = c1 * rate;
        let bound_single = escaper_jm_bound(k)?;
        let LiftRule::Axis(lift_axis) = rule;
        let certificate = DiameterCertificate {
            masses: sys.masses().to_vec(),
            dim: sys.dim(),
            g: sys.g(),
            lift_axis,
            constants: CertificateConstants {
                lambda_star,
                lambda_sum,
                c1,
                c_upper: 1.0 / lambda_star,
                rate,
                k,
                t_cross: 1.0 / k,
            },
            bound_single,
            bound_diameter: 2.0 * bound_single,
        };
        Ok(Self { sys, analysis, certificate })
    }

    pub fn with_defaults(sys: MassSystem) -> Result<Self> {
        Self::new(sys, LiftRule::default(), DEFAULT_MAX_HYPERPLANES, DEFAULT_PROJ_TOL)
    }

    pub fn system(&self) -> &MassSystem {
        &self.sys
    }

    pub fn analysis(&self) -> &EscapeAnalysis {
        &self.analysis
    }

    pub fn certificate(&self) -> &DiameterCertificate {
        &self.certificate
    }

    /// Straight escape path from a Hill-region configuration to the Hill
    /// boundary: pick the chamber escaper through the point, bracket the
    /// U = 1 crossing under the envelope arclength, then bisect to 1e-12.
    pub fn escape_to_boundary(&self, q: &Configuration) -> Result<EscapeRecord> {
        let u0 = self.sys.potential(q)?;
        if u0 < 1.0 - HILL_BOUNDARY_TOL {
            return Err(Error::Domain(format!(
                "configuration has U = {u0} < 1 and lies outside the Hill region"
            )));
        }
        if u0 <= 1.0 + HILL_BOUNDARY_TOL {
            return Ok(EscapeRecord {
                path: Polyline::new(vec![q.clone()])?,
                jm_length: 0.0,
                crossing_arclength: 0.0,
                escaper: None,
                chamber_index: None,
            });
        }

        let x = self.sys.weighted(q)?;
        let t_cross = self.certificate.constants.t_cross;
        let (escaper, chamber_index) = self.analysis.escaper_from_point(&x, t_cross)?;

        let u_at = |s: f64| -> Result<f64> {
            self.sys.potential(&self.sys.unweighted(&escaper.point_at(s))?)
        };

        // By the envelope, U ≤ Λ/dist ≤ 1 at the exit arclength; push just
        // past it until U is strictly below 1, then grid-walk for the first
        // crossing bracket and bisect.
        let mut s_hi = escaper.exit_arclength.max(1e-12);
        let mut tries = 0;
        while u_at(s_hi)? >= 1.0 {
            s_hi *= 1.0 + 1e-3;
            tries += 1;
            if tries > 200 {
                return Err(Error::RootFind(format!(
                    "potential never drops below 1 along the escaper (U = {} at s = {s_hi})",
                    u_at(s_hi)?
                )));
            }
        }

        const GRID: usize = 1024;
        let mut lo = 0.0_f64;
        let mut hi = s_hi;
        for i in 1..=GRID {
            let s = s_hi * i as f64 / GRID as f64;
            if u_at(s)? < 1.0 {
                hi = s;
                break;
            }
            lo = s;
        }
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if u_at(mid)? < 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let crossing = 0.5 * (lo + hi);

        let exit = self.sys.unweighted(&escaper.point_at(crossing))?;
        let path = Polyline::new(vec![q.clone(), exit])?;
        let opts = JmOpts {
            quad: QuadOpts { rel_tol: 1e-10, ..QuadOpts::default() },
            improper_endpoints: u0.is_infinite(),
        };
        let jm = jm_length(&path, &self.sys, &opts)?;
        Ok(EscapeRecord {
            path,
            jm_length: jm,
            crossing_arclength: crossing,
            escaper: Some(escaper),
            chamber_index: Some(chamber_index),
        })
    }

    /// Largest value of U(γ(s))·k·s over a sample grid along the escaper,
    /// up to the crossing; at most 1 (plus roundoff) when the envelope
    /// U ≤ 1/(ks) holds.
    pub fn envelope_excess(&self, record: &EscapeRecord, samples: usize) -> Result<f64> {
        let Some(escaper) = &record.escaper else {
            return Ok(0.0);
        };
        let k = self.certificate.constants.k;
        let mut worst = 0.0_f64;
        for i in 1..=samples {
            let s = record.crossing_arclength * i as f64 / samples as f64;
            let u = self.sys.potential(&self.sys.unweighted(&escaper.point_at(s))?)?;
            if u.is_finite() {
                worst = worst.max(u * k * s);
            }
        }
        Ok(worst)
    }
}

/// Certificate for a mass system under the default projection tolerance.
pub fn diameter_certificate(
    sys: &MassSystem,
    rule: LiftRule,
    max_hyperplanes: usize,
    proj_tol: f64,
) -> Result<DiameterCertificate> {
    Ok(EscapePlanner::new(sys.clone(), rule, max_hyperplanes, proj_tol)?.certificate().clone())
}

/// Metric length of the radial two-body path from total collision to the
/// Hill boundary, measured end to end through the generic path machinery
/// (improper endpoint included). Closed form: G m₁ m₂ k₁₂ · π/√2.
pub fn two_body_radial_jm_distance(sys: &MassSystem) -> Result<f64> {
    if sys.n_bodies() != 2 {
        return Err(Error::Domain(format!(
            "radial distance oracle is for two bodies, got {}",
            sys.n_bodies()
        )));
    }
    let (m1, m2) = (sys.mass(0), sys.mass(1));
    let total = m1 + m2;
    let r_hill = sys.g() * m1 * m2;
    let d = sys.dim();
    let place = |r: f64| -> Result<Configuration> {
        let mut blocks = vec![vec![0.0; d], vec![0.0; d]];
        blocks[0][0] = -m2 / total * r;
        blocks[1][0] = m1 / total * r;
        Configuration::from_blocks(&blocks)
    };
    let path = Polyline::new(vec![place(0.0)?, place(r_hill)?])?;
    let opts = JmOpts {
        quad: QuadOpts { rel_tol: 1e-12, ..QuadOpts::default() },
        improper_endpoints: true,
    };
    jm_length(&path, sys, &opts)
}
