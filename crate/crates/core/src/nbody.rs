//! Configuration space of the n-body problem with the mass inner product
//! ⟨u, v⟩ = Σ_a m_a u_a · v_a, the Newtonian potential, and exact distances
//! to the collision locus.
//!
//! Everything downstream (cones, arrangements, the metric bounds) works in
//! mass-weighted coordinates x_a = √m_a q_a, where the mass metric becomes
//! the Euclidean one. `MassSystem::weighted` / `unweighted` convert between
//! the two charts.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Classification of a point relative to the Hill boundary {U = 1}.
pub const HILL_BOUNDARY_TOL: f64 = 1e-9;

/// Positive masses, a common spatial dimension, and a gravitational constant.
#[derive(Debug, Clone, PartialEq)]
pub struct MassSystem {
    masses: Vec<f64>,
    dim: usize,
    g: f64,
}

/// A point of configuration space: one d-vector per body, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    coords: DVector<f64>,
    bodies: usize,
    dim: usize,
}

/// Where a configuration sits relative to {U = 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HillMembership {
    Interior,
    Boundary,
    Outside,
}

impl MassSystem {
    /// System with G = 1. Requires at least two bodies, positive finite
    /// masses, and dimension ≥ 1.
    pub fn new(masses: Vec<f64>, dim: usize) -> Result<Self> {
        Self::with_g(masses, dim, 1.0)
    }

    pub fn with_g(masses: Vec<f64>, dim: usize, g: f64) -> Result<Self> {
        if masses.len() < 2 {
            return Err(Error::Validation("need at least two bodies".into()));
        }
        if dim == 0 {
            return Err(Error::Validation("spatial dimension must be at least 1".into()));
        }
        if let Some(m) = masses.iter().find(|m| !m.is_finite() || **m <= 0.0) {
            return Err(Error::Validation(format!("masses must be finite and positive, got {m}")));
        }
        if !g.is_finite() || g <= 0.0 {
            return Err(Error::Validation(format!("G must be finite and positive, got {g}")));
        }
        Ok(Self { masses, dim, g })
    }

    pub fn n_bodies(&self) -> usize {
        self.masses.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, a: usize) -> f64 {
        self.masses[a]
    }

    /// Dimension of configuration space (bodies × spatial dimension).
    pub fn space_dim(&self) -> usize {
        self.masses.len() * self.dim
    }

    /// Unordered body pairs (a, b) with a < b.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.masses.len();
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b)))
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        if a == b || a >= self.masses.len() || b >= self.masses.len() {
            return Err(Error::InvalidPair(a, b));
        }
        Ok(())
    }

    fn check_conforms(&self, q: &Configuration) -> Result<()> {
        if q.bodies != self.masses.len() || q.dim != self.dim {
            return Err(Error::Shape(format!(
                "configuration has {} bodies in dimension {}, system has {} in dimension {}",
                q.bodies,
                q.dim,
                self.masses.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// k_ab = √(m_a m_b / (m_a + m_b)): the factor converting mutual
    /// separation r_ab into mass-metric distance from the pair collision.
    pub fn pair_k(&self, a: usize, b: usize) -> Result<f64> {
        self.check_pair(a, b)?;
        let (ma, mb) = (self.masses[a], self.masses[b]);
        Ok((ma * mb / (ma + mb)).sqrt())
    }

    /// λ_ab = G m_a m_b k_ab, the per-pair constant in the potential sandwich.
    pub fn pair_lambda(&self, a: usize, b: usize) -> Result<f64> {
        Ok(self.g * self.masses[a] * self.masses[b] * self.pair_k(a, b)?)
    }

    /// λ_* = min over pairs of λ_ab.
    pub fn lambda_min(&self) -> f64 {
        self.pairs()
            .map(|(a, b)| self.pair_lambda(a, b).expect("valid pair"))
            .fold(f64::INFINITY, f64::min)
    }

    /// Λ = Σ over pairs of λ_ab.
    pub fn lambda_sum(&self) -> f64 {
        self.pairs().map(|(a, b)| self.pair_lambda(a, b).expect("valid pair")).sum()
    }

    /// Mass inner product ⟨u, v⟩ = Σ_a m_a u_a · v_a.
    pub fn mass_inner(&self, u: &Configuration, v: &Configuration) -> Result<f64> {
        self.check_conforms(u)?;
        self.check_conforms(v)?;
        let mut acc = 0.0;
        for a in 0..self.masses.len() {
            let (ua, va) = (u.body(a), v.body(a));
            let dot: f64 = ua.iter().zip(va).map(|(x, y)| x * y).sum();
            acc += self.masses[a] * dot;
        }
        Ok(acc)
    }

    pub fn mass_norm(&self, u: &Configuration) -> Result<f64> {
        Ok(self.mass_inner(u, u)?.sqrt())
    }

    /// Separation |q_a − q_b|.
    pub fn separation(&self, q: &Configuration, a: usize, b: usize) -> Result<f64> {
        self.check_conforms(q)?;
        self.check_pair(a, b)?;
        let (qa, qb) = (q.body(a), q.body(b));
        Ok(qa.iter().zip(qb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
    }

    /// U(q) = G Σ_{a<b} m_a m_b / r_ab. Returns +∞ on the collision locus.
    pub fn potential(&self, q: &Configuration) -> Result<f64> {
        self.check_conforms(q)?;
        let mut u = 0.0;
        for (a, b) in self.pairs() {
            let r = self.separation(q, a, b)?;
            if r == 0.0 {
                return Ok(f64::INFINITY);
            }
            u += self.g * self.masses[a] * self.masses[b] / r;
        }
        Ok(u)
    }

    /// Mass-metric distance from q to the pair collision set {q_a = q_b}:
    /// exactly k_ab r_ab.
    pub fn dist_to_pair_collision(&self, q: &Configuration, a: usize, b: usize) -> Result<f64> {
        Ok(self.pair_k(a, b)? * self.separation(q, a, b)?)
    }

    /// Mass-metric distance from q to the full collision locus Δ
    /// (minimum over pairs).
    pub fn dist_to_collision(&self, q: &Configuration) -> Result<f64> {
        self.check_conforms(q)?;
        let mut best = f64::INFINITY;
        for (a, b) in self.pairs() {
            best = best.min(self.dist_to_pair_collision(q, a, b)?);
        }
        Ok(best)
    }

    /// Two-sided bound on dist(q, Δ) from the potential alone:
    /// λ_*/U ≤ dist ≤ Λ/U. Returns (0, 0) on the collision locus.
    pub fn sandwich_bounds(&self, q: &Configuration) -> Result<(f64, f64)> {
        let u = self.potential(q)?;
        if u.is_infinite() {
            return Ok((0.0, 0.0));
        }
        Ok((self.lambda_min() / u, self.lambda_sum() / u))
    }

    /// Classify q against the Hill boundary {U = 1} with tolerance `tol`.
    pub fn hill_membership_with_tol(&self, q: &Configuration, tol: f64) -> Result<HillMembership> {
        let u = self.potential(q)?;
        Ok(if (u - 1.0).abs() <= tol {
            HillMembership::Boundary
        } else if u > 1.0 {
            HillMembership::Interior
        } else {
            HillMembership::Outside
        })
    }

    pub fn hill_membership(&self, q: &Configuration) -> Result<HillMembership> {
        self.hill_membership_with_tol(q, HILL_BOUNDARY_TOL)
    }

    /// Acceleration q̈_a = Σ_{b≠a} G m_b (q_b − q_a)/r_ab³, the mass-metric
    /// gradient of U. Errors on the collision locus.
    pub fn newton_rhs(&self, q: &Configuration) -> Result<Configuration> {
        self.check_conforms(q)?;
        let mut acc = Configuration::zeros(q.bodies, q.dim);
        for (a, b) in self.pairs() {
            let r = self.separation(q, a, b)?;
            if r == 0.0 {
                return Err(Error::OnCollisionLocus);
            }
            let w = self.g / (r * r * r);
            for j in 0..self.dim {
                let diff = q.coords[b * self.dim + j] - q.coords[a * self.dim + j];
                acc.coords[a * self.dim + j] += w * self.masses[b] * diff;
                acc.coords[b * self.dim + j] -= w * self.masses[a] * diff;
            }
        }
        Ok(acc)
    }

    /// Total energy ½‖v‖²_m − U(q).
    pub fn energy(&self, q: &Configuration, v: &Configuration) -> Result<f64> {
        Ok(0.5 * self.mass_inner(v, v)? - self.potential(q)?)
    }

    /// Mass-weighted chart x_a = √m_a q_a, in which the mass metric is
    /// Euclidean.
    pub fn weighted(&self, q: &Configuration) -> Result<DVector<f64>> {
        self.check_conforms(q)?;
        let mut x = q.coords.clone();
        for a in 0..q.bodies {
            let s = self.masses[a].sqrt();
            for j in 0..q.dim {
                x[a * q.dim + j] *= s;
            }
        }
        Ok(x)
    }

    /// Inverse of `weighted`.
    pub fn unweighted(&self, x: &DVector<f64>) -> Result<Configuration> {
        if x.len() != self.space_dim() {
            return Err(Error::Shape(format!(
                "weighted vector has length {}, expected {}",
                x.len(),
                self.space_dim()
            )));
        }
        let mut q =
            Configuration::from_flat(x.iter().copied().collect(), self.masses.len(), self.dim)?;
        for a in 0..self.masses.len() {
            let s = self.masses[a].sqrt();
            for j in 0..self.dim {
                q.coords[a * self.dim + j] /= s;
            }
        }
        Ok(q)
    }
}

impl Configuration {
    /// From per-body coordinate blocks, all of equal length.
    pub fn from_blocks(blocks: &[Vec<f64>]) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Validation("configuration needs at least one body".into()));
        }
        let dim = blocks[0].len();
        if dim == 0 {
            return Err(Error::Validation("body coordinates must be nonempty".into()));
        }
        if let Some(bad) = blocks.iter().find(|b| b.len() != dim) {
            return Err(Error::Shape(format!(
                "body blocks have mixed lengths ({} vs {})",
                bad.len(),
                dim
            )));
        }
        let flat: Vec<f64> = blocks.iter().flatten().copied().collect();
        Self::from_flat(flat, blocks.len(), dim)
    }

    /// From a flat coordinate vector of length bodies × dim.
    pub fn from_flat(coords: Vec<f64>, bodies: usize, dim: usize) -> Result<Self> {
        if coords.len() != bodies * dim {
            return Err(Error::Shape(format!(
                "flat vector has length {}, expected {} × {}",
                coords.len(),
                bodies,
                dim
            )));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::Validation(format!("coordinates must be finite, got {bad}")));
        }
        Ok(Self { coords: DVector::from_vec(coords), bodies, dim })
    }

    pub fn zeros(bodies: usize, dim: usize) -> Self {
        Self { coords: DVector::zeros(bodies * dim), bodies, dim }
    }

    pub fn bodies(&self) -> usize {
        self.bodies
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn body(&self, a: usize) -> &[f64] {
        &self.coords.as_slice()[a * self.dim..(a + 1) * self.dim]
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn to_blocks(&self) -> Vec<Vec<f64>> {
        (0..self.bodies).map(|a| self.body(a).to_vec()).collect()
    }

    /// Dilated configuration λq. Requires λ > 0; U(λq) = U(q)/λ and every
    /// collision distance scales by λ.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::Domain(format!("scale factor must be positive, got {lambda}")));
        }
        Ok(Self { coords: &self.coords * lambda, bodies: self.bodies, dim: self.dim })
    }

    /// self + s · other, blockwise.
    pub fn add_scaled(&self, other: &Configuration, s: f64) -> Result<Self> {
        if self.bodies != other.bodies || self.dim != other.dim {
            return Err(Error::Shape("configurations have different shapes".into()));
        }
        Ok(Self { coords: &self.coords + &other.coords * s, bodies: self.bodies, dim: self.dim })
    }

    pub fn sub(&self, other: &Configuration) -> Result<Self> {
        self.add_scaled(other, -1.0)
    }
}
