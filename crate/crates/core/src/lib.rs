//! Escape-rate certificates and Jacobi-Maupertuis diameter bounds for the
//! negative-energy n-body problem.
//!
//! At energy −1 the Hill region {U ≥ 1} carries the metric
//! ds² = 2(U − 1)⟨dq, dq⟩ (mass inner product). Collision distances compress
//! into the sandwich λ_*/dist ≤ U ≤ Λ/dist, the collision locus lifts to a
//! hyperplane arrangement in mass-weighted coordinates, and the minimal
//! chamber escape rate turns into an explicit upper bound on the metric
//! diameter. The modules below follow that pipeline:
//!
//! * [`nbody`]: mass metric, potential, exact collision distances;
//! * [`quad`]: adaptive Gauss-Kronrod quadrature;
//! * [`cone`]: polyhedral cones, origin projection onto the unit-gap
//!   polyhedron, escape-rate certificates;
//! * [`arrangement`]: hyperplane arrangements, chamber enumeration, the
//!   collision lift, global escape rates;
//! * [`ode`]: adaptive Newtonian integration with running metric length;
//! * [`jm`]: metric path lengths, escape paths to the Hill boundary, and the
//!   diameter certificate;
//! * [`verify`]: seeded self-check suites behind the CLI `verify` command;
//! * [`cli`]: the `jmbound` binary surface (JSON in, JSON/CSV out).

pub mod arrangement;
pub mod cli;
pub mod cone;
pub mod error;
pub mod jm;
pub mod nbody;
pub mod ode;
pub mod quad;
pub mod verify;

pub use error::{Error, Result};
pub use nbody::{Configuration, HillMembership, MassSystem};
