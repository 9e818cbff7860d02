//! Adaptive Dormand-Prince 5(4) integration of Newton's equations at energy
//! −1, with two quadrature states carried along the flow:
//!
//! * running metric length ∫ √(2·max(U−1, 0)) ‖q̇‖_m dt,
//! * running action-style integral ∫ ‖q̇‖²_m dt (twice the kinetic energy).
//!
//! Solving the length integral as extra ODE components ties its accuracy to
//! the step controller instead of any post-hoc interpolation, so comparing
//! it against the same functional evaluated by quadrature over the sampled
//! path is a genuine two-route consistency check.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::nbody::{Configuration, MassSystem};

/// Maximum |E + 1| accepted by [`newton_integrate`].
pub const ENERGY_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct IntegrateOpts {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Stop early once any pair separation falls below this.
    pub min_separation: f64,
}

impl Default for IntegrateOpts {
    fn default() -> Self {
        Self { rel_tol: 1e-12, abs_tol: 1e-12, max_steps: 2_000_000, min_separation: 1e-8 }
    }
}

/// State at one accepted step.
#[derive(Debug, Clone)]
pub struct TrajectorySample {
    pub t: f64,
    pub position: Configuration,
    pub velocity: Configuration,
    /// Metric length accumulated from t = 0.
    pub jm_length: f64,
    /// ∫ 2K dt accumulated from t = 0.
    pub action: f64,
}

/// Reason and location of an early stop near collision.
#[derive(Debug, Clone, Copy)]
pub struct CloseApproach {
    pub t: f64,
    pub separation: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub energy_initial: f64,
    pub max_energy_drift: f64,
    pub early_stop: Option<CloseApproach>,
}

impl Trajectory {
    pub fn final_sample(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    pub fn jm_length(&self) -> f64 {
        self.final_sample().jm_length
    }
}

/// Derivative of the packed state [q, v, ℓ, a]. Returns U(q).
fn rhs(sys: &MassSystem, y: &DVector<f64>, dy: &mut DVector<f64>) -> Result<f64> {
    let n = sys.n_bodies();
    let d = sys.dim();
    let nd = n * d;
    let g = sys.g();
    let (q, v) = (&y.as_slice()[..nd], &y.as_slice()[nd..2 * nd]);

    dy.fill(0.0);
    dy.as_mut_slice()[..nd].copy_from_slice(v);
    let mut u = 0.0;
    for (a, b) in sys.pairs() {
        let mut r2 = 0.0;
        for j in 0..d {
            let diff = q[b * d + j] - q[a * d + j];
            r2 += diff * diff;
        }
        let r = r2.sqrt();
        if r == 0.0 {
            return Err(Error::OnCollisionLocus);
        }
        u += g * sys.mass(a) * sys.mass(b) / r;
        let w = g / (r2 * r);
        for j in 0..d {
            let diff = q[b * d + j] - q[a * d + j];
            dy[nd + a * d + j] += w * sys.mass(b) * diff;
            dy[nd + b * d + j] -= w * sys.mass(a) * diff;
        }
    }
    let mut kin2 = 0.0;
    for a in 0..n {
        for j in 0..d {
            kin2 += sys.mass(a) * v[a * d + j] * v[a * d + j];
        }
    }
    dy[2 * nd] = (2.0 * (u - 1.0).max(0.0)).sqrt() * kin2.sqrt();
    dy[2 * nd + 1] = kin2;
    Ok(u)
}

fn min_separation(sys: &MassSystem, y: &DVector<f64>) -> f64 {
    let d = sys.dim();
    let q = y.as_slice();
    let mut best = f64::INFINITY;
    for (a, b) in sys.pairs() {
        let mut r2 = 0.0;
        for j in 0..d {
            let diff = q[b * d + j] - q[a * d + j];
            r2 += diff * diff;
        }
        best = best.min(r2.sqrt());
    }
    best
}

fn energy(sys: &MassSystem, y: &DVector<f64>) -> Result<f64> {
    let nd = sys.space_dim();
    let q = Configuration::from_flat(y.as_slice()[..nd].to_vec(), sys.n_bodies(), sys.dim())?;
    let v = Configuration::from_flat(y.as_slice()[nd..2 * nd].to_vec(), sys.n_bodies(), sys.dim())?;
    sys.energy(&q, &v)
}

// Dormand-Prince 5(4) coefficients.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate Newton's equations from (q0, v0) to `t_final`, carrying the
/// metric-length and action quadrature states. The initial condition must
/// have energy −1 to within [`ENERGY_TOL`]; trajectories entering a pair
/// separation below `opts.min_separation` stop early with a report rather
/// than an error.
pub fn newton_integrate(
    sys: &MassSystem,
    q0: &Configuration,
    v0: &Configuration,
    t_final: f64,
    opts: &IntegrateOpts,
) -> Result<Trajectory> {
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::Domain(format!("t_final must be positive, got {t_final}")));
    }
    let e0 = sys.energy(q0, v0)?;
    let defect = (e0 + 1.0).abs();
    if defect.is_nan() || defect > ENERGY_TOL {
        return Err(Error::Domain(format!("initial energy {e0} is not -1 to within {ENERGY_TOL}")));
    }

    let nd = sys.space_dim();
    let dim = 2 * nd + 2;
    let mut y = DVector::zeros(dim);
    y.as_mut_slice()[..nd].copy_from_slice(q0.coords().as_slice());
    y.as_mut_slice()[nd..2 * nd].copy_from_slice(v0.coords().as_slice());

    let mut k: Vec<DVector<f64>> = (0..7).map(|_| DVector::zeros(dim)).collect();
    let mut y_stage = DVector::zeros(dim);
    let mut y_new = DVector::zeros(dim);

    let mut k1 = DVector::zeros(dim);
    rhs(sys, &y, &mut k1)?;
    k[0] = k1.clone();

    // Initial step ~ 0.01·‖y‖/‖ẏ‖ in tolerance-scaled norms, then PI control.
    let (mut d0, mut d1) = (0.0_f64, 0.0_f64);
    for i in 0..dim {
        let tol = opts.abs_tol + opts.rel_tol * y[i].abs();
        d0 += (y[i] / tol).powi(2);
        d1 += (k1[i] / tol).powi(2);
    }
    let mut h = if d0 > 0.0 && d1 > 0.0 { 0.01 * (d0 / d1).sqrt() } else { 1e-6 }.min(t_final);

    let mut t = 0.0_f64;
    let mut samples = vec![TrajectorySample {
        t: 0.0,
        position: q0.clone(),
        velocity: v0.clone(),
        jm_length: 0.0,
        action: 0.0,
    }];
    let mut max_drift = 0.0_f64;
    let mut early_stop = None;
    let mut err_old = 1e-4_f64;
    let mut steps = 0;

    while t < t_final {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::Solver {
                message: format!("integrator exceeded {} steps", opts.max_steps),
                residual: t_final - t,
            });
        }
        h = h.min(t_final - t);
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Solver {
                message: "step size underflow (likely a near-collision)".into(),
                residual: h,
            });
        }

        let mut stage_failed = false;
        for (s, a_row) in A.iter().enumerate().take(6) {
            y_stage.copy_from(&y);
            for (j, kj) in k.iter().enumerate().take(s + 1) {
                if a_row[j] != 0.0 {
                    y_stage.axpy(h * a_row[j], kj, 1.0);
                }
            }
            let (_, tail) = k.split_at_mut(s + 1);
            match rhs(sys, &y_stage, &mut tail[0]) {
                Ok(_) => {}
                Err(Error::OnCollisionLocus) => {
                    stage_failed = true;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if stage_failed {
            h *= 0.25;
            continue;
        }
        // 5th-order solution is the last stage combination (FSAL layout):
        // y_new = y + h Σ A[5][j] k_j, and k7 = f(y_new).
        y_new.copy_from(&y);
        for (j, kj) in k.iter().enumerate().take(6) {
            if A[5][j] != 0.0 {
                y_new.axpy(h * A[5][j], kj, 1.0);
            }
        }
        let (_, last) = k.split_at_mut(6);
        match rhs(sys, &y_new, &mut last[0]) {
            Ok(_) => {}
            Err(Error::OnCollisionLocus) => {
                h *= 0.25;
                continue;
            }
            Err(e) => return Err(e),
        }

        let mut err = 0.0_f64;
        for i in 0..dim {
            let mut e_i = 0.0;
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e_i += E[j] * kj[i];
                }
            }
            e_i *= h;
            let tol = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (e_i / tol).powi(2);
        }
        err = (err / dim as f64).sqrt().max(1e-16);

        if err <= 1.0 {
            t += h;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6); // FSAL: derivative at the accepted point.

            let q =
                Configuration::from_flat(y.as_slice()[..nd].to_vec(), sys.n_bodies(), sys.dim())?;
            let v = Configuration::from_flat(
                y.as_slice()[nd..2 * nd].to_vec(),
                sys.n_bodies(),
                sys.dim(),
            )?;
            samples.push(TrajectorySample {
                t,
                position: q,
                velocity: v,
                jm_length: y[2 * nd],
                action: y[2 * nd + 1],
            });
            max_drift = max_drift.max((energy(sys, &y)? - e0).abs());

            let sep = min_separation(sys, &y);
            if sep < opts.min_separation {
                early_stop = Some(CloseApproach { t, separation: sep });
                break;
            }

            let fac = 0.9 * err.powf(-0.17) * err_old.powf(0.04);
            h *= fac.clamp(0.2, 5.0);
            err_old = err;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }

    Ok(Trajectory { samples, energy_initial: e0, max_energy_drift: max_drift, early_stop })
}
