//! C ABI over the escape-rate and diameter-bound library. Handles are
//! opaque pointers owned by the caller through the matching `_free`
//! functions; every fallible call returns a [`JmbStatus`] and writes its
//! result through out-pointers. Error text for the most recent failure on
//! the current thread is available via [`jmb_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use jmbound::arrangement::LiftRule;
use jmbound::cone::PolyhedralCone;
use jmbound::jm::EscapePlanner;
use jmbound::nbody::{Configuration, MassSystem};
use jmbound::Error;
use nalgebra::DVector;

/// Status codes shared with the CLI: 0 success, 2 invalid input or
/// geometry, 3 solver failure.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JmbStatus {
    Ok = 0,
    InvalidInput = 2,
    SolverFailure = 3,
}

/// A mass system: masses, spatial dimension, gravitational constant.
pub struct JmbSystem(MassSystem);

/// An escape planner holding the chamber analysis and diameter certificate
/// for one mass system.
pub struct JmbPlanner(EscapePlanner);

/// Certificate constants in one flat struct.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct JmbCertificate {
    /// Smallest pair constant λ_ab.
    pub lambda_star: f64,
    /// Sum Λ of the pair constants.
    pub lambda_sum: f64,
    /// 1/Λ.
    pub c1: f64,
    /// 1/λ_*.
    pub c_upper: f64,
    /// Global escape rate of the lifted collision arrangement.
    pub rate: f64,
    /// Envelope constant k = rate/Λ.
    pub k: f64,
    /// Arclength at which the envelope reaches the Hill boundary.
    pub t_cross: f64,
    /// Metric distance bound from any Hill point to the boundary.
    pub bound_single: f64,
    /// Metric diameter bound, twice `bound_single`.
    pub bound_diameter: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> JmbStatus {
    match err.exit_code() {
        3 => JmbStatus::SolverFailure,
        _ => JmbStatus::InvalidInput,
    }
}

fn fail(err: &Error) -> JmbStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn invalid(message: &str) -> JmbStatus {
    set_error(message);
    JmbStatus::InvalidInput
}

/// Guard against panics crossing the ABI; they become solver failures.
fn guarded(f: impl FnOnce() -> JmbStatus) -> JmbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            JmbStatus::SolverFailure
        }
    }
}

/// Message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn jmb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Create a mass system.
///
/// # Safety
/// `masses` must point to `n_bodies` doubles and `out` must be a valid
/// pointer. On success `*out` owns the system; release it with
/// [`jmb_system_free`].
#[no_mangle]
pub unsafe extern "C" fn jmb_system_new(
    masses: *const f64,
    n_bodies: usize,
    dim: usize,
    g: f64,
    out: *mut *mut JmbSystem,
) -> JmbStatus {
    if masses.is_null() || out.is_null() {
        return invalid("null pointer argument");
    }
    let masses = slice::from_raw_parts(masses, n_bodies).to_vec();
    guarded(|| match MassSystem::with_g(masses.clone(), dim, g) {
        Ok(sys) => {
            *out = Box::into_raw(Box::new(JmbSystem(sys)));
            JmbStatus::Ok
        }
        Err(err) => fail(&err),
    })
}

/// Release a system created by [`jmb_system_new`].
///
/// # Safety
/// `sys` must be null or a pointer previously returned by
/// [`jmb_system_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn jmb_system_free(sys: *mut JmbSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

unsafe fn configuration_from_raw(
    sys: &MassSystem,
    coords: *const f64,
    len: usize,
) -> Result<Configuration, Error> {
    if len != sys.space_dim() {
        return Err(Error::Shape(format!("expected {} coordinates, got {len}", sys.space_dim())));
    }
    Configuration::from_flat(slice::from_raw_parts(coords, len).to_vec(), sys.n_bodies(), sys.dim())
}

/// Gravitational potential U at a configuration. Returns +inf on a
/// collision configuration.
///
/// # Safety
/// `coords` must point to `len` doubles (body-major layout); `sys` and
/// `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn jmb_system_potential(
    sys: *const JmbSystem,
    coords: *const f64,
    len: usize,
    out: *mut f64,
) -> JmbStatus {
    if sys.is_null() || coords.is_null() || out.is_null() {
        return invalid("null pointer argument");
    }
    let sys = &(*sys).0;
    guarded(|| match configuration_from_raw(sys, coords, len).and_then(|q| sys.potential(&q)) {
        Ok(u) => {
            *out = u;
            JmbStatus::Ok
        }
        Err(err) => fail(&err),
    })
}

/// Mass-metric distance from a configuration to the collision locus.
///
/// # Safety
/// Same contract as [`jmb_system_potential`].
#[no_mangle]
pub unsafe extern "C" fn jmb_system_dist_to_collision(
    sys: *const JmbSystem,
    coords: *const f64,
    len: usize,
    out: *mut f64,
) -> JmbStatus {
    if sys.is_null() || coords.is_null() || out.is_null() {
        return invalid("null pointer argument");
    }
    let sys = &(*sys).0;
    guarded(|| {
        match configuration_from_raw(sys, coords, len).and_then(|q| sys.dist_to_collision(&q)) {
            Ok(d) => {
                *out = d;
                JmbStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Build the escape planner (chamber analysis plus certificate) for a
/// system, lifting collision subspaces along the given complement axis.
///
/// # Safety
/// `sys` and `out` must be valid pointers. On success `*out` owns the
/// planner; release it with [`jmb_planner_free`].
#[no_mangle]
pub unsafe extern "C" fn jmb_planner_new(
    sys: *const JmbSystem,
    lift_axis: usize,
    out: *mut *mut JmbPlanner,
) -> JmbStatus {
    if sys.is_null() || out.is_null() {
        return invalid("null pointer argument");
    }
    let sys = (*sys).0.clone();
    guarded(|| {
        match EscapePlanner::new(
            sys.clone(),
            LiftRule::Axis(lift_axis),
            jmbound::arrangement::DEFAULT_MAX_HYPERPLANES,
            jmbound::cone::project::DEFAULT_PROJ_TOL,
        ) {
            Ok(planner) => {
                *out = Box::into_raw(Box::new(JmbPlanner(planner)));
                JmbStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Release a planner created by [`jmb_planner_new`].
///
/// # Safety
/// `planner` must be null or a pointer previously returned by
/// [`jmb_planner_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn jmb_planner_free(planner: *mut JmbPlanner) {
    if !planner.is_null() {
        drop(Box::from_raw(planner));
    }
}

/// Copy the planner's certificate constants.
///
/// # Safety
/// `planner` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn jmb_planner_certificate(
    planner: *const JmbPlanner,
    out: *mut JmbCertificate,
) -> JmbStatus {
    if planner.is_null() || out.is_null() {
        return invalid("null pointer argument");
    }
    let cert = (*planner).0.certificate();
    *out = JmbCertificate {
        lambda_star: cert.constants.lambda_star,
        lambda_sum: cert.constants.lambda_sum,
        c1: cert.constants.c1,
        c_upper: cert.constants.c_upper,
        rate: cert.constants.rate,
        k: cert.constants.k,
        t_cross: cert.constants.t_cross,
        bound_single: cert.bound_single,
        bound_diameter: cert.bound_diameter,
    };
    JmbStatus::Ok
}

/// Walk a Hill-region configuration to the Hill boundary. Writes the
/// measured metric length of the escape path and the straight-line
/// arclength of the boundary crossing.
///
/// # Safety
/// `coords` must point to `len` doubles; `planner`, `jm_length`, and
/// `crossing_arclength` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn jmb_planner_escape_length(
    planner: *const JmbPlanner,
    coords: *const f64,
    len: usize,
    jm_length: *mut f64,
    crossing_arclength: *mut f64,
) -> JmbStatus {
    if planner.is_null() || coords.is_null() || jm_length.is_null() || crossing_arclength.is_null()
    {
        return invalid("null pointer argument");
    }
    let planner = &(*planner).0;
    guarded(|| {
        let result = configuration_from_raw(planner.system(), coords, len)
            .and_then(|q| planner.escape_to_boundary(&q));
        match result {
            Ok(record) => {
                *jm_length = record.jm_length;
                *crossing_arclength = record.crossing_arclength;
                JmbStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}

/// Escape rate of a polyhedral cone given by `m` unit normals of dimension
/// `dim`, row-major.
///
/// # Safety
/// `normals` must point to `m * dim` doubles; `out` must be a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn jmb_cone_escape_rate(
    normals: *const f64,
    m: usize,
    dim: usize,
    tol: f64,
    out: *mut f64,
) -> JmbStatus {
    if normals.is_null() || out.is_null() {
        return invalid("null pointer argument");
    }
    if m == 0 || dim == 0 || m.checked_mul(dim).is_none() {
        return invalid("need at least one normal of positive dimension");
    }
    let flat = slice::from_raw_parts(normals, m * dim);
    guarded(|| {
        let rows: Vec<DVector<f64>> = flat.chunks(dim).map(DVector::from_row_slice).collect();
        let result = PolyhedralCone::new(rows).and_then(|cone| cone.escape_rate(tol));
        match result {
            Ok(cert) => {
                *out = cert.rate;
                JmbStatus::Ok
            }
            Err(err) => fail(&err),
        }
    })
}
