//! Exercises every exported C function through the raw ABI.

use std::ffi::CStr;
use std::ptr;

use jmbound_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(jmb_last_error_message()).to_string_lossy().into_owned() }
}

#[test]
fn system_lifecycle_and_queries() {
    unsafe {
        let masses = [1.0, 1.0];
        let mut sys: *mut JmbSystem = ptr::null_mut();
        assert_eq!(jmb_system_new(masses.as_ptr(), 2, 2, 1.0, &mut sys), JmbStatus::Ok);
        assert!(!sys.is_null());

        // Bodies 0.5 apart: U = 1/0.5 = 2, dist = √(1/2)·0.5.
        let coords = [0.25, 0.0, -0.25, 0.0];
        let mut u = 0.0;
        assert_eq!(jmb_system_potential(sys, coords.as_ptr(), 4, &mut u), JmbStatus::Ok);
        assert!((u - 2.0).abs() < 1e-12);

        let mut dist = 0.0;
        assert_eq!(jmb_system_dist_to_collision(sys, coords.as_ptr(), 4, &mut dist), JmbStatus::Ok);
        assert!((dist - 0.5 / 2.0_f64.sqrt()).abs() < 1e-12);

        // Collision configurations report an infinite potential, not an error.
        let on_collision = [0.1, 0.2, 0.1, 0.2];
        assert_eq!(jmb_system_potential(sys, on_collision.as_ptr(), 4, &mut u), JmbStatus::Ok);
        assert!(u.is_infinite());

        jmb_system_free(sys);
    }
}

#[test]
fn planner_certificate_and_escape() {
    unsafe {
        let masses = [1.0, 1.0];
        let mut sys: *mut JmbSystem = ptr::null_mut();
        assert_eq!(jmb_system_new(masses.as_ptr(), 2, 2, 1.0, &mut sys), JmbStatus::Ok);

        let mut planner: *mut JmbPlanner = ptr::null_mut();
        assert_eq!(jmb_planner_new(sys, 0, &mut planner), JmbStatus::Ok);

        let mut cert = JmbCertificate {
            lambda_star: 0.0,
            lambda_sum: 0.0,
            c1: 0.0,
            c_upper: 0.0,
            rate: 0.0,
            k: 0.0,
            t_cross: 0.0,
            bound_single: 0.0,
            bound_diameter: 0.0,
        };
        assert_eq!(jmb_planner_certificate(planner, &mut cert), JmbStatus::Ok);
        assert!((cert.rate - 1.0).abs() < 1e-12);
        assert!((cert.bound_single - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!((cert.bound_diameter - 2.0 * cert.bound_single).abs() < 1e-12);
        assert!((cert.k - cert.c1 * cert.rate).abs() < 1e-15);

        let coords = [0.2, 0.0, -0.2, 0.0];
        let (mut jm, mut crossing) = (0.0, 0.0);
        assert_eq!(
            jmb_planner_escape_length(planner, coords.as_ptr(), 4, &mut jm, &mut crossing),
            JmbStatus::Ok
        );
        assert!(jm > 0.0 && jm <= cert.bound_single + 1e-9);
        assert!(crossing > 0.0);

        // Outside the Hill region: invalid input, message available.
        let far = [5.0, 0.0, -5.0, 0.0];
        assert_eq!(
            jmb_planner_escape_length(planner, far.as_ptr(), 4, &mut jm, &mut crossing),
            JmbStatus::InvalidInput
        );
        assert!(!last_error().is_empty());

        jmb_planner_free(planner);
        jmb_system_free(sys);
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    unsafe {
        let mut sys: *mut JmbSystem = ptr::null_mut();
        assert_eq!(jmb_system_new(ptr::null(), 2, 2, 1.0, &mut sys), JmbStatus::InvalidInput);

        // One body is not a system.
        let masses = [1.0];
        assert_eq!(jmb_system_new(masses.as_ptr(), 1, 2, 1.0, &mut sys), JmbStatus::InvalidInput);
        assert!(!last_error().is_empty());

        let masses = [1.0, 1.0];
        assert_eq!(jmb_system_new(masses.as_ptr(), 2, 2, 1.0, &mut sys), JmbStatus::Ok);

        // Wrong coordinate count.
        let coords = [0.25, 0.0, -0.25];
        let mut u = 0.0;
        assert_eq!(jmb_system_potential(sys, coords.as_ptr(), 3, &mut u), JmbStatus::InvalidInput);
        assert!(last_error().contains("4"));

        jmb_system_free(sys);
        jmb_system_free(ptr::null_mut()); // must be a no-op
        jmb_planner_free(ptr::null_mut());
    }
}

#[test]
fn cone_rate_and_failure_codes() {
    unsafe {
        // Orthant in the plane: rate 1/√2.
        let normals = [1.0, 0.0, 0.0, 1.0];
        let mut rate = 0.0;
        assert_eq!(jmb_cone_escape_rate(normals.as_ptr(), 2, 2, 1e-10, &mut rate), JmbStatus::Ok);
        assert!((rate - 1.0 / 2.0_f64.sqrt()).abs() < 1e-9);

        // Opposing normals leave no interior.
        let degenerate = [1.0, 0.0, -1.0, 0.0];
        assert_eq!(
            jmb_cone_escape_rate(degenerate.as_ptr(), 2, 2, 1e-10, &mut rate),
            JmbStatus::InvalidInput
        );

        // Twelve constraints route to the iterative solver; an impossible
        // tolerance is a solver failure, not bad input.
        let mut many = Vec::new();
        for i in 0..12 {
            let phi = std::f64::consts::TAU * i as f64 / 12.0;
            let v = [1.0, 0.5 * phi.cos(), 0.5 * phi.sin()];
            let len = (v.iter().map(|x| x * x).sum::<f64>()).sqrt();
            many.extend(v.iter().map(|x| x / len));
        }
        assert_eq!(
            jmb_cone_escape_rate(many.as_ptr(), 12, 3, 1e-30, &mut rate),
            JmbStatus::SolverFailure
        );
        assert!(!last_error().is_empty());
    }
}

#[test]
fn generated_header_covers_the_surface() {
    let header = include_str!("../include/jmbound.h");
    for symbol in [
        "jmb_last_error_message",
        "jmb_system_new",
        "jmb_system_free",
        "jmb_system_potential",
        "jmb_system_dist_to_collision",
        "jmb_planner_new",
        "jmb_planner_free",
        "jmb_planner_certificate",
        "jmb_planner_escape_length",
        "jmb_cone_escape_rate",
        "JMB_STATUS_OK = 0",
        "JMB_STATUS_INVALID_INPUT = 2",
        "JMB_STATUS_SOLVER_FAILURE = 3",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
}
