//! Acceptance gate: every release criterion, one pass/fail line each.
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines
//! on success; on failure they are printed by the harness.

use std::time::{Duration, Instant};

use jmbound::verify;

struct Criterion {
    label: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
}

fn run(
    label: &'static str,
    budget: Option<Duration>,
    f: impl FnOnce() -> (bool, String),
) -> Criterion {
    let start = Instant::now();
    let (mut passed, mut detail) = f();
    let elapsed = start.elapsed();
    if let Some(budget) = budget {
        if elapsed > budget {
            passed = false;
            detail = format!("{detail}; exceeded {budget:?} budget");
        }
    }
    Criterion { label, passed, detail, elapsed }
}

fn suite_outcome(
    result: jmbound::error::Result<verify::SuiteReport>,
    keys: &[&str],
) -> (bool, String) {
    match result {
        Ok(report) => {
            let shown: Vec<String> = keys
                .iter()
                .filter_map(|k| report.details.get(*k).map(|v| format!("{k}={v:.3e}")))
                .collect();
            (report.passed, format!("{} checks; {}", report.checks, shown.join(", ")))
        }
        Err(err) => (false, format!("errored: {err}")),
    }
}

#[test]
fn acceptance() {
    let seed = 42_u64;
    let mut results = Vec::new();

    results.push(run("1 closed-form escape rates ±1e-9", Some(Duration::from_secs(1)), || {
        suite_outcome(
            verify::closed_form_rates(),
            &["halfspace_rate_err", "orthant_rate_err", "sector_rate_err"],
        )
    }));

    results.push(run(
        "2 projection tier agreement ≤1e-8 on 500 cones",
        Some(Duration::from_secs(30)),
        || {
            suite_outcome(
                verify::projection_equivalence(seed.wrapping_add(1)),
                &["tier_norm_diff", "rate_vs_margin_diff"],
            )
        },
    ));

    results.push(run("3 slab-cone geometry: z ≥ √2, witness, aspect → 2", None, || {
        suite_outcome(
            verify::appendix_b(seed.wrapping_add(3)),
            &["k1_min_z", "witness_min_constraint_defect", "aspect_last"],
        )
    }));

    results.push(run("4 collision distances vs projection oracle ≤1e-12", None, || {
        suite_outcome(
            verify::distance_sandwich(seed.wrapping_add(2)),
            &["pair_distance_rel_err", "sandwich_lower_violation", "sandwich_upper_violation"],
        )
    }));

    results.push(run(
        "5 metric length vs action ≤1e-6, drift ≤1e-7, 50 trajectories",
        None,
        || {
            suite_outcome(
                verify::jm_newton_consistency(seed.wrapping_add(4)),
                &["jm_action_total_rel_diff", "energy_drift"],
            )
        },
    ));

    results.push(run(
        "6 finite certificate covers 400 Hill-region escapes",
        Some(Duration::from_secs(120)),
        || {
            suite_outcome(
                verify::certificate_soundness(seed.wrapping_add(5)),
                &["jm_over_bound", "envelope_max", "boundary_defect"],
            )
        },
    ));

    results.push(run("7 two-body radial oracle ≤ bound; slack reported", None, || {
        match verify::two_body_sharpness() {
            Ok(report) => {
                let equal = report.details["equal_slack_factor"];
                let uneven = report.details["uneven_slack_factor"];
                (report.passed, format!("slack equal={equal:.12}, uneven={uneven:.12}"))
            }
            Err(err) => (false, format!("errored: {err}")),
        }
    }));

    results.push(run("8 seeded verify reports are byte-identical", None, || {
        let render = || -> jmbound::error::Result<String> {
            Ok(serde_json::to_string_pretty(&verify::run_all(7)?).unwrap())
        };
        match (render(), render()) {
            (Ok(a), Ok(b)) => (a == b, format!("{} bytes", a.len())),
            (Err(err), _) | (_, Err(err)) => (false, format!("errored: {err}")),
        }
    }));

    let mut all_passed = true;
    for c in &results {
        all_passed &= c.passed;
        println!(
            "{} criterion {} [{:.2?}] ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.label,
            c.elapsed,
            c.detail
        );
    }
    assert!(all_passed, "acceptance criteria failed; see the lines above");
}
