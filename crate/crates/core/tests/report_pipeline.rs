use nlsv::report::{verify, ToleranceModel, IDENTITY_NAMES};
use nlsv::scenarios::glassey_experiment;
use nlsv::solver::evolve;
use nlsv::{RunConfig32, RunConfig64, ScenarioSpec};

fn focusing_gaussian(dt: f64, sample_spacing: f64) -> RunConfig64 {
    let mut cfg = RunConfig64::new(1, 512, 20.0, -1.0, 3.0, ScenarioSpec::gaussian(1, 2.0, 1.0));
    cfg.dt = dt;
    cfg.t_end = 2.0;
    cfg.sample_every = (sample_spacing / dt).round() as usize;
    cfg.store_snapshots = true;
    cfg
}

#[test]
fn soliton_report_passes_every_row() {
    let mut cfg = RunConfig64::soliton();
    cfg.store_snapshots = true;
    let series = evolve(&cfg).unwrap();
    let report = verify(&cfg, &series, &ToleranceModel::default()).unwrap();
    assert_eq!(report.identities.len(), IDENTITY_NAMES.len());
    assert!(report.identities.len() >= 10);
    let failed: Vec<_> = report.failures().map(|r| r.name.clone()).collect();
    assert!(failed.is_empty(), "{report}");
}

#[test]
fn free_run_is_held_to_the_tight_tolerance() {
    let mut cfg = RunConfig64::free_gaussian();
    cfg.store_snapshots = true;
    let series = evolve(&cfg).unwrap();
    let report = verify(&cfg, &series, &ToleranceModel::default()).unwrap();
    assert!(report.passed(), "{report}");
    for row in &report.identities {
        assert!(row.tolerance <= 1e-6, "{} has tolerance {}", row.name, row.tolerance);
    }
}

#[test]
fn coarse_step_violates_the_error_model_and_refinement_repairs_it() {
    let coarse = focusing_gaussian(0.1, 0.1);
    let series = evolve(&coarse).unwrap();
    let report = verify(&coarse, &series, &ToleranceModel::default()).unwrap();
    let failed: Vec<_> = report.failures().collect();
    assert!(!failed.is_empty(), "{report}");
    assert!(failed.iter().any(|r| r.name == "energy_conservation"));
    assert!(failed.iter().all(|r| r.max_abs.is_finite() && r.max_abs > r.tolerance));
    // The table shows the magnitudes, not just the verdicts.
    let table = report.to_string();
    assert!(table.contains("FAIL"));
    assert!(table.contains(&format!("{:.4e}", failed[0].max_abs)));

    let fine = focusing_gaussian(1e-3, 1e-2);
    let series = evolve(&fine).unwrap();
    let refined = verify(&fine, &series, &ToleranceModel::default()).unwrap();
    for row in &failed {
        assert!(refined.get(&row.name).unwrap().passed(), "{refined}");
    }
}

#[test]
fn single_precision_run_conserves_charge() {
    let mut cfg = RunConfig32::soliton();
    cfg.t_end = 0.5;
    let series = evolve(&cfg).unwrap();
    // Rounding in the transforms drifts the charge by roughly one ulp per step.
    let drift = 4.0 * cfg.steps() as f32 * f32::EPSILON;
    for s in &series.samples {
        assert!((s.charge - 2.0).abs() / 2.0 <= drift, "{}", s.charge);
        assert!((s.energy + 1.0 / 3.0).abs() <= 1e-3, "{}", s.energy);
    }
}

#[test]
fn defocusing_blowup_request_reports_criterion_not_met() {
    let mut cfg = RunConfig64::new(1, 512, 20.0, 1.0, 5.0, ScenarioSpec::gaussian(1, 2.0, 0.5_f64.sqrt()));
    cfg.t_end = 0.1;
    let verdict = glassey_experiment(&cfg).unwrap();
    assert!(!verdict.criterion_met);
    assert!(verdict.predicted_time_bound.is_none());
    assert!(verdict.message.contains("criterion not met"));
}
