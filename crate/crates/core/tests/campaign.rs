use contangle_core::harness::{evaluate_sample, run_monte_carlo_with_threads, SampleStatus};
use contangle_core::{residual_contangle, run_monte_carlo, ModePartition, MonteCarloConfig};

fn small(seed: u64) -> MonteCarloConfig {
    MonteCarloConfig {
        samples: 300,
        master_seed: seed,
        n_max: 40,
        ..Default::default()
    }
}

#[test]
fn records_replay_in_isolation() {
    let cfg = small(21);
    let report = run_monte_carlo(&cfg).unwrap();
    for rec in report.samples.iter().step_by(37) {
        assert_eq!(&evaluate_sample(&cfg, rec.index).unwrap(), rec);
        let p = ModePartition::new(rec.n, rec.sizes.clone()).unwrap();
        let direct = residual_contangle(&p, rec.r).unwrap();
        assert_eq!(Some(direct.value), rec.value);
    }
}

#[test]
fn values_respect_two_mode_bound() {
    let report = run_monte_carlo(&small(22)).unwrap();
    assert!(report.violations.is_empty());
    assert!(report.upper_bound_breaches.is_empty());
    for rec in &report.samples {
        if let Some(v) = rec.value {
            assert!(v <= 4.0 * rec.r * rec.r + 1e-9, "{rec:?}");
        }
    }
}

#[test]
fn reports_ignore_worker_count() {
    let cfg = small(23);
    let one = run_monte_carlo_with_threads(&cfg, 1).unwrap();
    let three = run_monte_carlo_with_threads(&cfg, 3).unwrap();
    assert_eq!(one, three);
    assert_eq!(
        serde_json::to_string(&one).unwrap(),
        serde_json::to_string(&three).unwrap()
    );
    assert!(one
        .samples
        .iter()
        .all(|s| s.status != SampleStatus::Violation));
}
