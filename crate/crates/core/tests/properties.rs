use hjlab_core::experiments::{run_experiment, EXPERIMENTS};
use serde_json::{json, Value};

#[test]
fn experiments_are_bitwise_reproducible() {
    for name in EXPERIMENTS {
        let a = run_experiment(name, &Value::Null)
            .unwrap()
            .to_json()
            .unwrap();
        let b = run_experiment(name, &Value::Null)
            .unwrap()
            .to_json()
            .unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn every_default_experiment_passes() {
    for name in EXPERIMENTS {
        let rep = run_experiment(name, &Value::Null).unwrap();
        let failed: Vec<_> = rep
            .verdicts
            .iter()
            .filter(|v| !v.pass)
            .map(|v| &v.id)
            .collect();
        assert!(failed.is_empty(), "{name}: {failed:?}");
    }
}

#[test]
fn e1_series_match_closed_form() {
    let rep = run_experiment("E1_counterexample", &Value::Null).unwrap();
    let a: Vec<f64> = (0..6).map(|n| 10f64.powi(n * (n + 1) / 2)).collect();
    // u(0, a_{n+1}/4) for even n: the minimizer sits on the plateau ending at a_n.
    let plateau = rep.series("u_over_t_plateau").unwrap();
    let analytic = rep.series("analytic_plateau").unwrap();
    for (p, q) in plateau.iter().zip(analytic) {
        assert_eq!(p[0], q[0]);
        assert!((p[1] - q[1]).abs() <= 1e-9 * q[1].abs().max(1.0));
    }
    let last = plateau.last().unwrap();
    assert_eq!(last[0], a[4] / 4.0);
    assert!((last[1] + (a[3] - a[2]) / last[0]).abs() < 1e-12);
}

#[test]
fn config_override_changes_only_its_field() {
    let base = run_experiment("E5_geodesic_escape", &Value::Null).unwrap();
    let over = run_experiment("E5_geodesic_escape", &json!({ "times": [2.0, 5.0] })).unwrap();
    assert_eq!(
        over.series("start_point").unwrap()[..],
        base.series("start_point").unwrap()[..2]
    );
}
