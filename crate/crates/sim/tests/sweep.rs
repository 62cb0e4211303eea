use ia_arrival::{LinkDims, NetworkConfig};
use ia_arrival_sim::convergence::convergence_run;
use ia_arrival_sim::dof::{bits_per_db, default_window_grid};
use ia_arrival_sim::{
    convergence_report, run_sweep, run_sweep_serial, ConvergenceAlgorithm, SimError, Strategy,
    SweepSpec, CSV_HEADER,
};

fn small(strategies: &[Strategy], snr: &[f64], trials: usize) -> SweepSpec {
    SweepSpec {
        network: NetworkConfig::three_user_2x2()
            .with_secondary(1, LinkDims::new(5, 5, 1))
            .with_seed(31),
        strategies: strategies.to_vec(),
        snr_db: snr.to_vec(),
        trials,
        ..SweepSpec::default()
    }
}

#[test]
fn row_count_covers_every_combination() {
    let r = run_sweep(&small(
        &[Strategy::OptimalSingle, Strategy::Selfish],
        &[0.0, 10.0, 20.0],
        10,
    ))
    .unwrap();
    assert_eq!(r.rows.len(), 60);
    let csv = r.to_csv_string().unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(csv.lines().count(), 61);
}

#[test]
fn rows_are_sorted_and_consistent() {
    let r = run_sweep(&small(
        &[Strategy::Selfish, Strategy::NoSecondary],
        &[0.0, 30.0],
        6,
    ))
    .unwrap();
    let keys: Vec<(String, f64, usize)> = r
        .rows
        .iter()
        .map(|x| (x.strategy.clone(), x.snr_db, x.trial))
        .collect();
    assert_eq!(keys[0], ("selfish".to_string(), 0.0, 0));
    assert_eq!(keys[5], ("selfish".to_string(), 0.0, 5));
    assert_eq!(keys[6], ("selfish".to_string(), 30.0, 0));
    assert_eq!(keys[12].0, "no_secondary");
    for row in &r.rows {
        assert!(row.r_au >= 0.0 && row.r_su >= 0.0);
        assert!((row.r_total - row.r_au - row.r_su).abs() < 1e-9);
    }
    assert!(r.rows_for("no_secondary").all(|x| x.r_su == 0.0));
}

#[test]
fn reports_are_byte_identical_across_runs_and_threading() {
    let spec = small(
        &[
            Strategy::NoSecondary,
            Strategy::RandomOrthonormal,
            Strategy::SelfOptimizing,
        ],
        &[0.0, 20.0],
        12,
    );
    let a = run_sweep(&spec).unwrap().to_csv_string().unwrap();
    let b = run_sweep(&spec).unwrap().to_csv_string().unwrap();
    let c = run_sweep_serial(&spec).unwrap().to_csv_string().unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let mut other = spec.clone();
    other.network.seed += 1;
    assert_ne!(a, run_sweep(&other).unwrap().to_csv_string().unwrap());
}

#[test]
fn zero_impact_rows_match_the_baseline() {
    let strategies = [
        Strategy::NoSecondary,
        Strategy::OptimalSingle,
        Strategy::RandomOrthonormal,
        Strategy::SelfOptimizing,
        Strategy::IterativeSelfOptimizing,
    ];
    let r = run_sweep(&small(&strategies, &[0.0, 25.0, 50.0], 15)).unwrap();
    let base: Vec<f64> = r.rows_for("no_secondary").map(|x| x.r_au).collect();
    for st in &strategies[1..] {
        let rates: Vec<f64> = r.rows_for(st.tag()).map(|x| x.r_au).collect();
        assert_eq!(rates.len(), base.len());
        for (x, b) in rates.iter().zip(&base) {
            assert!((x - b).abs() < 1e-9, "{st}: {x} vs {b}");
        }
    }
}

#[test]
fn improper_network_is_refused() {
    let mut spec = small(&[Strategy::NoSecondary], &[0.0], 1);
    spec.network.active_users = 4;
    let err = run_sweep(&spec).unwrap_err();
    assert!(matches!(err, SimError::Refused(_)));
    assert!(err.to_string().contains("N_v = 8, N_e = 12"));
}

#[test]
fn baseline_network_has_three_dof() {
    let mut spec = small(&[Strategy::NoSecondary], &default_window_grid(), 500);
    spec.network.secondary_users = 0;
    let r = run_sweep(&spec).unwrap();
    let dof = r.summary_for("no_secondary").unwrap().dof.unwrap();
    assert!((dof - 3.0).abs() < 0.3, "dof {dof}");
    // the summary slope agrees with a direct fit of the mean curve
    let means = &r.summary_for("no_secondary").unwrap().means;
    let slope = (means[4].r_total - means[0].r_total) / 20.0 / bits_per_db();
    assert!((slope - dof).abs() < 0.1);
}

#[test]
fn summary_json_carries_means_and_dof() {
    let r = run_sweep(&small(&[Strategy::OptimalSingle], &[30.0, 40.0], 4)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.summary_json()).unwrap();
    assert_eq!(v["trials"], 4);
    let s = &v["strategies"][0];
    assert_eq!(s["strategy"], "optimal_single");
    assert_eq!(s["means"].as_array().unwrap().len(), 2);
    assert!(s["dof"].as_f64().is_some());
}

#[test]
fn constrained_strategies_run_below_threshold() {
    let mut spec = small(
        &[
            Strategy::NoSecondary,
            "mgm_alt_min".parse().unwrap(),
            "alt_min".parse().unwrap(),
            "mgm_selfish".parse().unwrap(),
            "selfish_unrefined".parse().unwrap(),
        ],
        &[20.0],
        5,
    );
    spec.network.secondary = LinkDims::new(3, 3, 1);
    let r = run_sweep(&spec).unwrap();
    for t in 0..5 {
        let get = |tag: &str| r.rows_for(tag).find(|x| x.trial == t).unwrap().clone();
        let base = get("no_secondary").r_au;
        // refinement never lowers the active rate below its start
        assert!(get("mgm_alt_min").r_au >= get("alt_min").r_au - 1e-9);
        assert!(get("mgm_selfish").r_au >= get("selfish_unrefined").r_au - 1e-9);
        assert!(get("mgm_alt_min").r_au <= base + 1e-9);
        assert!(get("alt_min").refine_iters > 0);
    }
}

#[test]
fn zero_impact_strategy_below_threshold_is_refused() {
    let mut spec = small(&[Strategy::OptimalSingle], &[0.0], 1);
    spec.network.secondary = LinkDims::new(3, 3, 1);
    assert!(matches!(run_sweep(&spec), Err(SimError::Refused(_))));
}

#[test]
fn alternation_is_independent_of_snr() {
    let mut spec = SweepSpec::preset("fig6").unwrap();
    spec.trials = 5;
    for t in 0..5 {
        let lo = convergence_run(&spec, ConvergenceAlgorithm::AltMin, 0.0, t).unwrap();
        let hi = convergence_run(&spec, ConvergenceAlgorithm::AltMin, 40.0, t).unwrap();
        assert_eq!(lo.metric, hi.metric);
        assert_eq!(lo.iterations, hi.iterations);
    }
}

#[test]
fn convergence_report_summarizes_runs() {
    let mut spec = SweepSpec::preset("fig6").unwrap();
    spec.trials = 20;
    let r = convergence_report(&spec, ConvergenceAlgorithm::MgmLeakageInit, 20.0).unwrap();
    assert_eq!(r.iterations.len(), 20);
    assert_eq!(r.max_iterations, *r.iterations.iter().max().unwrap());
    assert_eq!(r.iterations[r.worst_trial], r.max_iterations);
    assert_eq!(r.worst_trace.len(), r.max_iterations + 1);
    assert_eq!(r.monotone_violations, 0);
    let mean = r.iterations.iter().sum::<usize>() as f64 / 20.0;
    assert_eq!(r.mean_iterations, mean);
    let mut two = spec.clone();
    two.network.secondary_users = 2;
    assert!(convergence_report(&two, ConvergenceAlgorithm::AltMin, 20.0).is_err());
}
