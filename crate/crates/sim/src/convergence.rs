//! Iteration counts of the constrained-design solvers over random channels.

use ia_arrival::channel::db_to_linear;
use ia_arrival::constrained::{
    alt_min_init, balanced_leakage_init, leakage_min_for_user, mgm_optimize, ActiveRateObjective,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{SimError, SimResult};
use crate::spec::SweepSpec;
use crate::strategy::ConvergenceAlgorithm;
use crate::trial::prepare_trial;

/// Relative slack for the monotonicity audits; rounding in the residual and
/// in the accumulated objective is far below it.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// What one solver run looked like.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRun {
    pub trial: usize,
    pub iterations: usize,
    pub converged: bool,
    /// Per-iteration metric: projected-gradient norm for the Grassmann
    /// search, `||F_new - F_old||_F` for the alternation.
    pub metric: Vec<f64>,
    /// Iterations at which the monitored quantity moved the wrong way
    /// (objective decreased, or residual increased).
    pub monotone_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub algorithm: String,
    pub snr_db: f64,
    pub iterations: Vec<usize>,
    pub mean_iterations: f64,
    pub max_iterations: usize,
    pub unconverged: usize,
    pub monotone_violations: usize,
    pub worst_trial: usize,
    pub worst_trace: Vec<f64>,
}

fn increases(values: &[f64]) -> usize {
    values
        .windows(2)
        .filter(|w| w[1] > w[0] + MONOTONE_SLACK * w[0].abs().max(1.0))
        .count()
}

/// Runs `algorithm` for the single secondary user of `spec` on one trial.
pub fn convergence_run(
    spec: &SweepSpec,
    algorithm: ConvergenceAlgorithm,
    snr_db: f64,
    index: usize,
) -> SimResult<ConvergenceRun> {
    let net = &spec.network;
    if net.secondary_users != 1 {
        return Err(SimError::Refused(format!(
            "the convergence study needs exactly one secondary user, got {}",
            net.secondary_users
        )));
    }
    let trial = prepare_trial(net, &spec.ia, index, spec.max_regenerations)?;
    let (ch, st) = (&trial.channels, &trial.state);
    let user = net.active_users;
    let streams = net.secondary.streams;
    let snr = db_to_linear(snr_db);
    let alt_min = |start| alt_min_init(ch, st, user, &start, snr, &spec.alt_min);
    let run = match algorithm {
        ConvergenceAlgorithm::AltMin => {
            let out = alt_min(balanced_leakage_init(ch, st, user, streams)?)?;
            ConvergenceRun {
                trial: index,
                iterations: out.iterations,
                converged: out.converged,
                metric: out.deltas,
                monotone_violations: increases(&out.residuals),
            }
        }
        ConvergenceAlgorithm::MgmAmInit | ConvergenceAlgorithm::MgmLeakageInit => {
            let start = if algorithm == ConvergenceAlgorithm::MgmAmInit {
                alt_min(balanced_leakage_init(ch, st, user, streams)?)?.f
            } else {
                leakage_min_for_user(ch, st, user, streams)?.0
            };
            let objective = ActiveRateObjective::new(ch, st, user, streams, snr)?;
            let out = mgm_optimize(&start, &objective, &spec.mgm);
            let negated: Vec<f64> = out.trace.values.iter().map(|v| -v).collect();
            ConvergenceRun {
                trial: index,
                iterations: out.iterations,
                converged: out.converged,
                metric: out.trace.gradient_norms,
                monotone_violations: increases(&negated),
            }
        }
    };
    Ok(run)
}

/// Runs `algorithm` on every trial of `spec` at `snr_db`.
pub fn convergence_report(
    spec: &SweepSpec,
    algorithm: ConvergenceAlgorithm,
    snr_db: f64,
) -> SimResult<ConvergenceReport> {
    if spec.trials == 0 {
        return Err(SimError::Config("trials must be at least 1".into()));
    }
    let runs: Vec<ConvergenceRun> = (0..spec.trials)
        .into_par_iter()
        .map(|t| convergence_run(spec, algorithm, snr_db, t))
        .collect::<SimResult<_>>()?;
    Ok(summarize(algorithm, snr_db, runs))
}

fn summarize(
    algorithm: ConvergenceAlgorithm,
    snr_db: f64,
    runs: Vec<ConvergenceRun>,
) -> ConvergenceReport {
    let iterations: Vec<usize> = runs.iter().map(|r| r.iterations).collect();
    // ties go to the earliest trial
    let worst = runs.iter().fold(
        &runs[0],
        |w, r| if r.iterations > w.iterations { r } else { w },
    );
    ConvergenceReport {
        algorithm: algorithm.tag().to_string(),
        snr_db,
        mean_iterations: iterations.iter().sum::<usize>() as f64 / iterations.len() as f64,
        max_iterations: worst.iterations,
        unconverged: runs.iter().filter(|r| !r.converged).count(),
        monotone_violations: runs.iter().map(|r| r.monotone_violations).sum(),
        worst_trial: worst.trial,
        worst_trace: worst.metric.clone(),
        iterations,
    }
}
