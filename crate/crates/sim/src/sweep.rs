//! Monte Carlo sweeps over strategies and SNR.

use std::io::Write;

use ia_arrival::constrained::{initial_solution, mgm_optimize, refine, ActiveRateObjective};
use ia_arrival::rates::{active_sum_rate_with_secondary, secondary_sum_rate};
use ia_arrival::zero_impact::{self, PrecoderStrategy};
use ia_arrival::{channel::db_to_linear, linalg, AdmissionContext, ComplexMatrix};
use rayon::prelude::*;
use serde::Serialize;

use crate::dof::{estimate_dof, in_window};
use crate::error::SimResult;
use crate::spec::SweepSpec;
use crate::strategy::{ConstrainedStart, Strategy};
use crate::trial::{with_regeneration, Trial};

/// Exact CSV header of [`SweepReport::write_csv`].
pub const CSV_HEADER: &str = "strategy,snr_db,trial,r_au,r_su,r_total,ia_iters,refine_iters";

/// One (strategy, SNR, trial) outcome. Rates are in b/s/Hz.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub strategy: String,
    pub snr_db: f64,
    pub trial: usize,
    /// Active users' sum rate with the secondary users transmitting.
    pub r_au: f64,
    /// Secondary users' sum rate.
    pub r_su: f64,
    pub r_total: f64,
    /// Iterations of the active network's IA solve.
    pub ia_iters: usize,
    /// Iterations of the strategy's own iterative stage: the Grassmann
    /// search for `mgm_*`, the alternation for `alt_min`, the second IA
    /// layer for `successive_ia`, zero for closed forms.
    pub refine_iters: usize,
}

/// Averages of one strategy at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanRates {
    pub snr_db: f64,
    pub r_au: f64,
    pub r_su: f64,
    pub r_total: f64,
    pub refine_iters: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategySummary {
    pub strategy: String,
    pub means: Vec<MeanRates>,
    /// Slope of the mean total rate over the DOF window, when the grid has
    /// at least two points inside it.
    pub dof: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub seed: u64,
    pub trials: usize,
    pub dof_window: (f64, f64),
    /// Channel draws discarded because IA failed, over all trials.
    pub regenerations: usize,
    pub regenerated_trials: usize,
    pub strategies: Vec<StrategySummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Sorted by strategy (in spec order), SNR, trial.
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, out: W) -> SimResult<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> SimResult<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }

    pub fn rows_for<'a>(&'a self, strategy: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.strategy == strategy)
    }

    pub fn summary_for(&self, strategy: &str) -> Option<&StrategySummary> {
        self.summary
            .strategies
            .iter()
            .find(|s| s.strategy == strategy)
    }

    /// Mean of `field` for `strategy` at `snr_db`.
    pub fn mean(
        &self,
        strategy: &str,
        snr_db: f64,
        field: impl Fn(&SweepRow) -> f64,
    ) -> Option<f64> {
        let vals: Vec<f64> = self
            .rows_for(strategy)
            .filter(|r| r.snr_db == snr_db)
            .map(field)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }
}

/// Secondary precoders of one strategy on one trial.
pub struct Design {
    pub precoders: Vec<ComplexMatrix>,
    pub refine_iterations: usize,
}

/// Designs the secondary precoders of `strategy` for `trial` at `snr` (linear).
pub fn design_secondary(
    spec: &SweepSpec,
    trial: &Trial,
    strategy: Strategy,
    snr: f64,
) -> SimResult<Design> {
    let net = &spec.network;
    let (ch, st) = (&trial.channels, &trial.state);
    let d_s = net.secondary.streams;
    let closed = |precoders| Design {
        precoders,
        refine_iterations: 0,
    };
    let context = || AdmissionContext::new(ch, st, d_s);
    let core_strategy = match strategy {
        Strategy::NoSecondary => {
            let empty = net
                .secondary_indices()
                .map(|k| linalg::zeros::<f64>(ch.get(k, k).ncols(), 0))
                .collect();
            return Ok(closed(empty));
        }
        Strategy::SuccessiveIa => {
            let out =
                zero_impact::successive_ia(&context(), ch, st, &spec.ia, trial.successive_seed())?;
            return Ok(Design {
                precoders: out.precoders,
                refine_iterations: out.inner.iterations,
            });
        }
        Strategy::Constrained {
            init,
            refine: refined,
        } => {
            let user = net.active_users;
            return constrained(spec, trial, user, d_s, snr, init, refined);
        }
        Strategy::OptimalSingle => PrecoderStrategy::OptimalSingle,
        Strategy::RandomOrthonormal => PrecoderStrategy::RandomOrthonormal {
            seed: trial.strategy_seed(),
        },
        Strategy::Selfish => PrecoderStrategy::Selfish,
        Strategy::SelfOptimizing => PrecoderStrategy::SelfOptimizing,
        Strategy::IterativeSelfOptimizing => PrecoderStrategy::IterativeSelfOptimizing {
            order: spec.order.clone(),
            confine: spec.confine,
        },
    };
    let precoders = zero_impact::design(&core_strategy, &context(), ch, st, snr, &spec.ia)?;
    Ok(closed(precoders))
}

fn constrained(
    spec: &SweepSpec,
    trial: &Trial,
    user: usize,
    streams: usize,
    snr: f64,
    init: ConstrainedStart,
    refined: bool,
) -> SimResult<Design> {
    let (ch, st) = (&trial.channels, &trial.state);
    let (f, iterations) = match (init, refined) {
        (ConstrainedStart::Initial(kind), false) => {
            initial_solution(kind, ch, st, user, streams, snr, &spec.alt_min)?
        }
        (ConstrainedStart::Initial(kind), true) => {
            let out = refine(kind, ch, st, user, streams, snr, &spec.alt_min, &spec.mgm)?;
            (out.mgm.point.f, out.mgm.iterations)
        }
        (ConstrainedStart::Selfish, refined) => {
            let start = zero_impact::selfish(ch, st, snr, user, streams)?;
            if refined {
                let objective = ActiveRateObjective::new(ch, st, user, streams, snr)?;
                let out = mgm_optimize(&start, &objective, &spec.mgm);
                (out.point.f, out.iterations)
            } else {
                (start, 0)
            }
        }
    };
    Ok(Design {
        precoders: vec![f],
        refine_iterations: iterations,
    })
}

/// Rates of one designed configuration.
pub fn evaluate(trial: &Trial, design: &Design, snr: f64) -> SimResult<(f64, f64)> {
    let (ch, st) = (&trial.channels, &trial.state);
    let r_au = active_sum_rate_with_secondary(st, ch, &design.precoders, snr)?;
    let mut all = st.precoders();
    all.extend(design.precoders.iter().cloned());
    let r_su = secondary_sum_rate(ch, &all, st.len(), snr)?;
    Ok((r_au, r_su))
}

fn run_trial(spec: &SweepSpec, index: usize) -> SimResult<(usize, Vec<SweepRow>)> {
    let (rows, regenerations) = with_regeneration(
        &spec.network,
        &spec.ia,
        index,
        spec.max_regenerations,
        |trial| {
            let mut rows = Vec::with_capacity(spec.strategies.len() * spec.snr_db.len());
            for &strategy in &spec.strategies {
                for &snr_db in &spec.snr_db {
                    let snr = db_to_linear(snr_db);
                    let design = design_secondary(spec, trial, strategy, snr)?;
                    let (r_au, r_su) = evaluate(trial, &design, snr)?;
                    rows.push(SweepRow {
                        strategy: strategy.tag().to_string(),
                        snr_db,
                        trial: index,
                        r_au,
                        r_su,
                        r_total: r_au + r_su,
                        ia_iters: trial.state.iterations,
                        refine_iters: design.refine_iterations,
                    });
                }
            }
            Ok(rows)
        },
    )?;
    Ok((regenerations, rows))
}

/// Runs every (strategy, SNR, trial) of `spec`, trials in parallel.
pub fn run_sweep(spec: &SweepSpec) -> SimResult<SweepReport> {
    spec.validate()?;
    let per_trial: Vec<(usize, Vec<SweepRow>)> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, t))
        .collect::<SimResult<_>>()?;
    Ok(assemble(spec, per_trial))
}

/// Same as [`run_sweep`] on the calling thread.
pub fn run_sweep_serial(spec: &SweepSpec) -> SimResult<SweepReport> {
    spec.validate()?;
    let per_trial = (0..spec.trials)
        .map(|t| run_trial(spec, t))
        .collect::<SimResult<Vec<_>>>()?;
    Ok(assemble(spec, per_trial))
}

fn assemble(spec: &SweepSpec, per_trial: Vec<(usize, Vec<SweepRow>)>) -> SweepReport {
    let regenerations = per_trial.iter().map(|(r, _)| r).sum();
    let regenerated_trials = per_trial.iter().filter(|(r, _)| *r > 0).count();
    let position = |tag: &str| {
        spec.strategies
            .iter()
            .position(|s| s.tag() == tag)
            .unwrap_or(usize::MAX)
    };
    let mut rows: Vec<SweepRow> = per_trial.into_iter().flat_map(|(_, r)| r).collect();
    rows.sort_by(|a, b| {
        position(&a.strategy)
            .cmp(&position(&b.strategy))
            .then(a.snr_db.total_cmp(&b.snr_db))
            .then(a.trial.cmp(&b.trial))
    });
    let strategies = spec
        .strategies
        .iter()
        .map(|s| {
            let tag = s.tag();
            let means: Vec<MeanRates> = spec
                .snr_db
                .iter()
                .map(|&snr_db| {
                    let sel: Vec<&SweepRow> = rows
                        .iter()
                        .filter(|r| r.strategy == tag && r.snr_db == snr_db)
                        .collect();
                    let n = sel.len() as f64;
                    let avg =
                        |f: &dyn Fn(&SweepRow) -> f64| sel.iter().map(|r| f(r)).sum::<f64>() / n;
                    MeanRates {
                        snr_db,
                        r_au: avg(&|r| r.r_au),
                        r_su: avg(&|r| r.r_su),
                        r_total: avg(&|r| r.r_total),
                        refine_iters: avg(&|r| r.refine_iters as f64),
                    }
                })
                .collect();
            let curve: Vec<(f64, f64)> = means.iter().map(|m| (m.snr_db, m.r_total)).collect();
            let dof = estimate_dof(&in_window(&curve, spec.dof_window)).ok();
            StrategySummary {
                strategy: tag.to_string(),
                means,
                dof,
            }
        })
        .collect();
    SweepReport {
        rows,
        summary: SweepSummary {
            seed: spec.network.seed,
            trials: spec.trials,
            dof_window: spec.dof_window,
            regenerations,
            regenerated_trials,
            strategies,
        },
    }
}
