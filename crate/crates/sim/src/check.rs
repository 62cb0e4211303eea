//! Invariant suite on random instances, behind the `check` command.

use ia_arrival::constrained::{
    alt_min_init, balanced_leakage_init, leakage_min_for_user, mgm_optimize, solve_procrustes,
    ActiveRateObjective, AltMinOptions, MgmOptions, Objective,
};
use ia_arrival::rates::{active_sum_rate, active_sum_rate_with_secondary};
use ia_arrival::zero_impact::{self, PrecoderStrategy};
use ia_arrival::{
    derive_seed, linalg, AdmissionContext, ComplexMatrix, IaOptions, LinkDims, NetworkConfig,
};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::SimResult;
use crate::trial::{prepare_trial, Trial};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub worst: f64,
    pub limit: f64,
}

fn trial(secondary: LinkDims, seed: u64, index: usize) -> SimResult<Trial> {
    let net = NetworkConfig::three_user_2x2()
        .with_secondary(1, secondary)
        .with_seed(seed);
    prepare_trial(&net, &IaOptions::default(), index, 100)
}

/// Largest componentwise relative error between the analytic gradient of
/// `objective` at `f` and central differences with step `h`, over real and
/// imaginary parts. Components whose size is below `floor` times the
/// gradient's largest entry are compared in absolute terms against that
/// scale.
pub fn gradient_error<O: Objective<f64>>(
    objective: &O,
    f: &ComplexMatrix,
    h: f64,
    floor: f64,
) -> f64 {
    let (_, g) = objective.value_and_gradient(f);
    let scale = g
        .iter()
        .fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
    let mut worst = 0.0f64;
    for idx in 0..f.len() {
        for (dir, analytic) in [
            (Complex::new(h, 0.0), g[idx].re),
            (Complex::new(0.0, h), g[idx].im),
        ] {
            let mut plus = f.clone();
            plus[idx] += dir;
            let mut minus = f.clone();
            minus[idx] -= dir;
            let fd = (objective.value(&plus) - objective.value(&minus)) / (2.0 * h);
            let denom = fd.abs().max(analytic.abs()).max(floor * scale);
            if denom > 0.0 {
                worst = worst.max((fd - analytic).abs() / denom);
            }
        }
    }
    worst
}

/// Runs every check on `trials` random instances derived from `seed`.
pub fn run_checks(seed: u64, trials: usize) -> SimResult<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let outcome = |name, worst: f64, limit: f64, at_least: bool| CheckOutcome {
        name,
        passed: if at_least {
            worst > limit
        } else {
            worst < limit
        },
        worst,
        limit,
    };

    let (mut leak, mut min_sv) = (0.0f64, f64::INFINITY);
    for t in 0..trials {
        let tr = trial(LinkDims::new(5, 5, 1), seed, t)?;
        leak = leak.max(tr.state.max_cross_leakage(&tr.channels));
        min_sv = min_sv.min(tr.state.min_signal_singular_value(&tr.channels));
    }
    out.push(outcome("ia_cross_leakage", leak, 1e-6, false));
    out.push(outcome("ia_signal_rank", min_sv, 1e-6, true));

    let mut gap = 0.0f64;
    for t in 0..trials {
        let tr = trial(LinkDims::new(5, 5, 1), seed, t)?;
        let ctx = AdmissionContext::new(&tr.channels, &tr.state, 1);
        let snr = 100.0;
        let base = active_sum_rate(&tr.state, snr)?;
        for strategy in [
            PrecoderStrategy::OptimalSingle,
            PrecoderStrategy::RandomOrthonormal {
                seed: tr.strategy_seed(),
            },
            PrecoderStrategy::SelfOptimizing,
        ] {
            let f = zero_impact::design(
                &strategy,
                &ctx,
                &tr.channels,
                &tr.state,
                snr,
                &IaOptions::default(),
            )?;
            gap = gap.max(
                (active_sum_rate_with_secondary(&tr.state, &tr.channels, &f, snr)? - base).abs(),
            );
        }
    }
    out.push(outcome("zero_impact_rate_gap", gap, 1e-9, false));

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xC0));
    let (mut grad, mut am_up, mut mgm_down) = (0.0f64, 0usize, 0usize);
    for t in 0..trials {
        let tr = trial(LinkDims::new(3, 3, 1), seed, t)?;
        let obj = ActiveRateObjective::new(&tr.channels, &tr.state, 3, 1, 100.0)?;
        let f = linalg::haar_orthonormal::<f64, _>(3, 1, &mut rng);
        grad = grad.max(gradient_error(&obj, &f, 1e-5, 1e-6));

        let start = balanced_leakage_init(&tr.channels, &tr.state, 3, 1)?;
        let am = alt_min_init(
            &tr.channels,
            &tr.state,
            3,
            &start,
            100.0,
            &AltMinOptions::default(),
        )?;
        am_up += am
            .residuals
            .windows(2)
            .filter(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-15)
            .count();
        let init = leakage_min_for_user(&tr.channels, &tr.state, 3, 1)?.0;
        let mgm = mgm_optimize(&init, &obj, &MgmOptions::default());
        mgm_down += mgm.trace.values.windows(2).filter(|w| w[1] < w[0]).count();
    }
    out.push(outcome("gradient_relative_error", grad, 1e-4, false));
    out.push(outcome(
        "alt_min_residual_increases",
        am_up as f64,
        0.5,
        false,
    ));
    out.push(outcome(
        "mgm_objective_decreases",
        mgm_down as f64,
        0.5,
        false,
    ));

    let mut procrustes = 0.0f64;
    for _ in 0..trials {
        let t = linalg::complex_gaussian::<f64, _>(4, 2, &mut rng);
        let (a, value) = solve_procrustes(&t);
        let nuclear: f64 = linalg::svd(&t).s.iter().sum();
        let achieved = linalg::real_trace(&(a.adjoint() * &t));
        procrustes = procrustes
            .max((value - nuclear).abs())
            .max((achieved - nuclear).abs());
    }
    out.push(outcome(
        "procrustes_nuclear_norm_gap",
        procrustes,
        1e-9,
        false,
    ));
    Ok(out)
}
