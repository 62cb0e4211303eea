//! Precoders for secondary users below the zero-impact threshold.
//!
//! The secondary user can no longer hide completely, so it searches the
//! Grassmann manifold for the subspace that costs the active users the
//! least sum rate ([`grassmann::mgm_optimize`] on
//! [`objective::ActiveRateObjective`]). The search is local and is started
//! from one of three designs: alternating minimization ([`alt_min`]),
//! leakage minimization or DOF preservation ([`init`]).

pub mod alt_min;
pub mod grassmann;
pub mod init;
pub mod objective;
pub mod procrustes;

pub use alt_min::{alt_min_init, AltMinOptions, AltMinOutcome, AltMinState};
pub use grassmann::{mgm_optimize, GrassmannPoint, MgmOptions, MgmOutcome, MgmTrace, StepRule};
pub use init::{
    balanced_leakage_init, dof_preserving_init, leakage_min_for_user, leakage_min_init,
    DofPreserving,
};
pub use objective::{ActiveRateObjective, Objective};
pub use procrustes::solve_procrustes;

use crate::channel::ChannelSet;
use crate::error::Result;
use crate::ia::ActiveLinkState;
use crate::scalar::Real;
use crate::CMat;

/// Starting point for the Grassmann search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitialSolution {
    AltMin,
    LeakageMin,
    DofPreserving,
}

impl InitialSolution {
    pub const ALL: [InitialSolution; 3] = [
        InitialSolution::AltMin,
        InitialSolution::LeakageMin,
        InitialSolution::DofPreserving,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            InitialSolution::AltMin => "alt_min",
            InitialSolution::LeakageMin => "leakage_min",
            InitialSolution::DofPreserving => "dof_preserving",
        }
    }
}

/// An initial solution and its MGM refinement.
#[derive(Debug, Clone)]
pub struct Refined<T: Real> {
    pub init: CMat<T>,
    pub init_value: T,
    /// Iterations spent building the initial solution (zero for the closed forms).
    pub init_iterations: usize,
    pub mgm: MgmOutcome<T>,
}

/// Builds the requested initial solution for secondary user `user`.
/// Returns the precoder and the iterations it took.
pub fn initial_solution<T: Real>(
    kind: InitialSolution,
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    user: usize,
    streams: usize,
    snr: T,
    am: &AltMinOptions<T>,
) -> Result<(CMat<T>, usize)> {
    match kind {
        InitialSolution::LeakageMin => {
            Ok((leakage_min_for_user(channels, state, user, streams)?.0, 0))
        }
        InitialSolution::DofPreserving => {
            Ok((dof_preserving_init(channels, state, user, streams)?.f, 0))
        }
        InitialSolution::AltMin => {
            let start = balanced_leakage_init(channels, state, user, streams)?;
            let out = alt_min_init(channels, state, user, &start, snr, am)?;
            Ok((out.f, out.iterations))
        }
    }
}

/// Initial solution followed by MGM on the active sum rate.
#[allow(clippy::too_many_arguments)]
pub fn refine<T: Real>(
    kind: InitialSolution,
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    user: usize,
    streams: usize,
    snr: T,
    am: &AltMinOptions<T>,
    mgm: &MgmOptions<T>,
) -> Result<Refined<T>> {
    let objective = ActiveRateObjective::new(channels, state, user, streams, snr)?;
    let (init, init_iterations) = initial_solution(kind, channels, state, user, streams, snr, am)?;
    let init_value = objective.value(&init);
    let out = mgm_optimize(&init, &objective, mgm);
    Ok(Refined {
        init,
        init_value,
        init_iterations,
        mgm: out,
    })
}
