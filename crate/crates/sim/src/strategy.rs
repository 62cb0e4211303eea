//! Secondary precoding strategies the sweep can compare.

use std::fmt;
use std::str::FromStr;

use ia_arrival::constrained::InitialSolution;

use crate::error::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// The active network alone; the reference for every other row.
    NoSecondary,
    OptimalSingle,
    RandomOrthonormal,
    Selfish,
    SelfOptimizing,
    IterativeSelfOptimizing,
    SuccessiveIa,
    /// Constrained design: an initial solution, optionally refined by the
    /// Grassmann search on the active sum rate.
    Constrained {
        init: ConstrainedStart,
        refine: bool,
    },
}

/// Where a constrained design starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstrainedStart {
    Initial(InitialSolution),
    /// The selfish precoder, a start that ignores the active users entirely.
    Selfish,
}

impl Strategy {
    pub const ALL: [Strategy; 15] = [
        Strategy::NoSecondary,
        Strategy::OptimalSingle,
        Strategy::RandomOrthonormal,
        Strategy::Selfish,
        Strategy::SelfOptimizing,
        Strategy::IterativeSelfOptimizing,
        Strategy::SuccessiveIa,
        Strategy::Constrained {
            init: ConstrainedStart::Initial(InitialSolution::AltMin),
            refine: true,
        },
        Strategy::Constrained {
            init: ConstrainedStart::Initial(InitialSolution::LeakageMin),
            refine: true,
        },
        Strategy::Constrained {
            init: ConstrainedStart::Initial(InitialSolution::DofPreserving),
            refine: true,
        },
        Strategy::Constrained {
            init: ConstrainedStart::Selfish,
            refine: true,
        },
        Strategy::Constrained {
            init: ConstrainedStart::Initial(InitialSolution::AltMin),
            refine: false,
        },
        Strategy::Constrained {
            init: ConstrainedStart::Initial(InitialSolution::LeakageMin),
            refine: false,
        },
        Strategy::Constrained {
            init: ConstrainedStart::Initial(InitialSolution::DofPreserving),
            refine: false,
        },
        Strategy::Constrained {
            init: ConstrainedStart::Selfish,
            refine: false,
        },
    ];

    pub fn tag(self) -> &'static str {
        use ConstrainedStart::*;
        use InitialSolution::*;
        match self {
            Strategy::NoSecondary => "no_secondary",
            Strategy::OptimalSingle => "optimal_single",
            Strategy::RandomOrthonormal => "random_orthonormal",
            Strategy::Selfish => "selfish",
            Strategy::SelfOptimizing => "self_optimizing",
            Strategy::IterativeSelfOptimizing => "iterative_self_optimizing",
            Strategy::SuccessiveIa => "successive_ia",
            Strategy::Constrained { init, refine: true } => match init {
                Initial(AltMin) => "mgm_alt_min",
                Initial(LeakageMin) => "mgm_leakage_min",
                Initial(DofPreserving) => "mgm_dof_preserving",
                Selfish => "mgm_selfish",
            },
            Strategy::Constrained {
                init,
                refine: false,
            } => match init {
                Initial(AltMin) => "alt_min",
                Initial(LeakageMin) => "leakage_min",
                Initial(DofPreserving) => "dof_preserving",
                Selfish => "selfish_unrefined",
            },
        }
    }

    /// Strategies that promise the active users an unchanged sum rate.
    pub fn is_zero_impact(self) -> bool {
        matches!(
            self,
            Strategy::OptimalSingle
                | Strategy::RandomOrthonormal
                | Strategy::SelfOptimizing
                | Strategy::IterativeSelfOptimizing
                | Strategy::SuccessiveIa
        )
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Strategy {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .iter()
            .copied()
            .find(|st| st.tag() == s.trim())
            .ok_or_else(|| {
                let known: Vec<&str> = Strategy::ALL.iter().map(|st| st.tag()).collect();
                SimError::Config(format!(
                    "unknown strategy {s:?}; expected one of {}",
                    known.join(", ")
                ))
            })
    }
}

/// Algorithms whose iteration behaviour the convergence study reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvergenceAlgorithm {
    /// Grassmann search started from the alternating-minimization solution.
    MgmAmInit,
    /// Grassmann search started from the leakage-minimizing solution.
    MgmLeakageInit,
    /// The alternating minimization itself.
    AltMin,
}

impl ConvergenceAlgorithm {
    pub const ALL: [ConvergenceAlgorithm; 3] = [
        ConvergenceAlgorithm::MgmAmInit,
        ConvergenceAlgorithm::MgmLeakageInit,
        ConvergenceAlgorithm::AltMin,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ConvergenceAlgorithm::MgmAmInit => "mgm_am_init",
            ConvergenceAlgorithm::MgmLeakageInit => "mgm_leakage_init",
            ConvergenceAlgorithm::AltMin => "alt_min",
        }
    }

    /// Whether the iteration count depends on the SNR.
    pub fn depends_on_snr(self) -> bool {
        self != ConvergenceAlgorithm::AltMin
    }
}

impl fmt::Display for ConvergenceAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ConvergenceAlgorithm {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConvergenceAlgorithm::ALL
            .iter()
            .copied()
            .find(|a| a.tag() == s.trim())
            .ok_or_else(|| {
                SimError::Config(format!(
                    "unknown convergence algorithm {s:?}; expected mgm_am_init, mgm_leakage_init or alt_min"
                ))
            })
    }
}
