//! Sweep specifications and the flat configuration-file format.
//!
//! A configuration file is TOML restricted to top-level keys; every key is
//! optional and overrides the default shown in [`ConfigFile`]'s docs:
//!
//! ```toml
//! seed = 7
//! trials = 300
//! snr_db = [0, 10, 20, 30, 40, 50]
//! strategies = ["no_secondary", "optimal_single", "selfish"]
//! secondary_users = 1
//! secondary_antennas = 5
//! secondary_streams = 2
//! ```

use std::path::{Path, PathBuf};

use ia_arrival::constrained::{AltMinOptions, MgmOptions, StepRule};
use ia_arrival::{properness_check, IaOptions, LinkDims, NetworkConfig};
use serde::Deserialize;

use crate::error::{SimError, SimResult};
use crate::strategy::{ConvergenceAlgorithm, Strategy};

/// Everything needed to reproduce one Monte Carlo experiment.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    /// Users, antennas and base seed. Its `snr_db` is ignored in favour of
    /// the grid below.
    pub network: NetworkConfig,
    pub strategies: Vec<Strategy>,
    /// Strictly increasing SNR grid in dB.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    /// Design order for `iterative_self_optimizing`, as absolute user
    /// indices. `None` is ascending.
    pub order: Option<Vec<usize>>,
    /// Let `iterative_self_optimizing` confine its interference too.
    pub confine: bool,
    pub ia: IaOptions<f64>,
    pub mgm: MgmOptions<f64>,
    pub alt_min: AltMinOptions<f64>,
    /// Inclusive SNR window (dB) for the DOF estimate.
    pub dof_window: (f64, f64),
    /// Algorithms the `converge` command studies.
    pub convergence: Vec<ConvergenceAlgorithm>,
    /// Channel redraws allowed per trial before the sweep gives up.
    pub max_regenerations: usize,
    pub out: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            network: NetworkConfig::three_user_2x2().with_secondary(1, LinkDims::new(5, 5, 1)),
            strategies: vec![Strategy::NoSecondary, Strategy::OptimalSingle],
            snr_db: vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
            trials: 100,
            order: None,
            confine: false,
            ia: IaOptions::default(),
            mgm: MgmOptions::default(),
            alt_min: AltMinOptions::default(),
            dof_window: (30.0, 50.0),
            convergence: ConvergenceAlgorithm::ALL.to_vec(),
            max_regenerations: 100,
            out: None,
        }
    }
}

impl SweepSpec {
    pub fn active_streams(&self) -> Vec<usize> {
        vec![self.network.active.streams; self.network.active_users]
    }

    /// Checks the grid, the network and that every strategy applies to it.
    pub fn validate(&self) -> SimResult<()> {
        if self.trials == 0 {
            return Err(SimError::Config("trials must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(SimError::Config("SNR grid is empty".into()));
        }
        if self.snr_db.iter().any(|s| !s.is_finite())
            || self.snr_db.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(SimError::Config(format!(
                "SNR grid must be finite and strictly increasing, got {:?}",
                self.snr_db
            )));
        }
        if self.strategies.is_empty() {
            return Err(SimError::Config("no strategies given".into()));
        }
        if self.dof_window.0.partial_cmp(&self.dof_window.1) != Some(std::cmp::Ordering::Less) {
            return Err(SimError::Config(format!(
                "empty DOF window {:?}",
                self.dof_window
            )));
        }
        let net = &self.network;
        net.validate()?;
        if net.active_users == 0 {
            return Err(SimError::Config("the sweep needs an active network".into()));
        }
        let report = properness_check(&vec![net.active; net.active_users]);
        if !report.proper {
            return Err(SimError::Refused(format!(
                "active network is improper ({report}), IA cannot be relied on"
            )));
        }
        let k_s = net.secondary_users;
        let threshold = net.active_users * net.active.streams + net.secondary.streams;
        for &st in &self.strategies {
            let tag = st.tag();
            if st != Strategy::NoSecondary && k_s == 0 {
                return Err(SimError::Refused(format!(
                    "{tag} needs at least one secondary user"
                )));
            }
            if st.is_zero_impact() && net.secondary.tx < threshold {
                return Err(SimError::Refused(format!(
                    "{tag} needs M_s >= {threshold} transmit antennas to stay invisible, got {}",
                    net.secondary.tx
                )));
            }
            match st {
                Strategy::OptimalSingle | Strategy::Constrained { .. } if k_s != 1 => {
                    return Err(SimError::Refused(format!(
                        "{tag} designs a single secondary user, got {k_s}"
                    )));
                }
                Strategy::SuccessiveIa => {
                    if net.secondary.tx != net.secondary.rx {
                        return Err(SimError::Refused(format!(
                            "{tag} needs square secondary links"
                        )));
                    }
                    ia_arrival::zero_impact::successive_ia_feasible(
                        k_s,
                        net.secondary.tx - net.active_users * net.active.streams,
                        net.secondary.streams,
                    )?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Applies a configuration file on top of `self`.
    pub fn apply(&mut self, file: ConfigFile) -> SimResult<()> {
        let net = &mut self.network;
        if let Some(v) = file.seed {
            net.seed = v;
        }
        if let Some(v) = file.active_users {
            net.active_users = v;
        }
        if let Some(v) = file.active_antennas {
            net.active.tx = v;
            net.active.rx = v;
        }
        if let Some(v) = file.active_streams {
            net.active.streams = v;
        }
        if let Some(v) = file.secondary_users {
            net.secondary_users = v;
        }
        if let Some(v) = file.secondary_antennas {
            net.secondary.tx = v;
            net.secondary.rx = v;
        }
        if let Some(v) = file.secondary_tx {
            net.secondary.tx = v;
        }
        if let Some(v) = file.secondary_rx {
            net.secondary.rx = v;
        }
        if let Some(v) = file.secondary_streams {
            net.secondary.streams = v;
        }
        if let Some(v) = file.trials {
            self.trials = v;
        }
        if let Some(v) = file.snr_db {
            self.snr_db = v;
        }
        if let Some(v) = file.strategies {
            self.strategies = v.iter().map(|s| s.parse()).collect::<SimResult<_>>()?;
        }
        if let Some(v) = file.order {
            self.order = Some(v);
        }
        if let Some(v) = file.confine {
            self.confine = v;
        }
        if let Some(v) = file.mgm_rule {
            self.mgm.rule = parse_rule(&v)?;
        }
        if let Some(v) = file.mgm_tol {
            self.mgm.tol = v;
        }
        if let Some(v) = file.mgm_max_iters {
            self.mgm.max_iters = v;
        }
        if let Some(v) = file.alt_min_tol {
            self.alt_min.tol = v;
        }
        if let Some(v) = file.alt_min_max_iters {
            self.alt_min.max_iters = v;
        }
        if let Some(v) = file.ia_max_iters {
            self.ia.max_iters = v;
        }
        if let Some([lo, hi]) = file.dof_window {
            self.dof_window = (lo, hi);
        }
        if let Some(v) = file.convergence {
            self.convergence = v.iter().map(|s| s.parse()).collect::<SimResult<_>>()?;
        }
        if let Some(v) = file.max_regenerations {
            self.max_regenerations = v;
        }
        if let Some(v) = file.out {
            self.out = Some(v);
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> SimResult<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        let mut spec = SweepSpec::default();
        spec.apply(file)?;
        Ok(spec)
    }

    pub fn from_path(path: &Path) -> SimResult<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// One of the shipped presets (`fig2` .. `fig6`).
    pub fn preset(name: &str) -> SimResult<Self> {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                SimError::Config(format!(
                    "unknown preset {name:?}; available: {}",
                    names.join(", ")
                ))
            })?;
        Self::from_toml(text)
    }
}

pub const PRESETS: [(&str, &str); 5] = [
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
];

fn parse_rule(s: &str) -> SimResult<StepRule> {
    match s {
        "halving" => Ok(StepRule::Halving),
        "armijo" => Ok(StepRule::Armijo),
        "barzilai_borwein" => Ok(StepRule::BarzilaiBorwein),
        other => Err(SimError::Config(format!(
            "unknown mgm_rule {other:?}; expected halving, armijo or barzilai_borwein"
        ))),
    }
}

/// On-disk configuration. Unknown keys are rejected.
///
/// Defaults: three active 2x2 single-stream users, one 5x5 secondary user
/// with one stream, seed 0, 100 trials, SNR 0..50 dB in 10 dB steps,
/// strategies `no_secondary` and `optimal_single`, DOF window 30..50 dB.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub snr_db: Option<Vec<f64>>,
    pub strategies: Option<Vec<String>>,
    pub active_users: Option<usize>,
    /// Antennas at both ends of every active link.
    pub active_antennas: Option<usize>,
    pub active_streams: Option<usize>,
    pub secondary_users: Option<usize>,
    /// Antennas at both ends of every secondary link.
    pub secondary_antennas: Option<usize>,
    pub secondary_tx: Option<usize>,
    pub secondary_rx: Option<usize>,
    pub secondary_streams: Option<usize>,
    pub order: Option<Vec<usize>>,
    pub confine: Option<bool>,
    /// `halving`, `armijo` or `barzilai_borwein`.
    pub mgm_rule: Option<String>,
    pub mgm_tol: Option<f64>,
    pub mgm_max_iters: Option<usize>,
    pub alt_min_tol: Option<f64>,
    pub alt_min_max_iters: Option<usize>,
    pub ia_max_iters: Option<usize>,
    pub dof_window: Option<[f64; 2]>,
    pub convergence: Option<Vec<String>>,
    pub max_regenerations: Option<usize>,
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse_and_validate() {
        for (name, _) in PRESETS {
            let spec = SweepSpec::preset(name).unwrap();
            spec.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn overrides_apply() {
        let spec = SweepSpec::from_toml(
            "seed = 5\ntrials = 7\nsnr_db = [1.0, 2]\nsecondary_antennas = 4\nstrategies = [\"selfish\"]\nmgm_rule = \"armijo\"",
        )
        .unwrap();
        assert_eq!(spec.network.seed, 5);
        assert_eq!(spec.trials, 7);
        assert_eq!(spec.snr_db, vec![1.0, 2.0]);
        assert_eq!(spec.network.secondary, LinkDims::new(4, 4, 1));
        assert_eq!(spec.strategies, vec![Strategy::Selfish]);
        assert_eq!(spec.mgm.rule, StepRule::Armijo);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(SweepSpec::from_toml("sead = 1").is_err());
        assert!(SweepSpec::from_toml("strategies = [\"nope\"]").is_err());
        assert!(SweepSpec::from_toml("mgm_rule = \"newton\"").is_err());
    }

    #[test]
    fn validation_catches_bad_grids_and_inapplicable_strategies() {
        let bad = |f: &dyn Fn(&mut SweepSpec)| {
            let mut s = SweepSpec::default();
            f(&mut s);
            s.validate().unwrap_err()
        };
        assert!(matches!(bad(&|s| s.snr_db = vec![]), SimError::Config(_)));
        assert!(matches!(
            bad(&|s| s.snr_db = vec![10.0, 0.0]),
            SimError::Config(_)
        ));
        assert!(matches!(bad(&|s| s.trials = 0), SimError::Config(_)));
        assert!(matches!(
            bad(&|s| s.network.active_users = 4),
            SimError::Refused(_)
        ));
        assert!(matches!(
            bad(&|s| s.network.secondary = LinkDims::new(3, 3, 1)),
            SimError::Refused(_)
        ));
        assert!(matches!(
            bad(&|s| s.network.secondary_users = 2),
            SimError::Refused(_)
        ));
        let succ = bad(&|s| {
            s.network.secondary_users = 4;
            s.strategies = vec![Strategy::SuccessiveIa];
        });
        assert_eq!(succ.kind(), "successive_ia_infeasible");
    }
}
