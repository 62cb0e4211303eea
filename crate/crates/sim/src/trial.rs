//! Per-trial channel draws and the active network's IA solution.

use ia_arrival::{
    align_active_network, derive_seed, generate_network, ActiveLinkState64, ChannelSet64, Error,
    IaOptions, NetworkConfig,
};

use crate::error::{SimError, SimResult};

/// Sub-seed streams derived from a trial's channel seed.
const IA_STREAM: u64 = 1;
const STRATEGY_STREAM: u64 = 2;
const SUCCESSIVE_STREAM: u64 = 3;

/// One Monte Carlo realization with the active users aligned.
#[derive(Debug, Clone)]
pub struct Trial {
    pub index: usize,
    /// Seed of the channel draw that was finally used.
    pub seed: u64,
    /// Channel draws discarded because IA failed on them.
    pub regenerations: usize,
    pub channels: ChannelSet64,
    pub state: ActiveLinkState64,
}

impl Trial {
    /// Seed for randomized precoders (random orthonormal combinations).
    pub fn strategy_seed(&self) -> u64 {
        derive_seed(self.seed, STRATEGY_STREAM)
    }

    /// Seed for the second IA layer among secondary users.
    pub fn successive_seed(&self) -> u64 {
        derive_seed(self.seed, SUCCESSIVE_STREAM)
    }
}

/// Whether `e` means an IA solve failed on this particular channel draw.
pub fn is_ia_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::NotConverged { .. }
            | Error::AlignmentViolation { .. }
            | Error::DegenerateAlignment { .. }
            | Error::DegenerateChannel { .. }
    )
}

fn draw(
    network: &NetworkConfig,
    ia: &IaOptions<f64>,
    index: usize,
    attempt: usize,
) -> SimResult<Trial> {
    let first = derive_seed(network.seed, index as u64);
    let seed = if attempt == 0 {
        first
    } else {
        derive_seed(first, attempt as u64)
    };
    let channels = generate_network::<f64>(&network.clone().with_seed(seed))?;
    let streams = vec![network.active.streams; network.active_users];
    let state = align_active_network(&channels, &streams, ia, derive_seed(seed, IA_STREAM))?;
    Ok(Trial {
        index,
        seed,
        regenerations: attempt,
        channels,
        state,
    })
}

/// Draws trial `index` of `network`, aligns its active users and runs
/// `body` on it.
///
/// The first draw uses `derive_seed(network.seed, index)`. Whenever an IA
/// solve fails, in the active network or inside `body`, the channels are
/// redrawn from `derive_seed(first, attempt)`, at most `max_regenerations`
/// times. Returns `body`'s result and the number of redraws.
pub fn with_regeneration<R>(
    network: &NetworkConfig,
    ia: &IaOptions<f64>,
    index: usize,
    max_regenerations: usize,
    mut body: impl FnMut(&Trial) -> SimResult<R>,
) -> SimResult<(R, usize)> {
    let mut last = None;
    for attempt in 0..=max_regenerations {
        match draw(network, ia, index, attempt).and_then(|t| body(&t)) {
            Ok(r) => return Ok((r, attempt)),
            Err(SimError::Core(e)) if is_ia_failure(&e) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(SimError::Regeneration {
        trial: index,
        attempts: max_regenerations + 1,
        last: last.expect("at least one attempt was made"),
    })
}

/// The aligned trial alone; see [`with_regeneration`].
pub fn prepare_trial(
    network: &NetworkConfig,
    ia: &IaOptions<f64>,
    index: usize,
    max_regenerations: usize,
) -> SimResult<Trial> {
    Ok(with_regeneration(network, ia, index, max_regenerations, |t| Ok(t.clone()))?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ia_arrival::LinkDims;

    #[test]
    fn trials_are_reproducible_and_distinct() {
        let net = NetworkConfig::three_user_2x2()
            .with_secondary(1, LinkDims::new(3, 3, 1))
            .with_seed(11);
        let a = prepare_trial(&net, &IaOptions::default(), 4, 10).unwrap();
        let b = prepare_trial(&net, &IaOptions::default(), 4, 10).unwrap();
        let c = prepare_trial(&net, &IaOptions::default(), 5, 10).unwrap();
        assert_eq!(a.seed, b.seed);
        assert_eq!(a.channels.get(0, 3), b.channels.get(0, 3));
        assert_ne!(a.channels.get(0, 3), c.channels.get(0, 3));
        assert!(a.state.max_cross_leakage(&a.channels) < 1e-6);
    }

    #[test]
    fn failures_inside_the_body_redraw_the_trial() {
        let net = NetworkConfig::three_user_2x2().with_seed(12);
        let mut seeds = Vec::new();
        let (value, redraws) = with_regeneration(&net, &IaOptions::default(), 0, 5, |t| {
            seeds.push(t.seed);
            if seeds.len() < 3 {
                Err(Error::NotConverged {
                    iterations: 1,
                    leakage: 1.0,
                }
                .into())
            } else {
                Ok(t.regenerations)
            }
        })
        .unwrap();
        assert_eq!((value, redraws), (2, 2));
        assert_eq!(seeds.len(), 3);
        assert!(seeds[0] != seeds[1] && seeds[1] != seeds[2]);
        // other errors are not retried
        let err = with_regeneration(&net, &IaOptions::default(), 0, 5, |_| -> SimResult<()> {
            Err(SimError::Config("x".into()))
        });
        assert!(matches!(err, Err(SimError::Config(_))));
    }

    #[test]
    fn infeasible_networks_exhaust_regeneration() {
        let mut net = NetworkConfig::three_user_2x2().with_seed(1);
        net.active_users = 4;
        let ia = IaOptions {
            max_iters: 200,
            ..IaOptions::default()
        };
        match prepare_trial(&net, &ia, 0, 2) {
            Err(SimError::Regeneration { attempts, .. }) => assert_eq!(attempts, 3),
            other => panic!("expected regeneration failure, got {other:?}"),
        }
    }
}
