//! Zero-impact admission: how many antennas a secondary transmitter needs
//! to stay invisible to the aligned network, and the subspace it must
//! transmit in to do so.

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::ia::ActiveLinkState;
use crate::linalg;
use crate::scalar::Real;
use crate::CMat;

/// Minimum transmit antennas for `streams` zero-impact streams next to active
/// users sending `active_streams`.
pub fn zero_impact_threshold(active_streams: &[usize], streams: usize) -> usize {
    active_streams.iter().sum::<usize>() + streams
}

/// `[P_1 H_1k; ...; P_Ka H_Ka,k]`, the part of user `k`'s transmission that
/// lands outside the active interference subspaces.
pub fn stacked_interference_channel<T: Real>(
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    k: usize,
) -> CMat<T> {
    let blocks: Vec<CMat<T>> = state
        .links
        .iter()
        .enumerate()
        .map(|(i, link)| &link.p * channels.get(i, k))
        .collect();
    let refs: Vec<&CMat<T>> = blocks.iter().collect();
    linalg::vstack(&refs, channels.get(k, k).ncols())
}

/// Orthonormal basis of the right null space of the stacked channel.
/// `user` only labels the error.
pub fn zero_impact_basis<T: Real>(stacked: &CMat<T>, user: usize) -> Result<CMat<T>> {
    let basis = linalg::null_space(stacked);
    if basis.ncols() == 0 {
        return Err(Error::BelowThreshold {
            user,
            available: 0,
            streams: 1,
        });
    }
    Ok(basis)
}

/// Per-secondary-user admission data.
#[derive(Debug, Clone)]
pub struct AdmissionEntry<T: Real> {
    pub user: usize,
    pub stacked: CMat<T>,
    /// Empty (zero columns) when the user is below threshold.
    pub basis: CMat<T>,
}

#[derive(Debug, Clone)]
pub struct AdmissionContext<T: Real> {
    pub entries: Vec<AdmissionEntry<T>>,
    /// Streams every secondary user wants to send.
    pub streams: usize,
    pub threshold: usize,
}

impl<T: Real> AdmissionContext<T> {
    /// Builds the context for every user after the active ones.
    pub fn new(
        channels: &ChannelSet<T>,
        state: &ActiveLinkState<T>,
        secondary_streams: usize,
    ) -> Self {
        let entries = (state.len()..channels.users())
            .map(|k| {
                let stacked = stacked_interference_channel(channels, state, k);
                let basis = linalg::null_space(&stacked);
                AdmissionEntry {
                    user: k,
                    stacked,
                    basis,
                }
            })
            .collect();
        Self {
            entries,
            streams: secondary_streams,
            threshold: zero_impact_threshold(&state.streams(), secondary_streams),
        }
    }

    pub fn entry(&self, user: usize) -> Result<&AdmissionEntry<T>> {
        self.entries
            .iter()
            .find(|e| e.user == user)
            .ok_or_else(|| Error::Input(format!("user {user} is not a secondary user")))
    }

    /// The zero-impact basis of `user`, checked to host `streams` streams.
    pub fn basis_for(&self, user: usize, streams: usize) -> Result<&CMat<T>> {
        let e = self.entry(user)?;
        if e.basis.ncols() < streams {
            return Err(Error::BelowThreshold {
                user,
                available: e.basis.ncols(),
                streams,
            });
        }
        Ok(&e.basis)
    }

    /// [`basis_for`](Self::basis_for) with the context's own stream count.
    pub fn basis(&self, user: usize) -> Result<&CMat<T>> {
        self.basis_for(user, self.streams)
    }

    pub fn users(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.user)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_network, LinkDims, NetworkConfig};
    use crate::ia::{align_active_network, IaOptions};
    use crate::linalg::{frobenius, orthonormality_defect};

    fn setup(ms: usize, seed: u64) -> (ChannelSet<f64>, ActiveLinkState<f64>) {
        let cfg = NetworkConfig::three_user_2x2()
            .with_secondary(1, LinkDims::new(ms, ms, 1))
            .with_seed(seed);
        let ch = generate_network::<f64>(&cfg).unwrap();
        let st = align_active_network(&ch, &[1, 1, 1], &IaOptions::default(), seed).unwrap();
        (ch, st)
    }

    #[test]
    fn threshold_values() {
        assert_eq!(zero_impact_threshold(&[1, 1, 1], 1), 4);
        assert_eq!(zero_impact_threshold(&[], 2), 2);
        assert_eq!(zero_impact_threshold(&[2, 2], 1), 5);
    }

    #[test]
    fn stacked_shape_and_rank() {
        let (ch, st) = setup(5, 1);
        let h = stacked_interference_channel(&ch, &st, 3);
        assert_eq!(h.shape(), (6, 5));
        assert_eq!(linalg::svd(&h).rank(), 3);
        let v = zero_impact_basis(&h, 3).unwrap();
        assert_eq!(v.shape(), (5, 2));
        assert!(frobenius(&(&h * &v)) < 1e-9);
        assert!(orthonormality_defect(&v) < 1e-10);
    }

    #[test]
    fn threshold_is_sharp() {
        let (ch, st) = setup(4, 2);
        let ctx = AdmissionContext::new(&ch, &st, 1);
        assert_eq!(ctx.threshold, 4);
        assert_eq!(ctx.basis_for(3, 1).unwrap().ncols(), 1);

        let (ch, st) = setup(3, 2);
        let h = stacked_interference_channel(&ch, &st, 3);
        assert!(matches!(
            zero_impact_basis(&h, 3),
            Err(Error::BelowThreshold { .. })
        ));
        let ctx = AdmissionContext::new(&ch, &st, 1);
        assert!(matches!(
            ctx.basis_for(3, 1),
            Err(Error::BelowThreshold { available: 0, .. })
        ));
    }

    #[test]
    fn degenerate_projection_gives_zero_stack() {
        let (ch, mut st) = setup(5, 3);
        st.links.truncate(1);
        st.links[0].p = linalg::zeros(2, 2);
        let h = stacked_interference_channel(&ch, &st, 3);
        assert_eq!(h.shape(), (2, 5));
        assert_eq!(frobenius(&h), 0.0);
    }
}
