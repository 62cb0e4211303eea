//! Cheap starting points for the Grassmann search: least-squares leakage
//! minimization and the DOF-preserving partial null-space design.

use crate::admission::stacked_interference_channel;
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::ia::ActiveLinkState;
use crate::linalg;
use crate::scalar::Real;
use crate::CMat;

/// Precoder minimizing `||H F||_F^2` over orthonormal `F`: the `streams`
/// least significant right singular vectors of `stacked`. Returns the
/// precoder and the achieved leakage.
pub fn leakage_min_init<T: Real>(stacked: &CMat<T>, streams: usize) -> Result<(CMat<T>, T)> {
    let m = stacked.ncols();
    if streams == 0 || streams > m {
        return Err(Error::Config(format!(
            "{streams} streams from {m} transmit antennas"
        )));
    }
    let (f, s) = linalg::least_right_singular(stacked, streams);
    let leakage = s.iter().fold(T::zero(), |a, &x| a + x * x);
    Ok((f, leakage))
}

/// Result of the DOF-preserving design.
#[derive(Debug, Clone)]
pub struct DofPreserving<T: Real> {
    pub f: CMat<T>,
    /// Active receivers (ascending) that see no secondary interference.
    pub aligned: Vec<usize>,
    /// `sum_{i not aligned} ||P_i H_is F||_F^2`.
    pub residual_leakage: T,
}

/// All `size`-element subsets of `0..n` in lexicographic order.
fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < size - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, size, &mut Vec::with_capacity(size), &mut out);
    out
}

/// Aligns secondary user `user`'s interference at the largest possible set
/// of active receivers and, among sets of that size, the one leaving the
/// least leakage at the others. Exhaustive over subsets.
pub fn dof_preserving_init<T: Real>(
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    user: usize,
    streams: usize,
) -> Result<DofPreserving<T>> {
    let m = channels.get(user, user).ncols();
    if streams == 0 || streams > m {
        return Err(Error::Config(format!(
            "user {user}: {streams} streams from {m} transmit antennas, even the empty alignment set is infeasible"
        )));
    }
    let n_active = state.len();
    let blocks: Vec<CMat<T>> = state
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| &l.p * channels.get(i, user))
        .collect();
    let stack = |set: &[usize]| {
        let refs: Vec<&CMat<T>> = set.iter().map(|&i| &blocks[i]).collect();
        linalg::vstack(&refs, m)
    };
    let streams_of = state.streams();
    for size in (0..=n_active).rev() {
        let mut best: Option<DofPreserving<T>> = None;
        for set in subsets(n_active, size) {
            let needed: usize = set.iter().map(|&i| streams_of[i]).sum::<usize>() + streams;
            if needed > m {
                continue;
            }
            let basis = linalg::null_space(&stack(&set));
            if basis.ncols() < streams {
                continue;
            }
            let rest: Vec<usize> = (0..n_active).filter(|i| !set.contains(i)).collect();
            let (f, residual) = if rest.is_empty() {
                (basis.columns(0, streams).into_owned(), T::zero())
            } else {
                let outside = stack(&rest);
                let (g, s) = linalg::least_right_singular(&(&outside * &basis), streams);
                (&basis * g, s.iter().fold(T::zero(), |a, &x| a + x * x))
            };
            if best.as_ref().is_none_or(|b| residual < b.residual_leakage) {
                best = Some(DofPreserving {
                    f,
                    aligned: set,
                    residual_leakage: residual,
                });
            }
        }
        if let Some(b) = best {
            return Ok(b);
        }
    }
    unreachable!("the empty set is always feasible once streams <= M")
}

/// Convenience wrapper: leakage-minimizing precoder of secondary user `user`.
pub fn leakage_min_for_user<T: Real>(
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    user: usize,
    streams: usize,
) -> Result<(CMat<T>, T)> {
    leakage_min_init(
        &stacked_interference_channel(channels, state, user),
        streams,
    )
}

/// Precoder minimizing `sum_i ||W_i H_is F||^2 / ||W_i H_is||^2`, the
/// leakage after the receive filters with every active receiver weighted
/// equally regardless of its cross-channel strength. Used to start the
/// alternating minimization, which works on the same filtered channels.
pub fn balanced_leakage_init<T: Real>(
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    user: usize,
    streams: usize,
) -> Result<CMat<T>> {
    let m = channels.get(user, user).ncols();
    if streams == 0 || streams > m {
        return Err(Error::Config(format!(
            "{streams} streams from {m} transmit antennas"
        )));
    }
    let mut gram = linalg::zeros::<T>(m, m);
    for (i, link) in state.links.iter().enumerate() {
        let filtered = &link.w * channels.get(i, user);
        let weight = linalg::frobenius_sq(&filtered);
        if weight > T::zero() {
            gram += filtered.adjoint() * &filtered * crate::scalar::real(T::one() / weight);
        }
    }
    Ok(linalg::least_eigenvectors(&gram, streams).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_network, LinkDims, NetworkConfig};
    use crate::ia::{align_active_network, IaOptions};
    use crate::linalg::{frobenius, frobenius_sq, orthonormality_defect};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(ms: usize, seed: u64) -> (ChannelSet<f64>, ActiveLinkState<f64>) {
        let cfg = NetworkConfig::three_user_2x2()
            .with_secondary(1, LinkDims::new(ms, ms, 1))
            .with_seed(seed);
        let ch = generate_network::<f64>(&cfg).unwrap();
        let st = align_active_network(&ch, &[1, 1, 1], &IaOptions::default(), seed).unwrap();
        (ch, st)
    }

    #[test]
    fn subsets_are_lexicographic() {
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(subsets(4, 4).len(), 1);
    }

    #[test]
    fn leakage_min_matches_singular_values_and_sampling() {
        let (ch, st) = setup(3, 1);
        let h = stacked_interference_channel(&ch, &st, 3);
        let (f, leak) = leakage_min_init(&h, 1).unwrap();
        assert!(orthonormality_defect(&f) < 1e-12);
        assert!((frobenius_sq(&(&h * &f)) - leak).abs() < 1e-10);
        let s = linalg::svd(&h).s;
        assert!((leak - s[2] * s[2]).abs() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let g = linalg::haar_orthonormal::<f64, _>(3, 1, &mut rng);
            assert!(frobenius_sq(&(&h * g)) >= leak - 1e-12);
        }
    }

    #[test]
    fn leakage_min_vanishes_above_threshold() {
        let (ch, st) = setup(5, 2);
        let (_, leak) = leakage_min_for_user(&ch, &st, 3, 1).unwrap();
        assert!(leak < 1e-18);
    }

    #[test]
    fn dof_preserving_aligns_two_of_three() {
        let (ch, st) = setup(3, 3);
        let out = dof_preserving_init(&ch, &st, 3, 1).unwrap();
        assert_eq!(out.aligned.len(), 2);
        for &i in &out.aligned {
            assert!(frobenius(&(&st.links[i].p * ch.get(i, 3) * &out.f)) < 1e-9);
            assert!(frobenius(&(&st.links[i].w * ch.get(i, 3) * &out.f)) < 1e-9);
        }
        let excluded: f64 = (0..3)
            .filter(|i| !out.aligned.contains(i))
            .map(|i| frobenius_sq(&(&st.links[i].p * ch.get(i, 3) * &out.f)))
            .sum();
        assert!((excluded - out.residual_leakage).abs() < 1e-10);
    }

    #[test]
    fn dof_preserving_is_l0_optimal_for_single_streams() {
        // brute force: no unit vector can be aligned at all three receivers,
        // and every pair admits a one-dimensional solution
        let (ch, st) = setup(3, 4);
        let out = dof_preserving_init(&ch, &st, 3, 1).unwrap();
        let all = stacked_interference_channel(&ch, &st, 3);
        assert_eq!(linalg::null_space(&all).ncols(), 0);
        for pair in subsets(3, 2) {
            let refs: Vec<CMat<f64>> = pair
                .iter()
                .map(|&i| &st.links[i].p * ch.get(i, 3))
                .collect();
            let r: Vec<&CMat<f64>> = refs.iter().collect();
            let basis = linalg::null_space(&linalg::vstack(&r, 3));
            assert_eq!(basis.ncols(), 1);
            let rest = 3 - pair.iter().sum::<usize>();
            let leak = frobenius_sq(&(&st.links[rest].p * ch.get(rest, 3) * &basis));
            assert!(out.residual_leakage <= leak + 1e-12);
        }
        let nonzero = (0..3)
            .filter(|&i| frobenius(&(&st.links[i].p * ch.get(i, 3) * &out.f)) > 1e-9)
            .count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn dof_preserving_full_set_above_threshold() {
        let (ch, st) = setup(5, 5);
        let out = dof_preserving_init(&ch, &st, 3, 1).unwrap();
        assert_eq!(out.aligned, vec![0, 1, 2]);
        let h = stacked_interference_channel(&ch, &st, 3);
        assert!(frobenius(&(&h * &out.f)) < 1e-9);
        assert_eq!(out.residual_leakage, 0.0);
    }

    #[test]
    fn balanced_leakage_beats_sampling() {
        let (ch, st) = setup(3, 7);
        let cost = |f: &CMat<f64>| -> f64 {
            (0..3)
                .map(|i| {
                    let g = &st.links[i].w * ch.get(i, 3);
                    frobenius_sq(&(&g * f)) / frobenius_sq(&g)
                })
                .sum()
        };
        for streams in [1, 2] {
            let f = balanced_leakage_init(&ch, &st, 3, streams).unwrap();
            assert!(orthonormality_defect(&f) < 1e-12);
            let mut rng = ChaCha8Rng::seed_from_u64(10);
            for _ in 0..1000 {
                let g = linalg::haar_orthonormal::<f64, _>(3, streams, &mut rng);
                assert!(cost(&g) >= cost(&f) - 1e-12);
            }
        }
        assert!(balanced_leakage_init(&ch, &st, 3, 0).is_err());
    }

    #[test]
    fn dof_preserving_rejects_too_many_streams() {
        let (ch, st) = setup(3, 6);
        assert!(matches!(
            dof_preserving_init(&ch, &st, 3, 4),
            Err(Error::Config(_))
        ));
    }
}
