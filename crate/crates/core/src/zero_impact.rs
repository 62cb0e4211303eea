//! Precoders for secondary users that have enough antennas to stay out of
//! the active users' signal subspaces.
//!
//! Every design except [`selfish`] picks `F_k = V_k G` with `V_k` the
//! zero-impact basis of user `k`, so the active users never notice the
//! newcomer. The designs differ only in how `G` is chosen.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::admission::AdmissionContext;
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::ia::{solve_ia, ActiveLinkState, IaOptions, IaSolution};
use crate::linalg;
use crate::rates::interference_plus_noise;
use crate::scalar::Real;
use crate::CMat;

/// How the secondary users pick their precoders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrecoderStrategy {
    /// Rate-optimal choice inside the null space, one secondary user.
    OptimalSingle,
    /// Haar-random orthonormal combination of the null space.
    RandomOrthonormal { seed: u64 },
    /// Rate-optimal for the secondary user, ignoring the active users.
    Selfish,
    /// Each secondary user optimizes against active interference only.
    SelfOptimizing,
    /// Secondary users optimize one after another, each seeing the
    /// precoders already chosen. `order` lists secondary user indices;
    /// `None` means ascending. With `confine`, every user after the first
    /// also hides inside the previous user's existing interference subspace.
    IterativeSelfOptimizing {
        order: Option<Vec<usize>>,
        confine: bool,
    },
    /// A second IA layer among the secondary users.
    SuccessiveIa { seed: u64 },
}

impl PrecoderStrategy {
    pub fn tag(&self) -> &'static str {
        match self {
            PrecoderStrategy::OptimalSingle => "optimal_single",
            PrecoderStrategy::RandomOrthonormal { .. } => "random_orthonormal",
            PrecoderStrategy::Selfish => "selfish",
            PrecoderStrategy::SelfOptimizing => "self_optimizing",
            PrecoderStrategy::IterativeSelfOptimizing { .. } => "iterative_self_optimizing",
            PrecoderStrategy::SuccessiveIa { .. } => "successive_ia",
        }
    }

    /// Whether the design guarantees zero rate loss for the active users.
    pub fn is_zero_impact(&self) -> bool {
        !matches!(self, PrecoderStrategy::Selfish)
    }
}

/// Result of an eigen selection over the zero-impact basis.
#[derive(Debug, Clone)]
pub struct SubspacePrecoder<T: Real> {
    pub f: CMat<T>,
    /// Eigenvalues of the selected directions, descending.
    pub gains: Vec<T>,
}

fn hermitian_solve<T: Real>(cov: &CMat<T>, rhs: &CMat<T>) -> Result<CMat<T>> {
    if let Some(ch) = cov.clone().cholesky() {
        return Ok(ch.solve(rhs));
    }
    let inv = linalg::checked_inverse(cov)
        .ok_or(Error::Input("interference covariance is singular".into()))?;
    Ok(inv * rhs)
}

/// Best `streams`-column precoder `basis * G` for the link `h` facing
/// interference-plus-noise covariance `cov`: `G` holds the dominant
/// eigenvectors of `(h V)^* cov^{-1} (h V)`.
pub fn best_in_subspace<T: Real>(
    h: &CMat<T>,
    basis: &CMat<T>,
    cov: &CMat<T>,
    streams: usize,
) -> Result<SubspacePrecoder<T>> {
    if basis.ncols() < streams {
        return Err(Error::Input(format!(
            "subspace of dimension {} cannot host {streams} streams",
            basis.ncols()
        )));
    }
    let hv = h * basis;
    let gram = hv.adjoint() * hermitian_solve(cov, &hv)?;
    let (g, gains) = linalg::dominant_eigenvectors(&gram, streams);
    Ok(SubspacePrecoder {
        f: basis * g,
        gains,
    })
}

/// `log2 det(I + snr/d * H F F^* H^* cov^{-1})` predicted from the selected
/// eigenvalues alone.
pub fn predicted_rate<T: Real>(gains: &[T], snr: T) -> T {
    let per_stream = snr / T::lit(gains.len().max(1) as f64);
    gains
        .iter()
        .map(|&g| (T::one() + per_stream * g.max(T::zero())).ln() / T::ln_2())
        .fold(T::zero(), |a, b| a + b)
}

fn active_covariance<T: Real>(
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    k: usize,
    snr: T,
) -> CMat<T> {
    interference_plus_noise(channels, &state.precoders(), k, 0..state.len(), snr)
}

/// Rate-optimal zero-impact precoder for secondary user `k` when it is the
/// only secondary user.
pub fn optimal_single<T: Real>(
    context: &AdmissionContext<T>,
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    snr: T,
    k: usize,
) -> Result<CMat<T>> {
    let basis = context.basis(k)?;
    let cov = active_covariance(channels, state, k, snr);
    Ok(best_in_subspace(channels.get(k, k), basis, &cov, context.streams)?.f)
}

/// Zero-impact precoder with a Haar-random combination of the null space.
pub fn random_orthonormal<T: Real>(
    context: &AdmissionContext<T>,
    k: usize,
    seed: u64,
) -> Result<CMat<T>> {
    let basis = context.basis(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = linalg::haar_orthonormal::<T, _>(basis.ncols(), context.streams, &mut rng);
    Ok(basis * g)
}

/// The secondary user's own best precoder over its whole transmit space,
/// treating active interference as noise and ignoring the harm it causes.
pub fn selfish<T: Real>(
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    snr: T,
    k: usize,
    streams: usize,
) -> Result<CMat<T>> {
    let h = channels.get(k, k);
    if streams > h.ncols().min(h.nrows()) {
        return Err(Error::Config(format!(
            "user {k}: {streams} streams on a {}x{} link",
            h.nrows(),
            h.ncols()
        )));
    }
    let cov = active_covariance(channels, state, k, snr);
    let full = linalg::identity::<T>(h.ncols());
    Ok(best_in_subspace(h, &full, &cov, streams)?.f)
}

/// Independent per-user design: each secondary user optimizes against the
/// active interference only. Returns one precoder per secondary user in
/// context order.
pub fn self_optimizing<T: Real>(
    context: &AdmissionContext<T>,
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    snr: T,
) -> Result<Vec<CMat<T>>> {
    context
        .users()
        .map(|k| optimal_single(context, channels, state, snr, k))
        .collect()
}

/// Basis of the interference already present at receiver `rx`.
fn existing_interference<T: Real>(
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    rx: usize,
) -> CMat<T> {
    let n_rx = channels.get(rx, rx).nrows();
    let blocks: Vec<CMat<T>> = state
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| channels.get(rx, i) * &l.f)
        .collect();
    let refs: Vec<&CMat<T>> = blocks.iter().collect();
    let stacked = linalg::hstack(&refs, n_rx);
    if stacked.ncols() == 0 {
        return linalg::zeros(n_rx, 0);
    }
    let d = linalg::svd(&stacked);
    d.u.columns(0, d.rank()).into_owned()
}

/// Sequential design in `order`; user `order[j]` treats the active users and
/// the already designed `order[..j]` as interference. Returns precoders in
/// context order.
pub fn iterative_self_optimizing<T: Real>(
    context: &AdmissionContext<T>,
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    snr: T,
    order: Option<&[usize]>,
    confine: bool,
) -> Result<Vec<CMat<T>>> {
    let users: Vec<usize> = context.users().collect();
    let order: Vec<usize> = order.map(|o| o.to_vec()).unwrap_or_else(|| users.clone());
    let mut sorted = order.clone();
    sorted.sort_unstable();
    if sorted != users {
        return Err(Error::Input(format!(
            "ordering {order:?} is not a permutation of the secondary users {users:?}"
        )));
    }
    let n_active = state.len();
    let mut all = state.precoders();
    all.extend(
        users
            .iter()
            .map(|&k| linalg::zeros::<T>(channels.get(k, k).ncols(), 0)),
    );
    let mut previous: Option<usize> = None;
    for &k in &order {
        let entry = context.entry(k)?;
        let basis = match (confine, previous) {
            (true, Some(prev)) => {
                let occupied = existing_interference(channels, state, prev);
                let outside =
                    linalg::identity::<T>(occupied.nrows()) - &occupied * occupied.adjoint();
                let constraint = linalg::vstack(
                    &[&entry.stacked, &(outside * channels.get(prev, k))],
                    entry.stacked.ncols(),
                );
                let basis = linalg::null_space(&constraint);
                if basis.ncols() < context.streams {
                    return Err(Error::Config(format!(
                        "user {k} cannot confine its interference at receiver {prev}: needs M >= N_prev + d = {}",
                        channels.get(prev, prev).nrows() + context.streams
                    )));
                }
                basis
            }
            _ => context.basis(k)?.clone(),
        };
        let cov = interference_plus_noise(channels, &all, k, 0..all.len(), snr);
        all[k] = best_in_subspace(channels.get(k, k), &basis, &cov, context.streams)?.f;
        previous = Some(k);
    }
    Ok(all.split_off(n_active))
}

/// Output of successive IA.
#[derive(Debug, Clone)]
pub struct SuccessiveIa<T: Real> {
    /// Physical precoders `V_k F_eff,k`, one per secondary user.
    pub precoders: Vec<CMat<T>>,
    /// `(N_s - sum d_a) x N_s` filters that cancel active interference at
    /// each secondary receiver.
    pub cancel_filters: Vec<CMat<T>>,
    /// IA solution of the effective secondary network.
    pub inner: IaSolution<T>,
}

impl<T: Real> SuccessiveIa<T> {
    /// Full receive filter of secondary user `j`: inner IA subspace after the
    /// cancelling filter, `d_s x N_s`.
    pub fn receive_filter(&self, j: usize) -> CMat<T> {
        self.inner.receive_bases[j].adjoint() * &self.cancel_filters[j]
    }
}

/// Checks the successive-IA dimension bound `K_s <= 2 M_eff / d_s - 1`.
pub fn successive_ia_feasible(
    secondary_users: usize,
    effective_dim: usize,
    streams: usize,
) -> Result<()> {
    if streams == 0 || effective_dim < streams {
        return Err(Error::SuccessiveIaInfeasible(format!(
            "effective dimension {effective_dim} cannot host {streams} streams"
        )));
    }
    if secondary_users > 1 && streams * (secondary_users + 1) > 2 * effective_dim {
        return Err(Error::SuccessiveIaInfeasible(format!(
            "K_s = {secondary_users} exceeds 2 M_eff / d_s - 1 = {} (M_eff = {effective_dim}, d_s = {streams})",
            (2 * effective_dim / streams).saturating_sub(1)
        )));
    }
    Ok(())
}

/// Secondary users pre-align into the active receivers' interference
/// subspaces, cancel active interference at their own receivers and run IA
/// among themselves on the resulting effective channels.
pub fn successive_ia<T: Real>(
    context: &AdmissionContext<T>,
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    options: &IaOptions<T>,
    seed: u64,
) -> Result<SuccessiveIa<T>> {
    let users: Vec<usize> = context.users().collect();
    let active_streams = state.total_streams();
    let mut bases = Vec::with_capacity(users.len());
    let mut filters = Vec::with_capacity(users.len());
    let mut effective_dim = None;
    for &k in &users {
        let h = channels.get(k, k);
        if h.nrows() != h.ncols() {
            return Err(Error::SuccessiveIaInfeasible(format!(
                "user {k} has {} transmit and {} receive antennas; successive IA needs M_s = N_s",
                h.ncols(),
                h.nrows()
            )));
        }
        let dim = h.ncols().saturating_sub(active_streams);
        if *effective_dim.get_or_insert(dim) != dim {
            return Err(Error::SuccessiveIaInfeasible(
                "secondary users differ in antenna count".into(),
            ));
        }
        let basis = context.basis(k).map_err(|_| {
            Error::SuccessiveIaInfeasible(format!("user {k} is below the zero-impact threshold"))
        })?;
        // left null space of the horizontally stacked active interference
        let blocks: Vec<CMat<T>> = state
            .links
            .iter()
            .enumerate()
            .map(|(i, l)| channels.get(k, i) * &l.f)
            .collect();
        let refs: Vec<&CMat<T>> = blocks.iter().collect();
        let interference = linalg::hstack(&refs, h.nrows());
        let cancel = linalg::orthogonal_complement(&interference).adjoint();
        if cancel.nrows() != dim || basis.ncols() != dim {
            return Err(Error::DegenerateChannel {
                user: k,
                what: "active interference does not have full rank at the secondary user",
            });
        }
        bases.push(basis.clone());
        filters.push(cancel);
    }
    let dim = effective_dim.unwrap_or(0);
    successive_ia_feasible(users.len(), dim, context.streams)?;

    let mut effective = Vec::with_capacity(users.len() * users.len());
    for (a, &k) in users.iter().enumerate() {
        for (b, &i) in users.iter().enumerate() {
            effective.push(&filters[a] * channels.get(k, i) * &bases[b]);
        }
    }
    let effective = ChannelSet::from_matrices(users.len(), effective)?;
    let inner = solve_ia(
        &effective,
        &vec![context.streams; users.len()],
        options,
        seed,
    )?;
    let precoders = bases
        .iter()
        .zip(&inner.precoders)
        .map(|(v, f)| v * f)
        .collect();
    Ok(SuccessiveIa {
        precoders,
        cancel_filters: filters,
        inner,
    })
}

/// Precoders of every secondary user under `strategy`, in context order.
///
/// Only the zero-impact strategies and `selfish` are handled here; users
/// below the threshold need the constrained designs.
pub fn design<T: Real>(
    strategy: &PrecoderStrategy,
    context: &AdmissionContext<T>,
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    snr: T,
    ia_options: &IaOptions<T>,
) -> Result<Vec<CMat<T>>> {
    let users: Vec<usize> = context.users().collect();
    match strategy {
        PrecoderStrategy::OptimalSingle => {
            if users.len() != 1 {
                return Err(Error::Config(format!(
                    "optimal_single needs exactly one secondary user, got {}",
                    users.len()
                )));
            }
            Ok(vec![optimal_single(
                context, channels, state, snr, users[0],
            )?])
        }
        PrecoderStrategy::RandomOrthonormal { seed } => users
            .iter()
            .map(|&k| random_orthonormal(context, k, crate::channel::derive_seed(*seed, k as u64)))
            .collect(),
        PrecoderStrategy::Selfish => users
            .iter()
            .map(|&k| selfish(channels, state, snr, k, context.streams))
            .collect(),
        PrecoderStrategy::SelfOptimizing => self_optimizing(context, channels, state, snr),
        PrecoderStrategy::IterativeSelfOptimizing { order, confine } => {
            iterative_self_optimizing(context, channels, state, snr, order.as_deref(), *confine)
        }
        PrecoderStrategy::SuccessiveIa { seed } => {
            Ok(successive_ia(context, channels, state, ia_options, *seed)?.precoders)
        }
    }
}

/// `max_{i active, k secondary} ||W_i H_ik F_k||_F`.
pub fn max_active_leakage<T: Real>(
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    secondary: &[CMat<T>],
) -> T {
    let n_active = state.len();
    let mut worst = T::zero();
    for (i, link) in state.links.iter().enumerate() {
        for (j, f) in secondary.iter().enumerate() {
            if f.ncols() > 0 {
                worst = worst.max(linalg::frobenius(
                    &(&link.w * channels.get(i, n_active + j) * f),
                ));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_network, LinkDims, NetworkConfig};
    use crate::ia::align_active_network;
    use crate::linalg::{frobenius, orthonormality_defect};
    use crate::rates::{
        active_sum_rate, active_sum_rate_with_secondary, link_rate, secondary_sum_rate,
    };

    struct Fixture {
        ch: ChannelSet<f64>,
        st: ActiveLinkState<f64>,
        ctx: AdmissionContext<f64>,
    }

    fn fixture(users: usize, dims: LinkDims, seed: u64) -> Fixture {
        let cfg = NetworkConfig::three_user_2x2()
            .with_secondary(users, dims)
            .with_seed(seed);
        let ch = generate_network::<f64>(&cfg).unwrap();
        let st = align_active_network(&ch, &[1, 1, 1], &IaOptions::default(), seed).unwrap();
        let ctx = AdmissionContext::new(&ch, &st, dims.streams);
        Fixture { ch, st, ctx }
    }

    fn single_rate(fx: &Fixture, f: &CMat<f64>, snr: f64) -> f64 {
        let mut all = fx.st.precoders();
        all.push(f.clone());
        secondary_sum_rate(&fx.ch, &all, 3, snr).unwrap()
    }

    #[test]
    fn eigen_gains_predict_the_rate() {
        for (seed, d) in [(1, 1), (2, 2), (3, 1)] {
            let fx = fixture(1, LinkDims::new(5, 5, d), seed);
            let snr = 100.0;
            let cov = active_covariance(&fx.ch, &fx.st, 3, snr);
            let sel = best_in_subspace(fx.ch.get(3, 3), fx.ctx.basis(3).unwrap(), &cov, d).unwrap();
            let direct = link_rate(fx.ch.get(3, 3), &sel.f, &cov, snr);
            assert!((direct - predicted_rate(&sel.gains, snr)).abs() < 1e-9);
            assert!(sel.gains.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn optimal_single_beats_random_candidates() {
        let fx = fixture(1, LinkDims::new(5, 5, 1), 4);
        let snr = 31.6;
        let best = single_rate(
            &fx,
            &optimal_single(&fx.ctx, &fx.ch, &fx.st, snr, 3).unwrap(),
            snr,
        );
        for s in 0..1000 {
            let f = random_orthonormal(&fx.ctx, 3, s).unwrap();
            assert!(single_rate(&fx, &f, snr) <= best + 1e-9);
        }
    }

    #[test]
    fn full_null_space_rate_is_unitary_invariant() {
        let fx = fixture(1, LinkDims::new(5, 5, 2), 5);
        let snr = 10.0;
        let opt = single_rate(
            &fx,
            &optimal_single(&fx.ctx, &fx.ch, &fx.st, snr, 3).unwrap(),
            snr,
        );
        let rnd = single_rate(&fx, &random_orthonormal(&fx.ctx, 3, 77).unwrap(), snr);
        assert!((opt - rnd).abs() < 1e-9);
    }

    #[test]
    fn random_orthonormal_is_zero_impact_and_seeded() {
        let fx = fixture(1, LinkDims::new(5, 5, 1), 6);
        let a = random_orthonormal(&fx.ctx, 3, 1).unwrap();
        let b = random_orthonormal(&fx.ctx, 3, 1).unwrap();
        let c = random_orthonormal(&fx.ctx, 3, 2).unwrap();
        assert_eq!(a, b);
        assert!(frobenius(&(&a - &c)) > 1e-3);
        assert!(orthonormality_defect(&a) < 1e-10);
        assert!(frobenius(&(&fx.ctx.entries[0].stacked * &a)) < 1e-9);
        assert!(max_active_leakage(&fx.ch, &fx.st, &[a]) < 1e-8);
    }

    #[test]
    fn zero_impact_strategies_keep_active_rate() {
        let fx = fixture(1, LinkDims::new(5, 5, 2), 7);
        let snr = 1000.0;
        let baseline = active_sum_rate(&fx.st, snr).unwrap();
        for strategy in [
            PrecoderStrategy::OptimalSingle,
            PrecoderStrategy::RandomOrthonormal { seed: 3 },
            PrecoderStrategy::SelfOptimizing,
            PrecoderStrategy::IterativeSelfOptimizing {
                order: None,
                confine: false,
            },
        ] {
            let f = design(
                &strategy,
                &fx.ctx,
                &fx.ch,
                &fx.st,
                snr,
                &IaOptions::default(),
            )
            .unwrap();
            assert!(
                max_active_leakage(&fx.ch, &fx.st, &f) < 1e-8,
                "{}",
                strategy.tag()
            );
            let with = active_sum_rate_with_secondary(&fx.st, &fx.ch, &f, snr).unwrap();
            assert!((with - baseline).abs() < 1e-9, "{}", strategy.tag());
        }
    }

    #[test]
    fn selfish_without_active_users_is_dominant_singular_direction() {
        let cfg = NetworkConfig {
            active_users: 0,
            ..NetworkConfig::three_user_2x2()
        }
        .with_secondary(1, LinkDims::new(4, 3, 1))
        .with_seed(8);
        let ch = generate_network::<f64>(&cfg).unwrap();
        let st = ActiveLinkState::build(&ch, Vec::new(), 0.0, 0).unwrap();
        let f = selfish(&ch, &st, 10.0, 0, 1).unwrap();
        let d = linalg::svd(&ch.get(0, 0).adjoint());
        // the dominant right singular vector of H is the dominant left one of H^*
        let v = d.u.column(0);
        assert!((v.dotc(&f.column(0)).norm() - 1.0).abs() < 1e-10);

        let cov = linalg::identity::<f64>(3);
        let best = link_rate(ch.get(0, 0), &f, &cov, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let g = linalg::haar_orthonormal::<f64, _>(4, 1, &mut rng);
            assert!(link_rate(ch.get(0, 0), &g, &cov, 10.0) <= best + 1e-9);
        }
    }

    #[test]
    fn selfish_interferes_with_active_users() {
        let fx = fixture(1, LinkDims::new(5, 5, 1), 9);
        let f = selfish(&fx.ch, &fx.st, 100.0, 3, 1).unwrap();
        assert!(max_active_leakage(&fx.ch, &fx.st, &[f]) > 1e-3);
    }

    #[test]
    fn corollary_designs_coincide_for_one_user() {
        let fx = fixture(1, LinkDims::new(5, 5, 1), 10);
        let snr = 50.0;
        let a = optimal_single(&fx.ctx, &fx.ch, &fx.st, snr, 3).unwrap();
        let b = self_optimizing(&fx.ctx, &fx.ch, &fx.st, snr).unwrap();
        let c = iterative_self_optimizing(&fx.ctx, &fx.ch, &fx.st, snr, None, false).unwrap();
        assert_eq!(a, b[0]);
        assert_eq!(a, c[0]);
    }

    #[test]
    fn self_optimizing_ignores_other_secondary_channels() {
        let fx = fixture(2, LinkDims::new(6, 6, 1), 11);
        let snr = 100.0;
        let before = self_optimizing(&fx.ctx, &fx.ch, &fx.st, snr).unwrap();
        let mut ch = fx.ch.clone();
        *ch.get_mut(3, 4) *= num_complex::Complex::new(0.0, 3.0);
        *ch.get_mut(4, 4) *= num_complex::Complex::new(2.0, 0.0);
        let ctx = AdmissionContext::new(&ch, &fx.st, 1);
        let after = self_optimizing(&ctx, &ch, &fx.st, snr).unwrap();
        assert!(frobenius(&(&before[0] - &after[0])) < 1e-12);
    }

    #[test]
    fn iterative_second_user_reacts_to_first() {
        let fx = fixture(2, LinkDims::new(6, 6, 1), 12);
        let snr = 100.0;
        let forward = iterative_self_optimizing(&fx.ctx, &fx.ch, &fx.st, snr, None, false).unwrap();
        let independent = self_optimizing(&fx.ctx, &fx.ch, &fx.st, snr).unwrap();
        assert_eq!(forward[0], independent[0]);
        assert!(
            frobenius(
                &(&forward[1] * forward[1].adjoint() - &independent[1] * independent[1].adjoint())
            ) > 1e-6
        );
        let reversed =
            iterative_self_optimizing(&fx.ctx, &fx.ch, &fx.st, snr, Some(&[4, 3]), false).unwrap();
        assert_eq!(reversed[1], independent[1]);
        assert!(
            iterative_self_optimizing(&fx.ctx, &fx.ch, &fx.st, snr, Some(&[3, 3]), false).is_err()
        );
    }

    #[test]
    fn confinement_hides_in_previous_interference() {
        let fx = fixture(2, LinkDims::new(7, 6, 1), 13);
        let f = iterative_self_optimizing(&fx.ctx, &fx.ch, &fx.st, 100.0, None, true).unwrap();
        let occupied = existing_interference(&fx.ch, &fx.st, 3);
        let outside = linalg::identity::<f64>(6) - &occupied * occupied.adjoint();
        assert!(frobenius(&(outside * fx.ch.get(3, 4) * &f[1])) < 1e-9);
        assert!(max_active_leakage(&fx.ch, &fx.st, &f) < 1e-8);

        let fx = fixture(2, LinkDims::new(6, 6, 1), 13);
        let err =
            iterative_self_optimizing(&fx.ctx, &fx.ch, &fx.st, 100.0, None, true).unwrap_err();
        assert!(err.to_string().contains("N_prev + d = 7"));
    }

    #[test]
    fn successive_ia_aligns_everything() {
        let fx = fixture(3, LinkDims::new(5, 5, 1), 14);
        let out = successive_ia(&fx.ctx, &fx.ch, &fx.st, &IaOptions::default(), 1).unwrap();
        assert_eq!(out.cancel_filters[0].shape(), (2, 5));
        assert_eq!(out.precoders[0].shape(), (5, 1));
        assert!(max_active_leakage(&fx.ch, &fx.st, &out.precoders) < 1e-8);
        let mut all = fx.st.precoders();
        all.extend(out.precoders.iter().cloned());
        for j in 0..3 {
            let u = out.receive_filter(j);
            assert!(orthonormality_defect(&u.adjoint()) < 1e-10);
            for (i, f) in all.iter().enumerate() {
                let g = &u * fx.ch.get(3 + j, i) * f;
                if i == 3 + j {
                    assert!(frobenius(&g) > 1e-6);
                } else {
                    assert!(frobenius(&g) < 1e-6, "receiver {j} transmitter {i}");
                }
            }
        }
    }

    #[test]
    fn successive_ia_refuses_too_many_users() {
        assert!(successive_ia_feasible(3, 2, 1).is_ok());
        let err = successive_ia_feasible(4, 2, 1).unwrap_err();
        assert!(err.to_string().contains("2 M_eff / d_s - 1 = 3"));
        let fx = fixture(4, LinkDims::new(5, 5, 1), 15);
        assert!(matches!(
            successive_ia(&fx.ctx, &fx.ch, &fx.st, &IaOptions::default(), 1),
            Err(Error::SuccessiveIaInfeasible(_))
        ));
        let fx = fixture(1, LinkDims::new(6, 5, 1), 15);
        assert!(matches!(
            successive_ia(&fx.ctx, &fx.ch, &fx.st, &IaOptions::default(), 1),
            Err(Error::SuccessiveIaInfeasible(_))
        ));
    }

    #[test]
    fn below_threshold_is_refused() {
        let fx = fixture(1, LinkDims::new(3, 3, 1), 16);
        assert!(matches!(
            optimal_single(&fx.ctx, &fx.ch, &fx.st, 10.0, 3),
            Err(Error::BelowThreshold { .. })
        ));
        assert!(selfish(&fx.ch, &fx.st, 10.0, 3, 1).is_ok());
    }
}
