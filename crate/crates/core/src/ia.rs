//! Interference alignment for the active network.
//!
//! The IA network is always users `0..n` of the supplied [`ChannelSet`],
//! where `n` is the number of precoders (or stream counts) passed in. This
//! lets the same routines run on the physical active network and on the
//! effective channels built by successive IA.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{self, frobenius_sq};
use crate::scalar::Real;
use crate::CMat;

/// Stopping rules of the minimum-leakage iteration.
#[derive(Debug, Clone, Copy)]
pub struct IaOptions<T: Real> {
    pub max_iters: usize,
    /// Declare convergence once the total leakage drops below this.
    pub leakage_tol: T,
    /// Stop when one iteration improves the leakage by less than
    /// `stall_tol * leakage`; the run then fails unless `leakage <= accept_tol`.
    pub stall_tol: T,
    pub accept_tol: T,
}

impl<T: Real> Default for IaOptions<T> {
    fn default() -> Self {
        // The leakage floor sits near eps^2 times the channel energy.
        let eps = T::EPSILON;
        Self {
            max_iters: 5000,
            leakage_tol: T::lit((eps * 1e4).powi(2)),
            stall_tol: T::lit((10.0 * eps).max(1e-9)),
            accept_tol: T::lit((eps * 1e5).powi(2)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct IaSolution<T: Real> {
    pub precoders: Vec<CMat<T>>,
    /// Orthonormal bases of the interference-free receive subspaces.
    pub receive_bases: Vec<CMat<T>>,
    pub leakage: T,
    pub iterations: usize,
}

fn interference_covariance<T: Real>(
    channels: &ChannelSet<T>,
    precoders: &[CMat<T>],
    rx: usize,
) -> CMat<T> {
    let n_rx = channels.get(rx, rx).nrows();
    let mut q = linalg::zeros::<T>(n_rx, n_rx);
    for (k, f) in precoders.iter().enumerate() {
        if k != rx {
            let hf = channels.get(rx, k) * f;
            q += &hf * hf.adjoint();
        }
    }
    q
}

fn receive_subspaces<T: Real>(channels: &ChannelSet<T>, precoders: &[CMat<T>]) -> Vec<CMat<T>> {
    (0..precoders.len())
        .map(|i| {
            let q = interference_covariance(channels, precoders, i);
            linalg::least_eigenvectors(&q, precoders[i].ncols()).0
        })
        .collect()
}

/// `sum_i sum_{k != i} ||U_i^* H_ik F_k||_F^2`.
pub fn total_leakage<T: Real>(
    channels: &ChannelSet<T>,
    precoders: &[CMat<T>],
    receive: &[CMat<T>],
) -> T {
    let mut total = T::zero();
    for (i, u) in receive.iter().enumerate() {
        for (k, f) in precoders.iter().enumerate() {
            if k != i {
                total += frobenius_sq(&(u.adjoint() * channels.get(i, k) * f));
            }
        }
    }
    total
}

/// Minimum-leakage alternating IA over users `0..streams.len()`.
///
/// Receive subspaces are the least-interfered eigen-directions of each
/// receiver's interference covariance; transmit precoders are the
/// least-leaking eigen-directions of the reciprocal network. Initial
/// precoders are Haar random from `seed`.
pub fn solve_ia<T: Real>(
    channels: &ChannelSet<T>,
    streams: &[usize],
    options: &IaOptions<T>,
    seed: u64,
) -> Result<IaSolution<T>> {
    let n = streams.len();
    if n > channels.users() {
        return Err(Error::Input(format!(
            "{n} IA users requested from a {}-user channel set",
            channels.users()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut precoders: Vec<CMat<T>> = (0..n)
        .map(|k| {
            let m = channels.get(k, k).ncols();
            if streams[k] > m.min(channels.get(k, k).nrows()) {
                return Err(Error::Config(format!(
                    "user {k}: {} streams exceed min(M, N) = {}",
                    streams[k],
                    m.min(channels.get(k, k).nrows())
                )));
            }
            Ok(linalg::haar_orthonormal::<T, _>(m, streams[k], &mut rng))
        })
        .collect::<Result<_>>()?;

    let mut receive = receive_subspaces(channels, &precoders);
    let mut leakage = total_leakage(channels, &precoders, &receive);
    let mut iterations = 0;
    while leakage > options.leakage_tol {
        if iterations == options.max_iters {
            return Err(Error::NotConverged {
                iterations,
                leakage: leakage.to_f64_lossy(),
            });
        }
        iterations += 1;
        for k in 0..n {
            let m = channels.get(k, k).ncols();
            let mut q = linalg::zeros::<T>(m, m);
            for (i, u) in receive.iter().enumerate() {
                if i != k {
                    let uh = u.adjoint() * channels.get(i, k);
                    q += uh.adjoint() * uh;
                }
            }
            precoders[k] = linalg::least_eigenvectors(&q, streams[k]).0;
        }
        receive = receive_subspaces(channels, &precoders);
        let next = total_leakage(channels, &precoders, &receive);
        let improvement = leakage - next;
        leakage = next;
        if improvement < options.stall_tol * leakage {
            if leakage <= options.accept_tol {
                break;
            }
            return Err(Error::NotConverged {
                iterations,
                leakage: leakage.to_f64_lossy(),
            });
        }
    }
    Ok(IaSolution {
        precoders,
        receive_bases: receive,
        leakage,
        iterations,
    })
}

/// Relative singular-value level above which interference counts as
/// occupying a dimension when checking alignment: `1e-6` in double
/// precision, `1e5 * eps` when that is coarser.
pub fn alignment_tol<T: Real>() -> T {
    T::lit((1e5 * T::EPSILON).max(1e-6))
}

/// Orthonormal `N_i x (N_i - d_i)` basis `C_i` of the interference subspace
/// at receiver `i`.
///
/// When the interference occupies fewer than `N_i - d_i` dimensions the
/// basis is padded with directions orthogonal to both the interference and
/// the desired signal `H_ii F_i`.
pub fn interference_basis<T: Real>(
    channels: &ChannelSet<T>,
    precoders: &[CMat<T>],
    i: usize,
) -> Result<CMat<T>> {
    let h_ii = channels.get(i, i);
    let n_rx = h_ii.nrows();
    let d = precoders[i].ncols();
    let target = n_rx - d;
    let blocks: Vec<CMat<T>> = precoders
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(k, f)| channels.get(i, k) * f)
        .collect();
    let refs: Vec<&CMat<T>> = blocks.iter().collect();
    let stacked = linalg::hstack(&refs, n_rx);

    let (aligned, rank) = if stacked.ncols() == 0 {
        (linalg::zeros::<T>(n_rx, 0), 0)
    } else {
        let dec = linalg::svd(&stacked);
        let smax = dec.sigma_max();
        let loose = dec
            .s
            .iter()
            .filter(|&&s| s > alignment_tol::<T>() * smax)
            .count();
        if loose > target {
            return Err(Error::AlignmentViolation {
                user: i,
                rank: loose,
                allowed: target,
            });
        }
        let r = dec.rank().min(target);
        (dec.u.columns(0, r).into_owned(), r)
    };
    if rank == target {
        return Ok(aligned);
    }
    let signal = h_ii * &precoders[i];
    let occupied = linalg::hstack(&[&aligned, &signal], n_rx);
    let complement = linalg::orthogonal_complement(&occupied);
    let pad = target - rank;
    if complement.ncols() < pad {
        return Err(Error::DegenerateChannel {
            user: i,
            what: "signal overlaps the interference subspace",
        });
    }
    Ok(linalg::hstack(
        &[&aligned, &complement.columns(0, pad).into_owned()],
        n_rx,
    ))
}

/// `W = [I_d, 0] [H_ii F_i, C_i]^{-1}`.
pub fn zf_equalizer<T: Real>(h_ii: &CMat<T>, f: &CMat<T>, c: &CMat<T>) -> Result<CMat<T>> {
    let n_rx = h_ii.nrows();
    let d = f.ncols();
    if d + c.ncols() != n_rx {
        return Err(Error::Input(format!(
            "[H F, C] is {n_rx} x {}, not square",
            d + c.ncols()
        )));
    }
    let signal = h_ii * f;
    let x = linalg::hstack(&[&signal, c], n_rx);
    let inv = linalg::checked_inverse(&x).ok_or(Error::DegenerateChannel {
        user: 0,
        what: "[H F, C] is singular",
    })?;
    Ok(inv.rows(0, d).into_owned())
}

/// Receive-side quantities of one aligned link.
#[derive(Debug, Clone)]
pub struct ActiveLink<T: Real> {
    /// `M x d` precoder.
    pub f: CMat<T>,
    /// `N x (N - d)` interference basis.
    pub c: CMat<T>,
    /// `I - C C^*`.
    pub p: CMat<T>,
    /// `d x N` zero-forcing equalizer.
    pub w: CMat<T>,
    /// `(F^* H^* P H F)^{-1}`, the per-stream noise enhancement.
    pub q: CMat<T>,
}

impl<T: Real> ActiveLink<T> {
    pub fn streams(&self) -> usize {
        self.f.ncols()
    }
}

/// Everything the secondary users need to know about the aligned network.
#[derive(Debug, Clone)]
pub struct ActiveLinkState<T: Real> {
    pub links: Vec<ActiveLink<T>>,
    pub leakage: T,
    pub iterations: usize,
}

impl<T: Real> ActiveLinkState<T> {
    /// Builds bases, projections and equalizers for the IA network formed by
    /// users `0..precoders.len()`.
    pub fn build(
        channels: &ChannelSet<T>,
        precoders: Vec<CMat<T>>,
        leakage: T,
        iterations: usize,
    ) -> Result<Self> {
        let mut links = Vec::with_capacity(precoders.len());
        for i in 0..precoders.len() {
            let c = interference_basis(channels, &precoders, i)?;
            let h_ii = channels.get(i, i);
            let n_rx = h_ii.nrows();
            let p = linalg::identity::<T>(n_rx) - &c * c.adjoint();
            let w = zf_equalizer(h_ii, &precoders[i], &c).map_err(|e| match e {
                Error::DegenerateChannel { what, .. } => Error::DegenerateChannel { user: i, what },
                other => other,
            })?;
            let hf = h_ii * &precoders[i];
            let q = linalg::checked_inverse(&(hf.adjoint() * &p * &hf))
                .ok_or(Error::DegenerateAlignment { user: i })?;
            links.push(ActiveLink {
                f: precoders[i].clone(),
                c,
                p,
                w,
                q,
            });
        }
        Ok(Self {
            links,
            leakage,
            iterations,
        })
    }

    pub fn from_solution(channels: &ChannelSet<T>, solution: IaSolution<T>) -> Result<Self> {
        Self::build(
            channels,
            solution.precoders,
            solution.leakage,
            solution.iterations,
        )
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn precoders(&self) -> Vec<CMat<T>> {
        self.links.iter().map(|l| l.f.clone()).collect()
    }

    pub fn streams(&self) -> Vec<usize> {
        self.links.iter().map(|l| l.streams()).collect()
    }

    pub fn total_streams(&self) -> usize {
        self.links.iter().map(|l| l.streams()).sum()
    }

    /// `max_{i != k} ||W_i H_ik F_k||_F` over the aligned network.
    pub fn max_cross_leakage(&self, channels: &ChannelSet<T>) -> T {
        let mut worst = T::zero();
        for (i, li) in self.links.iter().enumerate() {
            for (k, lk) in self.links.iter().enumerate() {
                if i != k {
                    worst = worst.max(linalg::frobenius(&(&li.w * channels.get(i, k) * &lk.f)));
                }
            }
        }
        worst
    }

    /// `min_i sigma_min(W_i H_ii F_i)`.
    pub fn min_signal_singular_value(&self, channels: &ChannelSet<T>) -> T {
        self.links
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let d = linalg::svd(&(&l.w * channels.get(i, i) * &l.f));
                d.s.last().copied().unwrap_or_else(T::zero)
            })
            .fold(T::max_value().unwrap_or_else(T::one), |a, b| a.min(b))
    }
}

/// Solves IA for the first `streams.len()` users and builds the link state.
pub fn align_active_network<T: Real>(
    channels: &ChannelSet<T>,
    streams: &[usize],
    options: &IaOptions<T>,
    seed: u64,
) -> Result<ActiveLinkState<T>> {
    let sol = solve_ia(channels, streams, options, seed)?;
    ActiveLinkState::from_solution(channels, sol)
}
