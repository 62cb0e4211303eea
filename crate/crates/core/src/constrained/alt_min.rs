//! Alternating-minimization starting point for a single secondary user.
//!
//! At high SINR the active sum rate is maximized when every block of
//! `I (x) F` lies in the null space of `W^* S^{-1} W`, where `W` stacks the
//! rows `sqrt(d_i) [W_i H_is]_n` block-diagonally and `S` holds `d_i [Q_i]_nn`.
//! With `U` an orthonormal basis of that null space we solve
//! `min ||I (x) F - U A||_F^2` over orthonormal `F` and `A` by alternating
//! two Procrustes problems.

use crate::channel::ChannelSet;
use crate::constrained::objective::{ActiveRateObjective, Objective};
use crate::constrained::procrustes::solve_procrustes;
use crate::error::{Error, Result};
use crate::ia::ActiveLinkState;
use crate::linalg;
use crate::scalar::{real, Real};
use crate::CMat;

#[derive(Debug, Clone, Copy)]
pub struct AltMinOptions<T: Real> {
    /// Stop once `||F_new - F_old||_F` drops below this.
    pub tol: T,
    pub max_iters: usize,
    /// Eigenvalues below `null_cutoff * lambda_max` count as zero.
    pub null_cutoff: T,
}

impl<T: Real> Default for AltMinOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-6),
            max_iters: 5000,
            null_cutoff: T::lit(1e-9),
        }
    }
}

/// The fixed data and current iterate of the alternation.
#[derive(Debug, Clone)]
pub struct AltMinState<T: Real> {
    /// `d~ x d~ M_s` block-diagonal stack of `sqrt(d_i) e_n W_i H_is`.
    pub w_stack: CMat<T>,
    /// `d~ x d~` diagonal of `d_i [Q_i]_nn`.
    pub s: CMat<T>,
    /// Orthonormal null-space basis of `W^* S^{-1} W`, `d~ M_s x (M_s - 1) d~`
    /// in the generic case.
    pub null_basis: CMat<T>,
    /// Combining matrix with orthonormal columns.
    pub a: CMat<T>,
    pub f: CMat<T>,
    /// `||I (x) F - U A||_F^2`.
    pub residual: T,
    pub streams: usize,
}

impl<T: Real> AltMinState<T> {
    /// Sets up the alternation for secondary user `user` starting from `f`.
    pub fn new(
        channels: &ChannelSet<T>,
        state: &ActiveLinkState<T>,
        user: usize,
        f: CMat<T>,
        null_cutoff: T,
    ) -> Result<Self> {
        let m = channels.get(user, user).ncols();
        let streams = f.ncols();
        let blocks: usize = state.total_streams();
        if blocks == 0 {
            return Err(Error::Input(
                "alternating minimization needs active streams".into(),
            ));
        }
        let mut w_stack = linalg::zeros::<T>(blocks, blocks * m);
        let mut s = linalg::zeros::<T>(blocks, blocks);
        let mut q = 0;
        for (i, link) in state.links.iter().enumerate() {
            let d = link.streams();
            let wh = &link.w * channels.get(i, user) * real(T::lit(d as f64).sqrt());
            for n in 0..d {
                w_stack
                    .view_mut((q, q * m), (1, m))
                    .copy_from(&wh.rows(n, 1));
                let noise = link.q[(n, n)].re;
                if !(noise.is_finite() && noise > T::zero()) {
                    return Err(Error::DegenerateAlignment { user: i });
                }
                s[(q, q)] = real(T::lit(d as f64) * noise);
                q += 1;
            }
        }
        let s_inv = s.map(|z| {
            if z.re > T::zero() {
                real(T::one() / z.re)
            } else {
                z
            }
        });
        let gram = w_stack.adjoint() * s_inv * &w_stack;
        let eig = linalg::hermitian_eigen(&gram);
        let lmax = eig.values.first().copied().unwrap_or_else(T::zero);
        let nonzero = eig
            .values
            .iter()
            .filter(|&&l| l >= null_cutoff * lmax)
            .count();
        let null_basis = eig
            .vectors
            .columns(nonzero, gram.nrows() - nonzero)
            .into_owned();
        if null_basis.ncols() < streams * blocks {
            return Err(Error::Config(format!(
                "null space of dimension {} cannot host {} combining columns",
                null_basis.ncols(),
                streams * blocks
            )));
        }
        let mut st = Self {
            w_stack,
            s,
            null_basis,
            a: linalg::zeros(0, 0),
            f,
            residual: T::zero(),
            streams,
        };
        st.a_step();
        st.residual = st.residual_of(&st.f);
        Ok(st)
    }

    fn blocks(&self) -> usize {
        self.w_stack.nrows()
    }

    fn m(&self) -> usize {
        self.f.nrows()
    }

    /// `I_{d~} (x) F`.
    pub fn kron_identity(&self, f: &CMat<T>) -> CMat<T> {
        let (m, d, b) = (self.m(), self.streams, self.blocks());
        let mut out = linalg::zeros::<T>(b * m, b * d);
        for k in 0..b {
            out.view_mut((k * m, k * d), (m, d)).copy_from(f);
        }
        out
    }

    fn residual_of(&self, f: &CMat<T>) -> T {
        linalg::frobenius_sq(&(self.kron_identity(f) - &self.null_basis * &self.a))
    }

    /// `A = argmax Re tr(A^* U^* (I (x) F))`.
    pub fn a_step(&mut self) {
        let target = self.null_basis.adjoint() * self.kron_identity(&self.f);
        self.a = solve_procrustes(&target).0;
    }

    /// `F = argmax Re tr(F sum_k A_k^* U_k^*)`, returns the new precoder.
    pub fn f_step(&self) -> CMat<T> {
        let (m, d) = (self.m(), self.streams);
        let mut sum = linalg::zeros::<T>(d, m);
        for k in 0..self.blocks() {
            let u_k = self.null_basis.rows(k * m, m);
            let a_k = self.a.columns(k * d, d);
            sum += a_k.adjoint() * u_k.adjoint();
        }
        solve_procrustes(&sum.adjoint()).0
    }

    /// Diagonal blocks of `U A`, each projected to the nearest orthonormal
    /// matrix.
    pub fn block_candidates(&self) -> Vec<CMat<T>> {
        let (m, d) = (self.m(), self.streams);
        let ua = &self.null_basis * &self.a;
        (0..self.blocks())
            .map(|l| linalg::polar_factor(&ua.view((l * m, l * d), (m, d)).into_owned()))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct AltMinOutcome<T: Real> {
    /// Best block candidate under the active sum rate.
    pub f: CMat<T>,
    pub value: T,
    pub state: AltMinState<T>,
    /// Residual after every completed iteration; entry 0 is the start.
    pub residuals: Vec<T>,
    /// `||F_new - F_old||_F` per iteration.
    pub deltas: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Runs the alternation from `init` and returns the best diagonal-block
/// candidate for secondary user `user` at `snr`.
pub fn alt_min_init<T: Real>(
    channels: &ChannelSet<T>,
    state: &ActiveLinkState<T>,
    user: usize,
    init: &CMat<T>,
    snr: T,
    options: &AltMinOptions<T>,
) -> Result<AltMinOutcome<T>> {
    let objective = ActiveRateObjective::new(channels, state, user, init.ncols(), snr)?;
    let mut st = AltMinState::new(channels, state, user, init.clone(), options.null_cutoff)?;
    let mut residuals = vec![st.residual];
    let mut deltas = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iters {
        let next = st.f_step();
        let delta = linalg::frobenius(&(&next - &st.f));
        st.f = next;
        st.a_step();
        st.residual = st.residual_of(&st.f);
        iterations += 1;
        residuals.push(st.residual);
        deltas.push(delta);
        if delta < options.tol {
            converged = true;
            break;
        }
    }
    let (f, value) = st
        .block_candidates()
        .into_iter()
        .map(|c| {
            let v = objective.value(&c);
            (c, v)
        })
        .fold(None, |best: Option<(CMat<T>, T)>, (c, v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((c, v)),
        })
        .expect("at least one active stream");
    Ok(AltMinOutcome {
        f,
        value,
        state: st,
        residuals,
        deltas,
        iterations,
        converged,
    })
}
