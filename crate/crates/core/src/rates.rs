//! Achievable sum rates in b/s/Hz. Every transmitter splits its power
//! equally over its streams, so a user sending `d` streams contributes
//! `snr / d` per stream.

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::ia::ActiveLinkState;
use crate::linalg;
use crate::scalar::{real, Real};
use crate::CMat;

fn log2<T: Real>(x: T) -> T {
    x.ln() / T::ln_2()
}

fn check_snr<T: Real>(snr: T) -> Result<()> {
    if snr < T::zero() || !snr.is_finite() {
        return Err(Error::Input(format!(
            "snr must be finite and non-negative, got {snr}"
        )));
    }
    Ok(())
}

/// Sum rate of the aligned active users under ZF reception, no secondary users.
pub fn active_sum_rate<T: Real>(state: &ActiveLinkState<T>, snr: T) -> Result<T> {
    check_snr(snr)?;
    let mut total = T::zero();
    for link in &state.links {
        let per_stream = snr / T::lit(link.streams() as f64);
        for n in 0..link.streams() {
            let denom = link.q[(n, n)].re;
            total += log2(T::one() + per_stream / denom);
        }
    }
    Ok(total)
}

/// Active-user sum rate when the secondary users `n_active..` transmit with
/// `secondary[j]` (user `n_active + j`). The active receivers keep their ZF
/// equalizers and treat secondary interference as noise.
pub fn active_sum_rate_with_secondary<T: Real>(
    state: &ActiveLinkState<T>,
    channels: &ChannelSet<T>,
    secondary: &[CMat<T>],
    snr: T,
) -> Result<T> {
    check_snr(snr)?;
    let n_active = state.len();
    let mut total = T::zero();
    for (i, link) in state.links.iter().enumerate() {
        let d = link.streams();
        let mut denom = link.q.clone();
        for (j, f) in secondary.iter().enumerate() {
            if f.ncols() == 0 {
                continue;
            }
            let b = &link.w * channels.get(i, n_active + j) * f;
            denom += &b * b.adjoint() * real(snr / T::lit(f.ncols() as f64));
        }
        let per_stream = snr / T::lit(d as f64);
        for n in 0..d {
            total += log2(T::one() + per_stream / denom[(n, n)].re);
        }
    }
    Ok(total)
}

/// Interference-plus-noise covariance `I + sum_{i != k} (snr/d_i) H_ki F_i F_i^*`
/// at receiver `k`, over the users listed in `interferers`.
pub fn interference_plus_noise<T: Real>(
    channels: &ChannelSet<T>,
    precoders: &[CMat<T>],
    k: usize,
    interferers: impl IntoIterator<Item = usize>,
    snr: T,
) -> CMat<T> {
    let n_rx = channels.get(k, k).nrows();
    let mut cov = linalg::identity::<T>(n_rx);
    for i in interferers {
        let f = &precoders[i];
        if i == k || f.ncols() == 0 {
            continue;
        }
        let hf = channels.get(k, i) * f;
        cov += &hf * hf.adjoint() * real(snr / T::lit(f.ncols() as f64));
    }
    cov
}

/// `log2 det(I + (snr/d) H F F^* H^* R^{-1})` for one link with interference
/// covariance `r`.
pub fn link_rate<T: Real>(h: &CMat<T>, f: &CMat<T>, r: &CMat<T>, snr: T) -> T {
    if f.ncols() == 0 {
        return T::zero();
    }
    let hf = h * f;
    let signal = &hf * hf.adjoint() * real(snr / T::lit(f.ncols() as f64));
    // det(I + S R^{-1}) = det(R + S) / det(R)
    (linalg::ln_det_hpd(&(r + signal)) - linalg::ln_det_hpd(r)) / T::ln_2()
}

/// Sum rate of the secondary users `n_active..K`, each seeing interference
/// from every other transmitter. `precoders` covers all `K` users.
pub fn secondary_sum_rate<T: Real>(
    channels: &ChannelSet<T>,
    precoders: &[CMat<T>],
    n_active: usize,
    snr: T,
) -> Result<T> {
    check_snr(snr)?;
    if precoders.len() != channels.users() {
        return Err(Error::Input(format!(
            "{} precoders for {} users",
            precoders.len(),
            channels.users()
        )));
    }
    let users = precoders.len();
    let mut total = T::zero();
    for k in n_active..users {
        let r = interference_plus_noise(channels, precoders, k, 0..users, snr);
        total += link_rate(channels.get(k, k), &precoders[k], &r, snr);
    }
    Ok(total)
}
