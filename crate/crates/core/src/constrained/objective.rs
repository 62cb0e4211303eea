//! Active-user sum rate as a function of one secondary precoder.

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::ia::ActiveLinkState;
use crate::linalg;
use crate::scalar::{real, Real};
use crate::CMat;

/// Anything the Grassmann search can maximize.
pub trait Objective<T: Real> {
    fn value(&self, f: &CMat<T>) -> T;

    /// Value and Euclidean gradient `dJ/dRe F + i dJ/dIm F`.
    fn value_and_gradient(&self, f: &CMat<T>) -> (T, CMat<T>);

    /// Objective change from `span(F)` to `span(F + t Z)` for orthonormal
    /// `F` and horizontal `Z` (`F^* Z = 0`). Implementations may evaluate it
    /// in closed form so that tiny steps are not lost in rounding noise.
    fn step_gain(&self, f: &CMat<T>, z: &CMat<T>, t: T) -> T {
        let moved = linalg::polar_factor(&(f + linalg::scale(z, t)));
        self.value(&moved) - self.value(f)
    }
}

/// One active stream as seen by the objective.
#[derive(Debug, Clone)]
struct StreamTerm<T: Real> {
    /// `snr / d_i`.
    gain: T,
    /// `[Q_i]_nn`, the ZF noise enhancement of the stream.
    noise: T,
    /// Row `n` of `W_i H_is`, `1 x M_s`.
    row: CMat<T>,
    /// Stream count `d_i` of the owning active user.
    weight: T,
}

/// `R_au(F) = sum_i sum_n log2(1 + (snr/d_i) / ([Q_i]_nn + (snr/d_s) ||[W_i H_is]_n F||^2))`
/// for a single secondary user `s`.
#[derive(Debug, Clone)]
pub struct ActiveRateObjective<T: Real> {
    terms: Vec<StreamTerm<T>>,
    snr: T,
    streams: usize,
    tx: usize,
}

impl<T: Real> ActiveRateObjective<T> {
    /// Objective for secondary user `user` sending `streams` streams.
    pub fn new(
        channels: &ChannelSet<T>,
        state: &ActiveLinkState<T>,
        user: usize,
        streams: usize,
        snr: T,
    ) -> Result<Self> {
        if snr < T::zero() || !snr.is_finite() {
            return Err(Error::Input(format!(
                "snr must be finite and non-negative, got {snr}"
            )));
        }
        let tx = channels.get(user, user).ncols();
        if streams == 0 || streams > tx {
            return Err(Error::Config(format!(
                "{streams} streams from {tx} transmit antennas"
            )));
        }
        let mut terms = Vec::new();
        for (i, link) in state.links.iter().enumerate() {
            let d = link.streams();
            let wh = &link.w * channels.get(i, user);
            for n in 0..d {
                let noise = link.q[(n, n)].re;
                if !(noise.is_finite() && noise > T::zero()) {
                    return Err(Error::DegenerateAlignment { user: i });
                }
                terms.push(StreamTerm {
                    gain: snr / T::lit(d as f64),
                    noise,
                    row: wh.rows(n, 1).into_owned(),
                    weight: T::lit(d as f64),
                });
            }
        }
        Ok(Self {
            terms,
            snr,
            streams,
            tx,
        })
    }

    pub fn transmit_antennas(&self) -> usize {
        self.tx
    }

    pub fn streams(&self) -> usize {
        self.streams
    }

    /// `snr / d_s`.
    fn power(&self) -> T {
        self.snr / T::lit(self.streams as f64)
    }

    /// The high-SINR surrogate that drops the `1` inside every logarithm:
    /// `-log2 det(S / snr + W (I (x) F F^*) W^* / d_s)`, with `W` the
    /// block-diagonal stack of `sqrt(d_i) [W_i H_is]_n` and `S` the diagonal
    /// of `d_i [Q_i]_nn`.
    pub fn high_snr_surrogate(&self, f: &CMat<T>) -> T {
        let n = self.terms.len();
        let mut m = linalg::zeros::<T>(n, n);
        let inv_d = T::one() / T::lit(self.streams as f64);
        for (q, t) in self.terms.iter().enumerate() {
            let wf = &t.row * f * real(t.weight.sqrt());
            m[(q, q)] = real(t.weight * t.noise / self.snr + linalg::frobenius_sq(&wf) * inv_d);
        }
        -linalg::ln_det_hpd(&m) / T::ln_2()
    }
}

impl<T: Real> Objective<T> for ActiveRateObjective<T> {
    fn value(&self, f: &CMat<T>) -> T {
        let alpha = self.power();
        self.terms
            .iter()
            .map(|t| {
                let denom = t.noise + alpha * linalg::frobenius_sq(&(&t.row * f));
                (T::one() + t.gain / denom).ln() / T::ln_2()
            })
            .fold(T::zero(), |a, b| a + b)
    }

    fn value_and_gradient(&self, f: &CMat<T>) -> (T, CMat<T>) {
        let alpha = self.power();
        let two = T::lit(2.0);
        let mut value = T::zero();
        let mut grad = linalg::zeros::<T>(f.nrows(), f.ncols());
        for t in &self.terms {
            let bf = &t.row * f;
            let denom = t.noise + alpha * linalg::frobenius_sq(&bf);
            value += (T::one() + t.gain / denom).ln() / T::ln_2();
            // d/dD log2(1 + c/D) = -c / (ln2 D (D + c)); d||bF||^2 = 2 b^* b F
            let slope = -t.gain / (T::ln_2() * denom * (denom + t.gain));
            grad += t.row.adjoint() * bf * real(slope * alpha * two);
        }
        (value, grad)
    }

    fn step_gain(&self, f: &CMat<T>, z: &CMat<T>, t: T) -> T {
        let alpha = self.power();
        let t2 = real(t * t);
        let zz = z.adjoint() * z;
        // (X^* X)^{-1} = (I + t^2 Z^* Z)^{-1} for X = F + t Z
        let k = linalg::identity::<T>(zz.nrows()) + &zz * t2;
        let k_inv = linalg::checked_inverse(&k).unwrap_or_else(|| linalg::identity(zz.nrows()));
        let shrink = &zz * &k_inv * t2;
        self.terms
            .iter()
            .map(|term| {
                let a = &term.row * f;
                let c = &term.row * z;
                let old = term.noise + alpha * linalg::frobenius_sq(&a);
                let moved = &a + &c * real(t);
                // |bX K^-1 X^* b^*| - |bF|^2 expanded so that no two large terms cancel
                let linear = linalg::real_trace(&(&c * a.adjoint())) * T::lit(2.0) * t;
                let quadratic = linalg::frobenius_sq(&c) * t * t;
                let correction = linalg::real_trace(&(&moved * &shrink * moved.adjoint()));
                let change = alpha * (linear + quadratic - correction);
                // log(1 + c/D') - log(1 + c/D) = ln(1 + dD/(D + c)) - ln(1 + dD/D)
                (ln_1p(change / (old + term.gain)) - ln_1p(change / old)) / T::ln_2()
            })
            .fold(T::zero(), |a, b| a + b)
    }
}

/// `ln(1 + x)`, accurate for small `|x|`.
fn ln_1p<T: Real>(x: T) -> T {
    let u = T::one() + x;
    if u == T::one() {
        x
    } else {
        u.ln() * x / (u - T::one())
    }
}
