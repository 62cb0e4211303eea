//! Network configuration and the i.i.d. Rayleigh block-fading channel.
//!
//! Users are indexed `0..K` with the `K_a` active pairs first and the
//! `K_s` secondary pairs after them. `H[(i, k)]` is the `N_i x M_k` channel
//! from transmitter `k` to receiver `i`.
//!
//! Randomness comes from ChaCha8 seeded with the configuration seed. Trial
//! `t` of a Monte Carlo sweep uses `derive_seed(seed, t)`, so every trial is
//! reproducible on its own regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::CMat;

/// Antenna and stream counts of one transmitter/receiver pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkDims {
    pub tx: usize,
    pub rx: usize,
    pub streams: usize,
}

impl LinkDims {
    pub const fn new(tx: usize, rx: usize, streams: usize) -> Self {
        Self { tx, rx, streams }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub active_users: usize,
    pub secondary_users: usize,
    pub active: LinkDims,
    pub secondary: LinkDims,
    /// Per-user transmit SNR `P / sigma^2` in dB.
    pub snr_db: f64,
    pub seed: u64,
}

impl NetworkConfig {
    /// The reference network: three active 2x2 single-stream pairs.
    pub fn three_user_2x2() -> Self {
        Self {
            active_users: 3,
            secondary_users: 0,
            active: LinkDims::new(2, 2, 1),
            secondary: LinkDims::new(0, 0, 0),
            snr_db: 20.0,
            seed: 0,
        }
    }

    pub fn with_secondary(mut self, users: usize, dims: LinkDims) -> Self {
        self.secondary_users = users;
        self.secondary = dims;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.snr_db = snr_db;
        self
    }

    pub fn total_users(&self) -> usize {
        self.active_users + self.secondary_users
    }

    pub fn is_active(&self, user: usize) -> bool {
        user < self.active_users
    }

    pub fn dims(&self, user: usize) -> LinkDims {
        if self.is_active(user) {
            self.active
        } else {
            self.secondary
        }
    }

    pub fn active_indices(&self) -> std::ops::Range<usize> {
        0..self.active_users
    }

    pub fn secondary_indices(&self) -> std::ops::Range<usize> {
        self.active_users..self.total_users()
    }

    pub fn snr_linear(&self) -> f64 {
        db_to_linear(self.snr_db)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, d: LinkDims| -> Result<()> {
            if d.streams > d.tx.min(d.rx) {
                return Err(Error::Config(format!(
                    "{name} streams d = {} exceed min(M, N) = {}",
                    d.streams,
                    d.tx.min(d.rx)
                )));
            }
            if d.streams == 0 || d.tx == 0 || d.rx == 0 {
                return Err(Error::Config(format!(
                    "{name} users need at least one antenna and one stream, got M = {}, N = {}, d = {}",
                    d.tx, d.rx, d.streams
                )));
            }
            Ok(())
        };
        if self.active_users > 0 {
            check("active", self.active)?;
        }
        if self.secondary_users > 0 {
            check("secondary", self.secondary)?;
        }
        if self.total_users() == 0 {
            return Err(Error::Config("network has no users".into()));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::Config(format!(
                "snr_db must be finite, got {}",
                self.snr_db
            )));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Sub-seed for trial `index` of a run seeded with `seed` (SplitMix64 finalizer
/// applied to both words).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(seed) ^ index.wrapping_mul(0xD605_BBB5_8C8A_BBFD))
}

/// All cross channels of a `K`-user network.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T: Real> {
    users: usize,
    h: Vec<CMat<T>>,
}

impl<T: Real> ChannelSet<T> {
    /// Builds a set from explicit matrices, `matrices[i * users + k] = H_ik`.
    pub fn from_matrices(users: usize, matrices: Vec<CMat<T>>) -> Result<Self> {
        if matrices.len() != users * users {
            return Err(Error::Input(format!(
                "expected {} channel matrices, got {}",
                users * users,
                matrices.len()
            )));
        }
        Ok(Self { users, h: matrices })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    /// Channel from transmitter `tx` to receiver `rx`.
    pub fn get(&self, rx: usize, tx: usize) -> &CMat<T> {
        &self.h[rx * self.users + tx]
    }

    pub fn get_mut(&mut self, rx: usize, tx: usize) -> &mut CMat<T> {
        &mut self.h[rx * self.users + tx]
    }

    /// Restriction to a subset of users, re-indexed in the given order.
    pub fn subset(&self, users: &[usize]) -> Self {
        let mut h = Vec::with_capacity(users.len() * users.len());
        for &i in users {
            for &k in users {
                h.push(self.get(i, k).clone());
            }
        }
        Self {
            users: users.len(),
            h,
        }
    }
}

const MAX_REDRAWS: usize = 64;

/// Draws every `H_ik` with i.i.d. `CN(0, 1)` entries from `config.seed`.
///
/// Matrices are drawn in row-major `(rx, tx)` order, column by column, real
/// part before imaginary part. A rank-deficient draw is discarded and redrawn
/// from the same stream.
pub fn generate_network<T: Real>(config: &NetworkConfig) -> Result<ChannelSet<T>> {
    config.validate()?;
    let users = config.total_users();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut h = Vec::with_capacity(users * users);
    for i in 0..users {
        let rows = config.dims(i).rx;
        for k in 0..users {
            let cols = config.dims(k).tx;
            let mut draw = 0;
            let m = loop {
                let m = linalg::complex_gaussian::<T, _>(rows, cols, &mut rng);
                if linalg::svd(&m).rank() == rows.min(cols) {
                    break m;
                }
                draw += 1;
                if draw == MAX_REDRAWS {
                    return Err(Error::DegenerateChannel {
                        user: i,
                        what: "could not draw a full-rank channel",
                    });
                }
            };
            h.push(m);
        }
    }
    Ok(ChannelSet { users, h })
}
