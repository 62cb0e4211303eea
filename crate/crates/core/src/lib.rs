//! Secondary-user admission into MIMO interference alignment networks.
//!
//! An aligned network of active users is left untouched while new
//! (secondary) users join. This crate computes the active users' IA
//! solution, evaluates exact achievable sum rates under zero-forcing
//! reception, and designs secondary precoders both when the newcomers have
//! enough antennas to be invisible ([`zero_impact`]) and when they do not
//! ([`constrained`]).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision types used by the simulator.

pub mod admission;
pub mod channel;
pub mod constrained;
pub mod error;
pub mod ia;
pub mod linalg;
pub mod properness;
pub mod rates;
pub mod scalar;
pub mod zero_impact;

pub use admission::{zero_impact_threshold, AdmissionContext};
pub use channel::{derive_seed, generate_network, ChannelSet, LinkDims, NetworkConfig};
pub use error::{Error, Result};
pub use ia::{align_active_network, solve_ia, ActiveLinkState, IaOptions};
pub use properness::{properness_check, PropernessReport};
pub use scalar::Real;

/// Dense complex matrix over the real field `T`.
pub type CMat<T> = nalgebra::DMatrix<num_complex::Complex<T>>;

pub type ComplexMatrix = CMat<f64>;
pub type ComplexMatrix32 = CMat<f32>;
pub type ChannelSet64 = ChannelSet<f64>;
pub type ActiveLinkState64 = ActiveLinkState<f64>;
pub type AdmissionContext64 = AdmissionContext<f64>;
