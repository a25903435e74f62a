//! Error exponents for classical-quantum channels.
//!
//! The crate collects the pieces needed to evaluate and test exponent bounds
//! for channel coding, privacy amplification and data compression with
//! quantum side information:
//!
//! * dense Hermitian linear algebra and spectral calculus ([`linalg`],
//!   [`operator`]);
//! * Rényi divergences, conditional Rényi entropies and guessing
//!   probabilities ([`entropy`]);
//! * Gallager's `E0`, random-coding and sphere-packing bounds ([`exponents`]);
//! * Toeplitz affine codes and composition shaping over prime fields
//!   ([`codes`]);
//! * purifications and the duality relations between coding and
//!   compression ([`duality`]);
//! * exact finite-blocklength experiments ([`sim`]).
//!
//! Entropies are in bits throughout.
//!
//! ```
//! use cqrel::channel::CQChannel;
//! use cqrel::exponents::e0;
//!
//! let w = CQChannel::bsc(0.11).unwrap();
//! let v = e0(1.0, &[0.5, 0.5], &w).unwrap();
//! let beta = 0.5_f64;
//! let oracle = 1.0 - 2.0 * (0.11_f64.powf(beta) + 0.89_f64.powf(beta)).log2();
//! assert!((v - oracle).abs() < 1e-12);
//! ```

pub mod channel;
pub mod codes;
pub mod duality;
pub mod entropy;
pub mod error;
pub mod exponents;
pub mod linalg;
pub mod operator;
pub mod random;
pub mod sim;

pub use error::{Error, Result};
