//! Prime-field coding machinery: field arithmetic, modified Toeplitz codes
//! and hashes, the Fourier-conjugate basis, and composition shaping.

pub mod field;
pub mod fourier;
pub mod shaping;
pub mod toeplitz;

pub use field::{FieldMatrix, PrimeField};
pub use fourier::{fourier_action_deviation, fourier_conjugation, permutation_unitary, FourierBasis};
pub use shaping::{quantize_distribution, shaping_channel, variational_distance, ShapingMap};
pub use toeplitz::{
    collision_test, dual_functions, exact_collision_probability, sample_diagonals, toeplitz_block, wilson_interval,
    CollisionReport, DualFunctions, ToeplitzCodeSystem, ToeplitzSpec,
};
