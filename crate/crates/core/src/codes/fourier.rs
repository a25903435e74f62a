//! The Fourier-conjugate basis of `(C^q)^{⊗n}` and the action of invertible
//! field maps in it.

use std::f64::consts::PI;

use super::field::{FieldMatrix, PrimeField};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64};

/// Words of length `n` beyond which the dense basis is refused.
pub const FOURIER_DIM_LIMIT: u64 = 1 << 12;

/// Columns are `|x̃⟩ = q^{−n/2} Σ_z ω^{x·z} |z⟩`, `ω = e^{2πi/q}`, with words
/// indexed most-significant-first.
#[derive(Clone, Debug)]
pub struct FourierBasis {
    pub field: PrimeField,
    pub n: usize,
    pub matrix: Matrix,
    /// `max |  |⟨z|x̃⟩|² − q^{−n} |`.
    pub conjugacy_deviation: f64,
    /// `max |F†F − I|`.
    pub unitarity_deviation: f64,
}

fn dim(field: PrimeField, n: usize) -> Result<usize> {
    let d = (field.q() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if d > FOURIER_DIM_LIMIT as u128 {
        return Err(Error::GuardExceeded {
            size: d,
            limit: FOURIER_DIM_LIMIT as u128,
        });
    }
    Ok(d as usize)
}

pub fn fourier_conjugation(q: u64, n: usize) -> Result<FourierBasis> {
    let field = PrimeField::new(q)?;
    let d = dim(field, n)?;
    let scale = 1.0 / (d as f64).sqrt();
    let words: Vec<Vec<u64>> = (0..d as u64).map(|i| field.word(i, n)).collect();
    let matrix = Matrix::from_fn(d, d, |z, x| {
        let phase = field.dot(&words[x], &words[z]);
        C64::from_polar(scale, 2.0 * PI * phase as f64 / q as f64)
    });
    let target = 1.0 / d as f64;
    let conjugacy_deviation = matrix
        .as_slice()
        .iter()
        .map(|a| (a.norm_sqr() - target).abs())
        .fold(0.0, f64::max);
    let unitarity_deviation = (&matrix.adjoint() * &matrix).max_abs_diff(&Matrix::identity(d));
    Ok(FourierBasis {
        field,
        n,
        matrix,
        conjugacy_deviation,
        unitarity_deviation,
    })
}

/// Permutation unitary `U_M |z⟩ = |M z⟩`.
pub fn permutation_unitary(m: &FieldMatrix) -> Result<Matrix> {
    let field = m.field();
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::DimensionMismatch { expected: n, found: m.cols() });
    }
    m.inverse()?;
    let d = dim(field, n)?;
    let mut u = Matrix::zeros(d, d);
    for z in 0..d as u64 {
        let image = m.apply(&field.word(z, n))?;
        u[(field.index(&image) as usize, z as usize)] = C64::new(1.0, 0.0);
    }
    Ok(u)
}

/// `max_x ‖U_M |x̃⟩ − |((M⁻¹)ᵀ x)~⟩‖_∞`: the Fourier basis is permuted by the
/// inverse transpose.
pub fn fourier_action_deviation(basis: &FourierBasis, m: &FieldMatrix) -> Result<f64> {
    let field = basis.field;
    let u = permutation_unitary(m)?;
    let m_inv_t = m.inverse()?.transpose();
    let image = &u * &basis.matrix;
    let d = basis.matrix.rows();
    let mut dev: f64 = 0.0;
    for x in 0..d {
        let y = field.index(&m_inv_t.apply(&field.word(x as u64, basis.n))?) as usize;
        for z in 0..d {
            dev = dev.max((image[(z, x)] - basis.matrix[(z, y)]).norm());
        }
    }
    Ok(dev)
}
