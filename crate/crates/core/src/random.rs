//! Random states, channels and CQ ensembles for property sweeps.
//!
//! Mixed states are drawn from the induced (Ginibre) measure: `G G† / tr`
//! with `G` a `d × rank` matrix of standard complex Gaussians.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::CQChannel;
use crate::entropy::CQState;
use crate::linalg::{Matrix, C64};
use crate::operator::{DensityOperator, PureStateVector};

pub type TestRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureStateVector {
    let v: Vec<C64> = (0..d).map(|_| gaussian_c64(rng)).collect();
    PureStateVector::normalized(v).expect("nonzero Gaussian vector")
}

/// Density operator of dimension `d` and rank at most `rank`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> DensityOperator {
    let g = Matrix::from_fn(d, rank.max(1), |_, _| gaussian_c64(rng));
    let m = &g * &g.adjoint();
    DensityOperator::normalize(&m).expect("Ginibre matrix has positive trace")
}

/// Real diagonal state drawn uniformly from the simplex.
pub fn random_diagonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOperator {
    DensityOperator::diagonal(&random_distribution(d, rng)).expect("valid distribution")
}

/// Uniform point of the probability simplex.
pub fn random_distribution<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..n)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Channel with `inputs` full-rank outputs of dimension `dim`.
pub fn random_channel<R: Rng + ?Sized>(inputs: usize, dim: usize, rng: &mut R) -> CQChannel {
    let outputs = (0..inputs).map(|_| random_density(dim, dim, rng)).collect();
    CQChannel::new(outputs).expect("consistent random channel")
}

pub fn random_cq_state<R: Rng + ?Sized>(alphabet: usize, dim: usize, rng: &mut R) -> CQState {
    let prior = random_distribution(alphabet, rng);
    let conds = (0..alphabet).map(|_| random_density(dim, dim, rng)).collect();
    CQState::new(prior, conds).expect("consistent random CQ state")
}

/// Haar-random unitary via Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| gaussian_c64(rng)).collect();
        for u in &cols {
            let p = crate::linalg::vec_inner(u, &v);
            for (x, y) in v.iter_mut().zip(u) {
                *x -= p * y;
            }
        }
        let n = crate::linalg::vec_norm(&v);
        if n > 1e-8 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    Matrix::from_fn(d, d, |i, j| cols[j][i])
}
