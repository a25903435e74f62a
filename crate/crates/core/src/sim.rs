//! Exact desk-scale experiments: affine codes over `Ŵ = (W′)^{⊗n}` with
//! optimal or pretty-good decoding, privacy amplification with Toeplitz
//! extractors, and compression with quantum side information.
//!
//! Everything is dense and exact. Work is split over Toeplitz members with
//! rayon; results are collected in enumeration order before summing, so the
//! output does not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::CQChannel;
use crate::codes::{sample_diagonals, PrimeField, ToeplitzCodeSystem, ToeplitzSpec};
use crate::entropy::{conditional_entropy, guessing_probability, pretty_good_measurement, CQState};
use crate::error::{Error, Result};
use crate::exponents::{affine_code_bound, dc_exponent_bounds, hayashi_pa_bound, joint_spectrum_count, DcMode};
use crate::linalg::Matrix;
use crate::operator::{fidelity_unchecked, DensityOperator};

/// Largest `q^n · d_B^n` assembled densely.
pub const SIM_DIM_LIMIT: u128 = 1 << 14;
/// Families up to this many (Toeplitz member, coset) pairs are enumerated.
pub const EXHAUSTIVE_LIMIT: u128 = 100_000;
/// The `s` grid `{0.1, 0.2, …, 1.0}`.
pub fn default_s_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decoder {
    Optimal,
    Pgm,
}

fn guard(q: u64, d: usize, n: usize) -> Result<()> {
    let size = (q as u128)
        .checked_pow(n as u32)
        .and_then(|a| (d as u128).checked_pow(n as u32).and_then(|b| a.checked_mul(b)))
        .unwrap_or(u128::MAX);
    if size > SIM_DIM_LIMIT {
        return Err(Error::GuardExceeded {
            size,
            limit: SIM_DIM_LIMIT,
        });
    }
    Ok(())
}

/// `W^{⊗n}` with inputs in lexicographic order.
pub fn product_channel(w: &CQChannel, n: usize) -> Result<CQChannel> {
    w.power(n, SIM_DIM_LIMIT)
}

/// `ρ_{X^n E^n}` for `n` independent copies of `ρ_XE`.
pub fn product_state(state: &CQState, n: usize) -> Result<CQState> {
    guard(state.alphabet_size() as u64, state.dim_b(), n)?;
    let ch = CQChannel::new(state.conditionals().to_vec())?.power(n, SIM_DIM_LIMIT)?;
    let mut prior = vec![1.0];
    for _ in 0..n {
        prior = prior
            .iter()
            .flat_map(|a| state.prior().iter().map(move |b| a * b))
            .collect();
    }
    CQState::new(prior, ch.outputs().to_vec())
}

fn word_count(q: u64, len: usize) -> u128 {
    (q as u128).checked_pow(len as u32).unwrap_or(u128::MAX)
}

/// Success probability of the ensemble `{P(x), ρ_x}` given as weighted blocks.
fn success(blocks: &[Matrix], decoder: Decoder) -> Result<f64> {
    let total: f64 = blocks.iter().map(Matrix::tr).sum();
    if total <= 0.0 {
        return Ok(0.0);
    }
    match decoder {
        Decoder::Optimal => {
            let st = CQState::from_blocks(&blocks.iter().map(|b| b.scale_re(1.0 / total)).collect::<Vec<_>>())?;
            Ok(total * guessing_probability(&st)?)
        }
        Decoder::Pgm => {
            let povm = pretty_good_measurement(blocks);
            Ok(blocks.iter().zip(&povm).map(|(b, p)| b.trace_product(p).re).sum())
        }
    }
}

/// Average error of the affine code `{m G + v}` on `w_hat`, messages uniform.
pub fn code_error_exact(w_hat: &CQChannel, code: &ToeplitzCodeSystem, decoder: Decoder) -> Result<f64> {
    let n = code.n();
    let q = code.field().q();
    if word_count(q, n) != w_hat.inputs() as u128 {
        return Err(Error::DimensionMismatch {
            expected: w_hat.inputs(),
            found: word_count(q, n).min(usize::MAX as u128) as usize,
        });
    }
    let words = code.codewords();
    if words.len() == 1 {
        return Ok(0.0);
    }
    let p = 1.0 / words.len() as f64;
    let blocks: Vec<Matrix> = words
        .iter()
        .map(|c| w_hat.output(code.field().index(c) as usize).matrix().scale_re(p))
        .collect();
    Ok((1.0 - success(&blocks, decoder)?).clamp(0.0, 1.0))
}

/// Errors of every coset of one Toeplitz code.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodingExperiment {
    pub q: u64,
    pub n: usize,
    pub m: usize,
    pub diagonals: Vec<u64>,
    pub decoder: Decoder,
    /// Indexed by the syndrome as a base-`q` word.
    pub coset_errors: Vec<f64>,
    pub best_error: f64,
    pub best_syndrome: Vec<u64>,
    pub average_error: f64,
}

pub fn coding_experiment(
    w_hat: &CQChannel,
    field: PrimeField,
    n: usize,
    m: usize,
    diagonals: &[u64],
    decoder: Decoder,
) -> Result<CodingExperiment> {
    guard(field.q(), 1, n)?;
    let cosets = word_count(field.q(), n - m.min(n));
    if cosets > EXHAUSTIVE_LIMIT {
        return Err(Error::GuardExceeded {
            size: cosets,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let base = ToeplitzCodeSystem::new(field, n, m, diagonals.to_vec(), vec![0; n - m])?;
    let coset_errors = (0..cosets as u64)
        .into_par_iter()
        .map(|i| code_error_exact(w_hat, &base.with_syndrome(field.word(i, n - m))?, decoder))
        .collect::<Result<Vec<f64>>>()?;
    let (best, &best_error) = coset_errors
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one coset");
    Ok(CodingExperiment {
        q: field.q(),
        n,
        m,
        diagonals: diagonals.to_vec(),
        decoder,
        average_error: coset_errors.iter().sum::<f64>() / coset_errors.len() as f64,
        best_syndrome: field.word(best as u64, n - m),
        best_error,
        coset_errors,
    })
}

/// `1 − P_guess(Ẑ | B Ž)` for `Z` uniform on `F_q^n`, `Ẑ = f̂(Z)`, `Ž = f̌(Z)`:
/// the coset-averaged error computed from the joint state directly.
pub fn syndrome_averaged_error(w_hat: &CQChannel, code: &ToeplitzCodeSystem, decoder: Decoder) -> Result<f64> {
    let field = code.field();
    let (n, k) = (code.n(), code.k());
    let d = w_hat.dim_b();
    let cosets = word_count(field.q(), n - k) as usize;
    let messages = word_count(field.q(), k) as usize;
    let total = (messages * cosets) as f64;
    // Blocks of Ẑ on B ⊗ Ž, block diagonal in Ž.
    let mut blocks = vec![Matrix::zeros(d * cosets, d * cosets); messages];
    for z in 0..w_hat.inputs() as u64 {
        let word = field.word(z, n);
        let zh = field.index(&code.f_hat().apply(&word)?) as usize;
        let zc = field.index(&code.syndrome(&word)?) as usize;
        let out = w_hat.output(z as usize).matrix();
        for i in 0..d {
            for j in 0..d {
                blocks[zh][(zc * d + i, zc * d + j)] += out[(i, j)] / total;
            }
        }
    }
    Ok((1.0 - success(&blocks, decoder)?).clamp(0.0, 1.0))
}

fn enumerate_codes(field: PrimeField, n: usize, m: usize, samples: usize, seed: u64) -> (Vec<(Vec<u64>, Vec<u64>)>, bool) {
    let q = field.q();
    let family = word_count(q, n - 1).saturating_mul(word_count(q, n - m));
    if family <= EXHAUSTIVE_LIMIT {
        let mut out = Vec::with_capacity(family as usize);
        for t in 0..word_count(q, n - 1) as u64 {
            for s in 0..word_count(q, n - m) as u64 {
                out.push((field.word(t, n - 1), field.word(s, n - m)));
            }
        }
        (out, true)
    } else {
        let out = (0..samples.max(1) as u64)
            .map(|i| {
                let diag = sample_diagonals(field, n, seed, 2 * i);
                let syn = sample_diagonals(field, n - m + 1, seed, 2 * i + 1);
                (diag, syn)
            })
            .collect();
        (out, false)
    }
}

/// Outcome of an existence check for the one-shot affine-code bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineCodeCertificate {
    pub q: u64,
    pub n: usize,
    pub m: usize,
    pub spectrum_count: usize,
    /// `(s, right-hand side)` on the grid.
    pub rhs: Vec<(f64, f64)>,
    pub max_rhs: f64,
    pub best_code: ToeplitzSpec,
    pub best_error: f64,
    /// `−log P_error` of the best code; `+∞` when it decodes perfectly.
    #[serde(with = "crate::exponents::ext_real")]
    pub best_exponent: f64,
    /// Average error over every enumerated code; bounded by the same
    /// right-hand side in the exhaustive case.
    pub average_error: f64,
    pub pgm_best_error: f64,
    #[serde(with = "crate::exponents::ext_real")]
    pub gap: f64,
    pub codes_examined: usize,
    pub exhaustive: bool,
    pub pass: bool,
}

/// Searches the modified-Toeplitz affine codes of size `q^m` on `w_hat` for
/// one whose optimal-decoder error meets the bound at every grid point.
/// Families larger than [`EXHAUSTIVE_LIMIT`] are sampled (`samples` codes).
pub fn certify_affine_codes(
    w_hat: &CQChannel,
    q: u64,
    n: usize,
    m: usize,
    s_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<AffineCodeCertificate> {
    let field = PrimeField::new(q)?;
    if m > n || n == 0 {
        return Err(Error::InvalidParameter(format!("need 0 ≤ m ≤ n, n ≥ 1; got n = {n}, m = {m}")));
    }
    if s_grid.is_empty() {
        return Err(Error::InvalidParameter("empty s grid".into()));
    }
    guard(q, w_hat.dim_b(), n)?;
    if word_count(q, n) != w_hat.inputs() as u128 {
        return Err(Error::DimensionMismatch {
            expected: w_hat.inputs(),
            found: word_count(q, n).min(usize::MAX as u128) as usize,
        });
    }
    let uniform = vec![1.0 / w_hat.inputs() as f64; w_hat.inputs()];
    let nu = joint_spectrum_count(&w_hat.cq_state(&uniform)?);
    let rhs = s_grid
        .iter()
        .map(|&s| Ok((s, affine_code_bound(w_hat, q, m, s, nu)?)))
        .collect::<Result<Vec<_>>>()?;
    let max_rhs = rhs.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);

    let (codes, exhaustive) = enumerate_codes(field, n, m, samples, seed);
    let errors = codes
        .par_iter()
        .map(|(t, s)| {
            let code = ToeplitzCodeSystem::new(field, n, m, t.clone(), s.clone())?;
            let opt = code_error_exact(w_hat, &code, Decoder::Optimal)?;
            let pgm = code_error_exact(w_hat, &code, Decoder::Pgm)?;
            Ok((opt, pgm))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let (best, &(best_error, _)) = errors
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("nonempty family");
    let pgm_best_error = errors.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    let average_error = errors.iter().map(|e| e.0).sum::<f64>() / errors.len() as f64;
    let best_exponent = -best_error.log2();
    let gap = best_exponent - max_rhs;
    let best_code = ToeplitzCodeSystem::new(field, n, m, codes[best].0.clone(), codes[best].1.clone())?.to_spec();
    Ok(AffineCodeCertificate {
        q,
        n,
        m,
        spectrum_count: nu,
        rhs,
        max_rhs,
        best_code,
        best_error,
        best_exponent,
        average_error,
        pgm_best_error,
        gap,
        codes_examined: codes.len(),
        exhaustive,
        pass: gap >= 0.0,
    })
}

/// `D(ρ_{X̂E} ‖ π_X̂ ⊗ ρ_E) = log|X̂| − H(X̂|E)` and the purified distance
/// of the same pair.
fn extractor_quality(state: &CQState, code: &ToeplitzCodeSystem) -> Result<(f64, f64)> {
    let field = code.field();
    let k = code.k();
    let outputs = word_count(field.q(), k) as usize;
    let d = state.dim_b();
    let mut blocks = vec![Matrix::zeros(d, d); outputs];
    for (x, b) in state.weighted_blocks().iter().enumerate() {
        let h = field.index(&code.hash(&field.word(x as u64, code.n()))?) as usize;
        blocks[h] = &blocks[h] + b;
    }
    let hashed = CQState::from_blocks(&blocks)?;
    let divergence = (outputs as f64).log2() - conditional_entropy(&hashed);
    let joint = hashed.joint();
    let rho_e = hashed.marginal_b();
    let ideal = Matrix::identity(outputs).scale_re(1.0 / outputs as f64).kron(&rho_e);
    let f = fidelity_unchecked(joint.matrix(), &ideal).min(1.0);
    Ok((divergence.max(0.0), (1.0 - f * f).max(0.0).sqrt()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaExperiment {
    pub q: u64,
    pub n: usize,
    pub k: usize,
    pub family_size: u128,
    pub exhaustive: bool,
    pub members_examined: usize,
    /// Average of `D(ρ_{X̂E^n} ‖ π ⊗ ρ_{E^n})` in bits.
    pub mean_divergence: f64,
    /// 99% normal-approximation half width; zero for exhaustive averages.
    pub ci_half_width: f64,
    pub mean_purified_distance: f64,
    /// `(s, bound in bits)`.
    pub bounds: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Averages the extractor quality over the Toeplitz family `x ↦ G x` on `n`
/// copies of `ρ_XE` (alphabet `F_q`) and compares with the leftover-hash
/// bound at every `s`.
pub fn pa_experiment(
    rho_xe: &CQState,
    q: u64,
    n: usize,
    k: usize,
    s_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<PaExperiment> {
    let field = PrimeField::new(q)?;
    if rho_xe.alphabet_size() as u64 != q {
        return Err(Error::DimensionMismatch {
            expected: q as usize,
            found: rho_xe.alphabet_size(),
        });
    }
    if k > n || n == 0 {
        return Err(Error::InvalidParameter(format!("need 0 ≤ k ≤ n, n ≥ 1; got n = {n}, k = {k}")));
    }
    let state = product_state(rho_xe, n)?;
    let family_size = word_count(q, n - 1);
    let exhaustive = family_size <= EXHAUSTIVE_LIMIT;
    let members: Vec<Vec<u64>> = if exhaustive {
        (0..family_size as u64).map(|t| field.word(t, n - 1)).collect()
    } else {
        (0..trials as u64).map(|i| sample_diagonals(field, n, seed, i)).collect()
    };
    let values = members
        .par_iter()
        .map(|t| {
            let code = ToeplitzCodeSystem::new(field, n, k, t.clone(), vec![0; n - k])?;
            extractor_quality(&state, &code)
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let count = values.len() as f64;
    let mean = values.iter().map(|v| v.0).sum::<f64>() / count;
    let ci = if exhaustive || values.len() < 2 {
        0.0
    } else {
        let var = values.iter().map(|v| (v.0 - mean).powi(2)).sum::<f64>() / (count - 1.0);
        2.576 * (var / count).sqrt()
    };
    let bounds = s_grid
        .iter()
        .map(|&s| Ok((s, hayashi_pa_bound(&state, word_count(q, k) as u64, s)?.bits)))
        .collect::<Result<Vec<_>>>()?;
    let pass = bounds.iter().all(|&(_, b)| mean - ci <= b + 1e-12);
    Ok(PaExperiment {
        q,
        n,
        k,
        family_size,
        exhaustive,
        members_examined: values.len(),
        mean_divergence: mean,
        ci_half_width: ci,
        mean_purified_distance: values.iter().map(|v| v.1).sum::<f64>() / count,
        bounds,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcExperiment {
    pub q: u64,
    pub n: usize,
    pub k: usize,
    /// `((n−k)/n) log q`.
    pub rate: f64,
    pub error: f64,
    /// `−(1/n) log P_error`; `+∞` for perfect recovery.
    #[serde(with = "crate::exponents::ext_real")]
    pub observed_exponent: f64,
    #[serde(with = "crate::exponents::ext_real")]
    pub bound: f64,
    /// `observed − bound`, reported but not asserted: the bound is asymptotic.
    #[serde(with = "crate::exponents::ext_real")]
    pub slack: f64,
    /// The rate is below `H(Z|B)`, where no positive exponent exists.
    pub converse_region: bool,
}

/// Compresses `Z^n` to `f̌(Z^n)` and recovers it from `B^n` and the
/// compressed value with the optimal measurement.
pub fn dc_experiment(rho_zb: &CQState, code: &ToeplitzCodeSystem) -> Result<DcExperiment> {
    let field = code.field();
    let q = field.q();
    let (n, k) = (code.n(), code.k());
    if rho_zb.alphabet_size() as u64 != q {
        return Err(Error::DimensionMismatch {
            expected: q as usize,
            found: rho_zb.alphabet_size(),
        });
    }
    let state = product_state(rho_zb, n)?;
    let weighted = state.weighted_blocks();
    let mut p_success = 0.0;
    for s in 0..word_count(q, n - k) as u64 {
        let coset = code.with_syndrome(field.word(s, n - k))?;
        let blocks: Vec<Matrix> = coset
            .codewords()
            .iter()
            .map(|c| weighted[field.index(c) as usize].clone())
            .collect();
        p_success += success(&blocks, Decoder::Optimal)?;
    }
    let error = (1.0 - p_success).clamp(0.0, 1.0);
    let rate = (n - k) as f64 / n as f64 * (q as f64).log2();
    let observed = -error.log2() / n as f64;
    let bound = dc_exponent_bounds(rho_zb, rate, DcMode::Lower)?.value;
    Ok(DcExperiment {
        q,
        n,
        k,
        rate,
        error,
        observed_exponent: observed,
        bound,
        slack: observed - bound,
        converse_region: rate < conditional_entropy(rho_zb),
    })
}

/// The block-diagonal CQ state of a classical distribution with trivial
/// side information, used by the classical oracles.
pub fn classical_state(p: &[f64]) -> Result<CQState> {
    CQState::new(p.to_vec(), vec![DensityOperator::maximally_mixed(1); p.len()])
}

#[cfg(test)]
mod tests;
