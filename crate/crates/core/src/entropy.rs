//! Relative entropies, Rényi divergences and the conditional entropies built
//! from them, plus the optimal guessing probability of a CQ ensemble.
//!
//! All values are in bits. Divergences return `f64::INFINITY` when the
//! support condition fails; that sentinel is meaningful and propagates
//! through the conditional entropies.

mod guess;
mod hup;

pub use hup::{sandwiched_h_up, sandwiched_h_up_cq, sandwiched_h_up_with, HUpResult, OptimizerConfig};
pub use guess::{guessing_probability, guessing_probability_certified, helstrom, pretty_good_measurement, GuessCertificate, GuessMethod};

use crate::error::{Error, Result};
use crate::linalg::{eigh, Matrix};
use crate::operator::{
    partial_trace, psd_log2, psd_power, psd_spectrum, support_projector, trace_power,
    DensityOperator, SubsystemShape, TRACE_TOL,
};

/// Relative mass of `ρ` outside `supp(σ)` tolerated by the support test.
pub const SUPPORT_TOL: f64 = 1e-9;

/// Which quantum generalization of the Rényi divergence to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Petz,
    Sandwiched,
    Umegaki,
}

/// Rényi order together with the divergence family.
///
/// `alpha = f64::INFINITY` selects the max-divergence for the sandwiched
/// family. The Umegaki variant ignores `alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DivergenceOrder {
    pub alpha: f64,
    pub variant: Variant,
}

impl DivergenceOrder {
    pub fn petz(alpha: f64) -> Self {
        DivergenceOrder {
            alpha,
            variant: Variant::Petz,
        }
    }

    pub fn sandwiched(alpha: f64) -> Self {
        DivergenceOrder {
            alpha,
            variant: Variant::Sandwiched,
        }
    }

    pub fn umegaki() -> Self {
        DivergenceOrder {
            alpha: 1.0,
            variant: Variant::Umegaki,
        }
    }
}

fn check_pair(rho: &Matrix, sigma: &Matrix) -> Result<()> {
    if !rho.is_square() || rho.rows() != sigma.rows() || !sigma.is_square() {
        return Err(Error::DimensionMismatch {
            expected: rho.rows(),
            found: sigma.rows(),
        });
    }
    Ok(())
}

/// `supp(ρ) ⊆ supp(σ)`, tested as `tr[ρ (1 − Π_σ)] ≤ tol · tr ρ`.
pub fn support_contained(rho: &Matrix, sigma: &Matrix) -> bool {
    let p = support_projector(sigma);
    let inside = rho.trace_product(&p).re;
    rho.tr() - inside <= SUPPORT_TOL * rho.tr().abs().max(f64::MIN_POSITIVE)
}

/// `D(ρ‖σ) = tr[ρ (log ρ − log σ)]`.
pub fn umegaki_relative_entropy(rho: &impl AsRef<Matrix>, sigma: &impl AsRef<Matrix>) -> Result<f64> {
    let (rho, sigma) = (rho.as_ref(), sigma.as_ref());
    check_pair(rho, sigma)?;
    if !support_contained(rho, sigma) {
        return Ok(f64::INFINITY);
    }
    let self_term: f64 = psd_spectrum(rho)
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x * x.log2())
        .sum();
    let cross = rho.trace_product(&psd_log2(sigma)).re;
    Ok(self_term - cross)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha == 1.0 {
        return Err(Error::AlphaIsOne);
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidOrder { alpha });
    }
    Ok(())
}

fn renyi_from_trace(q: f64, alpha: f64) -> f64 {
    if q <= 0.0 {
        // Only reachable for α < 1 with orthogonal supports.
        return f64::INFINITY;
    }
    q.log2() / (alpha - 1.0)
}

/// Petz Rényi divergence `1/(α−1) log tr[ρ^α σ^{1−α}]`.
pub fn petz_divergence(rho: &impl AsRef<Matrix>, sigma: &impl AsRef<Matrix>, alpha: f64) -> Result<f64> {
    let (rho, sigma) = (rho.as_ref(), sigma.as_ref());
    check_pair(rho, sigma)?;
    check_alpha(alpha)?;
    if alpha.is_infinite() {
        return Err(Error::InvalidOrder { alpha });
    }
    if alpha > 1.0 && !support_contained(rho, sigma) {
        return Ok(f64::INFINITY);
    }
    let q = psd_power(rho, alpha)
        .trace_product(&psd_power(sigma, 1.0 - alpha))
        .re;
    Ok(renyi_from_trace(q, alpha))
}

/// Sandwiched Rényi divergence
/// `1/(α−1) log tr[(σ^{(1−α)/2α} ρ σ^{(1−α)/2α})^α]`; `α = ∞` gives the
/// max-divergence.
pub fn sandwiched_divergence(
    rho: &impl AsRef<Matrix>,
    sigma: &impl AsRef<Matrix>,
    alpha: f64,
) -> Result<f64> {
    let (rho, sigma) = (rho.as_ref(), sigma.as_ref());
    check_pair(rho, sigma)?;
    check_alpha(alpha)?;
    if alpha > 1.0 && !support_contained(rho, sigma) {
        return Ok(f64::INFINITY);
    }
    if alpha.is_infinite() {
        let s = psd_power(sigma, -0.5);
        let x = rho.conjugate_by(&s);
        return Ok(eigh(&x).max_value().log2());
    }
    let s = psd_power(sigma, (1.0 - alpha) / (2.0 * alpha));
    let x = rho.conjugate_by(&s).hermitian_part();
    Ok(renyi_from_trace(trace_power(&x, alpha), alpha))
}

/// Dispatches on the order; `α = 1` always evaluates the Umegaki relative
/// entropy rather than a numerical limit.
pub fn divergence(rho: &impl AsRef<Matrix>, sigma: &impl AsRef<Matrix>, order: DivergenceOrder) -> Result<f64> {
    match order.variant {
        Variant::Umegaki => umegaki_relative_entropy(rho, sigma),
        _ if order.alpha == 1.0 => umegaki_relative_entropy(rho, sigma),
        Variant::Petz => petz_divergence(rho, sigma, order.alpha),
        Variant::Sandwiched => sandwiched_divergence(rho, sigma, order.alpha),
    }
}

/// A classical-quantum state `Σ_z P(z) |z⟩⟨z| ⊗ φ_B(z)`.
#[derive(Clone, Debug)]
pub struct CQState {
    prior: Vec<f64>,
    conditionals: Vec<DensityOperator>,
    dim_b: usize,
}

pub(crate) fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution {
            reason: "empty".into(),
        });
    }
    if let Some(x) = p.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidDistribution {
            reason: format!("entry {x} is not a probability"),
        });
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidDistribution {
            reason: format!("sums to {s}"),
        });
    }
    Ok(())
}

impl CQState {
    pub fn new(prior: Vec<f64>, conditionals: Vec<DensityOperator>) -> Result<Self> {
        check_distribution(&prior)?;
        if prior.len() != conditionals.len() {
            return Err(Error::DimensionMismatch {
                expected: prior.len(),
                found: conditionals.len(),
            });
        }
        let dim_b = conditionals[0].dim();
        for c in &conditionals {
            if c.dim() != dim_b {
                return Err(Error::DimensionMismatch {
                    expected: dim_b,
                    found: c.dim(),
                });
            }
            if !c.is_normalized() {
                return Err(Error::BadTrace { trace: c.trace() });
            }
        }
        Ok(CQState {
            prior,
            conditionals,
            dim_b,
        })
    }

    pub fn uniform(conditionals: Vec<DensityOperator>) -> Result<Self> {
        let n = conditionals.len();
        Self::new(vec![1.0 / n as f64; n], conditionals)
    }

    /// Builds a CQ state from subnormalized blocks `P(z) φ_B(z)` whose traces
    /// sum to one. Zero blocks get the maximally mixed conditional.
    pub fn from_blocks(blocks: &[Matrix]) -> Result<Self> {
        let d = blocks
            .first()
            .map(|b| b.rows())
            .ok_or_else(|| Error::InvalidParameter("no blocks".into()))?;
        let mut prior = Vec::with_capacity(blocks.len());
        let mut conds = Vec::with_capacity(blocks.len());
        for b in blocks {
            let t = b.tr();
            if t <= 1e-15 {
                prior.push(0.0);
                conds.push(DensityOperator::maximally_mixed(d));
            } else {
                prior.push(t);
                conds.push(DensityOperator::new(b.scale_re(1.0 / t).hermitian_part())?);
            }
        }
        let s: f64 = prior.iter().sum();
        if (s - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace: s });
        }
        prior.iter_mut().for_each(|p| *p /= s);
        Self::new(prior, conds)
    }

    /// Reads a bipartite state whose first factor is classical in the
    /// computational basis (off-diagonal blocks are ignored).
    pub fn from_bipartite(rho: &DensityOperator, d_a: usize, d_b: usize) -> Result<Self> {
        SubsystemShape::bipartite(d_a, d_b).check(rho.dim())?;
        let m = rho.matrix();
        let blocks: Vec<Matrix> = (0..d_a)
            .map(|z| Matrix::from_fn(d_b, d_b, |i, j| m[(z * d_b + i, z * d_b + j)]))
            .collect();
        Self::from_blocks(&blocks)
    }

    pub fn alphabet_size(&self) -> usize {
        self.prior.len()
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn conditionals(&self) -> &[DensityOperator] {
        &self.conditionals
    }

    /// Subnormalized blocks `P(z) φ_B(z)`.
    pub fn weighted_blocks(&self) -> Vec<Matrix> {
        self.prior
            .iter()
            .zip(&self.conditionals)
            .map(|(&p, c)| c.matrix().scale_re(p))
            .collect()
    }

    /// The block-diagonal joint state `ρ_ZB` on `Z ⊗ B`.
    pub fn joint(&self) -> DensityOperator {
        DensityOperator::new(Matrix::direct_sum(&self.weighted_blocks()))
            .expect("direct sum of weighted states is a state")
    }

    pub fn marginal_b(&self) -> Matrix {
        let mut out = Matrix::zeros(self.dim_b, self.dim_b);
        for b in self.weighted_blocks() {
            out.add_assign_scaled(&b, 1.0);
        }
        out
    }
}

/// A bipartite state `ρ_AB` with explicit factor dimensions.
#[derive(Clone, Debug)]
pub struct BipartiteState {
    rho: Matrix,
    d_a: usize,
    d_b: usize,
}

impl BipartiteState {
    pub fn new(rho: &DensityOperator, d_a: usize, d_b: usize) -> Result<Self> {
        SubsystemShape::bipartite(d_a, d_b).check(rho.dim())?;
        Ok(BipartiteState {
            rho: rho.matrix().clone(),
            d_a,
            d_b,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.rho
    }

    fn shape(&self) -> SubsystemShape {
        SubsystemShape::bipartite(self.d_a, self.d_b)
    }
}

/// Access pattern shared by general bipartite states and CQ states for the
/// conditional entropies. A state is presented as a list of blocks whose
/// `A`-partial trace is [`ConditionalState::reduce`]; CQ states use one
/// `d_B × d_B` block per symbol, general states a single full block.
pub trait ConditionalState {
    fn dim_a(&self) -> usize;
    fn dim_b(&self) -> usize;
    fn blocks(&self) -> Vec<Matrix>;
    /// `S` lifted to act on one block (`S` itself, or `1_A ⊗ S`).
    fn lift(&self, s: &Matrix) -> Matrix;
    /// Blocks of `(1_A ⊗ S) ρ (1_A ⊗ S)`.
    fn sandwich(&self, s: &Matrix) -> Vec<Matrix> {
        let l = self.lift(s);
        self.blocks()
            .iter()
            .map(|b| (&(&l * b) * &l).hermitian_part())
            .collect()
    }
    /// Partial trace over `A` of a block list shaped like [`Self::blocks`].
    fn reduce(&self, blocks: &[Matrix]) -> Matrix;
    /// `(1_A ⊗ V†) ρ (1_A ⊗ V)` for an isometry `V : supp → B`.
    fn compress(&self, v: &Matrix) -> Self
    where
        Self: Sized;

    fn marginal_b(&self) -> Matrix {
        self.reduce(&self.blocks())
    }
}

impl ConditionalState for CQState {
    fn dim_a(&self) -> usize {
        self.alphabet_size()
    }

    fn dim_b(&self) -> usize {
        self.dim_b
    }

    fn blocks(&self) -> Vec<Matrix> {
        self.weighted_blocks()
    }

    fn lift(&self, s: &Matrix) -> Matrix {
        s.clone()
    }

    fn reduce(&self, blocks: &[Matrix]) -> Matrix {
        let d = blocks[0].rows();
        let mut out = Matrix::zeros(d, d);
        for b in blocks {
            out.add_assign_scaled(b, 1.0);
        }
        out
    }

    fn compress(&self, v: &Matrix) -> Self {
        let vd = v.adjoint();
        let r = v.cols();
        let conds = self
            .conditionals
            .iter()
            .map(|c| {
                let m = (&(&vd * c.matrix()) * v).hermitian_part();
                let t = m.tr();
                if t <= 1e-15 {
                    DensityOperator::maximally_mixed(r)
                } else {
                    DensityOperator::new(m.scale_re(1.0 / t).hermitian_part())
                        .unwrap_or_else(|_| DensityOperator::maximally_mixed(r))
                }
            })
            .collect();
        CQState {
            prior: self.prior.clone(),
            conditionals: conds,
            dim_b: r,
        }
    }
}

impl ConditionalState for BipartiteState {
    fn dim_a(&self) -> usize {
        self.d_a
    }

    fn dim_b(&self) -> usize {
        self.d_b
    }

    fn blocks(&self) -> Vec<Matrix> {
        vec![self.rho.clone()]
    }

    fn lift(&self, s: &Matrix) -> Matrix {
        Matrix::identity(self.d_a).kron(s)
    }

    fn reduce(&self, blocks: &[Matrix]) -> Matrix {
        partial_trace(&blocks[0], &self.shape(), &[1]).expect("consistent bipartite shape")
    }

    fn compress(&self, v: &Matrix) -> Self {
        let full = Matrix::identity(self.d_a).kron(v);
        BipartiteState {
            rho: (&(&full.adjoint() * &self.rho) * &full).hermitian_part(),
            d_a: self.d_a,
            d_b: v.cols(),
        }
    }
}

/// Isometry onto the support of a PSD matrix (columns are eigenvectors).
pub(crate) fn support_isometry(m: &Matrix) -> Matrix {
    let e = eigh(m);
    let thr = crate::operator::ZERO_EIGENVALUE_REL * e.max_value().abs();
    let cols: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > thr).collect();
    Matrix::from_fn(m.rows(), cols.len().max(1), |i, j| {
        cols.get(j).map_or(crate::linalg::ZERO, |&c| e.vectors[(i, c)])
    })
}

/// Conditional von Neumann entropy `H(A|B) = H(AB) − H(B)`.
pub fn conditional_entropy<S: ConditionalState>(state: &S) -> f64 {
    let joint: f64 = state
        .blocks()
        .iter()
        .map(crate::operator::von_neumann_entropy)
        .sum();
    joint - crate::operator::von_neumann_entropy(&state.marginal_b())
}

/// `H̄↑_α(A|B)` via the closed-form Sibson optimizer:
/// `α/(1−α) · log tr[(tr_A ρ^α)^{1/α}]`. `α = 1` gives the conditional von
/// Neumann entropy.
pub fn petz_h_up<S: ConditionalState>(state: &S, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Ok(conditional_entropy(state));
    }
    if !(alpha > 0.0) || alpha.is_infinite() {
        return Err(Error::InvalidOrder { alpha });
    }
    let powered: Vec<Matrix> = state.blocks().iter().map(|b| psd_power(b, alpha)).collect();
    let reduced = state.reduce(&powered);
    let t = trace_power(&reduced, 1.0 / alpha);
    Ok(alpha / (1.0 - alpha) * t.log2())
}

/// The Sibson optimizer `σ*_B ∝ (tr_A ρ^α)^{1/α}`.
pub fn sibson_optimizer<S: ConditionalState>(state: &S, alpha: f64) -> Matrix {
    let powered: Vec<Matrix> = state.blocks().iter().map(|b| psd_power(b, alpha)).collect();
    let m = psd_power(&state.reduce(&powered), 1.0 / alpha);
    let t = m.tr();
    m.scale_re(1.0 / t)
}

/// `−D̄_α(ρ_AB ‖ 1_A ⊗ σ_B)` for a given `σ_B`.
pub fn petz_conditional_value<S: ConditionalState>(state: &S, sigma_b: &Matrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let sb = psd_power(sigma_b, 1.0 - alpha);
    if alpha > 1.0 && !support_contained(&state.marginal_b(), sigma_b) {
        return Ok(f64::NEG_INFINITY);
    }
    let q: f64 = match state.blocks().len() {
        1 if state.dim_a() > 1 || state.blocks()[0].rows() != state.dim_b() => {
            let b = &state.blocks()[0];
            let full = Matrix::identity(state.dim_a()).kron(&sb);
            psd_power(b, alpha).trace_product(&full).re
        }
        _ => state
            .blocks()
            .iter()
            .map(|b| psd_power(b, alpha).trace_product(&sb).re)
            .sum(),
    };
    Ok(-renyi_from_trace(q, alpha))
}

fn sandwiched_trace<S: ConditionalState>(state: &S, sigma_b: &Matrix, alpha: f64) -> f64 {
    let s = psd_power(sigma_b, (1.0 - alpha) / (2.0 * alpha));
    state
        .sandwich(&s)
        .iter()
        .map(|x| trace_power(x, alpha))
        .sum()
}

/// `−D̃_α(ρ_AB ‖ 1_A ⊗ σ_B)` for a given `σ_B`.
pub fn sandwiched_conditional_value<S: ConditionalState>(
    state: &S,
    sigma_b: &Matrix,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha > 1.0 && !support_contained(&state.marginal_b(), sigma_b) {
        return Ok(f64::NEG_INFINITY);
    }
    if alpha.is_infinite() {
        let s = psd_power(sigma_b, -0.5);
        let lmax = state
            .sandwich(&s)
            .iter()
            .map(|x| eigh(x).max_value())
            .fold(f64::NEG_INFINITY, f64::max);
        return Ok(-lmax.log2());
    }
    Ok(-renyi_from_trace(sandwiched_trace(state, sigma_b, alpha), alpha))
}

/// `H̃↓_α(A|B) = −D̃_α(ρ_AB ‖ 1_A ⊗ ρ_B)`. `α = 1` gives the conditional
/// von Neumann entropy.
pub fn sandwiched_h_down<S: ConditionalState>(state: &S, alpha: f64) -> Result<f64> {
    if alpha == 1.0 {
        return Ok(conditional_entropy(state));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidOrder { alpha });
    }
    let rb = state.marginal_b();
    sandwiched_conditional_value(state, &rb, alpha)
}
