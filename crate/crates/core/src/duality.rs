//! Dual states and the entropy duality relations between conjugate bases.
//!
//! For a state `ρ_AC` with purification `|ρ⟩_ABC`, the bundle state
//! `|ψ⟩_{AA′BC} = U_{AA′} |ρ⟩_ABC |0⟩_{A′}` copies the `Z` value of `A` into
//! `A′`. Pure states of this shape satisfy
//!
//! * `H̄↑_α(Z_A|B) + H̃↓_{1/α}(X_A|A′C) = log d_A`,
//! * `H̃↑_α(Z_A|B) + H̃↑_{α/(2α−1)}(X_A|A′C) = log d_A`,
//!
//! and the second relation at `α = ∞` turns the guessing probability into a
//! fidelity. Factor order throughout is `A, A′, B, C`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::entropy::{
    guessing_probability, petz_h_up, sandwiched_h_down, sandwiched_h_up_cq, CQState,
};
use crate::error::{Error, Result};
use crate::linalg::{vec_inner, Matrix, C64, ONE, ZERO};
use crate::operator::{
    computational_basis, partial_trace, pinch_factor, purify, reduced_from_vector, DensityOperator,
    PureStateVector, SubsystemShape,
};

/// Largest total dimension `d_A² d_B d_C` accepted for a bundle.
pub const BUNDLE_DIM_LIMIT: usize = 1 << 12;

const CONJUGACY_TOL: f64 = 1e-10;

/// Which duality relation to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `H̄↑_α` against `H̃↓_{1/α}`.
    PetzUpSandDown,
    /// `H̃↑_α` against `H̃↑_{α/(2α−1)}`.
    SandUpSandUp,
}

/// Discrete Fourier basis `|x̃⟩ = d^{−1/2} Σ_z ω^{xz} |z⟩`.
pub fn fourier_basis(d: usize) -> Vec<Vec<C64>> {
    let s = 1.0 / (d as f64).sqrt();
    (0..d)
        .map(|x| {
            (0..d)
                .map(|z| C64::from_polar(s, 2.0 * PI * ((x * z) % d) as f64 / d as f64))
                .collect()
        })
        .collect()
}

/// `max |  |⟨z|x̃⟩|² − 1/d |`.
pub fn conjugacy_deviation(z_basis: &[Vec<C64>], x_basis: &[Vec<C64>]) -> f64 {
    let d = z_basis.len() as f64;
    z_basis
        .iter()
        .flat_map(|z| x_basis.iter().map(move |x| (vec_inner(z, x).norm_sqr() - 1.0 / d).abs()))
        .fold(0.0, f64::max)
}

fn check_conjugate(z_basis: &[Vec<C64>], x_basis: &[Vec<C64>]) -> Result<()> {
    let d = z_basis.len();
    if x_basis.len() != d || z_basis.iter().chain(x_basis).any(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x_basis.len(),
        });
    }
    let mut ortho: f64 = 0.0;
    for basis in [z_basis, x_basis] {
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let t = if i == j { ONE } else { ZERO };
                ortho = ortho.max((vec_inner(a, b) - t).norm());
            }
        }
    }
    if ortho > CONJUGACY_TOL {
        return Err(Error::NotOrthonormal { deviation: ortho });
    }
    let dev = conjugacy_deviation(z_basis, x_basis);
    if dev > CONJUGACY_TOL {
        return Err(Error::NotConjugate { deviation: dev });
    }
    Ok(())
}

/// `Π_{AA′} = Σ_z |z⟩⟨z| ⊗ |z⟩⟨z|`.
pub fn copy_projector(z_basis: &[Vec<C64>]) -> Matrix {
    let d = z_basis.len();
    let mut pi = Matrix::zeros(d * d, d * d);
    for z in z_basis {
        pi = &pi + &Matrix::projector(z).kron(&Matrix::projector(z));
    }
    pi
}

/// `U_{AA′} |z⟩|z′⟩ = |z⟩|z′ + z mod d⟩` in the computational basis.
pub fn copy_unitary(d: usize) -> Matrix {
    let mut u = Matrix::zeros(d * d, d * d);
    for z in 0..d {
        for zp in 0..d {
            u[(z * d + (zp + z) % d, z * d + zp)] = ONE;
        }
    }
    u
}

/// Pure state on `A A′ B C` built from `ρ_AC`, with `B` the purifying system.
#[derive(Clone, Debug)]
pub struct DualStateBundle {
    pub d_a: usize,
    pub d_b: usize,
    pub d_c: usize,
    pub psi: PureStateVector,
    pub z_basis: Vec<Vec<C64>>,
    pub x_basis: Vec<Vec<C64>>,
    /// `Π_{AA′}`.
    pub projector: Matrix,
    /// `U_{AA′}`.
    pub copy: Matrix,
}

/// `ψ = U_{AA′} |ρ⟩_{ABC} |0⟩_{A′}` for the canonical purification of `ρ_AC`.
pub fn build_dual_state(rho_ac: &DensityOperator, d_a: usize, d_c: usize) -> Result<DualStateBundle> {
    SubsystemShape::bipartite(d_a, d_c).check(rho_ac.dim())?;
    let pur = purify(rho_ac)?;
    let d_b = pur.ancilla_dim;
    let total = d_a * d_a * d_b * d_c;
    if total > BUNDLE_DIM_LIMIT {
        return Err(Error::GuardExceeded {
            size: total as u128,
            limit: BUNDLE_DIM_LIMIT as u128,
        });
    }
    // The purification is indexed (a, c, b); A′ receives a copy of a.
    let amps = pur.vector.amplitudes();
    let mut psi = vec![ZERO; total];
    for a in 0..d_a {
        for c in 0..d_c {
            for b in 0..d_b {
                let src = (a * d_c + c) * d_b + b;
                let dst = ((a * d_a + a) * d_b + b) * d_c + c;
                psi[dst] = amps[src];
            }
        }
    }
    let z_basis = computational_basis(d_a);
    Ok(DualStateBundle {
        d_a,
        d_b,
        d_c,
        psi: PureStateVector::new(psi)?,
        projector: copy_projector(&z_basis),
        x_basis: fourier_basis(d_a),
        z_basis,
        copy: copy_unitary(d_a),
    })
}

impl DualStateBundle {
    pub fn shape(&self) -> SubsystemShape {
        SubsystemShape::new(vec![self.d_a, self.d_a, self.d_b, self.d_c]).expect("positive factors")
    }

    /// `‖(Π ⊗ 1) ψ − ψ‖_∞`.
    pub fn projector_residual(&self) -> f64 {
        let rest = self.d_b * self.d_c;
        let full = self.projector.kron(&Matrix::identity(rest));
        let v = self.psi.amplitudes();
        full.mul_vec(v)
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `‖ψ_AC − P_Z[ρ_AC]‖_∞`.
    pub fn marginal_residual(&self, rho_ac: &DensityOperator) -> Result<f64> {
        let psi_ac = reduced_from_vector(self.psi.amplitudes(), &self.shape(), &[0, 3])?;
        let pinched = pinch_factor(rho_ac, &SubsystemShape::bipartite(self.d_a, self.d_c), 0, &self.z_basis)?;
        Ok(psi_ac.max_abs_diff(&pinched))
    }

    /// `Z_A` with side information `B`.
    pub fn z_given_b(&self) -> Result<CQState> {
        let psi_ab = reduced_from_vector(self.psi.amplitudes(), &self.shape(), &[0, 2])?;
        cq_in_basis(&psi_ab, self.d_a, self.d_b, &self.z_basis)
    }

    /// `X_A` with side information `A′C`.
    pub fn x_given_a_prime_c(&self) -> Result<CQState> {
        let psi = reduced_from_vector(self.psi.amplitudes(), &self.shape(), &[0, 1, 3])?;
        cq_in_basis(&psi, self.d_a, self.d_a * self.d_c, &self.x_basis)
    }
}

/// CQ state obtained by measuring the first factor of `rho` in `basis`.
pub fn cq_in_basis(rho: &Matrix, d_a: usize, d_b: usize, basis: &[Vec<C64>]) -> Result<CQState> {
    SubsystemShape::bipartite(d_a, d_b).check(rho.rows())?;
    let mut blocks = Vec::with_capacity(d_a);
    for v in basis {
        // ⟨v| ⊗ 1 applied on both sides.
        let block = Matrix::from_fn(d_b, d_b, |i, j| {
            let mut acc = ZERO;
            for a in 0..d_a {
                for ap in 0..d_a {
                    acc += v[a].conj() * rho[(a * d_b + i, ap * d_b + j)] * v[ap];
                }
            }
            acc
        });
        blocks.push(block.hermitian_part());
    }
    CQState::from_blocks(&blocks)
}

fn check_relation_order(alpha: f64, relation: Relation) -> Result<()> {
    let ok = match relation {
        Relation::PetzUpSandDown => alpha > 0.0 && alpha.is_finite(),
        Relation::SandUpSandUp => alpha >= 0.5,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidOrder { alpha })
    }
}

/// The two entropies of a relation, `(H(Z_A|B), H(X_A|side))`.
fn relation_pair(z: &CQState, x: &CQState, alpha: f64, relation: Relation) -> Result<(f64, f64)> {
    check_relation_order(alpha, relation)?;
    match relation {
        Relation::PetzUpSandDown => Ok((petz_h_up(z, alpha)?, sandwiched_h_down(x, 1.0 / alpha)?)),
        Relation::SandUpSandUp => {
            let dual = if alpha.is_infinite() {
                0.5
            } else if alpha == 0.5 {
                f64::INFINITY
            } else {
                alpha / (2.0 * alpha - 1.0)
            };
            Ok((sandwiched_h_up_cq(z, alpha)?, sandwiched_h_up_cq(x, dual)?))
        }
    }
}

/// `|H(Z_A|B)_ψ + H(X_A|A′C)_ψ − log d_A|` for the chosen relation.
pub fn duality_check(bundle: &DualStateBundle, alpha: f64, relation: Relation) -> Result<f64> {
    let (hz, hx) = relation_pair(&bundle.z_given_b()?, &bundle.x_given_a_prime_c()?, alpha, relation)?;
    Ok((hz + hx - (bundle.d_a as f64).log2()).abs())
}

/// `H(Z_A|B)_ρ + H(X_A|C)_ρ − log d_A` for an arbitrary state on `A B C`;
/// nonnegative by the uncertainty relations.
pub fn uncertainty_check(
    rho_abc: &DensityOperator,
    dims: [usize; 3],
    alpha: f64,
    relation: Relation,
) -> Result<f64> {
    let [d_a, d_b, d_c] = dims;
    let shape = SubsystemShape::new(dims.to_vec())?;
    shape.check(rho_abc.dim())?;
    let rho_ab = partial_trace(rho_abc, &shape, &[0, 1])?;
    let rho_ac = partial_trace(rho_abc, &shape, &[0, 2])?;
    let z = cq_in_basis(&rho_ab, d_a, d_b, &computational_basis(d_a))?;
    let x = cq_in_basis(&rho_ac, d_a, d_c, &fourier_basis(d_a))?;
    let (hz, hx) = relation_pair(&z, &x, alpha, relation)?;
    Ok(hz + hx - (d_a as f64).log2())
}

/// Both sides of `P_guess(Z_A|B) = max_σ F(P̃_A[ψ_{AA′C}], π_A ⊗ σ)²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PguessFidelity {
    pub guessing_probability: f64,
    pub max_fidelity_sq: f64,
    pub residual: f64,
}

/// The right-hand side is `2^{H̃↑_{1/2}(X_A|A′C) − log d_A}`, computed by the
/// same optimizer as every `H̃↑`.
pub fn pguess_fidelity_check(bundle: &DualStateBundle) -> Result<PguessFidelity> {
    let pg = guessing_probability(&bundle.z_given_b()?)?;
    let h_half = sandwiched_h_up_cq(&bundle.x_given_a_prime_c()?, 0.5)?;
    let f2 = (h_half - (bundle.d_a as f64).log2()).exp2();
    Ok(PguessFidelity {
        guessing_probability: pg,
        max_fidelity_sq: f2,
        residual: (pg - f2).abs(),
    })
}

/// Kraus operators `K(x) = √d Σ_z ⟨z|x̃⟩ |z⟩⟨x̃| ⊗ |z⟩⟨z|` of the channel
/// that undoes the `X` pinch on `Π`-invariant operators.
pub fn recovery_channel(z_basis: &[Vec<C64>], x_basis: &[Vec<C64>]) -> Result<Vec<Matrix>> {
    check_conjugate(z_basis, x_basis)?;
    let d = z_basis.len();
    let sd = (d as f64).sqrt();
    Ok(x_basis
        .iter()
        .map(|x| {
            let mut k = Matrix::zeros(d * d, d * d);
            for z in z_basis {
                let c = vec_inner(z, x) * sd;
                let term = Matrix::outer(z, x).kron(&Matrix::projector(z)).scale(c);
                k = &k + &term;
            }
            k
        })
        .collect())
}

/// `‖Σ K†K − 1‖_∞`.
pub fn kraus_completeness(kraus: &[Matrix]) -> f64 {
    let d = kraus[0].rows();
    let mut s = Matrix::zeros(d, d);
    for k in kraus {
        s = &s + &(&k.adjoint() * k);
    }
    s.max_abs_diff(&Matrix::identity(d))
}

fn apply_kraus(kraus: &[Matrix], op: &Matrix, rest: usize) -> Matrix {
    let mut out = Matrix::zeros(op.rows(), op.cols());
    for k in kraus {
        let full = k.kron(&Matrix::identity(rest));
        out = &out + &(&(&full * op) * &full.adjoint());
    }
    out
}

/// Residuals of the two recovery identities on `A A′ B`:
/// `E ∘ P̃_A[θ] = θ` for `Π`-invariant `θ`, and
/// `P̃_A[Π (1 ⊗ σ) Π] = π_A ⊗ σ` for `σ` classical on `A′`.
pub fn verify_recovery_lemma(
    theta: &Matrix,
    sigma: &Matrix,
    d_a: usize,
    d_b: usize,
    z_basis: &[Vec<C64>],
    x_basis: &[Vec<C64>],
) -> Result<(f64, f64)> {
    let kraus = recovery_channel(z_basis, x_basis)?;
    let shape = SubsystemShape::new(vec![d_a, d_a, d_b])?;
    shape.check(theta.rows())?;
    SubsystemShape::bipartite(d_a, d_b).check(sigma.rows())?;
    let pi = copy_projector(z_basis).kron(&Matrix::identity(d_b));
    let inv = (&(&pi * theta) * &pi).max_abs_diff(theta);
    if inv > 1e-10 {
        return Err(Error::InvalidParameter(format!("θ is not Π-invariant (deviation {inv:.3e})")));
    }
    let classical = pinch_factor(sigma, &SubsystemShape::bipartite(d_a, d_b), 0, z_basis)?.max_abs_diff(sigma);
    if classical > 1e-10 {
        return Err(Error::InvalidParameter(format!("σ is not classical on A′ (deviation {classical:.3e})")));
    }
    let pinched = pinch_factor(theta, &shape, 0, x_basis)?;
    let r1 = apply_kraus(&kraus, &pinched, d_b).max_abs_diff(theta);
    let lifted = Matrix::identity(d_a).kron(sigma);
    let sandwiched = &(&pi * &lifted) * &pi;
    let lhs = pinch_factor(&sandwiched, &shape, 0, x_basis)?;
    let rhs = Matrix::identity(d_a).scale_re(1.0 / d_a as f64).kron(sigma);
    Ok((r1, lhs.max_abs_diff(&rhs)))
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub check: String,
    pub instance_seed: u64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerificationRecord {
    pub fn new(check: impl Into<String>, instance_seed: u64, residual: f64, tolerance: f64) -> Self {
        VerificationRecord {
            check: check.into(),
            instance_seed,
            residual,
            tolerance,
            pass: residual.is_finite() && residual <= tolerance,
        }
    }
}
