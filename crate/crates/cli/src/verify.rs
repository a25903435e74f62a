//! Seeded self-checks of the duality relations and library invariants.

use cqrel::codes::{exact_collision_probability, PrimeField};
use cqrel::duality::{
    build_dual_state, copy_unitary, duality_check, fourier_basis, kraus_completeness, pguess_fidelity_check,
    recovery_channel, uncertainty_check, Relation, VerificationRecord,
};
use cqrel::exponents::e0_entropy_identity_check;
use cqrel::linalg::C64;
use cqrel::random::{random_channel, random_density, seeded};
use rand::Rng;

use crate::CliError;

pub const DUALITY_CLOSED_TOL: f64 = 1e-6;
pub const DUALITY_OPTIMIZER_TOL: f64 = 1e-5;
pub const BUNDLE_TOL: f64 = 1e-10;
pub const PGUESS_TOL: f64 = 1e-5;
pub const KRAUS_TOL: f64 = 1e-12;
pub const UNCERTAINTY_TOL: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-9;
pub const COLLISION_TOL: f64 = 1e-12;

const BUNDLES: u64 = 4;
const TRIPARTITE: u64 = 6;
const CHANNELS: u64 = 3;

fn instance(seed: u64, suite: u64, i: u64) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(suite * 1000 + i)
}

fn residual(r: cqrel::Result<f64>) -> f64 {
    r.unwrap_or(f64::INFINITY)
}

/// Runs every suite; the order of the records is fixed for a given seed.
pub fn run(seed: u64) -> Result<Vec<VerificationRecord>, CliError> {
    let mut out = Vec::new();

    for i in 0..BUNDLES {
        let s = instance(seed, 1, i);
        let mut rng = seeded(s);
        let d_a = 2 + (i % 2) as usize;
        let d_c = 1 + (i % 3) as usize;
        let rank = rng.random_range(1..=d_a * d_c);
        let rho_ac = random_density(d_a * d_c, rank, &mut rng);
        let bundle = build_dual_state(&rho_ac, d_a, d_c).map_err(|e| CliError::Assertion(e.to_string()))?;
        out.push(VerificationRecord::new("dual_state_projector", s, bundle.projector_residual(), BUNDLE_TOL));
        out.push(VerificationRecord::new(
            "dual_state_marginal",
            s,
            residual(bundle.marginal_residual(&rho_ac)),
            BUNDLE_TOL,
        ));
        for alpha in [0.6, 2.0] {
            out.push(VerificationRecord::new(
                format!("duality_petz_sandwiched[alpha={alpha}]"),
                s,
                residual(duality_check(&bundle, alpha, Relation::PetzUpSandDown)),
                DUALITY_CLOSED_TOL,
            ));
        }
        for alpha in [0.75, 2.0, f64::INFINITY] {
            out.push(VerificationRecord::new(
                format!("duality_sandwiched_sandwiched[alpha={alpha}]"),
                s,
                residual(duality_check(&bundle, alpha, Relation::SandUpSandUp)),
                DUALITY_OPTIMIZER_TOL,
            ));
        }
        let pf = pguess_fidelity_check(&bundle).map(|r| r.residual);
        out.push(VerificationRecord::new("pguess_fidelity", s, residual(pf), PGUESS_TOL));
    }

    for d in [2usize, 3] {
        let s = instance(seed, 2, d as u64);
        let z: Vec<Vec<C64>> = (0..d)
            .map(|i| (0..d).map(|j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
            .collect();
        let kraus = recovery_channel(&z, &fourier_basis(d)).map(|k| kraus_completeness(&k));
        out.push(VerificationRecord::new(format!("recovery_kraus[d={d}]"), s, residual(kraus), KRAUS_TOL));
        let u = copy_unitary(d);
        let unitarity = (&u * &u.adjoint()).max_abs_diff(&cqrel::linalg::Matrix::identity(d * d));
        out.push(VerificationRecord::new(format!("copy_unitary[d={d}]"), s, unitarity, KRAUS_TOL));
    }

    for i in 0..TRIPARTITE {
        let s = instance(seed, 3, i);
        let mut rng = seeded(s);
        let rank = rng.random_range(1..=8);
        let rho = random_density(8, rank, &mut rng);
        for (name, alpha, relation) in [
            ("uncertainty_petz_sandwiched", 2.0, Relation::PetzUpSandDown),
            ("uncertainty_sandwiched_sandwiched", 2.0, Relation::SandUpSandUp),
        ] {
            let slack = uncertainty_check(&rho, [2, 2, 2], alpha, relation).map(|v| (-v).max(0.0));
            out.push(VerificationRecord::new(name, s, residual(slack), UNCERTAINTY_TOL));
        }
    }

    for i in 0..CHANNELS {
        let s = instance(seed, 4, i);
        let mut rng = seeded(s);
        let w = random_channel(2 + (i % 2) as usize, 2, &mut rng);
        for sv in [0.3, 1.0] {
            out.push(VerificationRecord::new(
                format!("e0_entropy_identity[s={sv}]"),
                s,
                residual(e0_entropy_identity_check(sv, &w)),
                IDENTITY_TOL,
            ));
        }
    }

    for (i, (q, n, k)) in [(2u64, 4usize, 2usize), (3, 3, 1)].into_iter().enumerate() {
        let s = instance(seed, 5, i as u64);
        let mut rng = seeded(s);
        let field = PrimeField::new(q).map_err(|e| CliError::Assertion(e.to_string()))?;
        let x1: Vec<u64> = (0..n).map(|_| rng.random_range(0..q)).collect();
        let mut x2 = x1.clone();
        let j = rng.random_range(0..n);
        x2[j] = (x2[j] + rng.random_range(1..q)) % q;
        let excess = exact_collision_probability(field, n, k, &x1, &x2).map(|p| (p - (q as f64).powi(-(k as i32))).max(0.0));
        out.push(VerificationRecord::new(format!("two_universal[q={q},n={n},k={k}]"), s, residual(excess), COLLISION_TOL));
    }

    Ok(out)
}
