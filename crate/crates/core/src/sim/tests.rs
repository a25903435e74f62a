use super::*;
use crate::codes::{quantize_distribution, shaping_channel};
use crate::exponents::e0;
use crate::random::{random_density, random_distribution, seeded};

fn f2() -> PrimeField {
    PrimeField::new(2).unwrap()
}

#[test]
fn product_channel_basics() {
    let w = CQChannel::pure_pair(0.5).unwrap();
    let w1 = product_channel(&w, 1).unwrap();
    assert!(w1.outputs().iter().zip(w.outputs()).all(|(a, b)| a.matrix().max_abs_diff(b.matrix()) == 0.0));
    let w2 = product_channel(&w, 2).unwrap();
    let q = [0.5, 0.5];
    let qq = [0.25; 4];
    for s in [0.3, 1.0] {
        assert!((e0(s, &qq, &w2).unwrap() - 2.0 * e0(s, &q, &w).unwrap()).abs() < 1e-10);
    }
    let big = CQChannel::bsc(0.1).unwrap();
    assert!(matches!(product_channel(&big, 8), Err(Error::GuardExceeded { .. })));
}

#[test]
fn spectrum_growth_is_polynomial() {
    // |spec(ρ^{⊗n})| grows at most like (n+1)^{|spec(ρ)|−1}.
    let mut rng = seeded(61);
    let st = crate::random::random_cq_state(2, 2, &mut rng);
    let base = joint_spectrum_count(&st);
    for n in 1..=3 {
        let count = joint_spectrum_count(&product_state(&st, n).unwrap());
        assert!(count <= (n + 1).pow(base as u32 - 1), "n {n}: {count}");
    }
}

#[test]
fn trivial_codes() {
    let field = f2();
    // Orthogonal outputs and the full-rate code: perfect decoding.
    let w = CQChannel::bsc(0.0).unwrap();
    let w2 = product_channel(&w, 2).unwrap();
    let full = ToeplitzCodeSystem::new(field, 2, 2, vec![0], vec![]).unwrap();
    assert_eq!(code_error_exact(&w2, &full, Decoder::Optimal).unwrap(), 0.0);
    assert!(code_error_exact(&w2, &full, Decoder::Pgm).unwrap() < 1e-12);
    // Identical outputs: chance level.
    let useless = CQChannel::new(vec![DensityOperator::maximally_mixed(2); 2]).unwrap();
    let u2 = product_channel(&useless, 2).unwrap();
    let code = ToeplitzCodeSystem::new(field, 2, 1, vec![1], vec![0]).unwrap();
    assert!((code_error_exact(&u2, &code, Decoder::Optimal).unwrap() - 0.5).abs() < 1e-12);
    assert!((code_error_exact(&u2, &full, Decoder::Pgm).unwrap() - 0.75).abs() < 1e-12);
}

#[test]
fn bsc_code_matches_classical_ml() {
    let p: f64 = 0.1;
    let w3 = product_channel(&CQChannel::bsc(p).unwrap(), 3).unwrap();
    let field = f2();
    // Diagonals (1, 1) give the repetition code {000, 111}.
    let code = ToeplitzCodeSystem::new(field, 3, 1, vec![1, 1], vec![0, 0]).unwrap();
    assert_eq!(code.codewords(), vec![vec![0, 0, 0], vec![1, 1, 1]]);
    let words = code.codewords();
    let mut correct = 0.0;
    for y in 0..8u64 {
        let yw = field.word(y, 3);
        let like = |c: &[u64]| {
            c.iter()
                .zip(&yw)
                .map(|(a, b)| if a == b { 1.0 - p } else { p })
                .product::<f64>()
        };
        correct += 0.5 * words.iter().map(|c| like(c)).fold(0.0, f64::max);
    }
    let err = code_error_exact(&w3, &code, Decoder::Optimal).unwrap();
    assert!((err - (1.0 - correct)).abs() < 1e-12);
    assert!((err - (3.0 * p * p * (1.0 - p) + p.powi(3))).abs() < 1e-12);
}

#[test]
fn pgm_never_beats_optimal_and_fewer_messages_help() {
    let field = f2();
    let mut rng = seeded(62);
    for _ in 0..5 {
        let w = crate::random::random_channel(2, 2, &mut rng);
        let w3 = product_channel(&w, 3).unwrap();
        let diags = sample_diagonals(field, 3, 9, 0);
        let mut last = 0.0;
        for m in 0..=3 {
            let code = ToeplitzCodeSystem::new(field, 3, m, diags.clone(), vec![0; 3 - m]).unwrap();
            let opt = code_error_exact(&w3, &code, Decoder::Optimal).unwrap();
            let pgm = code_error_exact(&w3, &code, Decoder::Pgm).unwrap();
            assert!(pgm >= opt - 1e-9);
            assert!(opt >= last - 1e-9, "m {m}: {opt} < {last}");
            last = opt;
        }
    }
}

#[test]
fn coset_average_matches_joint_state() {
    let field = f2();
    let w = CQChannel::pure_pair(0.5).unwrap();
    for n in 2..=3 {
        let w_hat = product_channel(&w, n).unwrap();
        for t in 0..1u64 << (n - 1) {
            let diags = field.word(t, n - 1);
            let exp = coding_experiment(&w_hat, field, n, 1, &diags, Decoder::Optimal).unwrap();
            let code = ToeplitzCodeSystem::new(field, n, 1, diags, vec![0; n - 1]).unwrap();
            let joint = syndrome_averaged_error(&w_hat, &code, Decoder::Optimal).unwrap();
            assert!((exp.average_error - joint).abs() < 1e-10);
            assert_eq!(exp.coset_errors.len(), 1 << (n - 1));
        }
    }
}

#[test]
fn certificate_for_pure_pair() {
    let w2 = product_channel(&CQChannel::pure_pair(0.5).unwrap(), 2).unwrap();
    let cert = certify_affine_codes(&w2, 2, 2, 1, &default_s_grid(), 0, 0).unwrap();
    assert!(cert.exhaustive);
    assert_eq!(cert.codes_examined, 4);
    assert!(cert.pass && cert.gap >= 0.0, "{cert:?}");
    assert!(cert.pgm_best_error >= cert.best_error - 1e-9);
    let json = serde_json::to_string(&cert).unwrap();
    assert!(json.contains("\"pass\":true"));
}

#[test]
fn certificate_for_degenerate_channel() {
    let useless = CQChannel::new(vec![DensityOperator::maximally_mixed(2); 2]).unwrap();
    let w2 = product_channel(&useless, 2).unwrap();
    let cert = certify_affine_codes(&w2, 2, 2, 1, &default_s_grid(), 0, 0).unwrap();
    assert!(cert.max_rhs <= 0.0);
    assert!(cert.pass);
}

#[test]
fn certificate_for_shaped_channel() {
    let w = CQChannel::pure_pair(0.3).unwrap();
    let (map, _) = quantize_distribution(&[0.3, 0.7], 5).unwrap();
    let shaped = shaping_channel(&w, &map).unwrap();
    let cert = certify_affine_codes(&shaped, 5, 1, 0, &default_s_grid(), 0, 0).unwrap();
    assert!(cert.pass);
    assert_eq!(cert.best_error, 0.0);
    assert!(cert.best_exponent.is_infinite());
}

#[test]
fn pa_trivial_side_information_full_output() {
    // Uniform X, k = n: the hash is a bijection and the output is uniform.
    let st = classical_state(&[0.5, 0.5]).unwrap();
    let r = pa_experiment(&st, 2, 2, 2, &default_s_grid(), 0, 0).unwrap();
    assert!(r.mean_divergence.abs() < 1e-12);
    assert!(r.pass);
}

#[test]
fn pa_random_qubit_side_information() {
    let mut rng = seeded(63);
    for _ in 0..3 {
        let p = random_distribution(2, &mut rng);
        let conds = vec![random_density(2, 2, &mut rng), random_density(2, 1, &mut rng)];
        let st = CQState::new(p, conds).unwrap();
        let r = pa_experiment(&st, 2, 3, 1, &default_s_grid(), 0, 0).unwrap();
        assert_eq!(r.members_examined, 4);
        assert!(r.pass, "{r:?}");
        assert!(r.mean_purified_distance >= 0.0 && r.mean_purified_distance <= 1.0);
    }
}

#[test]
fn pa_classical_matches_direct_computation() {
    let p = [0.8, 0.2];
    let st = classical_state(&p).unwrap();
    let field = f2();
    let r = pa_experiment(&st, 2, 2, 1, &default_s_grid(), 0, 0).unwrap();
    // Direct: for each member, the distribution of G x and its divergence
    // from uniform.
    let mut total = 0.0;
    for t in 0..2u64 {
        let code = ToeplitzCodeSystem::new(field, 2, 1, field.word(t, 1), vec![0]).unwrap();
        let mut out = [0.0; 2];
        for x in 0..4u64 {
            let w = field.word(x, 2);
            out[code.hash(&w).unwrap()[0] as usize] += p[w[0] as usize] * p[w[1] as usize];
        }
        total += out.iter().filter(|&&v| v > 0.0).map(|&v| v * (2.0 * v).log2()).sum::<f64>();
    }
    assert!((r.mean_divergence - total / 2.0).abs() < 1e-12);
}

#[test]
fn dc_perfect_side_information() {
    let st = CQState::new(
        vec![0.3, 0.7],
        vec![DensityOperator::basis_state(2, 0), DensityOperator::basis_state(2, 1)],
    )
    .unwrap();
    let code = ToeplitzCodeSystem::new(f2(), 2, 1, vec![1], vec![0]).unwrap();
    let r = dc_experiment(&st, &code).unwrap();
    assert_eq!(r.error, 0.0);
    assert!(r.observed_exponent.is_infinite());
}

#[test]
fn dc_trivial_side_information_low_rate() {
    // Compressing a fair bit to nothing cannot work.
    let st = classical_state(&[0.5, 0.5]).unwrap();
    let code = ToeplitzCodeSystem::new(f2(), 2, 1, vec![1], vec![0]).unwrap();
    let r = dc_experiment(&st, &code).unwrap();
    assert!(r.converse_region);
    assert!((r.error - 0.5).abs() < 1e-12);
}

#[test]
fn dc_qubit_side_information_reports_slack() {
    let mut rng = seeded(64);
    let st = CQState::new(
        vec![0.5, 0.5],
        vec![random_density(2, 1, &mut rng), random_density(2, 1, &mut rng)],
    )
    .unwrap();
    let code = ToeplitzCodeSystem::new(f2(), 2, 1, vec![1], vec![0]).unwrap();
    let r = dc_experiment(&st, &code).unwrap();
    assert!(r.error >= 0.0 && r.error <= 1.0);
    assert!(r.slack.is_finite() || r.observed_exponent.is_infinite());
    assert!(serde_json::to_string(&r).is_ok());
}

#[test]
fn guards() {
    let st = classical_state(&[0.5, 0.5]).unwrap();
    assert!(matches!(product_state(&st, 15), Err(Error::GuardExceeded { .. })));
}
