//! Optimal guessing probability `P_guess(Z|B) = max_Π Σ_z P(z) tr[Π_z φ(z)]`.
//!
//! Two symbols use the Helstrom formula and commuting diagonal ensembles the
//! classical maximum-likelihood rule. Otherwise the pretty good measurement
//! seeds a fixed-point ascent over POVMs; every candidate is checked against
//! a dual feasible point `Y ≥ P(z)φ(z)`, so the result is a certified
//! bracket. Small problems that stall fall back to a log-barrier method on
//! the dual problem.

use nalgebra::DMatrix;

use super::CQState;
use crate::error::{Error, Result};
use crate::linalg::{eigh, Matrix, C64};
use crate::operator::psd_power;

/// Largest certified gap accepted as convergence.
pub const GUESS_GAP_TOL: f64 = 1e-6;
/// Gap at which the iterations stop early.
const TARGET_GAP: f64 = 1e-11;
const ASCENT_ITERATIONS: usize = 5_000;
/// The barrier fallback is used up to this (compressed) dimension.
const BARRIER_MAX_DIM: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuessMethod {
    Trivial,
    Classical,
    Helstrom,
    Ascent,
    Barrier,
}

/// Primal POVM together with the certified bracket `lower ≤ P_guess ≤ upper`.
#[derive(Clone, Debug)]
pub struct GuessCertificate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub povm: Vec<Matrix>,
    pub method: GuessMethod,
}

pub fn guessing_probability(state: &CQState) -> Result<f64> {
    guessing_probability_certified(state).map(|c| c.value)
}

/// `½ (tr A + tr B + ‖A − B‖₁)` for subnormalized `A = P(0)φ(0)`, `B = P(1)φ(1)`.
pub fn helstrom(a: &Matrix, b: &Matrix) -> f64 {
    let e = eigh(&(a - b));
    0.5 * (a.tr() + b.tr() + e.values.iter().map(|x| x.abs()).sum::<f64>())
}

/// Pretty good measurement `S^{-1/2} A_z S^{-1/2}` with `S = Σ_z A_z`,
/// inverted on the support of `S`.
pub fn pretty_good_measurement(blocks: &[Matrix]) -> Vec<Matrix> {
    let d = blocks[0].rows();
    let mut s = Matrix::zeros(d, d);
    for b in blocks {
        s.add_assign_scaled(b, 1.0);
    }
    let r = psd_power(&s, -0.5);
    blocks.iter().map(|b| b.conjugate_by(&r).hermitian_part()).collect()
}

fn success(blocks: &[Matrix], povm: &[Matrix]) -> f64 {
    blocks.iter().zip(povm).map(|(b, p)| b.trace_product(p).re).sum()
}

/// Dual value of `Y = herm(Σ A_z Π_z)` shifted by the largest violation.
fn dual_bound(blocks: &[Matrix], povm: &[Matrix]) -> f64 {
    let d = blocks[0].rows();
    let mut y = Matrix::zeros(d, d);
    for (b, p) in blocks.iter().zip(povm) {
        y.add_assign_scaled(&(b * p), 1.0);
    }
    let y = y.hermitian_part();
    let shift = blocks
        .iter()
        .map(|b| eigh(&(b - &y)).max_value())
        .fold(0.0_f64, f64::max);
    y.tr() + d as f64 * shift
}

pub fn guessing_probability_certified(state: &CQState) -> Result<GuessCertificate> {
    let blocks = state.weighted_blocks();
    let d = state.dim_b();
    if blocks.len() == 1 {
        return Ok(GuessCertificate {
            value: 1.0,
            lower: 1.0,
            upper: 1.0,
            povm: vec![Matrix::identity(d)],
            method: GuessMethod::Trivial,
        });
    }
    if blocks.iter().all(is_diagonal) {
        return Ok(classical(&blocks));
    }
    if blocks.len() == 2 {
        let e = eigh(&(&blocks[0] - &blocks[1]));
        let p0 = e.reconstruct(|x| if x > 0.0 { 1.0 } else { 0.0 });
        let p1 = &Matrix::identity(d) - &p0;
        let v = helstrom(&blocks[0], &blocks[1]);
        return Ok(GuessCertificate {
            value: v,
            lower: v,
            upper: v,
            povm: vec![p0, p1],
            method: GuessMethod::Helstrom,
        });
    }

    // Everything happens on the support of Σ_z A_z.
    let v = super::support_isometry(&state.marginal_b());
    let vd = v.adjoint();
    let small: Vec<Matrix> = blocks
        .iter()
        .map(|b| (&(&vd * b) * &v).hermitian_part())
        .collect();

    let mut cert = ascent(&small);
    if cert.upper - cert.lower > TARGET_GAP && v.cols() <= BARRIER_MAX_DIM {
        if let Some(b) = barrier(&small) {
            if b.upper - b.lower < cert.upper - cert.lower {
                cert = b;
            }
        }
    }
    // Lift the POVM back; the complement of the support goes to symbol 0.
    let complement = &Matrix::identity(d) - &(&v * &vd);
    let mut povm: Vec<Matrix> = cert.povm.iter().map(|p| &(&v * p) * &vd).collect();
    povm[0] = &povm[0] + &complement;
    cert.povm = povm;

    if cert.upper - cert.lower > GUESS_GAP_TOL {
        return Err(Error::NotConverged {
            what: "guessing probability",
            iterations: ASCENT_ITERATIONS,
            best: cert.value,
            lower: cert.lower,
            upper: cert.upper,
        });
    }
    Ok(cert)
}

fn is_diagonal(m: &Matrix) -> bool {
    let d = m.rows();
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    (0..d).all(|i| (0..d).all(|j| i == j || m[(i, j)].norm() <= 1e-14 * scale))
}

fn classical(blocks: &[Matrix]) -> GuessCertificate {
    let d = blocks[0].rows();
    let mut povm = vec![vec![0.0; d]; blocks.len()];
    let mut v = 0.0;
    for b in 0..d {
        let (z, w) = blocks
            .iter()
            .enumerate()
            .map(|(z, m)| (z, m[(b, b)].re))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        povm[z][b] = 1.0;
        v += w;
    }
    GuessCertificate {
        value: v,
        lower: v,
        upper: v,
        povm: povm.iter().map(|p| Matrix::from_diag(p)).collect(),
        method: GuessMethod::Classical,
    }
}

/// Iterates `Π_z ← G^{-1/2} A_z Π_z A_z G^{-1/2}` with `G = Σ_z A_z Π_z A_z`
/// from the pretty good measurement, keeping the best certified iterate.
pub(super) fn ascent(blocks: &[Matrix]) -> GuessCertificate {
    let mut povm = pretty_good_measurement(blocks);
    let mut lower = success(blocks, &povm);
    let mut upper = dual_bound(blocks, &povm);
    let mut best = povm.clone();
    for it in 0..ASCENT_ITERATIONS {
        let terms: Vec<Matrix> = blocks
            .iter()
            .zip(&povm)
            .map(|(a, p)| (&(a * p) * a).hermitian_part())
            .collect();
        let d = blocks[0].rows();
        let mut g = Matrix::zeros(d, d);
        for t in &terms {
            g.add_assign_scaled(t, 1.0);
        }
        let r = psd_power(&g, -0.5);
        povm = terms.iter().map(|t| t.conjugate_by(&r).hermitian_part()).collect();
        // The support of G can shrink; restore completeness.
        let mut total = Matrix::zeros(d, d);
        for p in &povm {
            total.add_assign_scaled(p, 1.0);
        }
        let fix = psd_power(&total, -0.5);
        povm = povm.iter().map(|p| p.conjugate_by(&fix).hermitian_part()).collect();

        let value = success(blocks, &povm);
        if value > lower {
            lower = value;
            best = povm.clone();
        }
        if it % 10 == 9 {
            upper = upper.min(dual_bound(blocks, &povm));
            if upper - lower <= TARGET_GAP {
                break;
            }
        }
    }
    upper = upper.min(dual_bound(blocks, &best));
    GuessCertificate {
        value: 0.5 * (lower + upper),
        lower,
        upper: upper.max(lower),
        povm: best,
        method: GuessMethod::Ascent,
    }
}

/// Orthonormal Hermitian basis: diagonal units, then for `i < j` the
/// symmetric and antisymmetric off-diagonal pairs.
fn coords(a: &Matrix) -> Vec<f64> {
    let d = a.rows();
    let s2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(a[(i, i)].re);
    }
    for i in 0..d {
        for j in (i + 1)..d {
            out.push(s2 * a[(i, j)].re);
            out.push(s2 * a[(i, j)].im);
        }
    }
    out
}

fn from_coords(y: &[f64], d: usize) -> Matrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = C64::new(y[i], 0.0);
    }
    let mut k = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = C64::new(y[k] * h, y[k + 1] * h);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// `W E_l W` for every basis element `E_l`, as coordinate columns.
fn hessian_add(w: &Matrix, h: &mut DMatrix<f64>) {
    let d = w.rows();
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let outer = |i: usize, j: usize| Matrix::from_fn(d, d, |a, b| w[(a, i)] * w[(j, b)]);
    let mut l = 0;
    let push = |m: Matrix, l: usize, h: &mut DMatrix<f64>| {
        for (k, v) in coords(&m).into_iter().enumerate() {
            h[(k, l)] += v;
        }
    };
    for i in 0..d {
        push(outer(i, i), l, h);
        l += 1;
    }
    for i in 0..d {
        for j in (i + 1)..d {
            let (a, b) = (outer(i, j), outer(j, i));
            push((&a + &b).scale_re(s2), l, h);
            push((&a - &b).scale(C64::new(0.0, s2)), l + 1, h);
            l += 2;
        }
    }
}

/// Eigen-inverse and log-determinant of `Y − A`, or `None` if not positive.
fn slack(y: &Matrix, a: &Matrix) -> Option<(Matrix, f64)> {
    let e = eigh(&(y - a));
    if e.min_value() <= 0.0 {
        return None;
    }
    let logdet = e.values.iter().map(|x| x.ln()).sum();
    Some((e.reconstruct(|x| 1.0 / x), logdet))
}

/// Path-following on `min tr Y − (1/t) Σ_z log det(Y − A_z)`; the primal
/// POVM is read off the central path as `(Y − A_z)^{-1} / t`.
pub(super) fn barrier(blocks: &[Matrix]) -> Option<GuessCertificate> {
    let d = blocks[0].rows();
    let m = blocks.len();
    let n = d * d;
    let top = blocks
        .iter()
        .map(|b| eigh(b).max_value())
        .fold(0.0_f64, f64::max);
    let mut y = coords(&Matrix::identity(d).scale_re(top + 1.0));
    let mut t = (m * d) as f64;
    let mut best: Option<GuessCertificate> = None;

    let objective = |y: &[f64], t: f64| -> Option<f64> {
        let ym = from_coords(y, d);
        let mut f = t * ym.tr();
        for b in blocks {
            f -= slack(&ym, b)?.1;
        }
        Some(f)
    };

    for _outer in 0..40 {
        for _newton in 0..100 {
            let ym = from_coords(&y, d);
            let mut g = vec![0.0; n];
            for gi in g.iter_mut().take(d) {
                *gi = t;
            }
            let mut h = DMatrix::<f64>::zeros(n, n);
            for b in blocks {
                let (w, _) = slack(&ym, b)?;
                for (gk, c) in g.iter_mut().zip(coords(&w)) {
                    *gk -= c;
                }
                hessian_add(&w, &mut h);
            }
            let rhs = nalgebra::DVector::from_iterator(n, g.iter().map(|x| -x));
            let step = match h.clone().cholesky() {
                Some(c) => c.solve(&rhs),
                None => h.lu().solve(&rhs)?,
            };
            let dec: f64 = -g.iter().zip(step.iter()).map(|(a, b)| a * b).sum::<f64>();
            if dec / 2.0 < 1e-14 {
                break;
            }
            let f0 = objective(&y, t)?;
            let mut s = 1.0;
            loop {
                let cand: Vec<f64> = y.iter().zip(step.iter()).map(|(a, b)| a + s * b).collect();
                if let Some(f) = objective(&cand, t) {
                    if f <= f0 - 0.25 * s * dec {
                        y = cand;
                        break;
                    }
                }
                s *= 0.5;
                if s < 1e-12 {
                    break;
                }
            }
            if s < 1e-12 {
                break;
            }
        }

        let ym = from_coords(&y, d);
        let mut povm = Vec::with_capacity(m);
        for b in blocks {
            povm.push(slack(&ym, b)?.0.scale_re(1.0 / t));
        }
        let mut total = Matrix::zeros(d, d);
        for p in &povm {
            total.add_assign_scaled(p, 1.0);
        }
        let fix = psd_power(&total, -0.5);
        let povm: Vec<Matrix> = povm.iter().map(|p| p.conjugate_by(&fix).hermitian_part()).collect();
        let lower = success(blocks, &povm);
        let upper = ym.tr();
        let cert = GuessCertificate {
            value: 0.5 * (lower + upper),
            lower,
            upper,
            povm,
            method: GuessMethod::Barrier,
        };
        let gap = upper - lower;
        if best.as_ref().is_none_or(|b| gap < b.upper - b.lower) {
            best = Some(cert);
        }
        if gap <= TARGET_GAP || (m * d) as f64 / t < 1e-13 {
            break;
        }
        t *= 8.0;
    }
    best
}
