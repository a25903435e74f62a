//! Maximization of `−D̃_α(ρ_AB ‖ 1_A ⊗ σ_B)` over states `σ_B`.
//!
//! `σ = e^H / tr e^H` keeps iterates full rank on `supp(ρ_B)`, where the
//! optimum lies; the objective is smooth in `H` and is minimized with BFGS
//! using the analytic gradient (divided differences for both the power
//! `σ^{(1−α)/2α}` and the exponential).

use nalgebra::{DMatrix, DVector};

use super::{conditional_entropy, guessing_probability, renyi_from_trace, support_isometry, CQState, ConditionalState};
use crate::error::{Error, Result};
use crate::linalg::{eigh, Matrix, C64};

/// Iteration controls for the `H̃↑` optimizer.
#[derive(Clone, Copy, Debug)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Convergence threshold on the gradient norm of `log Q` in `H`.
    pub gradient_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iterations: 10_000,
            gradient_tol: 1e-10,
        }
    }
}

/// Result of the `H̃↑` maximization. The optimizer need not be unique; only
/// the value is meaningful.
#[derive(Clone, Debug)]
pub struct HUpResult {
    pub value: f64,
    pub sigma_b: Matrix,
    pub iterations: usize,
}

/// `H̃↑_α(A|B) = max_σ −D̃_α(ρ_AB ‖ 1_A ⊗ σ_B)` for `α ≥ 1/2`.
///
/// `α = 1` returns the conditional von Neumann entropy. `α = ∞` is only
/// available for CQ states through [`sandwiched_h_up_cq`].
pub fn sandwiched_h_up<S: ConditionalState>(state: &S, alpha: f64) -> Result<f64> {
    sandwiched_h_up_with(state, alpha, OptimizerConfig::default()).map(|r| r.value)
}

/// `H̃↑_α` for CQ states, including the min-entropy `α = ∞`, which is
/// evaluated as `−log P_guess`.
pub fn sandwiched_h_up_cq(state: &CQState, alpha: f64) -> Result<f64> {
    if alpha.is_infinite() && alpha > 0.0 {
        return Ok(-guessing_probability(state)?.log2());
    }
    sandwiched_h_up(state, alpha)
}

/// Hermitian coordinates in the orthonormal basis: diagonal units, then the
/// symmetric and antisymmetric pairs for `i < j`.
fn coords(a: &Matrix) -> DVector<f64> {
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
    DVector::from_vec(out)
}

fn from_coords(y: &DVector<f64>, d: usize) -> Matrix {
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

/// Divided difference `(f(a) − f(b)) / (a − b)` with the derivative on the
/// diagonal.
fn divided(a: f64, b: f64, fa: f64, fb: f64, deriv: impl Fn(f64) -> f64) -> f64 {
    if (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1e-300) {
        deriv(0.5 * (a + b))
    } else {
        (fa - fb) / (a - b)
    }
}

struct Problem<'a, S: ConditionalState> {
    state: &'a S,
    alpha: f64,
    d: usize,
}

impl<S: ConditionalState> Problem<'_, S> {
    /// `σ(H)` and its spectral data: eigenvalues of `H`, of `σ`, eigenvectors.
    fn sigma(&self, y: &DVector<f64>) -> (Vec<f64>, Vec<f64>, Matrix) {
        let e = eigh(&from_coords(y, self.d));
        let top = e.max_value();
        let w: Vec<f64> = e.values.iter().map(|h| (h - top).exp()).collect();
        let z: f64 = w.iter().sum();
        let p = w.iter().map(|x| x / z).collect();
        (e.values, p, e.vectors)
    }

    /// `log₂ Q(σ)` with `Q = Σ tr[(S ρ S)^α]`, `S = σ^γ`.
    fn log_q(&self, y: &DVector<f64>) -> f64 {
        let (_, p, v) = self.sigma(y);
        let gamma = (1.0 - self.alpha) / (2.0 * self.alpha);
        let s = v_diag_vt(&v, &p.iter().map(|x| x.powf(gamma)).collect::<Vec<_>>());
        let q: f64 = self
            .state
            .sandwich(&s)
            .iter()
            .map(|x| crate::operator::trace_power(x, self.alpha))
            .sum();
        q.log2()
    }

    /// Objective `sign(α−1) · log₂ Q` and its gradient in `H` coordinates.
    fn eval(&self, y: &DVector<f64>) -> (f64, DVector<f64>) {
        let a = self.alpha;
        let sign = if a > 1.0 { 1.0 } else { -1.0 };
        let (h, p, v) = self.sigma(y);
        let gamma = (1.0 - a) / (2.0 * a);
        let pg: Vec<f64> = p.iter().map(|x| x.powf(gamma)).collect();
        let s = v_diag_vt(&v, &pg);
        let lifted = self.state.lift(&s);
        let blocks = self.state.blocks();
        let mut q = 0.0;
        let mut bterms = Vec::with_capacity(blocks.len());
        for b in &blocks {
            let x = (&(&lifted * b) * &lifted).hermitian_part();
            let e = eigh(&x);
            let thr = crate::operator::ZERO_EIGENVALUE_REL * e.max_value().abs();
            q += e.values.iter().filter(|&&l| l > thr).map(|l| l.powf(a)).sum::<f64>();
            let xp = e.reconstruct(|l| if l > thr { l.powf(a - 1.0) } else { 0.0 });
            let t = &(b * &lifted) * &xp;
            bterms.push((&t + &t.adjoint()).scale_re(a));
        }
        let bmat = self.state.reduce(&bterms);
        // dQ = tr[B dS]; move to the eigenbasis of σ.
        let vd = v.adjoint();
        let bt = (&(&vd * &bmat) * &v).hermitian_part();
        let d = self.d;
        let mut g = Matrix::from_fn(d, d, |i, j| {
            let f1 = divided(p[i], p[j], pg[i], pg[j], |x| gamma * x.powf(gamma - 1.0));
            // Weights that underflowed to zero contribute nothing once the
            // exponential's derivative (a factor of order p) is applied.
            if f1.is_finite() { bt[(i, j)] * f1 } else { C64::new(0.0, 0.0) }
        });
        let shift: f64 = (0..d).map(|i| g[(i, i)].re * p[i]).sum();
        for i in 0..d {
            g[(i, i)] -= C64::new(shift, 0.0);
        }
        let grad_h = Matrix::from_fn(d, d, |i, j| {
            let psi = divided(h[i], h[j], p[i], p[j], |_| 0.5 * (p[i] + p[j]));
            g[(i, j)] * psi
        });
        let full = (&(&v * &grad_h) * &vd).hermitian_part();
        let scale = sign / (q * std::f64::consts::LN_2);
        (sign * q.log2(), coords(&full) * scale)
    }
}

fn v_diag_vt(v: &Matrix, diag: &[f64]) -> Matrix {
    let d = v.rows();
    let scaled = Matrix::from_fn(d, d, |i, j| v[(i, j)] * diag[j]);
    (&scaled * &v.adjoint()).hermitian_part()
}

/// BFGS with backtracking; returns the minimizer, objective and iterations.
fn bfgs<S: ConditionalState>(
    prob: &Problem<'_, S>,
    start: DVector<f64>,
    config: OptimizerConfig,
) -> (DVector<f64>, f64, usize, bool) {
    let n = start.len();
    let mut x = start;
    let (mut f, mut g) = prob.eval(&x);
    let mut hinv = DMatrix::<f64>::identity(n, n);
    for it in 0..config.max_iterations {
        if g.norm() <= config.gradient_tol {
            return (x, f, it, true);
        }
        let mut dir = -(&hinv * &g);
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            hinv = DMatrix::identity(n, n);
            dir = -g.clone();
            slope = g.dot(&dir);
        }
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-16 {
            let cand = &x + &dir * step;
            let (fc, gc) = prob.eval(&cand);
            if fc.is_finite() && fc <= f + 1e-4 * step * slope {
                accepted = Some((cand, fc, gc));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gn)) = accepted else {
            // No decrease is possible at machine precision.
            return (x, f, it, g.norm() <= 1e-6);
        };
        let s = &xn - &x;
        let yv = &gn - &g;
        let sy = s.dot(&yv);
        if sy > 1e-300 {
            let rho = 1.0 / sy;
            let hy = &hinv * &yv;
            let yhy = yv.dot(&hy);
            hinv += (&s * s.transpose()) * (rho * rho * yhy + rho) - (&hy * s.transpose() + &s * hy.transpose()) * rho;
        }
        let stalled = (f - fnew).abs() <= 1e-16 * f.abs().max(1.0) && s.norm() <= 1e-13;
        x = xn;
        f = fnew;
        g = gn;
        if stalled {
            return (x, f, it + 1, g.norm() <= 1e-6);
        }
    }
    let ok = g.norm() <= 1e-6;
    (x, f, config.max_iterations, ok)
}

/// Starts from `ρ_B` and the maximally mixed state on `supp(ρ_B)`.
pub fn sandwiched_h_up_with<S: ConditionalState>(
    state: &S,
    alpha: f64,
    config: OptimizerConfig,
) -> Result<HUpResult> {
    if alpha == 1.0 {
        return Ok(HUpResult {
            value: conditional_entropy(state),
            sigma_b: state.marginal_b(),
            iterations: 0,
        });
    }
    if !(alpha >= 0.5) || alpha.is_infinite() {
        return Err(Error::InvalidOrder { alpha });
    }
    let v = support_isometry(&state.marginal_b());
    let reduced = state.compress(&v);
    let d = v.cols();
    let prob = Problem {
        state: &reduced,
        alpha,
        d,
    };
    let rb = reduced.marginal_b();
    let log_rb = crate::operator::psd_log2(&rb.scale_re(1.0 / rb.tr())).scale_re(std::f64::consts::LN_2);
    let starts = [coords(&log_rb), DVector::zeros(d * d)];

    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut iterations = 0;
    let mut all_failed = true;
    for start in starts {
        let (mut x, _, mut it, mut ok) = bfgs(&prob, start, config);
        // A stale inverse Hessian can stall the line search near optima on
        // the boundary of the state space; restart from the last point.
        for _ in 0..4 {
            if ok {
                break;
            }
            let (x2, _, it2, ok2) = bfgs(&prob, x, config);
            x = x2;
            it += it2;
            ok = ok2;
        }
        iterations += it;
        all_failed &= !ok;
        let value = -renyi_from_trace(2f64.powf(prob.log_q(&x)), alpha);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, x));
        }
    }
    let (value, x) = best.expect("two starts");
    if all_failed {
        return Err(Error::NotConverged {
            what: "sandwiched H-up optimizer",
            iterations,
            best: value,
            lower: value,
            upper: f64::INFINITY,
        });
    }
    let (_, p, vecs) = prob.sigma(&x);
    let sigma = v_diag_vt(&vecs, &p);
    Ok(HUpResult {
        value,
        sigma_b: (&(&v * &sigma) * &v.adjoint()).hermitian_part(),
        iterations,
    })
}
