//! Gallager's auxiliary function `E0` and the exponent bounds built from it:
//! random coding, sphere packing, the one-shot affine-code bounds, and the
//! compression and privacy-amplification exponents.

pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::channel::CQChannel;
use crate::entropy::{check_distribution, petz_h_up, sandwiched_h_down, CQState};
use crate::error::{Error, Result};
use crate::linalg::{eigh, Matrix};
use crate::operator::{
    count_clusters, psd_power, support_projector, trace_power, von_neumann_entropy, SPECTRUM_CLUSTER_TOL,
};

/// Default cap for the sphere-packing sup over `s ≥ 0` and the privacy
/// amplification sup over `α ≥ 1`.
pub const DEFAULT_CAP: f64 = 64.0;
/// Values at or below this are reported as vacuous.
pub const VACUOUS_TOL: f64 = 1e-12;

const E0_REL_GAP: f64 = 1e-13;
const E0_MAX_ITERATIONS: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    RandomCoding,
    SpherePacking,
    DcLower,
    DcSp,
    DcSpRefined,
    PaUpper,
    PaRefined,
    Hayashi,
}

/// Serializes `±∞` as the strings `"inf"` / `"-inf"` so JSON stays valid.
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("not a number: {t}"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    /// Grid resolution of the outer scan over `s` or `α`.
    pub grid_step: f64,
    /// Tolerance of the final one-dimensional refinement.
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// One point of an exponent curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub kind: BoundKind,
    pub rate: f64,
    /// Reported exponent, clamped at zero.
    #[serde(with = "ext_real")]
    pub value: f64,
    /// Value before clamping.
    #[serde(with = "ext_real")]
    pub raw_value: f64,
    /// Optimizing `s` (channel coding) or `α` (compression, privacy amplification).
    #[serde(with = "ext_real")]
    pub optimizer: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer_p: Option<Vec<f64>>,
    pub vacuous: bool,
    /// The sup was not attained inside the search range.
    pub diverged: bool,
    pub metadata: ReportMetadata,
}

impl ExponentReport {
    fn new(kind: BoundKind, rate: f64, raw: f64, optimizer: f64, grid_step: f64) -> Self {
        ExponentReport {
            kind,
            rate,
            value: raw.max(0.0),
            raw_value: raw,
            optimizer,
            optimizer_p: None,
            vacuous: !(raw > VACUOUS_TOL),
            diverged: false,
            metadata: ReportMetadata {
                grid_step,
                tolerance: GOLDEN_TOL,
                note: None,
            },
        }
    }
}

fn check_input(p: &[f64], w: &CQChannel) -> Result<()> {
    if p.len() != w.inputs() {
        return Err(Error::DimensionMismatch {
            expected: w.inputs(),
            found: p.len(),
        });
    }
    check_distribution(p)
}

/// `E0(s, P, W) = −log tr[(Σ_x P(x) φ(x)^{1/(1+s)})^{1+s}]`; exactly zero at `s = 0`.
pub fn e0(s: f64, p: &[f64], w: &CQChannel) -> Result<f64> {
    check_input(p, w)?;
    if !(s > -1.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("s = {s} must be finite and > -1")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let powered = powered_outputs(w, s);
    Ok(-trace_power(&mix(&powered, p), 1.0 + s).log2())
}

fn powered_outputs(w: &CQChannel, s: f64) -> Vec<Matrix> {
    let beta = 1.0 / (1.0 + s);
    w.outputs().iter().map(|o| psd_power(o.matrix(), beta)).collect()
}

fn mix(ms: &[Matrix], p: &[f64]) -> Matrix {
    let d = ms[0].rows();
    let mut m = Matrix::zeros(d, d);
    for (x, &px) in ms.iter().zip(p) {
        if px != 0.0 {
            m.add_assign_scaled(x, px);
        }
    }
    m
}

/// `F(P) = tr M^{1+s}` and `∂F/∂P(x) = (1+s) tr[M^s φ(x)^{1/(1+s)}]`.
fn e0_objective(powered: &[Matrix], s: f64) -> impl Fn(&[f64]) -> (f64, Vec<f64>) + '_ {
    move |p: &[f64]| {
        let m = mix(powered, p);
        let e = eigh(&m);
        let thr = crate::operator::ZERO_EIGENVALUE_REL * e.max_value().abs();
        let f: f64 = e.values.iter().filter(|&&l| l > thr).map(|l| l.powf(1.0 + s)).sum();
        let ms = e.reconstruct(|l| if l > thr { l.powf(s) } else { 0.0 });
        let g = powered.iter().map(|x| (1.0 + s) * ms.trace_product(x).re).collect();
        (f, g)
    }
}

/// Maximizer of `E0(s, ·, W)` over input distributions.
#[derive(Clone, Debug)]
pub struct E0Max {
    pub value: f64,
    pub p: Vec<f64>,
    /// Certified bound on the distance of `value` from the true maximum.
    pub value_gap: f64,
}

/// `max_P E0(s, P, W)` for `s ≥ 0`.
///
/// `tr[(Σ P φ^{1/(1+s)})^{1+s}]` is convex in `P`, so projected gradient
/// descent on it converges globally; the Frank–Wolfe gap certifies the
/// result. The run starts from the uniform distribution.
pub fn e0_max_over_p(s: f64, w: &CQChannel) -> Result<E0Max> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("s = {s} must be finite and ≥ 0")));
    }
    let n = w.inputs();
    let uniform = vec![1.0 / n as f64; n];
    if s == 0.0 {
        return Ok(E0Max {
            value: 0.0,
            p: uniform,
            value_gap: 0.0,
        });
    }
    let powered = powered_outputs(w, s);
    let r = simplex::minimize(e0_objective(&powered, s), uniform, E0_REL_GAP, E0_MAX_ITERATIONS);
    let value_gap = r.gap / (r.value * std::f64::consts::LN_2);
    if value_gap > 1e-6 {
        return Err(Error::NotConverged {
            what: "E0 maximization over P",
            iterations: r.iterations,
            best: -r.value.log2(),
            lower: -r.value.log2(),
            upper: -r.value.log2() + value_gap,
        });
    }
    Ok(E0Max {
        value: -r.value.log2(),
        p: r.point,
        value_gap,
    })
}

/// Holevo information `I(X:B) = H(Σ P φ) − Σ P H(φ)`.
pub fn holevo_information(p: &[f64], w: &CQChannel) -> Result<f64> {
    check_input(p, w)?;
    let avg = w.average_output(p);
    let cond: f64 = p
        .iter()
        .zip(w.outputs())
        .map(|(px, o)| px * von_neumann_entropy(o.matrix()))
        .sum();
    Ok(von_neumann_entropy(&avg) - cond)
}

/// Holevo capacity by the Blahut–Arimoto iteration
/// `P(x) ← P(x) 2^{D(φ(x)‖ρ_P)}`, stopped when `max_x D(φ(x)‖ρ_P) − I(P)`
/// (an upper bound on the remaining gap) is below `1e-10`.
pub fn holevo_capacity(w: &CQChannel) -> Result<(f64, Vec<f64>)> {
    let n = w.inputs();
    let mut p = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let avg = w.average_output(&p);
        let ds: Vec<f64> = w
            .outputs()
            .iter()
            .map(|o| crate::entropy::umegaki_relative_entropy(o, &avg))
            .collect::<Result<_>>()?;
        let info: f64 = p.iter().zip(&ds).map(|(a, d)| a * d).sum();
        let top = ds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if top - info <= 1e-10 {
            return Ok((info, p));
        }
        let mut next: Vec<f64> = p.iter().zip(&ds).map(|(a, d)| a * (d - top).exp2()).collect();
        let z: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= z);
        p = next;
    }
    let info = holevo_information(&p, w)?;
    Ok((info, p))
}

/// `|E0(s, Q, W) − s(log|Z| − H̄↑_{1/(1+s)}(Z|B))|` for the uniform input `Q`.
pub fn e0_entropy_identity_check(s: f64, w: &CQChannel) -> Result<f64> {
    let n = w.inputs();
    let q = vec![1.0 / n as f64; n];
    let lhs = e0(s, &q, w)?;
    if s == 0.0 {
        return Ok(lhs.abs());
    }
    let state = w.cq_state(&q)?;
    let rhs = s * ((n as f64).log2() - petz_h_up(&state, 1.0 / (1.0 + s))?);
    Ok((lhs - rhs).abs())
}

const GOLDEN_TOL: f64 = 1e-10;

/// Golden-section maximization on `[a, b]`.
fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > GOLDEN_TOL * (1.0 + a.abs().max(b.abs())) {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Best grid point, refined by golden section between its neighbours.
/// Returns `(argmax, max, index of the best grid point)`.
fn grid_then_golden(f: &dyn Fn(f64) -> f64, grid: &[f64]) -> (f64, f64, usize) {
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let (i, &v) = values
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, x| if *x.1 > *acc.1 { x } else { acc });
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let (x, fx) = golden_max(f, lo, hi);
    if fx > v {
        (x, fx, i)
    } else {
        (grid[i], v, i)
    }
}

fn is_unimodal(values: &[f64]) -> bool {
    let tol = 1e-12;
    let mut descending = false;
    for w in values.windows(2) {
        if w[1] < w[0] - tol {
            descending = true;
        } else if descending && w[1] > w[0] + tol {
            return false;
        }
    }
    true
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

struct SSup {
    s: f64,
    value: f64,
    p: Vec<f64>,
    fallback: bool,
}

/// `sup_{s ∈ [0,1]} max_P E0(s, P, W) − sR`: a 21-point scan with golden
/// refinement, or a dense scan (step 1e-3) when the scan is not unimodal.
fn sup_unit_interval(w: &CQChannel, r: f64) -> Result<SSup> {
    let err = std::cell::RefCell::new(None);
    let f = |s: f64| match e0_max_over_p(s, w) {
        Ok(m) => m.value - s * r,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NEG_INFINITY
        }
    };
    let coarse = linspace(0.0, 1.0, 21);
    let scan: Vec<f64> = coarse.iter().map(|&s| f(s)).collect();
    let fallback = !is_unimodal(&scan);
    let (s, value, _) = if fallback {
        grid_then_golden(&f, &linspace(0.0, 1.0, 1001))
    } else {
        grid_then_golden(&f, &coarse)
    };
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    let p = e0_max_over_p(s, w)?.p;
    Ok(SSup { s, value, p, fallback })
}

/// Random-coding lower bound `sup_{s∈[0,1]} E0(s, W) − sR`.
///
/// The bound is clamped at zero and flagged vacuous when it is not positive
/// or when `R` is at least the Holevo capacity.
pub fn random_coding_bound(w: &CQChannel, r: f64) -> Result<ExponentReport> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("rate {r} must be ≥ 0")));
    }
    let sup = sup_unit_interval(w, r)?;
    let mut rep = ExponentReport::new(BoundKind::RandomCoding, r, sup.value, sup.s, if sup.fallback { 1e-3 } else { 0.05 });
    // Capacity estimate: Holevo information at the E0-optimal input.
    let cap = holevo_information(&sup.p, w)?;
    if r > cap {
        rep.vacuous = true;
        rep.metadata.note = Some(format!("rate above the capacity estimate {cap:.6}"));
    }
    rep.optimizer_p = Some(sup.p);
    Ok(rep)
}

fn common_support(w: &CQChannel) -> Option<Matrix> {
    let p0 = support_projector(w.output(0).matrix());
    w.outputs()[1..]
        .iter()
        .all(|o| support_projector(o.matrix()).max_abs_diff(&p0) < 1e-9)
        .then_some(p0)
}

/// Rate below which the sphere-packing bound is infinite,
/// `R_∞ = max_P −log λ_max(Σ_x P(x) Π_x)` with `Π_x` the support projectors.
///
/// Returns `None` when the supports share a common vector (`R_∞ = 0`). The
/// maximization is carried out on the smooth surrogate `tr M^k` for growing
/// `k`; the returned value is evaluated exactly at the final `P` and is
/// therefore a certified lower bound on `R_∞`.
pub fn zero_error_threshold(w: &CQChannel) -> Option<f64> {
    let projs: Vec<Matrix> = w.outputs().iter().map(|o| support_projector(o.matrix())).collect();
    let n = projs.len();
    let uniform = vec![1.0 / n as f64; n];
    if eigh(&mix(&projs, &uniform)).max_value() >= 1.0 - 1e-9 {
        return None;
    }
    // Minimize the Schatten k-norm of Σ P Π_x (convex in P) for growing k.
    let mut p = uniform;
    let mut k = 8.0;
    while k <= 4096.0 {
        let f = |q: &[f64]| {
            let e = eigh(&mix(&projs, q));
            let top = e.max_value();
            let sum: f64 = e.values.iter().map(|l| (l.max(0.0) / top).powf(k)).sum();
            let mk = e.reconstruct(|l| (l.max(0.0) / top).powf(k - 1.0));
            let scale = sum.powf((1.0 - k) / k);
            let g = projs.iter().map(|x| scale * mk.trace_product(x).re).collect();
            (top * sum.powf(1.0 / k), g)
        };
        p = simplex::minimize(f, p, 1e-12, 2_000).point;
        k *= 4.0;
    }
    Some(-eigh(&mix(&projs, &p)).max_value().log2())
}

/// `lim_{s→∞} max_P E0(s, P, W) = max_P −log tr exp(Σ_x P(x) ln φ(x))` for
/// channels whose outputs share one support, computed on that support.
pub fn e0_limit(w: &CQChannel) -> Result<E0Max> {
    let proj = common_support(w).ok_or_else(|| Error::InvalidParameter("outputs do not share a support".into()))?;
    let v = crate::entropy::support_isometry(&proj);
    let vd = v.adjoint();
    let logs: Vec<Matrix> = w
        .outputs()
        .iter()
        .map(|o| {
            let m = (&(&vd * o.matrix()) * &v).hermitian_part();
            eigh(&m).reconstruct(|l| l.max(f64::MIN_POSITIVE).ln())
        })
        .collect();
    let f = |p: &[f64]| {
        let k = mix(&logs, p);
        let ek = eigh(&k).reconstruct(f64::exp);
        let val = ek.tr();
        let g = logs.iter().map(|l| ek.trace_product(l).re).collect();
        (val, g)
    };
    let n = w.inputs();
    let r = simplex::minimize(f, vec![1.0 / n as f64; n], E0_REL_GAP, E0_MAX_ITERATIONS);
    Ok(E0Max {
        value: -r.value.log2(),
        p: r.point,
        value_gap: r.gap / (r.value * std::f64::consts::LN_2),
    })
}

/// Sphere-packing upper bound `sup_{s≥0} E0(s, W) − sR`, searched on
/// `[0, s_max]`.
///
/// When the objective is still increasing at `s_max`: rates below the
/// zero-error-like threshold give `+∞`; at `R = 0` with a common output
/// support the exact limit `s → ∞` is returned; otherwise the capped value
/// is reported with `diverged = true`.
pub fn sphere_packing_bound(w: &CQChannel, r: f64, s_max: f64) -> Result<ExponentReport> {
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter(format!("rate {r} must be ≥ 0")));
    }
    if !(s_max >= 1.0) {
        return Err(Error::InvalidParameter(format!("s_max = {s_max} must be ≥ 1")));
    }
    let low = sup_unit_interval(w, r)?;
    let err = std::cell::RefCell::new(None);
    let f = |s: f64| match e0_max_over_p(s, w) {
        Ok(m) => m.value - s * r,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NEG_INFINITY
        }
    };
    // Geometric grid on [1, s_max].
    let mut grid = vec![1.0];
    while *grid.last().expect("nonempty") < s_max {
        let next = (grid.last().expect("nonempty") * 1.25).min(s_max);
        grid.push(next);
    }
    let (s_hi, v_hi, idx) = grid_then_golden(&f, &grid);
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    let (s_best, v_best, p_best) = if v_hi > low.value {
        (s_hi, v_hi, e0_max_over_p(s_hi, w)?.p)
    } else {
        (low.s, low.value, low.p)
    };
    let mut rep = ExponentReport::new(BoundKind::SpherePacking, r, v_best, s_best, 0.05);
    rep.optimizer_p = Some(p_best);

    let at_cap = idx == grid.len() - 1 && f(s_max) > f(s_max * (1.0 - 1e-3)) && v_hi >= low.value;
    if at_cap {
        if let Some(r_inf) = zero_error_threshold(w).filter(|&ri| r < ri) {
            rep.value = f64::INFINITY;
            rep.raw_value = f64::INFINITY;
            rep.vacuous = false;
            rep.diverged = true;
            rep.optimizer = f64::INFINITY;
            rep.metadata.note = Some(format!("rate below the zero-error-like threshold {r_inf:.6}"));
        } else if r == 0.0 && common_support(w).is_some() {
            let lim = e0_limit(w)?;
            rep.value = lim.value.max(0.0);
            rep.raw_value = lim.value;
            rep.vacuous = !(lim.value > VACUOUS_TOL);
            rep.optimizer = f64::INFINITY;
            rep.optimizer_p = Some(lim.p);
            rep.metadata.note = Some("sup attained as s → ∞; exact limit".into());
        } else {
            rep.diverged = true;
            rep.metadata.note = Some(format!("objective still increasing at s_max = {s_max}; capped value"));
        }
    }
    Ok(rep)
}

/// Right-hand side of the one-shot affine-code bound:
/// `E0(s, Q, Ŵ) − s·m·log q − s·log ν − log(1/s)` with `Q` uniform, code size
/// `q^m` and `ν = |spec(ρ_ZB)|`.
pub fn affine_code_bound(w_hat: &CQChannel, q: u64, m: usize, s: f64, spec_count: usize) -> Result<f64> {
    check_unit_s(s)?;
    let n = w_hat.inputs();
    let uniform = vec![1.0 / n as f64; n];
    let e = e0(s, &uniform, w_hat)?;
    Ok(e - s * m as f64 * (q as f64).log2() - s * (spec_count as f64).log2() + s.log2())
}

/// The entropic form `s(n−k) log q − s H̄↑_{1/(1+s)}(Z|B) − s log ν − log(1/s)`
/// of the same bound, for a state `ρ_ZB` on `q^n` symbols and code size `q^k`.
pub fn affine_code_bound_entropic(state: &CQState, q: u64, n: usize, k: usize, s: f64, spec_count: usize) -> Result<f64> {
    check_unit_s(s)?;
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds n = {n}")));
    }
    let h = petz_h_up(state, 1.0 / (1.0 + s))?;
    Ok(s * (n - k) as f64 * (q as f64).log2() - s * h - s * (spec_count as f64).log2() + s.log2())
}

fn check_unit_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidParameter(format!("s = {s} must lie in (0, 1]")));
    }
    Ok(())
}

/// Number of distinct nonzero eigenvalues (clusters at `1e-9`). The kernel
/// is left out: pinching only ever acts on the support.
pub fn support_spectrum_count(values: &[f64]) -> usize {
    let top = values.iter().copied().fold(0.0, f64::max);
    let mut pos: Vec<f64> = values
        .iter()
        .copied()
        .filter(|&l| l > crate::operator::ZERO_EIGENVALUE_REL * top)
        .collect();
    pos.sort_by(f64::total_cmp);
    count_clusters(&pos, SPECTRUM_CLUSTER_TOL)
}

/// `|spec(ρ_ZB)|`, counted as in [`support_spectrum_count`].
pub fn joint_spectrum_count(state: &CQState) -> usize {
    let all: Vec<f64> = state
        .weighted_blocks()
        .iter()
        .flat_map(|b| eigh(b).values)
        .collect();
    support_spectrum_count(&all)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DcMode {
    /// `max_{α∈[1/2,1]} (1−α)/α (R − H̄↑_α(Z|B))`.
    Lower,
    /// The same expression with `α ∈ (0, 1]`.
    SpherePacking,
    /// Sphere packing plus `½(1+|E'|) log n / n + K/n`; `K` must be supplied.
    SpRefined { n: usize, k_const: f64 },
}

const ALPHA_STEP: f64 = 1e-3;

fn alpha_grid(lo: f64, hi: f64) -> Vec<f64> {
    let n = ((hi - lo) / ALPHA_STEP).round() as usize;
    linspace(lo, hi, n + 1)
}

fn dc_objective(state: &CQState, r: f64, alpha: f64) -> f64 {
    if alpha >= 1.0 {
        return 0.0;
    }
    let h = petz_h_up(state, alpha).unwrap_or(f64::NAN);
    (1.0 - alpha) / alpha * (r - h)
}

fn dc_raw(state: &CQState, r: f64, lower: bool) -> (f64, f64, bool) {
    let f = |a: f64| dc_objective(state, r, a);
    let grid = if lower { alpha_grid(0.5, 1.0) } else { alpha_grid(ALPHA_STEP, 1.0) };
    let (a, v, idx) = grid_then_golden(&f, &grid);
    let boundary = !lower && idx == 0 && f(ALPHA_STEP) > f(2.0 * ALPHA_STEP);
    (a, v, boundary)
}

/// Data-compression exponent bounds for `Z` given quantum side information.
pub fn dc_exponent_bounds(state: &CQState, r_dc: f64, mode: DcMode) -> Result<ExponentReport> {
    if !(r_dc >= 0.0) {
        return Err(Error::InvalidParameter(format!("rate {r_dc} must be ≥ 0")));
    }
    match mode {
        DcMode::Lower => {
            let (a, v, _) = dc_raw(state, r_dc, true);
            Ok(ExponentReport::new(BoundKind::DcLower, r_dc, v, a, ALPHA_STEP))
        }
        DcMode::SpherePacking => {
            let (a, v, boundary) = dc_raw(state, r_dc, false);
            let mut rep = ExponentReport::new(BoundKind::DcSp, r_dc, v, a, ALPHA_STEP);
            if boundary {
                rep.diverged = true;
                rep.metadata.note = Some("sup at the lower end of the α grid".into());
            }
            Ok(rep)
        }
        DcMode::SpRefined { n, k_const } => {
            if n == 0 || !k_const.is_finite() {
                return Err(Error::InvalidParameter("refined bound needs n ≥ 1 and a finite K".into()));
            }
            let (a, v, boundary) = dc_raw(state, r_dc, false);
            let h = 1e-4;
            let up = dc_raw(state, r_dc + h, false).1.max(0.0);
            let down = dc_raw(state, (r_dc - h).max(0.0), false).1.max(0.0);
            let deriv = (up - down) / (r_dc + h - (r_dc - h).max(0.0));
            let nf = n as f64;
            let raw = v.max(0.0) + 0.5 * (1.0 + deriv.abs()) * nf.log2() / nf + k_const / nf;
            let mut rep = ExponentReport::new(BoundKind::DcSpRefined, r_dc, raw, a, ALPHA_STEP);
            rep.diverged = boundary;
            rep.metadata.note = Some(format!("asymptotic regime assumed; E' = {deriv:.9}"));
            Ok(rep)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PaMode {
    /// `sup_{α∈[1, α_max]} (α−1)(H̃↓_α(X|C) − R)`.
    Asymptotic,
    /// `½E + ¼(1+|E'|) log n / n + K/n`; `K` must be supplied.
    Refined { n: usize, k_const: f64 },
}

fn pa_raw(state: &CQState, r: f64, alpha_max: f64) -> (f64, f64, bool) {
    // Scan in 1/α so the grid mirrors the compression side.
    let f = |inv: f64| {
        if inv >= 1.0 {
            return 0.0;
        }
        let alpha = 1.0 / inv;
        (alpha - 1.0) * (sandwiched_h_down(state, alpha).unwrap_or(f64::NAN) - r)
    };
    let lo = 1.0 / alpha_max;
    let (inv, v, idx) = grid_then_golden(&f, &alpha_grid_from(lo));
    let boundary = idx == 0 && f(lo) > f(lo + ALPHA_STEP);
    (1.0 / inv, v, boundary)
}

fn alpha_grid_from(lo: f64) -> Vec<f64> {
    let mut g = vec![lo];
    let mut x = (lo / ALPHA_STEP).ceil() * ALPHA_STEP;
    if x <= lo {
        x += ALPHA_STEP;
    }
    while x < 1.0 - 1e-12 {
        g.push(x);
        x += ALPHA_STEP;
    }
    g.push(1.0);
    g
}

/// Privacy-amplification exponent (sphere-packing form) for extracting from
/// `X` against side information `C`.
pub fn pa_exponent_bounds(state: &CQState, r_pa: f64, mode: PaMode, alpha_max: f64) -> Result<ExponentReport> {
    if !(r_pa >= 0.0) {
        return Err(Error::InvalidParameter(format!("rate {r_pa} must be ≥ 0")));
    }
    if !(alpha_max > 1.0) {
        return Err(Error::InvalidParameter(format!("α_max = {alpha_max} must exceed 1")));
    }
    let (a, v, boundary) = pa_raw(state, r_pa, alpha_max);
    match mode {
        PaMode::Asymptotic => {
            let mut rep = ExponentReport::new(BoundKind::PaUpper, r_pa, v, a, ALPHA_STEP);
            if boundary {
                rep.diverged = true;
                rep.metadata.note = Some(format!("sup at α_max = {alpha_max}"));
            }
            Ok(rep)
        }
        PaMode::Refined { n, k_const } => {
            if n == 0 || !k_const.is_finite() {
                return Err(Error::InvalidParameter("refined bound needs n ≥ 1 and a finite K".into()));
            }
            let h = 1e-4;
            let up = pa_raw(state, r_pa + h, alpha_max).1.max(0.0);
            let down = pa_raw(state, (r_pa - h).max(0.0), alpha_max).1.max(0.0);
            let deriv = (up - down) / (r_pa + h - (r_pa - h).max(0.0));
            let nf = n as f64;
            let raw = 0.5 * v.max(0.0) + 0.25 * (1.0 + deriv.abs()) * nf.log2() / nf + k_const / nf;
            let mut rep = ExponentReport::new(BoundKind::PaRefined, r_pa, raw, a, ALPHA_STEP);
            rep.diverged = boundary;
            rep.metadata.note = Some(format!("asymptotic regime assumed; E' = {deriv:.9}"));
            Ok(rep)
        }
    }
}

/// Right-hand side of the leftover-hash bound
/// `E_f D(ρ_{X̂E} ‖ π ⊗ ρ_E) ≤ (1/s) ν^s |X̂|^s 2^{−s H̃↓_{1+s}(X|E)}`.
///
/// The inequality `ln(1+x) ≤ x^s / s` behind it bounds the divergence in
/// nats; `bits` is the same bound divided by `ln 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HayashiBound {
    pub s: f64,
    pub nats: f64,
    pub bits: f64,
}

pub fn hayashi_pa_bound(rho_xe: &CQState, hash_range: u64, s: f64) -> Result<HayashiBound> {
    check_unit_s(s)?;
    if hash_range == 0 {
        return Err(Error::InvalidParameter("hash range must be positive".into()));
    }
    let rho_e = rho_xe.marginal_b();
    let nu = support_spectrum_count(&eigh(&rho_e).values) as f64;
    let h = sandwiched_h_down(rho_xe, 1.0 + s)?;
    let nats = (s * (nu.log2() + (hash_range as f64).log2() - h)).exp2() / s;
    Ok(HayashiBound {
        s,
        nats,
        bits: nats / std::f64::consts::LN_2,
    })
}
