//! Finite-dimensional operators and the spectral calculus on them.
//!
//! Conventions used throughout the crate:
//!
//! * eigenvalues at or below `1e-12 · λ_max` are treated as exact zeros;
//! * for power and logarithm kernels `0^t := 0` and `0 · log 0 := 0`, so
//!   negative powers act as generalized inverses on the support;
//! * logarithms are base two.

use crate::error::{Error, Result};
use crate::linalg::{eigh, vec_inner, vec_norm, Eigen, Matrix, C64, ZERO};

/// Relative threshold below which eigenvalues count as zero.
pub const ZERO_EIGENVALUE_REL: f64 = 1e-12;
/// Entrywise tolerance for Hermiticity checks on user input.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed negative eigenvalue for positive semidefinite operators.
pub const PSD_TOL: f64 = 1e-10;
/// Allowed deviation of the trace from its declared normalization.
pub const TRACE_TOL: f64 = 1e-10;

impl AsRef<Matrix> for Matrix {
    fn as_ref(&self) -> &Matrix {
        self
    }
}

/// Ordered tensor factors `d_0 ⊗ d_1 ⊗ …` describing a composite space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemShape {
    factors: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() || factors.contains(&0) {
            let dim = factors.iter().product();
            return Err(Error::InvalidShape { factors, dim });
        }
        Ok(SubsystemShape { factors })
    }

    pub fn bipartite(d_a: usize, d_b: usize) -> Self {
        SubsystemShape::new(vec![d_a, d_b]).expect("positive dimensions")
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::InvalidShape {
                factors: self.factors.clone(),
                dim,
            });
        }
        Ok(())
    }

    fn check_keep(&self, keep: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.factors.len()];
        for &k in keep {
            if k >= self.factors.len() || seen[k] {
                return Err(Error::InvalidParameter(format!(
                    "invalid subsystem index set {keep:?} for {} factors",
                    self.factors.len()
                )));
            }
            seen[k] = true;
        }
        Ok(())
    }
}

/// A square matrix equal to its adjoint.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    m: Matrix,
}

impl HermitianOperator {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() == 0 {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let dev = m.hermiticity_deviation();
        if dev > HERMITIAN_TOL * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(HermitianOperator {
            m: m.hermitian_part(),
        })
    }

    /// Wraps a matrix known to be Hermitian up to rounding; the Hermitian part
    /// is kept.
    pub fn from_hermitian_part(m: &Matrix) -> Self {
        HermitianOperator {
            m: m.hermitian_part(),
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn eigen(&self) -> Eigen {
        eigh(&self.m)
    }
}

impl AsRef<Matrix> for HermitianOperator {
    fn as_ref(&self) -> &Matrix {
        &self.m
    }
}

/// A positive semidefinite operator of unit trace, or of trace at most one
/// when constructed as subnormalized.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    op: HermitianOperator,
    normalized: bool,
}

impl DensityOperator {
    pub fn new(m: Matrix) -> Result<Self> {
        let rho = Self::validated(m)?;
        let t = rho.trace();
        if (t - 1.0).abs() > TRACE_TOL {
            return Err(Error::BadTrace { trace: t });
        }
        Ok(rho)
    }

    pub fn subnormalized(m: Matrix) -> Result<Self> {
        let mut rho = Self::validated(m)?;
        let t = rho.trace();
        if t > 1.0 + TRACE_TOL {
            return Err(Error::BadTrace { trace: t });
        }
        rho.normalized = (t - 1.0).abs() <= TRACE_TOL;
        Ok(rho)
    }

    fn validated(m: Matrix) -> Result<Self> {
        let op = HermitianOperator::new(m)?;
        let e = op.eigen();
        let scale = e.max_value().abs().max(1.0);
        if e.min_value() < -PSD_TOL * scale {
            return Err(Error::NotPositive {
                min_eigenvalue: e.min_value(),
            });
        }
        Ok(DensityOperator {
            op,
            normalized: true,
        })
    }

    /// Normalizes a positive semidefinite matrix by its trace.
    pub fn normalize(m: &Matrix) -> Result<Self> {
        let t = m.tr();
        if t <= 0.0 {
            return Err(Error::BadTrace { trace: t });
        }
        Self::new(m.scale_re(1.0 / t).hermitian_part())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::diagonal(&vec![1.0 / d as f64; d]).expect("valid diagonal state")
    }

    pub fn diagonal(p: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_diag(p))
    }

    pub fn pure(v: &PureStateVector) -> Self {
        DensityOperator {
            op: HermitianOperator::from_hermitian_part(&Matrix::projector(v.amplitudes())),
            normalized: true,
        }
    }

    /// Basis state `|i⟩⟨i|` in dimension `d`.
    pub fn basis_state(d: usize, i: usize) -> Self {
        let mut p = vec![0.0; d];
        p[i] = 1.0;
        Self::diagonal(&p).expect("valid basis state")
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn matrix(&self) -> &Matrix {
        self.op.matrix()
    }

    pub fn hermitian(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn trace(&self) -> f64 {
        self.op.matrix().tr()
    }

    pub fn eigen(&self) -> Eigen {
        self.op.eigen()
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            op: HermitianOperator::from_hermitian_part(&self.matrix().kron(other.matrix())),
            normalized: self.normalized && other.normalized,
        }
    }
}

impl AsRef<Matrix> for DensityOperator {
    fn as_ref(&self) -> &Matrix {
        self.op.matrix()
    }
}

/// A unit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVector {
    amplitudes: Vec<C64>,
}

impl PureStateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if amplitudes.is_empty() || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "state vector norm {norm} differs from 1"
            )));
        }
        Ok(PureStateVector { amplitudes })
    }

    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if norm == 0.0 {
            return Err(Error::InvalidParameter("zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|z| z / norm).collect())
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = vec![ZERO; d];
        v[i] = C64::new(1.0, 0.0);
        PureStateVector { amplitudes: v }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator::pure(self)
    }

    pub fn overlap(&self, other: &PureStateVector) -> C64 {
        vec_inner(&self.amplitudes, &other.amplitudes)
    }
}

fn zero_threshold(e: &Eigen) -> f64 {
    ZERO_EIGENVALUE_REL * e.max_value().abs().max(e.min_value().abs())
}

fn clipped_eigen(m: &Matrix) -> Eigen {
    let mut e = eigh(m);
    let thr = zero_threshold(&e);
    for v in e.values.iter_mut() {
        if *v <= thr {
            *v = 0.0;
        }
    }
    e
}

/// `U f(Λ) U†` for a positive semidefinite operator.
///
/// Eigenvalues at or below the zero threshold are passed to `f` as exact
/// zeros; negative eigenvalues beyond [`PSD_TOL`] are rejected.
pub fn spectral_transform(
    op: &HermitianOperator,
    f: impl Fn(f64) -> f64,
) -> Result<HermitianOperator> {
    let e = op.eigen();
    let scale = e.max_value().abs().max(1.0);
    if e.min_value() < -PSD_TOL * scale {
        return Err(Error::NotPositive {
            min_eigenvalue: e.min_value(),
        });
    }
    let thr = zero_threshold(&e);
    let out = e.reconstruct(|x| if x <= thr { f(0.0) } else { f(x) });
    Ok(HermitianOperator::from_hermitian_part(&out))
}

/// `A^t` of a positive semidefinite matrix with `0^t := 0` for every `t`.
pub fn psd_power(m: &Matrix, t: f64) -> Matrix {
    let e = clipped_eigen(m);
    e.reconstruct(|x| if x == 0.0 { 0.0 } else { x.powf(t) })
}

/// Base-two matrix logarithm restricted to the support (`log 0 := 0`).
pub fn psd_log2(m: &Matrix) -> Matrix {
    let e = clipped_eigen(m);
    e.reconstruct(|x| if x == 0.0 { 0.0 } else { x.log2() })
}

/// Projector onto the support of a positive semidefinite matrix.
pub fn support_projector(m: &Matrix) -> Matrix {
    let e = clipped_eigen(m);
    e.reconstruct(|x| if x == 0.0 { 0.0 } else { 1.0 })
}

/// `tr[A^t]` of a positive semidefinite matrix with `0^t := 0`.
pub fn trace_power(m: &Matrix, t: f64) -> f64 {
    clipped_eigen(m)
        .values
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x.powf(t))
        .sum()
}

/// Nonnegative eigenvalues of a PSD matrix after zero clipping.
pub fn psd_spectrum(m: &Matrix) -> Vec<f64> {
    clipped_eigen(m).values
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(m: &Matrix) -> f64 {
    psd_spectrum(m)
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

/// Decomposes a flat index into mixed-radix digits.
fn digits(mut idx: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = idx % dims[k];
        idx /= dims[k];
    }
}

fn compose(digits: &[usize], dims: &[usize], which: &[usize]) -> usize {
    which.iter().fold(0, |acc, &k| acc * dims[k] + digits[k])
}

/// Reduced operator on the factors in `keep` (in increasing factor order).
pub fn partial_trace(op: &impl AsRef<Matrix>, shape: &SubsystemShape, keep: &[usize]) -> Result<Matrix> {
    let op = op.as_ref();
    if !op.is_square() {
        return Err(Error::DimensionMismatch {
            expected: op.rows(),
            found: op.cols(),
        });
    }
    shape.check(op.rows())?;
    shape.check_keep(keep)?;
    let dims = shape.factors();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let d_keep: usize = kept.iter().map(|&k| dims[k]).product();
    let d_trace: usize = traced.iter().map(|&k| dims[k]).product();

    // Regroup the flat index as (kept, traced) once.
    let n = op.rows();
    let mut keep_idx = vec![0usize; n];
    let mut trace_idx = vec![0usize; n];
    let mut dig = vec![0usize; dims.len()];
    for i in 0..n {
        digits(i, dims, &mut dig);
        keep_idx[i] = compose(&dig, dims, &kept);
        trace_idx[i] = compose(&dig, dims, &traced);
    }
    let mut by_trace: Vec<Vec<usize>> = vec![Vec::new(); d_trace];
    for i in 0..n {
        by_trace[trace_idx[i]].push(i);
    }
    let mut out = Matrix::zeros(d_keep, d_keep);
    for group in &by_trace {
        for &i in group {
            for &j in group {
                out[(keep_idx[i], keep_idx[j])] += op[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Reduced state of a pure vector on the factors in `keep`.
pub fn reduced_from_vector(v: &[C64], shape: &SubsystemShape, keep: &[usize]) -> Result<Matrix> {
    shape.check(v.len())?;
    shape.check_keep(keep)?;
    let dims = shape.factors();
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !kept.contains(k)).collect();
    let d_keep: usize = kept.iter().map(|&k| dims[k]).product();
    let d_trace: usize = traced.iter().map(|&k| dims[k]).product();
    let mut grid = vec![ZERO; d_keep * d_trace];
    let mut dig = vec![0usize; dims.len()];
    for (i, &a) in v.iter().enumerate() {
        digits(i, dims, &mut dig);
        grid[compose(&dig, dims, &kept) * d_trace + compose(&dig, dims, &traced)] = a;
    }
    Ok(Matrix::from_fn(d_keep, d_keep, |i, j| {
        (0..d_trace)
            .map(|t| grid[i * d_trace + t] * grid[j * d_trace + t].conj())
            .sum()
    }))
}

/// Fidelity `‖ρ^{1/2} σ^{1/2}‖₁`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    Ok(fidelity_unchecked(rho.matrix(), sigma.matrix()))
}

/// Fidelity of two PSD matrices of equal dimension, without validation.
pub fn fidelity_unchecked(rho: &Matrix, sigma: &Matrix) -> f64 {
    let sqrt_rho = psd_power(rho, 0.5);
    let inner = sigma.conjugate_by(&sqrt_rho);
    psd_spectrum(&inner.hermitian_part())
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .sum()
}

/// A purification `|ρ⟩` on `system ⊗ ancilla`.
#[derive(Clone, Debug)]
pub struct Purification {
    pub vector: PureStateVector,
    pub system_dim: usize,
    pub ancilla_dim: usize,
}

impl Purification {
    pub fn shape(&self) -> SubsystemShape {
        SubsystemShape::bipartite(self.system_dim, self.ancilla_dim)
    }
}

/// Canonical purification `Σ_i √λ_i |e_i⟩|i⟩`.
///
/// Eigenvalues are sorted in decreasing order, the ancilla has dimension
/// equal to the rank, and the first non-negligible amplitude of every
/// eigenvector is made real positive.
pub fn purify(rho: &DensityOperator) -> Result<Purification> {
    if !rho.is_normalized() {
        return Err(Error::BadTrace { trace: rho.trace() });
    }
    let d = rho.dim();
    let e = clipped_eigen(rho.matrix());
    let mut order: Vec<usize> = (0..d).filter(|&i| e.values[i] > 0.0).collect();
    order.sort_by(|&i, &j| e.values[j].total_cmp(&e.values[i]).then(i.cmp(&j)));
    let rank = order.len().max(1);
    let mut amps = vec![ZERO; d * rank];
    for (col, &k) in order.iter().enumerate() {
        let mut vec = e.vectors.column(k);
        if let Some(first) = vec.iter().find(|z| z.norm() > 1e-10).copied() {
            let phase = first.conj() / first.norm();
            vec.iter_mut().for_each(|z| *z *= phase);
        }
        let w = e.values[k].sqrt();
        for i in 0..d {
            amps[i * rank + col] = vec[i] * w;
        }
    }
    Ok(Purification {
        vector: PureStateVector::normalized(amps)?,
        system_dim: d,
        ancilla_dim: rank,
    })
}

fn check_basis(basis: &[Vec<C64>], d: usize) -> Result<()> {
    if basis.len() != d || basis.iter().any(|b| b.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: basis.len(),
        });
    }
    let mut dev: f64 = 0.0;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((vec_inner(a, b) - target).norm());
        }
    }
    if dev > 1e-10 {
        return Err(Error::NotOrthonormal { deviation: dev });
    }
    Ok(())
}

/// `Σ_k |k⟩⟨k| op |k⟩⟨k|` for an orthonormal basis `{|k⟩}`.
pub fn pinch(op: &impl AsRef<Matrix>, basis: &[Vec<C64>]) -> Result<Matrix> {
    let op = op.as_ref();
    check_basis(basis, op.rows())?;
    let mut out = Matrix::zeros(op.rows(), op.cols());
    for b in basis {
        let ob = op.mul_vec(b);
        let c = vec_inner(b, &ob);
        for i in 0..b.len() {
            for j in 0..b.len() {
                out[(i, j)] += b[i] * c * b[j].conj();
            }
        }
    }
    Ok(out)
}

/// Pinches tensor factor `factor` of `op` in the given basis.
pub fn pinch_factor(
    op: &impl AsRef<Matrix>,
    shape: &SubsystemShape,
    factor: usize,
    basis: &[Vec<C64>],
) -> Result<Matrix> {
    let op = op.as_ref();
    shape.check(op.rows())?;
    let dims = shape.factors();
    if factor >= dims.len() {
        return Err(Error::InvalidParameter(format!("no factor {factor}")));
    }
    check_basis(basis, dims[factor])?;
    let left: usize = dims[..factor].iter().product();
    let right: usize = dims[factor + 1..].iter().product();
    let mut out = Matrix::zeros(op.rows(), op.cols());
    for b in basis {
        let proj = Matrix::identity(left)
            .kron(&Matrix::projector(b))
            .kron(&Matrix::identity(right));
        let term = &(&proj * op) * &proj;
        out.add_assign_scaled(&term, 1.0);
    }
    Ok(out)
}

/// The computational basis of dimension `d` as vectors.
pub fn computational_basis(d: usize) -> Vec<Vec<C64>> {
    (0..d)
        .map(|i| PureStateVector::basis(d, i).amplitudes().to_vec())
        .collect()
}

/// Number of distinct eigenvalues, clustering sorted eigenvalues whose
/// consecutive gap is at most `cluster_tol`.
pub fn spectrum_count(op: &HermitianOperator, cluster_tol: f64) -> usize {
    count_clusters(&op.eigen().values, cluster_tol)
}

/// Clusters an ascending list of eigenvalues by absolute gap.
pub fn count_clusters(sorted: &[f64], cluster_tol: f64) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    1 + sorted
        .windows(2)
        .filter(|w| w[1] - w[0] > cluster_tol)
        .count()
}

/// Default clustering tolerance for [`spectrum_count`].
pub const SPECTRUM_CLUSTER_TOL: f64 = 1e-9;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_pure, seeded};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn sqrt_of_diagonal() {
        let op = HermitianOperator::new(Matrix::from_diag(&[4.0, 1.0])).unwrap();
        let r = spectral_transform(&op, f64::sqrt).unwrap();
        assert!(r.matrix().max_abs_diff(&Matrix::from_diag(&[2.0, 1.0])) < 1e-14);
    }

    #[test]
    fn fractional_power_of_projector_is_projector() {
        let v = PureStateVector::normalized(vec![c(1.0), C64::new(0.5, -0.5), c(0.2)]).unwrap();
        let p = HermitianOperator::new(Matrix::projector(v.amplitudes())).unwrap();
        let r = spectral_transform(&p, |x| x.powf(0.3)).unwrap();
        assert!(r.matrix().max_abs_diff(p.matrix()) < 1e-12);
    }

    #[test]
    fn square_matches_matrix_product() {
        let mut rng = seeded(3);
        let rho = random_density(3, 3, &mut rng);
        let sq = spectral_transform(rho.hermitian(), |x| x * x).unwrap();
        let direct = rho.matrix() * rho.matrix();
        assert!(sq.matrix().max_abs_diff(&direct) < 1e-10);
    }

    #[test]
    fn identity_kernel_is_identity() {
        let mut rng = seeded(4);
        let rho = random_density(4, 2, &mut rng);
        let r = spectral_transform(rho.hermitian(), |x| x).unwrap();
        assert!(r.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn spectral_transform_rejects_negative_operators() {
        let op = HermitianOperator::new(Matrix::from_diag(&[1.0, -0.5])).unwrap();
        assert!(matches!(
            spectral_transform(&op, f64::sqrt),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = Matrix::from_real(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = seeded(5);
        let rho = random_density(2, 2, &mut rng);
        let sigma = random_density(3, 3, &mut rng);
        let joint = rho.kron(&sigma);
        let shape = SubsystemShape::bipartite(2, 3);
        let ra = partial_trace(&joint, &shape, &[0]).unwrap();
        let rb = partial_trace(&joint, &shape, &[1]).unwrap();
        assert!(ra.max_abs_diff(rho.matrix()) < 1e-12);
        assert!(rb.max_abs_diff(sigma.matrix()) < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let s = 1.0 / 2f64.sqrt();
        let bell = PureStateVector::new(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap();
        let shape = SubsystemShape::bipartite(2, 2);
        let rb = partial_trace(&bell.density(), &shape, &[1]).unwrap();
        assert!(rb.max_abs_diff(&Matrix::from_diag(&[0.5, 0.5])) < 1e-15);
        let rv = reduced_from_vector(bell.amplitudes(), &shape, &[0]).unwrap();
        assert!(rv.max_abs_diff(&Matrix::from_diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn partial_trace_matches_index_sum() {
        let mut rng = seeded(6);
        let rho = random_density(6, 6, &mut rng);
        let shape = SubsystemShape::bipartite(2, 3);
        let ra = partial_trace(&rho, &shape, &[0]).unwrap();
        let rb = partial_trace(&rho, &shape, &[1]).unwrap();
        let m = rho.matrix();
        for i in 0..2 {
            for j in 0..2 {
                let s: C64 = (0..3).map(|k| m[(i * 3 + k, j * 3 + k)]).sum();
                assert!((s - ra[(i, j)]).norm() < 1e-12);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let s: C64 = (0..2).map(|k| m[(k * 3 + i, k * 3 + j)]).sum();
                assert!((s - rb[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_composes() {
        let mut rng = seeded(7);
        let rho = random_density(12, 12, &mut rng);
        let shape = SubsystemShape::new(vec![2, 3, 2]).unwrap();
        let joint = partial_trace(&rho, &shape, &[0]).unwrap();
        let first = partial_trace(&rho, &shape, &[0, 1]).unwrap();
        let second = partial_trace(&first, &SubsystemShape::bipartite(2, 3), &[0]).unwrap();
        assert!(joint.max_abs_diff(&second) < 1e-12);
        // Trace preserved.
        assert!((joint.tr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_shape() {
        let rho = DensityOperator::maximally_mixed(4);
        let shape = SubsystemShape::bipartite(3, 2);
        assert!(partial_trace(&rho, &shape, &[0]).is_err());
    }

    #[test]
    fn fidelity_identities() {
        let mut rng = seeded(8);
        let rho = random_density(3, 3, &mut rng);
        assert!((fidelity(&rho, &rho).unwrap() - 1.0).abs() < 1e-10);
        let a = DensityOperator::basis_state(2, 0);
        let b = DensityOperator::basis_state(2, 1);
        assert!(fidelity(&a, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fidelity_of_pure_states_is_overlap() {
        let mut rng = seeded(9);
        for _ in 0..5 {
            let a = random_pure(3, &mut rng);
            let b = random_pure(3, &mut rng);
            let f = fidelity(&a.density(), &b.density()).unwrap();
            assert!((f - a.overlap(&b).norm()).abs() < 1e-10);
        }
    }

    #[test]
    fn fidelity_is_symmetric() {
        let mut rng = seeded(10);
        let rho = random_density(3, 2, &mut rng);
        let sigma = random_density(3, 3, &mut rng);
        let f1 = fidelity(&rho, &sigma).unwrap();
        let f2 = fidelity(&sigma, &rho).unwrap();
        assert!((f1 - f2).abs() < 1e-12);
        assert!(fidelity(&rho, &DensityOperator::maximally_mixed(2)).is_err());
    }

    #[test]
    fn purify_pure_state() {
        let mut rng = seeded(11);
        let v = random_pure(3, &mut rng);
        let p = purify(&v.density()).unwrap();
        assert_eq!(p.ancilla_dim, 1);
        assert!(p.vector.overlap(&v).norm() > 1.0 - 1e-10);
    }

    #[test]
    fn purify_maximally_mixed_qubit_is_bell_like() {
        let p = purify(&DensityOperator::maximally_mixed(2)).unwrap();
        assert_eq!(p.ancilla_dim, 2);
        let s = 1.0 / 2f64.sqrt();
        let schmidt = reduced_from_vector(p.vector.amplitudes(), &p.shape(), &[1]).unwrap();
        let e = eigh(&schmidt);
        assert!((e.values[0].sqrt() - s).abs() < 1e-12);
        assert!((e.values[1].sqrt() - s).abs() < 1e-12);
    }

    #[test]
    fn purify_round_trip() {
        let mut rng = seeded(12);
        let rho = random_density(3, 3, &mut rng);
        let p = purify(&rho).unwrap();
        let back = reduced_from_vector(p.vector.amplitudes(), &p.shape(), &[0]).unwrap();
        assert!(back.max_abs_diff(rho.matrix()) < 1e-10);
    }

    #[test]
    fn pinch_examples() {
        let d = Matrix::from_diag(&[0.3, 0.7]);
        let basis = computational_basis(2);
        assert!(pinch(&d, &basis).unwrap().max_abs_diff(&d) < 1e-15);
        let s = 1.0 / 2f64.sqrt();
        let plus = Matrix::projector(&[c(s), c(s)]);
        let pinched = pinch(&plus, &basis).unwrap();
        assert!(pinched.max_abs_diff(&Matrix::from_diag(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn pinch_is_idempotent_in_random_basis() {
        let mut rng = seeded(13);
        let rho = random_density(2, 2, &mut rng);
        let u = random_pure(2, &mut rng);
        let w = u.amplitudes();
        let perp = vec![-w[1].conj(), w[0].conj()];
        let basis = vec![w.to_vec(), perp];
        let once = pinch(rho.matrix(), &basis).unwrap();
        let twice = pinch(&once, &basis).unwrap();
        assert!(once.max_abs_diff(&twice) < 1e-12);
    }

    #[test]
    fn pinch_rejects_non_orthonormal_basis() {
        let basis = vec![vec![c(1.0), c(0.0)], vec![c(1.0), c(0.0)]];
        assert!(matches!(
            pinch(&Matrix::identity(2), &basis),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn pinch_factor_acts_on_one_tensor_factor() {
        let mut rng = seeded(14);
        let rho = random_density(4, 4, &mut rng);
        let shape = SubsystemShape::bipartite(2, 2);
        let p = pinch_factor(&rho, &shape, 0, &computational_basis(2)).unwrap();
        // Off-diagonal blocks in A vanish, diagonal blocks untouched.
        for i in 0..2 {
            for j in 0..2 {
                assert!(p[(i, 2 + j)].norm() < 1e-15);
                assert!((p[(i, j)] - rho.matrix()[(i, j)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn spectrum_counts() {
        let i4 = HermitianOperator::new(Matrix::identity(4)).unwrap();
        assert_eq!(spectrum_count(&i4, SPECTRUM_CLUSTER_TOL), 1);
        let d = HermitianOperator::new(Matrix::from_diag(&[0.0, 0.5, 0.5, 1.0])).unwrap();
        assert_eq!(spectrum_count(&d, SPECTRUM_CLUSTER_TOL), 3);
    }
}
