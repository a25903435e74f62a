//! Classical-quantum channels `x ↦ φ_B(x)` and their tensor powers.

use serde::{Deserialize, Serialize};

use crate::entropy::CQState;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, C64};
use crate::operator::{DensityOperator, PureStateVector};

/// A CQ channel given by its list of output states.
#[derive(Clone, Debug)]
pub struct CQChannel {
    outputs: Vec<DensityOperator>,
    dim_b: usize,
}

impl CQChannel {
    pub fn new(outputs: Vec<DensityOperator>) -> Result<Self> {
        let dim_b = outputs
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel without inputs".into()))?
            .dim();
        for o in &outputs {
            if o.dim() != dim_b {
                return Err(Error::DimensionMismatch {
                    expected: dim_b,
                    found: o.dim(),
                });
            }
            if !o.is_normalized() {
                return Err(Error::BadTrace { trace: o.trace() });
            }
        }
        Ok(CQChannel { outputs, dim_b })
    }

    /// Binary symmetric channel embedded as diagonal qubit states.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("crossover {p} not in [0, 1]")));
        }
        Self::new(vec![
            DensityOperator::diagonal(&[1.0 - p, p])?,
            DensityOperator::diagonal(&[p, 1.0 - p])?,
        ])
    }

    /// Two pure qubit outputs `(cos θ, ± sin θ)` with overlap `cos 2θ = c`.
    pub fn pure_pair(c: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!("overlap {c} not in [-1, 1]")));
        }
        let theta = 0.5 * c.acos();
        let (co, si) = (theta.cos(), theta.sin());
        let a = PureStateVector::new(vec![C64::new(co, 0.0), C64::new(si, 0.0)])?;
        let b = PureStateVector::new(vec![C64::new(co, 0.0), C64::new(-si, 0.0)])?;
        Self::new(vec![a.density(), b.density()])
    }

    /// `|0⟩` and `|+⟩` sent through a depolarizing channel
    /// `v ↦ (1 − p)|v⟩⟨v| + p 1/2`.
    pub fn depolarized_pair(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("noise {p} not in [0, 1]")));
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = PureStateVector::new(vec![C64::new(h, 0.0), C64::new(h, 0.0)])?;
        let mix = |v: &PureStateVector| {
            let mut m = v.density().matrix().scale_re(1.0 - p);
            m.add_assign_scaled(&Matrix::identity(2), 0.5 * p);
            DensityOperator::new(m)
        };
        Self::new(vec![mix(&PureStateVector::basis(2, 0))?, mix(&plus)?])
    }

    pub fn inputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn outputs(&self) -> &[DensityOperator] {
        &self.outputs
    }

    pub fn output(&self, x: usize) -> &DensityOperator {
        &self.outputs[x]
    }

    /// Parallel use `x y ↦ φ(x) ⊗ ψ(y)`, inputs indexed `x · |Y| + y`.
    pub fn kron(&self, other: &CQChannel) -> CQChannel {
        let outputs = self
            .outputs
            .iter()
            .flat_map(|a| other.outputs.iter().map(move |b| a.kron(b)))
            .collect();
        CQChannel {
            outputs,
            dim_b: self.dim_b * other.dim_b,
        }
    }

    /// The `n`-fold tensor power, inputs indexed by base-`|X|` words with the
    /// first letter most significant. `limit` bounds `|X|^n · d_B^n`.
    pub fn power(&self, n: usize, limit: u128) -> Result<CQChannel> {
        if n == 0 {
            return Err(Error::InvalidParameter("blocklength must be positive".into()));
        }
        let size = (self.inputs() as u128)
            .checked_pow(n as u32)
            .and_then(|a| (self.dim_b as u128).checked_pow(n as u32).and_then(|b| a.checked_mul(b)))
            .unwrap_or(u128::MAX);
        if size > limit {
            return Err(Error::GuardExceeded { size, limit });
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.kron(self);
        }
        Ok(out)
    }

    /// The CQ state `Σ_x P(x) |x⟩⟨x| ⊗ φ(x)`.
    pub fn cq_state(&self, prior: &[f64]) -> Result<CQState> {
        CQState::new(prior.to_vec(), self.outputs.clone())
    }

    /// `Σ_x P(x) φ(x)`.
    pub fn average_output(&self, prior: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.dim_b, self.dim_b);
        for (p, o) in prior.iter().zip(&self.outputs) {
            m.add_assign_scaled(o.matrix(), *p);
        }
        m
    }

    pub fn to_spec(&self, prior: Option<Vec<f64>>) -> ChannelSpec {
        ChannelSpec {
            format_version: 1,
            inputs: self.inputs(),
            dim_b: self.dim_b,
            states: self
                .outputs
                .iter()
                .map(|o| {
                    let m = o.matrix();
                    (0..self.dim_b)
                        .map(|i| (0..self.dim_b).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                        .collect()
                })
                .collect(),
            prior,
        }
    }
}

/// JSON description of a channel: one `dim_b × dim_b` matrix of `[re, im]`
/// pairs per input, and an optional input distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub format_version: u32,
    pub inputs: usize,
    pub dim_b: usize,
    pub states: Vec<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
}

impl ChannelSpec {
    pub fn to_channel(&self) -> Result<CQChannel> {
        if self.format_version != 1 {
            return Err(Error::InvalidParameter(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        if self.states.len() != self.inputs {
            return Err(Error::DimensionMismatch {
                expected: self.inputs,
                found: self.states.len(),
            });
        }
        let d = self.dim_b;
        let mut outputs = Vec::with_capacity(self.inputs);
        for s in &self.states {
            if s.len() != d || s.iter().any(|r| r.len() != d) {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.len(),
                });
            }
            let m = Matrix::from_fn(d, d, |i, j| C64::new(s[i][j][0], s[i][j][1]));
            outputs.push(DensityOperator::new(m)?);
        }
        if let Some(p) = &self.prior {
            crate::entropy::check_distribution(p)?;
            if p.len() != self.inputs {
                return Err(Error::DimensionMismatch {
                    expected: self.inputs,
                    found: p.len(),
                });
            }
        }
        CQChannel::new(outputs)
    }
}
