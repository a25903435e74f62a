//! Composition shaping: approximating an input distribution by multiples of
//! `1/q` and realizing it as the image of the uniform distribution on `F_q`.

use serde::{Deserialize, Serialize};

use super::field::PrimeField;
use crate::channel::CQChannel;
use crate::entropy::check_distribution;
use crate::error::{Error, Result};

/// `b : F_q → {0, …, r−1}` sending the first `w_0` field elements to 0, the
/// next `w_1` to 1, and so on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShapingMap {
    pub q: u64,
    pub weights: Vec<u64>,
}

impl ShapingMap {
    pub fn new(q: u64, weights: Vec<u64>) -> Result<Self> {
        PrimeField::new(q)?;
        if weights.iter().sum::<u64>() != q {
            return Err(Error::InvalidParameter(format!("weights {weights:?} do not sum to q = {q}")));
        }
        Ok(ShapingMap { q, weights })
    }

    pub fn r(&self) -> usize {
        self.weights.len()
    }

    pub fn apply(&self, z: u64) -> usize {
        let mut acc = 0;
        for (y, &w) in self.weights.iter().enumerate() {
            acc += w;
            if z < acc {
                return y;
            }
        }
        panic!("{z} is not an element of F_{}", self.q)
    }

    /// `P′(y) = w_y / q`.
    pub fn induced(&self) -> Vec<f64> {
        self.weights.iter().map(|&w| w as f64 / self.q as f64).collect()
    }
}

/// Variational distance `½ Σ |P(y) − P′(y)|`.
pub fn variational_distance(p: &[f64], p2: &[f64]) -> f64 {
    0.5 * p.iter().zip(p2).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Weights minimizing `δ(P, w/q)` over all compositions of `q` into `r` parts.
///
/// Each cost `|P(y) − w_y/q|` is convex in `w_y`, so any optimum has
/// `w_y ∈ {⌊qP(y)⌋, ⌈qP(y)⌉}` and rounds up exactly the `q − Σ⌊qP⌋` entries
/// with the largest fractional parts. Ties go to later entries, which yields
/// the lexicographically smallest optimal weight vector.
pub fn quantize_distribution(p: &[f64], q: u64) -> Result<(ShapingMap, f64)> {
    check_distribution(p)?;
    let r = p.len();
    if q < r as u64 {
        return Err(Error::InvalidParameter(format!("q = {q} is smaller than the alphabet size {r}")));
    }
    PrimeField::new(q)?;
    let scaled: Vec<f64> = p.iter().map(|&x| x * q as f64).collect();
    let mut w: Vec<u64> = scaled.iter().map(|x| x.floor() as u64).collect();
    let used: u64 = w.iter().sum();
    let missing = q.saturating_sub(used) as usize;
    let mut order: Vec<usize> = (0..r).collect();
    let frac = |y: usize| scaled[y] - scaled[y].floor();
    order.sort_by(|&a, &b| frac(b).total_cmp(&frac(a)).then(b.cmp(&a)));
    for &y in order.iter().take(missing) {
        w[y] += 1;
    }
    let map = ShapingMap::new(q, w)?;
    let delta = variational_distance(p, &map.induced());
    Ok((map, delta))
}

/// `W′ = W ∘ G_{Y|Z}`: input `z ∈ F_q` produces `φ(b(z))`.
pub fn shaping_channel(w: &CQChannel, map: &ShapingMap) -> Result<CQChannel> {
    if w.inputs() != map.r() {
        return Err(Error::DimensionMismatch {
            expected: w.inputs(),
            found: map.r(),
        });
    }
    CQChannel::new((0..map.q).map(|z| w.output(map.apply(z)).clone()).collect())
}
