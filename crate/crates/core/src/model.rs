//! Validated domain vectors: null cell probabilities, observed counts, and
//! nonnegative weights.

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::real::{cast, cast_usize, CompensatedSum, Real};

/// Absolute tolerance on `sum(p_i) - 1`. Inputs outside it are rejected, not
/// renormalized.
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;

/// Tolerance on `sum(c_i) - k`, relative to `k`.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

fn sum_tolerance<R: Real>(k: usize, base: f64) -> R {
    // The f64 tolerance is the contract; the epsilon term only matters for
    // lower-precision scalars where the stated constant is unattainable.
    let eps_floor = cast_usize::<R>(8 * k) * R::epsilon();
    cast::<R>(base).max(eps_floor)
}

/// Null-hypothesis cell probabilities `p_1..p_k`.
///
/// Invariants: `k >= 2`, every `p_i > 0`, and the probabilities sum to 1
/// within [`PROBABILITY_SUM_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct CellModel<R> {
    probs: Vec<R>,
    equiprobable: bool,
}

impl<R: Real> CellModel<R> {
    pub fn new(probs: Vec<R>) -> Result<Self> {
        let k = probs.len();
        if k < 2 {
            return Err(GofError::TooFewCells(k));
        }
        let mut sum = CompensatedSum::new();
        for (index, &p) in probs.iter().enumerate() {
            if !(p.is_finite() && p > R::zero()) {
                return Err(GofError::NonPositiveProbability {
                    index,
                    value: p.to_f64().unwrap_or(f64::NAN),
                });
            }
            sum.add(p);
        }
        let tolerance = sum_tolerance::<R>(k, PROBABILITY_SUM_TOL);
        let total = sum.value();
        if (total - R::one()).abs() > tolerance {
            return Err(GofError::ProbabilitySum {
                sum: total.to_f64().unwrap_or(f64::NAN),
                tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
            });
        }
        let first = probs[0];
        let equiprobable = probs.iter().all(|&p| p == first);
        Ok(Self {
            probs,
            equiprobable,
        })
    }

    /// Uniform model with all cells at `1/k`.
    pub fn equiprobable(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(GofError::TooFewCells(k));
        }
        let p = R::one() / cast_usize::<R>(k);
        Ok(Self {
            probs: vec![p; k],
            equiprobable: true,
        })
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[R] {
        &self.probs
    }

    /// True when every cell probability is bit-identical. In that case
    /// `S_n2 = 0` for any sample and `sigma_n2^2 = 0`, exactly.
    pub fn is_equiprobable(&self) -> bool {
        self.equiprobable
    }
}

/// Observed cell frequencies `o_1..o_k` with their total `n`.
///
/// A zero total is representable (an empty sample exists as data); the test
/// statistics reject it at evaluation time.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountVector {
    counts: Vec<u64>,
    n: u64,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let mut n: u64 = 0;
        for &c in &counts {
            n = n.checked_add(c).ok_or(GofError::CountOverflow)?;
        }
        Ok(Self { counts, n })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }

    /// Total number of observed events.
    pub fn n(&self) -> u64 {
        self.n
    }
}

/// Nonnegative weights `c_1..c_k` constrained to sum to `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<R>", into = "Vec<R>")]
#[serde(bound(
    serialize = "R: Real + Serialize",
    deserialize = "R: Real + Deserialize<'de>"
))]
pub struct WeightVector<R: Real> {
    weights: Vec<R>,
    uniform: bool,
}

impl<R: Real> WeightVector<R> {
    pub fn new(weights: Vec<R>) -> Result<Self> {
        let k = weights.len();
        if k < 2 {
            return Err(GofError::TooFewCells(k));
        }
        let mut sum = CompensatedSum::new();
        for (index, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w >= R::zero()) {
                return Err(GofError::InvalidWeight {
                    index,
                    value: w.to_f64().unwrap_or(f64::NAN),
                });
            }
            sum.add(w);
        }
        let expected = cast_usize::<R>(k);
        let tolerance = sum_tolerance::<R>(k, WEIGHT_SUM_TOL) * expected;
        let total = sum.value();
        if (total - expected).abs() > tolerance {
            return Err(GofError::WeightSum {
                sum: total.to_f64().unwrap_or(f64::NAN),
                expected: expected.to_f64().unwrap_or(f64::NAN),
                tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
            });
        }
        let first = weights[0];
        let uniform = weights.iter().all(|&w| w == first);
        Ok(Self { weights, uniform })
    }

    /// The all-ones weight vector, under which the weighted linear term
    /// reduces to the unweighted one.
    pub fn all_ones(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(GofError::TooFewCells(k));
        }
        Ok(Self {
            weights: vec![R::one(); k],
            uniform: true,
        })
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[R] {
        &self.weights
    }

    /// True when every weight is bit-identical (hence equal to 1, up to the
    /// sum tolerance).
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }
}

impl<R: Real> TryFrom<Vec<R>> for WeightVector<R> {
    type Error = GofError;

    fn try_from(weights: Vec<R>) -> Result<Self> {
        Self::new(weights)
    }
}

impl<R: Real> From<WeightVector<R>> for Vec<R> {
    fn from(w: WeightVector<R>) -> Self {
        w.weights
    }
}

pub(crate) fn check_same_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(GofError::DimensionMismatch { left, right });
    }
    Ok(())
}
