//! Test statistics for multinomial goodness of fit.
//!
//! The Pearson statistic `X^2 = sum (o_i - e_i)^2 / e_i` with `e_i = n p_i`
//! splits into a quadratic part `S_n1 = X^2 - S_n2` and a linear part
//! `S_n2 = sum (o_i - e_i) / e_i`. When the cells are equiprobable the linear
//! part vanishes identically, so a weighted variant
//! `S_n2_bar = sum c_i (o_i - e_i) / e_i` keeps a usable linear term. This
//! module computes the statistics, their variances, mean shifts under an
//! alternative, the moment gaps `beta_nj`, and finite-sample diagnostics for
//! the normal-approximation conditions.

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::model::{check_same_len, CellModel, CountVector, WeightVector};
use crate::real::{cast_u64, cast_usize, CompensatedSum, Real};

/// All statistics and variances for one dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatReport<R> {
    pub x2: R,
    pub s_n1: R,
    pub s_n2: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_n2_bar: Option<R>,
    pub sigma_n1_sq: R,
    pub sigma_n2_sq: R,
    pub sigma_n_sq: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_n2_bar_sq: Option<R>,
    pub k: usize,
    pub n: u64,
}

/// Expected mean shifts when the data actually follow `alt` instead of the
/// null model: `E(S_n1 - (k-1)) = (n-1) sum (p'_i - p_i)^2 / p_i` and
/// `E(S_n2) = sum (p'_i - p_i) / p_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlternativeShift<R> {
    pub s_n1_shift: R,
    pub s_n2_shift: R,
}

/// Variances of the decomposition under the null:
/// `sigma_n1^2 = 2(k-1)(n-1)/n`, `sigma_n2^2 = (sum 1/p_i - k^2)/n`, and the
/// weighted analogue `sigma_n2_bar^2 = (sum c_i^2/p_i - k^2)/n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variances<R> {
    pub sigma_n1_sq: R,
    pub sigma_n2_sq: R,
    pub sigma_n_sq: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_n2_bar_sq: Option<R>,
}

/// Finite-sample magnitudes of the normal-approximation conditions.
///
/// These are reported diagnostics only; the conditions are asymptotic and
/// admit no finite-sample pass/fail verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionDiagnostics<R> {
    /// `(1/(n^2 k^2)) sum 1/p_i^2`.
    pub c3_value: R,
    /// `(sum 1/p_i^3 - k^4) / (n^3 sigma_n2^4)`, or 0 when `sigma_n2^2 = 0`.
    pub c4_term1: R,
    /// `sigma_n2^2 / k`.
    pub c4_term2: R,
    /// `min(c4_term1, c4_term2)`.
    pub c4_value: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c44_term1: Option<R>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c44_term2: Option<R>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c44_value: Option<R>,
}

fn require_sample<R: Real>(model: &CellModel<R>, counts: &CountVector) -> Result<u64> {
    check_same_len(model.k(), counts.k())?;
    if counts.n() == 0 {
        return Err(GofError::ZeroTotalCount);
    }
    Ok(counts.n())
}

/// One pass over the cells computing `X^2` and `S_n2`.
///
/// With bit-identical cell probabilities `sum (o_i - e_i) = 0` with all `e_i`
/// equal, so the linear term is returned as exactly zero.
pub(crate) fn decomposition_parts<R: Real>(
    probs: &[R],
    equiprobable: bool,
    counts: &[u64],
    n: u64,
) -> (R, R) {
    let n_r = cast_u64::<R>(n);
    let mut x2 = CompensatedSum::new();
    let mut linear = CompensatedSum::new();
    for (&p, &o) in probs.iter().zip(counts) {
        let e = n_r * p;
        let d = cast_u64::<R>(o) - e;
        let ratio = d / e;
        x2.add(d * ratio);
        linear.add(ratio);
    }
    let s_n2 = if equiprobable { R::zero() } else { linear.value() };
    (x2.value(), s_n2)
}

pub(crate) fn weighted_linear_term<R: Real>(
    probs: &[R],
    equiprobable: bool,
    weights: &WeightVector<R>,
    counts: &[u64],
    n: u64,
) -> R {
    if equiprobable && weights.is_uniform() {
        return R::zero();
    }
    let n_r = cast_u64::<R>(n);
    let mut acc = CompensatedSum::new();
    for ((&p, &c), &o) in probs.iter().zip(weights.weights()).zip(counts) {
        let e = n_r * p;
        acc.add(c * (cast_u64::<R>(o) - e) / e);
    }
    acc.value()
}

/// Pearson's chi-squared statistic `sum (o_i - n p_i)^2 / (n p_i)`.
pub fn pearson_statistic<R: Real>(model: &CellModel<R>, counts: &CountVector) -> Result<R> {
    let n = require_sample(model, counts)?;
    let (x2, _) = decomposition_parts(model.probs(), model.is_equiprobable(), counts.counts(), n);
    Ok(x2)
}

/// Splits the Pearson statistic into `(S_n1, S_n2)` with
/// `S_n2 = sum (o_i - e_i)/e_i` and `S_n1 = X^2 - S_n2`.
pub fn decompose<R: Real>(model: &CellModel<R>, counts: &CountVector) -> Result<(R, R)> {
    let n = require_sample(model, counts)?;
    let (x2, s_n2) =
        decomposition_parts(model.probs(), model.is_equiprobable(), counts.counts(), n);
    Ok((x2 - s_n2, s_n2))
}

/// Weighted linear term `S_n2_bar = sum c_i (o_i - e_i)/e_i`.
pub fn weighted_s2<R: Real>(
    model: &CellModel<R>,
    counts: &CountVector,
    weights: &WeightVector<R>,
) -> Result<R> {
    let n = require_sample(model, counts)?;
    check_same_len(model.k(), weights.k())?;
    Ok(weighted_linear_term(
        model.probs(),
        model.is_equiprobable(),
        weights,
        counts.counts(),
        n,
    ))
}

/// Moment gap `beta_nj = sum c_i^{j+1} / p_i^j - k^{j+1}`, accumulated as
/// `sum (c_i^{j+1}/p_i^j - k^j)` to limit cancellation.
///
/// Nonnegative whenever the weights sum to `k`, with equality exactly at
/// `c_i = k p_i`; tiny negative round-off is clamped to zero.
fn beta_sum<R: Real>(model: &CellModel<R>, weights: Option<&WeightVector<R>>, j: u32) -> R {
    if model.is_equiprobable()
        && weights.is_none_or(|w| w.is_uniform() && w.weights()[0] == R::one())
    {
        return R::zero();
    }
    let probs = model.probs();
    let k_pow_j = cast_usize::<R>(probs.len()).powi(j as i32);
    let mut acc = CompensatedSum::new();
    match weights {
        None => {
            for &p in probs {
                acc.add(p.powi(-(j as i32)) - k_pow_j);
            }
        }
        Some(w) => {
            for (&p, &c) in probs.iter().zip(w.weights()) {
                acc.add(c.powi(j as i32 + 1) / p.powi(j as i32) - k_pow_j);
            }
        }
    }
    acc.value().max(R::zero())
}

pub fn beta_moment<R: Real>(model: &CellModel<R>, weights: &WeightVector<R>, j: u32) -> Result<R> {
    if j == 0 {
        return Err(GofError::InvalidParameter(
            "beta moment order j must be >= 1".into(),
        ));
    }
    check_same_len(model.k(), weights.k())?;
    Ok(beta_sum(model, Some(weights), j))
}

/// Null variances of `X^2`, `S_n1`, `S_n2`, and optionally `S_n2_bar`.
pub fn variances<R: Real>(
    model: &CellModel<R>,
    n: u64,
    weights: Option<&WeightVector<R>>,
) -> Result<Variances<R>> {
    if n == 0 {
        return Err(GofError::ZeroTotalCount);
    }
    if let Some(w) = weights {
        check_same_len(model.k(), w.k())?;
    }
    let n_r = cast_u64::<R>(n);
    let k_r = cast_usize::<R>(model.k());
    let two = R::one() + R::one();
    let sigma_n1_sq = two * (k_r - R::one()) * (n_r - R::one()) / n_r;
    let sigma_n2_sq = beta_sum(model, None, 1) / n_r;
    let sigma_n2_bar_sq = weights.map(|w| beta_sum(model, Some(w), 1) / n_r);
    Ok(Variances {
        sigma_n1_sq,
        sigma_n2_sq,
        sigma_n_sq: sigma_n1_sq + sigma_n2_sq,
        sigma_n2_bar_sq,
    })
}

/// Mean shifts of the decomposition when sampling from `alt` while testing
/// against `null`.
pub fn alternative_shift<R: Real>(
    null: &CellModel<R>,
    alt: &CellModel<R>,
    n: u64,
) -> Result<AlternativeShift<R>> {
    check_same_len(null.k(), alt.k())?;
    let n_r = cast_u64::<R>(n);
    let mut quad = CompensatedSum::new();
    let mut linear = CompensatedSum::new();
    for (&p, &p_alt) in null.probs().iter().zip(alt.probs()) {
        let d = p_alt - p;
        quad.add(d * d / p);
        linear.add(d / p);
    }
    Ok(AlternativeShift {
        s_n1_shift: (n_r - R::one()) * quad.value().max(R::zero()),
        s_n2_shift: linear.value(),
    })
}

/// Finite-sample values of the normal-approximation conditions; both
/// branches of the min are reported.
pub fn condition_diagnostics<R: Real>(
    model: &CellModel<R>,
    n: u64,
    weights: Option<&WeightVector<R>>,
) -> Result<ConditionDiagnostics<R>> {
    if n == 0 {
        return Err(GofError::ZeroTotalCount);
    }
    if let Some(w) = weights {
        check_same_len(model.k(), w.k())?;
    }
    let n_r = cast_u64::<R>(n);
    let k_r = cast_usize::<R>(model.k());
    let mut inv_sq = CompensatedSum::new();
    for &p in model.probs() {
        inv_sq.add(R::one() / (p * p));
    }
    let c3_value = inv_sq.value() / (n_r * n_r * k_r * k_r);

    let n_cubed = n_r * n_r * n_r;
    let fourth_moment_ratio = |gap: R, var: R| {
        if var > R::zero() {
            gap / (n_cubed * var * var)
        } else {
            R::zero()
        }
    };

    let sigma_n2_sq = beta_sum(model, None, 1) / n_r;
    let c4_term1 = fourth_moment_ratio(beta_sum(model, None, 3), sigma_n2_sq);
    let c4_term2 = sigma_n2_sq / k_r;

    let (c44_term1, c44_term2) = match weights {
        Some(w) => {
            let var = beta_sum(model, Some(w), 1) / n_r;
            (
                Some(fourth_moment_ratio(beta_sum(model, Some(w), 3), var)),
                Some(var / k_r),
            )
        }
        None => (None, None),
    };

    Ok(ConditionDiagnostics {
        c3_value,
        c4_term1,
        c4_term2,
        c4_value: c4_term1.min(c4_term2),
        c44_term1,
        c44_term2,
        c44_value: c44_term1.zip(c44_term2).map(|(a, b)| a.min(b)),
    })
}

/// Full statistic/variance report for one dataset.
pub fn stat_report<R: Real>(
    model: &CellModel<R>,
    counts: &CountVector,
    weights: Option<&WeightVector<R>>,
) -> Result<StatReport<R>> {
    let (s_n1, s_n2) = decompose(model, counts)?;
    let s_n2_bar = weights
        .map(|w| weighted_s2(model, counts, w))
        .transpose()?;
    let v = variances(model, counts.n(), weights)?;
    Ok(StatReport {
        x2: s_n1 + s_n2,
        s_n1,
        s_n2,
        s_n2_bar,
        sigma_n1_sq: v.sigma_n1_sq,
        sigma_n2_sq: v.sigma_n2_sq,
        sigma_n_sq: v.sigma_n_sq,
        sigma_n2_bar_sq: v.sigma_n2_bar_sq,
        k: model.k(),
        n: counts.n(),
    })
}
