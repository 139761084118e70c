//! Test decisions: standardized statistics, critical values, one-sided
//! p-values, and the Bonferroni rule across datasets.
//!
//! All four rejection regions are upper-tail at level `alpha`:
//!
//! ```text
//! pearson_R:              (X^2   - (k-1)) / sigma_n   > z_alpha
//! dsq_R0:                 (S_n1  - (k-1)) / sigma_n1  > z_alpha
//! abs_combo_Rc:           (S_n1 + c|S_n2|      - (k-1)) / sigma_n1 > psi_alpha(c sigma_n2 / sigma_n1)
//! weighted_combo_Rc_bar:  (S_n1 + c|S_n2_bar|  - (k-1)) / sigma_n1 > psi_alpha(c sigma_n2_bar / sigma_n1)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{GofError, Result};
use crate::limit::{
    psi_critical, psi_sf, std_normal_quantile, std_normal_sf, CriticalQuery, QuadratureSpec,
};
use crate::model::{CellModel, CountVector, WeightVector};
use crate::real::{cast_usize, Real};
use crate::stats::{decompose, variances, weighted_s2};

/// Which rejection region a test uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    /// Pearson statistic against its normal limit.
    #[serde(rename = "pearson_R")]
    Pearson,
    /// The quadratic part alone (Zelterman's D^2).
    #[serde(rename = "dsq_R0")]
    DSquared,
    /// `S_n1 + c|S_n2|` against the `Z1 + s|Z2|` limit.
    #[serde(rename = "abs_combo_Rc")]
    AbsCombo,
    /// `S_n1 + c|S_n2_bar|` with caller-supplied weights.
    #[serde(rename = "weighted_combo_Rc_bar")]
    WeightedCombo,
}

/// A fully specified test: kind, combination weight `c`, optional cell
/// weights, and level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Real + Serialize",
    deserialize = "R: Real + Deserialize<'de>"
))]
pub struct TestSpec<R: Real> {
    pub kind: TestKind,
    pub c: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default = "none_weights")]
    pub weights: Option<WeightVector<R>>,
    pub alpha: R,
}

fn none_weights<R: Real>() -> Option<WeightVector<R>> {
    None
}

impl<R: Real> TestSpec<R> {
    fn validate_alpha(alpha: R) -> Result<()> {
        if !(alpha > R::zero() && alpha < R::one()) {
            return Err(GofError::InvalidAlpha(alpha.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(())
    }

    pub fn pearson(alpha: R) -> Result<Self> {
        Self::validate_alpha(alpha)?;
        Ok(Self {
            kind: TestKind::Pearson,
            c: R::zero(),
            weights: None,
            alpha,
        })
    }

    pub fn d_squared(alpha: R) -> Result<Self> {
        Self::validate_alpha(alpha)?;
        Ok(Self {
            kind: TestKind::DSquared,
            c: R::zero(),
            weights: None,
            alpha,
        })
    }

    pub fn abs_combo(c: R, alpha: R) -> Result<Self> {
        Self::validate_alpha(alpha)?;
        if !(c.is_finite() && c >= R::zero()) {
            return Err(GofError::InvalidParameter(format!(
                "combination weight c must be finite and >= 0, got {c}"
            )));
        }
        Ok(Self {
            kind: TestKind::AbsCombo,
            c,
            weights: None,
            alpha,
        })
    }

    pub fn weighted_combo(c: R, weights: WeightVector<R>, alpha: R) -> Result<Self> {
        let mut spec = Self::abs_combo(c, alpha)?;
        spec.kind = TestKind::WeightedCombo;
        spec.weights = Some(weights);
        Ok(spec)
    }
}

/// Outcome of one test on one dataset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport<R> {
    pub kind: TestKind,
    pub c: R,
    /// The raw statistic: `X^2`, `S_n1`, or `S_n1 + c|.|`.
    pub statistic: R,
    /// Centered by `k-1` and scaled by the limit's standard deviation.
    pub standardized: R,
    /// Mixture ratio `s` of the limiting `Z1 + s|Z2|` law (0 under a pure
    /// normal limit).
    pub s_ratio: R,
    pub critical_value: R,
    pub p_value: R,
    pub reject: bool,
}

/// Runs one test, standardizing the statistic and comparing against the
/// matching limit law.
pub fn run_test<R: Real>(
    spec: &TestSpec<R>,
    model: &CellModel<R>,
    counts: &CountVector,
) -> Result<TestReport<R>> {
    let quad = QuadratureSpec::default();
    let v = variances(model, counts.n(), spec.weights.as_ref())?;
    let (s_n1, s_n2) = decompose(model, counts)?;
    let centered_shift = cast_usize::<R>(model.k()) - R::one();

    let (statistic, sigma, s_ratio) = match spec.kind {
        TestKind::Pearson => {
            let sigma = v.sigma_n_sq.sqrt();
            if sigma <= R::zero() {
                return Err(GofError::DegenerateVariance("sigma_n"));
            }
            (s_n1 + s_n2, sigma, R::zero())
        }
        TestKind::DSquared => {
            let sigma = v.sigma_n1_sq.sqrt();
            if sigma <= R::zero() {
                return Err(GofError::DegenerateVariance("sigma_n1"));
            }
            (s_n1, sigma, R::zero())
        }
        TestKind::AbsCombo => {
            let sigma = v.sigma_n1_sq.sqrt();
            if sigma <= R::zero() {
                return Err(GofError::DegenerateVariance("sigma_n1"));
            }
            let s = spec.c * v.sigma_n2_sq.sqrt() / sigma;
            (s_n1 + spec.c * s_n2.abs(), sigma, s)
        }
        TestKind::WeightedCombo => {
            let weights = spec.weights.as_ref().ok_or(GofError::MissingWeights)?;
            let sigma = v.sigma_n1_sq.sqrt();
            if sigma <= R::zero() {
                return Err(GofError::DegenerateVariance("sigma_n1"));
            }
            let s_bar = weighted_s2(model, counts, weights)?;
            let sigma_bar_sq = v.sigma_n2_bar_sq.expect("weighted variance computed");
            let s = spec.c * sigma_bar_sq.sqrt() / sigma;
            (s_n1 + spec.c * s_bar.abs(), sigma, s)
        }
    };

    let standardized = (statistic - centered_shift) / sigma;
    let (critical_value, p_value) = if s_ratio == R::zero() {
        (std_normal_quantile(spec.alpha)?, std_normal_sf(standardized))
    } else {
        (
            psi_critical(CriticalQuery::new(spec.alpha, s_ratio)?, &quad)?,
            psi_sf(standardized, s_ratio, &quad),
        )
    };

    Ok(TestReport {
        kind: spec.kind,
        c: spec.c,
        statistic,
        standardized,
        s_ratio,
        critical_value,
        p_value,
        reject: standardized > critical_value,
    })
}

/// Bonferroni combination: reject overall iff any p-value falls below
/// `alpha` divided by the number of tests. Returns the overall decision and
/// the per-test threshold.
pub fn bonferroni<R: Real>(reports: &[TestReport<R>], alpha: R) -> Result<(bool, R)> {
    if reports.is_empty() {
        return Err(GofError::InvalidParameter(
            "bonferroni needs at least one report".into(),
        ));
    }
    if !(alpha > R::zero() && alpha < R::one()) {
        return Err(GofError::InvalidAlpha(alpha.to_f64().unwrap_or(f64::NAN)));
    }
    let threshold = alpha / cast_usize::<R>(reports.len());
    let reject_overall = reports.iter().any(|r| r.p_value < threshold);
    Ok((reject_overall, threshold))
}
