//! Monte Carlo estimation of test size and power, and empirical-vs-limit
//! CDF comparison.
//!
//! Replicate `i` draws its counts from the stream `(seed, i)`, so results are
//! identical for any thread count; rejection tallies reduce by integer
//! addition, which is order-independent.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decision::{TestKind, TestSpec};
use crate::error::{GofError, Result};
use crate::families::{AliasTable, FamilySpec, SamplerSeed};
use crate::limit::{psi_cdf, psi_critical, std_normal_quantile, CriticalQuery, QuadratureSpec};
use crate::model::{CellModel, WeightVector};
use crate::real::{cast, cast_u64, cast_usize, Real};
use crate::stats::{decomposition_parts, variances, weighted_linear_term};

/// Number of grid points behind the theoretical CDF curve.
const ECDF_GRID_POINTS: usize = 512;
/// Padding added on each side of the empirical range of the grid.
const ECDF_GRID_PADDING: f64 = 0.5;

/// One size/power study: sample from `true_spec`, test against `null_spec`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Real + Serialize",
    deserialize = "R: Real + Deserialize<'de>"
))]
pub struct StudyConfig<R: Real> {
    pub n: u64,
    pub null_spec: FamilySpec<R>,
    pub true_spec: FamilySpec<R>,
    pub tests: Vec<TestSpec<R>>,
    pub replicates: u64,
    pub seed: u64,
}

impl<R: Real> StudyConfig<R> {
    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(GofError::InvalidParameter(
                "replicate count must be >= 1".into(),
            ));
        }
        if self.null_spec.k() != self.true_spec.k() {
            return Err(GofError::DimensionMismatch {
                left: self.null_spec.k(),
                right: self.true_spec.k(),
            });
        }
        if self.n == 0 {
            return Err(GofError::ZeroTotalCount);
        }
        Ok(())
    }
}

/// Rejection frequency of one test over the study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome<R> {
    pub kind: TestKind,
    pub c: R,
    pub alpha: R,
    pub rejections: u64,
    /// `rejections / replicates`, exactly.
    pub frequency: R,
    /// Binomial Monte Carlo standard error of the frequency.
    pub std_error: R,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "R: Real + Serialize",
    deserialize = "R: Real + Deserialize<'de>"
))]
pub struct SizePowerReport<R: Real> {
    pub config: StudyConfig<R>,
    pub outcomes: Vec<TestOutcome<R>>,
}

/// Empirical CDF of the standardized combined statistic under the null,
/// next to its limiting CDF on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcdfReport<R> {
    pub c: R,
    /// Mixture ratio `s` of the limiting law.
    pub s_ratio: R,
    pub replicates: u64,
    /// Standardized statistics, ascending.
    pub sorted: Vec<R>,
    pub grid: Vec<R>,
    /// Limiting CDF evaluated on `grid`.
    pub theory: Vec<R>,
    /// Kolmogorov sup-distance between the empirical and limiting CDFs.
    pub sup_distance: R,
}

struct PreparedTest<R: Real> {
    kind: TestKind,
    c: R,
    alpha: R,
    sigma: R,
    critical: R,
    weights: Option<WeightVector<R>>,
}

fn prepare_tests<R: Real>(
    config: &StudyConfig<R>,
    null_model: &CellModel<R>,
    quad: &QuadratureSpec<R>,
) -> Result<Vec<PreparedTest<R>>> {
    let base = variances(null_model, config.n, None)?;
    let sigma_n1 = base.sigma_n1_sq.sqrt();
    config
        .tests
        .iter()
        .map(|spec| {
            let (sigma, s_ratio) = match spec.kind {
                TestKind::Pearson => (base.sigma_n_sq.sqrt(), R::zero()),
                TestKind::DSquared => (sigma_n1, R::zero()),
                TestKind::AbsCombo => (sigma_n1, spec.c * base.sigma_n2_sq.sqrt() / sigma_n1),
                TestKind::WeightedCombo => {
                    let w = spec.weights.as_ref().ok_or(GofError::MissingWeights)?;
                    let v = variances(null_model, config.n, Some(w))?;
                    let sigma_bar_sq = v.sigma_n2_bar_sq.expect("weighted variance computed");
                    (sigma_n1, spec.c * sigma_bar_sq.sqrt() / sigma_n1)
                }
            };
            if sigma <= R::zero() {
                return Err(GofError::DegenerateVariance("test scale"));
            }
            let critical = if s_ratio == R::zero() {
                std_normal_quantile(spec.alpha)?
            } else {
                psi_critical(CriticalQuery::new(spec.alpha, s_ratio)?, quad)?
            };
            Ok(PreparedTest {
                kind: spec.kind,
                c: spec.c,
                alpha: spec.alpha,
                sigma,
                critical,
                weights: spec.weights.clone(),
            })
        })
        .collect()
}

/// Estimates rejection frequencies for every test in the study. With
/// `null_spec == true_spec` the frequencies estimate size; otherwise power.
pub fn estimate_size_power<R: Real>(config: &StudyConfig<R>) -> Result<SizePowerReport<R>> {
    config.validate()?;
    let quad = QuadratureSpec::default();
    let null_model = config.null_spec.build_model()?;
    let true_model = config.true_spec.build_model()?;
    let prepared = prepare_tests(config, &null_model, &quad)?;

    let table = AliasTable::new(&true_model);
    let centered_shift = cast_usize::<R>(null_model.k()) - R::one();
    let probs = null_model.probs();
    let equiprobable = null_model.is_equiprobable();
    let n = config.n;
    let seed = config.seed;

    let rejections = (0..config.replicates)
        .into_par_iter()
        .fold(
            || (Vec::<u64>::new(), vec![0u64; prepared.len()]),
            |(mut scratch, mut tally), replicate| {
                table.sample_counts_into(n, SamplerSeed::new(seed, replicate), &mut scratch);
                let (x2, s_n2) = decomposition_parts(probs, equiprobable, &scratch, n);
                let s_n1 = x2 - s_n2;
                for (slot, test) in tally.iter_mut().zip(&prepared) {
                    let statistic = match test.kind {
                        TestKind::Pearson => x2,
                        TestKind::DSquared => s_n1,
                        TestKind::AbsCombo => s_n1 + test.c * s_n2.abs(),
                        TestKind::WeightedCombo => {
                            let w = test.weights.as_ref().expect("validated in prepare");
                            let bar = weighted_linear_term(probs, equiprobable, w, &scratch, n);
                            s_n1 + test.c * bar.abs()
                        }
                    };
                    let standardized = (statistic - centered_shift) / test.sigma;
                    if standardized > test.critical {
                        *slot += 1;
                    }
                }
                (scratch, tally)
            },
        )
        .map(|(_, tally)| tally)
        .reduce(
            || vec![0u64; prepared.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let total = cast_u64::<R>(config.replicates);
    let outcomes = prepared
        .iter()
        .zip(rejections)
        .map(|(test, count)| {
            let frequency = cast_u64::<R>(count) / total;
            TestOutcome {
                kind: test.kind,
                c: test.c,
                alpha: test.alpha,
                rejections: count,
                frequency,
                std_error: (frequency * (R::one() - frequency) / total).sqrt(),
            }
        })
        .collect();

    Ok(SizePowerReport {
        config: config.clone(),
        outcomes,
    })
}

/// Simulates the standardized statistic `(S_n1 + c|S_n2| - (k-1))/sigma_n1`
/// under the null and compares its empirical CDF with the limiting
/// `Psi(., c sigma_n2 / sigma_n1)`.
///
/// The study must be a null study (`null_spec == true_spec`).
pub fn ecdf_vs_theory<R: Real>(config: &StudyConfig<R>, combo_c: R) -> Result<EcdfReport<R>> {
    config.validate()?;
    if config.null_spec != config.true_spec {
        return Err(GofError::InvalidParameter(
            "empirical CDF diagnostic requires null_spec == true_spec".into(),
        ));
    }
    if !(combo_c.is_finite() && combo_c >= R::zero()) {
        return Err(GofError::InvalidParameter(format!(
            "combination weight c must be finite and >= 0, got {combo_c}"
        )));
    }
    let quad = QuadratureSpec::default();
    let model = config.null_spec.build_model()?;
    let v = variances(&model, config.n, None)?;
    let sigma_n1 = v.sigma_n1_sq.sqrt();
    if sigma_n1 <= R::zero() {
        return Err(GofError::DegenerateVariance("sigma_n1"));
    }
    let s_ratio = combo_c * v.sigma_n2_sq.sqrt() / sigma_n1;
    let centered_shift = cast_usize::<R>(model.k()) - R::one();

    let table = AliasTable::new(&model);
    let probs = model.probs();
    let equiprobable = model.is_equiprobable();
    let n = config.n;
    let seed = config.seed;

    let mut sorted: Vec<R> = (0..config.replicates)
        .into_par_iter()
        .map_init(Vec::new, |scratch, replicate| {
            table.sample_counts_into(n, SamplerSeed::new(seed, replicate), scratch);
            let (x2, s_n2) = decomposition_parts(probs, equiprobable, scratch, n);
            let s_n1 = x2 - s_n2;
            (s_n1 + combo_c * s_n2.abs() - centered_shift) / sigma_n1
        })
        .collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("statistics are finite"));

    let lo = sorted[0] - cast::<R>(ECDF_GRID_PADDING);
    let hi = sorted[sorted.len() - 1] + cast::<R>(ECDF_GRID_PADDING);
    let step = (hi - lo) / cast_usize::<R>(ECDF_GRID_POINTS - 1);
    let grid: Vec<R> = (0..ECDF_GRID_POINTS)
        .map(|i| lo + step * cast_usize::<R>(i))
        .collect();
    let theory: Vec<R> = grid
        .par_iter()
        .map(|&x| psi_cdf(x, s_ratio, &quad))
        .collect();

    // The sup is attained at a sample point, approaching from either side.
    let total = cast_u64::<R>(config.replicates);
    let sup_distance = sorted
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let limit = psi_cdf(x, s_ratio, &quad);
            let below = cast_usize::<R>(i) / total;
            let above = cast_usize::<R>(i + 1) / total;
            (limit - below).abs().max((above - limit).abs())
        })
        .reduce(|| R::zero(), |a, b| a.max(b));

    Ok(EcdfReport {
        c: combo_c,
        s_ratio,
        replicates: config.replicates,
        sorted,
        grid,
        theory,
        sup_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::std_normal_cdf;

    fn base_config(tests: Vec<TestSpec<f64>>) -> StudyConfig<f64> {
        StudyConfig {
            n: 100,
            null_spec: FamilySpec::Family1 { k: 20, r: 0.5 },
            true_spec: FamilySpec::Family1 { k: 20, r: 0.5 },
            tests,
            replicates: 200,
            seed: 11,
        }
    }

    #[test]
    fn single_replicate_frequency_is_binary() {
        let mut config = base_config(vec![
            TestSpec::pearson(0.05).unwrap(),
            TestSpec::abs_combo(1.0, 0.05).unwrap(),
        ]);
        config.replicates = 1;
        let report = estimate_size_power(&config).unwrap();
        for outcome in report.outcomes {
            assert!(outcome.frequency == 0.0 || outcome.frequency == 1.0);
        }
    }

    #[test]
    fn frequency_is_exact_ratio() {
        let config = base_config(vec![TestSpec::d_squared(0.05).unwrap()]);
        let report = estimate_size_power(&config).unwrap();
        let outcome = &report.outcomes[0];
        assert_eq!(
            outcome.frequency,
            outcome.rejections as f64 / config.replicates as f64
        );
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let config = base_config(vec![
            TestSpec::pearson(0.05).unwrap(),
            TestSpec::d_squared(0.05).unwrap(),
            TestSpec::abs_combo(1.0, 0.05).unwrap(),
        ]);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate_size_power(&config).unwrap());
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| estimate_size_power(&config).unwrap());
        assert_eq!(
            serde_json::to_string(&single).unwrap(),
            serde_json::to_string(&multi).unwrap()
        );
    }

    #[test]
    fn mismatched_specs_rejected() {
        let mut config = base_config(vec![TestSpec::pearson(0.05).unwrap()]);
        config.true_spec = FamilySpec::Family1 { k: 40, r: 0.5 };
        assert!(matches!(
            estimate_size_power(&config),
            Err(GofError::DimensionMismatch { .. })
        ));
        assert!(ecdf_vs_theory(&base_config(vec![]), -1.0).is_err());
    }

    #[test]
    fn ecdf_requires_a_null_study() {
        let mut config = base_config(vec![]);
        config.true_spec = FamilySpec::Family1 { k: 20, r: 0.6 };
        assert!(ecdf_vs_theory(&config, 1.0).is_err());
    }

    #[test]
    fn ecdf_single_replicate_is_one_step() {
        let mut config = base_config(vec![]);
        config.replicates = 1;
        let report = ecdf_vs_theory(&config, 1.0).unwrap();
        assert_eq!(report.sorted.len(), 1);
        assert_eq!(report.grid.len(), ECDF_GRID_POINTS);
        assert!(report.sup_distance >= 0.0);
    }

    #[test]
    fn ecdf_equiprobable_theory_is_the_normal_cdf() {
        let config = StudyConfig {
            n: 200,
            null_spec: FamilySpec::<f64>::Equiprobable { k: 50 },
            true_spec: FamilySpec::Equiprobable { k: 50 },
            tests: vec![],
            replicates: 100,
            seed: 3,
        };
        let report = ecdf_vs_theory(&config, 2.0).unwrap();
        assert_eq!(report.s_ratio, 0.0);
        for (&x, &t) in report.grid.iter().zip(&report.theory) {
            assert_eq!(t, std_normal_cdf(x));
        }
    }

    #[test]
    fn ecdf_values_are_sorted() {
        let config = base_config(vec![]);
        let report = ecdf_vs_theory(&config, 1.0).unwrap();
        assert!(report.sorted.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(report.replicates as usize, report.sorted.len());
    }

    #[test]
    fn runs_in_single_precision() {
        let config = StudyConfig::<f32> {
            n: 100,
            null_spec: FamilySpec::Family1 { k: 20, r: 0.5 },
            true_spec: FamilySpec::Family1 { k: 20, r: 0.5 },
            tests: vec![
                TestSpec::pearson(0.05f32).unwrap(),
                TestSpec::abs_combo(1.0f32, 0.05).unwrap(),
            ],
            replicates: 500,
            seed: 4,
        };
        let report = estimate_size_power(&config).unwrap();
        for outcome in &report.outcomes {
            assert!(outcome.frequency >= 0.0 && outcome.frequency <= 0.2);
        }
    }

    #[test]
    fn moderate_null_study_sizes_are_sane() {
        // Smoke-scale size check; the acceptance suite runs the full grids.
        let config = StudyConfig {
            n: 100,
            null_spec: FamilySpec::Family1 { k: 50, r: 0.6 },
            true_spec: FamilySpec::Family1 { k: 50, r: 0.6 },
            tests: vec![
                TestSpec::pearson(0.05).unwrap(),
                TestSpec::d_squared(0.05).unwrap(),
                TestSpec::abs_combo(1.0, 0.05).unwrap(),
            ],
            replicates: 2000,
            seed: 99,
        };
        let report = estimate_size_power(&config).unwrap();
        for outcome in &report.outcomes {
            assert!(
                outcome.frequency > 0.02 && outcome.frequency < 0.11,
                "{:?}: {}",
                outcome.kind,
                outcome.frequency
            );
        }
    }
}
