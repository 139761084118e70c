//! Property tests for the statistic decomposition, moment inequalities, and
//! decision-rule reductions.

use proptest::collection::vec;
use proptest::prelude::*;

use sparse_gof::decision::{run_test, TestSpec};
use sparse_gof::families::{sample_counts, SamplerSeed};
use sparse_gof::model::{CellModel, CountVector, WeightVector};
use sparse_gof::stats::{beta_moment, decompose, pearson_statistic, weighted_s2};

fn normalized_model(raw: Vec<f64>) -> CellModel<f64> {
    let total: f64 = raw.iter().sum();
    CellModel::new(raw.into_iter().map(|x| x / total).collect()).unwrap()
}

fn scaled_weights(raw: Vec<f64>) -> WeightVector<f64> {
    let k = raw.len() as f64;
    let total: f64 = raw.iter().sum();
    WeightVector::new(raw.into_iter().map(|x| x * k / total).collect()).unwrap()
}

prop_compose! {
    fn arb_model()(raw in vec(0.01f64..1.0, 2..64)) -> CellModel<f64> {
        normalized_model(raw)
    }
}

prop_compose! {
    fn arb_model_and_counts()(
        model in arb_model(),
        n in 1u64..400,
        seed in any::<u64>(),
    ) -> (CellModel<f64>, CountVector) {
        let counts = sample_counts(&model, n, SamplerSeed::new(seed, 0));
        (model, counts)
    }
}

proptest! {
    #[test]
    fn pearson_equals_decomposition_sum((model, counts) in arb_model_and_counts()) {
        let x2 = pearson_statistic(&model, &counts).unwrap();
        let (s1, s2) = decompose(&model, &counts).unwrap();
        prop_assert!(x2 >= 0.0);
        prop_assert!((x2 - (s1 + s2)).abs() <= 1e-10 * x2.max(1.0));
    }

    #[test]
    fn unit_weights_match_the_linear_term((model, counts) in arb_model_and_counts()) {
        let w = WeightVector::all_ones(model.k()).unwrap();
        let (_, s2) = decompose(&model, &counts).unwrap();
        let bar = weighted_s2(&model, &counts, &w).unwrap();
        prop_assert!((bar - s2).abs() <= 1e-12 * s2.abs().max(1.0));
    }

    #[test]
    fn beta_moments_are_nonnegative(
        raw_p in vec(0.01f64..1.0, 2..48),
        raw_w in vec(0.0f64..1.0, 2..48),
    ) {
        let k = raw_p.len().min(raw_w.len());
        let model = normalized_model(raw_p[..k].to_vec());
        let mut w = raw_w[..k].to_vec();
        // Guard against an all-zero draw.
        w[0] += 0.5;
        let weights = scaled_weights(w);
        for j in 1..=3u32 {
            // Clamped value from the library.
            let beta = beta_moment(&model, &weights, j).unwrap();
            prop_assert!(beta >= 0.0);
            // Unclamped direct summation stays above the round-off floor.
            let kf = k as f64;
            let raw: f64 = model
                .probs()
                .iter()
                .zip(weights.weights())
                .map(|(&p, &c)| c.powi(j as i32 + 1) / p.powi(j as i32))
                .sum::<f64>()
                - kf.powi(j as i32 + 1);
            prop_assert!(raw >= -1e-9 * kf.powi(j as i32 + 1));
            prop_assert!((beta - raw.max(0.0)).abs() <= 1e-9 * raw.abs().max(1.0));
        }
    }

    #[test]
    fn beta_moment_vanishes_iff_weights_proportional(raw_p in vec(0.01f64..1.0, 2..48)) {
        let model = normalized_model(raw_p);
        let k = model.k() as f64;
        let w = WeightVector::new(model.probs().iter().map(|&p| k * p).collect()).unwrap();
        for j in 1..=3u32 {
            let beta = beta_moment(&model, &w, j).unwrap();
            prop_assert!(beta <= 1e-9 * k.powi(j as i32 + 1));
        }
    }

    #[test]
    fn zero_weight_combo_reduces_to_d_squared((model, counts) in arb_model_and_counts()) {
        prop_assume!(counts.n() >= 2);
        let dsq = run_test(&TestSpec::d_squared(0.05).unwrap(), &model, &counts).unwrap();
        let combo = run_test(&TestSpec::abs_combo(0.0, 0.05).unwrap(), &model, &counts).unwrap();
        prop_assert_eq!(dsq.statistic, combo.statistic);
        prop_assert_eq!(dsq.standardized, combo.standardized);
        prop_assert_eq!(dsq.critical_value, combo.critical_value);
        prop_assert_eq!(dsq.p_value, combo.p_value);
        prop_assert_eq!(dsq.reject, combo.reject);
    }

    #[test]
    fn unit_weight_combo_reduces_to_abs_combo((model, counts) in arb_model_and_counts()) {
        prop_assume!(counts.n() >= 2);
        let w = WeightVector::all_ones(model.k()).unwrap();
        let combo = run_test(&TestSpec::abs_combo(1.0, 0.05).unwrap(), &model, &counts).unwrap();
        let weighted =
            run_test(&TestSpec::weighted_combo(1.0, w, 0.05).unwrap(), &model, &counts).unwrap();
        prop_assert!((combo.statistic - weighted.statistic).abs() <= 1e-10);
        prop_assert!((combo.s_ratio - weighted.s_ratio).abs() <= 1e-10);
        prop_assert_eq!(combo.reject, weighted.reject);
    }

    #[test]
    fn rejection_matches_p_value(
        (model, counts) in arb_model_and_counts(),
        alpha in 0.01f64..0.5,
        c in 0.0f64..5.0,
    ) {
        prop_assume!(counts.n() >= 2);
        for spec in [
            TestSpec::pearson(alpha).unwrap(),
            TestSpec::d_squared(alpha).unwrap(),
            TestSpec::abs_combo(c, alpha).unwrap(),
        ] {
            let report = run_test(&spec, &model, &counts).unwrap();
            // The two formulations of a region agree away from the knife
            // edge where |p - alpha| sits at solver tolerance.
            if (report.p_value - alpha).abs() > 1e-7 {
                prop_assert_eq!(report.reject, report.p_value < alpha);
            }
        }
    }

    #[test]
    fn sampler_replicates_are_reproducible(
        model in arb_model(),
        n in 0u64..200,
        seed in any::<u64>(),
        stream in any::<u64>(),
    ) {
        let a = sample_counts(&model, n, SamplerSeed::new(seed, stream));
        let b = sample_counts(&model, n, SamplerSeed::new(seed, stream));
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.n(), n);
    }
}
