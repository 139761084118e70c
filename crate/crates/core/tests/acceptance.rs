//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities. Run with `--nocapture` to see the lines.
//!
//! The Monte Carlo criteria compare against published reference frequencies
//! estimated from 10^4 replicates, so every band allows for two independent
//! binomial noise sources on top of the approximation error itself.

use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparse_gof::decision::{TestKind, TestSpec};
use sparse_gof::families::{sample_counts, topk0_weights, AliasTable, FamilySpec, SamplerSeed};
use sparse_gof::limit::{psi_cdf, psi_critical, std_normal_cdf, CriticalQuery, QuadratureSpec};
use sparse_gof::model::{CellModel, CountVector};
use sparse_gof::sim::{ecdf_vs_theory, estimate_size_power, StudyConfig};
use sparse_gof::stats::{alternative_shift, decompose, pearson_statistic, variances};

fn pass(name: &str, detail: String) {
    println!("acceptance {name}: PASS ({detail})");
}

/// Criterion 1: the decomposition identity on 1000 random models and
/// samples with k up to 5000.
#[test]
fn c01_decomposition_identity() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0001);
    let mut worst: f64 = 0.0;
    for case in 0..1000 {
        let k = 2 + (rng.next_u64() % 4999) as usize;
        let mut raw: Vec<f64> = Vec::with_capacity(k);
        for _ in 0..k {
            // Log-uniform cell masses spread over ~4 orders of magnitude.
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
            raw.push((-9.2 * u).exp());
        }
        let total: f64 = raw.iter().sum();
        let model = CellModel::new(raw.into_iter().map(|x| x / total).collect()).unwrap();
        let n = 1 + rng.next_u64() % 5000;
        let counts = sample_counts(&model, n, SamplerSeed::new(0xACCE_1001, case));
        let x2 = pearson_statistic(&model, &counts).unwrap();
        let (s1, s2) = decompose(&model, &counts).unwrap();
        let err = (x2 - (s1 + s2)).abs() / x2.max(1.0);
        worst = worst.max(err);
        assert!(
            err <= 1e-10,
            "case {case}: k={k}, n={n}, relative defect {err:.3e}"
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(
        "decomposition identity",
        format!("worst relative defect {worst:.3e} over 1000 cases in {elapsed:.2?}"),
    );
}

/// Criterion 2: the limit CDF collapses to the normal at s = 0 and hits the
/// exact wedge value at (0, 1).
#[test]
fn c02_limit_cdf_anchors() {
    let start = Instant::now();
    let quad = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let x = -6.0 + 12.0 * i as f64 / 99.0;
        let diff = (psi_cdf(x, 0.0, &quad) - std_normal_cdf(x)).abs();
        worst = worst.max(diff);
        assert!(diff <= 1e-10, "x={x}: {diff:.3e}");
    }
    let wedge = psi_cdf(0.0, 1.0, &quad);
    assert!(
        (wedge - 0.25).abs() <= 1e-8,
        "wedge probability {wedge} differs from 1/4"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(
        "limit CDF anchors",
        format!(
            "max |Psi(x,0)-Phi(x)| = {worst:.3e}; Psi(0,1) = {wedge:.10} in {elapsed:.2?}"
        ),
    );
}

/// Criterion 3: critical values are fixed points of the upper-tail equation
/// on the full (alpha, s) grid, and psi_0.05(0) is the normal critical value.
#[test]
fn c03_critical_value_fixed_points() {
    let start = Instant::now();
    let quad = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for &alpha in &[0.01f64, 0.05, 0.1] {
        for &s in &[0.0f64, 0.5, 1.0, 3.0, 10.0] {
            let psi = psi_critical(CriticalQuery::new(alpha, s).unwrap(), &quad).unwrap();
            let residual = (1.0 - psi_cdf(psi, s, &quad) - alpha).abs();
            worst = worst.max(residual);
            assert!(residual <= 1e-8, "alpha={alpha}, s={s}: residual {residual:.3e}");
        }
    }
    let z = psi_critical(CriticalQuery::new(0.05f64, 0.0).unwrap(), &quad).unwrap();
    assert!((z - 1.64485).abs() <= 1e-4, "psi_0.05(0) = {z}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(
        "critical-value fixed points",
        format!("worst residual {worst:.3e}; psi_0.05(0) = {z:.6} in {elapsed:.2?}"),
    );
}

/// Criterion 4: simulated means of the decomposition match the null and
/// alternative expectations, and the simulated variance of the linear term
/// matches its formula.
#[test]
fn c04_moment_oracle() {
    let start = Instant::now();
    let n = 200u64;
    let k = 100usize;
    let replicates = 100_000u64;
    let null = FamilySpec::Family1 { k, r: 0.2f64 }.build_model().unwrap();
    let alt = FamilySpec::Family1 { k, r: 0.3f64 }.build_model().unwrap();
    let shift = alternative_shift(&null, &alt, n).unwrap();
    let centered = (k - 1) as f64;

    let run = |model: &CellModel<f64>, seed: u64| {
        let table = AliasTable::new(model);
        let mut buf = Vec::new();
        let mut sum1 = 0.0f64;
        let mut sum2 = 0.0f64;
        let mut sq1 = 0.0f64;
        let mut sq2 = 0.0f64;
        for rep in 0..replicates {
            table.sample_counts_into(n, SamplerSeed::new(seed, rep), &mut buf);
            let counts = CountVector::new(buf.clone()).unwrap();
            let (s1, s2) = decompose(&null, &counts).unwrap();
            let d1 = s1 - centered;
            sum1 += d1;
            sq1 += d1 * d1;
            sum2 += s2;
            sq2 += s2 * s2;
        }
        let r = replicates as f64;
        let mean1 = sum1 / r;
        let mean2 = sum2 / r;
        let var1 = sq1 / r - mean1 * mean1;
        let var2 = sq2 / r - mean2 * mean2;
        (mean1, mean2, (var1 / r).sqrt(), (var2 / r).sqrt(), var2)
    };

    // Under the null both centered means are zero.
    let (m1, m2, se1, se2, var2) = run(&null, 0xACCE_0004);
    assert!(m1.abs() <= 4.0 * se1, "null quadratic mean {m1} vs 4se {se1}");
    assert!(m2.abs() <= 4.0 * se2, "null linear mean {m2} vs 4se {se2}");

    // The simulated variance of the linear term matches its formula.
    let v = variances(&null, n, None).unwrap();
    assert!(
        (var2 - v.sigma_n2_sq).abs() <= 0.05 * v.sigma_n2_sq,
        "linear-term variance {var2} vs {}",
        v.sigma_n2_sq
    );

    // Under the alternative the means sit at the computed shifts.
    let (a1, a2, ase1, ase2, _) = run(&alt, 0xACCE_0044);
    assert!(
        (a1 - shift.s_n1_shift).abs() <= 4.0 * ase1,
        "alternative quadratic mean {a1} vs shift {}",
        shift.s_n1_shift
    );
    assert!(
        (a2 - shift.s_n2_shift).abs() <= 4.0 * ase2,
        "alternative linear mean {a2} vs shift {}",
        shift.s_n2_shift
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(
        "moment oracle",
        format!(
            "null means ({m1:.4}, {m2:.4}); alternative means ({a1:.3}, {a2:.3}) vs shifts ({:.3}, {:.3}); var(S_n2) {var2:.2} vs {:.2} in {elapsed:.2?}",
            shift.s_n1_shift, shift.s_n2_shift, v.sigma_n2_sq
        ),
    );
}

/// Criterion 5: the moment gaps stay above the round-off floor on random
/// weightings and vanish for proportional weights.
#[test]
fn c05_moment_gap_inequality() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0005);
    let uniform = |rng: &mut ChaCha8Rng| (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0);
    for case in 0..1000 {
        let k = 2 + (rng.next_u64() % 199) as usize;
        let mut probs: Vec<f64> = (0..k).map(|_| 0.01 + uniform(&mut rng)).collect();
        let pt: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= pt);
        let mut weights: Vec<f64> = (0..k).map(|_| uniform(&mut rng)).collect();
        weights[0] += 0.25;
        let wt: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w *= k as f64 / wt);

        let kf = k as f64;
        for j in 1..=3i32 {
            let raw: f64 = probs
                .iter()
                .zip(&weights)
                .map(|(&p, &c)| c.powi(j + 1) / p.powi(j))
                .sum::<f64>()
                - kf.powi(j + 1);
            assert!(
                raw >= -1e-9 * kf.powi(j + 1),
                "case {case}, j={j}: gap {raw:.3e}"
            );
            // Proportional weights sit at the equality case.
            let prop: f64 = probs
                .iter()
                .map(|&p| (kf * p).powi(j + 1) / p.powi(j))
                .sum::<f64>()
                - kf.powi(j + 1);
            assert!(
                prop.abs() <= 1e-9 * kf.powi(j + 1),
                "case {case}, j={j}: proportional gap {prop:.3e}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass(
        "moment gap inequality",
        format!("1000 random weightings, orders 1..3 in {elapsed:.2?}"),
    );
}

fn five_tests(alpha: f64) -> Vec<TestSpec<f64>> {
    vec![
        TestSpec::pearson(alpha).unwrap(),
        TestSpec::d_squared(alpha).unwrap(),
        TestSpec::abs_combo(1.0, alpha).unwrap(),
        TestSpec::abs_combo(3.0, alpha).unwrap(),
        TestSpec::abs_combo(5.0, alpha).unwrap(),
    ]
}

fn run_study(
    n: u64,
    null_spec: FamilySpec<f64>,
    true_spec: FamilySpec<f64>,
    tests: Vec<TestSpec<f64>>,
    seed: u64,
) -> Vec<f64> {
    let config = StudyConfig {
        n,
        null_spec,
        true_spec,
        tests,
        replicates: 10_000,
        seed,
    };
    estimate_size_power(&config)
        .unwrap()
        .outcomes
        .iter()
        .map(|o| o.frequency)
        .collect()
}

/// Criterion 6: estimated sizes reproduce the published 10^4-replicate grid
/// within +-0.015 for all five tests.
#[test]
fn c06_size_grid_reproduction() {
    let start = Instant::now();
    let rows: [(u64, usize, f64, [f64; 5]); 4] = [
        (100, 50, 0.1, [0.0679, 0.0638, 0.0642, 0.0536, 0.0500]),
        (100, 50, 1.0, [0.0576; 5]),
        (1000, 1000, 0.2, [0.0525, 0.0548, 0.0526, 0.0523, 0.0489]),
        (1000, 1000, 1.0, [0.0530; 5]),
    ];
    let mut details = Vec::new();
    for (row, (n, k, r, reference)) in rows.into_iter().enumerate() {
        let spec = FamilySpec::Family1 { k, r };
        let sizes = run_study(n, spec.clone(), spec, five_tests(0.05), 0xACCE_0006 + row as u64);
        for (test, (&size, &expected)) in sizes.iter().zip(reference.iter()).enumerate() {
            assert!(
                (size - expected).abs() <= 0.015,
                "n={n}, k={k}, r={r}, test {test}: size {size:.4} vs reference {expected:.4}"
            );
        }
        details.push(format!(
            "n={n} k={k} r={r}: {}",
            sizes
                .iter()
                .map(|s| format!("{s:.4}"))
                .collect::<Vec<_>>()
                .join("/")
        ));
        if r == 1.0 {
            assert!(
                sizes.windows(2).all(|w| w[0] == w[1]),
                "equiprobable cells must make all five tests identical"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    pass(
        "size grid reproduction",
        format!("{} in {elapsed:.2?}", details.join("; ")),
    );
}

/// Criterion 7: the published power-and-bias pattern. Sampling from a
/// lighter two-block alternative kills the Pearson test completely while the
/// combined statistics stay near full power; under a heavier alternative the
/// Pearson test keeps its published power.
#[test]
fn c07_power_and_bias_reproduction() {
    let start = Instant::now();
    let power = run_study(
        1000,
        FamilySpec::Family1 { k: 3000, r: 0.2 },
        FamilySpec::Family1 { k: 3000, r: 0.1 },
        five_tests(0.05),
        0xACCE_0007,
    );
    assert!(power[0] <= 0.005, "Pearson power {imp:.4}", imp = power[0]);
    assert!(
        (power[1] - 0.0657).abs() <= 0.02,
        "quadratic-part power {:.4} vs 0.0657",
        power[1]
    );
    assert!(power[2] >= 0.99, "c=1 combo power {:.4}", power[2]);
    assert!(power[3] >= 0.999, "c=3 combo power {:.4}", power[3]);

    let heavier = run_study(
        100,
        FamilySpec::Family1 { k: 50, r: 0.2 },
        FamilySpec::Family1 { k: 50, r: 0.3 },
        vec![TestSpec::pearson(0.05).unwrap()],
        0xACCE_0017,
    );
    assert!(
        (heavier[0] - 0.3207).abs() <= 0.03,
        "Pearson power {:.4} vs 0.3207",
        heavier[0]
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    pass(
        "power and bias reproduction",
        format!(
            "lighter alternative: {}; heavier: {:.4} in {elapsed:.2?}",
            power
                .iter()
                .map(|p| format!("{p:.4}"))
                .collect::<Vec<_>>()
                .join("/"),
            heavier[0]
        ),
    );
}

/// Criterion 8: the sparse-family pattern at k = 10000 cells for n = 1000.
#[test]
fn c08_sparse_family_pattern() {
    let start = Instant::now();
    let power = run_study(
        1000,
        FamilySpec::Family3 { k: 10_000, r: 2.0 },
        FamilySpec::Family3 { k: 10_000, r: 1.0 },
        vec![
            TestSpec::pearson(0.05).unwrap(),
            TestSpec::abs_combo(1.0, 0.05).unwrap(),
        ],
        0xACCE_0008,
    );
    assert!(power[0] <= 0.005, "Pearson power {:.4}", power[0]);
    assert!(power[1] >= 0.999, "c=1 combo power {:.4}", power[1]);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    pass(
        "sparse family pattern",
        format!(
            "Pearson {:.4}, combo {:.4} in {elapsed:.2?}",
            power[0], power[1]
        ),
    );
}

/// Criterion 9: block weights rescue power under equiprobable cells, beating
/// the plain quadratic test by a wide margin.
#[test]
fn c09_weighted_test_gain() {
    let start = Instant::now();
    let k = 3000usize;
    let weights = topk0_weights(k, 0.8f64, true).unwrap();
    let power = run_study(
        1000,
        FamilySpec::Equiprobable { k },
        FamilySpec::Family1 { k, r: 0.8 },
        vec![
            TestSpec::d_squared(0.05).unwrap(),
            TestSpec::weighted_combo(1.0, weights, 0.05).unwrap(),
        ],
        0xACCE_0009,
    );
    let gain = power[1] - power[0];
    assert!(
        gain >= 0.3,
        "weighted gain {gain:.4} (weighted {:.4}, quadratic {:.4})",
        power[1],
        power[0]
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    pass(
        "weighted test gain",
        format!(
            "quadratic {:.4}, weighted {:.4}, gain {gain:.4} in {elapsed:.2?}",
            power[0], power[1]
        ),
    );
}

/// Criterion 10: under the null the empirical CDF of the standardized
/// combined statistic tracks its limit within Kolmogorov distance 0.02.
#[test]
fn c10_empirical_cdf_agreement() {
    let start = Instant::now();
    let spec = FamilySpec::Family1 {
        k: 3000usize,
        r: 0.2f64,
    };
    let config = StudyConfig {
        n: 1000,
        null_spec: spec.clone(),
        true_spec: spec,
        tests: vec![],
        replicates: 10_000,
        seed: 0xACCE_0010,
    };
    let distances: Vec<(f64, f64)> = [0.0, 1.0, 3.0]
        .into_iter()
        .map(|c| (c, ecdf_vs_theory(&config, c).unwrap().sup_distance))
        .collect();
    let detail = distances
        .iter()
        .map(|(c, d)| format!("c={c}: {d:.4}"))
        .collect::<Vec<_>>()
        .join(", ");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    for &(c, d) in &distances {
        // Known to fail at c=0: the standardized quadratic part carries
        // skewness ~0.23 at this configuration, so its Kolmogorov distance
        // from the symmetric normal limit sits at 0.02-0.035 for 10^4
        // replicates (cross-checked against an independent implementation).
        assert!(d < 0.02, "sup-distance bound violated ({detail})");
        let _ = c;
    }
    pass(
        "empirical CDF agreement",
        format!("{detail} in {elapsed:.2?}"),
    );
}

/// Criterion 11: the variance formulas at the lottery scale; the historical
/// dataset itself is unavailable, so the end-to-end workflow runs on
/// synthetic event files in the CLI suite instead.
#[test]
fn c11_lottery_scale_variances() {
    let model = CellModel::<f64>::equiprobable(1000).unwrap();
    let v = variances(&model, 2919, None).unwrap();
    let sigma_n1 = v.sigma_n1_sq.sqrt();
    assert!((sigma_n1 - 44.69).abs() <= 0.01, "sigma_n1 = {sigma_n1}");
    assert_eq!(model.k() - 1, 999);
    assert_eq!(v.sigma_n2_sq, 0.0);
    pass(
        "lottery-scale variances",
        format!("sigma_n1 = {sigma_n1:.4}, centered mean k-1 = 999"),
    );
}

/// The kinds used by the acceptance studies serialize to their wire names.
#[test]
fn report_kind_wire_names() {
    assert_eq!(
        serde_json::to_string(&TestKind::Pearson).unwrap(),
        "\"pearson_R\""
    );
    assert_eq!(
        serde_json::to_string(&TestKind::DSquared).unwrap(),
        "\"dsq_R0\""
    );
    assert_eq!(
        serde_json::to_string(&TestKind::AbsCombo).unwrap(),
        "\"abs_combo_Rc\""
    );
    assert_eq!(
        serde_json::to_string(&TestKind::WeightedCombo).unwrap(),
        "\"weighted_combo_Rc_bar\""
    );
}
