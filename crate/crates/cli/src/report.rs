//! Report schema and numeric formatting.
//!
//! JSON reports always serialize at full precision so that re-reading them
//! reproduces every numeric field bit-exactly; the 6-significant-digit
//! default applies to the human-readable CSV and scalar outputs.

use serde::{Deserialize, Serialize};

use sparse_gof::{ConditionDiagnostics64, StatReport64, TestReport64};

/// Formats a float for table output: 6 significant digits by default,
/// shortest round-trip representation with `full` set.
pub fn fmt_float(x: f64, full: bool) -> String {
    if full || !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.000000".to_owned();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..9).contains(&magnitude) {
        format!("{x:.5e}")
    } else {
        let decimals = (5 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StatisticsSection {
    pub x2: f64,
    pub s_n1: f64,
    pub s_n2: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub s_n2_bar: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VariancesSection {
    pub sigma_n1_sq: f64,
    pub sigma_n2_sq: f64,
    pub sigma_n_sq: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub sigma_n2_bar_sq: Option<f64>,
}

impl From<&StatReport64> for StatisticsSection {
    fn from(r: &StatReport64) -> Self {
        Self {
            x2: r.x2,
            s_n1: r.s_n1,
            s_n2: r.s_n2,
            s_n2_bar: r.s_n2_bar,
        }
    }
}

impl From<&StatReport64> for VariancesSection {
    fn from(r: &StatReport64) -> Self {
        Self {
            sigma_n1_sq: r.sigma_n1_sq,
            sigma_n2_sq: r.sigma_n2_sq,
            sigma_n_sq: r.sigma_n_sq,
            sigma_n2_bar_sq: r.sigma_n2_bar_sq,
        }
    }
}

/// Echo of what the `test` command ran on.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TestConfigEcho {
    pub alpha: f64,
    pub tests: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub counts_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub events_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub model_path: Option<String>,
    pub k: usize,
    pub n_total: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub periods: Option<Vec<String>>,
    pub bonferroni: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub weight_source: Option<String>,
}

/// Statistics, variances, decisions, and diagnostics for one dataset (the
/// whole input, or one period of it).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatasetBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub period: Option<String>,
    pub n: u64,
    pub statistics: StatisticsSection,
    pub variances: VariancesSection,
    pub tests: Vec<TestReport64>,
    pub diagnostics: ConditionDiagnostics64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BonferroniBlock {
    pub threshold: f64,
    pub reject_overall: bool,
}

/// Top-level report of the `test` command: a flat dataset report, or one
/// block per period plus the optional overall combination.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TestCommandReport {
    Single {
        config: TestConfigEcho,
        statistics: StatisticsSection,
        variances: VariancesSection,
        tests: Vec<TestReport64>,
        diagnostics: ConditionDiagnostics64,
    },
    Periodized {
        config: TestConfigEcho,
        periods: Vec<DatasetBlock>,
        #[serde(skip_serializing_if = "Option::is_none")]
        #[serde(default)]
        bonferroni: Option<BonferroniBlock>,
    },
}

const TEST_CSV_HEADER: &str =
    "period,kind,c,statistic,standardized,s_ratio,critical_value,p_value,reject";

fn kind_token(report: &TestReport64) -> String {
    use sparse_gof::TestKind::*;
    match report.kind {
        Pearson => "R".to_owned(),
        DSquared => "R0".to_owned(),
        AbsCombo => format!("R{}", report.c),
        WeightedCombo => format!("Rbar{}", report.c),
    }
}

fn push_test_rows(out: &mut String, period: &str, tests: &[TestReport64], full: bool) {
    for t in tests {
        out.push_str(&format!(
            "{period},{},{},{},{},{},{},{},{}\n",
            kind_token(t),
            fmt_float(t.c, full),
            fmt_float(t.statistic, full),
            fmt_float(t.standardized, full),
            fmt_float(t.s_ratio, full),
            fmt_float(t.critical_value, full),
            fmt_float(t.p_value, full),
            t.reject
        ));
    }
}

impl TestCommandReport {
    pub fn to_csv(&self, full: bool) -> String {
        let mut out = String::from(TEST_CSV_HEADER);
        out.push('\n');
        match self {
            Self::Single { tests, .. } => push_test_rows(&mut out, "all", tests, full),
            Self::Periodized {
                periods,
                bonferroni,
                ..
            } => {
                for block in periods {
                    let label = block.period.as_deref().unwrap_or("all");
                    push_test_rows(&mut out, label, &block.tests, full);
                }
                if let Some(b) = bonferroni {
                    // The threshold lands in the critical_value column: it is
                    // the cutoff the per-period p-values are held against.
                    out.push_str(&format!(
                        "overall,bonferroni,,,,,{},,{}\n",
                        fmt_float(b.threshold, full),
                        b.reject_overall
                    ));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(fmt_float(1.6448536269514722, false), "1.64485");
        assert_eq!(fmt_float(978.5677, false), "978.568");
        assert_eq!(fmt_float(0.0576, false), "0.0576000");
        assert_eq!(fmt_float(0.00085, false), "0.000850000");
        assert_eq!(fmt_float(-2.764092184117179, false), "-2.76409");
        assert_eq!(fmt_float(0.0, false), "0.000000");
        assert_eq!(fmt_float(3.2e-12, false), "3.20000e-12");
    }

    #[test]
    fn full_precision_round_trips() {
        for &x in &[1.6448536269514722, 978.5677, 3.2e-300, -0.0657] {
            let s = fmt_float(x, true);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }
}
