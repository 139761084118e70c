//! Subcommand argument definitions and implementations.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use sparse_gof::decision::{bonferroni, run_test};
use sparse_gof::limit::{psi_critical, CriticalQuery, QuadratureSpec};
use sparse_gof::sim::{ecdf_vs_theory, estimate_size_power, StudyConfig};
use sparse_gof::stats::{condition_diagnostics, stat_report};
use sparse_gof::{topk0_weights, EcdfReport64, FamilySpec64, TestSpec64, WeightVector64};

use crate::ingest::{
    ingest_counts, ingest_events, read_id_list, read_mapping, read_model, CountsData, PeriodRule,
};
use crate::report::{
    fmt_float, BonferroniBlock, DatasetBlock, TestCommandReport, TestConfigEcho,
};

#[derive(Parser)]
#[command(
    name = "sparse-gof",
    version,
    about = "Goodness-of-fit tests for sparse multinomial data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Test observed counts or raw events against a null model
    Test(TestArgs),
    /// Estimate test sizes and powers by Monte Carlo
    Simulate(SimulateArgs),
    /// Print an upper-tail critical value of the Z1 + s|Z2| limit law
    Critical(CriticalArgs),
    /// Print finite-sample normal-approximation diagnostics for a model
    Check(CheckArgs),
    /// Emit empirical-vs-limit CDF curves under a null model
    Ecdf(EcdfArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args)]
pub struct TestArgs {
    /// Counts CSV (`cell_id,count`)
    #[arg(long, conflicts_with = "events")]
    pub counts: Option<PathBuf>,
    /// Events CSV (`label[,date]`), one event per row
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Model CSV (`cell_id,p[,weight]`); defaults to equiprobable over the
    /// counts file's cells, required for --events
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Label-to-cell mapping CSV (`label,cell_id`) for --events
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Comma-separated ISO dates bounding half-open periods
    #[arg(long)]
    pub periods: Option<String>,
    /// Combine per-period decisions at level alpha / #periods
    #[arg(long, requires = "periods")]
    pub bonferroni: bool,
    /// Tests to run: `R`, `R0`, `R<c>`, `Rbar<c>` (comma-separated)
    #[arg(long, default_value = "R,R0,R1")]
    pub tests: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print floats with full round-trip precision instead of 6 significant
    /// digits (JSON is always full precision)
    #[arg(long)]
    pub full_precision: bool,
}

#[derive(Args)]
pub struct WeightArgs {
    /// Block-weight selector: first round(h*k) cells in model order get k/k0
    #[arg(long)]
    pub weight_h: Option<f64>,
    /// Block-weight selector: cells whose id starts with any given prefix
    #[arg(long, conflicts_with = "weight_h")]
    pub weight_prefix: Option<String>,
    /// Block-weight selector: file of cell ids, one per line
    #[arg(long, conflicts_with_all = ["weight_h", "weight_prefix"])]
    pub weight_ids: Option<PathBuf>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Events per replicate
    #[arg(long)]
    pub n: u64,
    /// Cell count for the named families
    #[arg(long)]
    pub k: Option<usize>,
    /// Null model: `equiprobable | family1:<r> | family2:<r'> | family3:<r> | custom:<model.csv>`
    #[arg(long)]
    pub null: String,
    /// True (sampling) model; defaults to the null model
    #[arg(long = "true")]
    pub true_spec: Option<String>,
    /// Tests to run: `R`, `R0`, `R<c>`, `Rbar<c>` (comma-separated)
    #[arg(long, default_value = "R,R0,R1,R3,R5")]
    pub tests: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Block weights for Rbar tests: first round(h*k) cells get k/k0
    #[arg(long)]
    pub weight_h: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub full_precision: bool,
}

#[derive(Args)]
pub struct CriticalArgs {
    #[arg(long)]
    pub alpha: f64,
    /// Mixture ratio s = c*sigma_n2/sigma_n1 of the limit law
    #[arg(long)]
    pub s: f64,
    /// Upper truncation of the limit-law integral
    #[arg(long)]
    pub truncation: Option<f64>,
    /// Base quadrature node count
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub full_precision: bool,
}

#[derive(Args)]
pub struct CheckArgs {
    /// Model CSV (`cell_id,p[,weight]`)
    #[arg(long, required_unless_present = "null", conflicts_with = "null")]
    pub model: Option<PathBuf>,
    /// Named model instead of a file (needs --k)
    #[arg(long)]
    pub null: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Sample size the diagnostics are evaluated at
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub full_precision: bool,
}

#[derive(Args)]
pub struct EcdfArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub k: Option<usize>,
    /// Null model (also the sampling model): `equiprobable | family1:<r> | ...`
    #[arg(long)]
    pub null: String,
    /// Combination weight c of the statistic `S_n1 + c|S_n2|`
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 10_000)]
    pub replicates: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub full_precision: bool,
}

/// A parsed `--tests` token.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestToken {
    Pearson,
    DSquared,
    AbsCombo(f64),
    WeightedCombo(f64),
}

impl TestToken {
    pub fn parse_list(tokens: &str) -> Result<Vec<(String, TestToken)>> {
        tokens
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| Ok((t.to_owned(), Self::parse(t)?)))
            .collect()
    }

    fn parse(token: &str) -> Result<Self> {
        if token == "R" {
            return Ok(Self::Pearson);
        }
        if token == "R0" {
            return Ok(Self::DSquared);
        }
        if let Some(rest) = token.strip_prefix("Rbar") {
            let c: f64 = rest
                .parse()
                .with_context(|| format!("parsing combination weight in '{token}'"))?;
            return Ok(Self::WeightedCombo(c));
        }
        if let Some(rest) = token.strip_prefix('R') {
            let c: f64 = rest
                .parse()
                .with_context(|| format!("parsing combination weight in '{token}'"))?;
            return Ok(Self::AbsCombo(c));
        }
        bail!("unknown test token '{token}' (expected R, R0, R<c>, or Rbar<c>)");
    }

    fn into_spec(self, alpha: f64, weights: Option<&WeightVector64>) -> Result<TestSpec64> {
        let spec = match self {
            Self::Pearson => TestSpec64::pearson(alpha),
            Self::DSquared => TestSpec64::d_squared(alpha),
            Self::AbsCombo(c) => TestSpec64::abs_combo(c, alpha),
            Self::WeightedCombo(c) => {
                let w = weights
                    .cloned()
                    .ok_or_else(|| anyhow!("Rbar tests need weights (--weight-h, --weight-prefix, --weight-ids, or a model weight column)"))?;
                TestSpec64::weighted_combo(c, w, alpha)
            }
        };
        spec.map_err(|e| anyhow!(e))
    }
}

/// Parses a `--null`/`--true` model token.
pub fn parse_family(token: &str, k: Option<usize>) -> Result<FamilySpec64> {
    let need_k = || k.ok_or_else(|| anyhow!("model '{token}' needs --k"));
    if token == "equiprobable" {
        return Ok(FamilySpec64::Equiprobable { k: need_k()? });
    }
    if let Some((name, value)) = token.split_once(':') {
        match name {
            "family1" => {
                return Ok(FamilySpec64::Family1 {
                    k: need_k()?,
                    r: value.parse().with_context(|| format!("parsing r in '{token}'"))?,
                })
            }
            "family2" => {
                return Ok(FamilySpec64::Family2 {
                    k: need_k()?,
                    r_prime: value
                        .parse()
                        .with_context(|| format!("parsing r' in '{token}'"))?,
                })
            }
            "family3" => {
                return Ok(FamilySpec64::Family3 {
                    k: need_k()?,
                    r: value.parse().with_context(|| format!("parsing r in '{token}'"))?,
                })
            }
            "custom" => {
                let model = read_model(Path::new(value))?;
                if let Some(expected) = k {
                    if expected != model.probs.len() {
                        bail!(
                            "--k {expected} disagrees with {} cells in {value}",
                            model.probs.len()
                        );
                    }
                }
                return Ok(FamilySpec64::Custom { probs: model.probs });
            }
            _ => {}
        }
    }
    bail!("unknown model '{token}' (expected equiprobable, family1:<r>, family2:<r'>, family3:<r>, or custom:<path>)");
}

/// Resolves cell weights from the selector flags or the model file's weight
/// column. Returns the weights and a description of where they came from.
fn resolve_weights(
    args: &WeightArgs,
    ids: &[String],
    model_weights: Option<&WeightVector64>,
) -> Result<Option<(WeightVector64, String)>> {
    let k = ids.len();
    if let Some(h) = args.weight_h {
        let w = topk0_weights(k, h, true).map_err(|e| anyhow!(e))?;
        return Ok(Some((w, format!("top-k0 block, h={h}, leading cells"))));
    }
    if let Some(prefixes) = &args.weight_prefix {
        let prefixes: Vec<&str> = prefixes.split(',').map(str::trim).collect();
        let active: Vec<bool> = ids
            .iter()
            .map(|id| prefixes.iter().any(|p| id.starts_with(p)))
            .collect();
        return Ok(Some((
            block_weights(&active)?,
            format!("cells with id prefix in {{{}}}", prefixes.join(", ")),
        )));
    }
    if let Some(path) = &args.weight_ids {
        let listed = read_id_list(path)?;
        let index: BTreeMap<&str, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut active = vec![false; k];
        for id in &listed {
            let &slot = index
                .get(id.as_str())
                .ok_or_else(|| anyhow!("{}: unknown cell id '{id}'", path.display()))?;
            active[slot] = true;
        }
        return Ok(Some((
            block_weights(&active)?,
            format!("cells listed in {}", path.display()),
        )));
    }
    Ok(model_weights
        .cloned()
        .map(|w| (w, "model file weight column".to_owned())))
}

/// Weight k/k0 on the active cells, zero elsewhere.
fn block_weights(active: &[bool]) -> Result<WeightVector64> {
    let k = active.len();
    let k0 = active.iter().filter(|&&a| a).count();
    if k0 == 0 || k0 == k {
        bail!("weight selection must pick strictly between 0 and k cells, picked {k0} of {k}");
    }
    let value = k as f64 / k0 as f64;
    WeightVector64::new(
        active
            .iter()
            .map(|&a| if a { value } else { 0.0 })
            .collect(),
    )
    .map_err(|e| anyhow!(e))
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        bail!("--alpha must lie strictly between 0 and 1, got {alpha}");
    }
    Ok(())
}

pub fn cmd_test(args: &TestArgs) -> Result<String> {
    validate_alpha(args.alpha)?;
    let tokens = TestToken::parse_list(&args.tests)?;
    if tokens.is_empty() {
        bail!("--tests selected no tests");
    }
    let model_file = args.model.as_deref().map(read_model).transpose()?;
    let periods = args.periods.as_deref().map(PeriodRule::parse).transpose()?;

    // Assemble (label, counts) datasets plus the model and cell ids.
    let (ids, model, model_weights, datasets) = if let Some(counts_path) = &args.counts {
        if periods.is_some() {
            bail!("--periods needs --events (counts files carry no dates)");
        }
        let CountsData {
            ids,
            model,
            counts,
            weights,
        } = ingest_counts(counts_path, model_file)?;
        (ids, model, weights, vec![(None, counts)])
    } else if let Some(events_path) = &args.events {
        let model_file =
            model_file.ok_or_else(|| anyhow!("--events needs --model to define the cells"))?;
        let mapping = args.map.as_deref().map(read_mapping).transpose()?;
        let period_counts =
            ingest_events(events_path, &model_file, mapping.as_ref(), periods.as_ref())?;
        let weights = model_file
            .weights
            .as_ref()
            .map(|w| WeightVector64::new(w.clone()))
            .transpose()
            .map_err(|e| anyhow!("model weights: {e}"))?;
        let model = model_file.cell_model()?;
        let datasets = period_counts
            .into_iter()
            .map(|p| (Some(p.label), p.counts))
            .collect();
        (model_file.ids, model, weights, datasets)
    } else {
        bail!("one of --counts or --events is required");
    };

    let resolved = resolve_weights(&args.weights, &ids, model_weights.as_ref())?;
    let (weights, weight_source) = match resolved {
        Some((w, source)) => (Some(w), Some(source)),
        None => (None, None),
    };

    let specs: Vec<TestSpec64> = tokens
        .iter()
        .map(|(_, token)| token.into_spec(args.alpha, weights.as_ref()))
        .collect::<Result<_>>()?;

    let mut blocks = Vec::new();
    for (label, counts) in &datasets {
        if counts.n() == 0 {
            bail!(
                "period {} contains no events",
                label.as_deref().unwrap_or("all")
            );
        }
        let stats = stat_report(&model, counts, weights.as_ref()).map_err(|e| anyhow!(e))?;
        let tests = specs
            .iter()
            .map(|spec| run_test(spec, &model, counts))
            .collect::<sparse_gof::Result<Vec<_>>>()
            .map_err(|e| anyhow!(e))?;
        let diagnostics =
            condition_diagnostics(&model, counts.n(), weights.as_ref()).map_err(|e| anyhow!(e))?;
        blocks.push(DatasetBlock {
            period: label.clone(),
            n: counts.n(),
            statistics: (&stats).into(),
            variances: (&stats).into(),
            tests,
            diagnostics,
        });
    }

    let n_total = datasets.iter().map(|(_, c)| c.n()).sum();
    let config = TestConfigEcho {
        alpha: args.alpha,
        tests: tokens.iter().map(|(t, _)| t.clone()).collect(),
        counts_path: args.counts.as_ref().map(|p| p.display().to_string()),
        events_path: args.events.as_ref().map(|p| p.display().to_string()),
        model_path: args.model.as_ref().map(|p| p.display().to_string()),
        k: model.k(),
        n_total,
        periods: periods
            .as_ref()
            .map(|r| (0..r.count()).map(|i| r.label(i)).collect()),
        bonferroni: args.bonferroni,
        weight_source,
    };

    let report = if periods.is_none() && blocks.len() == 1 {
        let block = blocks.pop().expect("one block");
        TestCommandReport::Single {
            config,
            statistics: block.statistics,
            variances: block.variances,
            tests: block.tests,
            diagnostics: block.diagnostics,
        }
    } else {
        // One Bonferroni family per test kind: each is held to
        // alpha / #periods, and any rejection rejects overall.
        let combined = if args.bonferroni {
            let mut overall = false;
            let mut threshold = args.alpha;
            for slot in 0..specs.len() {
                let per_period: Vec<_> = blocks.iter().map(|b| b.tests[slot]).collect();
                let (reject, t) = bonferroni(&per_period, args.alpha).map_err(|e| anyhow!(e))?;
                overall |= reject;
                threshold = t;
            }
            Some(BonferroniBlock {
                threshold,
                reject_overall: overall,
            })
        } else {
            None
        };
        TestCommandReport::Periodized {
            config,
            periods: blocks,
            bonferroni: combined,
        }
    };

    Ok(match args.format {
        Format::Json => to_json(&report)?,
        Format::Csv => report.to_csv(args.full_precision),
    })
}

/// Trimmed config echo for the simulate report.
#[derive(Serialize, Deserialize)]
struct SimulateConfigEcho {
    n: u64,
    k: usize,
    null: String,
    #[serde(rename = "true")]
    true_model: String,
    alpha: f64,
    replicates: u64,
    seed: u64,
    tests: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    weight_h: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct SimulateResult {
    test: String,
    kind: sparse_gof::TestKind,
    c: f64,
    rejections: u64,
    frequency: f64,
    std_error: f64,
}

#[derive(Serialize, Deserialize)]
struct SimulateReport {
    config: SimulateConfigEcho,
    results: Vec<SimulateResult>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<String> {
    validate_alpha(args.alpha)?;
    let null_spec = parse_family(&args.null, args.k)?;
    let true_token = args.true_spec.clone().unwrap_or_else(|| args.null.clone());
    let true_spec = parse_family(&true_token, args.k.or(Some(null_spec.k())))?;
    let tokens = TestToken::parse_list(&args.tests)?;
    if tokens.is_empty() {
        bail!("--tests selected no tests");
    }
    let weights = args
        .weight_h
        .map(|h| topk0_weights(null_spec.k(), h, true))
        .transpose()
        .map_err(|e| anyhow!(e))?;
    let tests: Vec<TestSpec64> = tokens
        .iter()
        .map(|(_, token)| token.into_spec(args.alpha, weights.as_ref()))
        .collect::<Result<_>>()?;

    let config = StudyConfig {
        n: args.n,
        null_spec,
        true_spec,
        tests,
        replicates: args.replicates,
        seed: args.seed,
    };
    let report = estimate_size_power(&config).map_err(|e| anyhow!(e))?;

    let echo = SimulateConfigEcho {
        n: args.n,
        k: config.null_spec.k(),
        null: args.null.clone(),
        true_model: true_token,
        alpha: args.alpha,
        replicates: args.replicates,
        seed: args.seed,
        tests: tokens.iter().map(|(t, _)| t.clone()).collect(),
        weight_h: args.weight_h,
    };
    let results: Vec<SimulateResult> = tokens
        .iter()
        .zip(&report.outcomes)
        .map(|((token, _), o)| SimulateResult {
            test: token.clone(),
            kind: o.kind,
            c: o.c,
            rejections: o.rejections,
            frequency: o.frequency,
            std_error: o.std_error,
        })
        .collect();

    match args.format {
        Format::Json => to_json(&SimulateReport {
            config: echo,
            results,
        }),
        Format::Csv => {
            let mut out =
                String::from("n,k,null,true,alpha,replicates,seed,test,c,frequency,std_error\n");
            let full = args.full_precision;
            for r in &results {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    echo.n,
                    echo.k,
                    echo.null,
                    echo.true_model,
                    fmt_float(echo.alpha, full),
                    echo.replicates,
                    echo.seed,
                    r.test,
                    fmt_float(r.c, full),
                    fmt_float(r.frequency, full),
                    fmt_float(r.std_error, full),
                )?;
            }
            Ok(out)
        }
    }
}

pub fn cmd_critical(args: &CriticalArgs) -> Result<String> {
    let quad = QuadratureSpec::new(
        args.truncation.unwrap_or(10.0),
        args.nodes.unwrap_or(128),
    )
    .map_err(|e| anyhow!(e))?;
    let query = CriticalQuery::new(args.alpha, args.s).map_err(|e| anyhow!(e))?;
    let value = psi_critical(query, &quad).map_err(|e| anyhow!(e))?;
    Ok(format!("{}\n", fmt_float(value, args.full_precision)))
}

#[derive(Serialize, Deserialize)]
struct CheckConfigEcho {
    n: u64,
    k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    model_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    null: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    weight_source: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct CheckReport {
    config: CheckConfigEcho,
    diagnostics: sparse_gof::ConditionDiagnostics64,
}

pub fn cmd_check(args: &CheckArgs) -> Result<String> {
    let (model, ids, model_weights, null_token) = if let Some(path) = &args.model {
        let file = read_model(path)?;
        let weights = file
            .weights
            .as_ref()
            .map(|w| WeightVector64::new(w.clone()))
            .transpose()
            .map_err(|e| anyhow!("model weights: {e}"))?;
        (file.cell_model()?, file.ids, weights, None)
    } else {
        let token = args.null.as_deref().expect("clap enforces model|null");
        let spec = parse_family(token, args.k)?;
        let model = spec.build_model().map_err(|e| anyhow!(e))?;
        let ids = (0..model.k()).map(|i| i.to_string()).collect();
        (model, ids, None, Some(token.to_owned()))
    };

    let resolved = resolve_weights(&args.weights, &ids, model_weights.as_ref())?;
    let (weights, weight_source) = match resolved {
        Some((w, source)) => (Some(w), Some(source)),
        None => (None, None),
    };
    let diagnostics =
        condition_diagnostics(&model, args.n, weights.as_ref()).map_err(|e| anyhow!(e))?;

    let report = CheckReport {
        config: CheckConfigEcho {
            n: args.n,
            k: model.k(),
            model_path: args.model.as_ref().map(|p| p.display().to_string()),
            null: null_token,
            weight_source,
        },
        diagnostics,
    };
    match args.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let full = args.full_precision;
            let d = &report.diagnostics;
            let mut out = String::from("name,value\n");
            let mut row = |name: &str, value: Option<f64>| {
                if let Some(v) = value {
                    out.push_str(&format!("{name},{}\n", fmt_float(v, full)));
                }
            };
            row("c3_value", Some(d.c3_value));
            row("c4_term1", Some(d.c4_term1));
            row("c4_term2", Some(d.c4_term2));
            row("c4_value", Some(d.c4_value));
            row("c44_term1", d.c44_term1);
            row("c44_term2", d.c44_term2);
            row("c44_value", d.c44_value);
            Ok(out)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct EcdfConfigEcho {
    n: u64,
    k: usize,
    null: String,
    c: f64,
    replicates: u64,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct EcdfCommandReport {
    config: EcdfConfigEcho,
    #[serde(flatten)]
    report: EcdfReport64,
}

pub fn cmd_ecdf(args: &EcdfArgs) -> Result<String> {
    let spec = parse_family(&args.null, args.k)?;
    let config = StudyConfig {
        n: args.n,
        null_spec: spec.clone(),
        true_spec: spec,
        tests: vec![],
        replicates: args.replicates,
        seed: args.seed,
    };
    let report = ecdf_vs_theory(&config, args.c).map_err(|e| anyhow!(e))?;
    eprintln!(
        "sup_distance = {} (c = {}, s = {})",
        fmt_float(report.sup_distance, args.full_precision),
        fmt_float(args.c, args.full_precision),
        fmt_float(report.s_ratio, args.full_precision),
    );

    match args.format {
        Format::Json => to_json(&EcdfCommandReport {
            config: EcdfConfigEcho {
                n: args.n,
                k: config.null_spec.k(),
                null: args.null.clone(),
                c: args.c,
                replicates: args.replicates,
                seed: args.seed,
            },
            report,
        }),
        Format::Csv => {
            let full = args.full_precision;
            let total = report.replicates as f64;
            let mut out = String::from("x,empirical,theory\n");
            for (&x, &theory) in report.grid.iter().zip(&report.theory) {
                let below = report.sorted.partition_point(|&v| v <= x);
                writeln!(
                    out,
                    "{},{},{}",
                    fmt_float(x, full),
                    fmt_float(below as f64 / total, full),
                    fmt_float(theory, full),
                )?;
            }
            Ok(out)
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Test(args) => cmd_test(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Critical(args) => cmd_critical(args),
        Command::Check(args) => cmd_check(args),
        Command::Ecdf(args) => cmd_ecdf(args),
    }
}

/// Writes command output to `--output` or stdout.
pub fn emit(output: Option<&Path>, content: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

pub fn output_path(cli: &Cli) -> Option<&Path> {
    match &cli.command {
        Command::Test(a) => a.output.as_deref(),
        Command::Simulate(a) => a.output.as_deref(),
        Command::Critical(_) => None,
        Command::Check(a) => a.output.as_deref(),
        Command::Ecdf(a) => a.output.as_deref(),
    }
}
