//! File ingestion: counts tables, model tables, raw event streams, label
//! mappings, and period splitting.
//!
//! All tabular inputs are UTF-8 CSV with a header row. Formats:
//!
//! - counts:  `cell_id,count`
//! - model:   `cell_id,p` or `cell_id,p,weight`
//! - events:  `label` or `label,date` (ISO-8601 dates)
//! - mapping: `label,cell_id`

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use chrono::NaiveDate;

use sparse_gof::{CellModel64, CountVector, WeightVector64};

/// Parsed model file: cell ids in file order, probabilities, and an
/// optional weight column.
#[derive(Clone, Debug)]
pub struct ModelFile {
    pub ids: Vec<String>,
    pub probs: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

impl ModelFile {
    pub fn cell_model(&self) -> Result<CellModel64> {
        CellModel64::new(self.probs.clone()).map_err(|e| anyhow!(e))
    }

    pub fn index(&self) -> BTreeMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect()
    }
}

/// Equiprobable model over the given cell ids.
pub fn equiprobable_model(ids: Vec<String>) -> Result<ModelFile> {
    let k = ids.len();
    if k < 2 {
        bail!("need at least 2 cells, got {k}");
    }
    Ok(ModelFile {
        ids,
        probs: vec![1.0 / k as f64; k],
        weights: None,
    })
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

pub fn read_model(path: &Path) -> Result<ModelFile> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let has_weights = match header.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["cell_id", "p"] => false,
        ["cell_id", "p", "weight"] => true,
        _ => bail!(
            "{}: expected header 'cell_id,p[,weight]', got '{}'",
            path.display(),
            header.join(",")
        ),
    };

    let mut ids = Vec::new();
    let mut probs = Vec::new();
    let mut weights = Vec::new();
    let mut seen = BTreeMap::new();
    for record in rdr.records() {
        let record = record.with_context(|| format!("reading {}", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record
            .get(0)
            .ok_or_else(|| anyhow!("{}:{line}: missing cell_id", path.display()))?
            .to_owned();
        if let Some(previous) = seen.insert(id.clone(), line) {
            bail!(
                "{}:{line}: duplicate cell_id '{id}' (first at line {previous})",
                path.display()
            );
        }
        let p: f64 = record
            .get(1)
            .ok_or_else(|| anyhow!("{}:{line}: missing p", path.display()))?
            .parse()
            .with_context(|| format!("{}:{line}: parsing p", path.display()))?;
        ids.push(id);
        probs.push(p);
        if has_weights {
            let w: f64 = record
                .get(2)
                .ok_or_else(|| anyhow!("{}:{line}: missing weight", path.display()))?
                .parse()
                .with_context(|| format!("{}:{line}: parsing weight", path.display()))?;
            weights.push(w);
        }
    }
    if ids.is_empty() {
        bail!("{}: no model rows", path.display());
    }
    // Reject invalid probabilities eagerly with the file's own diagnostics.
    CellModel64::new(probs.clone())
        .map_err(|e| anyhow!("{}: invalid model: {e}", path.display()))?;
    Ok(ModelFile {
        ids,
        probs,
        weights: has_weights.then_some(weights),
    })
}

/// A counts file joined against its model: validated model, counts aligned
/// to the model's cell order, and the model file's weights when present.
#[derive(Clone, Debug)]
pub struct CountsData {
    pub ids: Vec<String>,
    pub model: CellModel64,
    pub counts: CountVector,
    pub weights: Option<WeightVector64>,
}

/// Reads a counts file and pairs it with `model` (equiprobable over the
/// observed cells when absent). Model cells missing from the counts file get
/// count zero; counts for unknown cells are an error.
pub fn ingest_counts(counts_path: &Path, model: Option<ModelFile>) -> Result<CountsData> {
    let mut rdr = reader(counts_path)?;
    let header: Vec<String> = rdr
        .headers()
        .with_context(|| format!("reading header of {}", counts_path.display()))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header != ["cell_id", "count"] {
        bail!(
            "{}: expected header 'cell_id,count', got '{}'",
            counts_path.display(),
            header.join(",")
        );
    }

    let mut raw: Vec<(String, u64)> = Vec::new();
    let mut seen = BTreeMap::new();
    for record in rdr.records() {
        let record = record.with_context(|| format!("reading {}", counts_path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record
            .get(0)
            .ok_or_else(|| anyhow!("{}:{line}: missing cell_id", counts_path.display()))?
            .to_owned();
        if let Some(previous) = seen.insert(id.clone(), line) {
            bail!(
                "{}:{line}: duplicate cell_id '{id}' (first at line {previous})",
                counts_path.display()
            );
        }
        let count: i64 = record
            .get(1)
            .ok_or_else(|| anyhow!("{}:{line}: missing count", counts_path.display()))?
            .parse()
            .with_context(|| format!("{}:{line}: parsing count", counts_path.display()))?;
        if count < 0 {
            bail!("{}:{line}: negative count {count}", counts_path.display());
        }
        raw.push((id, count as u64));
    }
    if raw.is_empty() {
        bail!("{}: no count rows", counts_path.display());
    }

    let model_file = match model {
        Some(m) => m,
        None => equiprobable_model(raw.iter().map(|(id, _)| id.clone()).collect())?,
    };
    let index = model_file.index();
    let mut counts = vec![0u64; model_file.ids.len()];
    for (id, count) in &raw {
        let &slot = index
            .get(id.as_str())
            .ok_or_else(|| anyhow!("{}: unknown cell '{id}'", counts_path.display()))?;
        counts[slot] = *count;
    }

    let weights = model_file
        .weights
        .as_ref()
        .map(|w| WeightVector64::new(w.clone()))
        .transpose()
        .map_err(|e| anyhow!("model weights: {e}"))?;
    Ok(CountsData {
        model: model_file.cell_model()?,
        ids: model_file.ids,
        counts: CountVector::new(counts).map_err(|e| anyhow!(e))?,
        weights,
    })
}

/// Half-open date intervals `[b_i, b_{i+1})` from strictly increasing
/// boundaries.
#[derive(Clone, Debug)]
pub struct PeriodRule {
    boundaries: Vec<NaiveDate>,
}

impl PeriodRule {
    pub fn new(boundaries: Vec<NaiveDate>) -> Result<Self> {
        if boundaries.len() < 2 {
            bail!("periods need at least 2 boundary dates");
        }
        if !boundaries.windows(2).all(|w| w[0] < w[1]) {
            bail!("period boundaries must be strictly increasing");
        }
        Ok(Self { boundaries })
    }

    pub fn parse(tokens: &str) -> Result<Self> {
        let boundaries = tokens
            .split(',')
            .map(|t| {
                NaiveDate::parse_from_str(t.trim(), "%Y-%m-%d")
                    .with_context(|| format!("parsing period boundary '{t}'"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(boundaries)
    }

    pub fn count(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn label(&self, index: usize) -> String {
        format!("{}..{}", self.boundaries[index], self.boundaries[index + 1])
    }

    fn index_of(&self, date: NaiveDate) -> Option<usize> {
        if date < self.boundaries[0] || date >= *self.boundaries.last().unwrap() {
            return None;
        }
        Some(self.boundaries.partition_point(|&b| b <= date) - 1)
    }
}

/// Label-to-cell mapping file (`label,cell_id`).
pub fn read_mapping(path: &Path) -> Result<BTreeMap<String, String>> {
    let mut rdr = reader(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != ["label", "cell_id"] {
        bail!(
            "{}: expected header 'label,cell_id', got '{}'",
            path.display(),
            header.join(",")
        );
    }
    let mut map = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let label = record
            .get(0)
            .ok_or_else(|| anyhow!("{}:{line}: missing label", path.display()))?;
        let cell = record
            .get(1)
            .ok_or_else(|| anyhow!("{}:{line}: missing cell_id", path.display()))?;
        if map.insert(label.to_owned(), cell.to_owned()).is_some() {
            bail!("{}:{line}: duplicate label '{label}'", path.display());
        }
    }
    Ok(map)
}

/// One id per line, used for explicit weight-cell selection.
pub fn read_id_list(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let ids: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect();
    if ids.is_empty() {
        bail!("{}: no cell ids", path.display());
    }
    Ok(ids)
}

/// Counts for one period of an event stream.
#[derive(Clone, Debug)]
pub struct PeriodCounts {
    pub label: String,
    pub counts: CountVector,
}

/// Tallies raw events into per-period count vectors aligned to the model's
/// cell order. Labels go through `mapping` when given, else they must be
/// cell ids themselves.
pub fn ingest_events(
    events_path: &Path,
    model: &ModelFile,
    mapping: Option<&BTreeMap<String, String>>,
    periods: Option<&PeriodRule>,
) -> Result<Vec<PeriodCounts>> {
    let mut rdr = reader(events_path)?;
    let header: Vec<String> = rdr
        .headers()
        .with_context(|| format!("reading header of {}", events_path.display()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let has_date = match header.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["label"] => false,
        ["label", "date"] => true,
        _ => bail!(
            "{}: expected header 'label[,date]', got '{}'",
            events_path.display(),
            header.join(",")
        ),
    };
    if periods.is_some() && !has_date {
        bail!(
            "{}: period splitting needs a 'date' column",
            events_path.display()
        );
    }

    let index = model.index();
    let k = model.ids.len();
    let period_count = periods.map_or(1, PeriodRule::count);
    let mut tallies = vec![vec![0u64; k]; period_count];
    let mut total = 0u64;

    for record in rdr.records() {
        let record = record.with_context(|| format!("reading {}", events_path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        let label = record
            .get(0)
            .ok_or_else(|| anyhow!("{}:{line}: missing label", events_path.display()))?;
        let cell_id = match mapping {
            Some(map) => map.get(label).map(String::as_str).ok_or_else(|| {
                anyhow!("{}:{line}: unmappable label '{label}'", events_path.display())
            })?,
            None => label,
        };
        let &slot = index.get(cell_id).ok_or_else(|| {
            anyhow!(
                "{}:{line}: label '{label}' maps to unknown cell '{cell_id}'",
                events_path.display()
            )
        })?;
        let period = match periods {
            Some(rule) => {
                let raw = record.get(1).ok_or_else(|| {
                    anyhow!("{}:{line}: missing date", events_path.display())
                })?;
                let date = NaiveDate::parse_from_str(raw, "%Y-%m-%d").with_context(|| {
                    format!("{}:{line}: parsing date '{raw}'", events_path.display())
                })?;
                rule.index_of(date).ok_or_else(|| {
                    anyhow!(
                        "{}:{line}: event date {date} falls outside every period",
                        events_path.display()
                    )
                })?
            }
            None => 0,
        };
        tallies[period][slot] += 1;
        total += 1;
    }
    if total == 0 {
        bail!("{}: no events", events_path.display());
    }

    tallies
        .into_iter()
        .enumerate()
        .map(|(i, tally)| {
            Ok(PeriodCounts {
                label: periods.map_or_else(|| "all".to_owned(), |rule| rule.label(i)),
                counts: CountVector::new(tally).map_err(|e| anyhow!(e))?,
            })
        })
        .collect()
}
