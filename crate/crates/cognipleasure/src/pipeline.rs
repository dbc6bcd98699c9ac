//! File-level orchestration: CSV ingestion, batch inference, label
//! evaluation, and boundary fitting.
//!
//! Input is a CSV with one utterance per row. Required columns (any order):
//! `utterance_id, expectedness, likelihood, desirability, agency,
//! controllability, calm, boredom`. Optional columns: `gold_label2`,
//! `gold_label3`, and `gold_<column>` for any numeric column. Unknown
//! columns are ignored. All outputs are deterministic byte-for-byte for
//! identical inputs: utterances keep input order and floats are rounded to a
//! fixed number of decimals before serialization.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::appraisal::{AppraisalVector, FuzzConfig};
use crate::binning::{kmeans1d, Binner, BinningError};
use crate::circumplex::{aggregate_pleasure, AggregationOptions, GeometryTable, IntensityScale};
use crate::config::{BinningMode, ConfigError, RunConfig};
use crate::emotion::{Label2, Label3};
use crate::inference::{explain, infer_all, EmotionActivation, RuleFiring};
use crate::metrics::{acc2, acc3, report, round4, ConfusionMatrix, MetricsError, MetricsReport};
use crate::rules::RuleSet;

/// Numeric appraisal columns, in schema order.
pub const NUMERIC_COLUMNS: [&str; 7] = [
    "expectedness",
    "likelihood",
    "desirability",
    "agency",
    "controllability",
    "calm",
    "boredom",
];

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing required column '{0}'")]
    MissingColumn(&'static str),
    #[error("line {line}, column '{column}': {message}")]
    BadCell {
        line: u64,
        column: String,
        message: String,
    },
    #[error("line {line}: duplicate utterance id '{id}'")]
    DuplicateUtterance { line: u64, id: String },
    #[error("malformed prediction report: {0}")]
    BadPredictions(String),
    #[error("utterance '{id}' {silo}")]
    UnalignedUtterance { id: String, silo: &'static str },
    #[error("no gold {what} available in the gold source")]
    MissingGold { what: String },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("column '{column}': {source}")]
    Binning {
        column: String,
        source: BinningError,
    },
    #[error("boundaries file has no entry for '{0}'")]
    MissingBoundaries(String),
}

/// One ingested row: the appraisal vector plus whatever gold data the file
/// carried.
#[derive(Debug, Clone, PartialEq)]
pub struct AppraisalRecord {
    pub vector: AppraisalVector,
    pub gold_label2: Option<Label2>,
    pub gold_label3: Option<Label3>,
    /// Gold numeric values keyed by base column name (`gold_calm` -> `calm`).
    pub gold_values: BTreeMap<String, f64>,
}

fn header_index(headers: &csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim() == name)
}

/// Parses appraisal records from CSV text, validating every cell.
/// Errors carry the 1-based source line and column name.
pub fn load_appraisals<R: Read>(reader: R) -> Result<Vec<AppraisalRecord>, PipelineError> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = csv_reader.headers()?.clone();

    let id_idx = header_index(&headers, "utterance_id")
        .ok_or(PipelineError::MissingColumn("utterance_id"))?;
    let mut numeric_idx = Vec::with_capacity(NUMERIC_COLUMNS.len());
    for column in NUMERIC_COLUMNS {
        numeric_idx
            .push(header_index(&headers, column).ok_or(PipelineError::MissingColumn(column))?);
    }
    let label2_idx = header_index(&headers, "gold_label2");
    let label3_idx = header_index(&headers, "gold_label3");
    let gold_value_idx: Vec<(String, usize)> = NUMERIC_COLUMNS
        .iter()
        .filter_map(|column| {
            header_index(&headers, &format!("gold_{column}")).map(|idx| (column.to_string(), idx))
        })
        .collect();

    let mut records = Vec::new();
    let mut seen_ids: BTreeMap<String, ()> = BTreeMap::new();
    for row in csv_reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let cell = |idx: usize| row.get(idx).unwrap_or("");

        let id = cell(id_idx).to_string();
        if seen_ids.insert(id.clone(), ()).is_some() {
            return Err(PipelineError::DuplicateUtterance { line, id });
        }

        let parse_numeric = |column: &str, idx: usize| -> Result<f64, PipelineError> {
            let raw = cell(idx);
            raw.parse::<f64>().map_err(|_| PipelineError::BadCell {
                line,
                column: column.to_string(),
                message: format!("'{raw}' is not a number"),
            })
        };

        let mut values = [0.0f64; 7];
        for (slot, (column, &idx)) in values
            .iter_mut()
            .zip(NUMERIC_COLUMNS.iter().zip(&numeric_idx))
        {
            *slot = parse_numeric(column, idx)?;
        }
        let [expectedness, likelihood, desirability, agency, controllability, calm, boredom] =
            values;
        let vector = AppraisalVector::new(
            id,
            expectedness,
            likelihood,
            desirability,
            agency,
            controllability,
            calm,
            boredom,
        )
        .map_err(|e| match &e {
            crate::appraisal::AppraisalError::OutOfRange { field, .. } => PipelineError::BadCell {
                line,
                column: field.to_string(),
                message: e.to_string(),
            },
            _ => PipelineError::BadCell {
                line,
                column: "utterance_id".to_string(),
                message: e.to_string(),
            },
        })?;

        let gold_label2 = match label2_idx.map(cell).filter(|s| !s.is_empty()) {
            None => None,
            Some(raw) => Some(Label2::parse(raw).ok_or_else(|| PipelineError::BadCell {
                line,
                column: "gold_label2".to_string(),
                message: format!("'{raw}' is not Pleasant/Unpleasant"),
            })?),
        };
        let gold_label3 = match label3_idx.map(cell).filter(|s| !s.is_empty()) {
            None => None,
            Some(raw) => Some(Label3::parse(raw).ok_or_else(|| PipelineError::BadCell {
                line,
                column: "gold_label3".to_string(),
                message: format!("'{raw}' is not Pleasant/Unpleasant/Neutral"),
            })?),
        };
        let mut gold_values = BTreeMap::new();
        for (column, idx) in &gold_value_idx {
            let raw = cell(*idx);
            if raw.is_empty() {
                continue;
            }
            let value = raw.parse::<f64>().map_err(|_| PipelineError::BadCell {
                line,
                column: format!("gold_{column}"),
                message: format!("'{raw}' is not a number"),
            })?;
            gold_values.insert(column.clone(), value);
        }

        records.push(AppraisalRecord {
            vector,
            gold_label2,
            gold_label3,
            gold_values,
        });
    }
    Ok(records)
}

pub fn load_appraisals_path(path: &Path) -> Result<Vec<AppraisalRecord>, PipelineError> {
    let file = fs::File::open(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_appraisals(file)
}

/// Per-utterance inference output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtteranceReport {
    pub utterance_id: String,
    pub activations: Vec<EmotionActivation>,
    pub score: f64,
    pub label2: Label2,
    pub label3: Label3,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fired_rules: Option<Vec<RuleFiring>>,
}

/// Resolved inference components, immutable after startup.
#[derive(Debug, Clone)]
pub struct Engine {
    pub rules: RuleSet,
    pub fuzz: FuzzConfig,
    pub intensity: IntensityScale,
    pub geometry: GeometryTable,
    pub options: AggregationOptions,
}

impl Engine {
    /// Builds an engine from a configuration document; an explicit rules
    /// path takes precedence over the configured one.
    pub fn from_config(config: &RunConfig, rules_path: Option<&Path>) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Engine {
            rules: config.load_rules(rules_path)?,
            fuzz: config.fuzz.clone(),
            intensity: config.intensity,
            geometry: config.geometry_table()?,
            options: config.aggregation_options(),
        })
    }

    pub fn with_defaults() -> Self {
        Engine::from_config(&RunConfig::default(), None).expect("default configuration is valid")
    }

    /// Full inference for one utterance.
    pub fn infer_one(&self, vector: &AppraisalVector, with_explain: bool) -> UtteranceReport {
        let activations = infer_all(vector, &self.rules, &self.fuzz);
        let result =
            aggregate_pleasure(&activations, &self.intensity, &self.geometry, &self.options);
        UtteranceReport {
            utterance_id: vector.utterance_id.clone(),
            activations,
            score: result.score,
            label2: result.label2,
            label3: result.label3,
            fired_rules: with_explain.then(|| explain(vector, &self.rules, &self.fuzz)),
        }
    }

    /// Inference over a batch, preserving input order.
    pub fn infer_batch(
        &self,
        records: &[AppraisalRecord],
        with_explain: bool,
    ) -> Vec<UtteranceReport> {
        records
            .iter()
            .map(|r| self.infer_one(&r.vector, with_explain))
            .collect()
    }
}

/// Rounds every number in a JSON tree to `decimals` places, for stable and
/// readable report files.
pub fn round_json(value: &mut serde_json::Value, decimals: u32) {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.as_i64().is_none() && n.as_u64().is_none() {
                    let factor = 10f64.powi(decimals as i32);
                    if let Some(rounded) =
                        serde_json::Number::from_f64((f * factor).round() / factor)
                    {
                        *n = rounded;
                    }
                }
            }
        }
        serde_json::Value::Array(items) => {
            for item in items {
                round_json(item, decimals);
            }
        }
        serde_json::Value::Object(map) => {
            for (_, item) in map.iter_mut() {
                round_json(item, decimals);
            }
        }
        _ => {}
    }
}

/// JSON rendering of an inference report: a pretty-printed array with
/// floats fixed at six decimals.
pub fn render_infer_json(reports: &[UtteranceReport]) -> String {
    let mut value = serde_json::to_value(reports).expect("reports serialize");
    round_json(&mut value, 6);
    let mut text = serde_json::to_string_pretty(&value).expect("values print");
    text.push('\n');
    text
}

/// CSV rendering of an inference report: one row per utterance.
pub fn render_infer_csv(reports: &[UtteranceReport]) -> String {
    let mut out = String::from("utterance_id,score,label2,label3\n");
    for r in reports {
        out.push_str(&format!(
            "{},{:.6},{},{}\n",
            r.utterance_id, r.score, r.label2, r.label3
        ));
    }
    out
}

/// Minimal slice of a prediction report needed for evaluation; extra fields
/// in the JSON are ignored.
#[derive(Debug, Clone, Deserialize)]
pub struct PredictedLabels {
    pub utterance_id: String,
    pub label2: Label2,
    pub label3: Label3,
}

/// Reads predicted labels from an inference JSON report.
pub fn load_predictions(path: &Path) -> Result<Vec<PredictedLabels>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| PipelineError::BadPredictions(e.to_string()))
}

/// Gold labels keyed by utterance id.
#[derive(Debug, Clone, Default)]
pub struct GoldLabels {
    pub label2: BTreeMap<String, Label2>,
    pub label3: BTreeMap<String, Label3>,
}

/// Loads gold labels from either a CSV with `gold_label*` columns or another
/// inference JSON report (whose own labels then act as gold). The choice
/// follows the file extension.
pub fn load_gold_labels(path: &Path) -> Result<GoldLabels, PipelineError> {
    let mut gold = GoldLabels::default();
    if path.extension().is_some_and(|e| e == "json") {
        for p in load_predictions(path)? {
            gold.label2.insert(p.utterance_id.clone(), p.label2);
            gold.label3.insert(p.utterance_id, p.label3);
        }
    } else {
        for record in load_appraisals_path(path)? {
            let id = record.vector.utterance_id.clone();
            if let Some(l2) = record.gold_label2 {
                gold.label2.insert(id.clone(), l2);
            }
            if let Some(l3) = record.gold_label3 {
                gold.label3.insert(id, l3);
            }
        }
    }
    Ok(gold)
}

/// Label evaluation artifacts.
#[derive(Debug, Clone, Serialize)]
pub struct LabelEvaluation {
    pub classes: u8,
    pub samples: usize,
    pub metrics: MetricsReport,
    pub confusion: ConfusionMatrix,
}

fn align<'a, T: Copy>(
    preds: &'a [PredictedLabels],
    gold: &BTreeMap<String, T>,
    what: &str,
) -> Result<Vec<(&'a PredictedLabels, T)>, PipelineError> {
    if gold.is_empty() {
        return Err(PipelineError::MissingGold {
            what: what.to_string(),
        });
    }
    let mut pairs = Vec::with_capacity(preds.len());
    for pred in preds {
        let g = gold
            .get(&pred.utterance_id)
            .ok_or_else(|| PipelineError::UnalignedUtterance {
                id: pred.utterance_id.clone(),
                silo: "has a prediction but no gold label",
            })?;
        pairs.push((pred, *g));
    }
    if gold.len() > preds.len() {
        let predicted: BTreeMap<&str, ()> = preds
            .iter()
            .map(|p| (p.utterance_id.as_str(), ()))
            .collect();
        if let Some(id) = gold.keys().find(|id| !predicted.contains_key(id.as_str())) {
            return Err(PipelineError::UnalignedUtterance {
                id: id.clone(),
                silo: "has a gold label but no prediction",
            });
        }
    }
    Ok(pairs)
}

/// Confusion matrix and metrics for the two-class labels.
pub fn evaluate_two_class(
    preds: &[PredictedLabels],
    gold: &GoldLabels,
) -> Result<LabelEvaluation, PipelineError> {
    let pairs = align(preds, &gold.label2, "two-class labels")?;
    let pred_labels: Vec<Label2> = pairs.iter().map(|(p, _)| p.label2).collect();
    let gold_labels: Vec<Label2> = pairs.iter().map(|(_, g)| *g).collect();
    let order = [Label2::Pleasant, Label2::Unpleasant];
    let confusion = ConfusionMatrix::from_labels(&gold_labels, &pred_labels, &order)?;
    Ok(LabelEvaluation {
        classes: 2,
        samples: pairs.len(),
        metrics: report(&confusion)?,
        confusion,
    })
}

/// Confusion matrix and metrics for the three-class labels.
pub fn evaluate_three_class(
    preds: &[PredictedLabels],
    gold: &GoldLabels,
) -> Result<LabelEvaluation, PipelineError> {
    let pairs = align(preds, &gold.label3, "three-class labels")?;
    let pred_labels: Vec<Label3> = pairs.iter().map(|(p, _)| p.label3).collect();
    let gold_labels: Vec<Label3> = pairs.iter().map(|(_, g)| *g).collect();
    let order = [Label3::Pleasant, Label3::Unpleasant, Label3::Neutral];
    let confusion = ConfusionMatrix::from_labels(&gold_labels, &pred_labels, &order)?;
    Ok(LabelEvaluation {
        classes: 3,
        samples: pairs.len(),
        metrics: report(&confusion)?,
        confusion,
    })
}

/// Binned accuracies of one appraisal variable.
#[derive(Debug, Clone, Serialize)]
pub struct VariableAccuracy {
    pub variable: String,
    pub samples: usize,
    pub acc2: f64,
    /// Absent in binary mode, which defines no three-level binner.
    pub acc3: Option<f64>,
    pub binning: BinningMode,
}

/// Per-variable ACC2/ACC3 between predicted appraisal values and the
/// `gold_<var>` columns, using the configured binning mode. Variables
/// without gold values are skipped.
pub fn appraisal_accuracy(
    records: &[AppraisalRecord],
    mode: BinningMode,
    file_boundaries: Option<&BTreeMap<String, [f64; 2]>>,
) -> Result<Vec<VariableAccuracy>, PipelineError> {
    let mut out = Vec::new();
    for column in NUMERIC_COLUMNS {
        let pairs: Vec<(f64, f64)> = records
            .iter()
            .filter_map(|r| {
                r.gold_values
                    .get(column)
                    .map(|g| (r.vector.get_by_name(column), *g))
            })
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let preds: Vec<f64> = pairs.iter().map(|(p, _)| *p).collect();
        let golds: Vec<f64> = pairs.iter().map(|(_, g)| *g).collect();
        let binner = match mode {
            BinningMode::Binary => None,
            BinningMode::Soft => Some(Binner::Soft),
            BinningMode::Strict => Some(Binner::Strict),
            BinningMode::Kmeans => {
                let clustering = kmeans1d(&golds, 3).map_err(|source| PipelineError::Binning {
                    column: column.to_string(),
                    source,
                })?;
                Some(Binner::Boundaries(
                    clustering.boundaries[0],
                    clustering.boundaries[1],
                ))
            }
            BinningMode::File => {
                let map = file_boundaries.ok_or_else(|| {
                    PipelineError::MissingBoundaries("<no boundaries file loaded>".to_string())
                })?;
                let [b1, b2] = map
                    .get(column)
                    .ok_or_else(|| PipelineError::MissingBoundaries(column.to_string()))?;
                Some(Binner::Boundaries(*b1, *b2))
            }
        };
        out.push(VariableAccuracy {
            variable: column.to_string(),
            samples: pairs.len(),
            acc2: acc2(&preds, &golds)?,
            acc3: binner.map(|b| acc3(&preds, &golds, &b)).transpose()?,
            binning: mode,
        });
    }
    Ok(out)
}

impl AppraisalVector {
    /// Column-name accessor mirroring the CSV schema.
    pub fn get_by_name(&self, column: &str) -> f64 {
        match column {
            "expectedness" => self.expectedness,
            "likelihood" => self.likelihood,
            "desirability" => self.desirability,
            "agency" => self.agency,
            "controllability" => self.controllability,
            "calm" => self.calm,
            "boredom" => self.boredom,
            other => unreachable!("unknown appraisal column {other}"),
        }
    }
}

/// Loads a `{"variable": [b1, b2]}` boundaries document.
pub fn load_boundaries(path: &Path) -> Result<BTreeMap<String, [f64; 2]>, PipelineError> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| PipelineError::BadPredictions(e.to_string()))
}

/// Fits three-cluster boundaries per requested column, in `bins fit`'s
/// output shape.
pub fn fit_bins(
    records: &[AppraisalRecord],
    columns: &[String],
    k: usize,
) -> Result<BTreeMap<String, Vec<f64>>, PipelineError> {
    let mut out = BTreeMap::new();
    for column in columns {
        let values: Vec<f64> = if let Some(base) = column.strip_prefix("gold_") {
            records
                .iter()
                .filter_map(|r| r.gold_values.get(base).copied())
                .collect()
        } else if NUMERIC_COLUMNS.contains(&column.as_str()) {
            records
                .iter()
                .map(|r| r.vector.get_by_name(column))
                .collect()
        } else {
            return Err(PipelineError::BadCell {
                line: 1,
                column: column.clone(),
                message: "not an appraisal column".to_string(),
            });
        };
        let clustering = kmeans1d(&values, k).map_err(|source| PipelineError::Binning {
            column: column.clone(),
            source,
        })?;
        out.insert(column.clone(), clustering.boundaries);
    }
    Ok(out)
}

/// Metrics JSON for an evaluation run: label metrics (rounded to four
/// decimals), the confusion matrix, and per-variable appraisal accuracies
/// when gold values were available.
pub fn render_evaluation_json(
    evaluation: &LabelEvaluation,
    appraisal: &[VariableAccuracy],
) -> String {
    let mut value = serde_json::json!({
        "classes": evaluation.classes,
        "samples": evaluation.samples,
        "accuracy": round4(evaluation.metrics.accuracy),
        "label_metrics": serde_json::to_value(&evaluation.metrics).expect("metrics serialize"),
        "confusion": serde_json::to_value(&evaluation.confusion).expect("matrix serializes"),
    });
    if !appraisal.is_empty() {
        value["appraisal_accuracy"] =
            serde_json::to_value(appraisal).expect("accuracies serialize");
    }
    round_json(&mut value, 4);
    let mut text = serde_json::to_string_pretty(&value).expect("values print");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const WELL_FORMED: &str = "\
utterance_id,expectedness,likelihood,desirability,agency,controllability,calm,boredom,gold_label2,gold_label3
u1,2.6,4.0,4.8,4.0,2.0,4.0,1.0,Pleasant,Pleasant
u2,1.0,1.0,0.3,1.0,1.0,2.0,2.0,Unpleasant,Unpleasant
";

    #[test]
    fn loads_well_formed_rows() {
        let records = load_appraisals(WELL_FORMED.as_bytes()).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].vector.utterance_id, "u1");
        assert_eq!(records[0].gold_label2, Some(Label2::Pleasant));
        assert_eq!(records[1].gold_label3, Some(Label3::Unpleasant));
    }

    #[test]
    fn missing_column_is_named() {
        let text = "utterance_id,expectedness,desirability,agency,controllability,calm,boredom\n";
        match load_appraisals(text.as_bytes()).unwrap_err() {
            PipelineError::MissingColumn(col) => assert_eq!(col, "likelihood"),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn out_of_range_cell_cites_row_and_column() {
        let text = "\
utterance_id,expectedness,likelihood,desirability,agency,controllability,calm,boredom
u1,2.0,2.0,6.2,2.0,2.0,2.0,2.0
";
        match load_appraisals(text.as_bytes()).unwrap_err() {
            PipelineError::BadCell { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "desirability");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn non_numeric_cell_is_rejected() {
        let text = "\
utterance_id,expectedness,likelihood,desirability,agency,controllability,calm,boredom
u1,2.0,abc,1.0,2.0,2.0,2.0,2.0
";
        match load_appraisals(text.as_bytes()).unwrap_err() {
            PipelineError::BadCell { line, column, .. } => {
                assert_eq!(line, 2);
                assert_eq!(column, "likelihood");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let text = "\
utterance_id,expectedness,likelihood,desirability,agency,controllability,calm,boredom
u1,2.0,2.0,1.0,2.0,2.0,2.0,2.0
u1,2.1,2.0,1.0,2.0,2.0,2.0,2.0
";
        assert!(matches!(
            load_appraisals(text.as_bytes()).unwrap_err(),
            PipelineError::DuplicateUtterance { line: 3, .. }
        ));
    }

    #[test]
    fn empty_file_yields_empty_batch() {
        let text =
            "utterance_id,expectedness,likelihood,desirability,agency,controllability,calm,boredom\n";
        assert!(load_appraisals(text.as_bytes()).unwrap().is_empty());
    }

    fn crisp_engine() -> Engine {
        let config = RunConfig {
            fuzz: FuzzConfig::crisp(),
            ..RunConfig::default()
        };
        Engine::from_config(&config, None).unwrap()
    }

    #[test]
    fn happiness_vector_composes_to_pleasant() {
        // Independent recomputation: Happiness High (w3), Calm High (w1),
        // Boredom Low (w1) with shipped angles and default magnitudes.
        let records = load_appraisals(WELL_FORMED.as_bytes()).unwrap();
        let reports = crisp_engine().infer_batch(&records, false);
        let expected = (3.0 * 0.875 * 25.09f64.to_radians().cos()
            + 0.875 * 318.12f64.to_radians().cos()
            + 0.375 * 245.34f64.to_radians().cos())
            / 5.0;
        assert_abs_diff_eq!(reports[0].score, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(reports[0].score, 0.574465, epsilon = 1e-6);
        assert_eq!(reports[0].label2, Label2::Pleasant);
        assert_eq!(reports[0].activations.len(), 3);
    }

    #[test]
    fn sadness_vector_composes_to_unpleasant() {
        let records = load_appraisals(WELL_FORMED.as_bytes()).unwrap();
        let reports = crisp_engine().infer_batch(&records, false);
        assert!(reports[1].score < 0.0);
        assert_eq!(reports[1].label2, Label2::Unpleasant);
    }

    #[test]
    fn render_is_deterministic_and_round_trips_to_accuracy_one() {
        let records = load_appraisals(WELL_FORMED.as_bytes()).unwrap();
        let engine = crisp_engine();
        let a = render_infer_json(&engine.infer_batch(&records, false));
        let b = render_infer_json(&engine.infer_batch(&records, false));
        assert_eq!(a, b);

        let preds: Vec<PredictedLabels> = serde_json::from_str(&a).unwrap();
        let mut gold = GoldLabels::default();
        for p in &preds {
            gold.label2.insert(p.utterance_id.clone(), p.label2);
            gold.label3.insert(p.utterance_id.clone(), p.label3);
        }
        let eval2 = evaluate_two_class(&preds, &gold).unwrap();
        assert_eq!(eval2.metrics.accuracy, 1.0);
        let eval3 = evaluate_three_class(&preds, &gold).unwrap();
        assert_eq!(eval3.metrics.accuracy, 1.0);
    }

    #[test]
    fn evaluation_against_file_gold_labels() {
        let records = load_appraisals(WELL_FORMED.as_bytes()).unwrap();
        let engine = crisp_engine();
        let reports = engine.infer_batch(&records, false);
        let preds: Vec<PredictedLabels> =
            serde_json::from_str(&render_infer_json(&reports)).unwrap();
        let mut gold = GoldLabels::default();
        for r in &records {
            gold.label2
                .insert(r.vector.utterance_id.clone(), r.gold_label2.unwrap());
        }
        let eval = evaluate_two_class(&preds, &gold).unwrap();
        assert_eq!(eval.metrics.accuracy, 1.0);
        assert_eq!(eval.samples, 2);
    }

    #[test]
    fn unaligned_ids_error() {
        let preds = vec![PredictedLabels {
            utterance_id: "missing".to_string(),
            label2: Label2::Pleasant,
            label3: Label3::Pleasant,
        }];
        let mut gold = GoldLabels::default();
        gold.label2.insert("other".to_string(), Label2::Pleasant);
        assert!(matches!(
            evaluate_two_class(&preds, &gold).unwrap_err(),
            PipelineError::UnalignedUtterance { .. }
        ));
    }

    #[test]
    fn appraisal_accuracy_uses_gold_columns() {
        let text = "\
utterance_id,expectedness,likelihood,desirability,agency,controllability,calm,boredom,gold_likelihood
u1,2.0,1.0,1.0,2.0,2.0,2.0,2.0,1.5
u2,2.0,3.0,1.0,2.0,2.0,2.0,2.0,2.9
u3,2.0,4.5,1.0,2.0,2.0,2.0,2.0,4.8
";
        let records = load_appraisals(text.as_bytes()).unwrap();
        let accs = appraisal_accuracy(&records, BinningMode::Soft, None).unwrap();
        assert_eq!(accs.len(), 1);
        assert_eq!(accs[0].variable, "likelihood");
        assert_eq!(accs[0].samples, 3);
        // acc2: 1.0 vs 1.5 (both low), 3.0 vs 2.9 (high vs low), 4.5 vs 4.8.
        assert_abs_diff_eq!(accs[0].acc2, 2.0 / 3.0, epsilon = 1e-12);
        // soft acc3: low/low, medium/medium, high/high.
        assert_abs_diff_eq!(accs[0].acc3.unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_bins_symmetric_toy_column() {
        let mut rows = String::from(
            "utterance_id,expectedness,likelihood,desirability,agency,controllability,calm,boredom\n",
        );
        for (i, v) in [0.0, 0.0, 2.5, 2.5, 5.0, 5.0].iter().enumerate() {
            rows.push_str(&format!("u{i},{v},1.0,1.0,1.0,1.0,1.0,1.0\n"));
        }
        let records = load_appraisals(rows.as_bytes()).unwrap();
        let bins = fit_bins(&records, &["expectedness".to_string()], 3).unwrap();
        assert_eq!(bins["expectedness"], vec![1.25, 3.75]);
    }

    #[test]
    fn fit_bins_rejects_constant_column() {
        let records = load_appraisals(WELL_FORMED.as_bytes()).unwrap();
        // agency is 4.0 in both rows
        let err = fit_bins(&records, &["agency".to_string()], 3).unwrap_err();
        assert!(matches!(err, PipelineError::Binning { .. }));
    }

    #[test]
    fn round_json_rounds_only_floats() {
        let mut v = serde_json::json!({"a": 0.123456789, "b": 7, "c": [1.00000049]});
        round_json(&mut v, 6);
        assert_eq!(v["a"], serde_json::json!(0.123457));
        assert_eq!(v["b"], serde_json::json!(7));
        assert_eq!(v["c"][0], serde_json::json!(1.0));
    }
}
