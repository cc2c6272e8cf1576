//! On-disk formats for experiment results.
//!
//! * records file: tab-separated, one row per score record, preceded by `#`
//!   comment lines carrying the resolved configuration as JSON;
//! * timings file: the same keys with wall-clock fit times;
//! * comparison document: JSON with per-dataset medians, p-values and labels;
//! * summary: aligned text table of win/loss counts.
//!
//! Everything except the timings is a pure function of the configuration and
//! the data, so reruns with the same seed reproduce it byte for byte.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{median, scores, Algorithm, ScoreRecord};
use crate::seed::{derive_path, hash_name, rng_from_seed};
use crate::stats::{self, permutation_test, render_summary_table, summarize, ComparisonOutcome, Label, Summary};

pub const RECORDS_HEADER: &str = "dataset\talgorithm\treplicate\tfold\ttest_mae";
pub const TIMINGS_HEADER: &str = "dataset\talgorithm\treplicate\tfold\tfit_seconds";
const CONFIG_PREFIX: &str = "# config: ";
const PERMUTATION_STREAM: u64 = 3;

/// Score records of one dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetRecords {
    pub dataset: String,
    pub records: Vec<ScoreRecord>,
}

fn format_comment_block(out: &mut String, title: &str, config: &serde_json::Value) {
    let _ = writeln!(out, "# {title}");
    let _ = writeln!(out, "{CONFIG_PREFIX}{config}");
}

pub fn write_records(config: &serde_json::Value, results: &[DatasetRecords]) -> String {
    let mut out = String::new();
    format_comment_block(&mut out, "syrbo score records", config);
    out.push_str(RECORDS_HEADER);
    out.push('\n');
    for d in results {
        for r in &d.records {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:?}",
                d.dataset, r.algorithm, r.replicate, r.fold, r.test_mae
            );
        }
    }
    out
}

pub fn write_timings(config: &serde_json::Value, results: &[DatasetRecords]) -> String {
    let mut out = String::new();
    format_comment_block(&mut out, "syrbo fit times (wall clock, not reproducible)", config);
    out.push_str(TIMINGS_HEADER);
    out.push('\n');
    for d in results {
        for r in &d.records {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{:.6}",
                d.dataset, r.algorithm, r.replicate, r.fold, r.fit_seconds
            );
        }
    }
    out
}

/// Parsed records file: its embedded configuration (if any) and the records
/// grouped by dataset in order of first appearance.
#[derive(Clone, Debug)]
pub struct RecordsFile {
    pub config: Option<serde_json::Value>,
    pub datasets: Vec<DatasetRecords>,
}

impl RecordsFile {
    /// Number of boosting stages stated in the embedded configuration.
    pub fn stages(&self) -> Option<usize> {
        self.config
            .as_ref()?
            .pointer("/experiment/syrbo/stages")?
            .as_u64()
            .map(|s| s as usize)
    }
}

pub fn read_records(text: &str) -> Result<RecordsFile> {
    let bad = |line: usize, message: String| Error::Format {
        what: "records file",
        message: format!("line {line}: {message}"),
    };
    let mut config = None;
    let mut datasets: Vec<DatasetRecords> = Vec::new();
    let mut saw_header = false;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(rest) = line.strip_prefix(CONFIG_PREFIX) {
            config = Some(serde_json::from_str(rest).map_err(|e| bad(lineno, e.to_string()))?);
            continue;
        }
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            if line != RECORDS_HEADER {
                return Err(bad(lineno, format!("expected header '{RECORDS_HEADER}'")));
            }
            saw_header = true;
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(bad(lineno, format!("expected 5 fields, found {}", f.len())));
        }
        let num = |s: &str, what: &str| -> Result<usize> {
            s.parse().map_err(|_| bad(lineno, format!("bad {what} '{s}'")))
        };
        let record = ScoreRecord {
            algorithm: f[1].parse().map_err(|_| bad(lineno, format!("bad algorithm '{}'", f[1])))?,
            replicate: num(f[2], "replicate")?,
            fold: num(f[3], "fold")?,
            test_mae: f[4].parse().map_err(|_| bad(lineno, format!("bad score '{}'", f[4])))?,
            fit_seconds: 0.0,
        };
        match datasets.iter_mut().find(|d| d.dataset == f[0]) {
            Some(d) => d.records.push(record),
            None => datasets.push(DatasetRecords {
                dataset: f[0].to_string(),
                records: vec![record],
            }),
        }
    }
    if !saw_header {
        return Err(bad(0, "missing header".into()));
    }
    Ok(RecordsFile { config, datasets })
}

/// One row of the comparison document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetComparison {
    pub dataset: String,
    pub median_syrbo: f64,
    pub median_baseline: f64,
    pub p_value: f64,
    pub label: Label,
    pub marker: String,
    pub n_syrbo: usize,
    pub n_baseline: usize,
}

impl DatasetComparison {
    pub fn outcome(&self) -> ComparisonOutcome {
        ComparisonOutcome {
            dataset: self.dataset.clone(),
            median_syrbo: self.median_syrbo,
            median_baseline: self.median_baseline,
            p_value: self.p_value,
            label: self.label,
        }
    }
}

/// Seed of the permutation test for `dataset`, independent of dataset order.
pub fn permutation_seed(seed: u64, dataset: &str) -> u64 {
    derive_path(seed, &[PERMUTATION_STREAM, hash_name(dataset)])
}

/// Medians, permutation p-value and label for one dataset.
pub fn compare_scores(dataset: &str, syrbo: &[f64], baseline: &[f64], rounds: usize, seed: u64) -> Result<DatasetComparison> {
    let ms = median(syrbo).ok_or(Error::EmptyInput("no boosted scores"))?;
    let mb = median(baseline).ok_or(Error::EmptyInput("no baseline scores"))?;
    let mut rng = rng_from_seed(permutation_seed(seed, dataset));
    let p = permutation_test(syrbo, baseline, rounds, &mut rng)?;
    let outcome = ComparisonOutcome::new(dataset, ms, mb, p);
    Ok(DatasetComparison {
        dataset: dataset.to_string(),
        median_syrbo: ms,
        median_baseline: mb,
        p_value: p,
        label: outcome.label,
        marker: outcome.label.marker().to_string(),
        n_syrbo: syrbo.len(),
        n_baseline: baseline.len(),
    })
}

pub fn compare_records(records: &DatasetRecords, rounds: usize, seed: u64) -> Result<DatasetComparison> {
    compare_scores(
        &records.dataset,
        &scores(&records.records, Algorithm::Syrbo),
        &scores(&records.records, Algorithm::Baseline),
        rounds,
        seed,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonDocument {
    pub config: serde_json::Value,
    pub permutation_rounds: usize,
    pub significance_level: f64,
    pub datasets: Vec<DatasetComparison>,
    pub summary: Summary,
}

impl ComparisonDocument {
    pub fn new(config: serde_json::Value, rounds: usize, datasets: Vec<DatasetComparison>) -> Self {
        let outcomes: Vec<ComparisonOutcome> = datasets.iter().map(DatasetComparison::outcome).collect();
        Self {
            config,
            permutation_rounds: rounds,
            significance_level: stats::SIGNIFICANCE_LEVEL,
            summary: summarize(&outcomes),
            datasets,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serializes");
        s.push('\n');
        s
    }
}

/// `9.5E-02`-style scientific notation with a two-digit exponent.
pub fn format_p_value(p: f64) -> String {
    let s = format!("{p:.1E}");
    match s.split_once('E') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}E{sign}{digits:0>2}")
        }
        None => s,
    }
}

/// Human-readable results: one line per dataset listing the better algorithm
/// first, then the summary table.
pub fn render_summary(config: &serde_json::Value, stages: Option<usize>, doc: &ComparisonDocument) -> String {
    let mut out = String::new();
    format_comment_block(&mut out, "syrbo comparison summary", config);
    out.push('\n');
    for d in &doc.datasets {
        let (first, second) = if d.label.is_win() {
            (("SyRBo", d.median_syrbo), ("SR", d.median_baseline))
        } else {
            (("SR", d.median_baseline), ("SyRBo", d.median_syrbo))
        };
        let marker = if d.marker.is_empty() { String::new() } else { format!(" {}", d.marker) };
        let _ = writeln!(
            out,
            "{}: {}: {:.4}, {}: {:.4}, pval: {}{}",
            d.dataset,
            first.0,
            first.1,
            second.0,
            second.1,
            format_p_value(d.p_value),
            marker
        );
    }
    out.push('\n');
    out.push_str(&render_summary_table(&[(stages, doc.summary)]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(alg: Algorithm, r: usize, f: usize, v: f64) -> ScoreRecord {
        ScoreRecord {
            algorithm: alg,
            replicate: r,
            fold: f,
            test_mae: v,
            fit_seconds: 1.5,
        }
    }

    #[test]
    fn records_round_trip() {
        let cfg = serde_json::json!({"experiment": {"syrbo": {"stages": 3}}});
        let data = vec![
            DatasetRecords {
                dataset: "a".into(),
                records: vec![rec(Algorithm::Syrbo, 0, 0, 0.1 + 0.2), rec(Algorithm::Baseline, 0, 0, f64::MAX)],
            },
            DatasetRecords {
                dataset: "b".into(),
                records: vec![rec(Algorithm::Syrbo, 0, 1, 1e-300)],
            },
        ];
        let text = write_records(&cfg, &data);
        let back = read_records(&text).unwrap();
        assert_eq!(back.config.as_ref(), Some(&cfg));
        assert_eq!(back.stages(), Some(3));
        assert_eq!(back.datasets.len(), 2);
        for (a, b) in back.datasets.iter().zip(&data) {
            assert_eq!(a.dataset, b.dataset);
            for (x, y) in a.records.iter().zip(&b.records) {
                assert_eq!((x.algorithm, x.replicate, x.fold), (y.algorithm, y.replicate, y.fold));
                assert_eq!(x.test_mae.to_bits(), y.test_mae.to_bits());
            }
        }
        assert_eq!(write_records(&cfg, &back.datasets), text);
    }

    #[test]
    fn malformed_records() {
        assert!(read_records("").is_err());
        assert!(read_records("nope\n").is_err());
        let bad = format!("{RECORDS_HEADER}\na\tsyrbo\t0\t0\n");
        assert!(read_records(&bad).is_err());
        let bad = format!("{RECORDS_HEADER}\na\tforest\t0\t0\t1.0\n");
        assert!(read_records(&bad).is_err());
    }

    #[test]
    fn p_value_format() {
        assert_eq!(format_p_value(0.095), "9.5E-02");
        assert_eq!(format_p_value(0.0), "0.0E+00");
        assert_eq!(format_p_value(1.0), "1.0E+00");
        assert_eq!(format_p_value(0.00015), "1.5E-04");
    }

    #[test]
    fn comparison_is_seeded_by_name() {
        let a: Vec<f64> = (0..150).map(|i| (i % 17) as f64).collect();
        let b: Vec<f64> = (0..150).map(|i| (i % 13) as f64 + 0.5).collect();
        let x = compare_scores("d1", &a, &b, 2000, 5).unwrap();
        let y = compare_scores("d1", &a, &b, 2000, 5).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.n_syrbo, 150);
        assert_eq!(x.label, stats::classify(x.median_syrbo, x.median_baseline, x.p_value));
    }
}
