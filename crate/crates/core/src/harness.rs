//! Replicated k-fold comparison of boosted regression against the
//! single-stage baseline.
//!
//! For every replicate the rows are reshuffled into folds; for every fold both
//! algorithms are trained on the same training rows, with the same GP seed,
//! and scored by MAE on the held-out rows.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boosting::{SyrboConfig, SyrboModel};
use crate::data::{kfold, Dataset, FoldSplit};
use crate::error::{Error, Result};
use crate::gp::mean_abs_error;
use crate::seed::{derive_path, rng_from_seed};

/// Recorded in place of a non-finite test MAE.
pub const WORST_SCORE: f64 = f64::MAX;

const SPLIT_STREAM: u64 = 1;
const GP_STREAM: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Syrbo,
    Baseline,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Syrbo => "syrbo",
            Algorithm::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "syrbo" => Ok(Algorithm::Syrbo),
            "baseline" => Ok(Algorithm::Baseline),
            _ => Err(Error::InvalidConfig(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub replicates: usize,
    pub folds: usize,
    pub syrbo: SyrboConfig,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".into()));
        }
        self.syrbo.validate()
    }

    /// The single-stage configuration the boosted model is compared against.
    pub fn baseline(&self) -> SyrboConfig {
        SyrboConfig::new(1, self.syrbo.gp.clone())
    }

    pub fn split_seed(&self, replicate: usize) -> u64 {
        derive_path(self.master_seed, &[SPLIT_STREAM, replicate as u64])
    }

    /// GP seed shared by both algorithms in one (replicate, fold) cell.
    pub fn cell_seed(&self, replicate: usize, fold: usize) -> u64 {
        derive_path(self.master_seed, &[GP_STREAM, replicate as u64, fold as u64])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub algorithm: Algorithm,
    pub replicate: usize,
    pub fold: usize,
    pub test_mae: f64,
    pub fit_seconds: f64,
}

/// Mean absolute error between predictions and targets.
pub fn mae(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            what: "predictions vs targets",
            left: pred.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::EmptyInput("MAE of empty vectors"));
    }
    Ok(mean_abs_error(pred, truth))
}

/// Fold splits for every replicate, exactly as [`run_experiment`] uses them.
pub fn replicate_splits(n_rows: usize, config: &ExperimentConfig) -> Result<Vec<Vec<FoldSplit>>> {
    (0..config.replicates)
        .map(|r| kfold(n_rows, config.folds, &mut rng_from_seed(config.split_seed(r))))
        .collect()
}

fn score_cell(
    dataset: &Dataset,
    split: &FoldSplit,
    algorithm: Algorithm,
    syrbo: &SyrboConfig,
    replicate: usize,
    fold: usize,
) -> Result<ScoreRecord> {
    let (x_train, y_train) = dataset.subset(&split.train);
    let (x_test, y_test) = dataset.subset(&split.test);
    let start = Instant::now();
    let model = SyrboModel::fit(syrbo, &x_train, &y_train)?;
    let fit_seconds = start.elapsed().as_secs_f64();
    let mut test_mae = mae(&model.predict(&x_test)?, &y_test)?;
    if !test_mae.is_finite() {
        log::warn!(
            "{}: {algorithm} replicate {replicate} fold {fold}: non-finite test MAE, recording {WORST_SCORE:e}",
            dataset.name
        );
        test_mae = WORST_SCORE;
    }
    Ok(ScoreRecord {
        algorithm,
        replicate,
        fold,
        test_mae,
        fit_seconds,
    })
}

/// Runs every (replicate, fold, algorithm) cell and returns the records
/// sorted by algorithm, replicate and fold.
///
/// Cells run on the current rayon pool. Each cell's randomness is derived
/// from `master_seed` and its coordinates only, so records other than
/// `fit_seconds` do not depend on the number of threads.
pub fn run_experiment(dataset: &Dataset, config: &ExperimentConfig) -> Result<Vec<ScoreRecord>> {
    config.validate()?;
    if dataset.n_rows() < config.folds {
        return Err(Error::InvalidConfig(format!(
            "{}: {} rows cannot be split into {} folds",
            dataset.name,
            dataset.n_rows(),
            config.folds
        )));
    }
    let splits = replicate_splits(dataset.n_rows(), config)?;
    let mut cells = Vec::with_capacity(2 * config.replicates * config.folds);
    for r in 0..config.replicates {
        for f in 0..config.folds {
            for alg in [Algorithm::Syrbo, Algorithm::Baseline] {
                cells.push((alg, r, f));
            }
        }
    }
    let mut records = cells
        .par_iter()
        .map(|&(alg, r, f)| {
            let seed = config.cell_seed(r, f);
            let syrbo = match alg {
                Algorithm::Syrbo => config.syrbo.clone(),
                Algorithm::Baseline => config.baseline(),
            };
            let syrbo = SyrboConfig {
                gp: syrbo.gp.with_seed(seed),
                ..syrbo
            };
            score_cell(dataset, &splits[r][f], alg, &syrbo, r, f)
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by_key(|rec| (rec.algorithm, rec.replicate, rec.fold));
    Ok(records)
}

/// Test scores of one algorithm in (replicate, fold) order.
pub fn scores(records: &[ScoreRecord], algorithm: Algorithm) -> Vec<f64> {
    let mut own: Vec<&ScoreRecord> = records.iter().filter(|r| r.algorithm == algorithm).collect();
    own.sort_by_key(|r| (r.replicate, r.fold));
    own.into_iter().map(|r| r.test_mae).collect()
}

/// Median; the mean of the two middle values for an even count.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

pub fn median_score(records: &[ScoreRecord], algorithm: Algorithm) -> Result<f64> {
    median(&scores(records, algorithm)).ok_or(Error::EmptyInput("no records for algorithm"))
}

pub fn median_fit_seconds(records: &[ScoreRecord], algorithm: Algorithm) -> Option<f64> {
    let t: Vec<f64> = records
        .iter()
        .filter(|r| r.algorithm == algorithm)
        .map(|r| r.fit_seconds)
        .collect();
    median(&t)
}
