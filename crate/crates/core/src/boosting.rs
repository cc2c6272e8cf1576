//! Gradient boosting with symbolic regressors as the stage learners.
//!
//! Each stage evolves a [`GpRegressor`] on the current pseudo-residuals and
//! the model predicts with the sum of all stage outputs. There is no
//! shrinkage and no early stopping: `stages` regressors are always fitted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{evaluate, evolve, mean_abs_error, GpConfig, GpRegressor, Program};
use crate::matrix::Matrix;
use crate::seed::derive_seed;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyrboConfig {
    pub stages: usize,
    pub gp: GpConfig,
}

impl SyrboConfig {
    pub fn new(stages: usize, gp: GpConfig) -> Self {
        Self { stages, gp }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages == 0 {
            return Err(Error::InvalidConfig("stages must be at least 1".into()));
        }
        self.gp.validate()
    }

    /// GP configuration used for stage `stage`.
    pub fn stage_config(&self, stage: usize) -> GpConfig {
        self.gp.with_seed(stage_seed(self.gp.seed, stage))
    }
}

/// Seed of boosting stage `stage` under master seed `seed`.
pub fn stage_seed(seed: u64, stage: usize) -> u64 {
    derive_seed(seed, stage as u64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyrboModel {
    boosters: Vec<GpRegressor>,
    config: SyrboConfig,
    feature_count: usize,
}

/// Training-time bookkeeping returned by [`SyrboModel::fit_traced`].
#[derive(Clone, Debug, PartialEq)]
pub struct FitTrace {
    /// Target vector each stage was trained on; entry 0 is the original `y`.
    pub stage_targets: Vec<Vec<f64>>,
    /// Training MAE of the partial model after each stage.
    pub stage_mae: Vec<f64>,
    /// `y` minus the full model's training prediction.
    pub residual: Vec<f64>,
}

impl SyrboModel {
    pub fn fit(config: &SyrboConfig, x: &Matrix, y: &[f64]) -> Result<Self> {
        Self::fit_traced(config, x, y).map(|(m, _)| m)
    }

    /// Fits `config.stages` boosters in sequence, each on the residual
    /// `y - (sum of earlier boosters' predictions)`.
    ///
    /// The running prediction is accumulated in stage order exactly as
    /// [`predict`](Self::predict) does, so the final residual equals
    /// `y - predict(x)` bit for bit.
    pub fn fit_traced(config: &SyrboConfig, x: &Matrix, y: &[f64]) -> Result<(Self, FitTrace)> {
        config.validate()?;
        if x.rows() < 2 {
            return Err(Error::EmptyInput("boosting needs at least two training rows"));
        }
        if x.rows() != y.len() {
            return Err(Error::LengthMismatch {
                what: "rows of X vs length of y",
                left: x.rows(),
                right: y.len(),
            });
        }
        let mut boosters = Vec::with_capacity(config.stages);
        let mut stage_targets = Vec::with_capacity(config.stages);
        let mut stage_mae = Vec::with_capacity(config.stages);
        let mut target = y.to_vec();
        let mut running: Option<Vec<f64>> = None;

        for stage in 0..config.stages {
            let gp = evolve(&config.stage_config(stage), x, &target)?;
            let pred = gp.predict(x)?;
            match running.as_mut() {
                None => running = Some(pred),
                Some(acc) => {
                    for (a, p) in acc.iter_mut().zip(&pred) {
                        *a += p;
                    }
                }
            }
            let running = running.as_deref().expect("set above");
            log::debug!(
                "stage {stage}: booster {} (training MAE {:.6})",
                gp.program,
                gp.fitness
            );
            stage_mae.push(mean_abs_error(running, y));
            stage_targets.push(std::mem::replace(
                &mut target,
                y.iter().zip(running.iter()).map(|(t, p)| t - p).collect(),
            ));
            boosters.push(gp);
        }

        let model = SyrboModel {
            boosters,
            config: config.clone(),
            feature_count: x.cols(),
        };
        let trace = FitTrace {
            stage_targets,
            stage_mae,
            residual: target,
        };
        Ok((model, trace))
    }

    /// Sum of all booster predictions, accumulated from stage 0 upwards.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.feature_count {
            return Err(Error::FeatureMismatch {
                expected: self.feature_count,
                found: x.cols(),
            });
        }
        let mut out = self.boosters[0].predict(x)?;
        for b in &self.boosters[1..] {
            for (o, p) in out.iter_mut().zip(b.predict(x)?) {
                *o += p;
            }
        }
        Ok(out)
    }

    pub fn boosters(&self) -> &[GpRegressor] {
        &self.boosters
    }

    pub fn config(&self) -> &SyrboConfig {
        &self.config
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            stages: self.config.stages,
            gp_config: self.config.gp.clone(),
            feature_count: self.feature_count,
            boosters: self.boosters.iter().map(|b| b.program.to_string()).collect(),
            booster_training_mae: self
                .boosters
                .iter()
                .map(|b| b.fitness.is_finite().then_some(b.fitness))
                .collect(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Format {
            what: "model file",
            message: e.to_string(),
        })?;
        let bad = |message: String| Error::Format {
            what: "model file",
            message,
        };
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(bad(format!("unsupported format_version {}", file.format_version)));
        }
        if file.boosters.len() != file.stages {
            return Err(bad(format!(
                "{} boosters listed for {} stages",
                file.boosters.len(),
                file.stages
            )));
        }
        let config = SyrboConfig::new(file.stages, file.gp_config);
        config.validate()?;
        let mut boosters = Vec::with_capacity(file.stages);
        for (stage, text) in file.boosters.iter().enumerate() {
            let program: Program = text.parse()?;
            if program.max_feature().is_some_and(|j| j >= file.feature_count) {
                return Err(bad(format!("booster {stage} uses a feature beyond feature_count")));
            }
            let fitness = file
                .booster_training_mae
                .get(stage)
                .copied()
                .flatten()
                .unwrap_or(f64::INFINITY);
            boosters.push(GpRegressor {
                program,
                config: config.stage_config(stage),
                fitness,
            });
        }
        Ok(SyrboModel {
            boosters,
            config,
            feature_count: file.feature_count,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format_version: u32,
    stages: usize,
    gp_config: GpConfig,
    feature_count: usize,
    boosters: Vec<String>,
    #[serde(default)]
    booster_training_mae: Vec<Option<f64>>,
}

/// Predictions of each booster separately, in stage order.
pub fn stage_predictions(model: &SyrboModel, x: &Matrix) -> Result<Vec<Vec<f64>>> {
    model.boosters.iter().map(|b| evaluate(&b.program, x)).collect()
}
