use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;
use syrbo::boosting::{SyrboConfig, SyrboModel};
use syrbo::data::{l2_normalize_rows, load_dataset, load_features, Dataset};
use syrbo::harness::{self, median_fit_seconds, mae, run_experiment, Algorithm, ExperimentConfig};
use syrbo::report::{
    compare_records, compare_scores, read_records, render_summary, write_records, write_timings,
    ComparisonDocument, DatasetRecords,
};
use syrbo::{Error, GpConfig};

use crate::{CompareArgs, ExperimentArgs, FitArgs, GpArgs, PredictArgs};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug)]
pub struct CmdError {
    pub code: u8,
    pub message: String,
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidConfig(_) => EXIT_USAGE,
            e if e.is_data_error() => EXIT_DATA,
            _ => EXIT_RUNTIME,
        };
        CmdError {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, CmdError>;

fn write_file(path: &Path, contents: &str) -> Result<(), CmdError> {
    fs::write(path, contents).map_err(|e| CmdError {
        code: EXIT_RUNTIME,
        message: format!("{}: {e}", path.display()),
    })
}

fn read_file(path: &Path) -> Result<String, CmdError> {
    fs::read_to_string(path).map_err(|e| CmdError {
        code: EXIT_DATA,
        message: format!("{}: {e}", path.display()),
    })
}

fn syrbo_config(gp: &GpArgs) -> Result<SyrboConfig, CmdError> {
    let config = SyrboConfig::new(
        gp.stages as usize,
        GpConfig {
            seed: gp.seed,
            ..GpConfig::with_budget(gp.population_size as usize, gp.generations as usize)
        },
    );
    config.validate()?;
    Ok(config)
}

fn load_normalized(path: &Path, target: &str) -> Result<Dataset, Error> {
    Ok(load_dataset(path, target)?.normalized())
}

pub fn fit(args: FitArgs) -> CmdResult {
    let config = syrbo_config(&args.gp)?;
    let data = load_normalized(&args.data, &args.target_column)?;
    log::info!(
        "fitting {} stage(s) on {} ({} rows, {} features)",
        config.stages,
        data.name,
        data.n_rows(),
        data.n_features()
    );
    let (model, trace) = SyrboModel::fit_traced(&config, &data.x, &data.y)?;
    write_file(&args.model_out, &model.to_json())?;
    for (stage, (booster, mae)) in model.boosters().iter().zip(&trace.stage_mae).enumerate() {
        println!("stage {stage}: training MAE {mae:?}  {}", booster.program);
    }
    Ok(0)
}

pub fn predict(args: PredictArgs) -> CmdResult {
    let model = SyrboModel::from_json(&read_file(&args.model)?)?;
    let (x, y) = load_features(&args.data, &args.target_column)?;
    let x = l2_normalize_rows(&x);
    let pred = model.predict(&x)?;

    let config = json!({
        "command": "predict",
        "model": args.model.display().to_string(),
        "data": args.data.display().to_string(),
        "target_column": args.target_column,
        "stages": model.config().stages,
    });
    let mut out = String::new();
    let _ = writeln!(out, "# syrbo predictions");
    let _ = writeln!(out, "# config: {config}");
    out.push_str("prediction\n");
    for p in &pred {
        let _ = writeln!(out, "{p:?}");
    }
    write_file(&args.out, &out)?;
    if let Some(y) = y {
        println!("MAE {:?}", mae(&pred, &y)?);
    }
    Ok(0)
}

pub fn experiment(args: ExperimentArgs) -> CmdResult {
    let syrbo = syrbo_config(&args.gp)?;
    let config = ExperimentConfig {
        replicates: args.replicates as usize,
        folds: args.folds as usize,
        syrbo,
        master_seed: args.gp.seed,
    };
    config.validate()?;
    let rounds = args.rounds as usize;
    fs::create_dir_all(&args.out_dir).map_err(|e| CmdError {
        code: EXIT_RUNTIME,
        message: format!("{}: {e}", args.out_dir.display()),
    })?;

    let provenance = json!({
        "command": "experiment",
        "experiment": config,
        "permutation_rounds": rounds,
        "target_column": args.target_column,
        "datasets": args.data.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
    });

    let mut failure: Option<u8> = None;
    let mut results = Vec::new();
    let mut comparisons = Vec::new();
    for path in &args.data {
        let outcome = load_normalized(path, &args.target_column).and_then(|ds| {
            log::info!("{}: {} rows, {} features", ds.name, ds.n_rows(), ds.n_features());
            let records = run_experiment(&ds, &config)?;
            let rec = DatasetRecords {
                dataset: ds.name.clone(),
                records,
            };
            let cmp = compare_records(&rec, rounds, config.master_seed)?;
            Ok((rec, cmp))
        });
        match outcome {
            Ok((rec, cmp)) => {
                log::info!(
                    "{}: median MAE boosted {:.4}, baseline {:.4}, p = {:.4} ({})",
                    cmp.dataset,
                    cmp.median_syrbo,
                    cmp.median_baseline,
                    cmp.p_value,
                    cmp.label
                );
                results.push(rec);
                comparisons.push(cmp);
            }
            Err(e) => {
                let e = CmdError::from(e);
                eprintln!("error: {}: {}", path.display(), e.message);
                failure = Some(failure.map_or(e.code, |c| c.max(e.code)));
            }
        }
    }

    let doc = ComparisonDocument::new(provenance.clone(), rounds, comparisons);
    let summary = render_summary(&provenance, Some(config.syrbo.stages), &doc);
    write_file(&args.out_dir.join("records.tsv"), &write_records(&provenance, &results))?;
    write_file(&args.out_dir.join("comparison.json"), &doc.to_json())?;
    write_file(&args.out_dir.join("summary.txt"), &summary)?;
    write_file(&args.out_dir.join("timings.tsv"), &write_timings(&provenance, &results))?;
    write_file(&args.out_dir.join("run_times.tsv"), &run_times(&results))?;
    print!("{summary}");
    Ok(failure.unwrap_or(0))
}

fn run_times(results: &[DatasetRecords]) -> String {
    let mut out = String::from("# median fit wall-clock seconds per dataset (not reproducible)\n");
    out.push_str("dataset\tsyrbo_seconds\tbaseline_seconds\n");
    for d in results {
        let t = |a| median_fit_seconds(&d.records, a).unwrap_or(f64::NAN);
        let _ = writeln!(out, "{}\t{:.3}\t{:.3}", d.dataset, t(Algorithm::Syrbo), t(Algorithm::Baseline));
    }
    out
}

pub fn compare(args: CompareArgs) -> CmdResult {
    let candidate = read_records(&read_file(&args.candidate)?)?;
    let reference = read_records(&read_file(&args.reference)?)?;
    let rounds = args.rounds as usize;
    let mut comparisons = Vec::new();
    for cand in &candidate.datasets {
        let Some(refr) = reference.datasets.iter().find(|d| d.dataset == cand.dataset) else {
            log::warn!("{}: not in reference records, skipped", cand.dataset);
            continue;
        };
        let a = harness::scores(&cand.records, args.candidate_algorithm);
        let b = harness::scores(&refr.records, args.reference_algorithm);
        if a.is_empty() || b.is_empty() {
            log::warn!("{}: no scores for one of the algorithms, skipped", cand.dataset);
            continue;
        }
        comparisons.push(compare_scores(&cand.dataset, &a, &b, rounds, args.seed)?);
    }
    if comparisons.is_empty() {
        return Err(CmdError {
            code: EXIT_DATA,
            message: "no dataset has scores in both records files".into(),
        });
    }
    let stages = match args.candidate_algorithm {
        Algorithm::Syrbo => candidate.stages(),
        Algorithm::Baseline => Some(1),
    };
    let provenance = json!({
        "command": "compare",
        "candidate": args.candidate.display().to_string(),
        "candidate_algorithm": args.candidate_algorithm.as_str(),
        "reference": args.reference.display().to_string(),
        "reference_algorithm": args.reference_algorithm.as_str(),
        "permutation_rounds": rounds,
        "seed": args.seed,
    });
    let doc = ComparisonDocument::new(provenance.clone(), rounds, comparisons);
    let summary = render_summary(&provenance, stages, &doc);
    match &args.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CmdError {
                code: EXIT_RUNTIME,
                message: format!("{}: {e}", dir.display()),
            })?;
            write_file(&dir.join("comparison.json"), &doc.to_json())?;
            write_file(&dir.join("summary.txt"), &summary)?;
            print!("{summary}");
        }
        None => print!("{summary}"),
    }
    Ok(0)
}
