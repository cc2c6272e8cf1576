use std::collections::HashSet;

use rand::Rng;
use syrbo::boosting::SyrboConfig;
use syrbo::data::kfold;
use syrbo::harness::{median, median_score, replicate_splits, run_experiment, Algorithm, ExperimentConfig, ScoreRecord};
use syrbo::seed::rng_from_seed;
use syrbo::stats::permutation_test;
use syrbo::{Dataset, GpConfig, Matrix};

#[test]
fn kfold_partitions_exhaustively() {
    for k in [2, 3, 5, 10] {
        for n in k..=100 {
            let folds = kfold(n, k, &mut rng_from_seed(n as u64 * 31 + k as u64)).unwrap();
            assert_eq!(folds.len(), k);
            let mut seen = vec![0u8; n];
            let sizes: Vec<usize> = folds.iter().map(|f| f.test.len()).collect();
            assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for f in &folds {
                for &i in &f.test {
                    seen[i] += 1;
                }
                let test: HashSet<usize> = f.test.iter().copied().collect();
                let train: HashSet<usize> = f.train.iter().copied().collect();
                assert!(test.is_disjoint(&train));
                assert_eq!(test.len() + train.len(), n);
            }
            assert!(seen.iter().all(|&c| c == 1), "n={n} k={k}");
        }
    }
}

#[test]
fn median_agrees_with_sort_and_pick() {
    let mut rng = rng_from_seed(3);
    for len in [149, 150] {
        let v: Vec<f64> = (0..len).map(|_| rng.gen_range(0.0..10.0)).collect();
        let mut s = v.clone();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let oracle = if len % 2 == 1 {
            s[len / 2]
        } else {
            (s[len / 2 - 1] + s[len / 2]) / 2.0
        };
        let m = median(&v).unwrap();
        assert_eq!(m, oracle);
        assert!(s[0] <= m && m <= s[len - 1]);
    }
}

fn toy_dataset(rows: usize) -> Dataset {
    let mut rng = rng_from_seed(12);
    let x = Matrix::new(rows, 2, (0..rows * 2).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
    let y = x.iter_rows().map(|r| r[0] - 2.0 * r[1]).collect();
    Dataset::new("toy", x, y, vec!["a".into(), "b".into()]).unwrap().normalized()
}

fn small_config(replicates: usize, folds: usize) -> ExperimentConfig {
    ExperimentConfig {
        replicates,
        folds,
        syrbo: SyrboConfig::new(3, GpConfig::with_budget(30, 5)),
        master_seed: 99,
    }
}

#[test]
fn records_cover_every_cell_once() {
    let config = small_config(3, 4);
    let records = run_experiment(&toy_dataset(24), &config).unwrap();
    assert_eq!(records.len(), 2 * 3 * 4);
    let keys: HashSet<(Algorithm, usize, usize)> = records.iter().map(|r| (r.algorithm, r.replicate, r.fold)).collect();
    assert_eq!(keys.len(), records.len());
    assert!(records.iter().all(|r| r.replicate < 3 && r.fold < 4));
    for alg in [Algorithm::Syrbo, Algorithm::Baseline] {
        let own: Vec<f64> = records.iter().filter(|r| r.algorithm == alg).map(|r| r.test_mae).collect();
        let m = median_score(&records, alg).unwrap();
        let lo = own.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = own.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(lo <= m && m <= hi);
    }
}

#[test]
fn both_algorithms_share_splits_and_stage_zero() {
    // The baseline is the one-stage model under the same cell seed, so the
    // boosted model's first booster is exactly the baseline model. Checking
    // that here pins down that both saw the same training rows.
    let ds = toy_dataset(20);
    let config = small_config(2, 2);
    let splits = replicate_splits(ds.n_rows(), &config).unwrap();
    let again = replicate_splits(ds.n_rows(), &config).unwrap();
    assert_eq!(splits, again);
    for (r, reps) in splits.iter().enumerate() {
        for (f, split) in reps.iter().enumerate() {
            let (x, y) = ds.subset(&split.train);
            let seed = config.cell_seed(r, f);
            let boosted = syrbo::SyrboModel::fit(
                &SyrboConfig { gp: config.syrbo.gp.with_seed(seed), ..config.syrbo.clone() },
                &x,
                &y,
            )
            .unwrap();
            let base = syrbo::SyrboModel::fit(
                &SyrboConfig { gp: config.syrbo.gp.with_seed(seed), ..config.baseline() },
                &x,
                &y,
            )
            .unwrap();
            assert_eq!(boosted.boosters()[0], base.boosters()[0]);
        }
    }
    // And the recorded baseline score is reproduced from the shared split.
    let records = run_experiment(&ds, &config).unwrap();
    let rec: &ScoreRecord = records
        .iter()
        .find(|r| r.algorithm == Algorithm::Baseline && r.replicate == 1 && r.fold == 0)
        .unwrap();
    let split = &splits[1][0];
    let (x, y) = ds.subset(&split.train);
    let (xt, yt) = ds.subset(&split.test);
    let model = syrbo::SyrboModel::fit(
        &SyrboConfig { gp: config.syrbo.gp.with_seed(config.cell_seed(1, 0)), ..config.baseline() },
        &x,
        &y,
    )
    .unwrap();
    let score = syrbo::harness::mae(&model.predict(&xt).unwrap(), &yt).unwrap();
    assert_eq!(score.to_bits(), rec.test_mae.to_bits());
}

#[test]
fn permutation_test_is_calibrated_under_the_null() {
    let mut rng = rng_from_seed(2024);
    let trials = 1000;
    let mut rejections = 0;
    for _ in 0..trials {
        let a: Vec<f64> = (0..20).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..20).map(|_| rng.gen::<f64>()).collect();
        if permutation_test(&a, &b, 1000, &mut rng).unwrap() < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / trials as f64;
    assert!((0.03..=0.07).contains(&rate), "rejection rate {rate}");
}
