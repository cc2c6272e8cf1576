//! Two-sample permutation test and win/loss classification of a boosted
//! model against its single-stage baseline.

use std::fmt::{self, Write as _};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;
pub const DEFAULT_ROUNDS: usize = 10_000;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn statistic(a: &[f64], b: &[f64]) -> f64 {
    (mean(a) - mean(b)).abs()
}

/// Rounding slack when comparing a permuted statistic to the observed one,
/// so that relabelings equivalent to the observed split always count.
fn slack(observed: f64) -> f64 {
    observed.abs() * 100.0 * f64::EPSILON
}

fn check_samples(a: &[f64], b: &[f64]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("permutation test needs two non-empty samples"));
    }
    Ok(())
}

/// `C(n, k)` if it does not exceed `limit`.
pub fn partitions_up_to(n: usize, k: usize, limit: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
        if c > limit {
            return None;
        }
    }
    Some(c)
}

/// Exact p-value over every split of the pooled sample into groups of the
/// original sizes: the share of splits whose statistic is at least the
/// observed one. The observed split is one of them, so p > 0.
pub fn exact_p_value(a: &[f64], b: &[f64]) -> Result<f64> {
    check_samples(a, b)?;
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let observed = statistic(a, b);
    let tol = slack(observed);
    let n = pooled.len();
    let mut in_a = vec![false; n];
    let mut ga = Vec::with_capacity(a.len());
    let mut gb = Vec::with_capacity(b.len());
    let (mut hits, mut total) = (0u64, 0u64);
    for combo in (0..n).combinations(a.len()) {
        in_a.iter_mut().for_each(|f| *f = false);
        for &i in &combo {
            in_a[i] = true;
        }
        ga.clear();
        gb.clear();
        for (i, &v) in pooled.iter().enumerate() {
            if in_a[i] {
                ga.push(v);
            } else {
                gb.push(v);
            }
        }
        total += 1;
        if statistic(&ga, &gb) >= observed - tol {
            hits += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}

/// Monte-Carlo p-value from `rounds` random relabelings:
/// `(1 + #{permuted >= observed}) / (1 + rounds)`.
pub fn monte_carlo_p_value<R: Rng + ?Sized>(a: &[f64], b: &[f64], rounds: usize, rng: &mut R) -> Result<f64> {
    check_samples(a, b)?;
    if rounds == 0 {
        return Err(Error::InvalidConfig("permutation test needs at least one round".into()));
    }
    let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let observed = statistic(a, b);
    let tol = slack(observed);
    let mut hits = 0usize;
    for _ in 0..rounds {
        let (ga, gb) = pooled.partial_shuffle(rng, a.len());
        if statistic(ga, gb) >= observed - tol {
            hits += 1;
        }
    }
    Ok((1 + hits) as f64 / (1 + rounds) as f64)
}

/// Two-sided permutation test on the absolute difference of means.
///
/// Enumerates every split exactly when there are no more than `rounds` of
/// them; otherwise samples `rounds` random relabelings.
pub fn permutation_test<R: Rng + ?Sized>(a: &[f64], b: &[f64], rounds: usize, rng: &mut R) -> Result<f64> {
    check_samples(a, b)?;
    if rounds == 0 {
        return Err(Error::InvalidConfig("permutation test needs at least one round".into()));
    }
    match partitions_up_to(a.len() + b.len(), a.len(), rounds as u128) {
        Some(_) => exact_p_value(a, b),
        None => monte_carlo_p_value(a, b, rounds, rng),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    SignificantWin,
    InsignificantWin,
    SignificantLoss,
    InsignificantLoss,
}

impl Label {
    pub fn is_win(self) -> bool {
        matches!(self, Label::SignificantWin | Label::InsignificantWin)
    }

    /// `!` marks a significant win, `=` an insignificant loss.
    pub fn marker(self) -> &'static str {
        match self {
            Label::SignificantWin => "!",
            Label::InsignificantLoss => "=",
            _ => "",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::SignificantWin => "significant_win",
            Label::InsignificantWin => "insignificant_win",
            Label::SignificantLoss => "significant_loss",
            Label::InsignificantLoss => "insignificant_loss",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A lower boosted median is a win, significant when `p < 0.05`. Anything
/// else, including an exact tie, is a loss, insignificant when `p >= 0.05`.
pub fn classify(median_syrbo: f64, median_baseline: f64, p_value: f64) -> Label {
    let significant = p_value < SIGNIFICANCE_LEVEL;
    match (median_syrbo < median_baseline, significant) {
        (true, true) => Label::SignificantWin,
        (true, false) => Label::InsignificantWin,
        (false, true) => Label::SignificantLoss,
        (false, false) => Label::InsignificantLoss,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub dataset: String,
    pub median_syrbo: f64,
    pub median_baseline: f64,
    pub p_value: f64,
    pub label: Label,
}

impl ComparisonOutcome {
    pub fn new(dataset: impl Into<String>, median_syrbo: f64, median_baseline: f64, p_value: f64) -> Self {
        Self {
            dataset: dataset.into(),
            median_syrbo,
            median_baseline,
            p_value,
            label: classify(median_syrbo, median_baseline, p_value),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub datasets: usize,
    pub wins: usize,
    pub significant_wins: usize,
    pub losses: usize,
    pub insignificant_losses: usize,
}

pub fn summarize(outcomes: &[ComparisonOutcome]) -> Summary {
    summarize_labels(outcomes.iter().map(|o| o.label))
}

pub fn summarize_labels(labels: impl IntoIterator<Item = Label>) -> Summary {
    let mut s = Summary::default();
    for l in labels {
        s.datasets += 1;
        match l {
            Label::SignificantWin => {
                s.wins += 1;
                s.significant_wins += 1;
            }
            Label::InsignificantWin => s.wins += 1,
            Label::SignificantLoss => s.losses += 1,
            Label::InsignificantLoss => {
                s.losses += 1;
                s.insignificant_losses += 1;
            }
        }
    }
    s
}

/// Aligned text table with one row per `(stages, summary)` pair; unknown
/// stage counts print as `-`.
pub fn render_summary_table(rows: &[(Option<usize>, Summary)]) -> String {
    let header = ["Datasets", "Stages", "Wins", "Significant", "Losses", "Insignificant"];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|(stages, s)| {
            [
                s.datasets.to_string(),
                stages.map_or_else(|| "-".to_string(), |s| s.to_string()),
                s.wins.to_string(),
                s.significant_wins.to_string(),
                s.losses.to_string(),
                s.insignificant_losses.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..6)
        .map(|c| body.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let line = |cells: Vec<&str>, out: &mut String| {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(out, "{}", padded.join("  "));
    };
    line(header.to_vec(), &mut out);
    for r in &body {
        line(r.iter().map(String::as_str).collect(), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from_seed;

    #[test]
    fn identical_samples_give_one() {
        let a = [0.3, 1.2, 0.7, 2.2];
        let mut rng = rng_from_seed(1);
        assert_eq!(exact_p_value(&a, &a).unwrap(), 1.0);
        assert_eq!(monte_carlo_p_value(&a, &a, 500, &mut rng).unwrap(), 1.0);
        assert_eq!(permutation_test(&a, &a, 10_000, &mut rng).unwrap(), 1.0);
    }

    #[test]
    fn fully_separated_triplets() {
        // Of the 20 splits of six values into 3+3, only the observed split and
        // its mirror reach the observed difference.
        let a = [0.0; 3];
        let b = [10.0; 3];
        assert_eq!(exact_p_value(&a, &b).unwrap(), 2.0 / 20.0);
        let p = permutation_test(&a, &b, 10_000, &mut rng_from_seed(2)).unwrap();
        assert!(p <= 0.15);
        let mc = monte_carlo_p_value(&a, &b, 10_000, &mut rng_from_seed(3)).unwrap();
        assert!((mc - 0.1).abs() < 0.02, "{mc}");
    }

    #[test]
    fn mode_switch() {
        assert_eq!(partitions_up_to(6, 3, 10_000), Some(20));
        assert_eq!(partitions_up_to(12, 6, 10_000), Some(924));
        assert_eq!(partitions_up_to(300, 150, 10_000), None);
    }

    #[test]
    fn empty_and_zero_rounds_rejected() {
        let mut rng = rng_from_seed(0);
        assert!(permutation_test(&[], &[1.0], 10, &mut rng).is_err());
        assert!(permutation_test(&[1.0], &[], 10, &mut rng).is_err());
        assert!(permutation_test(&[1.0], &[2.0], 0, &mut rng).is_err());
    }

    #[test]
    fn p_value_bounds() {
        let mut rng = rng_from_seed(4);
        for _ in 0..50 {
            let a: Vec<f64> = (0..40).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..40).map(|_| rng.gen::<f64>() + 0.5).collect();
            let p = permutation_test(&a, &b, 200, &mut rng).unwrap();
            assert!(p > 0.0 && p <= 1.0);
        }
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(0.62, 0.65, 0.0), Label::SignificantWin);
        assert_eq!(classify(2.52, 2.44, 0.21), Label::InsignificantLoss);
        assert_eq!(classify(1.0, 1.0, 0.5), Label::InsignificantLoss);
        assert_eq!(classify(1.0, 1.0, 0.01), Label::SignificantLoss);
        assert_eq!(classify(1.0, 2.0, 0.05), Label::InsignificantWin);
        assert_eq!(classify(2.0, 1.0, 0.05), Label::InsignificantLoss);
        assert_eq!(classify(2.0, 1.0, 0.0499), Label::SignificantLoss);
    }

    #[test]
    fn summary_counts() {
        assert_eq!(summarize(&[]), Summary::default());
        let one = [ComparisonOutcome::new("d", 0.1, 0.2, 0.01)];
        assert_eq!(
            summarize(&one),
            Summary {
                datasets: 1,
                wins: 1,
                significant_wins: 1,
                losses: 0,
                insignificant_losses: 0
            }
        );
    }

    #[test]
    fn summary_table_columns() {
        let s = summarize_labels([Label::SignificantWin, Label::InsignificantLoss]);
        let t = render_summary_table(&[(Some(3), s)]);
        let mut lines = t.lines();
        let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
        assert_eq!(header, ["Datasets", "Stages", "Wins", "Significant", "Losses", "Insignificant"]);
        let row: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
        assert_eq!(row, ["2", "3", "1", "1", "1", "1"]);
    }
}
