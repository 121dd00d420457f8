//! Train/test protocols, accuracy reports and the experiment sweeps.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dataset::{split_assignments, Split};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, LeafFeatures};
use crate::pnn::{train_with_config, PnnModel};

/// One feature vector with its identity and class.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    pub id: String,
    pub label: String,
    pub values: Vec<f64>,
}

/// A leaf whose features were extracted successfully.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: String,
    pub label: String,
    pub features: LeafFeatures,
}

/// Extracted leaves plus the ones that failed, with the reason.
#[derive(Debug, Clone, Default)]
pub struct ExtractedDataset {
    pub samples: Vec<Sample>,
    pub failures: Vec<(String, String)>,
}

impl ExtractedDataset {
    pub fn vectors(&self, config: &FeatureConfig) -> Result<Vec<LabeledVector>> {
        self.samples
            .iter()
            .map(|s| {
                Ok(LabeledVector {
                    id: s.id.clone(),
                    label: s.label.clone(),
                    values: s.features.assemble(config)?.values,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Protocol {
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassResult {
    pub label: String,
    pub n_test: usize,
    pub n_correct: usize,
}

impl ClassResult {
    pub fn accuracy(&self) -> f64 {
        if self.n_test == 0 {
            0.0
        } else {
            self.n_correct as f64 / self.n_test as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub config: String,
    /// Sorted labels; indexes rows and columns of `confusion`.
    pub classes: Vec<String>,
    pub per_class: Vec<ClassResult>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub n_test: usize,
    pub n_correct: usize,
}

impl EvaluationReport {
    /// Correct queries over all queries.
    pub fn accuracy(&self) -> f64 {
        if self.n_test == 0 {
            0.0
        } else {
            self.n_correct as f64 / self.n_test as f64
        }
    }
}

/// Classifies every test vector and tallies per-class and overall accuracy.
pub fn evaluate<S: AsRef<str> + Sync, V: AsRef<[f64]> + Sync>(
    model: &PnnModel,
    test: &[(S, V)],
) -> Result<EvaluationReport> {
    if test.is_empty() {
        return Err(Error::InvalidParameter("test set is empty".into()));
    }
    let predicted: Vec<String> = test
        .par_iter()
        .map(|(_, v)| model.classify(v.as_ref()).map(|c| c.label))
        .collect::<Result<_>>()?;

    let mut classes = model.classes.clone();
    classes.extend(test.iter().map(|(l, _)| l.as_ref().to_owned()));
    classes.sort();
    classes.dedup();
    let index = |l: &str| classes.binary_search_by(|c| c.as_str().cmp(l)).expect("label present");

    let mut confusion = vec![vec![0usize; classes.len()]; classes.len()];
    for ((truth, _), pred) in test.iter().zip(&predicted) {
        confusion[index(truth.as_ref())][index(pred)] += 1;
    }
    let per_class: Vec<ClassResult> = classes
        .iter()
        .enumerate()
        .map(|(i, label)| ClassResult {
            label: label.clone(),
            n_test: confusion[i].iter().sum(),
            n_correct: confusion[i][i],
        })
        .filter(|c| c.n_test > 0)
        .collect();
    let n_correct = per_class.iter().map(|c| c.n_correct).sum();
    Ok(EvaluationReport {
        config: model.feature_config.clone(),
        classes,
        per_class,
        confusion,
        n_test: test.len(),
        n_correct,
    })
}

/// Train and test partitions of `vectors` under a seeded per-class split.
/// Both partitions are ordered by id.
pub fn partition(vectors: &[LabeledVector], protocol: Protocol) -> Result<(Vec<&LabeledVector>, Vec<&LabeledVector>)> {
    let items: Vec<(&str, &str)> = vectors.iter().map(|v| (v.id.as_str(), v.label.as_str())).collect();
    let splits = split_assignments(&items, protocol.train_per_class, protocol.test_per_class, protocol.seed)?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (v, s) in vectors.iter().zip(splits) {
        match s {
            Split::Train => train.push(v),
            Split::Test => test.push(v),
            Split::Unassigned => {}
        }
    }
    train.sort_by(|a, b| a.id.cmp(&b.id));
    test.sort_by(|a, b| a.id.cmp(&b.id));
    Ok((train, test))
}

pub fn train_on(train: &[&LabeledVector], sigma: f64, config: &str) -> Result<PnnModel> {
    let samples: Vec<(&str, &[f64])> = train.iter().map(|v| (v.label.as_str(), v.values.as_slice())).collect();
    train_with_config(&samples, sigma, config)
}

/// Split, train and evaluate once.
pub fn run_protocol(
    vectors: &[LabeledVector],
    protocol: Protocol,
    sigma: f64,
    config: &str,
) -> Result<EvaluationReport> {
    let (train, test) = partition(vectors, protocol)?;
    let model = train_on(&train, sigma, config)?;
    let test: Vec<(&str, &[f64])> = test.iter().map(|v| (v.label.as_str(), v.values.as_slice())).collect();
    evaluate(&model, &test)
}

/// One report per configuration, all sharing the same split.
pub fn ablation_grid(
    dataset: &ExtractedDataset,
    configs: &[FeatureConfig],
    protocol: Protocol,
    sigma: f64,
) -> Result<Vec<EvaluationReport>> {
    configs
        .iter()
        .map(|c| run_protocol(&dataset.vectors(c)?, protocol, sigma, &c.to_string()))
        .collect()
}

/// Accuracy for each smoothing factor on one fixed split.
pub fn sigma_sweep(vectors: &[LabeledVector], protocol: Protocol, sigmas: &[f64]) -> Result<Vec<(f64, f64)>> {
    if sigmas.is_empty() {
        return Err(Error::InvalidParameter("no smoothing factors given".into()));
    }
    if let Some(&bad) = sigmas.iter().find(|&&s| s.is_nan() || s <= 0.0) {
        return Err(Error::NonPositiveSigma(bad));
    }
    let (train, test) = partition(vectors, protocol)?;
    let test: Vec<(&str, &[f64])> = test.iter().map(|v| (v.label.as_str(), v.values.as_slice())).collect();
    sigmas
        .iter()
        .map(|&s| Ok((s, evaluate(&train_on(&train, s, "")?, &test)?.accuracy())))
        .collect()
}

/// Log-spaced smoothing factors from 1e-3 to 1 plus 0.05.
pub fn default_sigmas() -> Vec<f64> {
    let mut s: Vec<f64> = (0..=12).map(|k| 10f64.powf(-3.0 + 0.25 * k as f64)).collect();
    s.push(0.05);
    s.sort_by(f64::total_cmp);
    s
}

/// Mean accuracy over `repeats` seeded splits for each training size.
/// Repeat `r` uses seed `seed + r`.
pub fn learning_curve(
    vectors: &[LabeledVector],
    train_sizes: &[usize],
    test_per_class: usize,
    repeats: usize,
    seed: u64,
    sigma: f64,
) -> Result<Vec<(usize, f64)>> {
    if repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be >= 1".into()));
    }
    train_sizes
        .iter()
        .map(|&size| {
            let mut total = 0.0;
            for r in 0..repeats {
                let protocol = Protocol {
                    train_per_class: size,
                    test_per_class,
                    seed: seed.wrapping_add(r as u64),
                };
                total += run_protocol(vectors, protocol, sigma, "")?.accuracy();
            }
            Ok((size, total / repeats as f64))
        })
        .collect()
}

pub const REPORT_HEADER: &str = "config,class,n_test,n_correct,accuracy";
pub const SUMMARY_CLASS: &str = "ALL";

/// Per-class rows followed by the summary row of each report.
pub fn report_csv(reports: &[EvaluationReport]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in reports {
        for c in &r.per_class {
            writeln!(out, "{},{},{},{},{:.6}", r.config, c.label, c.n_test, c.n_correct, c.accuracy()).unwrap();
        }
        write_summary(&mut out, r);
    }
    out
}

/// Summary rows only, one per report.
pub fn summary_csv(reports: &[EvaluationReport]) -> String {
    let mut out = format!("{REPORT_HEADER}\n");
    for r in reports {
        write_summary(&mut out, r);
    }
    out
}

fn write_summary(out: &mut String, r: &EvaluationReport) {
    writeln!(out, "{},{SUMMARY_CLASS},{},{},{:.6}", r.config, r.n_test, r.n_correct, r.accuracy()).unwrap();
}

pub fn curve_csv<X: std::fmt::Display>(header: &str, points: &[(X, f64)]) -> String {
    let mut out = format!("{header}\n");
    for (x, y) in points {
        writeln!(out, "{x},{y:.6}").unwrap();
    }
    out
}
