//! Probabilistic neural network: Gaussian Parzen densities per class,
//! evaluated in the log domain.
//!
//! Training stores min-max normalized exemplars per class. Classification
//! picks the class with the largest
//!
//! ```text
//! log p(x | j) = -(d/2) log(2 pi) - d log(sigma) - log(n_j)
//!                + logsumexp_k( -|x - X_k|^2 / (2 sigma^2) )
//! ```
//!
//! with ties going to the lowest class index.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_SIGMA: f64 = 0.05;
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormParams {
    pub fn dim(&self) -> usize {
        self.min.len()
    }
}

/// Per-feature minimum and maximum over the training vectors.
pub fn normalize_fit<V: AsRef<[f64]>>(vectors: &[V]) -> Result<NormParams> {
    let first = vectors.first().ok_or(Error::EmptyTrainingSet)?.as_ref();
    let d = first.len();
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for v in vectors {
        let v = v.as_ref();
        if v.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: v.len(),
            });
        }
        for (k, &x) in v.iter().enumerate() {
            min[k] = min[k].min(x);
            max[k] = max[k].max(x);
        }
    }
    Ok(NormParams { min, max })
}

/// `(x - min) / (max - min)` per feature, unclamped; constant features map to 0.
pub fn normalize_apply(p: &NormParams, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: x.len(),
        });
    }
    Ok(x
        .iter()
        .zip(p.min.iter().zip(&p.max))
        .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
        .collect())
}

/// Numerically stable `log(sum(exp(v)))`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PnnModel {
    pub format_version: u32,
    pub feature_config: String,
    pub sigma: f64,
    pub classes: Vec<String>,
    pub norm: NormParams,
    /// Normalized exemplars, one matrix per class.
    pub exemplars: Vec<Vec<Vec<f64>>>,
    /// Extraction settings the vectors were produced with, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extraction: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class_index: usize,
    pub label: String,
    pub log_densities: Vec<f64>,
    pub posterior: Vec<f64>,
}

/// Stores normalized exemplars per class. Classes are ordered by label.
pub fn train<S: AsRef<str>, V: AsRef<[f64]>>(samples: &[(S, V)], sigma: f64) -> Result<PnnModel> {
    train_with_config(samples, sigma, "")
}

pub fn train_with_config<S: AsRef<str>, V: AsRef<[f64]>>(
    samples: &[(S, V)],
    sigma: f64,
    feature_config: &str,
) -> Result<PnnModel> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::NonPositiveSigma(sigma));
    }
    if samples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let vectors: Vec<&[f64]> = samples.iter().map(|(_, v)| v.as_ref()).collect();
    let norm = normalize_fit(&vectors)?;

    let mut classes: Vec<String> = samples.iter().map(|(l, _)| l.as_ref().to_owned()).collect();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let mut exemplars = vec![Vec::new(); classes.len()];
    for (label, v) in samples {
        let j = classes.binary_search_by(|c| c.as_str().cmp(label.as_ref())).expect("label present");
        exemplars[j].push(normalize_apply(&norm, v.as_ref())?);
    }
    Ok(PnnModel {
        format_version: MODEL_FORMAT_VERSION,
        feature_config: feature_config.to_owned(),
        sigma,
        classes,
        norm,
        exemplars,
        extraction: None,
    })
}

impl PnnModel {
    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    /// Log Parzen density of an already normalized vector under class `j`.
    pub fn class_log_density(&self, x: &[f64], j: usize) -> f64 {
        let d = self.dim() as f64;
        let two_var = 2.0 * self.sigma * self.sigma;
        let store = &self.exemplars[j];
        let exponents: Vec<f64> = store
            .iter()
            .map(|e| {
                let dist2: f64 = e.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                -dist2 / two_var
            })
            .collect();
        -0.5 * d * TAU.ln() - d * self.sigma.ln() - (store.len() as f64).ln() + log_sum_exp(&exponents)
    }

    /// Classifies a raw-scale feature vector.
    pub fn classify(&self, x: &[f64]) -> Result<Classification> {
        let z = normalize_apply(&self.norm, x)?;
        let log_densities: Vec<f64> = (0..self.classes.len())
            .map(|j| self.class_log_density(&z, j))
            .collect();
        let mut best = 0;
        for (j, &v) in log_densities.iter().enumerate() {
            if v > log_densities[best] {
                best = j;
            }
        }
        let total = log_sum_exp(&log_densities);
        let posterior = if total.is_finite() {
            log_densities.iter().map(|v| (v - total).exp()).collect()
        } else {
            // every density underflowed to zero in log space
            let n = log_densities.len() as f64;
            vec![1.0 / n; log_densities.len()]
        };
        Ok(Classification {
            class_index: best,
            label: self.classes[best].clone(),
            log_densities,
            posterior,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("format_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Manifest("model is missing format_version".into()))?;
        if version != u64::from(MODEL_FORMAT_VERSION) {
            return Err(Error::UnknownFormatVersion(version as u32));
        }
        let model: PnnModel = serde_json::from_value(value)?;
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        if self.sigma.is_nan() || self.sigma <= 0.0 {
            return Err(Error::NonPositiveSigma(self.sigma));
        }
        if self.norm.max.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: self.norm.max.len(),
            });
        }
        if self.classes.len() < 2 || self.exemplars.len() != self.classes.len() {
            return Err(Error::SingleClass);
        }
        for store in &self.exemplars {
            if store.is_empty() {
                return Err(Error::EmptyTrainingSet);
            }
            for e in store {
                if e.len() != self.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: self.dim(),
                        found: e.len(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_and_apply() {
        let p = normalize_fit(&[vec![0.0, 10.0], vec![4.0, 10.0]]).unwrap();
        assert_eq!(p.min, vec![0.0, 10.0]);
        assert_eq!(p.max, vec![4.0, 10.0]);
        assert_eq!(normalize_apply(&p, &[4.0, 10.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(normalize_apply(&p, &[2.0, 10.0]).unwrap(), vec![0.5, 0.0]);
        assert_eq!(normalize_apply(&p, &[0.0, 10.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(normalize_apply(&p, &[8.0, 3.0]).unwrap(), vec![2.0, 0.0]);
        assert!(matches!(normalize_apply(&p, &[1.0]), Err(Error::DimensionMismatch { .. })));
        let empty: [Vec<f64>; 0] = [];
        assert!(matches!(normalize_fit(&empty), Err(Error::EmptyTrainingSet)));
        assert!(normalize_fit(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn train_errors() {
        assert!(matches!(train(&[("a", vec![0.0]), ("b", vec![1.0])], 0.0), Err(Error::NonPositiveSigma(_))));
        assert!(matches!(train(&[("a", vec![0.0]), ("a", vec![1.0])], 0.1), Err(Error::SingleClass)));
        let none: [(&str, Vec<f64>); 0] = [];
        assert!(matches!(train(&none, 0.1), Err(Error::EmptyTrainingSet)));
    }

    #[test]
    fn gaussian_peak() {
        let m = train(&[("a", vec![0.0]), ("b", vec![1.0])], 1.0).unwrap();
        let lp = m.class_log_density(&[0.0], 0);
        assert!((lp + 0.5 * TAU.ln()).abs() < 1e-12);
        assert!((lp + 0.918_938_533_204_672_7).abs() < 1e-12);
    }

    #[test]
    fn two_exemplar_density() {
        let mut m = train(&[("a", vec![0.0, 0.0]), ("a", vec![1.0, 0.0]), ("b", vec![1.0, 1.0])], 0.5).unwrap();
        // keep the stored vectors on the raw scale for this check
        m.exemplars[0] = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let direct = (1.0 / (TAU * 0.25 * 2.0)) * (1.0 + (-2.0f64).exp());
        let lp = m.class_log_density(&[0.0, 0.0], 0);
        assert!((lp.exp() - direct).abs() / direct < 1e-12);
    }

    #[test]
    fn nearest_exemplar_wins_at_small_sigma() {
        let m = train(&[("c1", vec![0.0, 0.0]), ("c2", vec![1.0, 1.0])], 0.05).unwrap();
        let c = m.classify(&[0.1, 0.1]).unwrap();
        assert_eq!(c.label, "c1");
        let tie = m.classify(&[0.5, 0.5]).unwrap();
        assert_eq!(tie.class_index, 0);
        assert!((tie.posterior.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn far_query_does_not_underflow() {
        let samples: Vec<(String, Vec<f64>)> = (0..4)
            .map(|k| (format!("c{k}"), vec![k as f64; 50]))
            .collect();
        let m = train(&samples, 0.05).unwrap();
        let c = m.classify(&vec![2.4; 50]).unwrap();
        assert!(c.log_densities.iter().all(|v| v.is_finite()));
        assert_eq!(c.label, "c2");
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let m = train(&[("a", vec![0.1, 1.0 / 3.0]), ("b", vec![0.7, 2.0f64.sqrt()])], 0.05).unwrap();
        let back = PnnModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        let bumped = m.to_json().unwrap().replace("\"format_version\": 1", "\"format_version\": 9");
        assert!(matches!(PnnModel::from_json(&bumped), Err(Error::UnknownFormatVersion(9))));
    }

    #[test]
    fn log_sum_exp_edge_cases() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
