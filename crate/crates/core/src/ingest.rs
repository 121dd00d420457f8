//! Parallel feature extraction over a manifest, with an on-disk CSV cache.
//!
//! Cache files live in a directory and are named after the extraction
//! settings fingerprint. Each row is `path,group,values...`; a `sha256` row per
//! image holds the file content hash, and cached groups are reused only while
//! the hash still matches.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::color::{ChannelMoments, ColorMoments};
use crate::dataset::DatasetManifest;
use crate::error::{Error, Result};
use crate::experiment::{ExtractedDataset, Sample};
use crate::features::{extract_from_rgb, ExtractionSettings, LeafFeatures};
use crate::imaging::decode_leaf_image;
use crate::shape::GeometricFeatures;
use crate::texture::TextureFeatures;
use crate::vein::VeinFeatures;

pub const CACHE_HEADER: &str = "path,group,values";

#[derive(Debug, Clone, PartialEq)]
pub struct CachedLeaf {
    pub sha256: String,
    pub features: LeafFeatures,
}

#[derive(Debug, Clone)]
pub struct FeatureCache {
    file: PathBuf,
    entries: BTreeMap<String, CachedLeaf>,
}

impl FeatureCache {
    /// Opens (or starts) the cache for `settings` under `dir`.
    pub fn open(dir: &Path, settings: &ExtractionSettings) -> Result<Self> {
        let file = dir.join(format!("features-{}.csv", settings.fingerprint()));
        let entries = if file.is_file() {
            let text = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
            parse_cache(&text).unwrap_or_default()
        } else {
            BTreeMap::new()
        };
        Ok(Self { file, entries })
    }

    pub fn path(&self) -> &Path {
        &self.file
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, path: &str, sha256: &str) -> Option<&LeafFeatures> {
        self.entries
            .get(path)
            .filter(|c| c.sha256 == sha256)
            .map(|c| &c.features)
    }

    pub fn insert(&mut self, path: String, sha256: String, features: LeafFeatures) {
        if !path.contains(',') {
            self.entries.insert(path, CachedLeaf { sha256, features });
        }
    }

    pub fn save(&self) -> Result<()> {
        if let Some(dir) = self.file.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&self.file, render_cache(&self.entries)).map_err(|e| Error::io(&self.file, e))
    }
}

fn render_cache(entries: &BTreeMap<String, CachedLeaf>) -> String {
    let mut out = format!("{CACHE_HEADER}\n");
    for (path, leaf) in entries {
        writeln!(out, "{path},sha256,{}", leaf.sha256).unwrap();
        let f = &leaf.features;
        let groups: [(&str, Vec<f64>); 8] = [
            ("pft", f.pft.clone()),
            ("geom", f.geom.to_array().to_vec()),
            ("mean", f.color.means().to_vec()),
            ("std", f.color.stds().to_vec()),
            ("skew", f.color.skewnesses().to_vec()),
            ("kurt", f.color.kurtoses().to_vec()),
            ("glcm", f.texture.to_array().to_vec()),
            ("vein", f.vein.ratios.to_vec()),
        ];
        for (name, values) in groups {
            let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{path},{name},{}", joined.join(",")).unwrap();
        }
    }
    out
}

fn parse_cache(text: &str) -> Option<BTreeMap<String, CachedLeaf>> {
    let mut lines = text.lines();
    if lines.next()? != CACHE_HEADER {
        return None;
    }
    let mut raw: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let mut fields = line.split(',');
        let path = fields.next()?.to_owned();
        let group = fields.next()?.to_owned();
        raw.entry(path)
            .or_default()
            .insert(group, fields.map(str::to_owned).collect());
    }
    let mut out = BTreeMap::new();
    for (path, groups) in raw {
        let nums = |name: &str| -> Option<Vec<f64>> {
            groups.get(name)?.iter().map(|v| v.parse().ok()).collect()
        };
        let fixed = |name: &str| -> Option<[f64; 3]> { nums(name)?.try_into().ok() };
        let sha256 = groups.get("sha256")?.first()?.clone();
        let geom = fixed("geom")?;
        let (mean, std, skew, kurt) = (fixed("mean")?, fixed("std")?, fixed("skew")?, fixed("kurt")?);
        let channel = |k: usize| ChannelMoments {
            mean: mean[k],
            std: std[k],
            skewness: skew[k],
            kurtosis: kurt[k],
        };
        let glcm: [f64; 5] = nums("glcm")?.try_into().ok()?;
        let vein: [f64; 4] = nums("vein")?.try_into().ok()?;
        let features = LeafFeatures {
            pft: nums("pft")?,
            geom: GeometricFeatures {
                eccentricity: geom[0],
                roundness: geom[1],
                dispersion: geom[2],
            },
            color: ColorMoments {
                red: channel(0),
                green: channel(1),
                blue: channel(2),
            },
            texture: TextureFeatures {
                asm: glcm[0],
                contrast: glcm[1],
                idm: glcm[2],
                entropy: glcm[3],
                correlation: glcm[4],
            },
            vein: VeinFeatures { ratios: vein },
        };
        out.insert(path, CachedLeaf { sha256, features });
    }
    Some(out)
}

/// Content hash, features, and whether they came from the cache.
type Extracted = (String, LeafFeatures, bool);

/// Extracts every manifest entry in parallel. Leaves that fail to load or
/// segment are listed in `failures` instead of aborting the run.
pub fn extract_manifest(
    manifest: &DatasetManifest,
    settings: &ExtractionSettings,
    mut cache: Option<&mut FeatureCache>,
) -> ExtractedDataset {
    let cache_view = cache.as_deref();
    let results: Vec<(String, String, Result<Extracted>)> = manifest
        .entries
        .par_iter()
        .map(|e| {
            let id = e.path.to_string_lossy().into_owned();
            let outcome = (|| {
                let bytes = fs::read(&e.path).map_err(|err| {
                    if err.kind() == std::io::ErrorKind::NotFound {
                        Error::FileNotFound(e.path.clone())
                    } else {
                        Error::io(&e.path, err)
                    }
                })?;
                let sha = hex::encode(Sha256::digest(&bytes));
                if let Some(hit) = cache_view.and_then(|c| c.get(&id, &sha)) {
                    return Ok((sha, hit.clone(), true));
                }
                let (rgb, _) = decode_leaf_image(&bytes, &e.path)?;
                Ok((sha, extract_from_rgb(rgb, settings)?, false))
            })();
            (id, e.label.clone(), outcome)
        })
        .collect();

    let mut dataset = ExtractedDataset::default();
    for (id, label, outcome) in results {
        match outcome {
            Ok((sha, features, hit)) => {
                if !hit {
                    if let Some(c) = cache.as_deref_mut() {
                        c.insert(id.clone(), sha, features.clone());
                    }
                }
                dataset.samples.push(Sample { id, label, features });
            }
            Err(err) => dataset.failures.push((id, format!("{}: {err}", err.name()))),
        }
    }
    dataset
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::LeafFeatures;

    fn leaf(seed: f64) -> LeafFeatures {
        LeafFeatures {
            pft: (0..35).map(|k| seed / (k as f64 + 3.0)).collect(),
            geom: GeometricFeatures {
                eccentricity: 0.1 * seed,
                roundness: 1.0 / 7.0,
                dispersion: 1.5,
            },
            color: ColorMoments {
                red: ChannelMoments {
                    mean: 1.0 / 3.0,
                    std: 2.0,
                    skewness: -0.5,
                    kurtosis: -1.2,
                },
                ..Default::default()
            },
            texture: TextureFeatures {
                asm: 0.2,
                contrast: 1e-17,
                idm: 0.3,
                entropy: 2.0,
                correlation: -0.25,
            },
            vein: VeinFeatures {
                ratios: [0.1, 0.2, 0.3, std::f64::consts::PI / 10.0],
            },
        }
    }

    #[test]
    fn cache_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let settings = ExtractionSettings::default();
        let mut cache = FeatureCache::open(dir.path(), &settings).unwrap();
        cache.insert("a/1.png".into(), "abc".into(), leaf(1.0));
        cache.insert("b/2.png".into(), "def".into(), leaf(2.0));
        cache.insert("bad,path.png".into(), "x".into(), leaf(3.0));
        cache.save().unwrap();
        let back = FeatureCache::open(dir.path(), &settings).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back.get("a/1.png", "abc"), Some(&leaf(1.0)));
        assert_eq!(back.get("a/1.png", "stale"), None);
        let header = fs::read_to_string(back.path()).unwrap();
        assert!(header.starts_with("path,group,values\n"));
    }

    #[test]
    fn corrupt_cache_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let settings = ExtractionSettings::default();
        let cache = FeatureCache::open(dir.path(), &settings).unwrap();
        fs::write(cache.path(), "path,group,values\nx,pft,notanumber\n").unwrap();
        assert!(FeatureCache::open(dir.path(), &settings).unwrap().is_empty());
    }
}
