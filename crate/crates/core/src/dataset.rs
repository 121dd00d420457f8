//! Dataset manifests: directory scanning, manifest CSV and seeded splits.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Test,
    Unassigned,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Unassigned => "unassigned",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "" | "unassigned" => Ok(Split::Unassigned),
            other => Err(Error::Manifest(format!("unknown split {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: String,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(&e.path) {
                return Err(Error::Manifest(format!("duplicate path {}", e.path.display())));
            }
        }
        Ok(Self { entries })
    }

    /// Sorted distinct labels.
    pub fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.entries.iter().map(|e| e.label.clone()).collect();
        labels.sort();
        labels.dedup();
        labels
    }

    pub fn count(&self, label: &str, split: Split) -> usize {
        self.entries
            .iter()
            .filter(|e| e.label == label && e.split == split)
            .count()
    }

    pub fn with_split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    /// Reads `path,label,split` rows. Relative paths resolve against the manifest's directory.
    pub fn read_csv(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::FileNotFound(path.to_path_buf()));
        }
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("path,label,split") => {}
            other => {
                return Err(Error::Manifest(format!(
                    "expected header path,label,split, found {other:?}"
                )))
            }
        }
        let mut entries = Vec::new();
        for (n, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Manifest(format!(
                    "row {} must have 3 fields (paths with commas are not supported)",
                    n + 2
                )));
            }
            let p = PathBuf::from(fields[0].trim());
            let label = fields[1].trim().to_owned();
            if label.is_empty() {
                return Err(Error::Manifest(format!("row {} has an empty label", n + 2)));
            }
            entries.push(ManifestEntry {
                path: if p.is_absolute() { p } else { base.join(p) },
                label,
                split: fields[2].parse()?,
            });
        }
        if entries.is_empty() {
            return Err(Error::EmptyDataset(path.to_path_buf()));
        }
        Self::new(entries)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::from("path,label,split\n");
        for e in &self.entries {
            let p = e.path.to_string_lossy();
            if p.contains(',') || e.label.contains(',') {
                return Err(Error::Manifest(format!("comma in {p} or label {:?}", e.label)));
            }
            out.push_str(&format!("{p},{},{}\n", e.label, e.split));
        }
        Ok(out)
    }
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// One class per subdirectory of `root`, entries in lexicographic order.
pub fn scan_dataset(root: &Path) -> Result<DatasetManifest> {
    if !root.is_dir() {
        return Err(Error::FileNotFound(root.to_path_buf()));
    }
    let read = |dir: &Path| -> Result<Vec<PathBuf>> {
        let mut items: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .map(|r| r.map(|d| d.path()).map_err(|e| Error::io(dir, e)))
            .collect::<Result<_>>()?;
        items.sort();
        Ok(items)
    };
    let mut entries = Vec::new();
    for class_dir in read(root)?.into_iter().filter(|p| p.is_dir()) {
        let label = class_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if label.starts_with('.') {
            continue;
        }
        let images: Vec<PathBuf> = read(&class_dir)?
            .into_iter()
            .filter(|p| p.is_file() && is_image(p))
            .collect();
        if images.is_empty() {
            return Err(Error::ClassWithNoImages(label));
        }
        entries.extend(images.into_iter().map(|path| ManifestEntry {
            path,
            label: label.clone(),
            split: Split::Unassigned,
        }));
    }
    if entries.is_empty() {
        return Err(Error::EmptyDataset(root.to_path_buf()));
    }
    DatasetManifest::new(entries)
}

/// Seeded per-class split of `(id, label)` items.
///
/// Within each class the ids are sorted before a ChaCha shuffle, so the result
/// depends only on the set of items, never on their input order.
pub fn split_assignments<I: AsRef<str>, L: AsRef<str>>(
    items: &[(I, L)],
    train_per_class: usize,
    test_per_class: usize,
    seed: u64,
) -> Result<Vec<Split>> {
    let mut by_class: BTreeMap<&str, Vec<(&str, usize)>> = BTreeMap::new();
    for (i, (id, label)) in items.iter().enumerate() {
        by_class.entry(label.as_ref()).or_default().push((id.as_ref(), i));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![Split::Unassigned; items.len()];
    for (label, mut members) in by_class {
        let required = train_per_class + test_per_class;
        if members.len() < required {
            return Err(Error::InsufficientImages {
                class: label.to_owned(),
                available: members.len(),
                required,
            });
        }
        members.sort();
        members.shuffle(&mut rng);
        for (k, &(_, idx)) in members.iter().enumerate() {
            out[idx] = if k < train_per_class {
                Split::Train
            } else if k < required {
                Split::Test
            } else {
                Split::Unassigned
            };
        }
    }
    Ok(out)
}

pub fn split_dataset(
    manifest: &DatasetManifest,
    train_per_class: usize,
    test_per_class: usize,
    seed: u64,
) -> Result<DatasetManifest> {
    let items: Vec<(String, &str)> = manifest
        .entries
        .iter()
        .map(|e| (e.path.to_string_lossy().into_owned(), e.label.as_str()))
        .collect();
    let splits = split_assignments(&items, train_per_class, test_per_class, seed)?;
    Ok(DatasetManifest {
        entries: manifest
            .entries
            .iter()
            .zip(splits)
            .map(|(e, split)| ManifestEntry { split, ..e.clone() })
            .collect(),
    })
}
