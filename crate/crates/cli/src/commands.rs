use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use leafid::dataset::{scan_dataset, split_assignments, DatasetManifest, Split};
use leafid::experiment::{
    curve_csv, default_sigmas, evaluate, learning_curve, partition, report_csv, summary_csv, train_on,
    EvaluationReport, ExtractedDataset, LabeledVector, Protocol,
};
use leafid::features::{extract_from_rgb, ExtractionSettings, FeatureConfig};
use leafid::imaging::{centroid, load_leaf_image, segment_leaf_with, trace_contour};
use leafid::ingest::{extract_manifest, FeatureCache};
use leafid::pnn::PnnModel;

use crate::{Command, DataArgs, ProtocolArgs};

const DEFAULT_TRAIN: usize = 40;
const DEFAULT_TEST: usize = 10;

/// One-line diagnostic: the library error name, then the context chain.
pub fn describe(err: &anyhow::Error) -> String {
    let name = err
        .chain()
        .find_map(|c| c.downcast_ref::<leafid::Error>())
        .map_or("Error", leafid::Error::name);
    format!("{name}: {err:#}")
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Segment { image, out, polarity } => segment(&image, &out, polarity.into()),
        Command::Extract {
            data,
            config,
            extraction,
            out,
        } => extract(&data, &config, &extraction.settings(), &out),
        Command::Train {
            data,
            config,
            train,
            seed,
            sigma,
            extraction,
            out,
        } => train_model(&data, &config, train, seed, sigma, &extraction.settings(), &out),
        Command::Classify { model, image, out } => classify(&model, &image, out.as_deref()),
        Command::Evaluate {
            data,
            config,
            protocol,
            sigma,
            extraction,
            out,
        } => {
            let (manifest, dataset) = load(&data, &extraction.settings(), &out)?;
            let config = parse_config(&config)?;
            let report = evaluate_config(&manifest, &dataset, &config, &protocol, sigma)?;
            write(&out, &report_csv(std::slice::from_ref(&report)))?;
            println!(
                "{}: accuracy {:.4}% ({}/{})",
                report.config,
                100.0 * report.accuracy(),
                report.n_correct,
                report.n_test
            );
            Ok(())
        }
        Command::Ablation {
            data,
            configs,
            protocol,
            sigma,
            extraction,
            out,
        } => {
            let configs = FeatureConfig::parse_list(&configs).with_context(|| format!("--configs {configs}"))?;
            let (manifest, dataset) = load(&data, &extraction.settings(), &out)?;
            let reports = configs
                .iter()
                .map(|c| evaluate_config(&manifest, &dataset, c, &protocol, sigma))
                .collect::<Result<Vec<_>>>()?;
            write(&out, &summary_csv(&reports))?;
            for r in &reports {
                println!("{:>8.4}%  {}", 100.0 * r.accuracy(), r.config);
            }
            Ok(())
        }
        Command::SigmaSweep {
            data,
            config,
            sigmas,
            protocol,
            extraction,
            out,
        } => {
            let config = parse_config(&config)?;
            let sigmas = if sigmas.is_empty() { default_sigmas() } else { sigmas };
            let (manifest, dataset) = load(&data, &extraction.settings(), &out)?;
            let vectors = dataset.vectors(&config)?;
            let (train, test) = split(&manifest, &vectors, &protocol)?;
            let test: Vec<(&str, &[f64])> = test.iter().map(|v| (v.label.as_str(), v.values.as_slice())).collect();
            let mut curve = Vec::with_capacity(sigmas.len());
            for s in sigmas {
                let model = train_on(&train, s, &config.to_string())?;
                curve.push((s, evaluate(&model, &test)?.accuracy()));
            }
            write(&out, &curve_csv("sigma,accuracy", &curve))?;
            for (s, a) in &curve {
                println!("sigma {s:<10} accuracy {:.4}%", 100.0 * a);
            }
            Ok(())
        }
        Command::LearningCurve {
            data,
            config,
            sizes,
            test,
            repeats,
            seed,
            sigma,
            extraction,
            out,
        } => {
            let config = parse_config(&config)?;
            let (_, dataset) = load(&data, &extraction.settings(), &out)?;
            let vectors = dataset.vectors(&config)?;
            let curve = learning_curve(&vectors, &sizes, test, repeats, seed, sigma)?;
            write(&out, &curve_csv("train_per_class,accuracy", &curve))?;
            for (n, a) in &curve {
                println!("{n:>4} per class  accuracy {:.4}%", 100.0 * a);
            }
            Ok(())
        }
    }
}

fn parse_config(s: &str) -> Result<FeatureConfig> {
    s.parse().with_context(|| format!("--config {s}"))
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn manifest(data: &DataArgs) -> Result<DatasetManifest> {
    match (&data.data, &data.manifest) {
        (Some(root), _) => scan_dataset(root).with_context(|| format!("--data {}", root.display())),
        (None, Some(csv)) => DatasetManifest::read_csv(csv).with_context(|| format!("--manifest {}", csv.display())),
        (None, None) => unreachable!("clap requires one dataset source"),
    }
}

fn cache_dir(out: &Path) -> PathBuf {
    match std::env::var_os("LEAFID_CACHE_DIR") {
        Some(dir) => PathBuf::from(dir),
        None => out
            .parent()
            .filter(|d| !d.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .join(".leafid-cache"),
    }
}

/// Reads the dataset and extracts features through the on-disk cache.
fn load(data: &DataArgs, settings: &ExtractionSettings, out: &Path) -> Result<(DatasetManifest, ExtractedDataset)> {
    let manifest = manifest(data)?;
    let mut cache = FeatureCache::open(&cache_dir(out), settings)?;
    let before = cache.len();
    let dataset = extract_manifest(&manifest, settings, Some(&mut cache));
    if cache.len() != before {
        if let Err(e) = cache.save() {
            eprintln!("warning: feature cache not saved: {e}");
        }
    }
    for (path, reason) in &dataset.failures {
        eprintln!("warning: skipped {path}: {reason}");
    }
    if dataset.samples.is_empty() {
        return Err(leafid::Error::EmptyTrainingSet).context("no leaf could be extracted");
    }
    Ok((manifest, dataset))
}

fn tags(manifest: &DatasetManifest) -> HashMap<String, Split> {
    manifest
        .entries
        .iter()
        .map(|e| (e.path.to_string_lossy().into_owned(), e.split))
        .collect()
}

/// Train and test partitions: a seeded split when counts are given or the
/// manifest carries no split tags, the manifest's own tags otherwise.
fn split<'a>(
    manifest: &DatasetManifest,
    vectors: &'a [LabeledVector],
    protocol: &ProtocolArgs,
) -> Result<(Vec<&'a LabeledVector>, Vec<&'a LabeledVector>)> {
    let tagged = manifest.entries.iter().any(|e| e.split == Split::Train)
        && manifest.entries.iter().any(|e| e.split == Split::Test);
    if tagged && protocol.train.is_none() && protocol.test.is_none() {
        let tags = tags(manifest);
        let pick = |want: Split| -> Vec<&LabeledVector> {
            let mut v: Vec<&LabeledVector> = vectors.iter().filter(|v| tags.get(&v.id) == Some(&want)).collect();
            v.sort_by(|a, b| a.id.cmp(&b.id));
            v
        };
        return Ok((pick(Split::Train), pick(Split::Test)));
    }
    let protocol = Protocol {
        train_per_class: protocol.train.unwrap_or(DEFAULT_TRAIN),
        test_per_class: protocol.test.unwrap_or(DEFAULT_TEST),
        seed: protocol.seed,
    };
    Ok(partition(vectors, protocol)?)
}

fn evaluate_config(
    manifest: &DatasetManifest,
    dataset: &ExtractedDataset,
    config: &FeatureConfig,
    protocol: &ProtocolArgs,
    sigma: f64,
) -> Result<EvaluationReport> {
    let vectors = dataset.vectors(config)?;
    let (train, test) = split(manifest, &vectors, protocol)?;
    let model = train_on(&train, sigma, &config.to_string())?;
    let test: Vec<(&str, &[f64])> = test.iter().map(|v| (v.label.as_str(), v.values.as_slice())).collect();
    evaluate(&model, &test).with_context(|| format!("evaluating {config}"))
}

fn segment(image: &Path, out: &Path, polarity: leafid::imaging::Polarity) -> Result<()> {
    let (_, gray) = load_leaf_image(image)?;
    let mask = segment_leaf_with(&gray, polarity).with_context(|| image.display().to_string())?;
    mask.save_png(out)?;
    let c = centroid(&mask);
    println!(
        "{}: area {} px, contour {} px, centroid ({:.2}, {:.2})",
        image.display(),
        mask.area(),
        trace_contour(&mask).len(),
        c.x,
        c.y
    );
    Ok(())
}

fn extract(data: &DataArgs, config: &str, settings: &ExtractionSettings, out: &Path) -> Result<()> {
    let config = parse_config(config)?;
    let (_, dataset) = load(data, settings, out)?;
    let mut header = vec!["path".to_owned(), "label".to_owned()];
    for &g in config.groups() {
        header.extend((0..g.len(settings.pft.len())).map(|k| format!("{}{k}", g.name())));
    }
    let mut text = header.join(",") + "\n";
    let mut samples: Vec<_> = dataset.samples.iter().collect();
    samples.sort_by(|a, b| a.id.cmp(&b.id));
    for s in samples {
        let values = s.features.assemble(&config).with_context(|| s.id.clone())?.values;
        let row: Vec<String> = values.iter().map(f64::to_string).collect();
        text.push_str(&format!("{},{},{}\n", s.id, s.label, row.join(",")));
    }
    write(out, &text)?;
    println!(
        "{} leaves, {} values each, {} skipped",
        dataset.samples.len(),
        header.len() - 2,
        dataset.failures.len()
    );
    Ok(())
}

fn train_model(
    data: &DataArgs,
    config: &str,
    per_class: Option<usize>,
    seed: u64,
    sigma: f64,
    settings: &ExtractionSettings,
    out: &Path,
) -> Result<()> {
    let config = parse_config(config)?;
    let (manifest, dataset) = load(data, settings, out)?;
    let vectors = dataset.vectors(&config)?;
    let chosen: Vec<&LabeledVector> = match per_class {
        Some(n) => {
            let items: Vec<(&str, &str)> = vectors.iter().map(|v| (v.id.as_str(), v.label.as_str())).collect();
            let splits = split_assignments(&items, n, 0, seed)?;
            vectors.iter().zip(splits).filter(|(_, s)| *s == Split::Train).map(|(v, _)| v).collect()
        }
        None => {
            let tags = tags(&manifest);
            let tagged: Vec<&LabeledVector> = vectors.iter().filter(|v| tags.get(&v.id) == Some(&Split::Train)).collect();
            if tagged.is_empty() {
                vectors.iter().collect()
            } else {
                tagged
            }
        }
    };
    let mut model = train_on(&chosen, sigma, &config.to_string())?;
    model.extraction = Some(serde_json::to_value(settings)?);
    model.save(out)?;
    println!(
        "{} classes, {} exemplars, {} features, sigma {sigma}",
        model.classes.len(),
        chosen.len(),
        model.dim()
    );
    Ok(())
}

fn classify(model_path: &Path, images: &[PathBuf], out: Option<&Path>) -> Result<()> {
    let model = PnnModel::load(model_path)?;
    let settings: ExtractionSettings = match &model.extraction {
        Some(v) => serde_json::from_value(v.clone()).context("model extraction settings")?,
        None => ExtractionSettings::default(),
    };
    let config = parse_config(&model.feature_config).context("model feature configuration")?;
    let mut text = String::from("path,label,posterior\n");
    for path in images {
        let (rgb, _) = load_leaf_image(path)?;
        let features = extract_from_rgb(rgb, &settings).with_context(|| path.display().to_string())?;
        let x = features.assemble(&config).with_context(|| path.display().to_string())?;
        let c = model.classify(&x.values).with_context(|| path.display().to_string())?;
        text.push_str(&format!("{},{},{:.6}\n", path.display(), c.label, c.posterior[c.class_index]));
    }
    match out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
