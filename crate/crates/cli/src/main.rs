//! `leafid`: segmentation, feature extraction, PNN training and the
//! evaluation protocols from the command line.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use leafid::features::ExtractionSettings;
use leafid::imaging::Polarity;
use leafid::texture::CorrelationForm;
use leafid::vein::VeinPolarity;

#[derive(Debug, Parser)]
#[command(name = "leafid", version, about = "Leaf species identification with shape, color, texture and vein features")]
pub struct Cli {
    /// Worker threads for extraction and evaluation (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: Option<u16>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment one image and write the leaf mask as a 1-bit PNG.
    Segment {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = PolarityArg::Auto)]
        polarity: PolarityArg,
    },
    /// Extract feature vectors for a dataset into a CSV file.
    Extract {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "full")]
        config: String,
        #[command(flatten)]
        extraction: ExtractionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a PNN model and save it as JSON.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "best-flavia")]
        config: String,
        /// Train on a seeded sample of this many leaves per class instead of the whole set.
        #[arg(long, value_parser = positive_count)]
        train: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05, value_parser = positive_sigma)]
        sigma: f64,
        #[command(flatten)]
        extraction: ExtractionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify images with a saved model.
    Classify {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        image: Vec<PathBuf>,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split, train and test once; write per-class and summary rows.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "best-flavia")]
        config: String,
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[arg(long, default_value_t = 0.05, value_parser = positive_sigma)]
        sigma: f64,
        #[command(flatten)]
        extraction: ExtractionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate several feature configurations on one shared split.
    Ablation {
        #[command(flatten)]
        data: DataArgs,
        /// `table2`, or configurations separated by commas.
        #[arg(long, default_value = "table2")]
        configs: String,
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[arg(long, default_value_t = 0.05, value_parser = positive_sigma)]
        sigma: f64,
        #[command(flatten)]
        extraction: ExtractionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy as a function of the smoothing factor.
    SigmaSweep {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "best-flavia")]
        config: String,
        /// Comma-separated smoothing factors (default: 1e-3 to 1, log-spaced, plus 0.05).
        #[arg(long, value_delimiter = ',', value_parser = positive_sigma)]
        sigmas: Vec<f64>,
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[command(flatten)]
        extraction: ExtractionArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean accuracy as a function of the training set size.
    LearningCurve {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "best-foliage")]
        config: String,
        /// Comma-separated training sizes per class.
        #[arg(long, value_delimiter = ',', required = true, value_parser = positive_count)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10, value_parser = positive_count)]
        test: usize,
        #[arg(long, default_value_t = 5, value_parser = positive_count)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05, value_parser = positive_sigma)]
        sigma: f64,
        #[command(flatten)]
        extraction: ExtractionArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DataArgs {
    /// Dataset root with one subdirectory of images per class.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Manifest CSV with header `path,label,split`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    /// Training leaves per class (default 40, or the manifest's split tags).
    #[arg(long, value_parser = positive_count)]
    pub train: Option<usize>,
    /// Test leaves per class (default 10, or the manifest's split tags).
    #[arg(long, value_parser = positive_count)]
    pub test: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExtractionArgs {
    /// Which threshold class is the leaf.
    #[arg(long, value_enum, default_value_t = PolarityArg::Auto)]
    pub polarity: PolarityArg,
    /// Let background pixels contribute to the polar Fourier sums.
    #[arg(long)]
    pub no_pft_mask: bool,
    /// Compute color moments over the whole image instead of the leaf.
    #[arg(long)]
    pub color_whole_image: bool,
    /// Gray levels of the co-occurrence matrix.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u16).range(2..=256))]
    pub levels: u16,
    /// Unsquared inverse difference moment numerator.
    #[arg(long)]
    pub idm_standard: bool,
    /// Haralick's correlation instead of the default form.
    #[arg(long)]
    pub correlation_haralick: bool,
    /// Veins darker than the lamina.
    #[arg(long)]
    pub dark_veins: bool,
    /// Fixed top-hat threshold instead of Otsu.
    #[arg(long)]
    pub vein_threshold: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolarityArg {
    Auto,
    Dark,
    Light,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Auto => Polarity::Auto,
            PolarityArg::Dark => Polarity::Dark,
            PolarityArg::Light => Polarity::Light,
        }
    }
}

impl ExtractionArgs {
    pub fn settings(&self) -> ExtractionSettings {
        let mut s = ExtractionSettings {
            polarity: self.polarity.into(),
            color_whole_image: self.color_whole_image,
            ..Default::default()
        };
        s.pft.masked = !self.no_pft_mask;
        s.texture.levels = usize::from(self.levels);
        s.texture.idm_squared = !self.idm_standard;
        if self.correlation_haralick {
            s.texture.correlation = CorrelationForm::Haralick;
        }
        if self.dark_veins {
            s.vein.polarity = VeinPolarity::Dark;
        }
        s.vein.threshold = self.vein_threshold;
        s
    }
}

fn positive_sigma(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("smoothing factor must be positive, got {s}"))
    }
}

fn positive_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        Ok(_) => Err("count must be at least 1".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(usize::from(jobs))
            .build_global()
            .expect("thread pool is configured once");
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", commands::describe(&err));
            ExitCode::FAILURE
        }
    }
}
