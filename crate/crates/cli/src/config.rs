use std::fs;
use std::path::{Path, PathBuf};

use cardnet::{Error, LabelKind, Result};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Declares the config file schema and a matching set of `--flag` overrides.
macro_rules! pipeline_config {
    ($( $(#[doc = $doc:literal])* $field:ident : $ty:ty = $default:expr $(, [$($arg:tt)*])? ;)*) => {
        /// Every tunable of the pipeline. The TOML file uses the same
        /// kebab-case names as the command-line flags.
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
        pub struct PipelineConfig {
            $( $(#[doc = $doc])* pub $field: $ty, )*
        }

        impl Default for PipelineConfig {
            fn default() -> Self {
                PipelineConfig { $( $field: $default, )* }
            }
        }

        #[derive(Clone, Debug, Default, clap::Args)]
        #[command(next_help_heading = "Config overrides")]
        pub struct Overrides {
            $( $(#[doc = $doc])* #[arg(long, global = true $(, $($arg)*)?)] pub $field: Option<$ty>, )*
        }

        impl Overrides {
            pub fn apply(&self, config: &mut PipelineConfig) {
                $( if let Some(v) = &self.$field { config.$field = v.clone(); } )*
            }
        }
    };
}

pipeline_config! {
    /// Corpus file (.csv or .json).
    corpus: PathBuf = PathBuf::from("corpus.csv");
    /// Directory of card images named <id>.jpg or <id>.png.
    images: PathBuf = PathBuf::from("images");
    /// Output directory for batch sets.
    batches: PathBuf = PathBuf::from("work/batches");
    /// Directory for model artifacts and training reports.
    artifacts: PathBuf = PathBuf::from("work/artifacts");
    /// Card bank file (JSON lines).
    bank: PathBuf = PathBuf::from("work/bank.jsonl");
    /// Label set: color, type or both.
    labels: String = "both".into();
    /// Image height after preprocessing.
    height: usize = 32;
    /// Image width after preprocessing.
    width: usize = 32;
    /// Fraction of cards used for training, e.g. 5/6 or 0.8.
    train_fraction: String = "5/6".into();
    /// Add augmented copies of training images.
    augment: bool = true, [num_args = 0..=1, require_equals = true, default_missing_value = "true"];
    /// Pixels that may be cropped from each side during augmentation.
    crop_margin: usize = 4;
    /// Maximum shift in pixels during augmentation.
    max_displacement: usize = 4;
    /// Augmented copies as a fraction of the training set.
    augment_ratio: f64 = 0.2;
    /// Records per batch file.
    records_per_batch: usize = 10_000;
    /// Image classifier epochs.
    image_epochs: usize = 30;
    /// Image classifier mini-batch size.
    image_batch_size: usize = 128;
    /// Image classifier initial learning rate.
    image_learning_rate: f64 = 0.01;
    /// Text classifier epochs.
    text_epochs: usize = 10;
    /// Text classifier mini-batch size.
    text_batch_size: usize = 50;
    /// Text classifier learning rate.
    text_learning_rate: f64 = 1e-3;
    /// Word embedding width.
    embedding_dim: usize = 128;
    /// Convolution filters per width.
    filters_per_width: usize = 100;
    /// Maximum tokens per text.
    max_len: usize = 128;
    /// Dropout on pooled text features.
    dropout: f64 = 0.5;
    /// Minimum token frequency for the vocabulary.
    min_count: usize = 1;
    /// Generator epochs.
    generator_epochs: usize = 20;
    /// LSTM hidden units per layer.
    hidden_size: usize = 256;
    /// LSTM layers.
    layers: usize = 2;
    /// Generator training window in characters.
    sequence_length: usize = 200;
    /// Parallel lanes in generator training.
    generator_batch_size: usize = 32;
    /// Generator learning rate.
    generator_learning_rate: f64 = 2e-3;
    /// Sampling temperature.
    temperature: f64 = 0.8;
    /// Number of generated cards in the bank.
    bank_size: usize = 30_000;
    /// Number of matches to report.
    k: usize = 1;
    /// Weight of the color distance.
    w_color: f64 = 1.0;
    /// Weight of the type distance.
    w_type: f64 = 1.0;
    /// Let malformed generated cards be matched.
    include_malformed: bool = false, [num_args = 0..=1, require_equals = true, default_missing_value = "true"];
    /// Seed for every random choice in the pipeline.
    seed: u64 = 0;
}

impl PipelineConfig {
    /// Reads a TOML file. Relative paths inside it are taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Load {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut config: PipelineConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.corpus,
            &mut config.images,
            &mut config.batches,
            &mut config.artifacts,
            &mut config.bank,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn label_kinds(&self) -> Result<Vec<LabelKind>> {
        match self.labels.as_str() {
            "both" => Ok(LabelKind::BOTH.to_vec()),
            other => Ok(vec![other.parse()?]),
        }
    }

    pub fn train_fraction(&self) -> Result<Ratio<u64>> {
        parse_fraction(&self.train_fraction)
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.artifacts.join(name)
    }
}

/// `"5/6"` or a decimal such as `"0.8"`.
pub fn parse_fraction(s: &str) -> Result<Ratio<u64>> {
    let bad = || Error::Config(format!("`{s}` is not a fraction like 5/6 or 0.8"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) || s.is_empty() {
        return Err(bad());
    }
    let den = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    Ok(Ratio::new(int * den + frac, den))
}
