use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{augment, decode_and_resize, expand_multilabel, split, write_batches, AugmentConfig, BatchManifest, ImageSample, SplitSpec};
use crate::card_data::{Card, Corpus};
use crate::error::{Error, Result};
use crate::labels::LabelKind;

const IMAGE_EXTENSIONS: [&str; 3] = ["jpg", "jpeg", "png"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageDatasetConfig {
    pub label_set: LabelKind,
    pub height: usize,
    pub width: usize,
    pub split: SplitSpec,
    /// `None` disables augmentation.
    pub augment: Option<AugmentConfig>,
    /// Augmented copies added, as a fraction of the training set.
    pub augment_ratio: f64,
    pub records_per_batch: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub cards: usize,
    pub train_samples: usize,
    pub eval_samples: usize,
    pub augmented: usize,
    /// Cards skipped because no image file was found.
    pub missing_images: Vec<String>,
    /// Cards without a label in this label set.
    pub unlabeled: usize,
}

/// `<dir>/<id>.jpg`, `.jpeg` or `.png`, falling back to the card's own image
/// reference taken relative to `dir`'s parent.
pub fn find_card_image(dir: &Path, card: &Card) -> Option<PathBuf> {
    let by_id = IMAGE_EXTENSIONS
        .iter()
        .map(|ext| dir.join(format!("{}.{ext}", card.id)))
        .find(|p| p.is_file());
    by_id.or_else(|| {
        let reference = Path::new(&card.image_ref);
        if card.image_ref.is_empty() || reference.is_absolute() || card.image_ref.contains("://") {
            return None;
        }
        let p = dir.parent().unwrap_or(dir).join(reference);
        p.is_file().then_some(p)
    })
}

/// Expands, loads, splits and augments the image dataset, writing
/// `train/` and `eval/` batch sets under `out`.
///
/// Augmented copies are drawn without replacement from the training side
/// only, and keep their source card's id.
pub fn build_image_dataset(corpus: &Corpus, images: &Path, config: &ImageDatasetConfig, out: &Path) -> Result<DatasetSummary> {
    if !(0.0..=1.0).contains(&config.augment_ratio) {
        return Err(Error::Config(format!("augment_ratio must lie in [0, 1], got {}", config.augment_ratio)));
    }
    let dims = (config.height, config.width);
    if let Some(a) = &config.augment {
        a.validate(dims)?;
    }
    let pairs = expand_multilabel(corpus, config.label_set);
    let mut labels: BTreeMap<&str, Vec<u16>> = BTreeMap::new();
    for (id, l) in &pairs {
        labels.entry(id.as_str()).or_default().push(*l);
    }
    let mut summary = DatasetSummary {
        cards: corpus.len(),
        unlabeled: corpus.len() - labels.len(),
        ..Default::default()
    };

    let mut samples = Vec::with_capacity(pairs.len());
    for card in &corpus.cards {
        let Some(card_labels) = labels.get(card.id.as_str()) else { continue };
        let Some(path) = find_card_image(images, card) else {
            summary.missing_images.push(card.id.clone());
            continue;
        };
        let bytes = fs::read(&path).map_err(|e| Error::load(&path, e.to_string()))?;
        let pixels = decode_and_resize(&bytes, dims, &card.id)?;
        for &label_id in card_labels {
            samples.push(ImageSample {
                pixels: pixels.clone(),
                label_id,
                card_id: card.id.clone(),
            });
        }
    }
    if samples.is_empty() {
        return Err(Error::Empty("image dataset (no labeled card has an image)"));
    }
    let (mut train, eval) = split(samples, &config.split)?;

    if let Some(aug) = &config.augment {
        let n = (config.augment_ratio * train.len() as f64).round() as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(config.split.seed ^ 0x6175_676d);
        let mut sources: Vec<usize> = sample(&mut rng, train.len(), n.min(train.len())).into_vec();
        sources.sort_unstable();
        let mut extra = Vec::with_capacity(sources.len());
        for i in sources {
            let src = &train[i];
            extra.push(ImageSample {
                pixels: augment(&src.pixels, rng.next_u64(), aug)?,
                label_id: src.label_id,
                card_id: src.card_id.clone(),
            });
        }
        summary.augmented = extra.len();
        train.extend(extra);
    }
    summary.train_samples = train.len();
    summary.eval_samples = eval.len();

    let mut manifest = BatchManifest::new(config.label_set, dims, config.split.seed);
    manifest.records_per_batch = config.records_per_batch;
    manifest.augmentation = config.augment;
    write_batches(&train, &manifest, &out.join("train"))?;
    manifest.augmentation = None;
    write_batches(&eval, &manifest, &out.join("eval"))?;
    fs::write(out.join("summary.json"), serde_json::to_vec_pretty(&summary)?)?;
    Ok(summary)
}
