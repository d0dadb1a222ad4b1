//! Labeled datasets: multilabel expansion, card-coherent splits, image
//! preprocessing, the binary batch format and the text vocabulary.

mod batch;
mod build;
mod image;
mod vocab;

use std::collections::{BTreeSet, HashMap};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use self::batch::{decode_batch, encode_batch, read_batches, write_batches, BatchEntry, BatchManifest, BatchSet, MAGIC};
pub use self::build::{build_image_dataset, find_card_image, DatasetSummary, ImageDatasetConfig};
pub use self::image::{augment, decode_and_resize, AugmentConfig, PixelArray};
pub use self::vocab::{build_text_vocab, encode_text, tokenize, Vocabulary, NAME_TOKEN, PAD, PAD_TOKEN, UNK, UNK_TOKEN};

use crate::card_data::Corpus;
use crate::error::{Error, Result};
use crate::labels::LabelKind;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImageSample {
    pub pixels: PixelArray,
    pub label_id: u16,
    pub card_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TextSample {
    pub token_ids: Vec<u32>,
    pub label_id: u16,
    pub card_id: String,
}

/// Anything that belongs to a card, so splits can keep a card's copies together.
pub trait CardKeyed {
    fn card_id(&self) -> &str;
}

impl CardKeyed for ImageSample {
    fn card_id(&self) -> &str {
        &self.card_id
    }
}

impl CardKeyed for TextSample {
    fn card_id(&self) -> &str {
        &self.card_id
    }
}

impl CardKeyed for (String, u16) {
    fn card_id(&self) -> &str {
        &self.0
    }
}

/// One `(card_id, label_id)` entry per label the card carries.
///
/// Color labeling maps an empty identity to Colorless; type labeling drops
/// cards that have no type label.
pub fn expand_multilabel(corpus: &Corpus, kind: LabelKind) -> Vec<(String, u16)> {
    corpus
        .cards
        .iter()
        .flat_map(|card| card.label_ids(kind).into_iter().map(move |l| (card.id.clone(), l)))
        .collect()
}

/// Label sets per card, reconstructed from expanded samples.
pub fn label_sets<S: CardKeyed>(samples: &[S], label: impl Fn(&S) -> u16) -> HashMap<String, BTreeSet<u16>> {
    let mut sets: HashMap<String, BTreeSet<u16>> = HashMap::new();
    for s in samples {
        sets.entry(s.card_id().to_string()).or_default().insert(label(s));
    }
    sets
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: Ratio<u64>,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: Ratio<u64>, seed: u64) -> Self {
        SplitSpec { train_fraction, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let f = self.train_fraction;
        if *f.numer() == 0 || f >= Ratio::from_integer(1) {
            return Err(Error::Config(format!("train fraction {f} must lie strictly between 0 and 1")));
        }
        Ok(())
    }

    /// round(fraction * n), halves rounded up, computed exactly.
    pub fn train_count(&self, n: usize) -> usize {
        let (num, den) = (*self.train_fraction.numer() as u128, *self.train_fraction.denom() as u128);
        ((2 * num * n as u128 + den) / (2 * den)) as usize
    }
}

/// Partitions samples into (train, eval) by card.
///
/// Distinct card ids are sorted, shuffled under the seed, and the first
/// `round(fraction * cards)` go to training. Every copy of a card lands on
/// the same side; within each side the input order is kept.
pub fn split<S: CardKeyed>(samples: Vec<S>, spec: &SplitSpec) -> Result<(Vec<S>, Vec<S>)> {
    spec.validate()?;
    if samples.is_empty() {
        return Err(Error::Empty("sample list"));
    }
    let mut ids: Vec<&str> = samples.iter().map(|s| s.card_id()).collect::<BTreeSet<_>>().into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    ids.shuffle(&mut rng);
    let n_train = spec.train_count(ids.len());
    let train_ids: BTreeSet<String> = ids[..n_train].iter().map(|s| s.to_string()).collect();

    let (train, eval) = samples.into_iter().partition(|s| train_ids.contains(s.card_id()));
    Ok((train, eval))
}
