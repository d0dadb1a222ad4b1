//! Card records, the corpus loader and corpus statistics.

mod corpus;
pub mod fetch;
mod mana;
mod stats;
mod type_line;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use corpus::{load_corpus, write_corpus_csv, CorpusFormat, LoadedCorpus, Reject, SourceFile, SourceManifest};
pub use fetch::{assemble_records, fetch_card_data, FetchConfig, FetchFailure, FetchReport};
pub use mana::{
    derive_color_identity, parse_mana_cost, render_mana_cost, text_symbol_colors, Color, ColorIdentity, ManaSymbol,
    SymbolKind,
};
pub use stats::{corpus_stats, CorpusStats, StatRow};
pub use type_line::{main_types, parse_type_line, render_type_line, MainType};

use crate::labels::{ColorLabel, LabelKind, TypeLabel};

/// Unparsed field values for one card, as they appear in the corpus file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCard {
    pub id: String,
    pub name: String,
    #[serde(rename = "manaCost")]
    pub mana_cost: String,
    #[serde(rename = "type")]
    pub type_line: String,
    pub text: String,
    pub flavor: String,
    pub power: String,
    pub toughness: String,
    pub set: String,
    #[serde(rename = "imageUrl")]
    pub image_url: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Card {
    pub id: String,
    pub name: String,
    pub mana_cost: Vec<ManaSymbol>,
    pub type_line: String,
    pub main_types: BTreeSet<MainType>,
    pub types: BTreeSet<TypeLabel>,
    pub rules_text: String,
    pub flavor_text: Option<String>,
    pub power_toughness: Option<(String, String)>,
    pub set_code: String,
    pub color_identity: ColorIdentity,
    pub image_ref: String,
}

impl Card {
    /// Parses every field of a raw row. On failure returns the offending
    /// field name and a reason.
    pub fn from_raw(raw: &RawCard) -> Result<Card, (&'static str, String)> {
        let id = raw.id.trim();
        if id.is_empty() {
            return Err(("id", "empty id".into()));
        }
        let name = raw.name.trim();
        if name.is_empty() {
            return Err(("name", "empty name".into()));
        }
        let type_line = raw.type_line.trim();
        if type_line.is_empty() {
            return Err(("type", "empty type line".into()));
        }
        let mana_cost = parse_mana_cost(&raw.mana_cost).map_err(|e| ("manaCost", e.to_string()))?;
        let rules_text = raw.text.trim().to_string();
        let power_toughness = match (raw.power.trim(), raw.toughness.trim()) {
            ("", "") => None,
            (p, t) => Some((p.to_string(), t.to_string())),
        };
        let non_empty = |s: &str| Some(s.trim().to_string()).filter(|s| !s.is_empty());
        Ok(Card {
            id: id.to_string(),
            name: name.to_string(),
            color_identity: derive_color_identity(&mana_cost, &rules_text),
            mana_cost,
            type_line: type_line.to_string(),
            main_types: main_types(type_line),
            types: parse_type_line(type_line),
            rules_text,
            flavor_text: non_empty(&raw.flavor),
            power_toughness,
            set_code: raw.set.trim().to_string(),
            image_ref: raw.image_url.trim().to_string(),
        })
    }

    pub fn mana_cost_text(&self) -> String {
        render_mana_cost(&self.mana_cost)
    }

    /// Cards without a trainable type label are left out of the type dataset.
    pub fn excluded_from_type_dataset(&self) -> bool {
        self.types.is_empty()
    }

    /// Label ids under the given labeling. Color: one per identity color, or
    /// Colorless when the identity is empty. Type: one per type label (possibly none).
    pub fn label_ids(&self, kind: LabelKind) -> Vec<u16> {
        match kind {
            LabelKind::Color if self.color_identity.is_colorless() => vec![ColorLabel::Colorless.id()],
            LabelKind::Color => self.color_identity.colors().map(|c| c.label().id()).collect(),
            LabelKind::Type => self.types.iter().map(|t| t.id()).collect(),
        }
    }

    /// Text fed to the text classifiers: type line plus rules text, with the
    /// card's own name replaced by the self-reference placeholder.
    pub fn classifier_text(&self) -> String {
        classifier_text(&self.name, &self.type_line, &self.rules_text)
    }
}

pub const SELF_REFERENCE: &str = "{this card}";

pub fn mask_name(name: &str, text: &str) -> String {
    if name.trim().is_empty() {
        text.to_string()
    } else {
        text.replace(name.trim(), SELF_REFERENCE)
    }
}

pub fn classifier_text(name: &str, type_line: &str, rules_text: &str) -> String {
    format!("{}\n{}", type_line, mask_name(name, rules_text))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub cards: Vec<Card>,
    pub source_manifest: SourceManifest,
}

impl Corpus {
    pub fn new(cards: Vec<Card>) -> Self {
        Corpus {
            cards,
            source_manifest: SourceManifest::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Card> {
        self.cards.iter().find(|c| c.id == id)
    }
}
