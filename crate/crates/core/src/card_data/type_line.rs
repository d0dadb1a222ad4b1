use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::labels::TypeLabel;

/// Main card types as printed, before Instant/Sorcery are merged.
///
/// Declaration order is the order used to name type combinations in
/// statistics (`Creature/Artifact`, `Land/Artifact`, `Instant/Sorcery`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MainType {
    Creature,
    Land,
    Artifact,
    Enchantment,
    Instant,
    Sorcery,
    Planeswalker,
}

impl MainType {
    pub fn from_word(word: &str) -> Option<Self> {
        Some(match word {
            "Creature" => MainType::Creature,
            "Land" => MainType::Land,
            "Artifact" => MainType::Artifact,
            "Enchantment" => MainType::Enchantment,
            "Instant" => MainType::Instant,
            "Sorcery" => MainType::Sorcery,
            "Planeswalker" => MainType::Planeswalker,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            MainType::Creature => "Creature",
            MainType::Land => "Land",
            MainType::Artifact => "Artifact",
            MainType::Enchantment => "Enchantment",
            MainType::Instant => "Instant",
            MainType::Sorcery => "Sorcery",
            MainType::Planeswalker => "Planeswalker",
        }
    }

    /// Planeswalker has no training label.
    pub fn label(self) -> Option<TypeLabel> {
        match self {
            MainType::Creature => Some(TypeLabel::Creature),
            MainType::Land => Some(TypeLabel::Land),
            MainType::Artifact => Some(TypeLabel::Artifact),
            MainType::Enchantment => Some(TypeLabel::Enchantment),
            MainType::Instant | MainType::Sorcery => Some(TypeLabel::InstantSorcery),
            MainType::Planeswalker => None,
        }
    }
}

/// The part of a type line before the subtype separator.
fn supertypes_and_types(raw: &str) -> &str {
    let cut = ['—', '―', '–']
        .iter()
        .filter_map(|d| raw.find(*d))
        .chain(raw.find(" - "))
        .min();
    match cut {
        Some(i) => &raw[..i],
        None => raw,
    }
}

pub fn main_types(raw: &str) -> BTreeSet<MainType> {
    supertypes_and_types(raw)
        .split(|c: char| c.is_whitespace() || c == '/')
        .filter_map(MainType::from_word)
        .collect()
}

/// Maps a type line to its training labels. Planeswalker and unknown types
/// contribute nothing, so the set may be empty.
pub fn parse_type_line(raw: &str) -> BTreeSet<TypeLabel> {
    main_types(raw).into_iter().filter_map(MainType::label).collect()
}

pub fn render_type_line(labels: &BTreeSet<TypeLabel>) -> String {
    // Printed order puts Creature last ("Artifact Creature").
    const ORDER: [TypeLabel; 5] = [
        TypeLabel::Artifact,
        TypeLabel::Enchantment,
        TypeLabel::Land,
        TypeLabel::InstantSorcery,
        TypeLabel::Creature,
    ];
    ORDER
        .iter()
        .filter(|l| labels.contains(l))
        .map(|l| match l {
            TypeLabel::InstantSorcery => "Instant",
            other => other.name(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}
