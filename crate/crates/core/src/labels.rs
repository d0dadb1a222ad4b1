//! The two label sets every classifier and the matcher work over.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Color labels in label-id order. `Colorless` is reserved for an empty identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ColorLabel {
    White,
    Blue,
    Black,
    Red,
    Green,
    Colorless,
}

impl ColorLabel {
    pub const ALL: [ColorLabel; 6] = [
        ColorLabel::White,
        ColorLabel::Blue,
        ColorLabel::Black,
        ColorLabel::Red,
        ColorLabel::Green,
        ColorLabel::Colorless,
    ];

    pub fn id(self) -> u16 {
        self as u16
    }

    pub fn from_id(id: u16) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        COLOR_NAMES[self as usize]
    }
}

/// Type labels in label-id order. Instant and Sorcery share one label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeLabel {
    Creature,
    Artifact,
    Enchantment,
    InstantSorcery,
    Land,
}

impl TypeLabel {
    pub const ALL: [TypeLabel; 5] = [
        TypeLabel::Creature,
        TypeLabel::Artifact,
        TypeLabel::Enchantment,
        TypeLabel::InstantSorcery,
        TypeLabel::Land,
    ];

    pub fn id(self) -> u16 {
        self as u16
    }

    pub fn from_id(id: u16) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        TYPE_NAMES[self as usize]
    }
}

const COLOR_NAMES: [&str; 6] = ["White", "Blue", "Black", "Red", "Green", "Colorless"];
const TYPE_NAMES: [&str; 5] = ["Creature", "Artifact", "Enchantment", "InstantSorcery", "Land"];

/// Which label set a dataset, model or prediction vector is defined over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Color,
    Type,
}

impl LabelKind {
    pub const BOTH: [LabelKind; 2] = [LabelKind::Color, LabelKind::Type];

    pub fn count(self) -> usize {
        self.names().len()
    }

    pub fn names(self) -> &'static [&'static str] {
        match self {
            LabelKind::Color => &COLOR_NAMES,
            LabelKind::Type => &TYPE_NAMES,
        }
    }

    pub fn name_of(self, id: usize) -> Option<&'static str> {
        self.names().get(id).copied()
    }

    pub fn id_of(self, name: &str) -> Option<usize> {
        self.names().iter().position(|n| *n == name)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelKind::Color => "color",
            LabelKind::Type => "type",
        }
    }
}

impl fmt::Display for LabelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "color" | "colour" => Ok(LabelKind::Color),
            "type" => Ok(LabelKind::Type),
            other => Err(Error::Config(format!("unknown label set `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cardinalities() {
        assert_eq!(LabelKind::Color.count(), 6);
        assert_eq!(LabelKind::Type.count(), 5);
        for (i, c) in ColorLabel::ALL.iter().enumerate() {
            assert_eq!(c.id() as usize, i);
            assert_eq!(LabelKind::Color.name_of(i), Some(c.name()));
        }
        for t in TypeLabel::ALL {
            assert_eq!(TypeLabel::from_id(t.id()), Some(t));
        }
    }

    #[test]
    fn parse_kind() {
        assert_eq!("Color".parse::<LabelKind>().unwrap(), LabelKind::Color);
        assert!("flavor".parse::<LabelKind>().is_err());
    }
}
