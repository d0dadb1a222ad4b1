//! Synthetic data with known structure, for tests, demos and the CLI's
//! `make-fixtures` command. No real card data or artwork is involved.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::card_data::RawCard;
use crate::dataset::{ImageSample, PixelArray};
use crate::labels::ColorLabel;

/// Base tint per color label, indexed by label id.
pub const TINTS: [[u8; 3]; 6] = [
    [225, 220, 195],
    [40, 90, 215],
    [35, 30, 40],
    [210, 45, 40],
    [45, 165, 70],
    [140, 125, 110],
];

/// An image dominated by `tint`, with a per-image brightness shift, a
/// darker blob and per-pixel Gaussian noise.
pub fn tinted_image<R: Rng>(rng: &mut R, tint: [u8; 3], height: usize, width: usize) -> PixelArray {
    let noise = Normal::new(0.0, 18.0).unwrap();
    let shift = rng.random_range(-20.0..20.0);
    let (cy, cx) = (rng.random_range(0..height) as f64, rng.random_range(0..width) as f64);
    let radius = rng.random_range(2.0..(height.min(width) as f64 / 3.0).max(2.5));
    let mut img = PixelArray::filled(height, width, [0; 3]);
    for y in 0..height {
        for x in 0..width {
            let d = ((y as f64 - cy).powi(2) + (x as f64 - cx).powi(2)).sqrt();
            let shade = if d < radius { 0.7 } else { 1.0 };
            for c in 0..3 {
                let v = tint[c] as f64 * shade + shift + noise.sample(rng);
                img.set(c, y, x, v.round().clamp(0.0, 255.0) as u8);
            }
        }
    }
    img
}

/// `n` images spread evenly over the six color labels; the label is the dominant tint.
pub fn tint_dataset(n: usize, height: usize, width: usize, seed: u64) -> Vec<ImageSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = i % TINTS.len();
            ImageSample {
                pixels: tinted_image(&mut rng, TINTS[label], height, width),
                label_id: label as u16,
                card_id: format!("tint{i:05}"),
            }
        })
        .collect()
}

const SUBJECTS: [&str; 8] = [
    "target creature",
    "each opponent",
    "target player",
    "up to two target creatures",
    "another target permanent",
    "each creature you control",
    "target artifact",
    "any target",
];

const FILLERS: [&str; 8] = [
    "At the beginning of your upkeep,",
    "When this enters the battlefield,",
    "Whenever you cast a spell,",
    "At the beginning of each end step,",
    "Whenever a creature dies,",
    "When you cycle this,",
    "If you control a Swamp,",
    "Until end of turn,",
];

/// Disjoint marker words per type label id.
pub const MARKERS: [[&str; 3]; 5] = [
    ["trample", "haste", "vigilance"],
    ["equip", "fortify", "crew"],
    ["aura", "enchant", "constellation"],
    ["kicker", "overload", "rebound"],
    ["landfall", "tapped", "basic"],
];

/// `n` short rules texts over five classes. Each class owns a few marker
/// words; everything else is drawn from shared templates.
pub fn keyword_corpus(n: usize, seed: u64) -> Vec<(String, u16)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = i % MARKERS.len();
            let marker = MARKERS[label].choose(&mut rng).unwrap();
            let filler = FILLERS.choose(&mut rng).unwrap();
            let subject = SUBJECTS.choose(&mut rng).unwrap();
            let amount = rng.random_range(1..6);
            let text = match rng.random_range(0..4) {
                0 => format!("{filler} {marker} {amount}. Deal {amount} damage to {subject}."),
                1 => format!("{marker} {{{amount}}} {filler} tap {subject}."),
                2 => format!("{filler} {subject} gains {marker} until end of turn."),
                _ => format!("Draw a card. {marker} — {filler} return {subject} to its owner's hand."),
            };
            (text, label as u16)
        })
        .collect()
}

const NAME_A: [&str; 10] = [
    "Ashen", "Brazen", "Cinder", "Dusk", "Ember", "Frost", "Gloom", "Hollow", "Iron", "Jade",
];
const NAME_B: [&str; 10] = [
    "Warden", "Owl", "Golem", "Pact", "Tide", "Rite", "Spire", "Drake", "Chant", "Grove",
];

struct Template {
    type_line: &'static str,
    text: &'static str,
    creature: bool,
}

const TEMPLATES: [Template; 9] = [
    Template { type_line: "Creature — Bird", text: "Flying. When {name} enters the battlefield, scry 1.", creature: true },
    Template { type_line: "Creature — Human Warrior", text: "Trample, haste.", creature: true },
    Template { type_line: "Artifact Creature — Golem", text: "Vigilance. {T}: Add {C}.", creature: true },
    Template { type_line: "Artifact — Equipment", text: "Equipped creature gets +1/+1. Equip {2}", creature: false },
    Template { type_line: "Enchantment — Aura", text: "Enchant creature. Enchanted creature can't block.", creature: false },
    Template { type_line: "Enchantment", text: "At the beginning of your upkeep, you gain 1 life.", creature: false },
    Template { type_line: "Instant", text: "Counter target spell unless its controller pays {3}.", creature: false },
    Template { type_line: "Sorcery", text: "{name} deals 3 damage to any target.", creature: false },
    Template { type_line: "Land", text: "{T}: Add one mana of any color. {name} enters the battlefield tapped.", creature: false },
];

const COLORS: [&str; 5] = ["W", "U", "B", "R", "G"];

/// A random but well-formed corpus of `n` cards. Images are expected at
/// `images/<id>.png`, as written by [`card_image`].
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<RawCard> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let name = format!(
                "{} {} {}",
                NAME_A.choose(&mut rng).unwrap(),
                NAME_B.choose(&mut rng).unwrap(),
                i
            );
            let t = TEMPLATES.choose(&mut rng).unwrap();
            let mut cost = String::new();
            if t.type_line != "Land" {
                let generic = rng.random_range(0..4);
                if generic > 0 {
                    cost.push_str(&format!("{{{generic}}}"));
                }
                let colors = match rng.random_range(0..10) {
                    0 => 0,
                    1..=6 => 1,
                    7 | 8 => 2,
                    _ => 3,
                };
                let mut picked: Vec<&str> = COLORS.choose_multiple(&mut rng, colors).copied().collect();
                picked.sort_by_key(|c| COLORS.iter().position(|x| x == c));
                for c in picked {
                    cost.push_str(&format!("{{{c}}}"));
                }
                if cost.is_empty() {
                    cost.push_str("{1}");
                }
            }
            let (power, toughness) = if t.creature {
                (rng.random_range(0..6).to_string(), rng.random_range(1..6).to_string())
            } else {
                (String::new(), String::new())
            };
            let id = format!("syn{i:05}");
            RawCard {
                image_url: format!("images/{id}.png"),
                id,
                text: t.text.replace("{name}", &name),
                name,
                mana_cost: cost,
                type_line: t.type_line.into(),
                flavor: String::new(),
                power,
                toughness,
                set: "SYN".into(),
            }
        })
        .collect()
}

/// Tint for a card's artwork: its first identity color, or the colorless tint.
pub fn card_tint(labels: &[u16]) -> [u8; 3] {
    let label = labels.first().copied().unwrap_or(ColorLabel::Colorless.id());
    TINTS[label as usize]
}

/// Synthetic artwork for a card, seeded per card.
pub fn card_image(color_labels: &[u16], height: usize, width: usize, seed: u64) -> PixelArray {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    tinted_image(&mut rng, card_tint(color_labels), height, width)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card_data::Card;

    #[test]
    fn tint_dataset_is_balanced_and_seeded() {
        let a = tint_dataset(12, 8, 8, 1);
        assert_eq!(a, tint_dataset(12, 8, 8, 1));
        for l in 0..6 {
            assert_eq!(a.iter().filter(|s| s.label_id == l).count(), 2);
        }
    }

    #[test]
    fn markers_are_disjoint_and_present() {
        let all: Vec<&str> = MARKERS.iter().flatten().copied().collect();
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(all.len(), dedup.len());
        for (text, label) in keyword_corpus(50, 3) {
            assert!(MARKERS[label as usize].iter().any(|m| text.contains(m)), "{text}");
        }
    }

    #[test]
    fn synthetic_cards_parse() {
        for raw in synthetic_corpus(200, 7) {
            Card::from_raw(&raw).unwrap();
        }
    }
}
