//! Character-level card generation: the text encoding of cards, the
//! recurrent generator, and the classified bank of generated cards.

mod bank;
mod rnn;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use self::bank::{bank_manifest_path, build_card_bank, read_bank, write_bank, Bank, BankEntry, BankManifest, GeneratedCard};
pub use self::rnn::{sample_cards, train_generator, CharRnn, CharRnnConfig, CharRnnParams, LstmLayer};

use crate::card_data::{mask_name, parse_mana_cost, Card, Corpus};

pub const FIELD_DELIMITER: char = '|';
pub const CARD_TERMINATOR: char = '\n';
const ESCAPE: char = '\\';
const PT_SEPARATOR: char = '/';

/// The fields a card contributes to the generator stream.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedCard {
    pub name: String,
    pub mana_cost: String,
    pub type_line: String,
    pub power_toughness: Option<(String, String)>,
    /// Self-references appear as `{this card}`.
    pub rules_text: String,
}

impl DecodedCard {
    pub fn from_card(card: &Card) -> Self {
        DecodedCard {
            name: card.name.clone(),
            mana_cost: card.mana_cost_text(),
            type_line: card.type_line.clone(),
            power_toughness: card.power_toughness.clone(),
            rules_text: mask_name(&card.name, &card.rules_text),
        }
    }

    /// Text fed to the classifiers.
    pub fn classifier_text(&self) -> String {
        crate::card_data::classifier_text(&self.name, &self.type_line, &self.rules_text)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}    {}", self.name, self.mana_cost);
        let _ = writeln!(s, "{}", self.type_line);
        if !self.rules_text.is_empty() {
            let _ = writeln!(s, "{}", self.rules_text.replace("{this card}", &self.name));
        }
        if let Some((p, t)) = &self.power_toughness {
            let _ = writeln!(s, "{p}/{t}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Malformed {
    pub reason: String,
}

fn escape_into(out: &mut String, field: &str, extra: Option<char>) {
    for c in field.chars() {
        match c {
            ESCAPE => out.push_str("\\\\"),
            FIELD_DELIMITER => out.push_str("\\|"),
            CARD_TERMINATOR => out.push_str("\\n"),
            c if Some(c) == extra => {
                out.push(ESCAPE);
                out.push(c);
            }
            c => out.push(c),
        }
    }
}

/// One record, without the terminator.
pub fn encode_fields(card: &DecodedCard) -> String {
    let mut out = String::new();
    escape_into(&mut out, &card.name, None);
    out.push(FIELD_DELIMITER);
    escape_into(&mut out, &card.mana_cost, None);
    out.push(FIELD_DELIMITER);
    escape_into(&mut out, &card.type_line, None);
    out.push(FIELD_DELIMITER);
    if let Some((p, t)) = &card.power_toughness {
        escape_into(&mut out, p, Some(PT_SEPARATOR));
        out.push(PT_SEPARATOR);
        escape_into(&mut out, t, Some(PT_SEPARATOR));
    }
    out.push(FIELD_DELIMITER);
    escape_into(&mut out, &card.rules_text, None);
    out
}

pub fn encode_card(card: &Card) -> String {
    encode_fields(&DecodedCard::from_card(card))
}

/// Every card's record followed by the terminator, in corpus order.
pub fn encode_corpus(corpus: &Corpus) -> String {
    let mut out = String::new();
    for card in &corpus.cards {
        out.push_str(&encode_card(card));
        out.push(CARD_TERMINATOR);
    }
    out
}

/// Splits on unescaped `sep`, keeping escapes in place.
fn split_unescaped(s: &str, sep: char) -> Result<Vec<&str>, Malformed> {
    let mut parts = Vec::new();
    let mut start = 0;
    let mut chars = s.char_indices();
    while let Some((i, c)) = chars.next() {
        if c == ESCAPE {
            if chars.next().is_none() {
                return Err(Malformed {
                    reason: "dangling escape".into(),
                });
            }
        } else if c == sep {
            parts.push(&s[start..i]);
            start = i + c.len_utf8();
        }
    }
    parts.push(&s[start..]);
    Ok(parts)
}

fn unescape(s: &str) -> Result<String, Malformed> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != ESCAPE {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('|') => out.push('|'),
            Some('n') => out.push('\n'),
            Some('/') => out.push('/'),
            other => {
                return Err(Malformed {
                    reason: format!("bad escape {other:?}"),
                })
            }
        }
    }
    Ok(out)
}

/// Recovers the fields of one generated record, or says why it is malformed.
///
/// A record is well formed when it has exactly five fields, its mana cost
/// parses, and its power/toughness field is empty or a single `p/t` pair.
pub fn decode_card(raw: &str) -> Result<DecodedCard, Malformed> {
    let raw = raw.strip_suffix(CARD_TERMINATOR).unwrap_or(raw);
    let fields = split_unescaped(raw, FIELD_DELIMITER)?;
    if fields.len() != 5 {
        return Err(Malformed {
            reason: format!("expected 5 fields, found {}", fields.len()),
        });
    }
    let mana_cost = unescape(fields[1])?;
    if let Err(e) = parse_mana_cost(&mana_cost) {
        return Err(Malformed {
            reason: format!("mana cost: {e}"),
        });
    }
    let power_toughness = if fields[3].is_empty() {
        None
    } else {
        match split_unescaped(fields[3], PT_SEPARATOR)?.as_slice() {
            [p, t] => Some((unescape(p)?, unescape(t)?)),
            _ => {
                return Err(Malformed {
                    reason: "power/toughness is not a single pair".into(),
                })
            }
        }
    };
    Ok(DecodedCard {
        name: unescape(fields[0])?,
        mana_cost,
        type_line: unescape(fields[2])?,
        power_toughness,
        rules_text: unescape(fields[4])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card_data::RawCard;
    use proptest::prelude::*;

    fn card(name: &str, cost: &str, type_line: &str, text: &str, pt: (&str, &str)) -> Card {
        Card::from_raw(&RawCard {
            id: "1".into(),
            name: name.into(),
            mana_cost: cost.into(),
            type_line: type_line.into(),
            text: text.into(),
            power: pt.0.into(),
            toughness: pt.1.into(),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn stream_shape() {
        assert_eq!(encode_corpus(&Corpus::new(vec![])), "");
        let one = Corpus::new(vec![card("Owl", "{1}{U}", "Creature — Bird", "Flying", ("1", "1"))]);
        let s = encode_corpus(&one);
        assert_eq!(s, "Owl|{1}{U}|Creature — Bird|1/1|Flying\n");
        assert_eq!(s.matches(CARD_TERMINATOR).count(), 1);
    }

    #[test]
    fn self_reference_and_escapes() {
        let c = card(
            "Pipe|Dream",
            "{X}{R}",
            "Sorcery",
            "Pipe|Dream deals X damage.\nDraw a card. Use \\ freely.",
            ("", ""),
        );
        let enc = encode_card(&c);
        assert!(!enc.contains('\n'));
        let dec = decode_card(&enc).unwrap();
        assert_eq!(dec.name, "Pipe|Dream");
        assert_eq!(dec.rules_text, "{this card} deals X damage.\nDraw a card. Use \\ freely.");
        assert_eq!(dec.power_toughness, None);
    }

    #[test]
    fn generated_example_keeps_placeholder() {
        let raw = "Dusk Warden|{2}{W}{U}|Creature — Human Wizard|2/3|When {this card} enters the battlefield, detain target creature.";
        let dec = decode_card(raw).unwrap();
        assert!(dec.rules_text.starts_with("When {this card} enters"));
        assert_eq!(dec.power_toughness, Some(("2".into(), "3".into())));
    }

    #[test]
    fn malformed_records() {
        assert!(decode_card("no delimiters here").is_err());
        assert!(decode_card("a|{2|Creature||text").is_err());
        assert!(decode_card("a|{2}|Creature|1/2/3|text").is_err());
        assert!(decode_card("a|{2}|Creature||text\\").is_err());
        assert!(decode_card("a|{2}|Creature||text|extra").is_err());
    }

    #[test]
    fn odd_power_toughness_round_trips() {
        let c = card("Thing", "{3}", "Artifact Creature — Construct", "", ("*", "1+*"));
        assert_eq!(decode_card(&encode_card(&c)).unwrap(), DecodedCard::from_card(&c));
        let mut d = DecodedCard::from_card(&c);
        d.power_toughness = Some(("1/2".into(), "3".into()));
        assert_eq!(decode_card(&encode_fields(&d)).unwrap(), d);
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(
            name in "[A-Za-z|\\\\/ ]{1,12}",
            type_line in "[A-Za-z —|]{1,20}",
            text in "[A-Za-z{}0-9|\\\\/\n .,]{0,40}",
            pt in proptest::option::of(("[0-9*/+]{1,3}", "[0-9*/+]{1,3}")),
        ) {
            let d = DecodedCard {
                name,
                mana_cost: "{2}{G}".into(),
                type_line,
                power_toughness: pt,
                rules_text: text,
            };
            let enc = encode_fields(&d);
            prop_assert!(!enc.contains(CARD_TERMINATOR));
            prop_assert_eq!(decode_card(&enc).unwrap(), d);
        }
    }
}
