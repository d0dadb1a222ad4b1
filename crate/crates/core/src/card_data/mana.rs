//! Brace-delimited mana symbols and color identity.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::ColorLabel;

/// One of the five colors, in WUBRG order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    White,
    Blue,
    Black,
    Red,
    Green,
}

impl Color {
    pub const ALL: [Color; 5] = [Color::White, Color::Blue, Color::Black, Color::Red, Color::Green];

    pub fn letter(self) -> char {
        ['W', 'U', 'B', 'R', 'G'][self as usize]
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'W' => Some(Color::White),
            'U' => Some(Color::Blue),
            'B' => Some(Color::Black),
            'R' => Some(Color::Red),
            'G' => Some(Color::Green),
            _ => None,
        }
    }

    pub fn label(self) -> ColorLabel {
        ColorLabel::ALL[self as usize]
    }
}

/// A subset of {W,U,B,R,G}, stored as bits in WUBRG order. Empty means colorless.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct ColorIdentity(u8);

impl ColorIdentity {
    pub const COLORLESS: ColorIdentity = ColorIdentity(0);

    pub fn from_bits(bits: u8) -> Self {
        ColorIdentity(bits & 0b1_1111)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// The identity as a point of {0,1}^5, ordered (W,U,B,R,G).
    pub fn vector(self) -> [u8; 5] {
        let mut v = [0; 5];
        for c in Color::ALL {
            v[c as usize] = u8::from(self.contains(c));
        }
        v
    }

    pub fn contains(self, c: Color) -> bool {
        self.0 & (1 << c as u8) != 0
    }

    pub fn insert(&mut self, c: Color) {
        self.0 |= 1 << c as u8;
    }

    pub fn union(self, other: ColorIdentity) -> ColorIdentity {
        ColorIdentity(self.0 | other.0)
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_colorless(self) -> bool {
        self.0 == 0
    }

    pub fn is_multicolored(self) -> bool {
        self.len() >= 2
    }

    pub fn colors(self) -> impl Iterator<Item = Color> {
        Color::ALL.into_iter().filter(move |c| self.contains(*c))
    }

    /// WUBRG-ordered letters, or `Cl` for colorless.
    pub fn code(self) -> String {
        if self.is_colorless() {
            "Cl".to_string()
        } else {
            self.colors().map(Color::letter).collect()
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        if code == "Cl" {
            return Some(Self::COLORLESS);
        }
        let mut id = Self::COLORLESS;
        for ch in code.chars() {
            id.insert(Color::from_letter(ch)?);
        }
        Some(id)
    }
}

impl FromIterator<Color> for ColorIdentity {
    fn from_iter<I: IntoIterator<Item = Color>>(iter: I) -> Self {
        let mut id = ColorIdentity::COLORLESS;
        for c in iter {
            id.insert(c);
        }
        id
    }
}

impl fmt::Debug for ColorIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ColorIdentity({})", self.code())
    }
}

impl fmt::Display for ColorIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

impl From<ColorIdentity> for String {
    fn from(id: ColorIdentity) -> String {
        id.code()
    }
}

impl TryFrom<String> for ColorIdentity {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        ColorIdentity::from_code(&s).ok_or_else(|| format!("invalid color identity `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    Generic,
    Colored,
    Hybrid,
    Variable,
    Other,
}

/// A single `{...}` symbol. `content` is the text between the braces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManaSymbol {
    pub kind: SymbolKind,
    pub colors: ColorIdentity,
    pub value: u32,
    pub content: String,
}

impl ManaSymbol {
    pub fn generic(value: u32) -> Self {
        ManaSymbol {
            kind: SymbolKind::Generic,
            colors: ColorIdentity::COLORLESS,
            value,
            content: value.to_string(),
        }
    }

    pub fn colored(c: Color) -> Self {
        ManaSymbol {
            kind: SymbolKind::Colored,
            colors: [c].into_iter().collect(),
            value: 0,
            content: c.letter().to_string(),
        }
    }

    /// Classifies the text between a pair of braces.
    pub fn from_content(content: &str) -> Self {
        let colors_in = |s: &str| s.chars().filter_map(Color::from_letter).collect::<ColorIdentity>();
        let token = content.trim();
        let (kind, colors, value) = if !token.is_empty() && token.bytes().all(|b| b.is_ascii_digit()) {
            match token.parse::<u32>() {
                Ok(v) => (SymbolKind::Generic, ColorIdentity::COLORLESS, v),
                Err(_) => (SymbolKind::Other, ColorIdentity::COLORLESS, 0),
            }
        } else if token.len() == 1 && Color::from_letter(token.chars().next().unwrap()).is_some() {
            (SymbolKind::Colored, colors_in(token), 0)
        } else if matches!(token, "X" | "Y" | "Z") {
            (SymbolKind::Variable, ColorIdentity::COLORLESS, 0)
        } else {
            let hybrid = match token.split('/').collect::<Vec<_>>().as_slice() {
                [a, b] if a.len() == 1 && b.len() == 1 => {
                    let (a, b) = (a.chars().next().unwrap(), b.chars().next().unwrap());
                    match (Color::from_letter(a), Color::from_letter(b)) {
                        (Some(x), Some(y)) if x != y => Some([x, y].into_iter().collect()),
                        _ => None,
                    }
                }
                _ => None,
            };
            match hybrid {
                Some(colors) => (SymbolKind::Hybrid, colors, 0),
                None => (SymbolKind::Other, colors_in(token), 0),
            }
        };
        ManaSymbol {
            kind,
            colors,
            value,
            content: content.to_string(),
        }
    }
}

impl fmt::Display for ManaSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.content)
    }
}

/// Parses a mana cost such as `{2}{W}{U}` into symbols, left to right.
///
/// Whitespace between symbols is ignored; any other text outside braces and
/// unbalanced braces are errors carrying the offending byte offset.
pub fn parse_mana_cost(raw: &str) -> Result<Vec<ManaSymbol>> {
    let mut symbols = Vec::new();
    let bytes = raw.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' => {
                let rest = &raw[i + 1..];
                let close = rest.find('}');
                let reopen = rest.find('{');
                match (close, reopen) {
                    (Some(c), r) if r.is_none_or(|r| c < r) => {
                        let content = &rest[..c];
                        if content.trim().is_empty() {
                            return Err(Error::Parse {
                                offset: i,
                                message: "empty mana symbol".into(),
                            });
                        }
                        symbols.push(ManaSymbol::from_content(content));
                        i += c + 2;
                    }
                    _ => {
                        return Err(Error::Parse {
                            offset: i,
                            message: "unbalanced `{`".into(),
                        })
                    }
                }
            }
            b'}' => {
                return Err(Error::Parse {
                    offset: i,
                    message: "unbalanced `}`".into(),
                })
            }
            b if b.is_ascii_whitespace() => i += 1,
            _ => {
                let ch = raw[i..].chars().next().unwrap_or('?');
                return Err(Error::Parse {
                    offset: i,
                    message: format!("unexpected `{ch}` outside a mana symbol"),
                });
            }
        }
    }
    Ok(symbols)
}

pub fn render_mana_cost(symbols: &[ManaSymbol]) -> String {
    symbols.iter().map(ToString::to_string).collect()
}

/// Colors of every `{...}` symbol embedded in free text.
///
/// Lenient: an unmatched `{` contributes nothing, and a symbol runs to the
/// first `}` after its opening brace.
pub fn text_symbol_colors(text: &str) -> ColorIdentity {
    let mut id = ColorIdentity::COLORLESS;
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                id = id.union(ManaSymbol::from_content(&after[..close]).colors);
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    id
}

/// Union of the colors in the mana cost and of the color symbols in rules text.
pub fn derive_color_identity(mana_cost: &[ManaSymbol], rules_text: &str) -> ColorIdentity {
    mana_cost
        .iter()
        .fold(text_symbol_colors(rules_text), |acc, s| acc.union(s.colors))
}
