use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::card_data::SELF_REFERENCE;
use crate::error::{Error, Result};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";
/// Stand-in for a card's own name.
pub const NAME_TOKEN: &str = "<name>";

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '+' | '-' | '/' | '\'' | '*')
}

/// Lowercased word tokens. Brace symbols such as `{3G}` are single tokens;
/// the self-reference placeholder becomes [`NAME_TOKEN`]. Punctuation and
/// whitespace only separate tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    let flush = |word: &mut String, tokens: &mut Vec<String>| {
        if word.chars().any(char::is_alphanumeric) {
            tokens.push(std::mem::take(word));
        } else {
            word.clear();
        }
    };
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if c == '{' {
            if let Some(close) = rest.find('}') {
                flush(&mut word, &mut tokens);
                let symbol = &rest[..=close];
                if symbol.eq_ignore_ascii_case(SELF_REFERENCE) {
                    tokens.push(NAME_TOKEN.to_string());
                } else {
                    tokens.push(symbol.to_lowercase());
                }
                rest = &rest[close + 1..];
                continue;
            }
        }
        if is_word_char(c) {
            word.extend(c.to_lowercase());
        } else {
            flush(&mut word, &mut tokens);
        }
        rest = &rest[c.len_utf8()..];
    }
    flush(&mut word, &mut tokens);
    tokens
}

/// Token list where the line number is the index; 0 and 1 are the PAD and UNK sentinels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 || tokens[0] != PAD_TOKEN || tokens[1] != UNK_TOKEN {
            return Err(Error::Input("vocabulary must start with the PAD and UNK sentinels".into()));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if t.is_empty() || t.contains('\n') {
                return Err(Error::Input(format!("invalid vocabulary token at line {i}")));
            }
            if index.insert(t.clone(), i as u32).is_some() {
                return Err(Error::Input(format!("duplicate vocabulary token `{t}`")));
            }
        }
        Ok(Vocabulary { tokens, index })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK)
    }

    pub fn to_text(&self) -> String {
        self.tokens.iter().map(|t| format!("{t}\n")).collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_tokens(text.lines().map(str::to_string).collect())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::load(path, e.to_string()))?;
        Self::parse(&text)
    }
}

/// Keeps tokens seen at least `min_count` times, most frequent first, ties
/// broken lexicographically.
pub fn build_text_vocab<S: AsRef<str>>(texts: &[S], min_count: usize) -> Vocabulary {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for text in texts {
        for tok in tokenize(text.as_ref()) {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(t, n)| *n >= min_count.max(1) && t != PAD_TOKEN && t != UNK_TOKEN)
        .collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let tokens = [PAD_TOKEN.to_string(), UNK_TOKEN.to_string()]
        .into_iter()
        .chain(kept.into_iter().map(|(t, _)| t))
        .collect();
    Vocabulary::from_tokens(tokens).expect("built from distinct tokens")
}

/// Token ids truncated or PAD-padded to exactly `max_len`.
pub fn encode_text(text: &str, vocab: &Vocabulary, max_len: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = tokenize(text).iter().take(max_len).map(|t| vocab.id(t)).collect();
    ids.resize(max_len, PAD);
    ids
}
