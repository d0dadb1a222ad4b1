use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::rnn::{sample_cards, CharRnn};
use super::{decode_card, DecodedCard};
use crate::artifact::sha256_hex;
use crate::error::{Error, Result};
use crate::labels::LabelKind;
use crate::prediction::PredictionVector;
use crate::scalar::Scalar;
use crate::text_classifier::TextCnn;

/// One generated record with its two prediction vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedCard {
    pub bank_index: usize,
    pub raw: String,
    pub decoded: Option<DecodedCard>,
    pub color_pred: PredictionVector<f64>,
    pub type_pred: PredictionVector<f64>,
    pub malformed: bool,
}

pub type BankEntry = GeneratedCard;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankManifest {
    pub count: usize,
    pub seed: u64,
    pub temperature: f64,
    pub generator_sha256: String,
    pub color_model_sha256: String,
    pub type_model_sha256: String,
    pub malformed: usize,
    pub malformed_rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Bank {
    pub entries: Vec<GeneratedCard>,
    pub manifest: BankManifest,
}

fn expect_labels<T: Scalar>(model: &TextCnn<T>, kind: LabelKind, role: &str) -> Result<()> {
    match model.config().label_set {
        Some(k) if k == kind => Ok(()),
        other => Err(Error::Config(format!(
            "{role} classifier must use the {kind} label set, found {}",
            other.map_or("none".to_string(), |k| k.to_string())
        ))),
    }
}

/// Samples `count` cards and tags each with color and type predictions.
/// Malformed records are kept, classified on their raw text, and counted.
pub fn build_card_bank<T: Scalar>(
    generator: &CharRnn<T>,
    count: usize,
    temperature: f64,
    seed: u64,
    color_model: &TextCnn<T>,
    type_model: &TextCnn<T>,
) -> Result<Bank> {
    expect_labels(color_model, LabelKind::Color, "color")?;
    expect_labels(type_model, LabelKind::Type, "type")?;
    let raws = sample_cards(generator, count, temperature, seed)?;
    let mut entries = Vec::with_capacity(raws.len());
    for (bank_index, raw) in raws.into_iter().enumerate() {
        let decoded = decode_card(&raw).ok();
        let text = decoded.as_ref().map_or_else(|| raw.clone(), DecodedCard::classifier_text);
        entries.push(GeneratedCard {
            bank_index,
            color_pred: color_model.predict_text(&text)?,
            type_pred: type_model.predict_text(&text)?,
            malformed: decoded.is_none(),
            decoded,
            raw,
        });
    }
    let malformed = entries.iter().filter(|e| e.malformed).count();
    let manifest = BankManifest {
        count,
        seed,
        temperature,
        generator_sha256: sha256_hex(&generator.to_bytes()),
        color_model_sha256: sha256_hex(&color_model.to_bytes()),
        type_model_sha256: sha256_hex(&type_model.to_bytes()),
        malformed,
        malformed_rate: malformed as f64 / count as f64,
    };
    Ok(Bank { entries, manifest })
}

/// `bank.jsonl` → `bank.manifest.json`.
pub fn bank_manifest_path(bank: &Path) -> PathBuf {
    bank.with_extension("manifest.json")
}

pub fn write_bank(bank: &Bank, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    for e in &bank.entries {
        serde_json::to_writer(&mut out, e)?;
        out.push(b'\n');
    }
    fs::write(path, out)?;
    let mut m = fs::File::create(bank_manifest_path(path))?;
    serde_json::to_writer_pretty(&mut m, &bank.manifest)?;
    m.write_all(b"\n")?;
    Ok(())
}

/// Reads a bank and its manifest, checking indices run 0..count.
pub fn read_bank(path: &Path) -> Result<Bank> {
    let file = fs::File::open(path).map_err(|e| Error::load(path, e.to_string()))?;
    let mut entries = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: GeneratedCard = serde_json::from_str(&line)
            .map_err(|e| Error::load(path, format!("line {}: {e}", i + 1)))?;
        if entry.bank_index != entries.len() {
            return Err(Error::load(
                path,
                format!("line {} has bank_index {}, expected {}", i + 1, entry.bank_index, entries.len()),
            ));
        }
        entries.push(entry);
    }
    let mpath = bank_manifest_path(path);
    let manifest: BankManifest =
        serde_json::from_slice(&fs::read(&mpath).map_err(|e| Error::load(&mpath, e.to_string()))?)?;
    if manifest.count != entries.len() {
        return Err(Error::load(
            path,
            format!("manifest says {} entries, file has {}", manifest.count, entries.len()),
        ));
    }
    Ok(Bank { entries, manifest })
}
