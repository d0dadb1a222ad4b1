//! Fixed-layout binary batch files.
//!
//! ```text
//! "MTGBATCH" | N: u32 LE | H: u32 LE | W: u32 LE | N records
//! record = label_id: u16 LE | R plane (H*W) | G plane | B plane
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{AugmentConfig, ImageSample, PixelArray};
use crate::error::{Error, Result};
use crate::labels::LabelKind;

pub const MAGIC: &[u8; 8] = b"MTGBATCH";
const HEADER_LEN: usize = 8 + 4 * 3;
const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchEntry {
    pub file: String,
    pub records: usize,
    /// Provenance of each record, in record order.
    pub card_ids: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchManifest {
    pub label_set: LabelKind,
    pub height: usize,
    pub width: usize,
    pub records_per_batch: usize,
    pub seed: u64,
    pub augmentation: Option<AugmentConfig>,
    #[serde(default)]
    pub batches: Vec<BatchEntry>,
}

impl BatchManifest {
    pub fn new(label_set: LabelKind, dims: (usize, usize), seed: u64) -> Self {
        BatchManifest {
            label_set,
            height: dims.0,
            width: dims.1,
            records_per_batch: 10_000,
            seed,
            augmentation: None,
            batches: Vec::new(),
        }
    }

    pub fn record_count(&self) -> usize {
        self.batches.iter().map(|b| b.records).sum()
    }

    fn record_len(&self) -> usize {
        2 + 3 * self.height * self.width
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchSet {
    pub dir: PathBuf,
    pub manifest: BatchManifest,
}

pub fn encode_batch(samples: &[ImageSample], dims: (usize, usize)) -> Result<Vec<u8>> {
    let (h, w) = dims;
    let mut out = Vec::with_capacity(HEADER_LEN + samples.len() * (2 + 3 * h * w));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(samples.len() as u32).to_le_bytes());
    out.extend_from_slice(&(h as u32).to_le_bytes());
    out.extend_from_slice(&(w as u32).to_le_bytes());
    for s in samples {
        if s.pixels.dims() != dims {
            return Err(Error::Input(format!(
                "sample of card {} is {:?}, batch is {:?}",
                s.card_id,
                s.pixels.dims(),
                dims
            )));
        }
        out.extend_from_slice(&s.label_id.to_le_bytes());
        out.extend_from_slice(s.pixels.data());
    }
    Ok(out)
}

/// Parses one batch file; returns its dimensions and `(label_id, pixels)` records.
pub fn decode_batch(bytes: &[u8], name: &str) -> Result<((usize, usize), Vec<(u16, PixelArray)>)> {
    let fail = |reason: String| Error::Format {
        batch: name.to_string(),
        reason,
    };
    if bytes.len() < HEADER_LEN {
        return Err(fail(format!("truncated header ({} bytes)", bytes.len())));
    }
    if &bytes[..8] != MAGIC {
        return Err(fail("magic mismatch".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[8 + 4 * i..12 + 4 * i].try_into().unwrap()) as usize;
    let (n, h, w) = (word(0), word(1), word(2));
    let record_len = 2 + 3 * h * w;
    let expected = n
        .checked_mul(record_len)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| fail("record count overflows".into()))?;
    if bytes.len() != expected {
        return Err(fail(format!(
            "header declares {n} records of {record_len} bytes ({expected} total), file has {} bytes",
            bytes.len()
        )));
    }
    let records = bytes[HEADER_LEN..]
        .chunks_exact(record_len)
        .map(|r| {
            let label = u16::from_le_bytes([r[0], r[1]]);
            (label, PixelArray::new(h, w, r[2..].to_vec()).expect("sized by header"))
        })
        .collect();
    Ok(((h, w), records))
}

/// Writes `samples` as `batch_NNNN.bin` files plus `manifest.json` into `out`.
/// The manifest's `batches` list is filled in from what was written.
pub fn write_batches(samples: &[ImageSample], manifest: &BatchManifest, out: &Path) -> Result<BatchSet> {
    if manifest.records_per_batch == 0 {
        return Err(Error::Config("records_per_batch must be positive".into()));
    }
    let labels = manifest.label_set.count();
    if let Some(bad) = samples.iter().find(|s| s.label_id as usize >= labels) {
        return Err(Error::Input(format!(
            "label id {} of card {} is outside the {} label set",
            bad.label_id, bad.card_id, manifest.label_set
        )));
    }
    fs::create_dir_all(out)?;
    let mut manifest = manifest.clone();
    manifest.batches.clear();
    for (i, chunk) in samples.chunks(manifest.records_per_batch).enumerate() {
        let file = format!("batch_{i:04}.bin");
        fs::write(out.join(&file), encode_batch(chunk, (manifest.height, manifest.width))?)?;
        manifest.batches.push(BatchEntry {
            file,
            records: chunk.len(),
            card_ids: chunk.iter().map(|s| s.card_id.clone()).collect(),
        });
    }
    fs::write(out.join(MANIFEST), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(BatchSet {
        dir: out.to_path_buf(),
        manifest,
    })
}

pub fn read_batches(dir: &Path) -> Result<(BatchManifest, Vec<ImageSample>)> {
    let manifest_path = dir.join(MANIFEST);
    let manifest: BatchManifest = serde_json::from_slice(
        &fs::read(&manifest_path).map_err(|e| Error::load(&manifest_path, e.to_string()))?,
    )?;
    let mut samples = Vec::with_capacity(manifest.record_count());
    for entry in &manifest.batches {
        let path = dir.join(&entry.file);
        let bytes = fs::read(&path).map_err(|e| Error::load(&path, e.to_string()))?;
        let fail = |reason: String| Error::Format {
            batch: entry.file.clone(),
            reason,
        };
        if bytes.len() != HEADER_LEN + entry.records * manifest.record_len() {
            return Err(fail(format!(
                "manifest declares {} records, file size is {} bytes",
                entry.records,
                bytes.len()
            )));
        }
        let (dims, records) = decode_batch(&bytes, &entry.file)?;
        if dims != (manifest.height, manifest.width) {
            return Err(fail(format!("dimensions {dims:?} differ from manifest")));
        }
        if records.len() != entry.card_ids.len() {
            return Err(fail("card id list length differs from record count".into()));
        }
        for ((label_id, pixels), card_id) in records.into_iter().zip(&entry.card_ids) {
            samples.push(ImageSample {
                pixels,
                label_id,
                card_id: card_id.clone(),
            });
        }
    }
    Ok((manifest, samples))
}
