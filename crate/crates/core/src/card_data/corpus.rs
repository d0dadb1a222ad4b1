use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Card, Corpus, RawCard};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Csv,
    Json,
}

impl CorpusFormat {
    pub fn from_extension(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "csv" => Some(CorpusFormat::Csv),
            "json" => Some(CorpusFormat::Json),
            _ => None,
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CorpusFormat::Csv),
            "json" => Ok(CorpusFormat::Json),
            other => Err(Error::Config(format!("unknown corpus format `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceFile {
    pub path: String,
    pub format: Option<CorpusFormat>,
    pub sha256: String,
    pub bytes: u64,
}

/// Where a corpus came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceManifest {
    pub files: Vec<SourceFile>,
    /// Unix seconds of the fetch session that produced the files, if any.
    pub fetched_at: Option<u64>,
}

/// A row that could not be turned into a card. Rows are numbered from 1,
/// not counting the CSV header.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub row: usize,
    pub field: String,
    pub reason: String,
}

impl fmt::Display for Reject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}", self.row, self.field, self.reason.replace(['\t', '\n'], " "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    pub rejects: Vec<Reject>,
}

impl LoadedCorpus {
    /// Plain-text rejects report, one `row<TAB>field<TAB>reason` line per reject.
    pub fn rejects_report(&self) -> String {
        self.rejects.iter().map(|r| format!("{r}\n")).collect()
    }
}

const MANDATORY: [&str; 5] = ["id", "name", "manaCost", "type", "text"];

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LoadedCorpus> {
    let bytes = fs::read(path).map_err(|e| Error::load(path, e.to_string()))?;
    let rows = match format {
        CorpusFormat::Csv => csv_rows(path, &bytes)?,
        CorpusFormat::Json => json_rows(path, &bytes)?,
    };

    let mut cards = Vec::with_capacity(rows.len());
    let mut rejects = Vec::new();
    let mut seen = HashSet::new();
    for (i, row) in rows.into_iter().enumerate() {
        let row_no = i + 1;
        let raw = match row {
            Ok(raw) => raw,
            Err((field, reason)) => {
                rejects.push(Reject { row: row_no, field: field.into(), reason });
                continue;
            }
        };
        match Card::from_raw(&raw) {
            Ok(card) if !seen.insert(card.id.clone()) => rejects.push(Reject {
                row: row_no,
                field: "id".into(),
                reason: format!("duplicate id `{}`", card.id),
            }),
            Ok(card) => cards.push(card),
            Err((field, reason)) => rejects.push(Reject { row: row_no, field: field.into(), reason }),
        }
    }

    let manifest = SourceManifest {
        files: vec![SourceFile {
            path: path.display().to_string(),
            format: Some(format),
            sha256: hex::encode(Sha256::digest(&bytes)),
            bytes: bytes.len() as u64,
        }],
        fetched_at: None,
    };
    Ok(LoadedCorpus {
        corpus: Corpus {
            cards,
            source_manifest: manifest,
        },
        rejects,
    })
}

type Row = std::result::Result<RawCard, (&'static str, String)>;

fn csv_rows(path: &Path, bytes: &[u8]) -> Result<Vec<Row>> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(bytes);
    let headers = reader.headers().map_err(|e| Error::load(path, e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    for m in MANDATORY {
        if col(m).is_none() {
            return Err(Error::load(path, format!("missing mandatory column `{m}`")));
        }
    }
    let cols = [
        col("id"),
        col("name"),
        col("manaCost"),
        col("type"),
        col("text"),
        col("flavor"),
        col("power"),
        col("toughness"),
        col("set"),
        col("imageUrl"),
    ];

    let mut rows = Vec::new();
    for record in reader.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                rows.push(Err(("row", e.to_string())));
                continue;
            }
        };
        let get = |c: Option<usize>| c.and_then(|i| record.get(i)).unwrap_or("").to_string();
        if cols[..5].iter().any(|c| record.get(c.unwrap()).is_none()) {
            rows.push(Err(("row", format!("expected at least {} fields", headers.len()))));
            continue;
        }
        rows.push(Ok(RawCard {
            id: get(cols[0]),
            name: get(cols[1]),
            mana_cost: get(cols[2]),
            type_line: get(cols[3]),
            text: get(cols[4]),
            flavor: get(cols[5]),
            power: get(cols[6]),
            toughness: get(cols[7]),
            set: get(cols[8]),
            image_url: get(cols[9]),
        }));
    }
    Ok(rows)
}

fn json_rows(path: &Path, bytes: &[u8]) -> Result<Vec<Row>> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| Error::load(path, e.to_string()))?;
    let items = value
        .as_array()
        .ok_or_else(|| Error::load(path, "expected a JSON array of card objects"))?;
    Ok(items.iter().map(json_row).collect())
}

fn json_row(item: &serde_json::Value) -> Row {
    let obj = item.as_object().ok_or(("row", "not a JSON object".to_string()))?;
    let field = |key: &'static str, mandatory: bool| -> std::result::Result<String, (&'static str, String)> {
        match obj.get(key) {
            None | Some(serde_json::Value::Null) if mandatory => Err((key, "missing field".to_string())),
            None | Some(serde_json::Value::Null) => Ok(String::new()),
            Some(serde_json::Value::String(s)) => Ok(s.clone()),
            Some(v @ (serde_json::Value::Number(_) | serde_json::Value::Bool(_))) => Ok(v.to_string()),
            Some(_) => Err((key, "expected a string".to_string())),
        }
    };
    Ok(RawCard {
        id: field("id", true)?,
        name: field("name", true)?,
        mana_cost: field("manaCost", true)?,
        type_line: field("type", true)?,
        text: field("text", true)?,
        flavor: field("flavor", false)?,
        power: field("power", false)?,
        toughness: field("toughness", false)?,
        set: field("set", false)?,
        image_url: field("imageUrl", false)?,
    })
}

/// Writes raw rows in the documented CSV layout.
pub fn write_corpus_csv(rows: &[RawCard], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["name", "manaCost", "type", "text", "flavor", "power", "toughness", "set", "imageUrl", "id"])?;
    for r in rows {
        writer.write_record([
            &r.name,
            &r.mana_cost,
            &r.type_line,
            &r.text,
            &r.flavor,
            &r.power,
            &r.toughness,
            &r.set,
            &r.image_url,
            &r.id,
        ])?;
    }
    writer.flush()?;
    Ok(())
}
