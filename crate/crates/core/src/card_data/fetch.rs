//! Rate-limited client that pulls raw card records and illustrations from
//! any card-database mirror exposing one JSON record per id.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FetchConfig {
    /// Record URL with an `{id}` placeholder, e.g. `http://host/cards/{id}.json`.
    pub url_template: String,
    /// Maximum requests per second.
    pub rate_limit: f64,
    /// Field of the record holding the illustration URL.
    pub image_field: String,
    pub timeout_secs: u64,
}

impl FetchConfig {
    pub fn new(url_template: impl Into<String>, rate_limit: f64) -> Self {
        FetchConfig {
            url_template: url_template.into(),
            rate_limit,
            image_field: "imageUrl".into(),
            timeout_secs: 30,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchFailure {
    pub id: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchReport {
    pub requested: usize,
    pub records_written: usize,
    pub images_written: usize,
    pub skipped: usize,
    pub errors: Vec<FetchFailure>,
    /// Index into the id list to resume from after a transport failure.
    pub cursor: Option<usize>,
    pub started_at: u64,
}

struct RateLimiter {
    interval: Duration,
    last: Option<Instant>,
}

impl RateLimiter {
    fn wait(&mut self) {
        if let Some(last) = self.last {
            let elapsed = last.elapsed();
            if elapsed < self.interval {
                thread::sleep(self.interval - elapsed);
            }
        }
        self.last = Some(Instant::now());
    }
}

enum Outcome {
    Body(Vec<u8>),
    Status(u16),
}

fn get(agent: &ureq::Agent, limiter: &mut RateLimiter, url: &str) -> std::result::Result<Outcome, String> {
    limiter.wait();
    let mut response = agent.get(url).call().map_err(|e| e.to_string())?;
    let status = response.status().as_u16();
    if !(200..300).contains(&status) {
        return Ok(Outcome::Status(status));
    }
    response
        .body_mut()
        .with_config()
        .limit(64 << 20)
        .read_to_vec()
        .map(Outcome::Body)
        .map_err(|e| e.to_string())
}

fn safe_id(id: &str) -> bool {
    !id.is_empty()
        && id != "."
        && id != ".."
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

fn image_url(record: &[u8], field: &str) -> Option<String> {
    let value: serde_json::Value = serde_json::from_slice(record).ok()?;
    value.get(field)?.as_str().filter(|s| !s.is_empty()).map(str::to_string)
}

/// Fetches `ids` into `out/records/<id>.json` and `out/images/<id>.jpg`.
///
/// Already-present files are skipped. HTTP error statuses are recorded per
/// card and the session continues; a transport failure stops the session
/// and sets `cursor` to the id that failed.
pub fn fetch_card_data(config: &FetchConfig, ids: &[String], out: &Path) -> Result<FetchReport> {
    if !(config.rate_limit > 0.0 && config.rate_limit.is_finite()) {
        return Err(Error::Config(format!("rate limit must be positive, got {}", config.rate_limit)));
    }
    if !config.url_template.contains("{id}") {
        return Err(Error::Config("url template must contain `{id}`".into()));
    }
    let records_dir = out.join("records");
    let images_dir = out.join("images");
    fs::create_dir_all(&records_dir)?;
    fs::create_dir_all(&images_dir)?;

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
        .build()
        .into();
    let mut limiter = RateLimiter {
        interval: Duration::from_secs_f64(1.0 / config.rate_limit),
        last: None,
    };
    let mut report = FetchReport {
        requested: ids.len(),
        started_at: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        ..Default::default()
    };

    for (i, id) in ids.iter().enumerate() {
        if !safe_id(id) {
            report.errors.push(FetchFailure {
                id: id.clone(),
                message: "id is not usable as a file name".into(),
            });
            continue;
        }
        let record_path = records_dir.join(format!("{id}.json"));
        let image_path: PathBuf = images_dir.join(format!("{id}.jpg"));

        let mut downloaded = false;
        let record = if record_path.exists() {
            fs::read(&record_path)?
        } else {
            let url = config.url_template.replace("{id}", id);
            match get(&agent, &mut limiter, &url) {
                Ok(Outcome::Body(body)) => {
                    fs::write(&record_path, &body)?;
                    report.records_written += 1;
                    downloaded = true;
                    body
                }
                Ok(Outcome::Status(code)) => {
                    log::warn!("record {id}: HTTP {code}");
                    report.errors.push(FetchFailure {
                        id: id.clone(),
                        message: format!("HTTP {code} for record"),
                    });
                    continue;
                }
                Err(e) => {
                    report.errors.push(FetchFailure { id: id.clone(), message: e });
                    report.cursor = Some(i);
                    return Ok(report);
                }
            }
        };

        if let Some(url) = image_url(&record, &config.image_field).filter(|_| !image_path.exists()) {
            match get(&agent, &mut limiter, &url) {
                Ok(Outcome::Body(body)) => {
                    fs::write(&image_path, &body)?;
                    report.images_written += 1;
                    downloaded = true;
                }
                Ok(Outcome::Status(code)) => {
                    log::warn!("image {id}: HTTP {code}");
                    report.errors.push(FetchFailure {
                        id: id.clone(),
                        message: format!("HTTP {code} for image"),
                    });
                }
                Err(e) => {
                    report.errors.push(FetchFailure { id: id.clone(), message: e });
                    report.cursor = Some(i);
                    return Ok(report);
                }
            }
        }
        if !downloaded {
            report.skipped += 1;
        }
    }
    Ok(report)
}

/// Gathers `records/<id>.json` files, in id order, into one JSON array
/// readable by `load_corpus`. A record without an `id` field gets its file
/// stem. Returns the number of records written.
pub fn assemble_records(records_dir: &Path, out: &Path) -> Result<usize> {
    let mut paths: Vec<PathBuf> = fs::read_dir(records_dir)
        .map_err(|e| Error::load(records_dir, e.to_string()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut items = Vec::with_capacity(paths.len());
    for path in &paths {
        let mut value: serde_json::Value =
            serde_json::from_slice(&fs::read(path)?).map_err(|e| Error::load(path, e.to_string()))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::load(path, "record is not a JSON object"))?;
        if !obj.contains_key("id") {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            obj.insert("id".into(), serde_json::Value::String(stem.to_string()));
        }
        items.push(value);
    }
    fs::write(out, serde_json::to_vec_pretty(&items)?)?;
    Ok(items.len())
}
