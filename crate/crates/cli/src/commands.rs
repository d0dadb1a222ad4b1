use std::fs;
use std::path::{Path, PathBuf};

use cardnet::artifact::sha256_hex;
use cardnet::card_data::{
    assemble_records, corpus_stats, fetch_card_data, load_corpus, write_corpus_csv, Card, Corpus, CorpusFormat,
    FetchConfig,
};
use cardnet::dataset::{
    build_image_dataset, build_text_vocab, decode_and_resize, split, AugmentConfig, ImageDatasetConfig, SplitSpec,
};
use cardnet::fixtures::{card_image, synthetic_corpus, TINTS};
use cardnet::image_classifier::{train_on_batches, CnnConfig};
use cardnet::matcher::{match_bank, render_matches, MatchOutput, MatchQuery, MatchWeights};
use cardnet::report::TrainReport;
use cardnet::text_classifier::{text_samples, TextCnnConfig};
use cardnet::text_generator::{build_card_bank, encode_corpus, read_bank, write_bank, CharRnnConfig};
use cardnet::{Error, GeneratorModel, ImageModel, LabelKind, Prediction, Result, TextModel};
use clap::Args;
use serde_json::json;

use crate::config::PipelineConfig;

#[derive(Args, Debug)]
pub struct IngestArgs {
    /// File of card ids to fetch, one per line; enables fetch mode.
    #[arg(long)]
    pub fetch_ids: Option<PathBuf>,
    /// Record URL with an `{id}` placeholder.
    #[arg(long)]
    pub url_template: Option<String>,
    /// Requests per second when fetching.
    #[arg(long, default_value_t = 5.0)]
    pub rate_limit: f64,
    /// Where fetched records, images and the assembled corpus go.
    #[arg(long, default_value = "fetched")]
    pub fetch_out: PathBuf,
}

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Emit CSV instead of a text table.
    #[arg(long)]
    pub csv: bool,
}

#[derive(Args, Debug)]
pub struct ClassifyTextArgs {
    #[arg(long, conflicts_with = "text_file", required_unless_present = "text_file")]
    pub text: Option<String>,
    #[arg(long)]
    pub text_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    #[arg(long)]
    pub image: PathBuf,
    /// Also write the JSON result here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print JSON instead of the card rendering.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct FixtureArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 240)]
    pub cards: usize,
    /// Side of the square artwork files.
    #[arg(long, default_value_t = 48)]
    pub size: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn open_corpus(config: &PipelineConfig) -> Result<(Corpus, usize)> {
    let format = CorpusFormat::from_extension(&config.corpus).ok_or_else(|| {
        Error::Config(format!("cannot tell the format of {}; use .csv or .json", config.corpus.display()))
    })?;
    let loaded = load_corpus(&config.corpus, format)?;
    for r in &loaded.rejects {
        log::warn!("rejected row {}: {} ({})", r.row, r.field, r.reason);
    }
    Ok((loaded.corpus, loaded.rejects.len()))
}

fn write_report(config: &PipelineConfig, name: &str, report: &TrainReport) -> Result<()> {
    fs::write(config.artifact(&format!("{name}.report.jsonl")), report.to_jsonl())?;
    Ok(())
}

fn image_artifact(kind: LabelKind) -> String {
    format!("image-{kind}.cnn")
}

fn text_artifact(kind: LabelKind) -> String {
    format!("text-{kind}.cnn")
}

const GENERATOR_ARTIFACT: &str = "generator.rnn";

pub fn ingest(config: &PipelineConfig, args: &IngestArgs) -> Result<()> {
    if let Some(ids_path) = &args.fetch_ids {
        let template = args
            .url_template
            .clone()
            .ok_or_else(|| Error::Config("--url-template is required with --fetch-ids".into()))?;
        let ids: Vec<String> = fs::read_to_string(ids_path)
            .map_err(|e| Error::Load {
                path: ids_path.clone(),
                message: e.to_string(),
            })?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        let report = fetch_card_data(&FetchConfig::new(template, args.rate_limit), &ids, &args.fetch_out)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
        if let Some(cursor) = report.cursor {
            return Err(Error::Fetch(format!(
                "session stopped at id #{cursor} ({}); re-run to resume",
                ids[cursor]
            )));
        }
        let corpus = args.fetch_out.join("corpus.json");
        let n = assemble_records(&args.fetch_out.join("records"), &corpus)?;
        println!("assembled {n} records into {}", corpus.display());
        return Ok(());
    }
    let (corpus, rejected) = open_corpus(config)?;
    fs::create_dir_all(&config.artifacts)?;
    let rejects = config.artifact("rejects.tsv");
    let loaded = load_corpus(&config.corpus, CorpusFormat::from_extension(&config.corpus).unwrap())?;
    fs::write(&rejects, loaded.rejects_report())?;
    fs::write(
        config.artifact("corpus_manifest.json"),
        serde_json::to_vec_pretty(&corpus.source_manifest)?,
    )?;
    println!("cards: {}", corpus.len());
    println!("rejects: {rejected} (see {})", rejects.display());
    Ok(())
}

pub fn stats(config: &PipelineConfig, args: &StatsArgs) -> Result<()> {
    let (corpus, _) = open_corpus(config)?;
    let stats = corpus_stats(&corpus);
    if args.csv {
        print!("{}", stats.to_csv());
    } else {
        print!("{}", stats.render_table());
    }
    Ok(())
}

pub fn build_dataset(config: &PipelineConfig) -> Result<()> {
    let (corpus, _) = open_corpus(config)?;
    for kind in config.label_kinds()? {
        let ds = ImageDatasetConfig {
            label_set: kind,
            height: config.height,
            width: config.width,
            split: SplitSpec::new(config.train_fraction()?, config.seed),
            augment: config.augment.then_some(AugmentConfig {
                crop_margin: config.crop_margin,
                max_displacement: config.max_displacement,
            }),
            augment_ratio: config.augment_ratio,
            records_per_batch: config.records_per_batch,
        };
        let out = config.batches.join(kind.as_str());
        let summary = build_image_dataset(&corpus, &config.images, &ds, &out)?;
        if !summary.missing_images.is_empty() {
            log::warn!("{} cards have no image", summary.missing_images.len());
        }
        println!(
            "{kind}: {} train / {} eval samples ({} augmented, {} cards without image) -> {}",
            summary.train_samples,
            summary.eval_samples,
            summary.augmented,
            summary.missing_images.len(),
            out.display()
        );
    }
    Ok(())
}

pub fn train_image(config: &PipelineConfig) -> Result<()> {
    fs::create_dir_all(&config.artifacts)?;
    for kind in config.label_kinds()? {
        let cnn = CnnConfig {
            height: config.height,
            width: config.width,
            learning_rate: config.image_learning_rate,
            epochs: config.image_epochs,
            batch_size: config.image_batch_size,
            seed: config.seed,
            ..CnnConfig::for_labels(kind)
        };
        let dir = config.batches.join(kind.as_str());
        let (model, report) = train_on_batches::<f32>(&cnn, &dir.join("train"), &dir.join("eval"))?;
        let path = config.artifact(&image_artifact(kind));
        model.save(&path)?;
        write_report(config, &format!("image-{kind}"), &report)?;
        println!(
            "{kind}: loss {:.4}, eval accuracy {} -> {}",
            report.final_loss().unwrap_or(f64::NAN),
            report.final_accuracy.map_or("n/a".into(), |a| format!("{a:.4}")),
            path.display()
        );
    }
    Ok(())
}

pub fn train_text(config: &PipelineConfig) -> Result<()> {
    let (corpus, _) = open_corpus(config)?;
    fs::create_dir_all(&config.artifacts)?;
    let spec = SplitSpec::new(config.train_fraction()?, config.seed);
    for kind in config.label_kinds()? {
        // Split cards first so the vocabulary only sees training text.
        let ids: Vec<(String, u16)> = corpus.cards.iter().map(|c| (c.id.clone(), 0)).collect();
        let (train_ids, _) = split(ids, &spec)?;
        let train_ids: std::collections::HashSet<String> = train_ids.into_iter().map(|(id, _)| id).collect();
        let texts: Vec<String> = corpus
            .cards
            .iter()
            .filter(|c| train_ids.contains(&c.id))
            .map(Card::classifier_text)
            .collect();
        let vocab = build_text_vocab(&texts, config.min_count);
        let tc = TextCnnConfig {
            embedding_dim: config.embedding_dim,
            filters_per_width: config.filters_per_width,
            max_len: config.max_len,
            dropout: config.dropout,
            learning_rate: config.text_learning_rate,
            epochs: config.text_epochs,
            batch_size: config.text_batch_size,
            seed: config.seed,
            ..TextCnnConfig::for_labels(kind, vocab.len())
        };
        let samples = text_samples(&corpus, kind, &vocab, tc.max_len);
        let (train, eval): (Vec<_>, Vec<_>) = samples.into_iter().partition(|s| train_ids.contains(&s.card_id));
        let (model, report) = cardnet::text_classifier::train_text::<f32>(&tc, &vocab, &train, &eval)?;
        let path = config.artifact(&text_artifact(kind));
        model.save(&path)?;
        write_report(config, &format!("text-{kind}"), &report)?;
        println!(
            "{kind}: vocabulary {}, loss {:.4}, eval accuracy {} -> {}",
            vocab.len(),
            report.final_loss().unwrap_or(f64::NAN),
            report.final_accuracy.map_or("n/a".into(), |a| format!("{a:.4}")),
            path.display()
        );
    }
    Ok(())
}

pub fn train_generator(config: &PipelineConfig) -> Result<()> {
    let (corpus, _) = open_corpus(config)?;
    fs::create_dir_all(&config.artifacts)?;
    let gc = CharRnnConfig {
        hidden_size: config.hidden_size,
        layers: config.layers,
        sequence_length: config.sequence_length,
        batch_size: config.generator_batch_size,
        learning_rate: config.generator_learning_rate,
        epochs: config.generator_epochs,
        temperature: config.temperature,
        seed: config.seed,
        ..Default::default()
    };
    let stream = encode_corpus(&corpus);
    let (model, report) = cardnet::text_generator::train_generator::<f32>(&gc, &stream)?;
    let path = config.artifact(GENERATOR_ARTIFACT);
    model.save(&path)?;
    write_report(config, "generator", &report)?;
    println!(
        "{} characters, final loss {:.4} nats/char -> {}",
        stream.chars().count(),
        report.final_loss().unwrap_or(f64::NAN),
        path.display()
    );
    Ok(())
}

pub fn build_bank(config: &PipelineConfig) -> Result<()> {
    let generator = GeneratorModel::load(&config.artifact(GENERATOR_ARTIFACT))?;
    let color = TextModel::load(&config.artifact(&text_artifact(LabelKind::Color)))?;
    let types = TextModel::load(&config.artifact(&text_artifact(LabelKind::Type)))?;
    let bank = build_card_bank(&generator, config.bank_size, config.temperature, config.seed, &color, &types)?;
    if let Some(dir) = config.bank.parent() {
        fs::create_dir_all(dir)?;
    }
    write_bank(&bank, &config.bank)?;
    println!(
        "{} cards ({} malformed, rate {:.4}) -> {}",
        bank.entries.len(),
        bank.manifest.malformed,
        bank.manifest.malformed_rate,
        config.bank.display()
    );
    Ok(())
}

fn classify_with_image_model(config: &PipelineConfig, kind: LabelKind, bytes: &[u8], name: &str) -> Result<Prediction> {
    let model = ImageModel::load(&config.artifact(&image_artifact(kind)))?;
    let (h, w) = (model.config().height, model.config().width);
    let pixels = decode_and_resize(bytes, (h, w), name)?;
    model.predict(&pixels)
}

fn read_input(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::Load {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn classify_image(config: &PipelineConfig, image: &Path) -> Result<()> {
    let bytes = read_input(image)?;
    let name = image.display().to_string();
    let mut out = serde_json::Map::new();
    for kind in config.label_kinds()? {
        let p = classify_with_image_model(config, kind, &bytes, &name)?;
        out.insert(kind.to_string(), serde_json::to_value(&p)?);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

pub fn classify_text(config: &PipelineConfig, args: &ClassifyTextArgs) -> Result<()> {
    let text = match (&args.text, &args.text_file) {
        (Some(t), _) => t.clone(),
        (None, Some(path)) => String::from_utf8_lossy(&read_input(path)?).into_owned(),
        (None, None) => return Err(Error::Input("give --text or --text-file".into())),
    };
    let mut out = serde_json::Map::new();
    for kind in config.label_kinds()? {
        let model = TextModel::load(&config.artifact(&text_artifact(kind)))?;
        out.insert(kind.to_string(), serde_json::to_value(model.predict_text(&text)?)?);
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

pub fn match_image(config: &PipelineConfig, args: &MatchArgs) -> Result<()> {
    let bytes = read_input(&args.image)?;
    let name = args.image.display().to_string();
    let color = classify_with_image_model(config, LabelKind::Color, &bytes, &name)?;
    let types = classify_with_image_model(config, LabelKind::Type, &bytes, &name)?;
    let bank = read_bank(&config.bank)?;
    let mut query = MatchQuery::new(color.scores(), types.scores())?;
    query.weights = MatchWeights {
        color: config.w_color,
        types: config.w_type,
    };
    query.k = config.k;
    let results = match_bank(&query, &bank.entries, config.include_malformed)?;
    let output = MatchOutput {
        query_digest: sha256_hex(&bytes),
        results,
    };
    let json = serde_json::to_string_pretty(&output)?;
    if let Some(path) = &args.output {
        fs::write(path, format!("{json}\n"))?;
    }
    if args.json {
        println!("{json}");
    } else {
        println!("query color: {} ({})", color.argmax_name(), color);
        println!("query type: {} ({})", types.argmax_name(), types);
        println!();
        print!("{}", render_matches(&output, &bank.entries));
    }
    Ok(())
}

pub fn make_fixtures(args: &FixtureArgs) -> Result<()> {
    let images = args.out.join("images");
    fs::create_dir_all(&images)?;
    let rows = synthetic_corpus(args.cards, args.seed);
    write_corpus_csv(&rows, &args.out.join("corpus.csv"))?;
    for (i, raw) in rows.iter().enumerate() {
        let card = Card::from_raw(raw).map_err(|(f, r)| Error::Input(format!("fixture card {}: {f}: {r}", raw.id)))?;
        let img = card_image(&card.label_ids(LabelKind::Color), args.size, args.size, args.seed ^ i as u64);
        img.to_rgb_image()
            .save(images.join(format!("{}.png", card.id)))
            .map_err(|e| Error::Input(e.to_string()))?;
    }
    let query = card_image(&[LabelKind::Color.id_of("Blue").unwrap() as u16], args.size, args.size, args.seed ^ 0x9e37);
    query
        .to_rgb_image()
        .save(args.out.join("query.png"))
        .map_err(|e| Error::Input(e.to_string()))?;
    let config = json!({
        "corpus": "corpus.csv",
        "images": "images",
        "batches": "work/batches",
        "artifacts": "work/artifacts",
        "bank": "work/bank.jsonl",
        "seed": args.seed,
    });
    let toml_text = toml::to_string(&config).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(args.out.join("cardnet.toml"), toml_text)?;
    println!(
        "{} cards, {} images, query.png and cardnet.toml in {} ({} tints)",
        rows.len(),
        rows.len(),
        args.out.display(),
        TINTS.len()
    );
    Ok(())
}
