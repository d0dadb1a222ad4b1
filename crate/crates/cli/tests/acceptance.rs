//! Acceptance suite. Runs without the libtest harness so its verdicts are
//! always printed: one `PASS`/`FAIL` line per check with the measured value
//! and the pinned tolerance, then a summary line per criterion. Criteria run
//! one after another so the wall-clock budgets are measured without contention.
//!
//! Optional arguments select criteria by name substring, e.g. `-- c08`.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cardnet::card_data::{corpus_stats, load_corpus, Card, ColorIdentity, Corpus, CorpusFormat, RawCard};
use cardnet::dataset::{
    build_text_vocab, decode_batch, encode_text, expand_multilabel, read_batches, split, write_batches,
    BatchManifest, ImageSample, PixelArray, SplitSpec, TextSample, MAGIC,
};
use cardnet::fixtures::{keyword_corpus, synthetic_corpus, tint_dataset};
use cardnet::image_classifier::{train, CnnConfig, ImageCnn};
use cardnet::matcher::{label_distance, match_bank, normalize, MatchQuery, MatchWeights};
use cardnet::nn::{LocalResponseNorm, MaxPool, Parameters};
use cardnet::text_classifier::{train_text, TextCnn, TextCnnConfig};
use cardnet::text_generator::{
    decode_card, encode_card, read_bank, sample_cards, train_generator, BankEntry, CharRnnConfig, DecodedCard,
};
use cardnet::{LabelKind, PredictionVector};
use num_rational::Ratio;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Prints the verdict line and fails the criterion when `ok` is false.
fn verdict(id: u32, name: &str, ok: bool, detail: String) {
    println!("{} criterion {id:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}

fn within(id: u32, name: &str, start: Instant, budget: Duration) {
    let took = start.elapsed();
    verdict(
        id,
        &format!("{name} runtime"),
        took < budget,
        format!("{:.2}s (budget {}s)", took.as_secs_f64(), budget.as_secs()),
    );
}

fn random_pixels(rng: &mut ChaCha8Rng, h: usize, w: usize) -> PixelArray {
    PixelArray::new(h, w, (0..3 * h * w).map(|_| rng.random()).collect()).unwrap()
}

// 1

fn c01_batch_round_trip() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let samples: Vec<ImageSample> = (0..1000)
        .map(|i| ImageSample {
            pixels: random_pixels(&mut rng, 32, 32),
            label_id: rng.random_range(0..6),
            card_id: format!("r{i:04}"),
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let mut manifest = BatchManifest::new(LabelKind::Color, (32, 32), 101);
    manifest.records_per_batch = 300;
    write_batches(&samples, &manifest, dir.path()).unwrap();
    let (back_manifest, back) = read_batches(dir.path()).unwrap();
    verdict(
        1,
        "batch round-trip",
        back == samples && back_manifest.batches.len() == 4,
        format!("{} of 1000 samples bit-exact across {} files", samples.iter().zip(&back).filter(|(a, b)| a == b).count(), back_manifest.batches.len()),
    );

    // One 1x2 record, label 3, planes R=[10,20] G=[30,40] B=[50,60].
    let mut file = MAGIC.to_vec();
    for word in [1u32, 1, 2] {
        file.extend_from_slice(&word.to_le_bytes());
    }
    file.extend_from_slice(&[3, 0, 10, 20, 30, 40, 50, 60]);
    let (dims, records) = decode_batch(&file, "hand").unwrap();
    let (label, px) = &records[0];
    let ok = dims == (1, 2)
        && records.len() == 1
        && *label == 3
        && px.rgb(0, 0) == [10, 30, 50]
        && px.rgb(0, 1) == [20, 40, 60];
    verdict(1, "hand-built record", ok, format!("dims {dims:?}, label {label}, pixels {:?}", px.data()));
    within(1, "batch round-trip", start, Duration::from_secs(5));
}

// 2

fn raw(id: &str, cost: &str, type_line: &str, text: &str) -> RawCard {
    RawCard {
        id: id.into(),
        name: format!("Card {id}"),
        mana_cost: cost.into(),
        type_line: type_line.into(),
        text: text.into(),
        ..Default::default()
    }
}

fn c02_multilabel_expansion() {
    let start = Instant::now();
    // (id, mana cost, rules text, expected color labels)
    let table: [(&str, &str, &str, &[&str]); 20] = [
        ("m01", "{W}", "", &["White"]),
        ("m02", "{1}{U}", "", &["Blue"]),
        ("m03", "{B}{B}", "", &["Black"]),
        ("m04", "{2}{R}", "", &["Red"]),
        ("m05", "{G}", "", &["Green"]),
        ("d01", "{W}{U}", "", &["White", "Blue"]),
        ("d02", "{1}{B}{R}", "", &["Black", "Red"]),
        ("d03", "{G}{W}", "", &["White", "Green"]),
        ("d04", "{U}", "{R}: Tap target creature.", &["Blue", "Red"]),
        ("d05", "{B/G}", "", &["Black", "Green"]),
        ("t01", "{W}{U}{G}", "", &["White", "Blue", "Green"]),
        ("t02", "{U}{B}{R}", "", &["Blue", "Black", "Red"]),
        ("t03", "{R}{G}{W}", "", &["White", "Red", "Green"]),
        ("t04", "{1}{B}", "{G}{W}: Regenerate.", &["White", "Black", "Green"]),
        ("f01", "{W}{U}{B}{R}{G}", "", &["White", "Blue", "Black", "Red", "Green"]),
        ("f02", "{5}", "{W}{U}{B}{R}{G}: Draw a card.", &["White", "Blue", "Black", "Red", "Green"]),
        ("c01", "{3}", "", &["Colorless"]),
        ("c02", "", "{T}: Add {C}.", &["Colorless"]),
        ("c03", "{0}", "", &["Colorless"]),
        ("c04", "{X}{2}", "", &["Colorless"]),
    ];
    let cards: Vec<Card> = table
        .iter()
        .map(|(id, cost, text, _)| Card::from_raw(&raw(id, cost, "Artifact", text)).unwrap())
        .collect();
    let corpus = Corpus::new(cards);
    let got: BTreeSet<(String, u16)> = expand_multilabel(&corpus, LabelKind::Color).into_iter().collect();
    let expected: BTreeSet<(String, u16)> = table
        .iter()
        .flat_map(|(id, _, _, labels)| {
            labels
                .iter()
                .map(move |l| (id.to_string(), LabelKind::Color.id_of(l).unwrap() as u16))
        })
        .collect();
    let total = expand_multilabel(&corpus, LabelKind::Color).len();
    verdict(
        2,
        "multilabel expansion",
        got == expected && total == expected.len(),
        format!("{total} pairs, {} expected, sets equal: {}", expected.len(), got == expected),
    );
    let wug: BTreeSet<&str> = got
        .iter()
        .filter(|(id, _)| id == "t01")
        .map(|(_, l)| LabelKind::Color.name_of(*l as usize).unwrap())
        .collect();
    verdict(
        2,
        "WUG card",
        wug == BTreeSet::from(["White", "Blue", "Green"]),
        format!("labels {wug:?}"),
    );
    within(2, "multilabel expansion", start, Duration::from_secs(1));
}

// 3

fn c03_corpus_statistics() {
    let Some(path) = std::env::var_os("CARDNET_ERA_CORPUS") else {
        println!("SKIP criterion  3 corpus statistics: CARDNET_ERA_CORPUS not set");
        return;
    };
    let path = Path::new(&path);
    let format = CorpusFormat::from_extension(path).expect("corpus must be .csv or .json");
    let stats = corpus_stats(&load_corpus(path, format).unwrap().corpus);
    let g = stats.color_count(ColorIdentity::from_code("G").unwrap());
    let wubrg = stats.color_count(ColorIdentity::from_code("WUBRG").unwrap());
    let creature = stats.type_count("Creature");
    let multi = stats.multicolored_percent();
    verdict(3, "green count", g == 5068, format!("{g} (expected 5068)"));
    verdict(3, "WUBRG count", wubrg == 66, format!("{wubrg} (expected 66)"));
    verdict(3, "creature count", creature == 14081, format!("{creature} (expected 14081)"));
    verdict(
        3,
        "multicolored share",
        format!("{multi:.2}") == "11.94",
        format!("{multi:.4}% (expected 11.94% at two decimals)"),
    );
}

// 4

fn contract_check<F: Fn(usize) -> PredictionVector<f64>>(predict: F) -> (bool, f64) {
    let mut worst = 0.0f64;
    let mut ok = true;
    for i in 0..100 {
        let p = predict(i);
        ok &= p.scores().iter().all(|&s| s >= 0.0);
        worst = worst.max((p.sum() - 1.0).abs());
    }
    (ok && worst <= 1e-6, worst)
}

fn c04_classifier_contracts() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);

    let images = tint_dataset(60, 16, 16, 4);
    let corpus = keyword_corpus(200, 4);
    let texts: Vec<&str> = corpus.iter().map(|(t, _)| t.as_str()).collect();
    let vocab = build_text_vocab(&texts, 1);

    for kind in [LabelKind::Color, LabelKind::Type] {
        let n = kind.count() as u16;
        let samples: Vec<ImageSample> = images
            .iter()
            .map(|s| ImageSample {
                label_id: s.label_id % n,
                ..s.clone()
            })
            .collect();
        let config = CnnConfig {
            height: 16,
            width: 16,
            conv_maps: 8,
            fc_width: 16,
            epochs: 1,
            batch_size: 8,
            seed: 4,
            ..CnnConfig::for_labels(kind)
        };
        let (model, _) = train::<f32>(&config, &samples, &[]).unwrap();
        let probes: Vec<PixelArray> = (0..100).map(|_| random_pixels(&mut rng, 16, 16)).collect();
        let (ok, worst) = contract_check(|i| model.predict(&probes[i]).unwrap());
        verdict(4, &format!("image-{kind} vectors"), ok, format!("non-negative, max |sum-1| = {worst:.2e} (tol 1e-6)"));

        let path = dir.path().join(format!("image-{kind}.cnn"));
        model.save(&path).unwrap();
        let back = ImageCnn::<f32>::load(&path).unwrap();
        let same = probes[..20].iter().all(|p| {
            let a: Vec<u32> = model.predict_scores(p).unwrap().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u32> = back.predict_scores(p).unwrap().iter().map(|v| v.to_bits()).collect();
            a == b
        });
        verdict(4, &format!("image-{kind} save/load"), same, "20 probes compared bitwise".into());

        let config = TextCnnConfig {
            embedding_dim: 16,
            filters_per_width: 8,
            epochs: 1,
            seed: 4,
            ..TextCnnConfig::for_labels(kind, vocab.len())
        };
        let samples: Vec<TextSample> = corpus
            .iter()
            .enumerate()
            .map(|(i, (t, l))| TextSample {
                token_ids: encode_text(t, &vocab, config.max_len),
                label_id: *l % n,
                card_id: format!("k{i}"),
            })
            .collect();
        let (model, _) = train_text::<f32>(&config, &vocab, &samples, &[]).unwrap();
        let probes: Vec<String> = (0..100)
            .map(|_| {
                let len = rng.random_range(0..30);
                (0..len)
                    .map(|_| vocab.tokens().choose(&mut rng).unwrap().as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let (ok, worst) = contract_check(|i| model.predict_text(&probes[i]).unwrap());
        verdict(4, &format!("text-{kind} vectors"), ok, format!("non-negative, max |sum-1| = {worst:.2e} (tol 1e-6)"));

        let path = dir.path().join(format!("text-{kind}.cnn"));
        model.save(&path).unwrap();
        let back = TextCnn::<f32>::load(&path).unwrap();
        let same = probes[..20].iter().all(|p| {
            let ids = model.encode(p);
            let a: Vec<u32> = model.predict_ids(&ids).unwrap().iter().map(|v| v.to_bits()).collect();
            let b: Vec<u32> = back.predict_ids(&ids).unwrap().iter().map(|v| v.to_bits()).collect();
            a == b
        });
        verdict(4, &format!("text-{kind} save/load"), same, "20 probes compared bitwise".into());
    }
    within(4, "classifier contracts", start, Duration::from_secs(30));
}

// 5

/// Largest relative error between analytic and central-difference gradients
/// over `probes` randomly chosen parameters.
fn gradient_check(config: CnnConfig, seed: u64, probes: usize) -> f64 {
    const EPS: f64 = 1e-5;
    // Below this magnitude both gradients are treated as zero-ish and the
    // error is measured against the floor instead.
    const FLOOR: f64 = 1e-7;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = ImageCnn::<f64>::new(config.clone()).unwrap();
    let x = model.input_tensor(&random_pixels(&mut rng, config.height, config.width)).unwrap();
    let label = rng.random_range(0..config.label_count);
    let mut grads = model.params().zeros_like();
    model.loss_and_grad(&x, label, &mut grads);
    let analytic: Vec<f64> = grads.param_slices().iter().flat_map(|(_, s)| s.to_vec()).collect();
    let total = analytic.len();
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let k = rng.random_range(0..total);
        let nudge = |model: &mut ImageCnn<f64>, delta: f64| {
            let mut offset = 0;
            for s in model.params_mut().param_slices_mut() {
                if k < offset + s.len() {
                    s[k - offset] += delta;
                    return;
                }
                offset += s.len();
            }
        };
        nudge(&mut model, EPS);
        let up = model.loss(&x, label);
        nudge(&mut model, -2.0 * EPS);
        let down = model.loss(&x, label);
        nudge(&mut model, EPS);
        let numeric = (up - down) / (2.0 * EPS);
        let a = analytic[k];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(FLOOR);
        worst = worst.max(rel);
    }
    worst
}

fn c05_gradient_check() {
    let start = Instant::now();
    let reduced = CnnConfig {
        height: 4,
        width: 4,
        label_set: None,
        label_count: 2,
        conv_maps: 3,
        conv_kernel: 3,
        pool: MaxPool { size: 3, stride: 2 },
        fc_width: 4,
        conv_init_std: 0.3,
        fc_init_std: 0.3,
        ..CnnConfig::default()
    };
    let worst = gradient_check(reduced.clone(), 5, 100);
    verdict(5, "gradient check", worst <= 1e-3, format!("max relative error {worst:.2e} over 100 probes (tol 1e-3)"));

    // The stock normalization is close to the identity; a strong one
    // exercises its backward pass for real.
    let strong = CnnConfig {
        norm: LocalResponseNorm {
            radius: 1,
            bias: 1.0,
            alpha: 0.5,
            beta: 0.75,
        },
        ..reduced
    };
    let worst = gradient_check(strong, 6, 100);
    verdict(
        5,
        "gradient check, strong normalization",
        worst <= 1e-3,
        format!("max relative error {worst:.2e} over 100 probes (tol 1e-3)"),
    );
    within(5, "gradient check", start, Duration::from_secs(60));
}

// 6

fn c06_image_learning() {
    let start = Instant::now();
    let data = tint_dataset(1200, 32, 32, 6);
    let (train_set, eval_set) = split(data, &SplitSpec::new(Ratio::new(5, 6), 6)).unwrap();
    let config = CnnConfig {
        epochs: 3,
        batch_size: 32,
        seed: 6,
        ..CnnConfig::for_labels(LabelKind::Color)
    };
    let (_, report) = train::<f32>(&config, &train_set, &eval_set).unwrap();
    let acc = report.final_accuracy.unwrap_or(0.0);
    verdict(
        6,
        "image learning",
        acc >= 0.9,
        format!("eval accuracy {acc:.4} on {} images after {} epochs (min 0.9)", eval_set.len(), config.epochs),
    );
    within(6, "image learning", start, Duration::from_secs(600));
}

// 7

fn c07_text_learning() {
    let start = Instant::now();
    let corpus = keyword_corpus(1200, 7);
    let samples: Vec<(String, u16, String)> = corpus
        .into_iter()
        .enumerate()
        .map(|(i, (t, l))| (t, l, format!("k{i:04}")))
        .collect();
    let keyed: Vec<(String, u16)> = samples.iter().map(|(_, _, id)| (id.clone(), 0)).collect();
    let (train_ids, _) = split(keyed, &SplitSpec::new(Ratio::new(5, 6), 7)).unwrap();
    let train_ids: BTreeSet<String> = train_ids.into_iter().map(|(id, _)| id).collect();
    let train_texts: Vec<&str> = samples
        .iter()
        .filter(|(_, _, id)| train_ids.contains(id))
        .map(|(t, _, _)| t.as_str())
        .collect();
    let vocab = build_text_vocab(&train_texts, 1);
    let config = TextCnnConfig {
        seed: 7,
        ..TextCnnConfig::for_labels(LabelKind::Type, vocab.len())
    };
    let (train_set, eval_set): (Vec<TextSample>, Vec<TextSample>) = samples
        .iter()
        .map(|(t, l, id)| TextSample {
            token_ids: encode_text(t, &vocab, config.max_len),
            label_id: *l,
            card_id: id.clone(),
        })
        .partition(|s| train_ids.contains(&s.card_id));
    let (_, report) = train_text::<f32>(&config, &vocab, &train_set, &eval_set).unwrap();
    let acc = report.final_accuracy.unwrap_or(0.0);
    verdict(
        7,
        "text learning",
        acc >= 0.9,
        format!("eval accuracy {acc:.4} on {} texts after {} epochs (min 0.9)", eval_set.len(), config.epochs),
    );
    within(7, "text learning", start, Duration::from_secs(300));
}

// 8

fn c08_generator_memorization() {
    let start = Instant::now();
    let records = [
        "Owl of Dusk|{1}{U}|Creature — Bird|1/1|Flying. When {this card} enters the battlefield, scry 1.",
        "Bolt|{R}|Instant||Deal 3 damage to any target.",
        "Grove Rite|{2}{G}|Sorcery||Search for a basic land.",
    ];
    let stream: String = records.iter().map(|r| format!("{r}\n")).collect();
    let config = CharRnnConfig {
        epochs: 300,
        learning_rate: 1e-2,
        seed: 8,
        ..Default::default()
    };
    let (model, report) = train_generator::<f32>(&config, &stream).unwrap();
    let loss = report.final_loss().unwrap();
    verdict(
        8,
        "generator loss",
        loss < 0.1,
        format!("{loss:.4} nats/char on {} characters after {} epochs (max 0.1)", stream.chars().count(), config.epochs),
    );
    let samples = sample_cards(&model, 5, 0.01, 8).unwrap();
    let verbatim = samples.iter().filter(|s| records.contains(&s.as_str())).count();
    verdict(
        8,
        "near-greedy sampling",
        verbatim > 0,
        format!("{verbatim} of {} samples at temperature 0.01 are corpus records", samples.len()),
    );
    within(8, "generator memorization", start, Duration::from_secs(300));
}

// 9

fn c09_encode_decode_identity() {
    let start = Instant::now();
    let mut raws = synthetic_corpus(496, 9);
    raws.push(raw("e1", "{2}{W/U}", "Instant", "Choose one | or both.\nDraw a card."));
    raws.push(raw("e2", "", "Land", "Backslash \\ and pipe | and slash /."));
    raws.push(RawCard {
        power: "*".into(),
        toughness: "1+*".into(),
        ..raw("e3", "{X}{G}", "Creature — Ooze", "")
    });
    raws.push(raw("e4", "{0}", "Artifact", "{this card} is odd."));
    let mut failures = Vec::new();
    for r in &raws {
        let card = Card::from_raw(r).unwrap();
        let expected = DecodedCard::from_card(&card);
        match decode_card(&encode_card(&card)) {
            Ok(got) if got == expected => {}
            other => failures.push(format!("{}: {other:?}", card.id)),
        }
    }
    verdict(
        9,
        "encode/decode identity",
        failures.is_empty(),
        format!("{} of {} cards recovered; failures: {:?}", raws.len() - failures.len(), raws.len(), failures),
    );
    within(9, "encode/decode identity", start, Duration::from_secs(5));
}

// 10

fn random_vector(rng: &mut ChaCha8Rng, kind: LabelKind) -> PredictionVector<f64> {
    let raw: Vec<f64> = (0..kind.count()).map(|_| rng.random::<f64>()).collect();
    normalize(kind, &raw).unwrap()
}

fn c10_distance_correctness() {
    let start = Instant::now();
    // Percent values in hundredths, same label order in both vectors.
    let image = [2749i64, 973, 2714, 849, 2715, 0];
    let text = [1779i64, 2637, 1634, 1216, 2734, 0];
    let exact = |v: &[i64]| {
        let scores: Vec<Ratio<i64>> = v.iter().map(|&x| Ratio::new(x, 10_000)).collect();
        normalize(LabelKind::Color, &scores).unwrap()
    };
    let d = label_distance(&exact(&image), &exact(&text)).unwrap();
    verdict(10, "worked distance, exact", d == Ratio::new(41, 100), format!("{d} (expected 41/100)"));
    let float = |v: &[i64]| {
        let scores: Vec<f64> = v.iter().map(|&x| x as f64 / 100.0).collect();
        normalize(LabelKind::Color, &scores).unwrap()
    };
    let d = label_distance(&float(&image), &float(&text)).unwrap();
    verdict(10, "worked distance, f64", (d - 0.41).abs() <= 1e-4, format!("{d:.6} (expected 0.4100 +/- 1e-4)"));

    const SLACK: f64 = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut violations = 0;
    for i in 0..10_000 {
        let kind = if i % 2 == 0 { LabelKind::Color } else { LabelKind::Type };
        let (a, b, c) = (random_vector(&mut rng, kind), random_vector(&mut rng, kind), random_vector(&mut rng, kind));
        let ab = label_distance(&a, &b).unwrap();
        let ba = label_distance(&b, &a).unwrap();
        let bc = label_distance(&b, &c).unwrap();
        let ac = label_distance(&a, &c).unwrap();
        let aa = label_distance(&a, &a).unwrap();
        if ab != ba || aa != 0.0 || (a != b && ab <= 0.0) || ac > ab + bc + SLACK {
            violations += 1;
        }
    }
    verdict(
        10,
        "metric properties",
        violations == 0,
        format!("{violations} violations in 10000 triples (triangle slack {SLACK:e})"),
    );
    within(10, "distance correctness", start, Duration::from_secs(10));
}

// 11

fn brute_force(query: &MatchQuery, bank: &[BankEntry]) -> (usize, f64) {
    let l1 = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + (x - y).abs());
    let mut best: Option<(usize, f64)> = None;
    for e in bank {
        let score = query.weights.color * l1(query.color_pred.scores(), e.color_pred.scores())
            + query.weights.types * l1(query.type_pred.scores(), e.type_pred.scores());
        let better = match best {
            None => true,
            Some((i, s)) => score < s || (score == s && e.bank_index < i),
        };
        if better {
            best = Some((e.bank_index, score));
        }
    }
    best.unwrap()
}

fn c11_matcher_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mismatches = Vec::new();
    let mut ties = 0;
    for instance in 0..50 {
        let mut bank: Vec<BankEntry> = (0..1000)
            .map(|i| BankEntry {
                bank_index: i,
                raw: format!("card {i}"),
                decoded: None,
                color_pred: random_vector(&mut rng, LabelKind::Color),
                type_pred: random_vector(&mut rng, LabelKind::Type),
                malformed: false,
            })
            .collect();
        let mut query = MatchQuery::new(
            random_vector(&mut rng, LabelKind::Color).scores(),
            random_vector(&mut rng, LabelKind::Type).scores(),
        )
        .unwrap();
        if instance % 3 != 0 {
            query.weights = MatchWeights {
                color: rng.random_range(0.1..2.0),
                types: rng.random_range(0.1..2.0),
            };
        }
        // Most instances plant exact ties: copies of one entry at several
        // indices, sometimes equal to the query itself.
        if instance % 5 != 4 {
            let source = if instance % 2 == 0 {
                BankEntry {
                    color_pred: query.color_pred.clone(),
                    type_pred: query.type_pred.clone(),
                    ..bank[0].clone()
                }
            } else {
                bank[rng.random_range(0..1000)].clone()
            };
            for _ in 0..3 {
                let at = rng.random_range(0..1000);
                bank[at].color_pred = source.color_pred.clone();
                bank[at].type_pred = source.type_pred.clone();
            }
            ties += 1;
        }
        // Storage order differs from index order.
        bank.shuffle(&mut rng);
        let got = match_bank(&query, &bank, false).unwrap();
        let (index, score) = brute_force(&query, &bank);
        if got.len() != 1 || got[0].bank_index != index || got[0].score != score {
            mismatches.push(format!("instance {instance}: got {:?}, oracle ({index}, {score})", got.first().map(|r| (r.bank_index, r.score))));
        }
    }
    verdict(
        11,
        "matcher oracle",
        mismatches.is_empty(),
        format!("{} of 50 instances agree ({ties} with planted ties); {:?}", 50 - mismatches.len(), mismatches),
    );
    within(11, "matcher oracle", start, Duration::from_secs(30));
}

// 12

fn cardnet(dir: &Path, args: &[&str]) -> (bool, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_cardnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    if !out.status.success() {
        eprintln!("cardnet {args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    }
    (out.status.success(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn c12_end_to_end() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let (ok, _) = cardnet(dir, &["make-fixtures", "--out", ".", "--cards", "120", "--size", "24"]);
    verdict(12, "make-fixtures", ok, "exit status".into());
    let common = [
        "--config", "cardnet.toml", "--height", "16", "--width", "16", "--image-epochs", "1", "--image-batch-size",
        "16", "--text-epochs", "1", "--embedding-dim", "16", "--filters-per-width", "8", "--generator-epochs", "1",
        "--hidden-size", "64", "--layers", "1", "--sequence-length", "50", "--bank-size", "100",
        "--include-malformed",
    ];
    for step in ["build-dataset", "train-image", "train-text", "train-generator", "build-bank"] {
        let args: Vec<&str> = common.iter().copied().chain([step]).collect();
        let (ok, _) = cardnet(dir, &args);
        verdict(12, step, ok, "exit status".into());
    }
    let args: Vec<&str> = common
        .iter()
        .copied()
        .chain(["match", "--image", "query.png", "--output", "match.json"])
        .collect();
    let (ok, stdout) = cardnet(dir, &args);
    verdict(12, "match", ok, "exit status".into());

    let output: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("match.json")).unwrap()).unwrap();
    let index = output["results"][0]["bank_index"].as_u64().unwrap() as usize;
    let bank = read_bank(&dir.join("work/bank.jsonl")).unwrap();
    let entry = bank.entries.iter().find(|e| e.bank_index == index).unwrap();
    let color = format!("color: {}", entry.color_pred.argmax_name());
    let types = format!("type: {}", entry.type_pred.argmax_name());
    let lines: Vec<&str> = stdout.lines().collect();
    let header = format!("#1 bank_index={index} ");
    let at = lines.iter().position(|l| l.starts_with(&header));
    let rendered = at.is_some_and(|i| lines.get(i + 1) == Some(&color.as_str()) && lines.get(i + 2) == Some(&types.as_str()))
        && at.and_then(|i| lines.get(i + 3)).is_some_and(|l| !l.is_empty());
    verdict(
        12,
        "rendered match labels",
        bank.entries.len() == 100 && rendered,
        format!("bank of {}, match #{index} rendered with \"{color}\" and \"{types}\"", bank.entries.len()),
    );
    within(12, "end-to-end", start, Duration::from_secs(600));
}

fn main() -> std::process::ExitCode {
    let criteria: [(&str, fn()); 12] = [
        ("c01_batch_round_trip", c01_batch_round_trip),
        ("c02_multilabel_expansion", c02_multilabel_expansion),
        ("c03_corpus_statistics", c03_corpus_statistics),
        ("c04_classifier_contracts", c04_classifier_contracts),
        ("c05_gradient_check", c05_gradient_check),
        ("c06_image_learning", c06_image_learning),
        ("c07_text_learning", c07_text_learning),
        ("c08_generator_memorization", c08_generator_memorization),
        ("c09_encode_decode_identity", c09_encode_decode_identity),
        ("c10_distance_correctness", c10_distance_correctness),
        ("c11_matcher_oracle", c11_matcher_oracle),
        ("c12_end_to_end", c12_end_to_end),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = Vec::new();
    let (mut ran, mut skipped) = (0, 0);
    for (name, run) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        ran += 1;
        if name == "c03_corpus_statistics" && std::env::var_os("CARDNET_ERA_CORPUS").is_none() {
            run();
            println!("acceptance {name}: skipped");
            skipped += 1;
            continue;
        }
        match std::panic::catch_unwind(run) {
            Ok(()) => println!("acceptance {name}: ok"),
            Err(_) => {
                println!("acceptance {name}: FAILED");
                failed.push(name);
            }
        }
    }
    println!(
        "acceptance: {} of {ran} criteria passed, {skipped} skipped, {} failed",
        ran - skipped - failed.len(),
        failed.len()
    );
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
