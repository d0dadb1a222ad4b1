//! Word-embedding convolutional classifier for card text.
//!
//! Embedding → parallel 1-D convolutions (one per filter width) with ReLU
//! and max-over-time pooling → dropout → dense → softmax.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::time::Instant;

use ndarray::{s, Array1, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::artifact::{decode_artifact, encode_artifact, fill_params};
use crate::card_data::Corpus;
use crate::dataset::{encode_text, expand_multilabel, TextSample, Vocabulary, PAD};
use crate::error::{Error, Result};
use crate::image_classifier::{argmax, per_card_accuracy};
use crate::labels::LabelKind;
use crate::matcher::normalize;
use crate::nn::{softmax, softmax_cross_entropy, Conv1d, Dense, Optimizer, OptimizerKind, Parameters};
use crate::prediction::PredictionVector;
use crate::report::{EpochRecord, TrainReport};
use crate::scalar::Scalar;

pub const ARTIFACT_KIND: &str = "text-cnn";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextCnnConfig {
    pub label_set: Option<LabelKind>,
    pub label_count: usize,
    pub vocab_size: usize,
    pub embedding_dim: usize,
    pub filter_widths: Vec<usize>,
    pub filters_per_width: usize,
    /// Longer texts are truncated; shorter ones are not padded beyond the widest filter.
    pub max_len: usize,
    pub dropout: f64,
    pub learning_rate: f64,
    pub embedding_init: f64,
    pub init_std: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TextCnnConfig {
    fn default() -> Self {
        TextCnnConfig {
            label_set: Some(LabelKind::Color),
            label_count: 6,
            vocab_size: 2,
            embedding_dim: 128,
            filter_widths: vec![3, 4, 5],
            filters_per_width: 100,
            max_len: 128,
            dropout: 0.5,
            learning_rate: 1e-3,
            embedding_init: 0.25,
            init_std: 0.1,
            epochs: 10,
            batch_size: 50,
            seed: 0,
        }
    }
}

impl TextCnnConfig {
    pub fn for_labels(kind: LabelKind, vocab_size: usize) -> Self {
        TextCnnConfig {
            label_set: Some(kind),
            label_count: kind.count(),
            vocab_size,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.label_count < 2 {
            return bad("at least two labels are required".into());
        }
        if let Some(kind) = self.label_set {
            if kind.count() != self.label_count {
                return bad(format!("{kind} label set has {} labels, config says {}", kind.count(), self.label_count));
            }
        }
        if self.vocab_size < 2 || self.embedding_dim == 0 || self.filters_per_width == 0 {
            return bad("vocabulary, embedding and filter sizes must be positive".into());
        }
        if self.filter_widths.is_empty() || self.filter_widths.contains(&0) {
            return bad("filter widths must be a non-empty list of positive integers".into());
        }
        if self.max_len == 0 {
            return bad("max_len must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        Ok(())
    }

    fn min_len(&self) -> usize {
        *self.filter_widths.iter().max().unwrap_or(&1)
    }

    fn features(&self) -> usize {
        self.filter_widths.len() * self.filters_per_width
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TextCnnParams<T> {
    /// (vocab, dim); the PAD row stays zero.
    pub embedding: Array2<T>,
    pub convs: Vec<Conv1d<T>>,
    pub out: Dense<T>,
}

impl<T: Scalar> Parameters<T> for TextCnnParams<T> {
    fn param_slices(&self) -> Vec<(String, &[T])> {
        let mut v = vec![("embedding".to_string(), self.embedding.as_slice().unwrap())];
        for c in &self.convs {
            v.push((format!("conv{}.weight", c.width), c.weight.as_slice().unwrap()));
            v.push((format!("conv{}.bias", c.width), c.bias.as_slice().unwrap()));
        }
        v.push(("softmax.weight".into(), self.out.weight.as_slice().unwrap()));
        v.push(("softmax.bias".into(), self.out.bias.as_slice().unwrap()));
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = vec![self.embedding.as_slice_mut().unwrap()];
        for c in &mut self.convs {
            v.push(c.weight.as_slice_mut().unwrap());
            v.push(c.bias.as_slice_mut().unwrap());
        }
        v.push(self.out.weight.as_slice_mut().unwrap());
        v.push(self.out.bias.as_slice_mut().unwrap());
        v
    }

    fn zeros_like(&self) -> Self {
        TextCnnParams {
            embedding: Array2::zeros(self.embedding.raw_dim()),
            convs: self.convs.iter().map(Conv1d::zeros_like).collect(),
            out: self.out.zeros_like(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TextCnn<T> {
    config: TextCnnConfig,
    vocab: Vocabulary,
    params: TextCnnParams<T>,
}

struct Pooled<T> {
    windows: Vec<Array2<T>>,
    /// Per width, the winning position of each filter.
    positions: Vec<Vec<usize>>,
    features: Array1<T>,
}

impl<T: Scalar> TextCnn<T> {
    pub fn new(config: TextCnnConfig, vocab: Vocabulary) -> Result<Self> {
        config.validate()?;
        if vocab.len() != config.vocab_size {
            return Err(Error::Config(format!(
                "vocabulary has {} tokens, config says {}",
                vocab.len(),
                config.vocab_size
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let a = config.embedding_init;
        let mut embedding = Array2::from_shape_fn((config.vocab_size, config.embedding_dim), |_| {
            T::lit(rng.random_range(-a..=a))
        });
        embedding.row_mut(PAD as usize).fill(T::zero());
        let convs = config
            .filter_widths
            .iter()
            .map(|&w| Conv1d::new(config.embedding_dim, w, config.filters_per_width, config.init_std, &mut rng))
            .collect();
        let out = Dense::new(config.features(), config.label_count, config.init_std, &mut rng);
        Ok(TextCnn {
            config,
            vocab,
            params: TextCnnParams { embedding, convs, out },
        })
    }

    pub fn config(&self) -> &TextCnnConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn params(&self) -> &TextCnnParams<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut TextCnnParams<T> {
        &mut self.params
    }

    /// Truncates to `max_len`, drops trailing padding, then pads up to the widest filter.
    fn sequence(&self, ids: &[u32]) -> Vec<u32> {
        let mut seq: Vec<u32> = ids.iter().copied().take(self.config.max_len).collect();
        while seq.last() == Some(&PAD) {
            seq.pop();
        }
        if seq.len() < self.config.min_len() {
            seq.resize(self.config.min_len(), PAD);
        }
        seq
    }

    fn embed(&self, seq: &[u32]) -> Array2<T> {
        let mut e = Array2::zeros((seq.len(), self.config.embedding_dim));
        for (t, &id) in seq.iter().enumerate() {
            e.row_mut(t).assign(&self.params.embedding.row(id as usize));
        }
        e
    }

    fn pool(&self, emb: &Array2<T>) -> Pooled<T> {
        let f = self.config.filters_per_width;
        let mut features = Array1::zeros(self.config.features());
        let mut windows = Vec::new();
        let mut positions = Vec::new();
        for (k, conv) in self.params.convs.iter().enumerate() {
            let (z, win) = conv.forward(emb.view());
            let mut pos = vec![0usize; f];
            for j in 0..f {
                let col = z.column(j);
                let mut best = 0;
                for t in 1..col.len() {
                    if col[t] > col[best] {
                        best = t;
                    }
                }
                pos[j] = best;
                features[k * f + j] = col[best].max(T::zero());
            }
            windows.push(win);
            positions.push(pos);
        }
        Pooled {
            windows,
            positions,
            features,
        }
    }

    fn check_ids(&self, ids: &[u32]) -> Result<()> {
        match ids.iter().find(|&&id| id as usize >= self.config.vocab_size) {
            Some(id) => Err(Error::Config(format!(
                "token id {id} outside vocabulary of {}",
                self.config.vocab_size
            ))),
            None => Ok(()),
        }
    }

    pub fn logits(&self, ids: &[u32]) -> Result<Array1<T>> {
        self.check_ids(ids)?;
        let seq = self.sequence(ids);
        let pooled = self.pool(&self.embed(&seq));
        Ok(self.params.out.forward(pooled.features.view()))
    }

    /// Loss with an explicit dropout mask (already scaled); gradients are added to `grads`.
    pub fn loss_and_grad(&self, ids: &[u32], label: usize, mask: Option<&[T]>, grads: &mut TextCnnParams<T>) -> T {
        let seq = self.sequence(ids);
        let emb = self.embed(&seq);
        let pooled = self.pool(&emb);
        let mut h = pooled.features.clone();
        if let Some(m) = mask {
            h.iter_mut().zip(m).for_each(|(v, &s)| *v = *v * s);
        }
        let logits = self.params.out.forward(h.view());
        let (loss, dlogits) = softmax_cross_entropy(logits.view(), label);
        let mut dh = self.params.out.backward(h.view(), dlogits.view(), &mut grads.out);
        if let Some(m) = mask {
            dh.iter_mut().zip(m).for_each(|(v, &s)| *v = *v * s);
        }

        let f = self.config.filters_per_width;
        let dim = self.config.embedding_dim;
        let mut demb = Array2::<T>::zeros(emb.raw_dim());
        for (k, conv) in self.params.convs.iter().enumerate() {
            let g = &mut grads.convs[k];
            for j in 0..f {
                let d = dh[k * f + j];
                if pooled.features[k * f + j] <= T::zero() || d == T::zero() {
                    continue;
                }
                let p = pooled.positions[k][j];
                g.weight.row_mut(j).scaled_add(d, &pooled.windows[k].row(p));
                g.bias[j] = g.bias[j] + d;
                let wrow = conv.weight.row(j);
                for o in 0..conv.width {
                    demb.row_mut(p + o).scaled_add(d, &wrow.slice(s![o * dim..(o + 1) * dim]));
                }
            }
        }
        for (t, &id) in seq.iter().enumerate() {
            if id != PAD {
                grads.embedding.row_mut(id as usize).scaled_add(T::one(), &demb.row(t));
            }
        }
        loss
    }

    pub fn predict_ids(&self, ids: &[u32]) -> Result<Vec<T>> {
        Ok(softmax(self.logits(ids)?.view()).to_vec())
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        encode_text(text, &self.vocab, self.config.max_len)
    }

    /// Classifies raw text; out-of-vocabulary words map to UNK.
    pub fn predict_text(&self, text: &str) -> Result<PredictionVector<f64>> {
        let kind = self
            .config
            .label_set
            .ok_or_else(|| Error::Config("model has no label set".into()))?;
        let scores: Vec<f64> = self
            .predict_ids(&self.encode(text))?
            .into_iter()
            .map(Scalar::as_f64)
            .collect();
        normalize(kind, &scores)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        encode_artifact(
            ARTIFACT_KIND,
            serde_json::to_value(&self.config).expect("config serializes"),
            serde_json::json!({ "vocab": self.vocab.tokens() }),
            &self.params.param_slices(),
        )
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (header, payload) = decode_artifact(bytes)?;
        let config: TextCnnConfig = serde_json::from_value(header.config.clone())?;
        let tokens: Vec<String> = serde_json::from_value(
            header
                .extra
                .get("vocab")
                .cloned()
                .ok_or_else(|| Error::Artifact("text model has no vocabulary".into()))?,
        )?;
        let mut model = TextCnn::new(config, Vocabulary::from_tokens(tokens)?)?;
        fill_params(&header, payload, ARTIFACT_KIND, &mut model.params)?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path).map_err(|e| Error::load(path, e.to_string()))?)
    }
}

/// One sample per (card, label) pair, over the card's classifier text.
pub fn text_samples(corpus: &Corpus, kind: LabelKind, vocab: &Vocabulary, max_len: usize) -> Vec<TextSample> {
    let by_id: HashMap<&str, String> = corpus
        .cards
        .iter()
        .map(|c| (c.id.as_str(), c.classifier_text()))
        .collect();
    expand_multilabel(corpus, kind)
        .into_iter()
        .map(|(card_id, label_id)| TextSample {
            token_ids: encode_text(&by_id[card_id.as_str()], vocab, max_len),
            label_id,
            card_id,
        })
        .collect()
}

pub fn evaluate_text<T: Scalar>(
    model: &TextCnn<T>,
    samples: &[TextSample],
    truth: Option<&HashMap<String, BTreeSet<u16>>>,
) -> Result<f64> {
    per_card_accuracy(
        samples,
        |s| s.card_id.as_str(),
        |s| s.label_id,
        truth,
        |s| Ok(argmax(&model.predict_ids(&s.token_ids)?)),
    )
}

/// Adam over mini-batches with inverted dropout on the pooled features.
pub fn train_text<T: Scalar>(
    config: &TextCnnConfig,
    vocab: &Vocabulary,
    train: &[TextSample],
    eval: &[TextSample],
) -> Result<(TextCnn<T>, TrainReport)> {
    if config.label_set.is_none() {
        return Err(Error::Config("training requires a label set".into()));
    }
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let mut model = TextCnn::<T>::new(config.clone(), vocab.clone())?;
    for s in train.iter().chain(eval) {
        model.check_ids(&s.token_ids)?;
        if s.label_id as usize >= config.label_count {
            return Err(Error::Config(format!(
                "sample of card {} has label {} but the model has {} labels",
                s.card_id, s.label_id, config.label_count
            )));
        }
    }
    let mut ordered: Vec<&TextSample> = train.iter().collect();
    ordered.sort();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..ordered.len()).collect();
    let mut optimizer = Optimizer::new(OptimizerKind::adam(), config.learning_rate);
    let keep = 1.0 - config.dropout;
    let inv_keep = T::lit(1.0 / keep);
    let mut mask = vec![T::zero(); config.features()];
    let mut report = TrainReport {
        epochs: Vec::new(),
        final_accuracy: None,
        config: serde_json::to_value(config)?,
    };

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for (step, batch) in order.chunks(config.batch_size).enumerate() {
            let mut grads = model.params.zeros_like();
            let mut batch_loss = 0.0;
            for &i in batch {
                let s = ordered[i];
                for m in mask.iter_mut() {
                    *m = if rng.random::<f64>() < keep { inv_keep } else { T::zero() };
                }
                let m = (config.dropout > 0.0).then_some(mask.as_slice());
                batch_loss += model.loss_and_grad(&s.token_ids, s.label_id as usize, m, &mut grads).as_f64();
            }
            let mean = batch_loss / batch.len() as f64;
            if !mean.is_finite() {
                return Err(Error::Divergence { epoch, step, loss: mean });
            }
            grads.scale(T::lit(1.0 / batch.len() as f64));
            optimizer.step(&mut model.params, &grads);
            model.params.embedding.row_mut(PAD as usize).fill(T::zero());
            total += batch_loss;
        }
        let eval_accuracy = if eval.is_empty() {
            None
        } else {
            Some(evaluate_text(&model, eval, None)?)
        };
        let train_loss = total / ordered.len() as f64;
        log::info!("text epoch {epoch}: loss {train_loss:.4} eval {eval_accuracy:?}");
        report.epochs.push(EpochRecord {
            epoch,
            train_loss,
            eval_accuracy,
            learning_rate: optimizer.learning_rate,
            wall_time_s: started.elapsed().as_secs_f64(),
        });
    }
    report.final_accuracy = report.epochs.last().and_then(|e| e.eval_accuracy);
    Ok((model, report))
}
