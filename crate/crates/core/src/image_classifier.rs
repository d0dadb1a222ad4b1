//! Convolutional classifier for card illustrations.
//!
//! Layer order: CONV → POOL → NORM → CONV → NORM → POOL → FULLY → SOFTMAX,
//! with ReLU after both convolutions and the fully connected layer.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array1, Array2, Array3};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::artifact::{decode_artifact, encode_artifact, fill_params};
use crate::dataset::{read_batches, ImageSample, PixelArray};
use crate::error::{Error, Result};
use crate::labels::LabelKind;
use crate::matcher::normalize;
use crate::nn::{
    max_pool_backward, max_pool_same, relu_backward_inplace, relu_inplace, softmax, softmax_cross_entropy, Conv2d,
    Dense, LocalResponseNorm, MaxPool, Optimizer, OptimizerKind, Parameters,
};
use crate::prediction::PredictionVector;
use crate::report::{EpochRecord, TrainReport};
use crate::scalar::Scalar;

pub const ARTIFACT_KIND: &str = "image-cnn";
pub const LAYER_ORDER: [&str; 8] = ["CONV", "POOL", "NORM", "CONV", "NORM", "POOL", "FULLY", "SOFTMAX"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CnnConfig {
    pub height: usize,
    pub width: usize,
    /// Required for training and for labeled predictions.
    pub label_set: Option<LabelKind>,
    pub label_count: usize,
    pub conv_maps: usize,
    pub conv_kernel: usize,
    pub pool: MaxPool,
    pub norm: LocalResponseNorm,
    pub fc_width: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Learning-rate factor applied when eval accuracy stops improving.
    pub lr_decay: f64,
    pub plateau_epochs: usize,
    pub conv_init_std: f64,
    pub fc_init_std: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for CnnConfig {
    fn default() -> Self {
        CnnConfig {
            height: 32,
            width: 32,
            label_set: Some(LabelKind::Color),
            label_count: 6,
            conv_maps: 64,
            conv_kernel: 5,
            pool: MaxPool { size: 3, stride: 2 },
            norm: LocalResponseNorm::default(),
            fc_width: 192,
            learning_rate: 0.01,
            momentum: 0.9,
            lr_decay: 0.1,
            plateau_epochs: 3,
            conv_init_std: 0.01,
            fc_init_std: 0.1,
            epochs: 30,
            batch_size: 128,
            seed: 0,
        }
    }
}

impl CnnConfig {
    pub fn for_labels(kind: LabelKind) -> Self {
        CnnConfig {
            label_set: Some(kind),
            label_count: kind.count(),
            ..Default::default()
        }
    }

    pub fn flat_len(&self) -> usize {
        let (h, w) = self.pooled_dims();
        self.conv_maps * h * w
    }

    fn pooled_dims(&self) -> (usize, usize) {
        let p = |n: usize| self.pool.output_len(self.pool.output_len(n));
        (p(self.height), p(self.width))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.height == 0 || self.width == 0 {
            return bad("input dimensions must be positive".into());
        }
        if self.label_count < 2 {
            return bad("at least two labels are required".into());
        }
        if let Some(kind) = self.label_set {
            if kind.count() != self.label_count {
                return bad(format!("{kind} label set has {} labels, config says {}", kind.count(), self.label_count));
            }
        }
        if self.conv_kernel % 2 == 0 || self.conv_maps == 0 || self.fc_width == 0 {
            return bad("convolutions need an odd kernel and positive widths".into());
        }
        if self.pool.size == 0 || self.pool.stride == 0 {
            return bad("pooling size and stride must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CnnParams<T> {
    pub conv1: Conv2d<T>,
    pub conv2: Conv2d<T>,
    pub fc: Dense<T>,
    pub out: Dense<T>,
}

impl<T: Scalar> Parameters<T> for CnnParams<T> {
    fn param_slices(&self) -> Vec<(String, &[T])> {
        vec![
            ("conv1.weight".into(), self.conv1.weight.as_slice().unwrap()),
            ("conv1.bias".into(), self.conv1.bias.as_slice().unwrap()),
            ("conv2.weight".into(), self.conv2.weight.as_slice().unwrap()),
            ("conv2.bias".into(), self.conv2.bias.as_slice().unwrap()),
            ("fc.weight".into(), self.fc.weight.as_slice().unwrap()),
            ("fc.bias".into(), self.fc.bias.as_slice().unwrap()),
            ("softmax.weight".into(), self.out.weight.as_slice().unwrap()),
            ("softmax.bias".into(), self.out.bias.as_slice().unwrap()),
        ]
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        vec![
            self.conv1.weight.as_slice_mut().unwrap(),
            self.conv1.bias.as_slice_mut().unwrap(),
            self.conv2.weight.as_slice_mut().unwrap(),
            self.conv2.bias.as_slice_mut().unwrap(),
            self.fc.weight.as_slice_mut().unwrap(),
            self.fc.bias.as_slice_mut().unwrap(),
            self.out.weight.as_slice_mut().unwrap(),
            self.out.bias.as_slice_mut().unwrap(),
        ]
    }

    fn zeros_like(&self) -> Self {
        CnnParams {
            conv1: self.conv1.zeros_like(),
            conv2: self.conv2.zeros_like(),
            fc: self.fc.zeros_like(),
            out: self.out.zeros_like(),
        }
    }
}

struct Activations<T> {
    cols1: Array2<T>,
    relu1: Array3<T>,
    arg1: Vec<usize>,
    pool1: Array3<T>,
    scale1: Array3<T>,
    norm1: Array3<T>,
    cols2: Array2<T>,
    relu2: Array3<T>,
    scale2: Array3<T>,
    norm2: Array3<T>,
    arg2: Vec<usize>,
    flat: Array1<T>,
    hidden: Array1<T>,
    logits: Array1<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImageCnn<T> {
    config: CnnConfig,
    params: CnnParams<T>,
}

impl<T: Scalar> ImageCnn<T> {
    /// Fresh network with zero-mean Gaussian weights drawn from `config.seed`.
    pub fn new(config: CnnConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let params = CnnParams {
            conv1: Conv2d::new(3, config.conv_maps, config.conv_kernel, config.conv_init_std, &mut rng),
            conv2: Conv2d::new(config.conv_maps, config.conv_maps, config.conv_kernel, config.conv_init_std, &mut rng),
            fc: Dense::new(config.flat_len(), config.fc_width, config.fc_init_std, &mut rng),
            out: Dense::new(config.fc_width, config.label_count, config.fc_init_std, &mut rng),
        };
        Ok(ImageCnn { config, params })
    }

    pub fn config(&self) -> &CnnConfig {
        &self.config
    }

    pub fn params(&self) -> &CnnParams<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut CnnParams<T> {
        &mut self.params
    }

    /// Scales 8-bit pixels to [-0.5, 0.5].
    pub fn input_tensor(&self, pixels: &PixelArray) -> Result<Array3<T>> {
        if pixels.dims() != (self.config.height, self.config.width) {
            return Err(Error::Input(format!(
                "image is {:?}, model expects {:?}",
                pixels.dims(),
                (self.config.height, self.config.width)
            )));
        }
        let scale = T::lit(1.0 / 255.0);
        let half = T::lit(0.5);
        let data = pixels.data().iter().map(|&v| T::from_u8(v).unwrap() * scale - half).collect();
        Ok(Array3::from_shape_vec((3, self.config.height, self.config.width), data).unwrap())
    }

    fn forward(&self, x: &Array3<T>) -> Activations<T> {
        let p = &self.params;
        let (mut relu1, cols1) = p.conv1.forward(x.view());
        relu_inplace(relu1.as_slice_mut().unwrap());
        let (pool1, arg1) = max_pool_same(&relu1, self.config.pool);
        let (norm1, scale1) = self.config.norm.forward(&pool1);
        let (mut relu2, cols2) = p.conv2.forward(norm1.view());
        relu_inplace(relu2.as_slice_mut().unwrap());
        let (norm2, scale2) = self.config.norm.forward(&relu2);
        let (pool2, arg2) = max_pool_same(&norm2, self.config.pool);
        let flat = Array1::from(pool2.into_raw_vec_and_offset().0);
        let mut hidden = p.fc.forward(flat.view());
        relu_inplace(hidden.as_slice_mut().unwrap());
        let logits = p.out.forward(hidden.view());
        Activations {
            cols1,
            relu1,
            arg1,
            pool1,
            scale1,
            norm1,
            cols2,
            relu2,
            scale2,
            norm2,
            arg2,
            flat,
            hidden,
            logits,
        }
    }

    pub fn logits(&self, x: &Array3<T>) -> Array1<T> {
        self.forward(x).logits
    }

    pub fn loss(&self, x: &Array3<T>, label: usize) -> T {
        softmax_cross_entropy(self.logits(x).view(), label).0
    }

    /// Cross-entropy loss for one sample; parameter gradients are added to `grads`.
    pub fn loss_and_grad(&self, x: &Array3<T>, label: usize, grads: &mut CnnParams<T>) -> T {
        let p = &self.params;
        let a = self.forward(x);
        let (loss, dlogits) = softmax_cross_entropy(a.logits.view(), label);

        let mut dhidden = p.out.backward(a.hidden.view(), dlogits.view(), &mut grads.out);
        relu_backward_inplace(a.hidden.as_slice().unwrap(), dhidden.as_slice_mut().unwrap());
        let dflat = p.fc.backward(a.flat.view(), dhidden.view(), &mut grads.fc);

        let (ph, pw) = self.config.pooled_dims();
        let dpool2 = dflat.into_shape_with_order((self.config.conv_maps, ph, pw)).unwrap();
        let dnorm2 = max_pool_backward(&dpool2, &a.arg2, a.norm2.dim());
        let mut drelu2 = self.config.norm.backward(&a.relu2, &a.scale2, &dnorm2);
        relu_backward_inplace(a.relu2.as_slice().unwrap(), drelu2.as_slice_mut().unwrap());
        let dnorm1 = p
            .conv2
            .backward(&a.cols2, &drelu2, &mut grads.conv2, Some(a.norm1.dim()))
            .expect("input gradient requested");
        let dpool1 = self.config.norm.backward(&a.pool1, &a.scale1, &dnorm1);
        let mut drelu1 = max_pool_backward(&dpool1, &a.arg1, a.relu1.dim());
        relu_backward_inplace(a.relu1.as_slice().unwrap(), drelu1.as_slice_mut().unwrap());
        p.conv1.backward(&a.cols1, &drelu1, &mut grads.conv1, None);
        loss
    }

    /// Softmax output in the model's scalar type.
    pub fn predict_scores(&self, pixels: &PixelArray) -> Result<Vec<T>> {
        let x = self.input_tensor(pixels)?;
        Ok(softmax(self.logits(&x).view()).to_vec())
    }

    pub fn predict(&self, pixels: &PixelArray) -> Result<PredictionVector<f64>> {
        let kind = self
            .config
            .label_set
            .ok_or_else(|| Error::Config("model has no label set".into()))?;
        let scores: Vec<f64> = self.predict_scores(pixels)?.into_iter().map(Scalar::as_f64).collect();
        normalize(kind, &scores)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        encode_artifact(
            ARTIFACT_KIND,
            serde_json::to_value(&self.config).expect("config serializes"),
            serde_json::Value::Null,
            &self.params.param_slices(),
        )
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (header, payload) = decode_artifact(bytes)?;
        let config: CnnConfig = serde_json::from_value(header.config.clone())?;
        let mut model = ImageCnn::new(config)?;
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

/// Fraction of cards whose predicted label is one of their true labels.
///
/// Each card is scored once, on its smallest sample, no matter how many
/// copies the multilabel expansion produced. Cards missing from `truth` use
/// the labels carried by their samples.
pub fn per_card_accuracy<S>(
    samples: &[S],
    card_of: impl Fn(&S) -> &str,
    label_of: impl Fn(&S) -> u16,
    truth: Option<&HashMap<String, BTreeSet<u16>>>,
    mut predict: impl FnMut(&S) -> Result<usize>,
) -> Result<f64>
where
    S: Ord,
{
    if samples.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let mut by_card: HashMap<&str, (&S, BTreeSet<u16>)> = HashMap::new();
    for s in samples {
        let entry = by_card.entry(card_of(s)).or_insert_with(|| (s, BTreeSet::new()));
        if s < entry.0 {
            entry.0 = s;
        }
        entry.1.insert(label_of(s));
    }
    let mut cards: Vec<_> = by_card.into_iter().collect();
    cards.sort_by(|a, b| a.0.cmp(b.0));
    let mut correct = 0usize;
    for (card, (sample, labels)) in &cards {
        let truth_set = truth.and_then(|t| t.get(*card)).unwrap_or(labels);
        let predicted = predict(sample)? as u16;
        if truth_set.contains(&predicted) {
            correct += 1;
        }
    }
    Ok(correct as f64 / cards.len() as f64)
}

pub fn evaluate<T: Scalar>(
    model: &ImageCnn<T>,
    samples: &[ImageSample],
    truth: Option<&HashMap<String, BTreeSet<u16>>>,
) -> Result<f64> {
    per_card_accuracy(
        samples,
        |s| s.card_id.as_str(),
        |s| s.label_id,
        truth,
        |s| {
            let scores = model.predict_scores(&s.pixels)?;
            Ok(argmax(&scores))
        },
    )
}

pub(crate) fn argmax<T: PartialOrd + Copy>(xs: &[T]) -> usize {
    let mut best = 0;
    for i in 1..xs.len() {
        if xs[i] > xs[best] {
            best = i;
        }
    }
    best
}

fn check_samples(config: &CnnConfig, samples: &[ImageSample], which: &str) -> Result<()> {
    for s in samples {
        if s.pixels.dims() != (config.height, config.width) {
            return Err(Error::Config(format!(
                "{which} sample of card {} is {:?}, config expects {:?}",
                s.card_id,
                s.pixels.dims(),
                (config.height, config.width)
            )));
        }
        if s.label_id as usize >= config.label_count {
            return Err(Error::Config(format!(
                "{which} sample of card {} has label {} but the model has {} labels",
                s.card_id, s.label_id, config.label_count
            )));
        }
    }
    Ok(())
}

/// Learning-rate schedule: decay after `patience` epochs without improvement.
pub(crate) struct Plateau {
    best: f64,
    stale: usize,
    patience: usize,
    factor: f64,
}

impl Plateau {
    pub(crate) fn new(patience: usize, factor: f64) -> Self {
        Plateau {
            best: f64::NEG_INFINITY,
            stale: 0,
            patience,
            factor,
        }
    }

    /// Returns the multiplier to apply to the learning rate.
    pub(crate) fn observe(&mut self, accuracy: f64) -> f64 {
        if accuracy > self.best {
            self.best = accuracy;
            self.stale = 0;
            return 1.0;
        }
        self.stale += 1;
        if self.patience > 0 && self.stale >= self.patience {
            self.stale = 0;
            self.factor
        } else {
            1.0
        }
    }
}

/// Mini-batch SGD with momentum. The result depends only on the config and
/// the multiset of training samples, not on their input order.
pub fn train<T: Scalar>(
    config: &CnnConfig,
    train: &[ImageSample],
    eval: &[ImageSample],
) -> Result<(ImageCnn<T>, TrainReport)> {
    config.validate()?;
    if config.label_set.is_none() {
        return Err(Error::Config("training requires a label set".into()));
    }
    if train.is_empty() {
        return Err(Error::Empty("training set"));
    }
    check_samples(config, train, "training")?;
    check_samples(config, eval, "evaluation")?;

    let mut model = ImageCnn::<T>::new(config.clone())?;
    let mut ordered: Vec<&ImageSample> = train.iter().collect();
    ordered.sort();
    let inputs: Vec<(Array3<T>, usize)> = ordered
        .iter()
        .map(|s| Ok((model.input_tensor(&s.pixels)?, s.label_id as usize)))
        .collect::<Result<_>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut optimizer = Optimizer::new(
        OptimizerKind::Sgd {
            momentum: config.momentum,
        },
        config.learning_rate,
    );
    let mut schedule = Plateau::new(config.plateau_epochs, config.lr_decay);
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
            let mut batch_loss = T::zero();
            for &i in batch {
                let (x, label) = &inputs[i];
                batch_loss = batch_loss + model.loss_and_grad(x, *label, &mut grads);
            }
            let mean = batch_loss.as_f64() / batch.len() as f64;
            if !mean.is_finite() {
                return Err(Error::Divergence { epoch, step, loss: mean });
            }
            grads.scale(T::lit(1.0 / batch.len() as f64));
            optimizer.step(&mut model.params, &grads);
            if !model.params.all_finite() {
                return Err(Error::Divergence {
                    epoch,
                    step,
                    loss: f64::NAN,
                });
            }
            total += mean * batch.len() as f64;
        }
        let eval_accuracy = if eval.is_empty() {
            None
        } else {
            Some(evaluate(&model, eval, None)?)
        };
        report.epochs.push(EpochRecord {
            epoch,
            train_loss: total / inputs.len() as f64,
            eval_accuracy,
            learning_rate: optimizer.learning_rate,
            wall_time_s: started.elapsed().as_secs_f64(),
        });
        log::info!(
            "image epoch {epoch}: loss {:.4} eval {:?}",
            total / inputs.len() as f64,
            eval_accuracy
        );
        if let Some(acc) = eval_accuracy {
            optimizer.learning_rate *= schedule.observe(acc);
        }
    }
    report.final_accuracy = report.epochs.last().and_then(|e| e.eval_accuracy);
    Ok((model, report))
}

/// Reads train/eval batch directories and checks them against the config.
pub fn train_on_batches<T: Scalar>(
    config: &CnnConfig,
    train_dir: &Path,
    eval_dir: &Path,
) -> Result<(ImageCnn<T>, TrainReport)> {
    let (train_manifest, train_samples) = read_batches(train_dir)?;
    let (eval_manifest, eval_samples) = read_batches(eval_dir)?;
    for m in [&train_manifest, &eval_manifest] {
        if (m.height, m.width) != (config.height, config.width) {
            return Err(Error::Config(format!(
                "batches are {}x{}, config expects {}x{}",
                m.height, m.width, config.height, config.width
            )));
        }
        if Some(m.label_set) != config.label_set {
            return Err(Error::LabelMismatch {
                expected: format!("{:?}", config.label_set),
                found: m.label_set.to_string(),
            });
        }
    }
    train(config, &train_samples, &eval_samples)
}
