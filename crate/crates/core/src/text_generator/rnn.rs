use std::fs;
use std::path::Path;
use std::time::Instant;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::CARD_TERMINATOR;
use crate::artifact::{decode_artifact, encode_artifact, fill_params};
use crate::error::{Error, Result};
use crate::nn::{Optimizer, OptimizerKind, Parameters};
use crate::report::{EpochRecord, TrainReport};
use crate::scalar::Scalar;

pub const ARTIFACT_KIND: &str = "char-rnn";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CharRnnConfig {
    pub hidden_size: usize,
    pub layers: usize,
    /// Truncated backpropagation window, in characters.
    pub sequence_length: usize,
    /// Parallel lanes the stream is cut into.
    pub batch_size: usize,
    pub learning_rate: f64,
    pub clip_norm: f64,
    pub init_scale: f64,
    pub epochs: usize,
    pub temperature: f64,
    /// Sampled cards are cut off at this many characters.
    pub max_card_chars: usize,
    pub seed: u64,
}

impl Default for CharRnnConfig {
    fn default() -> Self {
        CharRnnConfig {
            hidden_size: 256,
            layers: 2,
            sequence_length: 200,
            batch_size: 32,
            learning_rate: 2e-3,
            clip_norm: 5.0,
            init_scale: 0.08,
            epochs: 20,
            temperature: 0.8,
            max_card_chars: 2000,
            seed: 0,
        }
    }
}

impl CharRnnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.hidden_size == 0 || self.layers == 0 || self.sequence_length == 0 || self.batch_size == 0 {
            return bad("hidden size, layers, sequence length and batch size must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return bad(format!("temperature must be positive, got {}", self.temperature));
        }
        if self.max_card_chars == 0 {
            return bad("max_card_chars must be positive".into());
        }
        Ok(())
    }
}

/// Gate order in the 4H columns: input, forget, output, candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmLayer<T> {
    /// (inputs, 4H); for the first layer the inputs are one-hot characters.
    pub wx: Array2<T>,
    pub wh: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> LstmLayer<T> {
    fn new<R: Rng>(inputs: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut u = |r, c| Array2::from_shape_fn((r, c), |_| T::lit(rng.random_range(-scale..=scale)));
        let wx = u(inputs, 4 * hidden);
        let wh = u(hidden, 4 * hidden);
        let mut bias = Array1::zeros(4 * hidden);
        bias.slice_mut(s![hidden..2 * hidden]).fill(T::one());
        LstmLayer { wx, wh, bias }
    }

    fn zeros_like(&self) -> Self {
        LstmLayer {
            wx: Array2::zeros(self.wx.raw_dim()),
            wh: Array2::zeros(self.wh.raw_dim()),
            bias: Array1::zeros(self.bias.raw_dim()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharRnnParams<T> {
    pub layers: Vec<LstmLayer<T>>,
    /// (H, alphabet)
    pub wy: Array2<T>,
    pub by: Array1<T>,
}

impl<T: Scalar> Parameters<T> for CharRnnParams<T> {
    fn param_slices(&self) -> Vec<(String, &[T])> {
        let mut v = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            v.push((format!("lstm{i}.wx"), l.wx.as_slice().unwrap()));
            v.push((format!("lstm{i}.wh"), l.wh.as_slice().unwrap()));
            v.push((format!("lstm{i}.bias"), l.bias.as_slice().unwrap()));
        }
        v.push(("output.weight".into(), self.wy.as_slice().unwrap()));
        v.push(("output.bias".into(), self.by.as_slice().unwrap()));
        v
    }

    fn param_slices_mut(&mut self) -> Vec<&mut [T]> {
        let mut v = Vec::new();
        for l in &mut self.layers {
            v.push(l.wx.as_slice_mut().unwrap());
            v.push(l.wh.as_slice_mut().unwrap());
            v.push(l.bias.as_slice_mut().unwrap());
        }
        v.push(self.wy.as_slice_mut().unwrap());
        v.push(self.by.as_slice_mut().unwrap());
        v
    }

    fn zeros_like(&self) -> Self {
        CharRnnParams {
            layers: self.layers.iter().map(LstmLayer::zeros_like).collect(),
            wy: Array2::zeros(self.wy.raw_dim()),
            by: Array1::zeros(self.by.raw_dim()),
        }
    }
}

/// Hidden and cell state per layer, each (lanes, H).
#[derive(Clone, Debug)]
struct State<T> {
    h: Vec<Array2<T>>,
    c: Vec<Array2<T>>,
}

impl<T: Scalar> State<T> {
    fn zeros(layers: usize, lanes: usize, hidden: usize) -> Self {
        State {
            h: vec![Array2::zeros((lanes, hidden)); layers],
            c: vec![Array2::zeros((lanes, hidden)); layers],
        }
    }
}

/// Per-layer activations over a window, rows indexed `t * lanes + lane`.
struct LayerCache<T> {
    gates: Array2<T>,
    h_prev: Array2<T>,
    c_prev: Array2<T>,
    tanh_c: Array2<T>,
    h: Array2<T>,
}

fn sigmoid<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharRnn<T> {
    config: CharRnnConfig,
    alphabet: Vec<char>,
    params: CharRnnParams<T>,
}

impl<T: Scalar> CharRnn<T> {
    /// `alphabet` must be sorted, distinct, and contain the card terminator.
    pub fn new(config: CharRnnConfig, alphabet: Vec<char>) -> Result<Self> {
        config.validate()?;
        if alphabet.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("alphabet must be sorted and distinct".into()));
        }
        if !alphabet.contains(&CARD_TERMINATOR) {
            return Err(Error::Config("alphabet lacks the card terminator".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let h = config.hidden_size;
        let layers = (0..config.layers)
            .map(|i| LstmLayer::new(if i == 0 { alphabet.len() } else { h }, h, config.init_scale, &mut rng))
            .collect();
        let a = config.init_scale;
        let wy = Array2::from_shape_fn((h, alphabet.len()), |_| T::lit(rng.random_range(-a..=a)));
        let by = Array1::zeros(alphabet.len());
        Ok(CharRnn {
            config,
            alphabet,
            params: CharRnnParams { layers, wy, by },
        })
    }

    pub fn config(&self) -> &CharRnnConfig {
        &self.config
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn params(&self) -> &CharRnnParams<T> {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut CharRnnParams<T> {
        &mut self.params
    }

    fn index_of(&self, c: char) -> Option<usize> {
        self.alphabet.binary_search(&c).ok()
    }

    /// Runs one layer over a window. `x_proj` is the input projection plus bias, (L*B, 4H).
    fn run_layer(&self, layer: usize, x_proj: Array2<T>, lanes: usize, state: &mut State<T>) -> LayerCache<T> {
        let hsz = self.config.hidden_size;
        let steps = x_proj.nrows() / lanes;
        let wh = &self.params.layers[layer].wh;
        let mut gates = x_proj;
        let rows = steps * lanes;
        let mut h_prev = Array2::zeros((rows, hsz));
        let mut c_prev = Array2::zeros((rows, hsz));
        let mut tanh_c = Array2::zeros((rows, hsz));
        let mut h_all = Array2::zeros((rows, hsz));
        for t in 0..steps {
            let block = s![t * lanes..(t + 1) * lanes, ..];
            h_prev.slice_mut(block).assign(&state.h[layer]);
            c_prev.slice_mut(block).assign(&state.c[layer]);
            let mut g = gates.slice_mut(block);
            ndarray::linalg::general_mat_mul(T::one(), &state.h[layer], wh, T::one(), &mut g);
            for b in 0..lanes {
                let mut row = g.row_mut(b);
                let row = row.as_slice_mut().unwrap();
                for j in 0..3 * hsz {
                    row[j] = sigmoid(row[j]);
                }
                for j in 3 * hsz..4 * hsz {
                    row[j] = row[j].tanh();
                }
                let c = state.c[layer].row_mut(b).into_slice().unwrap();
                let h = state.h[layer].row_mut(b).into_slice().unwrap();
                let mut tc = tanh_c.row_mut(t * lanes + b);
                let tc = tc.as_slice_mut().unwrap();
                for k in 0..hsz {
                    c[k] = row[hsz + k] * c[k] + row[k] * row[3 * hsz + k];
                    tc[k] = c[k].tanh();
                    h[k] = row[2 * hsz + k] * tc[k];
                }
            }
            h_all.slice_mut(block).assign(&state.h[layer]);
        }
        LayerCache {
            gates,
            h_prev,
            c_prev,
            tanh_c,
            h: h_all,
        }
    }

    fn first_projection(&self, ids: &[usize]) -> Array2<T> {
        let l0 = &self.params.layers[0];
        let mut proj = Array2::zeros((ids.len(), l0.bias.len()));
        for (r, &id) in ids.iter().enumerate() {
            let mut row = proj.row_mut(r);
            row.assign(&l0.wx.row(id));
            row += &l0.bias;
        }
        proj
    }

    fn forward(&self, ids: &[usize], lanes: usize, state: &mut State<T>) -> Vec<LayerCache<T>> {
        let mut caches: Vec<LayerCache<T>> = Vec::with_capacity(self.config.layers);
        for l in 0..self.config.layers {
            let proj = if l == 0 {
                self.first_projection(ids)
            } else {
                let layer = &self.params.layers[l];
                caches[l - 1].h.dot(&layer.wx) + &layer.bias
            };
            caches.push(self.run_layer(l, proj, lanes, state));
        }
        caches
    }

    /// Summed cross-entropy of one window; gradients (of the sum) are added to `grads`.
    fn window_loss_and_grad(
        &self,
        ids: &[usize],
        targets: &[usize],
        lanes: usize,
        state: &mut State<T>,
        grads: &mut CharRnnParams<T>,
    ) -> f64 {
        let hsz = self.config.hidden_size;
        let caches = self.forward(ids, lanes, state);
        let top = &caches.last().unwrap().h;
        let mut dlogits = top.dot(&self.params.wy) + &self.params.by;
        let mut loss = 0.0;
        for (r, &target) in targets.iter().enumerate() {
            let mut row = dlogits.row_mut(r);
            let max = row.iter().fold(T::neg_infinity(), |m, &v| m.max(v));
            row.mapv_inplace(|v| (v - max).exp());
            let sum = row.sum();
            row.mapv_inplace(|v| v / sum);
            loss -= row[target].as_f64().max(f64::MIN_POSITIVE).ln();
            row[target] = row[target] - T::one();
        }
        ndarray::linalg::general_mat_mul(T::one(), &top.t(), &dlogits, T::one(), &mut grads.wy);
        grads.by += &dlogits.sum_axis(Axis(0));
        let mut dh_above = dlogits.dot(&self.params.wy.t());

        let steps = ids.len() / lanes;
        for l in (0..self.config.layers).rev() {
            let cache = &caches[l];
            let layer = &self.params.layers[l];
            let mut dgates = Array2::<T>::zeros(cache.gates.raw_dim());
            let mut dh_next = Array2::<T>::zeros((lanes, hsz));
            let mut dc_next = Array2::<T>::zeros((lanes, hsz));
            for t in (0..steps).rev() {
                for b in 0..lanes {
                    let r = t * lanes + b;
                    let g = cache.gates.row(r);
                    let g = g.as_slice().unwrap();
                    let tc = cache.tanh_c.row(r);
                    let tc = tc.as_slice().unwrap();
                    let cp = cache.c_prev.row(r);
                    let cp = cp.as_slice().unwrap();
                    let dha = dh_above.row(r);
                    let dha = dha.as_slice().unwrap();
                    let mut dg = dgates.row_mut(r);
                    let dg = dg.as_slice_mut().unwrap();
                    let dhn = dh_next.row(b).to_owned();
                    let mut dcn = dc_next.row_mut(b);
                    let dcn = dcn.as_slice_mut().unwrap();
                    for k in 0..hsz {
                        let (i, f, o, cand) = (g[k], g[hsz + k], g[2 * hsz + k], g[3 * hsz + k]);
                        let dh = dha[k] + dhn[k];
                        let dc = dh * o * (T::one() - tc[k] * tc[k]) + dcn[k];
                        dg[k] = dc * cand * i * (T::one() - i);
                        dg[hsz + k] = dc * cp[k] * f * (T::one() - f);
                        dg[2 * hsz + k] = dh * tc[k] * o * (T::one() - o);
                        dg[3 * hsz + k] = dc * i * (T::one() - cand * cand);
                        dcn[k] = dc * f;
                    }
                }
                let block = dgates.slice(s![t * lanes..(t + 1) * lanes, ..]);
                dh_next = block.dot(&layer.wh.t());
            }
            let g = &mut grads.layers[l];
            ndarray::linalg::general_mat_mul(T::one(), &cache.h_prev.t(), &dgates, T::one(), &mut g.wh);
            g.bias += &dgates.sum_axis(Axis(0));
            if l == 0 {
                for (r, &id) in ids.iter().enumerate() {
                    g.wx.row_mut(id).scaled_add(T::one(), &dgates.row(r));
                }
            } else {
                let below: ArrayView2<T> = caches[l - 1].h.view();
                ndarray::linalg::general_mat_mul(T::one(), &below.t(), &dgates, T::one(), &mut g.wx);
                dh_above = dgates.dot(&layer.wx.t());
            }
        }
        loss
    }

    /// Advances a single-lane state by one character and returns the logits.
    fn step(&self, id: usize, state: &mut State<T>) -> Array1<T> {
        let caches = self.forward(&[id], 1, state);
        let top = caches.last().unwrap().h.row(0).to_owned();
        top.dot(&self.params.wy) + &self.params.by
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let alphabet: String = self.alphabet.iter().collect();
        encode_artifact(
            ARTIFACT_KIND,
            serde_json::to_value(&self.config).expect("config serializes"),
            serde_json::json!({ "alphabet": alphabet }),
            &self.params.param_slices(),
        )
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (header, payload) = decode_artifact(bytes)?;
        let config: CharRnnConfig = serde_json::from_value(header.config.clone())?;
        let alphabet = header
            .extra
            .get("alphabet")
            .and_then(|v| v.as_str())
            .ok_or_else(|| Error::Artifact("generator has no alphabet".into()))?
            .chars()
            .collect();
        let mut model = CharRnn::new(config, alphabet)?;
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

fn clip_global_norm<T: Scalar>(grads: &mut CharRnnParams<T>, max_norm: f64) {
    if max_norm <= 0.0 {
        return;
    }
    let norm = grads.sq_norm().as_f64().sqrt();
    if norm > max_norm {
        grads.scale(T::lit(max_norm / norm));
    }
}

/// Trains on `CARD_TERMINATOR + stream`, so every card, including the
/// first, is learned as the continuation of a terminator.
///
/// The stream is cut into `lanes` contiguous pieces that are processed in
/// parallel windows of `sequence_length` characters; state carries across
/// windows within an epoch and resets between epochs.
pub fn train_generator<T: Scalar>(config: &CharRnnConfig, stream: &str) -> Result<(CharRnn<T>, TrainReport)> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::Empty("training stream"));
    }
    let mut text: Vec<char> = vec![CARD_TERMINATOR];
    text.extend(stream.chars());
    let mut alphabet = text.clone();
    alphabet.sort_unstable();
    alphabet.dedup();
    let mut model = CharRnn::<T>::new(config.clone(), alphabet)?;
    let ids: Vec<usize> = text.iter().map(|&c| model.index_of(c).unwrap()).collect();

    let n = ids.len();
    let lanes = config.batch_size.min((n - 1) / config.sequence_length).max(1);
    let lane_len = (n - 1) / lanes;
    let mut optimizer = Optimizer::new(OptimizerKind::adam(), config.learning_rate);
    let mut report = TrainReport {
        epochs: Vec::new(),
        final_accuracy: None,
        config: serde_json::to_value(config)?,
    };
    let h = config.hidden_size;

    for epoch in 1..=config.epochs {
        let started = Instant::now();
        let mut state = State::zeros(config.layers, lanes, h);
        let mut total = 0.0;
        let mut start = 0;
        let mut step = 0;
        while start < lane_len {
            let len = config.sequence_length.min(lane_len - start);
            let mut x = Vec::with_capacity(len * lanes);
            let mut y = Vec::with_capacity(len * lanes);
            for t in 0..len {
                for b in 0..lanes {
                    let pos = b * lane_len + start + t;
                    x.push(ids[pos]);
                    y.push(ids[pos + 1]);
                }
            }
            let mut grads = model.params.zeros_like();
            let loss = model.window_loss_and_grad(&x, &y, lanes, &mut state, &mut grads);
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, step, loss });
            }
            grads.scale(T::lit(1.0 / x.len() as f64));
            clip_global_norm(&mut grads, config.clip_norm);
            optimizer.step(&mut model.params, &grads);
            if !model.params.all_finite() {
                return Err(Error::Divergence {
                    epoch,
                    step,
                    loss: f64::NAN,
                });
            }
            total += loss;
            start += len;
            step += 1;
        }
        let train_loss = total / (lanes * lane_len) as f64;
        log::info!("generator epoch {epoch}: {train_loss:.4} nats/char");
        report.epochs.push(EpochRecord {
            epoch,
            train_loss,
            eval_accuracy: None,
            learning_rate: optimizer.learning_rate,
            wall_time_s: started.elapsed().as_secs_f64(),
        });
    }
    Ok((model, report))
}

/// Samples `count` records, each without its terminator.
///
/// Sampling starts from a zero state primed with the terminator and runs on
/// as one stream. A record reaching `max_card_chars` is cut there and the
/// terminator is fed to resynchronize.
pub fn sample_cards<T: Scalar>(model: &CharRnn<T>, count: usize, temperature: f64, seed: u64) -> Result<Vec<String>> {
    if count == 0 {
        return Err(Error::Input("count must be at least 1".into()));
    }
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Config(format!("temperature must be positive, got {temperature}")));
    }
    let cfg = &model.config;
    let terminator = model.index_of(CARD_TERMINATOR).expect("alphabet holds the terminator");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = State::zeros(cfg.layers, 1, cfg.hidden_size);
    let mut logits = model.step(terminator, &mut state);
    let mut cards = Vec::with_capacity(count);
    let mut current = String::new();
    let mut probs = vec![0.0f64; model.alphabet.len()];
    while cards.len() < count {
        let scaled: Vec<f64> = logits.iter().map(|v| v.as_f64() / temperature).collect();
        let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for (p, s) in probs.iter_mut().zip(&scaled) {
            *p = (s - max).exp();
            sum += *p;
        }
        let mut u = rng.random::<f64>() * sum;
        let mut next = probs.len() - 1;
        for (i, p) in probs.iter().enumerate() {
            if u < *p {
                next = i;
                break;
            }
            u -= p;
        }
        if next == terminator {
            cards.push(std::mem::take(&mut current));
        } else {
            current.push(model.alphabet[next]);
            if current.chars().count() >= cfg.max_card_chars {
                cards.push(std::mem::take(&mut current));
                next = terminator;
            }
        }
        if cards.len() < count {
            logits = model.step(next, &mut state);
        }
    }
    Ok(cards)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CharRnnConfig {
        CharRnnConfig {
            hidden_size: 16,
            layers: 2,
            sequence_length: 8,
            batch_size: 2,
            epochs: 1,
            ..Default::default()
        }
    }

    #[test]
    fn smoke_and_errors() {
        let (model, report) = train_generator::<f32>(&small(), "ab|{1}|x||y\ncd|{2}|z||w\n").unwrap();
        assert!(report.epochs[0].train_loss.is_finite());
        assert!(matches!(train_generator::<f32>(&small(), ""), Err(Error::Empty(_))));
        let one = sample_cards(&model, 1, 0.8, 3).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(sample_cards(&model, 5, 0.8, 3).unwrap(), sample_cards(&model, 5, 0.8, 3).unwrap());
        assert!(sample_cards(&model, 0, 0.8, 3).is_err());
        assert!(sample_cards(&model, 1, 0.0, 3).is_err());
    }

    #[test]
    fn long_cards_are_cut() {
        let config = CharRnnConfig {
            max_card_chars: 5,
            ..small()
        };
        let (model, _) = train_generator::<f32>(&config, "abcdefghijklmnopqrstuvwxyz").unwrap();
        for card in sample_cards(&model, 20, 1.0, 1).unwrap() {
            assert!(card.chars().count() <= 5);
        }
    }

    #[test]
    fn artifact_round_trip() {
        let (model, _) = train_generator::<f64>(&small(), "hello|{1}|there||x\n").unwrap();
        let back = CharRnn::<f64>::from_bytes(&model.to_bytes()).unwrap();
        assert_eq!(model, back);
        assert_eq!(sample_cards(&model, 3, 0.5, 9).unwrap(), sample_cards(&back, 3, 0.5, 9).unwrap());
    }

    /// Central differences on a tiny network, in f64.
    #[test]
    fn gradients_match_finite_differences() {
        let config = CharRnnConfig {
            hidden_size: 3,
            layers: 2,
            init_scale: 0.5,
            ..small()
        };
        let model = CharRnn::<f64>::new(config, vec!['\n', 'a', 'b', 'c']).unwrap();
        let (x, y) = (vec![0, 1, 2, 3, 1, 0], vec![1, 2, 3, 1, 0, 2]);
        let lanes = 2;
        let loss = |m: &CharRnn<f64>| {
            let mut state = State::zeros(2, lanes, 3);
            m.window_loss_and_grad(&x, &y, lanes, &mut state, &mut m.params.zeros_like())
        };
        let mut grads = model.params.zeros_like();
        let mut state = State::zeros(2, lanes, 3);
        model.window_loss_and_grad(&x, &y, lanes, &mut state, &mut grads);
        let analytic: Vec<f64> = grads.param_slices().iter().flat_map(|(_, s)| s.to_vec()).collect();
        let eps = 1e-5;
        let mut k = 0;
        let mut probe = model.clone();
        for slot in 0..probe.params.param_slices().len() {
            let len = probe.params.param_slices()[slot].1.len();
            for i in 0..len {
                let orig = probe.params.param_slices_mut()[slot][i];
                probe.params.param_slices_mut()[slot][i] = orig + eps;
                let up = loss(&probe);
                probe.params.param_slices_mut()[slot][i] = orig - eps;
                let down = loss(&probe);
                probe.params.param_slices_mut()[slot][i] = orig;
                let numeric = (up - down) / (2.0 * eps);
                let a = analytic[k];
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
                assert!(rel < 1e-4, "param {slot}[{i}]: analytic {a} numeric {numeric}");
                k += 1;
            }
        }
    }
}
