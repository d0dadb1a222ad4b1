use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub eval_accuracy: Option<f64>,
    pub learning_rate: f64,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    pub final_accuracy: Option<f64>,
    pub config: serde_json::Value,
}

impl TrainReport {
    /// One JSON object per epoch.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.epochs {
            let _ = writeln!(out, "{}", serde_json::to_string(e).expect("record serializes"));
        }
        out
    }

    /// Copy with wall-clock timings zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> TrainReport {
        let mut r = self.clone();
        r.epochs.iter_mut().for_each(|e| e.wall_time_s = 0.0);
        r
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.train_loss)
    }
}
