use std::collections::BTreeMap;
use std::fmt;

use num_traits::Num;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::LabelKind;

/// Per-label scores over a full label set.
///
/// Produced by `matcher::normalize`, which guarantees non-negative scores
/// summing to one. Serialized as an object keyed by label name.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionVector<T> {
    kind: LabelKind,
    scores: Vec<T>,
}

impl<T: Copy> PredictionVector<T> {
    /// Wraps raw scores without normalizing them; only the length is checked.
    pub fn from_raw(kind: LabelKind, scores: Vec<T>) -> Result<Self> {
        if scores.len() != kind.count() {
            return Err(Error::LabelMismatch {
                expected: format!("{} scores for the {kind} label set", kind.count()),
                found: format!("{} scores", scores.len()),
            });
        }
        Ok(Self { kind, scores })
    }

    pub fn kind(&self) -> LabelKind {
        self.kind
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn get(&self, label_id: usize) -> T {
        self.scores[label_id]
    }

    pub fn map<U: Copy>(&self, f: impl Fn(T) -> U) -> PredictionVector<U> {
        PredictionVector {
            kind: self.kind,
            scores: self.scores.iter().map(|&s| f(s)).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, T)> + '_ {
        self.kind.names().iter().copied().zip(self.scores.iter().copied())
    }
}

impl<T: Copy + PartialOrd> PredictionVector<T> {
    /// Label id of the highest score; the lowest id wins ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, s) in self.scores.iter().enumerate().skip(1) {
            if *s > self.scores[best] {
                best = i;
            }
        }
        best
    }

    pub fn argmax_name(&self) -> &'static str {
        self.kind.names()[self.argmax()]
    }
}

impl<T: Num + Copy + PartialOrd> PredictionVector<T> {
    pub fn sum(&self) -> T {
        self.scores.iter().fold(T::zero(), |acc, &s| acc + s)
    }
}

impl PredictionVector<f64> {
    /// True when all scores are non-negative and the total is within `tol` of one.
    pub fn is_normalized(&self, tol: f64) -> bool {
        self.scores.iter().all(|s| s.is_finite() && *s >= 0.0) && (self.sum() - 1.0).abs() <= tol
    }
}

impl<T: Copy + fmt::Display> fmt::Display for PredictionVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, score)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}: {score}")?;
        }
        Ok(())
    }
}

impl<T: Copy + Serialize> Serialize for PredictionVector<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.scores.len()))?;
        for (name, score) in self.iter() {
            map.serialize_entry(name, &score)?;
        }
        map.end()
    }
}

impl<'de, T: Copy + Deserialize<'de>> Deserialize<'de> for PredictionVector<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let map: BTreeMap<String, T> = BTreeMap::deserialize(deserializer)?;
        for kind in LabelKind::BOTH {
            if map.len() == kind.count() && kind.names().iter().all(|n| map.contains_key(*n)) {
                let scores = kind.names().iter().map(|n| map[*n]).collect();
                return Ok(PredictionVector { kind, scores });
            }
        }
        let keys: Vec<_> = map.keys().cloned().collect();
        Err(de::Error::custom(format!(
            "prediction keys {keys:?} match neither the color nor the type label set"
        )))
    }
}
