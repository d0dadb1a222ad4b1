//! Prediction-vector normalization, label distances and bank search.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::LabelKind;
use crate::prediction::PredictionVector;
use crate::text_generator::BankEntry;

/// Clamps negatives to zero and rescales to unit sum. An all-zero input
/// becomes the uniform vector.
pub fn normalize<T: Num + Copy + PartialOrd>(kind: LabelKind, scores: &[T]) -> Result<PredictionVector<T>> {
    if scores.is_empty() {
        return Err(Error::Empty("label set"));
    }
    let clamped: Vec<T> = scores
        .iter()
        .map(|&s| if s < T::zero() { T::zero() } else { s })
        .collect();
    let sum = clamped.iter().fold(T::zero(), |acc, &s| acc + s);
    let out = if sum == T::zero() {
        let n = clamped.iter().fold(T::zero(), |acc, _| acc + T::one());
        vec![T::one() / n; clamped.len()]
    } else {
        clamped.into_iter().map(|s| s / sum).collect()
    };
    PredictionVector::from_raw(kind, out)
}

/// L1 distance between two vectors over the same label set.
pub fn label_distance<T: Num + Copy + PartialOrd>(a: &PredictionVector<T>, b: &PredictionVector<T>) -> Result<T> {
    if a.kind() != b.kind() {
        return Err(Error::LabelMismatch {
            expected: a.kind().to_string(),
            found: b.kind().to_string(),
        });
    }
    Ok(a.scores().iter().zip(b.scores()).fold(T::zero(), |acc, (&x, &y)| {
        acc + if x > y { x - y } else { y - x }
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchWeights {
    pub color: f64,
    pub types: f64,
}

impl Default for MatchWeights {
    fn default() -> Self {
        MatchWeights { color: 1.0, types: 1.0 }
    }
}

impl MatchWeights {
    pub fn validate(&self) -> Result<()> {
        let ok = |w: f64| w.is_finite() && w >= 0.0;
        if !ok(self.color) || !ok(self.types) || (self.color == 0.0 && self.types == 0.0) {
            return Err(Error::Config(format!(
                "match weights must be non-negative and not both zero, got ({}, {})",
                self.color, self.types
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchQuery {
    pub color_pred: PredictionVector<f64>,
    pub type_pred: PredictionVector<f64>,
    pub weights: MatchWeights,
    pub k: usize,
}

impl MatchQuery {
    /// Normalizes both vectors; weights default to (1, 1) and k to 1.
    pub fn new(color_scores: &[f64], type_scores: &[f64]) -> Result<Self> {
        Ok(MatchQuery {
            color_pred: normalize(LabelKind::Color, color_scores)?,
            type_pred: normalize(LabelKind::Type, type_scores)?,
            weights: MatchWeights::default(),
            k: 1,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub bank_index: usize,
    #[serde(rename = "C_d")]
    pub color_distance: f64,
    #[serde(rename = "T_d")]
    pub type_distance: f64,
    pub score: f64,
    pub raw: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchOutput {
    pub query_digest: String,
    pub results: Vec<MatchResult>,
}

fn check_kinds(query: &MatchQuery) -> Result<()> {
    if query.color_pred.kind() != LabelKind::Color || query.type_pred.kind() != LabelKind::Type {
        return Err(Error::LabelMismatch {
            expected: "color and type vectors".into(),
            found: format!("{} and {}", query.color_pred.kind(), query.type_pred.kind()),
        });
    }
    Ok(())
}

/// The `k` bank entries with the lowest weighted distance, ties going to the
/// lower bank index. Malformed entries are skipped unless `include_malformed`.
pub fn match_bank(query: &MatchQuery, bank: &[BankEntry], include_malformed: bool) -> Result<Vec<MatchResult>> {
    query.weights.validate()?;
    check_kinds(query)?;
    if query.k == 0 {
        return Err(Error::Input("k must be at least 1".into()));
    }
    let mut results = Vec::new();
    for entry in bank.iter().filter(|e| include_malformed || !e.malformed) {
        let c = label_distance(&query.color_pred, &entry.color_pred)?;
        let t = label_distance(&query.type_pred, &entry.type_pred)?;
        results.push(MatchResult {
            bank_index: entry.bank_index,
            color_distance: c,
            type_distance: t,
            score: query.weights.color * c + query.weights.types * t,
            raw: entry.raw.clone(),
        });
    }
    if results.is_empty() {
        return Err(Error::Empty("bank after excluding malformed entries"));
    }
    results.sort_by(|a, b| {
        a.score
            .partial_cmp(&b.score)
            .unwrap_or(Ordering::Equal)
            .then(a.bank_index.cmp(&b.bank_index))
    });
    results.truncate(query.k);
    Ok(results)
}

/// Text rendering of the results, one block per card.
pub fn render_matches(output: &MatchOutput, bank: &[BankEntry]) -> String {
    let mut s = String::new();
    for (rank, r) in output.results.iter().enumerate() {
        let _ = writeln!(
            s,
            "#{} bank_index={} score={:.4} C_d={:.4} T_d={:.4}",
            rank + 1,
            r.bank_index,
            r.score,
            r.color_distance,
            r.type_distance
        );
        if let Some(entry) = bank.iter().find(|e| e.bank_index == r.bank_index) {
            let _ = writeln!(s, "color: {}", entry.color_pred.argmax_name());
            let _ = writeln!(s, "type: {}", entry.type_pred.argmax_name());
            match &entry.decoded {
                Some(card) => s.push_str(&card.render()),
                None => {
                    let _ = writeln!(s, "(malformed) {}", entry.raw);
                }
            }
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn entry(i: usize, c: Vec<f64>, t: Vec<f64>, malformed: bool) -> BankEntry {
        BankEntry {
            bank_index: i,
            raw: format!("card {i}"),
            decoded: None,
            color_pred: normalize(LabelKind::Color, &c).unwrap(),
            type_pred: normalize(LabelKind::Type, &t).unwrap(),
            malformed,
        }
    }

    #[test]
    fn normalize_cases() {
        let v = normalize(LabelKind::Type, &[0.0; 5]).unwrap();
        assert!(v.scores().iter().all(|&s| s == 0.2));
        let once = normalize(LabelKind::Type, &[0.1, 0.2, 0.3, 0.4, 0.0]).unwrap();
        let twice = normalize(LabelKind::Type, once.scores()).unwrap();
        for (&a, &b) in once.scores().iter().zip(twice.scores()) {
            assert!((a - b as f64).abs() < 1e-9);
        }
        assert!(matches!(normalize::<f64>(LabelKind::Type, &[]), Err(Error::Empty(_))));
        assert!(normalize(LabelKind::Type, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn negative_entry_is_clamped() {
        // Creature, Artifact, Enchantment, InstantSorcery, Land in hundredths of a percent.
        let r = |n: i64| Ratio::new(n, 10000);
        let raw = [r(4000), r(3000), r(-536), r(2000), r(1000)];
        let v = normalize(LabelKind::Type, &raw).unwrap();
        assert_eq!(v.get(2), Ratio::from_integer(0));
        assert_eq!(v.get(0), Ratio::new(4, 10));
        assert_eq!(v.sum(), Ratio::from_integer(1));
    }

    #[test]
    fn distance_extremes() {
        let a = normalize(LabelKind::Color, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let b = normalize(LabelKind::Color, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(label_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(label_distance(&a, &b).unwrap(), 2.0);
        let t = normalize(LabelKind::Type, &[1.0; 5]).unwrap();
        assert!(matches!(label_distance(&a.map(|x| x), &t), Err(Error::LabelMismatch { .. })));
    }

    #[test]
    fn identical_entry_wins_with_zero_score() {
        let bank = vec![
            entry(0, vec![1.0, 2.0, 0.0, 0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0, 0.0], false),
            entry(1, vec![0.0, 0.0, 3.0, 1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 0.0, 0.0], false),
        ];
        let q = MatchQuery::new(&[0.0, 0.0, 3.0, 1.0, 0.0, 0.0], &[0.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        let res = match_bank(&q, &bank, false).unwrap();
        assert_eq!(res[0].bank_index, 1);
        assert_eq!(res[0].score, 0.0);
    }

    #[test]
    fn full_k_sorts_and_ties_prefer_low_index() {
        let same = || entry(0, vec![1.0; 6], vec![1.0; 5], false);
        let mut bank: Vec<BankEntry> = (0..4).map(|_| same()).collect();
        for (i, e) in bank.iter_mut().enumerate() {
            e.bank_index = 3 - i;
        }
        let mut q = MatchQuery::new(&[1.0; 6], &[1.0; 5]).unwrap();
        q.k = 4;
        let order: Vec<usize> = match_bank(&q, &bank, false).unwrap().iter().map(|r| r.bank_index).collect();
        assert_eq!(order, vec![0, 1, 2, 3]);
    }

    #[test]
    fn malformed_filtering_and_validation() {
        let bank = vec![entry(0, vec![1.0; 6], vec![1.0; 5], true)];
        let mut q = MatchQuery::new(&[1.0; 6], &[1.0; 5]).unwrap();
        assert!(matches!(match_bank(&q, &bank, false), Err(Error::Empty(_))));
        assert_eq!(match_bank(&q, &bank, true).unwrap().len(), 1);
        q.weights = MatchWeights { color: 0.0, types: 0.0 };
        assert!(matches!(match_bank(&q, &bank, true), Err(Error::Config(_))));
        q.weights = MatchWeights { color: -1.0, types: 1.0 };
        assert!(match_bank(&q, &bank, true).is_err());
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in vec_strategy(6), b in vec_strategy(6), c in vec_strategy(6)) {
            let (a, b, c) = (
                normalize(LabelKind::Color, &a).unwrap(),
                normalize(LabelKind::Color, &b).unwrap(),
                normalize(LabelKind::Color, &c).unwrap(),
            );
            let ab = label_distance(&a, &b).unwrap();
            prop_assert!(ab >= 0.0 && ab <= 2.0 + 1e-12);
            prop_assert_eq!(ab, label_distance(&b, &a).unwrap());
            prop_assert!(ab <= label_distance(&a, &c).unwrap() + label_distance(&c, &b).unwrap() + 1e-12);
        }

        #[test]
        fn scaling_query_keeps_the_match(c in vec_strategy(6), t in vec_strategy(5), s in 0.01f64..100.0) {
            let bank: Vec<BankEntry> = (0..20)
                .map(|i| entry(i, (0..6).map(|j| ((i * 7 + j * 3) % 5) as f64).collect(),
                               (0..5).map(|j| ((i * 3 + j) % 4) as f64).collect(), false))
                .collect();
            let q1 = MatchQuery::new(&c, &t).unwrap();
            let cs: Vec<f64> = c.iter().map(|x| x * s).collect();
            let ts: Vec<f64> = t.iter().map(|x| x * s).collect();
            let q2 = MatchQuery::new(&cs, &ts).unwrap();
            let a = match_bank(&q1, &bank, false).unwrap();
            let b = match_bank(&q2, &bank, false).unwrap();
            let close = (a[0].score - b[0].score).abs() < 1e-9;
            prop_assert!(a[0].bank_index == b[0].bank_index || close);
        }
    }
}
