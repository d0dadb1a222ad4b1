use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{ColorIdentity, Corpus};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatRow {
    pub category: String,
    pub count: usize,
    pub percent: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusStats {
    pub total: usize,
    /// Indexed by `ColorIdentity::bits()`.
    pub color_counts: [usize; 32],
    /// Keyed by `/`-joined main types; `(none)` when a card has no main type.
    pub type_counts: BTreeMap<String, usize>,
    pub multicolored: usize,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut color_counts = [0usize; 32];
    let mut type_counts = BTreeMap::new();
    let mut multicolored = 0;
    for card in &corpus.cards {
        color_counts[card.color_identity.bits() as usize] += 1;
        if card.color_identity.is_multicolored() {
            multicolored += 1;
        }
        let key = if card.main_types.is_empty() {
            "(none)".to_string()
        } else {
            card.main_types.iter().map(|t| t.name()).collect::<Vec<_>>().join("/")
        };
        *type_counts.entry(key).or_insert(0) += 1;
    }
    CorpusStats {
        total: corpus.cards.len(),
        color_counts,
        type_counts,
        multicolored,
    }
}

impl CorpusStats {
    fn percent(&self, count: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * count as f64 / self.total as f64
        }
    }

    pub fn color_count(&self, id: ColorIdentity) -> usize {
        self.color_counts[id.bits() as usize]
    }

    pub fn type_count(&self, combo: &str) -> usize {
        self.type_counts.get(combo).copied().unwrap_or(0)
    }

    pub fn multicolored_percent(&self) -> f64 {
        self.percent(self.multicolored)
    }

    /// Non-empty color identities, most frequent first.
    pub fn color_rows(&self) -> Vec<StatRow> {
        let mut rows: Vec<_> = (0u8..32)
            .map(ColorIdentity::from_bits)
            .filter(|id| self.color_count(*id) > 0)
            .map(|id| (id, self.color_count(id)))
            .collect();
        // Ties: fewer colors first, then WUBRG bit order.
        rows.sort_by_key(|(id, n)| (std::cmp::Reverse(*n), id.len(), id.bits().reverse_bits()));
        rows.into_iter()
            .map(|(id, n)| StatRow {
                category: id.code(),
                count: n,
                percent: self.percent(n),
            })
            .collect()
    }

    pub fn type_rows(&self) -> Vec<StatRow> {
        let mut rows: Vec<_> = self.type_counts.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
        rows.into_iter()
            .map(|(k, &n)| StatRow {
                category: k.clone(),
                count: n,
                percent: self.percent(n),
            })
            .collect()
    }

    /// `category,count,percent` CSV with `color:`, `type:` and `multicolored` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,count,percent\n");
        for r in self.color_rows() {
            let _ = writeln!(out, "color:{},{},{:.2}", r.category, r.count, r.percent);
        }
        for r in self.type_rows() {
            let _ = writeln!(out, "type:{},{},{:.2}", r.category, r.count, r.percent);
        }
        let _ = writeln!(out, "multicolored,{},{:.2}", self.multicolored, self.multicolored_percent());
        let _ = writeln!(out, "total,{},100.00", self.total);
        out
    }

    pub fn render_table(&self) -> String {
        let mut out = format!("cards: {}\n\ncolor identity\n", self.total);
        for r in self.color_rows() {
            let _ = writeln!(out, "  {:<8}{:>8}{:>9.2}%", r.category, r.count, r.percent);
        }
        out.push_str("\ntype\n");
        for r in self.type_rows() {
            let _ = writeln!(out, "  {:<26}{:>8}{:>9.2}%", r.category, r.count, r.percent);
        }
        let _ = writeln!(
            out,
            "\nmulticolored: {} ({:.2}%)",
            self.multicolored,
            self.multicolored_percent()
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card_data::{Card, RawCard};
    use proptest::prelude::*;

    fn card(id: usize, cost: &str, type_line: &str) -> Card {
        Card::from_raw(&RawCard {
            id: id.to_string(),
            name: format!("Card {id}"),
            mana_cost: cost.into(),
            type_line: type_line.into(),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn single_green_card() {
        let stats = corpus_stats(&Corpus::new(vec![card(1, "{G}", "Creature")]));
        let rows = stats.color_rows();
        assert_eq!(rows.len(), 1);
        assert_eq!((rows[0].category.as_str(), rows[0].count), ("G", 1));
        assert_eq!(stats.multicolored_percent(), 0.0);
    }

    #[test]
    fn type_combinations_use_printed_types() {
        let corpus = Corpus::new(vec![
            card(1, "{2}", "Artifact Creature — Golem"),
            card(2, "{U}", "Instant"),
            card(3, "{R}", "Sorcery"),
            card(4, "{W}{U}", "Legendary Planeswalker — Someone"),
            card(5, "", "Land Artifact"),
        ]);
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.type_count("Creature/Artifact"), 1);
        assert_eq!(stats.type_count("Instant"), 1);
        assert_eq!(stats.type_count("Sorcery"), 1);
        assert_eq!(stats.type_count("Planeswalker"), 1);
        assert_eq!(stats.type_count("Land/Artifact"), 1);
        assert_eq!(stats.multicolored, 1);
        let csv = stats.to_csv();
        assert!(csv.starts_with("category,count,percent\n"));
        assert!(csv.contains("multicolored,1,20.00\n"));
    }

    proptest! {
        #[test]
        fn counts_sum_to_corpus_size(costs in proptest::collection::vec(0u8..32, 0..60)) {
            let cards: Vec<Card> = costs
                .iter()
                .enumerate()
                .map(|(i, bits)| {
                    let cost: String = ColorIdentity::from_bits(*bits).colors().map(|c| format!("{{{}}}", c.letter())).collect();
                    card(i, &cost, if i % 3 == 0 { "Creature" } else { "Enchantment Artifact" })
                })
                .collect();
            let n = cards.len();
            let stats = corpus_stats(&Corpus::new(cards));
            prop_assert_eq!(stats.color_counts.iter().sum::<usize>(), n);
            prop_assert_eq!(stats.type_counts.values().sum::<usize>(), n);
            let multi = costs.iter().filter(|b| b.count_ones() >= 2).count();
            prop_assert_eq!(stats.multicolored, multi);
            if n > 0 {
                prop_assert!((stats.multicolored_percent() - 100.0 * multi as f64 / n as f64).abs() < 1e-12);
            }
        }
    }
}
