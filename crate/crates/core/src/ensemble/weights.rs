//! Per-system reliability estimates taken from a tuning table.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::table::PredictionTable;
use crate::error::{Error, Result};
use crate::learners::ClassPrior;

/// Gold-tag distribution keyed by the predicted tag pair of two systems.
pub type PairTable = BTreeMap<(String, String), BTreeMap<String, f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct CombinerWeights {
    pub systems: Vec<String>,
    pub accuracy: Vec<f64>,
    pub tag_precision: Vec<BTreeMap<String, f64>>,
    pub tag_recall: Vec<BTreeMap<String, f64>>,
    /// Keyed by system indices `(i, j)` with `i < j`.
    pub pair_prob: BTreeMap<(usize, usize), PairTable>,
    /// Gold tag frequencies of the tuning data, for tie breaking.
    pub prior: ClassPrior,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl CombinerWeights {
    /// Precision of `system` when it predicts `tag`; 0 when it never did.
    pub fn precision(&self, system: usize, tag: &str) -> f64 {
        self.tag_precision[system].get(tag).copied().unwrap_or(0.0)
    }

    /// Recall of `system` on gold `tag`; 0 when the tag never occurred.
    pub fn recall(&self, system: usize, tag: &str) -> f64 {
        self.tag_recall[system].get(tag).copied().unwrap_or(0.0)
    }

    pub fn pair(&self, a: usize, b: usize, ta: &str, tb: &str) -> Option<&BTreeMap<String, f64>> {
        let (key, tags) = if a < b {
            ((a, b), (ta.to_string(), tb.to_string()))
        } else {
            ((b, a), (tb.to_string(), ta.to_string()))
        };
        self.pair_prob.get(&key)?.get(&tags)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("chunkens-weights 1\n");
        let _ = writeln!(out, "systems {}", self.systems.join(" "));
        for (tag, n) in self.prior.counts() {
            let _ = writeln!(out, "prior {tag} {n}");
        }
        for (s, a) in self.accuracy.iter().enumerate() {
            let _ = writeln!(out, "accuracy {s} {a}");
        }
        for (s, m) in self.tag_precision.iter().enumerate() {
            for (t, v) in m {
                let _ = writeln!(out, "precision {s} {t} {v}");
            }
        }
        for (s, m) in self.tag_recall.iter().enumerate() {
            for (t, v) in m {
                let _ = writeln!(out, "recall {s} {t} {v}");
            }
        }
        for ((a, b), table) in &self.pair_prob {
            for ((ta, tb), dist) in table {
                for (g, p) in dist {
                    let _ = writeln!(out, "pair {a} {b} {ta} {tb} {g} {p}");
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Format { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l.trim() == "chunkens-weights 1" => {}
            _ => return Err(err(1, "missing 'chunkens-weights 1' header".into())),
        }
        let systems: Vec<String> = match lines.next() {
            Some((_, l)) if l.starts_with("systems") => {
                l.split_whitespace().skip(1).map(str::to_string).collect()
            }
            other => {
                return Err(err(
                    other.map_or(2, |(n, _)| n + 1),
                    "expected 'systems' line".into(),
                ))
            }
        };
        let k = systems.len();
        let mut w = CombinerWeights {
            accuracy: vec![0.0; k],
            tag_precision: vec![BTreeMap::new(); k],
            tag_recall: vec![BTreeMap::new(); k],
            pair_prob: BTreeMap::new(),
            prior: ClassPrior::default(),
            systems,
        };
        let mut prior = BTreeMap::new();
        for (n, line) in lines {
            let line_no = n + 1;
            let f: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| err(line_no, format!("bad number '{s}'")))
            };
            let idx = |s: &str| -> Result<usize> {
                match s.parse::<usize>() {
                    Ok(i) if i < k => Ok(i),
                    _ => Err(err(line_no, format!("bad system index '{s}'"))),
                }
            };
            match (f[0], f.len()) {
                ("prior", 3) => {
                    let c = f[2]
                        .parse()
                        .map_err(|_| err(line_no, format!("bad count '{}'", f[2])))?;
                    prior.insert(f[1].to_string(), c);
                }
                ("accuracy", 3) => w.accuracy[idx(f[1])?] = num(f[2])?,
                ("precision", 4) => {
                    w.tag_precision[idx(f[1])?].insert(f[2].to_string(), num(f[3])?);
                }
                ("recall", 4) => {
                    w.tag_recall[idx(f[1])?].insert(f[2].to_string(), num(f[3])?);
                }
                ("pair", 7) => {
                    let (a, b) = (idx(f[1])?, idx(f[2])?);
                    if a >= b {
                        return Err(err(line_no, "pair indices must be increasing".into()));
                    }
                    w.pair_prob
                        .entry((a, b))
                        .or_default()
                        .entry((f[3].to_string(), f[4].to_string()))
                        .or_default()
                        .insert(f[5].to_string(), num(f[6])?);
                }
                _ => return Err(err(line_no, format!("unrecognized line '{line}'"))),
            }
        }
        w.prior = ClassPrior::new(prior);
        Ok(w)
    }
}

pub fn estimate_weights(tuning: &PredictionTable) -> Result<CombinerWeights> {
    if !tuning.has_gold() {
        return Err(Error::Config(
            "weights need a tuning table with gold tags".into(),
        ));
    }
    let k = tuning.system_count();
    let mut correct = vec![0usize; k];
    let mut predicted: Vec<BTreeMap<&str, (usize, usize)>> = vec![BTreeMap::new(); k];
    let mut recalled: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); k];
    let mut gold_counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut pairs: BTreeMap<(usize, usize), BTreeMap<(&str, &str), BTreeMap<&str, usize>>> =
        BTreeMap::new();
    let mut rows = 0usize;
    for r in tuning.rows() {
        let gold = r.gold.as_deref().expect("checked above");
        rows += 1;
        *gold_counts.entry(gold).or_default() += 1;
        for (s, p) in r.preds.iter().enumerate() {
            let hit = p == gold;
            let e = predicted[s].entry(p).or_default();
            e.1 += 1;
            if hit {
                e.0 += 1;
                correct[s] += 1;
                *recalled[s].entry(gold).or_default() += 1;
            }
        }
        for a in 0..k {
            for b in a + 1..k {
                *pairs
                    .entry((a, b))
                    .or_default()
                    .entry((&r.preds[a], &r.preds[b]))
                    .or_default()
                    .entry(gold)
                    .or_default() += 1;
            }
        }
    }
    let tag_precision = predicted
        .iter()
        .map(|m| {
            m.iter()
                .map(|(t, &(c, n))| (t.to_string(), ratio(c, n)))
                .collect()
        })
        .collect();
    let tag_recall = recalled
        .iter()
        .map(|m| {
            gold_counts
                .iter()
                .map(|(t, &n)| (t.to_string(), ratio(m.get(t).copied().unwrap_or(0), n)))
                .collect()
        })
        .collect();
    let pair_prob = pairs
        .into_iter()
        .map(|(key, table)| {
            let table = table
                .into_iter()
                .map(|((ta, tb), dist)| {
                    let total: usize = dist.values().sum();
                    let dist = dist
                        .into_iter()
                        .map(|(g, n)| (g.to_string(), ratio(n, total)))
                        .collect();
                    ((ta.to_string(), tb.to_string()), dist)
                })
                .collect();
            (key, table)
        })
        .collect();
    Ok(CombinerWeights {
        systems: tuning.systems.clone(),
        accuracy: correct.iter().map(|&c| ratio(c, rows)).collect(),
        tag_precision,
        tag_recall,
        pair_prob,
        prior: ClassPrior::new(
            gold_counts
                .into_iter()
                .map(|(t, n)| (t.to_string(), n))
                .collect(),
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::table::parse_table;

    // gold / s0 / s1 / s2
    const TOY: &str = "# gold pos s0 s1 s2\n\
        B NN B B A\n\
        B NN B A A\n\
        A NN A A A\n\
        A NN B A B\n\
        O NN O O A\n\n";

    #[test]
    fn hand_tallied_weights() {
        let t = parse_table(TOY).unwrap();
        let w = estimate_weights(&t).unwrap();
        assert_eq!(w.accuracy, vec![0.8, 0.8, 0.2]);
        // s0 predicted B three times, right twice
        assert!((w.precision(0, "B") - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(w.precision(0, "A"), 1.0);
        assert_eq!(w.precision(1, "A"), 2.0 / 3.0);
        assert_eq!(w.precision(2, "A"), 0.25);
        assert_eq!(w.precision(2, "O"), 0.0);
        assert_eq!(w.recall(0, "A"), 0.5);
        assert_eq!(w.recall(1, "B"), 0.5);
        assert_eq!(w.recall(2, "O"), 0.0);
        assert_eq!(w.recall(2, "A"), 0.5);
        // rows where s0=B and s1=A: gold B once, gold A once
        let d = w.pair(0, 1, "B", "A").unwrap();
        assert_eq!(d.get("B"), Some(&0.5));
        assert_eq!(d.get("A"), Some(&0.5));
        assert_eq!(w.pair(1, 0, "A", "B"), Some(d));
        assert!(w.pair(0, 1, "O", "A").is_none());
        assert_eq!(w.prior.count("A"), 2);
    }

    #[test]
    fn perfect_system() {
        let t = parse_table("# gold pos s\nB NN B\nI NN I\nO VB O\n\n").unwrap();
        let w = estimate_weights(&t).unwrap();
        assert_eq!(w.accuracy[0], 1.0);
        assert!(w.tag_precision[0].values().all(|&p| p == 1.0));
        assert_eq!(w.precision(0, "X"), 0.0);
    }

    #[test]
    fn distributions_sum_to_one_and_rates_bounded() {
        let w = estimate_weights(&parse_table(TOY).unwrap()).unwrap();
        for table in w.pair_prob.values() {
            for dist in table.values() {
                assert!((dist.values().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        let all = w
            .accuracy
            .iter()
            .chain(w.tag_precision.iter().flat_map(|m| m.values()))
            .chain(w.tag_recall.iter().flat_map(|m| m.values()));
        for &v in all {
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn text_round_trip() {
        let w = estimate_weights(&parse_table(TOY).unwrap()).unwrap();
        assert_eq!(CombinerWeights::from_text(&w.to_text()).unwrap(), w);
        assert!(CombinerWeights::from_text("nope").is_err());
        assert!(
            CombinerWeights::from_text("chunkens-weights 1\nsystems a\naccuracy 3 0.5\n").is_err()
        );
    }

    #[test]
    fn needs_gold() {
        let t = parse_table("# pos s\nNN B\n\n").unwrap();
        assert!(matches!(estimate_weights(&t), Err(Error::Config(_))));
    }
}
