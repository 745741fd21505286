//! General-to-specific rule refinement.
//!
//! Each focus value starts with a default rule predicting its modal class.
//! While a rule's training accuracy is below the threshold, the contextual
//! premise that raises accuracy the most is added. Chunk-tag slots are
//! preferred over POS slots, and POS slots over word slots, when candidates
//! tie.

use std::collections::{BTreeMap, HashSet};

use super::{ClassPrior, OutputEncoding};
use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureVector};

#[derive(Debug, Clone, PartialEq)]
pub struct RulesConfig {
    /// Training accuracy at which refinement stops.
    pub threshold: f64,
    /// Fewest training items a refined rule may cover.
    pub min_support: usize,
    pub encoding: OutputEncoding,
}

impl Default for RulesConfig {
    fn default() -> Self {
        RulesConfig {
            threshold: 0.95,
            min_support: 2,
            encoding: OutputEncoding::Iob,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub premises: Vec<(usize, String)>,
    pub conclusion: String,
    pub accuracy: f64,
    pub support: usize,
}

impl Rule {
    pub fn matches(&self, vector: &FeatureVector) -> bool {
        self.premises.iter().all(|(s, v)| vector.values[*s] == *v)
    }
}

/// Ordered rules, most specific first, plus a global default.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    pub default: String,
    pub focus_slot: usize,
}

impl RuleSet {
    pub fn predict(&self, vector: &FeatureVector) -> String {
        self.rules
            .iter()
            .find(|r| r.matches(vector))
            .map_or_else(|| self.default.clone(), |r| r.conclusion.clone())
    }
}

/// Accuracy and support of `premises` over the whole dataset.
pub fn evaluate_rule(
    dataset: &Dataset,
    premises: &[(usize, String)],
    conclusion: &str,
) -> (f64, usize) {
    let mut support = 0;
    let mut correct = 0;
    for (v, c) in &dataset.items {
        if premises.iter().all(|(s, val)| v.values[*s] == *val) {
            support += 1;
            if c == conclusion {
                correct += 1;
            }
        }
    }
    let accuracy = if support == 0 {
        0.0
    } else {
        correct as f64 / support as f64
    };
    (accuracy, support)
}

fn focus_slot(dataset: &Dataset) -> usize {
    ["pos[0]", "word[0]"]
        .iter()
        .find_map(|name| dataset.slot_names.iter().position(|s| s == name))
        .unwrap_or(0)
}

/// Chunk level before POS level before word level.
fn slot_level(name: &str) -> usize {
    if name.starts_with("tag") {
        0
    } else if name.starts_with("pos") {
        1
    } else if name.starts_with("word") {
        2
    } else {
        3
    }
}

/// Modal class (tie rule) and its count among `items`.
fn modal<'a>(dataset: &'a Dataset, items: &[usize], prior: &ClassPrior) -> (&'a str, usize) {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for &i in items {
        *counts.entry(dataset.items[i].1.as_str()).or_default() += 1;
    }
    let best = prior
        .pick(counts.iter().map(|(c, &n)| (*c, n as f64)))
        .expect("non-empty item set");
    (best, counts[best])
}

struct Candidate {
    slot: usize,
    value: String,
    accuracy: f64,
    support: usize,
}

/// The best premise to add to a rule covering `items`, if any clears `min_support`.
fn best_premise(
    dataset: &Dataset,
    items: &[usize],
    used: &[usize],
    min_support: usize,
    prior: &ClassPrior,
) -> Option<Candidate> {
    let mut best: Option<Candidate> = None;
    for slot in 0..dataset.arity() {
        if used.contains(&slot) {
            continue;
        }
        let mut parts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for &i in items {
            parts
                .entry(dataset.items[i].0.values[slot].as_str())
                .or_default()
                .push(i);
        }
        for (value, part) in parts {
            if part.len() < min_support {
                continue;
            }
            let (_, hits) = modal(dataset, &part, prior);
            let cand = Candidate {
                slot,
                value: value.to_string(),
                accuracy: hits as f64 / part.len() as f64,
                support: part.len(),
            };
            let better = match &best {
                None => true,
                Some(b) => {
                    let key = |c: &Candidate| (slot_level(&dataset.slot_names[c.slot]), c.slot);
                    cand.accuracy > b.accuracy
                        || (cand.accuracy == b.accuracy
                            && (cand.support > b.support
                                || (cand.support == b.support && key(&cand) < key(b))))
                }
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best
}

pub fn train_rules(dataset: &Dataset, config: &RulesConfig) -> Result<RuleSet> {
    if dataset.is_empty() {
        return Err(Error::Training("empty dataset".into()));
    }
    if !(config.threshold > 0.0 && config.threshold <= 1.0) {
        return Err(Error::Config(format!(
            "threshold must lie in (0, 1], got {}",
            config.threshold
        )));
    }
    let prior = ClassPrior::from_dataset(dataset);
    let focus = focus_slot(dataset);
    let mut by_focus: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, (v, _)) in dataset.items.iter().enumerate() {
        by_focus
            .entry(v.values[focus].as_str())
            .or_default()
            .push(i);
    }

    let mut refined = Vec::new();
    let mut defaults = Vec::new();
    for (value, items) in &by_focus {
        let base = vec![(focus, value.to_string())];
        let min_support = config.min_support.max(1);
        let mut remaining = items.clone();
        while remaining.len() >= min_support {
            let (_, hits) = modal(dataset, &remaining, &prior);
            let mut accuracy = hits as f64 / remaining.len() as f64;
            let mut premises = base.clone();
            let mut used = vec![focus];
            let mut covered = remaining.clone();
            while accuracy < config.threshold {
                let Some(c) = best_premise(dataset, &covered, &used, min_support, &prior) else {
                    break;
                };
                if c.accuracy <= accuracy {
                    break;
                }
                covered.retain(|&i| dataset.items[i].0.values[c.slot] == c.value);
                used.push(c.slot);
                premises.push((c.slot, c.value));
                accuracy = c.accuracy;
            }
            if premises.len() == 1 {
                break;
            }
            let (conclusion, _) = modal(dataset, &covered, &prior);
            let (accuracy, support) = evaluate_rule(dataset, &premises, conclusion);
            refined.push(Rule {
                premises,
                conclusion: conclusion.to_string(),
                accuracy,
                support,
            });
            let covered: HashSet<usize> = covered.into_iter().collect();
            remaining.retain(|i| !covered.contains(i));
        }
        // The focus-level rule catches whatever the refined rules leave over.
        let leftover = if remaining.is_empty() {
            items
        } else {
            &remaining
        };
        let (conclusion, _) = modal(dataset, leftover, &prior);
        let (accuracy, support) = evaluate_rule(dataset, &base, conclusion);
        defaults.push(Rule {
            premises: base,
            conclusion: conclusion.to_string(),
            accuracy,
            support,
        });
    }
    let mut rules = refined;
    rules.extend(defaults);
    // stable: most specific first, discovery order within a specificity level
    rules.sort_by(|a, b| b.premises.len().cmp(&a.premises.len()));
    let default = prior.modal().expect("non-empty dataset").to_string();
    Ok(RuleSet {
        rules,
        default,
        focus_slot: focus,
    })
}

/// Rebuilds per-rule accuracy and support from training data.
pub fn reevaluate_rules(dataset: &Dataset, rules: &RuleSet) -> Vec<(f64, usize)> {
    rules
        .rules
        .iter()
        .map(|r| evaluate_rule(dataset, &r.premises, &r.conclusion))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(names: &[&str], rows: &[(&[&str], &str)]) -> Dataset {
        let mut d = Dataset::new(names.iter().map(|s| s.to_string()).collect());
        for (v, c) in rows {
            d.push(v.iter().copied().collect(), *c).unwrap();
        }
        d
    }

    #[test]
    fn unambiguous_focus_needs_no_refinement() {
        let d = dataset(
            &["pos[-1]", "pos[0]"],
            &[
                (&["VB", "DT"], "B-NP"),
                (&["IN", "DT"], "B-NP"),
                (&["DT", "NN"], "I-NP"),
                (&["JJ", "NN"], "I-NP"),
            ],
        );
        let rs = train_rules(&d, &RulesConfig::default()).unwrap();
        assert_eq!(rs.rules.len(), 2);
        assert!(rs
            .rules
            .iter()
            .all(|r| r.premises.len() == 1 && r.accuracy == 1.0));
    }

    #[test]
    fn left_context_disambiguates() {
        // NN after DT continues a chunk; NN after VB starts one.
        let d = dataset(
            &["word[0]", "pos[-1]", "pos[0]"],
            &[
                (&["dog", "DT", "NN"], "I-NP"),
                (&["cat", "DT", "NN"], "I-NP"),
                (&["man", "DT", "NN"], "I-NP"),
                (&["rain", "VB", "NN"], "B-NP"),
                (&["snow", "VB", "NN"], "B-NP"),
            ],
        );
        let rs = train_rules(&d, &RulesConfig::default()).unwrap();
        let refined: Vec<_> = rs.rules.iter().filter(|r| r.premises.len() > 1).collect();
        assert_eq!(refined.len(), 1);
        assert_eq!(
            refined[0].premises,
            vec![(2, "NN".to_string()), (1, "DT".to_string())]
        );
        assert_eq!(refined[0].accuracy, 1.0);
        let fallback = rs.rules.iter().find(|r| r.premises.len() == 1).unwrap();
        assert_eq!(fallback.conclusion, "B-NP");
        for (v, c) in &d.items {
            assert_eq!(&rs.predict(v), c);
        }
    }

    #[test]
    fn noisy_data_stops_when_nothing_helps() {
        let d = dataset(
            &["pos[-1]", "pos[0]"],
            &[
                (&["A", "X"], "P"),
                (&["A", "X"], "N"),
                (&["B", "X"], "P"),
                (&["B", "X"], "N"),
            ],
        );
        let config = RulesConfig {
            threshold: 1.0,
            ..RulesConfig::default()
        };
        let rs = train_rules(&d, &config).unwrap();
        assert_eq!(rs.rules.len(), 1);
        assert_eq!(rs.rules[0].accuracy, 0.5);
    }

    #[test]
    fn stored_statistics_are_reproducible() {
        let d = dataset(
            &["tag[-1]", "pos[0]"],
            &[
                (&["B-NP", "NN"], "I-NP"),
                (&["B-NP", "NN"], "I-NP"),
                (&["O", "NN"], "B-NP"),
                (&["O", "NN"], "B-NP"),
                (&["O", "NN"], "I-NP"),
                (&["O", "DT"], "B-NP"),
            ],
        );
        let rs = train_rules(&d, &RulesConfig::default()).unwrap();
        let again = reevaluate_rules(&d, &rs);
        for (r, (acc, sup)) in rs.rules.iter().zip(again) {
            assert_eq!((r.accuracy, r.support), (acc, sup));
        }
        for w in rs.rules.windows(2) {
            assert!(w[0].premises.len() >= w[1].premises.len());
        }
    }

    #[test]
    fn threshold_bounds() {
        let d = dataset(&["pos[0]"], &[(&["X"], "P")]);
        for t in [0.0, 1.5] {
            let c = RulesConfig {
                threshold: t,
                ..RulesConfig::default()
            };
            assert!(train_rules(&d, &c).is_err());
        }
    }
}
