//! Per-token voting over system predictions.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::weights::CombinerWeights;
use crate::error::{Error, Result};
use crate::learners::ClassPrior;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VotingMethod {
    Majority,
    TotPrecision,
    TagPrecision,
    PrecisionRecall,
    TagPair,
}

impl VotingMethod {
    pub const ALL: [VotingMethod; 5] = [
        VotingMethod::Majority,
        VotingMethod::TotPrecision,
        VotingMethod::TagPrecision,
        VotingMethod::PrecisionRecall,
        VotingMethod::TagPair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VotingMethod::Majority => "majority",
            VotingMethod::TotPrecision => "tot-precision",
            VotingMethod::TagPrecision => "tag-precision",
            VotingMethod::PrecisionRecall => "precision-recall",
            VotingMethod::TagPair => "tag-pair",
        }
    }

    pub fn needs_weights(self) -> bool {
        self != VotingMethod::Majority
    }
}

impl fmt::Display for VotingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VotingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VotingMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown voting method '{s}'")))
    }
}

/// Candidate tags with their scores, in tag order.
///
/// Precision-Recall only scores tags that some system voted for. TagPair
/// also scores gold tags drawn from the pair distributions.
pub fn vote_scores<S: AsRef<str>>(
    row: &[S],
    method: VotingMethod,
    weights: Option<&CombinerWeights>,
) -> Result<Vec<(String, f64)>> {
    if row.is_empty() {
        return Err(Error::Contract("vote over an empty row".into()));
    }
    let w = match (method.needs_weights(), weights) {
        (true, None) => return Err(Error::Config(format!("{method} voting needs weights"))),
        (true, Some(w)) if w.systems.len() != row.len() => {
            return Err(Error::Contract(format!(
                "row has {} predictions, weights cover {} systems",
                row.len(),
                w.systems.len()
            )))
        }
        (_, w) => w,
    };
    let preds: Vec<&str> = row.iter().map(AsRef::as_ref).collect();
    let mut scores: BTreeMap<String, f64> = preds.iter().map(|p| (p.to_string(), 0.0)).collect();
    match method {
        VotingMethod::Majority => {
            for p in &preds {
                *scores.get_mut(*p).expect("seeded") += 1.0;
            }
        }
        VotingMethod::TotPrecision => {
            let w = w.expect("checked");
            for (s, p) in preds.iter().enumerate() {
                *scores.get_mut(*p).expect("seeded") += w.accuracy[s];
            }
        }
        VotingMethod::TagPrecision => {
            let w = w.expect("checked");
            for (s, p) in preds.iter().enumerate() {
                *scores.get_mut(*p).expect("seeded") += w.precision(s, p);
            }
        }
        VotingMethod::PrecisionRecall => {
            let w = w.expect("checked");
            let n = preds.len() as f64;
            for (t, score) in scores.iter_mut() {
                let mut sum = 0.0;
                for (s, p) in preds.iter().enumerate() {
                    sum += if p == t {
                        w.precision(s, p)
                    } else {
                        1.0 - w.recall(s, t)
                    };
                }
                *score = sum / n;
            }
        }
        VotingMethod::TagPair => {
            let w = w.expect("checked");
            if preds.len() == 1 {
                return vote_scores(row, VotingMethod::TagPrecision, Some(w));
            }
            for a in 0..preds.len() {
                for b in a + 1..preds.len() {
                    match w.pair(a, b, preds[a], preds[b]) {
                        Some(dist) => {
                            for (g, p) in dist {
                                *scores.entry(g.clone()).or_insert(0.0) += p;
                            }
                        }
                        None => {
                            *scores.get_mut(preds[a]).expect("seeded") +=
                                w.precision(a, preds[a]) / 2.0;
                            *scores.get_mut(preds[b]).expect("seeded") +=
                                w.precision(b, preds[b]) / 2.0;
                        }
                    }
                }
            }
        }
    }
    Ok(scores.into_iter().collect())
}

/// The winning tag for one row. Unanimous rows pass through unchanged.
pub fn vote<S: AsRef<str>>(
    row: &[S],
    method: VotingMethod,
    weights: Option<&CombinerWeights>,
) -> Result<String> {
    if let Some(first) = row.first() {
        if row.iter().all(|p| p.as_ref() == first.as_ref())
            && (!method.needs_weights() || weights.is_some())
        {
            return Ok(first.as_ref().to_string());
        }
    }
    let scores = vote_scores(row, method, weights)?;
    let fallback = ClassPrior::default();
    let prior = weights.map_or(&fallback, |w| &w.prior);
    Ok(prior
        .pick(scores.iter().map(|(t, s)| (t.as_str(), *s)))
        .expect("non-empty row")
        .to_string())
}
