//! The ten combination methods behind one interface.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::brackets::{combine_brackets, estimate_bracket_weights, table_spans, BracketWeights};
use super::stacked::{stacked_train, StackedLearner, StackedModel};
use super::table::{PredictionTable, NO_WORD};
use super::voting::{vote, VotingMethod};
use super::weights::{estimate_weights, CombinerWeights};
use crate::corpus::{encode_chunks, extract_chunks, ChunkSpan, Corpus, Sentence, TagScheme, Token};
use crate::error::{Error, Result};
use crate::metrics::score_chunks;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombinationMethod {
    Vote(VotingMethod),
    Stacked {
        learner: StackedLearner,
        add_pos: bool,
    },
    /// Majority voting over the best `n` systems on the tuning data.
    BestN(usize),
}

impl CombinationMethod {
    /// Every method; best-N is listed with the given `n`.
    pub fn all(n: usize) -> Vec<CombinationMethod> {
        let mut v: Vec<_> = VotingMethod::ALL
            .into_iter()
            .map(CombinationMethod::Vote)
            .collect();
        for learner in [StackedLearner::default(), StackedLearner::IGTree] {
            for add_pos in [false, true] {
                v.push(CombinationMethod::Stacked { learner, add_pos });
            }
        }
        v.push(CombinationMethod::BestN(n));
        v
    }

    pub fn needs_tuning(self) -> bool {
        !matches!(self, CombinationMethod::Vote(VotingMethod::Majority))
    }
}

impl fmt::Display for CombinationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CombinationMethod::Vote(m) => write!(f, "{m}"),
            CombinationMethod::Stacked { learner, add_pos } => {
                write!(f, "stacked-{learner}{}", if *add_pos { "-pos" } else { "" })
            }
            CombinationMethod::BestN(n) => write!(f, "best-{n}"),
        }
    }
}

impl FromStr for CombinationMethod {
    type Err = Error;

    /// Accepts the voting method names, `stacked-knn`, `stacked-igtree`
    /// (each optionally suffixed `-pos`) and `best-N`.
    fn from_str(s: &str) -> Result<Self> {
        if let Ok(m) = s.parse::<VotingMethod>() {
            return Ok(CombinationMethod::Vote(m));
        }
        if let Some(rest) = s.strip_prefix("stacked-") {
            let (name, add_pos) = match rest.strip_suffix("-pos") {
                Some(n) => (n, true),
                None => (rest, false),
            };
            return Ok(CombinationMethod::Stacked {
                learner: name.parse()?,
                add_pos,
            });
        }
        if let Some(n) = s.strip_prefix("best-") {
            return n
                .parse()
                .ok()
                .filter(|&n: &usize| n >= 1)
                .map(CombinationMethod::BestN)
                .ok_or_else(|| Error::Config(format!("bad subset size in '{s}'")));
        }
        Err(Error::Config(format!("unknown combination method '{s}'")))
    }
}

/// A combination method fitted to tuning data, ready to apply.
#[derive(Debug, Clone, PartialEq)]
pub struct Combiner {
    pub method: CombinationMethod,
    pub scheme: TagScheme,
    pub bracket_level: bool,
    /// Systems the combination reads, as indices into the table.
    pub subset: Option<Vec<usize>>,
    pub weights: Option<CombinerWeights>,
    pub bracket_weights: Option<BracketWeights>,
    pub stacked: Option<StackedModel>,
}

impl Combiner {
    /// Estimates whatever `method` needs from `tuning`.
    ///
    /// Plain majority voting runs without tuning data; every other method
    /// requires a tuning table with gold tags.
    pub fn fit(
        method: CombinationMethod,
        tuning: Option<&PredictionTable>,
        scheme: TagScheme,
        bracket_level: bool,
    ) -> Result<Combiner> {
        let mut c = Combiner {
            method,
            scheme,
            bracket_level,
            subset: None,
            weights: None,
            bracket_weights: None,
            stacked: None,
        };
        let tuning = match tuning {
            Some(t) if t.has_gold() && t.row_count() > 0 => t,
            Some(_) if method.needs_tuning() => {
                return Err(Error::Config(format!(
                    "{method} needs a tuning table with gold tags"
                )))
            }
            None if method.needs_tuning() => {
                return Err(Error::Config(format!("{method} needs a tuning table")))
            }
            _ => return Ok(c),
        };
        let tuning = match method {
            CombinationMethod::BestN(n) => {
                let (subset, _) = best_n_select(tuning, n, scheme, bracket_level)?;
                let t = tuning.select(&subset);
                c.subset = Some(subset);
                t
            }
            _ => tuning.clone(),
        };
        match method {
            CombinationMethod::Stacked { learner, add_pos } => {
                if bracket_level {
                    return Err(Error::Config(
                        "stacked combination works on tags only, not bracket streams".into(),
                    ));
                }
                c.stacked = Some(stacked_train(&tuning, learner, add_pos)?);
            }
            _ if bracket_level => {
                c.bracket_weights = Some(estimate_bracket_weights(&tuning, scheme)?)
            }
            _ => c.weights = Some(estimate_weights(&tuning)?),
        }
        Ok(c)
    }

    /// A voting combiner over externally estimated weights.
    pub fn from_weights(
        method: VotingMethod,
        weights: CombinerWeights,
        scheme: TagScheme,
    ) -> Combiner {
        Combiner {
            method: CombinationMethod::Vote(method),
            scheme,
            bracket_level: false,
            subset: None,
            weights: Some(weights),
            bracket_weights: None,
            stacked: None,
        }
    }

    fn voting_method(&self) -> VotingMethod {
        match self.method {
            CombinationMethod::Vote(m) => m,
            _ => VotingMethod::Majority,
        }
    }

    /// Combined chunk spans for every sentence of `test`.
    pub fn combine_spans(&self, test: &PredictionTable) -> Result<Vec<Vec<ChunkSpan>>> {
        let selected;
        let table = match &self.subset {
            Some(s) => {
                if let Some(&bad) = s.iter().find(|&&i| i >= test.system_count()) {
                    return Err(Error::Contract(format!("table lacks system {bad}")));
                }
                selected = test.select(s);
                &selected
            }
            None => test,
        };
        if self.bracket_level {
            let (spans, lengths) = table_spans(table, self.scheme);
            return combine_brackets(
                &spans,
                &lengths,
                self.voting_method(),
                self.bracket_weights.as_ref(),
            );
        }
        let tags = self.combine_tags(table)?;
        Ok(tags
            .iter()
            .map(|t| extract_chunks(t, self.scheme))
            .collect())
    }

    /// Raw per-token decisions, before any repair.
    fn combine_tags(&self, table: &PredictionTable) -> Result<Vec<Vec<String>>> {
        table
            .sentences
            .iter()
            .map(|s| {
                s.iter()
                    .map(|r| match &self.stacked {
                        Some(m) => {
                            if r.preds.iter().all(|p| *p == r.preds[0]) {
                                Ok(r.preds[0].clone())
                            } else {
                                m.predict(r)
                            }
                        }
                        None => vote(&r.preds, self.voting_method(), self.weights.as_ref()),
                    })
                    .collect()
            })
            .collect()
    }

    /// The combined output as an IOB2-tagged corpus.
    pub fn combine(&self, test: &PredictionTable) -> Result<Corpus> {
        let spans = self.combine_spans(test)?;
        let sentences = test
            .sentences
            .iter()
            .zip(&spans)
            .map(|(rows, sp)| {
                let tags = encode_chunks(sp, rows.len(), TagScheme::Iob2);
                Sentence::new(
                    rows.iter()
                        .zip(tags)
                        .map(|(r, t)| {
                            Token::new(
                                r.word.as_deref().unwrap_or(NO_WORD),
                                r.pos.as_str(),
                                Some(t),
                            )
                        })
                        .collect(),
                )
            })
            .collect();
        Ok(Corpus {
            sentences,
            scheme: TagScheme::Iob2,
        })
    }
}

pub fn combine_corpus(test: &PredictionTable, combiner: &Combiner) -> Result<Corpus> {
    combiner.combine(test)
}

/// All size-`n` subsets of `0..k` in lexicographic order.
pub fn subsets(k: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, k: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            if k - i < n - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, k, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n <= k {
        go(0, k, n, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

/// Chunk F of majority voting over `subset` on the tuning table.
pub fn subset_f(
    tuning: &PredictionTable,
    subset: &[usize],
    scheme: TagScheme,
    bracket_level: bool,
) -> Result<f64> {
    let t = tuning.select(subset);
    let c = Combiner::fit(
        CombinationMethod::Vote(VotingMethod::Majority),
        Some(&t),
        scheme,
        bracket_level,
    )?;
    let pred = c.combine_spans(&t)?;
    Ok(score_chunks(&tuning.gold_spans(scheme), &pred)?.f_rate)
}

/// The size-`n` subset whose majority vote scores the highest chunk F on
/// the tuning table, with that F. Ties go to the earliest subset.
pub fn best_n_select(
    tuning: &PredictionTable,
    n: usize,
    scheme: TagScheme,
    bracket_level: bool,
) -> Result<(Vec<usize>, f64)> {
    let k = tuning.system_count();
    if n == 0 || n > k {
        return Err(Error::Config(format!(
            "subset size must lie in 1..={k}, got {n}"
        )));
    }
    if !tuning.has_gold() {
        return Err(Error::Config(
            "subset selection needs a tuning table with gold tags".into(),
        ));
    }
    let candidates = subsets(k, n);
    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|s| subset_f(tuning, s, scheme, bracket_level))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, &f) in scores.iter().enumerate() {
        if f > scores[best] {
            best = i;
        }
    }
    Ok((candidates[best].clone(), scores[best]))
}
