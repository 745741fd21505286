//! Tuning tables by cross-validation, and test tables from full training.

use rayon::prelude::*;

use super::table::{PredictionTable, TableRow};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::learners::{tag_corpus, train, LearnerConfig};

/// A named base system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub name: String,
    pub config: LearnerConfig,
}

impl SystemSpec {
    pub fn new(name: impl Into<String>, config: LearnerConfig) -> Self {
        SystemSpec {
            name: name.into(),
            config,
        }
    }
}

/// Sentence indices of each fold; sentence `i` goes to fold `i % folds`.
pub fn fold_partition(sentences: usize, folds: usize) -> Vec<Vec<usize>> {
    let mut parts = vec![Vec::new(); folds];
    for i in 0..sentences {
        parts[i % folds].push(i);
    }
    parts
}

fn subcorpus(corpus: &Corpus, indices: &[usize]) -> Corpus {
    Corpus {
        sentences: indices
            .iter()
            .map(|&i| corpus.sentences[i].clone())
            .collect(),
        scheme: corpus.scheme,
    }
}

fn check_systems(systems: &[SystemSpec]) -> Result<()> {
    if systems.is_empty() {
        return Err(Error::Config("no systems given".into()));
    }
    for (i, s) in systems.iter().enumerate() {
        if s.name.is_empty() || s.name.contains(char::is_whitespace) {
            return Err(Error::Config(format!("bad system name '{}'", s.name)));
        }
        if systems[..i].iter().any(|o| o.name == s.name) {
            return Err(Error::Config(format!("duplicate system name '{}'", s.name)));
        }
    }
    Ok(())
}

fn assemble(
    reference: &Corpus,
    names: Vec<String>,
    columns: Vec<Vec<Vec<String>>>,
) -> PredictionTable {
    let labeled = reference.is_labeled();
    let sentences = reference
        .sentences
        .iter()
        .enumerate()
        .map(|(si, s)| {
            s.tokens
                .iter()
                .enumerate()
                .map(|(ti, t)| TableRow {
                    word: Some(t.word.clone()),
                    gold: if labeled { t.chunk_tag.clone() } else { None },
                    pos: t.pos.clone(),
                    preds: columns.iter().map(|c| c[si][ti].clone()).collect(),
                })
                .collect()
        })
        .collect();
    PredictionTable {
        systems: names,
        sentences,
    }
}

/// Every system trained on `folds - 1` parts predicts the held-out part,
/// so each training sentence receives exactly one prediction per system.
pub fn cv_tuning_table(
    corpus: &Corpus,
    systems: &[SystemSpec],
    folds: usize,
) -> Result<PredictionTable> {
    check_systems(systems)?;
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if corpus.len() < folds {
        return Err(Error::Config(format!(
            "{} sentences cannot fill {folds} folds",
            corpus.len()
        )));
    }
    if !corpus.is_labeled() {
        return Err(Error::Config(
            "cross-validation needs a labeled corpus".into(),
        ));
    }
    let parts = fold_partition(corpus.len(), folds);
    let jobs: Vec<(usize, usize)> = (0..systems.len())
        .flat_map(|s| (0..folds).map(move |f| (s, f)))
        .collect();
    let outputs: Vec<Corpus> = jobs
        .par_iter()
        .map(|&(s, f)| {
            let train_idx: Vec<usize> = (0..corpus.len()).filter(|i| i % folds != f).collect();
            let model = train(&subcorpus(corpus, &train_idx), &systems[s].config)?;
            Ok(tag_corpus(
                &model,
                &subcorpus(corpus, &parts[f]).unlabeled(),
            ))
        })
        .collect::<Result<_>>()?;
    let mut columns = vec![vec![Vec::new(); corpus.len()]; systems.len()];
    for (&(s, f), out) in jobs.iter().zip(outputs) {
        for (&i, sentence) in parts[f].iter().zip(out.sentences) {
            columns[s][i] = sentence
                .chunk_tags()
                .expect("tagged")
                .iter()
                .map(|t| t.to_string())
                .collect();
        }
    }
    Ok(assemble(
        corpus,
        systems.iter().map(|s| s.name.clone()).collect(),
        columns,
    ))
}

/// Every system trained on all of `train` tags `test`. Gold tags are kept
/// when `test` is labeled.
pub fn test_table(
    train_corpus: &Corpus,
    test: &Corpus,
    systems: &[SystemSpec],
) -> Result<PredictionTable> {
    check_systems(systems)?;
    let unlabeled = test.unlabeled();
    let outputs: Vec<Corpus> = systems
        .par_iter()
        .map(|s| Ok(tag_corpus(&train(train_corpus, &s.config)?, &unlabeled)))
        .collect::<Result<_>>()?;
    let columns = outputs
        .iter()
        .map(|o| {
            o.sentences
                .iter()
                .map(|s| {
                    s.chunk_tags()
                        .expect("tagged")
                        .iter()
                        .map(|t| t.to_string())
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(assemble(
        test,
        systems.iter().map(|s| s.name.clone()).collect(),
        columns,
    ))
}
