//! Chunk-level precision, recall and F rates.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::corpus::{ChunkSpan, Corpus, NestedSentence};
use crate::error::{Error, Result};

/// F rate for a given precision, recall and β. Zero when both rates are zero.
pub fn f_beta(precision: f64, recall: f64, beta: f64) -> f64 {
    let b2 = beta * beta;
    let denom = b2 * precision + recall;
    if denom <= 0.0 {
        0.0
    } else {
        (b2 + 1.0) * precision * recall / denom
    }
}

/// Found, gold and correct chunk counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub found: usize,
    pub gold: usize,
    pub correct: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.found)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.gold)
    }

    pub fn f_rate(&self, beta: f64) -> f64 {
        f_beta(self.precision(), self.recall(), beta)
    }

    fn add(&mut self, other: Counts) {
        self.found += other.found;
        self.gold += other.gold;
        self.correct += other.correct;
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_label: BTreeMap<String, Counts>,
    pub overall: Counts,
    pub precision: f64,
    pub recall: f64,
    pub f_rate: f64,
    pub beta: f64,
}

impl EvalReport {
    pub fn from_counts(per_label: BTreeMap<String, Counts>, beta: f64) -> Self {
        let mut overall = Counts::default();
        for c in per_label.values() {
            overall.add(*c);
        }
        EvalReport {
            precision: overall.precision(),
            recall: overall.recall(),
            f_rate: overall.f_rate(beta),
            per_label,
            overall,
            beta,
        }
    }

    /// Recomputes the rates for a different β.
    pub fn with_beta(&self, beta: f64) -> Self {
        EvalReport::from_counts(self.per_label.clone(), beta)
    }

    /// Human-readable report: one line per label, then the overall line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let line = |out: &mut String, name: &str, c: &Counts| {
            let _ = writeln!(
                out,
                "{name}: precision {:.2}% recall {:.2}% F {:.2}",
                100.0 * c.precision(),
                100.0 * c.recall(),
                100.0 * c.f_rate(self.beta)
            );
        };
        for (label, c) in &self.per_label {
            line(&mut out, label, c);
        }
        line(&mut out, "overall", &self.overall);
        out
    }

    /// Machine-readable `key=value` dump with full-precision rates.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "beta={}", self.beta);
        let mut dump = |prefix: &str, c: &Counts| {
            let _ = writeln!(out, "{prefix}.found={}", c.found);
            let _ = writeln!(out, "{prefix}.gold={}", c.gold);
            let _ = writeln!(out, "{prefix}.correct={}", c.correct);
            let _ = writeln!(out, "{prefix}.precision={}", c.precision());
            let _ = writeln!(out, "{prefix}.recall={}", c.recall());
            let _ = writeln!(out, "{prefix}.f={}", c.f_rate(self.beta));
        };
        for (label, c) in &self.per_label {
            dump(&format!("label.{label}"), c);
        }
        dump("overall", &self.overall);
        out
    }
}

fn count_sentence(
    gold: &[ChunkSpan],
    pred: &[ChunkSpan],
    per_label: &mut BTreeMap<String, Counts>,
) {
    let mut gold_bag: HashMap<(usize, usize, &str), usize> = HashMap::new();
    for g in gold {
        per_label.entry(g.label.clone()).or_default().gold += 1;
        *gold_bag
            .entry((g.begin, g.end, g.label.as_str()))
            .or_default() += 1;
    }
    for p in pred {
        let entry = per_label.entry(p.label.clone()).or_default();
        entry.found += 1;
        if let Some(left) = gold_bag.get_mut(&(p.begin, p.end, p.label.as_str())) {
            if *left > 0 {
                *left -= 1;
                entry.correct += 1;
            }
        }
    }
}

/// Scores predicted spans against gold spans, sentence by sentence, with
/// multiset matching on `(begin, end, label)`.
pub fn score_chunks(gold: &[Vec<ChunkSpan>], pred: &[Vec<ChunkSpan>]) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::Alignment(format!(
            "gold has {} sentences, prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    let mut per_label = BTreeMap::new();
    for (g, p) in gold.iter().zip(pred) {
        count_sentence(g, p, &mut per_label);
    }
    Ok(EvalReport::from_counts(per_label, 1.0))
}

/// Scores two tagged corpora over identical tokenizations.
pub fn score_tagged(gold: &Corpus, pred: &Corpus) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::Alignment(format!(
            "gold has {} sentences, prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    for (si, (g, p)) in gold.sentences.iter().zip(&pred.sentences).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Alignment(format!(
                "sentence {si}: gold has {} tokens, prediction has {}",
                g.len(),
                p.len()
            )));
        }
        if let Some(ti) = g
            .tokens
            .iter()
            .zip(&p.tokens)
            .position(|(a, b)| a.word != b.word)
        {
            return Err(Error::Alignment(format!(
                "sentence {si}, token {ti}: '{}' vs '{}'",
                g.tokens[ti].word, p.tokens[ti].word
            )));
        }
        if g.chunk_tags().is_none() || p.chunk_tags().is_none() {
            return Err(Error::Alignment(format!("sentence {si} lacks chunk tags")));
        }
    }
    score_chunks(&gold.chunk_spans(), &pred.chunk_spans())
}

/// Scores nested bracketings; nested and duplicate spans are matched as a multiset.
pub fn score_nested(gold: &[NestedSentence], pred: &[NestedSentence]) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::Alignment(format!(
            "gold has {} sentences, prediction has {}",
            gold.len(),
            pred.len()
        )));
    }
    for (si, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.tokens.len() != p.tokens.len() {
            return Err(Error::Alignment(format!(
                "sentence {si}: gold has {} tokens, prediction has {}",
                g.tokens.len(),
                p.tokens.len()
            )));
        }
    }
    let g: Vec<_> = gold.iter().map(|s| s.spans.clone()).collect();
    let p: Vec<_> = pred.iter().map(|s| s.spans.clone()).collect();
    score_chunks(&g, &p)
}
