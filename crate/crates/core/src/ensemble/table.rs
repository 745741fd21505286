//! Per-token prediction tables.
//!
//! File format: a header line `# [word] [gold] pos SYS1 SYS2 ...` naming the
//! columns, then one token per line with a blank line after each sentence.

use std::fmt::Write as _;

use crate::corpus::{extract_chunks, ChunkSpan, Corpus, Sentence, TagScheme, Token};
use crate::error::{Error, Result};

/// Word used when a table carries no word column.
pub const NO_WORD: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub word: Option<String>,
    pub gold: Option<String>,
    pub pos: String,
    pub preds: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionTable {
    pub systems: Vec<String>,
    pub sentences: Vec<Vec<TableRow>>,
}

impl PredictionTable {
    pub fn new(systems: Vec<String>) -> Self {
        PredictionTable {
            systems,
            sentences: Vec::new(),
        }
    }

    /// Pairs a reference corpus with each system's output on it.
    ///
    /// Every output must cover the reference tokens exactly. Gold tags are
    /// taken from the reference when it is labeled.
    pub fn from_outputs(reference: &Corpus, outputs: &[(String, Corpus)]) -> Result<Self> {
        let labeled = reference.is_labeled();
        for (name, out) in outputs {
            if out.len() != reference.len() {
                return Err(Error::Alignment(format!(
                    "system {name}: {} sentences, reference has {}",
                    out.len(),
                    reference.len()
                )));
            }
            for (si, (a, b)) in reference.sentences.iter().zip(&out.sentences).enumerate() {
                if a.len() != b.len()
                    || a.tokens
                        .iter()
                        .zip(&b.tokens)
                        .any(|(x, y)| x.word != y.word)
                {
                    return Err(Error::Alignment(format!(
                        "system {name}: sentence {si} differs from the reference"
                    )));
                }
                if b.chunk_tags().is_none() {
                    return Err(Error::Alignment(format!(
                        "system {name}: sentence {si} lacks tags"
                    )));
                }
            }
        }
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
                        preds: outputs
                            .iter()
                            .map(|(_, o)| {
                                o.sentences[si].tokens[ti]
                                    .chunk_tag
                                    .clone()
                                    .unwrap_or_default()
                            })
                            .collect(),
                    })
                    .collect()
            })
            .collect();
        Ok(PredictionTable {
            systems: outputs.iter().map(|(n, _)| n.clone()).collect(),
            sentences,
        })
    }

    pub fn system_count(&self) -> usize {
        self.systems.len()
    }

    pub fn rows(&self) -> impl Iterator<Item = &TableRow> {
        self.sentences.iter().flatten()
    }

    pub fn row_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn has_gold(&self) -> bool {
        self.rows().all(|r| r.gold.is_some())
    }

    pub fn has_words(&self) -> bool {
        self.rows().all(|r| r.word.is_some())
    }

    /// Keeps only the listed systems, in the given order.
    pub fn select(&self, systems: &[usize]) -> PredictionTable {
        PredictionTable {
            systems: systems.iter().map(|&s| self.systems[s].clone()).collect(),
            sentences: self
                .sentences
                .iter()
                .map(|s| {
                    s.iter()
                        .map(|r| TableRow {
                            preds: systems.iter().map(|&i| r.preds[i].clone()).collect(),
                            ..r.clone()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// Fraction of rows where `system` predicted the gold tag.
    pub fn accuracy(&self, system: usize) -> f64 {
        let (mut hit, mut n) = (0usize, 0usize);
        for r in self.rows() {
            if let Some(g) = &r.gold {
                n += 1;
                hit += usize::from(r.preds[system] == *g);
            }
        }
        if n == 0 {
            0.0
        } else {
            hit as f64 / n as f64
        }
    }

    /// Gold chunk spans per sentence.
    pub fn gold_spans(&self, scheme: TagScheme) -> Vec<Vec<ChunkSpan>> {
        self.sentences
            .iter()
            .map(|s| {
                let tags: Vec<&str> = s.iter().map(|r| r.gold.as_deref().unwrap_or("O")).collect();
                extract_chunks(&tags, scheme)
            })
            .collect()
    }

    /// Chunk spans of one system per sentence.
    pub fn system_spans(&self, system: usize, scheme: TagScheme) -> Vec<Vec<ChunkSpan>> {
        self.sentences
            .iter()
            .map(|s| {
                let tags: Vec<&str> = s.iter().map(|r| r.preds[system].as_str()).collect();
                extract_chunks(&tags, scheme)
            })
            .collect()
    }

    /// Unlabeled sentences reconstructed from the word and POS columns.
    pub fn sentences_unlabeled(&self) -> Vec<Sentence> {
        self.sentences
            .iter()
            .map(|s| {
                Sentence::new(
                    s.iter()
                        .map(|r| {
                            Token::unlabeled(r.word.as_deref().unwrap_or(NO_WORD), r.pos.as_str())
                        })
                        .collect(),
                )
            })
            .collect()
    }
}

pub fn write_table(table: &PredictionTable) -> String {
    let words = table.has_words();
    let gold = table.has_gold() && table.row_count() > 0;
    let mut out = String::from("#");
    if words {
        out.push_str(" word");
    }
    if gold {
        out.push_str(" gold");
    }
    out.push_str(" pos");
    for s in &table.systems {
        let _ = write!(out, " {s}");
    }
    out.push('\n');
    for sentence in &table.sentences {
        for r in sentence {
            let mut cols: Vec<&str> = Vec::with_capacity(3 + r.preds.len());
            if words {
                cols.push(r.word.as_deref().unwrap_or(NO_WORD));
            }
            if gold {
                cols.push(r.gold.as_deref().unwrap_or("O"));
            }
            cols.push(&r.pos);
            cols.extend(r.preds.iter().map(String::as_str));
            out.push_str(&cols.join(" "));
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

pub fn parse_table(text: &str) -> Result<PredictionTable> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header line".into(),
    })?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("#") {
        return Err(Error::Parse {
            line: 1,
            message: "header must start with '#'".into(),
        });
    }
    let mut names: Vec<&str> = fields.collect();
    let has_word = names.first() == Some(&"word");
    if has_word {
        names.remove(0);
    }
    let has_gold = names.first() == Some(&"gold");
    if has_gold {
        names.remove(0);
    }
    if names.first() != Some(&"pos") {
        return Err(Error::Parse {
            line: 1,
            message: "header must name a pos column".into(),
        });
    }
    let systems: Vec<String> = names[1..].iter().map(|s| s.to_string()).collect();
    if systems.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "table names no systems".into(),
        });
    }
    let width = usize::from(has_word) + usize::from(has_gold) + 1 + systems.len();
    let mut table = PredictionTable::new(systems);
    let mut current = Vec::new();
    for (n, line) in lines {
        let cols: Vec<&str> = line.split([' ', '\t']).filter(|c| !c.is_empty()).collect();
        if cols.is_empty() {
            if !current.is_empty() {
                table.sentences.push(std::mem::take(&mut current));
            }
            continue;
        }
        if cols.len() != width {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("expected {width} columns, found {}", cols.len()),
            });
        }
        let mut it = cols.into_iter();
        let word = has_word.then(|| it.next().expect("width checked").to_string());
        let gold = has_gold.then(|| it.next().expect("width checked").to_string());
        let pos = it.next().expect("width checked").to_string();
        current.push(TableRow {
            word,
            gold,
            pos,
            preds: it.map(str::to_string).collect(),
        });
    }
    if !current.is_empty() {
        table.sentences.push(current);
    }
    Ok(table)
}
