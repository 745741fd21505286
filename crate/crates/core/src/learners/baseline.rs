use std::collections::BTreeMap;

use super::ClassPrior;
use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Most frequent chunk tag per POS tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineTable {
    pub table: BTreeMap<String, String>,
    /// Corpus-wide modal tag, used for unseen POS tags.
    pub fallback: String,
}

impl BaselineTable {
    pub fn lookup(&self, pos: &str) -> &str {
        self.table.get(pos).unwrap_or(&self.fallback)
    }
}

pub fn train_baseline(corpus: &Corpus) -> Result<BaselineTable> {
    let mut by_pos: BTreeMap<&str, BTreeMap<String, usize>> = BTreeMap::new();
    let mut all_tags = Vec::new();
    for s in &corpus.sentences {
        for t in &s.tokens {
            let tag = t
                .chunk_tag
                .as_deref()
                .ok_or_else(|| Error::Training("training corpus lacks chunk tags".into()))?;
            *by_pos
                .entry(&t.pos)
                .or_default()
                .entry(tag.to_string())
                .or_default() += 1;
            all_tags.push(tag);
        }
    }
    let prior = ClassPrior::from_labels(all_tags.iter().copied());
    let fallback = prior
        .modal()
        .ok_or_else(|| Error::Training("empty training corpus".into()))?
        .to_string();
    let table = by_pos
        .into_iter()
        .map(|(pos, counts)| {
            let best = prior
                .pick(counts.iter().map(|(t, &n)| (t.as_str(), n as f64)))
                .expect("every POS has at least one tag")
                .to_string();
            (pos.to_string(), best)
        })
        .collect();
    Ok(BaselineTable { table, fallback })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_conll, TagScheme};

    #[test]
    fn modal_tag_per_pos() {
        let mut text = String::new();
        for _ in 0..5 {
            text.push_str("the DT B-NP\nx NN I-NP\n\n");
        }
        for _ in 0..2 {
            text.push_str("a NN B-NP\nthe DT I-NP\n\n");
        }
        let c = parse_conll(&text, TagScheme::Iob2, 3).unwrap();
        let t = train_baseline(&c).unwrap();
        assert_eq!(t.lookup("DT"), "B-NP");
        assert_eq!(t.lookup("NN"), "I-NP");
        assert_eq!(t.lookup("VBZ"), t.fallback);
        // 7 B-NP vs 7 I-NP: lexicographic tie break
        assert_eq!(t.fallback, "B-NP");
    }
}
