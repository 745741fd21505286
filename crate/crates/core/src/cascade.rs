//! Nested NP bracketing by repeated chunk-and-collapse passes.
//!
//! Each pass chunks the current sentence, records the found spans in
//! original offsets, and replaces every span by its head token. The next
//! pass sees the shorter sentence, so phrases build up bottom-up.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::corpus::{
    encode_chunks, extract_chunks, ChunkSpan, Corpus, NestedSentence, Sentence, TagScheme,
};
use crate::ensemble::{Combiner, PredictionTable, TableRow};
use crate::error::{Error, Result};
use crate::learners::{tag_sentence, TrainedModel};

/// Which token of a collapsed span stands in for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeadRule {
    #[default]
    Last,
    First,
}

impl fmt::Display for HeadRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeadRule::Last => f.write_str("last"),
            HeadRule::First => f.write_str("first"),
        }
    }
}

impl FromStr for HeadRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "last" => Ok(HeadRule::Last),
            "first" => Ok(HeadRule::First),
            _ => Err(Error::Config(format!("unknown head rule '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CascadeConfig {
    pub max_depth: usize,
    pub head: HeadRule,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        CascadeConfig {
            max_depth: 5,
            head: HeadRule::Last,
        }
    }
}

/// For each reduced token, the original interval `[begin, end)` it covers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollapseMap {
    pub intervals: Vec<(usize, usize)>,
}

impl CollapseMap {
    pub fn identity(len: usize) -> Self {
        CollapseMap {
            intervals: (0..len).map(|i| (i, i + 1)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// A reduced span in the original offsets.
    pub fn expand(&self, span: &ChunkSpan) -> ChunkSpan {
        ChunkSpan::new(
            self.intervals[span.begin].0,
            self.intervals[span.end - 1].1,
            span.label.clone(),
        )
    }

    /// The map from `inner`'s reduced tokens through `self` to the original.
    pub fn compose(&self, inner: &CollapseMap) -> CollapseMap {
        CollapseMap {
            intervals: inner
                .intervals
                .iter()
                .map(|&(b, e)| (self.intervals[b].0, self.intervals[e - 1].1))
                .collect(),
        }
    }

    /// An original span in reduced offsets, if its edges fall on token
    /// boundaries of the reduced sentence.
    pub fn reduce(&self, span: &ChunkSpan) -> Option<ChunkSpan> {
        let b = self.intervals.iter().position(|&(b, _)| b == span.begin)?;
        let e = self.intervals.iter().position(|&(_, e)| e == span.end)?;
        (b <= e).then(|| ChunkSpan::new(b, e + 1, span.label.clone()))
    }
}

/// Replaces each span by its head token.
///
/// Spans must be non-empty, in range, sorted and pairwise disjoint.
pub fn collapse(
    sentence: &Sentence,
    spans: &[ChunkSpan],
    head: HeadRule,
) -> Result<(Sentence, CollapseMap)> {
    let n = sentence.len();
    for (i, s) in spans.iter().enumerate() {
        if s.begin >= s.end || s.end > n {
            return Err(Error::Contract(format!(
                "span {s} does not fit a sentence of {n} tokens"
            )));
        }
        if i > 0 && spans[i - 1].end > s.begin {
            return Err(Error::Contract(format!(
                "span {} overlaps or precedes {s}",
                spans[i - 1]
            )));
        }
    }
    let mut tokens = Vec::with_capacity(n);
    let mut intervals = Vec::with_capacity(n);
    let mut next = spans.iter().peekable();
    let mut i = 0;
    while i < n {
        match next.peek() {
            Some(s) if s.begin == i => {
                let h = match head {
                    HeadRule::Last => s.end - 1,
                    HeadRule::First => s.begin,
                };
                let mut t = sentence.tokens[h].clone();
                t.chunk_tag = None;
                tokens.push(t);
                intervals.push((s.begin, s.end));
                i = s.end;
                next.next();
            }
            _ => {
                let mut t = sentence.tokens[i].clone();
                t.chunk_tag = None;
                tokens.push(t);
                intervals.push((i, i + 1));
                i += 1;
            }
        }
    }
    Ok((Sentence::new(tokens), CollapseMap { intervals }))
}

/// What a chunker knows about the pass it is asked to run.
#[derive(Debug, Clone)]
pub struct Level<'a> {
    pub depth: usize,
    /// Reduced tokens of the current sentence to original intervals.
    pub map: &'a CollapseMap,
}

/// Finds flat chunks in a (possibly reduced) sentence.
pub trait Chunker: Sync {
    fn chunk(&self, sentence: &Sentence, level: &Level<'_>) -> Result<Vec<ChunkSpan>>;
}

impl Chunker for TrainedModel {
    fn chunk(&self, sentence: &Sentence, _level: &Level<'_>) -> Result<Vec<ChunkSpan>> {
        Ok(extract_chunks(
            &tag_sentence(self, sentence),
            TagScheme::Iob2,
        ))
    }
}

/// Several models tagging each pass, merged by a fitted combiner.
#[derive(Debug, Clone)]
pub struct EnsembleChunker {
    pub models: Vec<(String, TrainedModel)>,
    pub combiner: Combiner,
}

impl Chunker for EnsembleChunker {
    fn chunk(&self, sentence: &Sentence, _level: &Level<'_>) -> Result<Vec<ChunkSpan>> {
        let outputs: Vec<Vec<String>> = self
            .models
            .iter()
            .map(|(_, m)| tag_sentence(m, sentence))
            .collect();
        let rows = sentence
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| TableRow {
                word: Some(t.word.clone()),
                gold: None,
                pos: t.pos.clone(),
                preds: outputs.iter().map(|o| o[i].clone()).collect(),
            })
            .collect();
        let table = PredictionTable {
            systems: self.models.iter().map(|(n, _)| n.clone()).collect(),
            sentences: vec![rows],
        };
        Ok(self
            .combiner
            .combine_spans(&table)?
            .pop()
            .unwrap_or_default())
    }
}

/// Replays known nested spans level by level: pass `d` returns the spans
/// of height `d + 1`, where a span with no nested span inside has height 1.
#[derive(Debug, Clone)]
pub struct OracleChunker {
    heights: Vec<(ChunkSpan, usize)>,
}

impl OracleChunker {
    pub fn new(spans: &[ChunkSpan]) -> Self {
        let mut sorted: Vec<ChunkSpan> = spans
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        sorted.sort_by_key(|s| s.len());
        let mut heights: Vec<(ChunkSpan, usize)> = Vec::with_capacity(sorted.len());
        for s in sorted {
            let h = heights
                .iter()
                .filter(|(c, _)| s.contains(c) && (c.begin, c.end) != (s.begin, s.end))
                .map(|(_, h)| h + 1)
                .max()
                .unwrap_or(1);
            heights.push((s, h));
        }
        OracleChunker { heights }
    }
}

impl Chunker for OracleChunker {
    fn chunk(&self, _sentence: &Sentence, level: &Level<'_>) -> Result<Vec<ChunkSpan>> {
        let mut out: Vec<ChunkSpan> = self
            .heights
            .iter()
            .filter(|(_, h)| *h == level.depth + 1)
            .filter_map(|(s, _)| level.map.reduce(s))
            .collect();
        out.sort();
        Ok(out)
    }
}

/// One pass of a cascade: the sentence it saw and the spans it found.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeLevel {
    pub sentence: Sentence,
    /// In the offsets of `sentence`.
    pub spans: Vec<ChunkSpan>,
    pub map: CollapseMap,
}

/// Keeps spans that fit the sentence, dropping any that overlap an earlier one.
fn disjoint(mut spans: Vec<ChunkSpan>, len: usize) -> Vec<ChunkSpan> {
    spans.retain(|s| s.begin < s.end && s.end <= len);
    spans.sort();
    spans.dedup_by(|a, b| a.begin == b.begin && a.end == b.end);
    let mut kept: Vec<ChunkSpan> = Vec::with_capacity(spans.len());
    for s in spans {
        if kept.last().is_none_or(|k| k.end <= s.begin) {
            kept.push(s);
        }
    }
    kept
}

/// Runs the cascade and returns every pass.
///
/// Passes stop when the chunker finds no span it has not found before,
/// when the sentence has shrunk to one token, or after `max_depth` passes.
pub fn cascade_levels<C: Chunker + ?Sized>(
    sentence: &Sentence,
    chunker: &C,
    config: &CascadeConfig,
) -> Result<Vec<CascadeLevel>> {
    if config.max_depth == 0 {
        return Err(Error::Config("max_depth must be at least 1".into()));
    }
    let mut levels = Vec::new();
    let mut current = sentence.unlabeled();
    let mut map = CollapseMap::identity(sentence.len());
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    for depth in 0..config.max_depth {
        if current.is_empty() {
            break;
        }
        let found = chunker.chunk(&current, &Level { depth, map: &map })?;
        let spans = disjoint(found, current.len());
        let mut fresh = false;
        for s in &spans {
            let o = map.expand(s);
            fresh |= seen.insert((o.begin, o.end));
        }
        let (reduced, step) = collapse(&current, &spans, config.head)?;
        levels.push(CascadeLevel {
            sentence: current,
            spans,
            map: map.clone(),
        });
        if !fresh {
            break;
        }
        map = map.compose(&step);
        current = reduced;
        if current.len() == 1 {
            break;
        }
    }
    Ok(levels)
}

/// Nested spans in original offsets, sorted begin ascending and end descending.
pub fn cascade_bracket<C: Chunker + ?Sized>(
    sentence: &Sentence,
    chunker: &C,
    config: &CascadeConfig,
) -> Result<Vec<ChunkSpan>> {
    let mut out: Vec<ChunkSpan> = cascade_levels(sentence, chunker, config)?
        .iter()
        .flat_map(|l| l.spans.iter().map(|s| l.map.expand(s)))
        .collect();
    crate::corpus::sort_nested(&mut out);
    Ok(out)
}

/// Brackets every sentence; sentences run in parallel.
pub fn cascade_corpus<C: Chunker + ?Sized>(
    sentences: &[Sentence],
    chunker: &C,
    config: &CascadeConfig,
) -> Result<Vec<NestedSentence>> {
    sentences
        .par_iter()
        .map(|s| {
            Ok(NestedSentence {
                tokens: s.unlabeled().tokens,
                spans: cascade_bracket(s, chunker, config)?,
            })
        })
        .collect()
}

/// Flat training data for a cascade chunker: every pass of the oracle
/// cascade over each gold tree becomes one IOB2-tagged sentence.
pub fn level_training_corpus(nested: &[NestedSentence], config: &CascadeConfig) -> Result<Corpus> {
    let mut sentences = Vec::new();
    for n in nested {
        let oracle = OracleChunker::new(&n.spans);
        for level in cascade_levels(&n.sentence(), &oracle, config)? {
            let tags = encode_chunks(&level.spans, level.sentence.len(), TagScheme::Iob2);
            sentences.push(level.sentence.with_tags(&tags));
        }
    }
    Ok(Corpus {
        sentences,
        scheme: TagScheme::Iob2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{is_properly_nested, parse_nested};

    fn sp(b: usize, e: usize) -> ChunkSpan {
        ChunkSpan::new(b, e, "NP")
    }

    fn ounce() -> Sentence {
        Sentence::from_words_pos(&["$", "366.50", "an", "ounce"], &["$", "CD", "DT", "NN"])
    }

    struct Nothing;
    impl Chunker for Nothing {
        fn chunk(&self, _: &Sentence, _: &Level<'_>) -> Result<Vec<ChunkSpan>> {
            Ok(Vec::new())
        }
    }

    #[test]
    fn collapse_identity_and_head() {
        let s = ounce();
        let (r, m) = collapse(&s, &[], HeadRule::Last).unwrap();
        assert_eq!(r, s.unlabeled());
        assert_eq!(m, CollapseMap::identity(4));

        let (r, m) = collapse(&s, &[sp(0, 2)], HeadRule::Last).unwrap();
        assert_eq!(r.words(), vec!["366.50", "an", "ounce"]);
        assert_eq!(r.pos_tags(), vec!["CD", "DT", "NN"]);
        assert_eq!(m.intervals[0], (0, 2));

        let (r, _) = collapse(&s, &[sp(0, 2)], HeadRule::First).unwrap();
        assert_eq!(r.words()[0], "$");

        let (r, m) = collapse(&s, &[sp(0, 4)], HeadRule::Last).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(m.intervals, vec![(0, 4)]);
    }

    #[test]
    fn collapse_rejects_overlap() {
        let s = ounce();
        assert!(matches!(
            collapse(&s, &[sp(0, 2), sp(1, 3)], HeadRule::Last),
            Err(Error::Contract(_))
        ));
        assert!(collapse(&s, &[sp(2, 5)], HeadRule::Last).is_err());
        assert!(collapse(&s, &[sp(2, 2)], HeadRule::Last).is_err());
    }

    #[test]
    fn maps_compose_and_round_trip() {
        let outer = CollapseMap {
            intervals: vec![(0, 2), (2, 3), (3, 5)],
        };
        let inner = CollapseMap {
            intervals: vec![(0, 2), (2, 3)],
        };
        let m = outer.compose(&inner);
        assert_eq!(m.intervals, vec![(0, 3), (3, 5)]);
        let s = m.expand(&sp(1, 2));
        assert_eq!((s.begin, s.end), (3, 5));
        assert_eq!(m.reduce(&s), Some(sp(1, 2)));
        assert_eq!(outer.reduce(&sp(1, 4)), None);
    }

    #[test]
    fn nothing_found_stops_at_once() {
        let levels = cascade_levels(&ounce(), &Nothing, &CascadeConfig::default()).unwrap();
        assert_eq!(levels.len(), 1);
        assert!(
            cascade_bracket(&ounce(), &Nothing, &CascadeConfig::default())
                .unwrap()
                .is_empty()
        );
    }

    #[test]
    fn oracle_recovers_the_ounce_example() {
        let gold = vec![sp(0, 4), sp(0, 2), sp(2, 4)];
        let got = cascade_bracket(
            &ounce(),
            &OracleChunker::new(&gold),
            &CascadeConfig::default(),
        )
        .unwrap();
        assert_eq!(got, gold);
    }

    #[test]
    fn max_depth_limits_passes() {
        let gold = vec![sp(0, 4), sp(0, 2), sp(2, 4)];
        let config = CascadeConfig {
            max_depth: 1,
            ..CascadeConfig::default()
        };
        let got = cascade_bracket(&ounce(), &OracleChunker::new(&gold), &config).unwrap();
        assert_eq!(got, vec![sp(0, 2), sp(2, 4)]);
        let zero = CascadeConfig {
            max_depth: 0,
            ..config
        };
        assert!(cascade_bracket(&ounce(), &Nothing, &zero).is_err());
    }

    #[test]
    fn unary_then_wider() {
        // [NP [NP it] and [NP them]]
        let s = Sentence::from_words_pos(&["it", "and", "them"], &["PRP", "CC", "PRP"]);
        let gold = vec![sp(0, 3), sp(0, 1), sp(2, 3)];
        let got =
            cascade_bracket(&s, &OracleChunker::new(&gold), &CascadeConfig::default()).unwrap();
        assert_eq!(got, gold);
    }

    #[test]
    fn level_training_data() {
        let nested =
            parse_nested("$ $ (NP(NP*\n366.50 CD *)\nan DT (NP*\nounce NN *))\n\n").unwrap();
        let c = level_training_corpus(&nested, &CascadeConfig::default()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(
            c.sentences[0].chunk_tags().unwrap(),
            vec!["B-NP", "I-NP", "B-NP", "I-NP"]
        );
        assert_eq!(c.sentences[1].words(), vec!["366.50", "ounce"]);
        assert_eq!(c.sentences[1].chunk_tags().unwrap(), vec!["B-NP", "I-NP"]);
    }

    #[test]
    fn trained_chunker_output_stays_nested() {
        let nested = parse_nested(
            "the DT (NP(NP*\ncat NN *)\nof IN *\nthe DT (NP*\nhouse NN *))\nsat VBD *\n\n\
             a DT (NP(NP*\ndog NN *)\nof IN *\na DT (NP*\nfarm NN *))\nran VBD *\n\n",
        )
        .unwrap();
        let train = level_training_corpus(&nested, &CascadeConfig::default()).unwrap();
        let model = crate::learners::train(
            &train,
            &crate::learners::LearnerConfig::new(crate::learners::LearnerSpec::IGTree),
        )
        .unwrap();
        let sentences: Vec<Sentence> = nested.iter().map(|n| n.sentence()).collect();
        let out = cascade_corpus(&sentences, &model, &CascadeConfig::default()).unwrap();
        for o in &out {
            assert!(is_properly_nested(&o.spans));
        }
        let seq: Vec<_> = sentences
            .iter()
            .map(|s| cascade_bracket(s, &model, &CascadeConfig::default()).unwrap())
            .collect();
        assert_eq!(out.iter().map(|o| o.spans.clone()).collect::<Vec<_>>(), seq);
    }
}
