//! Windowed token features and information-theoretic slot weights.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::corpus::{Corpus, Sentence};
use crate::error::{Error, Result};

/// Value of any slot that falls outside the sentence.
pub const PAD: &str = "<pad>";

const PAIR_SEP: char = '|';

/// Which tokens around the focus position contribute features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowConfig {
    pub left_words: usize,
    pub right_words: usize,
    pub left_pos: usize,
    pub right_pos: usize,
    /// Previously predicted chunk tags; never looks right.
    pub left_chunk_tags: usize,
    pub use_focus_word: bool,
    pub use_focus_pos: bool,
    /// Adds conjunctions of adjacent POS slots and of (previous tag, focus POS).
    pub complex_pairs: bool,
}

impl Default for WindowConfig {
    fn default() -> Self {
        WindowConfig {
            left_words: 2,
            right_words: 1,
            left_pos: 2,
            right_pos: 1,
            left_chunk_tags: 2,
            use_focus_word: true,
            use_focus_pos: true,
            complex_pairs: false,
        }
    }
}

/// One slot of a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Word(isize),
    Pos(isize),
    Tag(isize),
    PosPair(isize),
    TagPos,
}

impl WindowConfig {
    /// Three tokens of left context and two of right, with conjunction features.
    pub fn maxent_default() -> Self {
        WindowConfig {
            left_words: 3,
            right_words: 2,
            left_pos: 3,
            right_pos: 2,
            left_chunk_tags: 3,
            use_focus_word: true,
            use_focus_pos: true,
            complex_pairs: true,
        }
    }

    /// Only the focus POS tag.
    pub fn pos_only() -> Self {
        WindowConfig {
            left_words: 0,
            right_words: 0,
            left_pos: 0,
            right_pos: 0,
            left_chunk_tags: 0,
            use_focus_word: false,
            use_focus_pos: true,
            complex_pairs: false,
        }
    }

    fn slots(&self) -> Vec<Slot> {
        let mut slots = Vec::new();
        let window = |left: usize, right: usize, focus: bool| {
            let mut offs: Vec<isize> = (1..=left as isize).rev().map(|d| -d).collect();
            if focus {
                offs.push(0);
            }
            offs.extend(1..=right as isize);
            offs
        };
        slots.extend(
            window(self.left_words, self.right_words, self.use_focus_word)
                .into_iter()
                .map(Slot::Word),
        );
        let pos_offsets = window(self.left_pos, self.right_pos, self.use_focus_pos);
        slots.extend(pos_offsets.iter().copied().map(Slot::Pos));
        slots.extend(
            (1..=self.left_chunk_tags as isize)
                .rev()
                .map(|d| Slot::Tag(-d)),
        );
        if self.complex_pairs {
            for pair in pos_offsets.windows(2) {
                if pair[1] == pair[0] + 1 {
                    slots.push(Slot::PosPair(pair[0]));
                }
            }
            if self.left_chunk_tags > 0 && self.use_focus_pos {
                slots.push(Slot::TagPos);
            }
        }
        slots
    }

    pub fn arity(&self) -> usize {
        self.slots().len()
    }

    /// Slot names in vector order, e.g. `word[-1]`, `pos[0]`, `tag[-1]&pos[0]`.
    pub fn slot_names(&self) -> Vec<String> {
        self.slots()
            .into_iter()
            .map(|s| match s {
                Slot::Word(o) => format!("word[{o}]"),
                Slot::Pos(o) => format!("pos[{o}]"),
                Slot::Tag(o) => format!("tag[{o}]"),
                Slot::PosPair(o) => format!("pos[{o}]&pos[{}]", o + 1),
                Slot::TagPos => "tag[-1]&pos[0]".to_string(),
            })
            .collect()
    }

    /// Serializes as space-separated `key=value` pairs.
    pub fn to_pairs(&self) -> String {
        format!(
            "left_words={} right_words={} left_pos={} right_pos={} left_chunk_tags={} use_focus_word={} use_focus_pos={} complex_pairs={}",
            self.left_words,
            self.right_words,
            self.left_pos,
            self.right_pos,
            self.left_chunk_tags,
            self.use_focus_word,
            self.use_focus_pos,
            self.complex_pairs
        )
    }

    /// Applies one `key=value` setting; returns false if the key is not a window key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        let count = || {
            value
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("{key}: expected a count, got '{value}'")))
        };
        let flag = || {
            value
                .parse::<bool>()
                .map_err(|_| Error::Config(format!("{key}: expected true or false, got '{value}'")))
        };
        match key {
            "left_words" => self.left_words = count()?,
            "right_words" => self.right_words = count()?,
            "left_pos" => self.left_pos = count()?,
            "right_pos" => self.right_pos = count()?,
            "left_chunk_tags" => self.left_chunk_tags = count()?,
            "use_focus_word" => self.use_focus_word = flag()?,
            "use_focus_pos" => self.use_focus_pos = flag()?,
            "complex_pairs" => self.complex_pairs = flag()?,
            _ => return Ok(false),
        }
        Ok(true)
    }
}

impl FromStr for WindowConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut config = WindowConfig::default();
        for pair in s.split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got '{pair}'")))?;
            if !config.set(k, v)? {
                return Err(Error::Config(format!("unknown window key '{k}'")));
            }
        }
        Ok(config)
    }
}

impl fmt::Display for WindowConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_pairs())
    }
}

/// Categorical values in the slot order fixed by a [`WindowConfig`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureVector {
    pub values: Vec<String>,
}

impl FeatureVector {
    pub fn new(values: Vec<String>) -> Self {
        FeatureVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        FeatureVector {
            values: iter.into_iter().map(Into::into).collect(),
        }
    }
}

/// Builds the feature vector of the token at `index`.
///
/// `predicted_tags[i]` is the tag already assigned to position `i < index`.
pub fn make_features<S: AsRef<str>>(
    sentence: &Sentence,
    index: usize,
    config: &WindowConfig,
    predicted_tags: &[S],
) -> FeatureVector {
    let at = |offset: isize| -> Option<usize> {
        let i = index as isize + offset;
        (i >= 0 && (i as usize) < sentence.len()).then_some(i as usize)
    };
    let word = |o: isize| at(o).map_or(PAD, |i| sentence.tokens[i].word.as_str());
    let pos = |o: isize| at(o).map_or(PAD, |i| sentence.tokens[i].pos.as_str());
    let tag = |o: isize| {
        at(o)
            .filter(|&i| i < index)
            .and_then(|i| predicted_tags.get(i))
            .map_or(PAD, |t| t.as_ref())
    };
    let values = config
        .slots()
        .into_iter()
        .map(|slot| match slot {
            Slot::Word(o) => word(o).to_string(),
            Slot::Pos(o) => pos(o).to_string(),
            Slot::Tag(o) => tag(o).to_string(),
            Slot::PosPair(o) => format!("{}{PAIR_SEP}{}", pos(o), pos(o + 1)),
            Slot::TagPos => format!("{}{PAIR_SEP}{}", tag(-1), pos(0)),
        })
        .collect();
    FeatureVector { values }
}

/// Labeled feature vectors sharing one arity.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub slot_names: Vec<String>,
    pub items: Vec<(FeatureVector, String)>,
}

impl Dataset {
    pub fn new(slot_names: Vec<String>) -> Self {
        Dataset {
            slot_names,
            items: Vec::new(),
        }
    }

    /// A dataset with generic slot names `f0, f1, ...`.
    pub fn with_arity(arity: usize) -> Self {
        Dataset::new((0..arity).map(|i| format!("f{i}")).collect())
    }

    pub fn arity(&self) -> usize {
        self.slot_names.len()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, vector: FeatureVector, class: impl Into<String>) -> Result<()> {
        if vector.len() != self.arity() {
            return Err(Error::Contract(format!(
                "vector arity {} does not match dataset arity {}",
                vector.len(),
                self.arity()
            )));
        }
        self.items.push((vector, class.into()));
        Ok(())
    }

    /// Builds training instances from a labeled corpus; the left tag context
    /// is the gold tags.
    pub fn from_corpus(corpus: &Corpus, config: &WindowConfig) -> Result<Self> {
        let mut data = Dataset::new(config.slot_names());
        for (si, s) in corpus.sentences.iter().enumerate() {
            let tags = s
                .chunk_tags()
                .ok_or_else(|| Error::Training(format!("sentence {si} has no chunk tags")))?;
            for i in 0..s.len() {
                data.items
                    .push((make_features(s, i, config, &tags), tags[i].to_string()));
            }
        }
        Ok(data)
    }

    /// Class frequencies.
    pub fn class_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for (_, c) in &self.items {
            *counts.entry(c.as_str()).or_default() += 1;
        }
        counts
    }
}

fn entropy<I: IntoIterator<Item = usize>>(counts: I, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    counts
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

fn slot_tallies(dataset: &Dataset, slot: usize) -> BTreeMap<&str, BTreeMap<&str, usize>> {
    let mut by_value: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
    for (v, c) in &dataset.items {
        *by_value
            .entry(v.values[slot].as_str())
            .or_default()
            .entry(c.as_str())
            .or_default() += 1;
    }
    by_value
}

/// `H(C) - Σ_v P(v)·H(C|v)` in bits.
pub fn information_gain(dataset: &Dataset, slot: usize) -> f64 {
    let n = dataset.len();
    if n == 0 {
        return 0.0;
    }
    let class_entropy = entropy(dataset.class_counts().into_values(), n);
    let conditional: f64 = slot_tallies(dataset, slot)
        .values()
        .map(|classes| {
            let nv: usize = classes.values().sum();
            nv as f64 / n as f64 * entropy(classes.values().copied(), nv)
        })
        .sum();
    (class_entropy - conditional).clamp(0.0, class_entropy)
}

/// Entropy of the slot's value distribution, in bits.
pub fn split_info(dataset: &Dataset, slot: usize) -> f64 {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (v, _) in &dataset.items {
        *counts.entry(v.values[slot].as_str()).or_default() += 1;
    }
    entropy(counts.into_values(), dataset.len())
}

/// Information gain divided by split info; 0 when the split info is 0.
pub fn gain_ratio(dataset: &Dataset, slot: usize) -> f64 {
    let si = split_info(dataset, slot);
    if si <= 0.0 {
        return 0.0;
    }
    (information_gain(dataset, slot) / si).clamp(0.0, 1.0)
}

/// How memory-based learners weight feature slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    GainRatio,
    InformationGain,
}

impl Weighting {
    pub fn weights(self, dataset: &Dataset) -> Vec<f64> {
        (0..dataset.arity())
            .map(|s| match self {
                Weighting::GainRatio => gain_ratio(dataset, s),
                Weighting::InformationGain => information_gain(dataset, s),
            })
            .collect()
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weighting::GainRatio => write!(f, "gain_ratio"),
            Weighting::InformationGain => write!(f, "info_gain"),
        }
    }
}

impl FromStr for Weighting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gain_ratio" | "gr" => Ok(Weighting::GainRatio),
            "info_gain" | "ig" => Ok(Weighting::InformationGain),
            _ => Err(Error::Config(format!("unknown weighting '{s}'"))),
        }
    }
}
