//! Trainable base chunkers behind one contract: train on a labeled corpus,
//! then tag sentences greedily left to right.

mod baseline;
mod igtree;
mod knn;
mod maxent;
mod rules;
mod serialize;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

pub use baseline::{train_baseline, BaselineTable};
pub use igtree::{train_igtree, IGTreeModel, IGTreeNode};
pub use knn::{train_knn, KnnModel};
pub use maxent::{train_maxent, train_maxent_traced, MaxEntConfig, MaxEntModel, MaxEntTrace};
pub use rules::{reevaluate_rules, train_rules, Rule, RuleSet, RulesConfig};
pub use serialize::{load_model, save_model};

use crate::corpus::{io_encode, Corpus, Sentence};
use crate::error::{Error, Result};
use crate::features::{make_features, Dataset, FeatureVector, Weighting, WindowConfig};

/// Class frequencies from training data; resolves every tie in the toolkit.
///
/// Among equally scored candidates the one more frequent in training wins,
/// then the lexicographically smaller tag.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassPrior {
    counts: BTreeMap<String, usize>,
}

impl ClassPrior {
    pub fn new(counts: BTreeMap<String, usize>) -> Self {
        ClassPrior { counts }
    }

    pub fn from_labels<'a, I: IntoIterator<Item = &'a str>>(labels: I) -> Self {
        let mut counts = BTreeMap::new();
        for l in labels {
            *counts.entry(l.to_string()).or_insert(0) += 1;
        }
        ClassPrior { counts }
    }

    pub fn from_dataset(dataset: &Dataset) -> Self {
        ClassPrior::from_labels(dataset.items.iter().map(|(_, c)| c.as_str()))
    }

    pub fn count(&self, class: &str) -> usize {
        self.counts.get(class).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<String, usize> {
        &self.counts
    }

    /// The most frequent class, if any.
    pub fn modal(&self) -> Option<&str> {
        self.pick(self.counts.iter().map(|(c, &n)| (c.as_str(), n as f64)))
    }

    /// Orders `a` before `b` when `a` should win the tie.
    pub fn prefer(&self, a: &str, b: &str) -> std::cmp::Ordering {
        self.count(b).cmp(&self.count(a)).then_with(|| a.cmp(b))
    }

    /// The highest-scoring candidate under the tie rule.
    pub fn pick<'a, I: IntoIterator<Item = (&'a str, f64)>>(&self, scored: I) -> Option<&'a str> {
        let mut best: Option<(&'a str, f64)> = None;
        for (c, s) in scored {
            best = match best {
                None => Some((c, s)),
                Some((bc, bs)) => {
                    if s > bs || (s == bs && self.prefer(c, bc).is_lt()) {
                        Some((c, s))
                    } else {
                        Some((bc, bs))
                    }
                }
            };
        }
        best.map(|(c, _)| c)
    }
}

/// Tag encoding used for training labels and output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputEncoding {
    /// The corpus tags as given.
    #[default]
    Iob,
    /// Inside/outside only: every `B-X` becomes `I-X`.
    Io,
}

impl fmt::Display for OutputEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputEncoding::Iob => write!(f, "iob"),
            OutputEncoding::Io => write!(f, "io"),
        }
    }
}

impl FromStr for OutputEncoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iob" => Ok(OutputEncoding::Iob),
            "io" => Ok(OutputEncoding::Io),
            _ => Err(Error::Config(format!("unknown output encoding '{s}'"))),
        }
    }
}

/// Which learner to train, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum LearnerSpec {
    Baseline { encoding: OutputEncoding },
    Knn { k: usize, weighting: Weighting },
    IGTree,
    MaxEnt(MaxEntConfig),
    Rules(RulesConfig),
}

impl LearnerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerSpec::Baseline { .. } => "baseline",
            LearnerSpec::Knn { .. } => "knn",
            LearnerSpec::IGTree => "igtree",
            LearnerSpec::MaxEnt(_) => "maxent",
            LearnerSpec::Rules(_) => "rules",
        }
    }

    /// The window each learner uses unless configured otherwise.
    pub fn default_window(&self) -> WindowConfig {
        match self {
            LearnerSpec::MaxEnt(_) => WindowConfig::maxent_default(),
            _ => WindowConfig::default(),
        }
    }
}

impl FromStr for LearnerSpec {
    type Err = Error;

    /// Parses a learner name with default parameters.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(LearnerSpec::Baseline {
                encoding: OutputEncoding::Iob,
            }),
            "knn" | "ib1ig" => Ok(LearnerSpec::Knn {
                k: 3,
                weighting: Weighting::GainRatio,
            }),
            "igtree" => Ok(LearnerSpec::IGTree),
            "maxent" => Ok(LearnerSpec::MaxEnt(MaxEntConfig::default())),
            "rules" | "allis" => Ok(LearnerSpec::Rules(RulesConfig::default())),
            _ => Err(Error::Config(format!("unknown learner '{s}'"))),
        }
    }
}

/// A learner together with the window it reads.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig {
    pub spec: LearnerSpec,
    pub window: WindowConfig,
}

impl LearnerConfig {
    pub fn new(spec: LearnerSpec) -> Self {
        let window = spec.default_window();
        LearnerConfig { spec, window }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Baseline(BaselineTable),
    Knn(KnnModel),
    IGTree(IGTreeModel),
    MaxEnt(MaxEntModel),
    Rules(RuleSet),
}

/// Any trained base chunker. Immutable; prediction is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub kind: ModelKind,
    /// Absent for the baseline, which reads only the focus POS tag.
    pub window: Option<WindowConfig>,
    pub encoding: OutputEncoding,
}

impl TrainedModel {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ModelKind::Baseline(_) => "baseline",
            ModelKind::Knn(_) => "knn",
            ModelKind::IGTree(_) => "igtree",
            ModelKind::MaxEnt(_) => "maxent",
            ModelKind::Rules(_) => "rules",
        }
    }

    /// Classifies one feature vector (window models only).
    pub fn classify(&self, vector: &FeatureVector) -> String {
        match &self.kind {
            ModelKind::Baseline(t) => t.fallback.clone(),
            ModelKind::Knn(m) => m.predict(vector),
            ModelKind::IGTree(m) => m.predict(vector),
            ModelKind::MaxEnt(m) => m.predict(vector),
            ModelKind::Rules(m) => m.predict(vector),
        }
    }
}

/// Trains one learner on a labeled corpus.
pub fn train(corpus: &Corpus, config: &LearnerConfig) -> Result<TrainedModel> {
    if corpus.is_empty() {
        return Err(Error::Training("empty training corpus".into()));
    }
    if !corpus.is_labeled() {
        return Err(Error::Training("training corpus lacks chunk tags".into()));
    }
    let encoding = match &config.spec {
        LearnerSpec::Baseline { encoding } => *encoding,
        LearnerSpec::Rules(r) => r.encoding,
        _ => OutputEncoding::Iob,
    };
    let relabeled;
    let corpus = if encoding == OutputEncoding::Io {
        relabeled = Corpus {
            sentences: corpus
                .sentences
                .iter()
                .map(|s| s.with_tags(&io_encode(&s.chunk_tags().unwrap_or_default())))
                .collect(),
            scheme: corpus.scheme,
        };
        &relabeled
    } else {
        corpus
    };
    if let LearnerSpec::Baseline { .. } = config.spec {
        return Ok(TrainedModel {
            kind: ModelKind::Baseline(train_baseline(corpus)?),
            window: None,
            encoding,
        });
    }
    let dataset = Dataset::from_corpus(corpus, &config.window)?;
    let kind = match &config.spec {
        LearnerSpec::Baseline { .. } => unreachable!(),
        LearnerSpec::Knn { k, weighting } => ModelKind::Knn(train_knn(&dataset, *k, *weighting)?),
        LearnerSpec::IGTree => ModelKind::IGTree(train_igtree(&dataset)?),
        LearnerSpec::MaxEnt(c) => ModelKind::MaxEnt(train_maxent(&dataset, c)?),
        LearnerSpec::Rules(c) => ModelKind::Rules(train_rules(&dataset, c)?),
    };
    Ok(TrainedModel {
        kind,
        window: Some(config.window.clone()),
        encoding,
    })
}

/// Tags a sentence greedily left to right; each position sees the model's
/// own earlier predictions as its chunk-tag context.
pub fn tag_sentence(model: &TrainedModel, sentence: &Sentence) -> Vec<String> {
    match (&model.kind, &model.window) {
        (ModelKind::Baseline(table), _) => sentence
            .tokens
            .iter()
            .map(|t| table.lookup(&t.pos).to_string())
            .collect(),
        (_, Some(window)) => {
            let mut tags: Vec<String> = Vec::with_capacity(sentence.len());
            for i in 0..sentence.len() {
                let v = make_features(sentence, i, window, &tags);
                tags.push(model.classify(&v));
            }
            tags
        }
        (_, None) => unreachable!("window models always carry a window"),
    }
}

/// Tags every sentence of a corpus, returning a labeled copy.
///
/// Output tags are repaired into valid form under the corpus scheme.
pub fn tag_corpus(model: &TrainedModel, corpus: &Corpus) -> Corpus {
    use rayon::prelude::*;
    let sentences = corpus
        .sentences
        .par_iter()
        .map(|s| {
            let raw = tag_sentence(model, s);
            s.with_tags(&crate::corpus::repair_tags(&raw, corpus.scheme))
        })
        .collect();
    Corpus {
        sentences,
        scheme: corpus.scheme,
    }
}
