//! Second-level classifiers trained on system outputs.

use std::fmt;
use std::str::FromStr;

use super::table::{PredictionTable, TableRow};
use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureVector, Weighting};
use crate::learners::{train_igtree, train_knn, IGTreeModel, KnnModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackedLearner {
    Knn { k: usize },
    IGTree,
}

impl Default for StackedLearner {
    fn default() -> Self {
        StackedLearner::Knn { k: 1 }
    }
}

impl fmt::Display for StackedLearner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StackedLearner::Knn { .. } => f.write_str("knn"),
            StackedLearner::IGTree => f.write_str("igtree"),
        }
    }
}

impl FromStr for StackedLearner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knn" => Ok(StackedLearner::default()),
            "igtree" => Ok(StackedLearner::IGTree),
            _ => Err(Error::Config(format!("unknown stacked learner '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StackedClassifier {
    Knn(KnnModel),
    IGTree(IGTreeModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackedModel {
    pub classifier: StackedClassifier,
    pub add_pos: bool,
    pub systems: usize,
}

fn row_features(row: &TableRow, add_pos: bool) -> FeatureVector {
    let mut values = row.preds.clone();
    if add_pos {
        values.push(row.pos.clone());
    }
    FeatureVector::new(values)
}

/// The dataset a stacked classifier trains on: one item per row, the
/// system predictions (and optionally the POS tag) as features.
pub fn stacked_dataset(table: &PredictionTable, add_pos: bool) -> Result<Dataset> {
    if !table.has_gold() {
        return Err(Error::Config(
            "stacking needs a tuning table with gold tags".into(),
        ));
    }
    let mut names: Vec<String> = table.systems.iter().map(|s| format!("sys[{s}]")).collect();
    if add_pos {
        names.push("pos[0]".into());
    }
    let mut d = Dataset::new(names);
    for r in table.rows() {
        d.push(row_features(r, add_pos), r.gold.clone().expect("checked"))?;
    }
    Ok(d)
}

pub fn stacked_train(
    tuning: &PredictionTable,
    learner: StackedLearner,
    add_pos: bool,
) -> Result<StackedModel> {
    let d = stacked_dataset(tuning, add_pos)?;
    let classifier = match learner {
        StackedLearner::Knn { k } => {
            StackedClassifier::Knn(train_knn(&d, k, Weighting::GainRatio)?)
        }
        StackedLearner::IGTree => StackedClassifier::IGTree(train_igtree(&d)?),
    };
    Ok(StackedModel {
        classifier,
        add_pos,
        systems: tuning.system_count(),
    })
}

impl StackedModel {
    pub fn arity(&self) -> usize {
        self.systems + usize::from(self.add_pos)
    }

    pub fn predict(&self, row: &TableRow) -> Result<String> {
        if row.preds.len() != self.systems {
            return Err(Error::Contract(format!(
                "row has {} predictions, model expects {}",
                row.preds.len(),
                self.systems
            )));
        }
        let v = row_features(row, self.add_pos);
        Ok(match &self.classifier {
            StackedClassifier::Knn(m) => m.predict(&v),
            StackedClassifier::IGTree(m) => m.predict(&v),
        })
    }
}
