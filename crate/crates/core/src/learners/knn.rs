use std::collections::HashMap;

use super::ClassPrior;
use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureVector, Weighting};

/// Weighted-overlap nearest-neighbour classifier.
///
/// `k` counts distinct distance values ("regions"), not items: every
/// memory item whose distance is among the `k` smallest distinct distances
/// takes part in the vote.
#[derive(Debug, Clone)]
pub struct KnnModel {
    pub memory: Dataset,
    pub weights: Vec<f64>,
    pub k: usize,
    pub weighting: Weighting,
    prior: ClassPrior,
    index: MemoryIndex,
}

impl PartialEq for KnnModel {
    fn eq(&self, other: &Self) -> bool {
        self.memory == other.memory
            && self.weights == other.weights
            && self.k == other.k
            && self.weighting == other.weighting
    }
}

/// Interned, de-duplicated view of the memory.
#[derive(Debug, Clone, Default)]
struct MemoryIndex {
    values: Vec<HashMap<String, u32>>,
    classes: Vec<String>,
    instances: Vec<(Vec<u32>, Vec<(usize, usize)>)>,
}

impl MemoryIndex {
    fn build(memory: &Dataset) -> Self {
        let mut values: Vec<HashMap<String, u32>> = vec![HashMap::new(); memory.arity()];
        let mut class_ids: HashMap<&str, usize> = HashMap::new();
        let mut classes = Vec::new();
        let mut slots: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut instances: Vec<(Vec<u32>, Vec<(usize, usize)>)> = Vec::new();
        for (v, c) in &memory.items {
            let key: Vec<u32> = v
                .values
                .iter()
                .zip(values.iter_mut())
                .map(|(val, dict)| {
                    let next = dict.len() as u32;
                    *dict.entry(val.clone()).or_insert(next)
                })
                .collect();
            let cid = *class_ids.entry(c.as_str()).or_insert_with(|| {
                classes.push(c.clone());
                classes.len() - 1
            });
            let slot = *slots.entry(key.clone()).or_insert_with(|| {
                instances.push((key, Vec::new()));
                instances.len() - 1
            });
            let counts = &mut instances[slot].1;
            match counts.iter_mut().find(|(id, _)| *id == cid) {
                Some((_, n)) => *n += 1,
                None => counts.push((cid, 1)),
            }
        }
        MemoryIndex {
            values,
            classes,
            instances,
        }
    }
}

pub fn train_knn(dataset: &Dataset, k: usize, weighting: Weighting) -> Result<KnnModel> {
    let weights = weighting.weights(dataset);
    KnnModel::from_parts(dataset.clone(), weights, k, weighting)
}

impl KnnModel {
    /// Assembles a model from stored memory and weights.
    pub fn from_parts(
        memory: Dataset,
        weights: Vec<f64>,
        k: usize,
        weighting: Weighting,
    ) -> Result<Self> {
        if memory.is_empty() {
            return Err(Error::Training("empty dataset".into()));
        }
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if weights.len() != memory.arity() || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Config(
                "weights must be non-negative, one per slot".into(),
            ));
        }
        let prior = ClassPrior::from_dataset(&memory);
        let index = MemoryIndex::build(&memory);
        Ok(KnnModel {
            memory,
            weights,
            k,
            weighting,
            prior,
            index,
        })
    }

    /// Weighted overlap distance between two vectors.
    pub fn distance(&self, a: &FeatureVector, b: &FeatureVector) -> f64 {
        a.values
            .iter()
            .zip(&b.values)
            .zip(&self.weights)
            .filter(|((x, y), _)| x != y)
            .map(|(_, w)| *w)
            .sum()
    }

    pub fn predict(&self, vector: &FeatureVector) -> String {
        let query: Vec<Option<u32>> = vector
            .values
            .iter()
            .zip(&self.index.values)
            .map(|(v, dict)| dict.get(v).copied())
            .collect();
        let distances: Vec<f64> = self
            .index
            .instances
            .iter()
            .map(|(inst, _)| {
                inst.iter()
                    .zip(&query)
                    .zip(&self.weights)
                    .filter(|((x, q), _)| Some(**x) != **q)
                    .map(|(_, w)| *w)
                    .sum()
            })
            .collect();
        // k smallest distinct distances, ascending
        let mut nearest: Vec<f64> = Vec::with_capacity(self.k + 1);
        for &d in &distances {
            if nearest.len() == self.k && d >= nearest[self.k - 1] {
                continue;
            }
            match nearest.binary_search_by(|x| x.partial_cmp(&d).expect("finite distances")) {
                Ok(_) => {}
                Err(pos) => {
                    nearest.insert(pos, d);
                    nearest.truncate(self.k);
                }
            }
        }
        let threshold = *nearest.last().expect("memory is non-empty");
        let mut votes = vec![0usize; self.index.classes.len()];
        for ((_, counts), &d) in self.index.instances.iter().zip(&distances) {
            if d <= threshold {
                for &(cid, n) in counts {
                    votes[cid] += n;
                }
            }
        }
        self.prior
            .pick(
                self.index
                    .classes
                    .iter()
                    .zip(&votes)
                    .filter(|(_, &n)| n > 0)
                    .map(|(c, &n)| (c.as_str(), n as f64)),
            )
            .expect("at least one neighbour")
            .to_string()
    }
}
