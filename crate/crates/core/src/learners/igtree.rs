use std::collections::BTreeMap;

use super::ClassPrior;
use crate::error::{Error, Result};
use crate::features::{gain_ratio, Dataset, FeatureVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IGTreeNode {
    /// Modal class of the training items reaching this node.
    pub default: String,
    pub children: BTreeMap<String, IGTreeNode>,
}

/// Decision tree that tests slots in a fixed order of decreasing gain ratio.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IGTreeModel {
    pub order: Vec<usize>,
    pub root: IGTreeNode,
}

/// Slots sorted by gain ratio, highest first; equal ratios keep slot order.
pub fn feature_order(dataset: &Dataset) -> Vec<usize> {
    let ratios: Vec<f64> = (0..dataset.arity())
        .map(|s| gain_ratio(dataset, s))
        .collect();
    let mut order: Vec<usize> = (0..dataset.arity()).collect();
    order.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]).then(a.cmp(&b)));
    order
}

pub fn train_igtree(dataset: &Dataset) -> Result<IGTreeModel> {
    if dataset.is_empty() {
        return Err(Error::Training("empty dataset".into()));
    }
    let prior = ClassPrior::from_dataset(dataset);
    let order = feature_order(dataset);
    let items: Vec<usize> = (0..dataset.len()).collect();
    let root = build(dataset, &prior, &order, 0, &items);
    Ok(IGTreeModel { order, root })
}

fn build(
    dataset: &Dataset,
    prior: &ClassPrior,
    order: &[usize],
    depth: usize,
    items: &[usize],
) -> IGTreeNode {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for &i in items {
        *counts.entry(dataset.items[i].1.as_str()).or_default() += 1;
    }
    let default = prior
        .pick(counts.iter().map(|(c, &n)| (*c, n as f64)))
        .expect("non-empty node")
        .to_string();
    let mut children = BTreeMap::new();
    if counts.len() > 1 && depth < order.len() {
        let slot = order[depth];
        let mut parts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for &i in items {
            parts
                .entry(dataset.items[i].0.values[slot].as_str())
                .or_default()
                .push(i);
        }
        for (value, part) in parts {
            children.insert(
                value.to_string(),
                build(dataset, prior, order, depth + 1, &part),
            );
        }
    }
    IGTreeNode { default, children }
}

impl IGTreeModel {
    pub fn predict(&self, vector: &FeatureVector) -> String {
        let mut node = &self.root;
        for &slot in &self.order {
            match node.children.get(&vector.values[slot]) {
                Some(child) => node = child,
                None => break,
            }
        }
        node.default.clone()
    }

    pub fn depth(&self) -> usize {
        fn walk(n: &IGTreeNode) -> usize {
            n.children.values().map(|c| 1 + walk(c)).max().unwrap_or(0)
        }
        walk(&self.root)
    }
}
