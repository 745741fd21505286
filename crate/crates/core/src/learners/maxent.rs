use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ClassPrior;
use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureVector};

#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntConfig {
    /// Maximum number of GIS iterations.
    pub iterations: usize,
    /// Minimum occurrence count for a (slot value, class) feature.
    pub cutoff: usize,
    /// Gaussian prior width; infinite disables weight decay.
    pub sigma: f64,
}

impl Default for MaxEntConfig {
    fn default() -> Self {
        MaxEntConfig {
            iterations: 100,
            cutoff: 2,
            sigma: f64::INFINITY,
        }
    }
}

/// Conditional maximum-entropy model over binary (slot value, class) features.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntModel {
    pub classes: Vec<String>,
    /// Per predicate `(slot, value)`, the weight of each class feature it carries.
    pub predicates: BTreeMap<(usize, String), Vec<(usize, f64)>>,
    /// Number of active features every (item, class) pair is padded to.
    pub correction_constant: f64,
    pub correction_weight: f64,
    pub prior: ClassPrior,
}

/// Per-iteration diagnostics from GIS training.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MaxEntTrace {
    /// Training log-likelihood before each update, plus the final value.
    pub log_likelihood: Vec<f64>,
    /// Empirical and model-expected counts of every trained feature after training.
    pub empirical: Vec<f64>,
    pub expected: Vec<f64>,
    pub iterations_run: usize,
}

impl MaxEntTrace {
    pub fn max_count_gap(&self) -> f64 {
        self.empirical
            .iter()
            .zip(&self.expected)
            .map(|(e, x)| (e - x).abs())
            .fold(0.0, f64::max)
    }
}

pub fn train_maxent(dataset: &Dataset, config: &MaxEntConfig) -> Result<MaxEntModel> {
    train_maxent_traced(dataset, config).map(|(m, _)| m)
}

struct Problem {
    n_classes: usize,
    /// Active predicate ids and gold class per item.
    items: Vec<(Vec<usize>, usize)>,
    /// Class features per predicate: (class, feature id).
    pred_feats: Vec<Vec<(usize, usize)>>,
    /// Active feature count per (item, class).
    fcount: Vec<Vec<usize>>,
    empirical: Vec<f64>,
}

impl Problem {
    /// Class probabilities of item `i` under `weights`.
    fn probs(&self, i: usize, weights: &[f64], c: f64, corr: f64, out: &mut [f64]) {
        out.iter_mut()
            .enumerate()
            .for_each(|(y, s)| *s = corr * (c - self.fcount[i][y] as f64));
        for &p in &self.items[i].0 {
            for &(y, f) in &self.pred_feats[p] {
                out[y] += weights[f];
            }
        }
        softmax(out);
    }
}

fn softmax(scores: &mut [f64]) {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for s in scores.iter_mut() {
        *s = (*s - max).exp();
        z += *s;
    }
    for s in scores.iter_mut() {
        *s /= z;
    }
}

/// Trains with Generalized Iterative Scaling and returns the training trace.
pub fn train_maxent_traced(
    dataset: &Dataset,
    config: &MaxEntConfig,
) -> Result<(MaxEntModel, MaxEntTrace)> {
    if dataset.is_empty() {
        return Err(Error::Training("empty dataset".into()));
    }
    if !(config.sigma > 0.0) {
        return Err(Error::Config("sigma must be positive".into()));
    }
    let prior = ClassPrior::from_dataset(dataset);
    let classes: Vec<String> = dataset
        .items
        .iter()
        .map(|(_, c)| c.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let class_id: HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();

    let mut tallies: HashMap<(usize, &str), BTreeMap<usize, usize>> = HashMap::new();
    for (v, c) in &dataset.items {
        for (slot, value) in v.values.iter().enumerate() {
            *tallies
                .entry((slot, value.as_str()))
                .or_default()
                .entry(class_id[c.as_str()])
                .or_default() += 1;
        }
    }
    let mut keys: Vec<(usize, &str)> = tallies.keys().copied().collect();
    keys.sort();
    let mut pred_ids: HashMap<(usize, &str), usize> = HashMap::new();
    let mut pred_keys = Vec::new();
    let mut pred_feats: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut empirical = Vec::new();
    for key in keys {
        let feats: Vec<(usize, usize)> = tallies[&key]
            .iter()
            .filter(|(_, &n)| n >= config.cutoff.max(1))
            .map(|(&y, &n)| {
                empirical.push(n as f64);
                (y, empirical.len() - 1)
            })
            .collect();
        if !feats.is_empty() {
            pred_ids.insert(key, pred_keys.len());
            pred_keys.push(key);
            pred_feats.push(feats);
        }
    }

    let n_classes = classes.len();
    let items: Vec<(Vec<usize>, usize)> = dataset
        .items
        .iter()
        .map(|(v, c)| {
            let active = v
                .values
                .iter()
                .enumerate()
                .filter_map(|(slot, value)| pred_ids.get(&(slot, value.as_str())).copied())
                .collect();
            (active, class_id[c.as_str()])
        })
        .collect();
    let fcount: Vec<Vec<usize>> = items
        .iter()
        .map(|(active, _)| {
            let mut counts = vec![0; n_classes];
            for &p in active {
                for &(y, _) in &pred_feats[p] {
                    counts[y] += 1;
                }
            }
            counts
        })
        .collect();
    let c = fcount.iter().flatten().copied().max().unwrap_or(0) as f64;
    let problem = Problem {
        n_classes,
        items,
        pred_feats,
        fcount,
        empirical,
    };

    let n_feats = problem.empirical.len();
    let mut weights = vec![0.0; n_feats];
    let mut corr = 0.0;
    let emp_corr: f64 = problem
        .items
        .iter()
        .enumerate()
        .map(|(i, (_, y))| c - problem.fcount[i][*y] as f64)
        .sum();
    // The correction feature is trainable only when it is ever active on gold pairs.
    let train_corr = emp_corr > 0.0;

    let mut trace = MaxEntTrace::default();
    let mut probs = vec![0.0; n_classes];
    let tolerance = 1e-7 * dataset.len() as f64;
    let mut iteration = 0;
    loop {
        let mut expected = vec![0.0; n_feats];
        let mut exp_corr = 0.0;
        let mut ll = 0.0;
        for i in 0..problem.items.len() {
            problem.probs(i, &weights, c, corr, &mut probs);
            ll += probs[problem.items[i].1].ln();
            for &p in &problem.items[i].0 {
                for &(y, f) in &problem.pred_feats[p] {
                    expected[f] += probs[y];
                }
            }
            exp_corr += (0..problem.n_classes)
                .map(|y| probs[y] * (c - problem.fcount[i][y] as f64))
                .sum::<f64>();
        }
        if config.sigma.is_finite() {
            let s2 = config.sigma * config.sigma;
            ll -= weights
                .iter()
                .chain(std::iter::once(&corr))
                .map(|w| w * w / (2.0 * s2))
                .sum::<f64>();
        }
        trace.log_likelihood.push(ll);
        let gap = problem
            .empirical
            .iter()
            .zip(&expected)
            .map(|(e, x)| (e - x).abs())
            .chain(train_corr.then(|| (emp_corr - exp_corr).abs()))
            .fold(0.0, f64::max);
        if iteration == config.iterations || c == 0.0 || gap < tolerance {
            trace.empirical = problem.empirical.clone();
            trace.expected = expected;
            if train_corr {
                trace.empirical.push(emp_corr);
                trace.expected.push(exp_corr);
            }
            trace.iterations_run = iteration;
            break;
        }
        for f in 0..n_feats {
            weights[f] += gis_step(
                problem.empirical[f],
                expected[f],
                weights[f],
                c,
                config.sigma,
            );
        }
        if train_corr {
            corr += gis_step(emp_corr, exp_corr, corr, c, config.sigma);
        }
        iteration += 1;
    }

    let mut predicates = BTreeMap::new();
    for (key, feats) in pred_keys.iter().zip(&problem.pred_feats) {
        predicates.insert(
            (key.0, key.1.to_string()),
            feats.iter().map(|&(y, f)| (y, weights[f])).collect(),
        );
    }
    let model = MaxEntModel {
        classes,
        predicates,
        correction_constant: c,
        correction_weight: corr,
        prior,
    };
    Ok((model, trace))
}

/// One GIS update. With a finite `sigma`, solves
/// `emp - (λ+δ)/σ² = exp·e^{Cδ}` for δ by Newton's method.
fn gis_step(empirical: f64, expected: f64, weight: f64, c: f64, sigma: f64) -> f64 {
    if expected <= 0.0 {
        return 0.0;
    }
    if sigma.is_infinite() {
        return (empirical / expected).ln() / c;
    }
    let s2 = sigma * sigma;
    let mut delta = 0.0;
    for _ in 0..50 {
        let e = expected * (c * delta).exp();
        let g = empirical - (weight + delta) / s2 - e;
        let dg = -1.0 / s2 - c * e;
        let step = g / dg;
        delta -= step;
        if step.abs() < 1e-12 {
            break;
        }
    }
    delta
}

impl MaxEntModel {
    /// Class distribution for a vector, in `classes` order.
    pub fn distribution(&self, vector: &FeatureVector) -> Vec<f64> {
        let mut scores = vec![0.0; self.classes.len()];
        let mut counts = vec![0usize; self.classes.len()];
        for (slot, value) in vector.values.iter().enumerate() {
            if let Some(feats) = self.predicates.get(&(slot, value.clone())) {
                for &(y, w) in feats {
                    scores[y] += w;
                    counts[y] += 1;
                }
            }
        }
        for (s, n) in scores.iter_mut().zip(&counts) {
            *s += self.correction_weight * (self.correction_constant - *n as f64);
        }
        softmax(&mut scores);
        scores
    }

    pub fn predict(&self, vector: &FeatureVector) -> String {
        let dist = self.distribution(vector);
        self.prior
            .pick(self.classes.iter().map(String::as_str).zip(dist))
            .expect("at least one class")
            .to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(vals: &[&str]) -> FeatureVector {
        vals.iter().copied().collect()
    }

    #[test]
    fn matches_class_marginal_with_always_active_features() {
        let mut d = Dataset::with_arity(1);
        for c in ["A", "A", "A", "B"] {
            d.push(fv(&["x"]), c).unwrap();
        }
        let config = MaxEntConfig {
            cutoff: 1,
            ..MaxEntConfig::default()
        };
        let m = train_maxent(&d, &config).unwrap();
        let dist = m.distribution(&fv(&["x"]));
        assert!((dist[0] - 0.75).abs() < 1e-3, "{dist:?}");
    }

    #[test]
    fn uninformative_uniform_data_gives_uniform_distribution() {
        let mut d = Dataset::with_arity(1);
        for (v, c) in [("a", "A"), ("a", "B"), ("b", "A"), ("b", "B")] {
            d.push(fv(&[v]), c).unwrap();
        }
        let m = train_maxent(
            &d,
            &MaxEntConfig {
                cutoff: 1,
                ..Default::default()
            },
        )
        .unwrap();
        for q in ["a", "b", "c"] {
            let dist = m.distribution(&fv(&[q]));
            assert!((dist[0] - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_weights_pick_modal_class() {
        let mut d = Dataset::with_arity(1);
        for (v, c) in [("a", "A"), ("b", "B"), ("c", "B")] {
            d.push(fv(&[v]), c).unwrap();
        }
        // cutoff above every count leaves no features
        let m = train_maxent(
            &d,
            &MaxEntConfig {
                cutoff: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(m.predicates.is_empty());
        assert_eq!(m.predict(&fv(&["a"])), "B");
    }

    #[test]
    fn dominant_feature_decides() {
        let mut d = Dataset::with_arity(2);
        for _ in 0..5 {
            d.push(fv(&["k", "z"]), "B").unwrap();
            d.push(fv(&["m", "z"]), "A").unwrap();
        }
        let m = train_maxent(&d, &MaxEntConfig::default()).unwrap();
        assert_eq!(m.predict(&fv(&["k", "z"])), "B");
        assert_eq!(m.predict(&fv(&["m", "q"])), "A");
    }

    #[test]
    fn expectations_converge_and_likelihood_rises() {
        let mut d = Dataset::with_arity(2);
        let rows = [
            (["a", "x"], "P"),
            (["a", "y"], "P"),
            (["a", "x"], "N"),
            (["b", "x"], "N"),
            (["b", "y"], "N"),
            (["b", "y"], "P"),
            (["a", "y"], "P"),
            (["b", "x"], "N"),
        ];
        for (v, c) in rows {
            d.push(fv(&v), c).unwrap();
        }
        let config = MaxEntConfig {
            iterations: 2000,
            cutoff: 1,
            ..Default::default()
        };
        let (_, trace) = train_maxent_traced(&d, &config).unwrap();
        assert!(trace.max_count_gap() < 1e-3 * d.len() as f64);
        for w in trace.log_likelihood.windows(2) {
            assert!(w[1] >= w[0] - 1e-12, "{w:?}");
        }
    }

    #[test]
    fn gaussian_prior_shrinks_weights() {
        let mut d = Dataset::with_arity(1);
        for _ in 0..5 {
            d.push(fv(&["k"]), "B").unwrap();
            d.push(fv(&["m"]), "A").unwrap();
        }
        let free = train_maxent(
            &d,
            &MaxEntConfig {
                cutoff: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let tight = train_maxent(
            &d,
            &MaxEntConfig {
                cutoff: 1,
                sigma: 0.5,
                ..Default::default()
            },
        )
        .unwrap();
        let pf = free.distribution(&fv(&["k"]))[1];
        let pt = tight.distribution(&fv(&["k"]))[1];
        assert!(pt < pf && pt > 0.5, "{pt} {pf}");
    }
}
