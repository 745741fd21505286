//! Flat, versioned text format for trained models.
//!
//! ```text
//! chunkens-model 1
//! kind knn
//! encoding iob
//! window left_words=2 right_words=1 ...
//! <kind-specific lines>
//! ```
//!
//! Every value is a whitespace-free token, so each line splits on spaces.
//! Weights are written in shortest round-trip form, making load(save(m)) exact.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use super::{
    BaselineTable, ClassPrior, IGTreeModel, IGTreeNode, KnnModel, MaxEntModel, ModelKind,
    OutputEncoding, Rule, RuleSet, TrainedModel,
};
use crate::error::{Error, Result};
use crate::features::{Dataset, FeatureVector, Weighting, WindowConfig};

const MAGIC: &str = "chunkens-model";
const VERSION: &str = "1";

pub fn save_model(model: &TrainedModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "kind {}", model.kind_name());
    let _ = writeln!(out, "encoding {}", model.encoding);
    match &model.window {
        Some(w) => {
            let _ = writeln!(out, "window {}", w.to_pairs());
        }
        None => out.push_str("window none\n"),
    }
    match &model.kind {
        ModelKind::Baseline(t) => {
            let _ = writeln!(out, "fallback {}", t.fallback);
            for (pos, tag) in &t.table {
                let _ = writeln!(out, "entry {pos} {tag}");
            }
        }
        ModelKind::Knn(m) => {
            let _ = writeln!(out, "k {}", m.k);
            let _ = writeln!(out, "weighting {}", m.weighting);
            let _ = writeln!(out, "weights{}", join_prefixed(m.weights.iter()));
            let _ = writeln!(out, "slots{}", join_prefixed(m.memory.slot_names.iter()));
            for (v, c) in &m.memory.items {
                let _ = writeln!(out, "item {c}{}", join_prefixed(v.values.iter()));
            }
        }
        ModelKind::IGTree(m) => {
            let _ = writeln!(out, "order{}", join_prefixed(m.order.iter()));
            let _ = writeln!(out, "root {}", m.root.default);
            fn walk(out: &mut String, node: &IGTreeNode, depth: usize) {
                for (value, child) in &node.children {
                    let _ = writeln!(out, "node {depth} {value} {}", child.default);
                    walk(out, child, depth + 1);
                }
            }
            walk(&mut out, &m.root, 1);
        }
        ModelKind::MaxEnt(m) => {
            let _ = writeln!(out, "classes{}", join_prefixed(m.classes.iter()));
            for (class, n) in m.prior.counts() {
                let _ = writeln!(out, "prior {class} {n}");
            }
            let _ = writeln!(
                out,
                "correction {} {}",
                m.correction_constant, m.correction_weight
            );
            for ((slot, value), feats) in &m.predicates {
                for (y, w) in feats {
                    let _ = writeln!(out, "feature {slot} {value} {y} {w}");
                }
            }
        }
        ModelKind::Rules(r) => {
            let _ = writeln!(out, "default {}", r.default);
            let _ = writeln!(out, "focus {}", r.focus_slot);
            for rule in &r.rules {
                let _ = write!(
                    out,
                    "rule {} {} {} {}",
                    rule.conclusion,
                    rule.accuracy,
                    rule.support,
                    rule.premises.len()
                );
                for (s, v) in &rule.premises {
                    let _ = write!(out, " {s} {v}");
                }
                out.push('\n');
            }
        }
    }
    out
}

fn join_prefixed<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| format!(" {x}")).collect()
}

struct Reader<'a> {
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            lines: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            line: self.last,
            message: message.into(),
        }
    }

    /// Next line, which must start with `key`; returns the remaining fields.
    fn expect(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (n, line) = self
            .lines
            .next()
            .ok_or_else(|| self.err(format!("missing '{key}' line")))?;
        self.last = n + 1;
        let mut fields = line.split(' ');
        if fields.next() != Some(key) {
            return Err(self.err(format!("expected '{key}'")));
        }
        Ok(fields.filter(|f| !f.is_empty()).collect())
    }

    /// Consumes the next line if it starts with `key`.
    fn next_if(&mut self, key: &str) -> Option<Vec<&'a str>> {
        let &(_, line) = self.lines.peek()?;
        if line.split(' ').next() == Some(key) {
            self.expect(key).ok()
        } else {
            None
        }
    }

    fn single(&mut self, key: &str) -> Result<&'a str> {
        let f = self.expect(key)?;
        match f.as_slice() {
            [v] => Ok(v),
            _ => Err(self.err(format!("'{key}' takes one value"))),
        }
    }

    fn parse<T: FromStr>(&self, s: &str) -> Result<T> {
        s.parse()
            .map_err(|_| self.err(format!("invalid value '{s}'")))
    }

    fn finish(&mut self) -> Result<()> {
        if let Some((n, line)) = self.lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::Format {
                line: n + 1,
                message: format!("unexpected line '{line}'"),
            });
        }
        Ok(())
    }
}

pub fn load_model(text: &str) -> Result<TrainedModel> {
    let mut r = Reader::new(text);
    let header = r.expect(MAGIC)?;
    if header != [VERSION] {
        return Err(r.err(format!("unsupported version {header:?}")));
    }
    let kind = r.single("kind")?;
    let encoding: OutputEncoding = r.single("encoding")?.parse()?;
    let window_fields = r.expect("window")?;
    let window = if window_fields == ["none"] {
        None
    } else {
        Some(window_fields.join(" ").parse::<WindowConfig>()?)
    };
    let model_kind = match kind {
        "baseline" => {
            let fallback = r.single("fallback")?.to_string();
            let mut table = BTreeMap::new();
            while let Some(f) = r.next_if("entry") {
                match f.as_slice() {
                    [pos, tag] => {
                        table.insert(pos.to_string(), tag.to_string());
                    }
                    _ => return Err(r.err("entry takes a POS and a tag")),
                }
            }
            ModelKind::Baseline(BaselineTable { table, fallback })
        }
        "knn" => {
            let k = r.single("k")?;
            let k: usize = r.parse(k)?;
            let weighting: Weighting = r.single("weighting")?.parse()?;
            let weights = r
                .expect("weights")?
                .iter()
                .map(|w| r.parse::<f64>(w))
                .collect::<Result<Vec<_>>>()?;
            let slots: Vec<String> = r.expect("slots")?.iter().map(|s| s.to_string()).collect();
            let mut memory = Dataset::new(slots);
            while let Some(f) = r.next_if("item") {
                let (class, values) = f.split_first().ok_or_else(|| r.err("item without class"))?;
                memory
                    .push(
                        FeatureVector::new(values.iter().map(|v| v.to_string()).collect()),
                        *class,
                    )
                    .map_err(|e| r.err(e.to_string()))?;
            }
            ModelKind::Knn(KnnModel::from_parts(memory, weights, k, weighting)?)
        }
        "igtree" => {
            let order = r
                .expect("order")?
                .iter()
                .map(|s| r.parse::<usize>(s))
                .collect::<Result<Vec<_>>>()?;
            let root_default = r.single("root")?.to_string();
            let mut stack = vec![IGTreeNode {
                default: root_default,
                children: BTreeMap::new(),
            }];
            let mut values: Vec<String> = Vec::new();
            while let Some(f) = r.next_if("node") {
                let [depth, value, default] = f.as_slice() else {
                    return Err(r.err("node takes depth, value and class"));
                };
                let depth: usize = r.parse(depth)?;
                if depth == 0 || depth > stack.len() || depth > order.len() {
                    return Err(r.err(format!("bad node depth {depth}")));
                }
                while stack.len() > depth {
                    let child = stack.pop().expect("depth checked");
                    let v = values.pop().expect("value per child");
                    stack.last_mut().expect("root").children.insert(v, child);
                }
                stack.push(IGTreeNode {
                    default: default.to_string(),
                    children: BTreeMap::new(),
                });
                values.push(value.to_string());
            }
            while stack.len() > 1 {
                let child = stack.pop().expect("non-root");
                let v = values.pop().expect("value per child");
                stack.last_mut().expect("root").children.insert(v, child);
            }
            ModelKind::IGTree(IGTreeModel {
                order,
                root: stack.pop().expect("root"),
            })
        }
        "maxent" => {
            let classes: Vec<String> = r.expect("classes")?.iter().map(|s| s.to_string()).collect();
            let mut prior = BTreeMap::new();
            while let Some(f) = r.next_if("prior") {
                let [class, n] = f.as_slice() else {
                    return Err(r.err("prior takes a class and a count"));
                };
                prior.insert(class.to_string(), r.parse::<usize>(n)?);
            }
            let corr = r.expect("correction")?;
            let [c, w] = corr.as_slice() else {
                return Err(r.err("correction takes a constant and a weight"));
            };
            let (correction_constant, correction_weight) = (r.parse::<f64>(c)?, r.parse::<f64>(w)?);
            let mut predicates: BTreeMap<(usize, String), Vec<(usize, f64)>> = BTreeMap::new();
            while let Some(f) = r.next_if("feature") {
                let [slot, value, y, w] = f.as_slice() else {
                    return Err(r.err("feature takes slot, value, class and weight"));
                };
                let y: usize = r.parse(y)?;
                if y >= classes.len() {
                    return Err(r.err(format!("class index {y} out of range")));
                }
                predicates
                    .entry((r.parse(slot)?, value.to_string()))
                    .or_default()
                    .push((y, r.parse(w)?));
            }
            ModelKind::MaxEnt(MaxEntModel {
                classes,
                predicates,
                correction_constant,
                correction_weight,
                prior: ClassPrior::new(prior),
            })
        }
        "rules" => {
            let default = r.single("default")?.to_string();
            let focus = r.single("focus")?;
            let focus_slot: usize = r.parse(focus)?;
            let mut rules = Vec::new();
            while let Some(f) = r.next_if("rule") {
                if f.len() < 4 {
                    return Err(r.err("rule takes conclusion, accuracy, support and premises"));
                }
                let n: usize = r.parse(f[3])?;
                if f.len() != 4 + 2 * n {
                    return Err(r.err(format!("rule declares {n} premises")));
                }
                let premises = f[4..]
                    .chunks(2)
                    .map(|p| Ok((r.parse::<usize>(p[0])?, p[1].to_string())))
                    .collect::<Result<Vec<_>>>()?;
                rules.push(Rule {
                    premises,
                    conclusion: f[0].to_string(),
                    accuracy: r.parse(f[1])?,
                    support: r.parse(f[2])?,
                });
            }
            ModelKind::Rules(RuleSet {
                rules,
                default,
                focus_slot,
            })
        }
        other => return Err(r.err(format!("unknown model kind '{other}'"))),
    };
    r.finish()?;
    if window.is_none() != matches!(model_kind, ModelKind::Baseline(_)) {
        return Err(Error::Format {
            line: 4,
            message: "window presence does not match the model kind".into(),
        });
    }
    Ok(TrainedModel {
        kind: model_kind,
        window,
        encoding,
    })
}
