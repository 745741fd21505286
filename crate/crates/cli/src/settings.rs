//! Shared knobs and the `key = value` config file.
//!
//! File entries are spliced into the argument list as `--key=value` right
//! after the subcommand, and every subcommand lets later flags override
//! earlier ones, so a flag on the command line beats the file and the file
//! beats the built-in default.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chunkens::cascade::HeadRule;
use chunkens::corpus::TagScheme;
use chunkens::ensemble::{CombinationMethod, SystemSpec};
use chunkens::features::{Weighting, WindowConfig};
use chunkens::learners::{LearnerConfig, LearnerSpec, MaxEntConfig, OutputEncoding, RulesConfig};
use clap::{ArgAction, Args, CommandFactory, ValueEnum};

use crate::{Cli, UsageError};

#[derive(Debug, Args)]
pub struct Common {
    /// Config file of `key = value` lines; flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Tag scheme of chunk files (iob1 or iob2).
    #[arg(long, default_value = "iob2")]
    pub scheme: TagScheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Kv,
}

#[derive(Debug, Args)]
pub struct ReportKnobs {
    /// β of the F rate.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Report layout.
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct LearnerKnobs {
    /// Number of distance regions voting in k-NN.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Feature weighting for k-NN (gain_ratio or info_gain).
    #[arg(long, default_value = "gain_ratio")]
    pub weighting: Weighting,
    /// GIS iterations for maxent.
    #[arg(long, default_value_t = 100)]
    pub iterations: usize,
    /// Minimum feature count for maxent.
    #[arg(long, default_value_t = 2)]
    pub cutoff: usize,
    /// Gaussian prior width for maxent.
    #[arg(long, default_value_t = f64::INFINITY)]
    pub sigma: f64,
    /// Accuracy threshold of the rule learner.
    #[arg(long, default_value_t = 0.95)]
    pub threshold: f64,
    /// Fewest items a refined rule may cover.
    #[arg(long, default_value_t = 2)]
    pub min_support: usize,
    /// Output encoding of baseline and rule learners (iob or io).
    #[arg(long, default_value = "iob")]
    pub encoding: OutputEncoding,
    #[command(flatten)]
    pub window: WindowKnobs,
}

/// Window overrides; unset keys keep the learner's own window.
#[derive(Debug, Args)]
pub struct WindowKnobs {
    /// [default: learner window]
    #[arg(long)]
    pub left_words: Option<usize>,
    /// [default: learner window]
    #[arg(long)]
    pub right_words: Option<usize>,
    /// [default: learner window]
    #[arg(long)]
    pub left_pos: Option<usize>,
    /// [default: learner window]
    #[arg(long)]
    pub right_pos: Option<usize>,
    /// [default: learner window]
    #[arg(long)]
    pub left_chunk_tags: Option<usize>,
    /// [default: learner window]
    #[arg(long)]
    pub use_focus_word: Option<bool>,
    /// [default: learner window]
    #[arg(long)]
    pub use_focus_pos: Option<bool>,
    /// [default: learner window]
    #[arg(long)]
    pub complex_pairs: Option<bool>,
}

impl WindowKnobs {
    fn apply(&self, mut w: WindowConfig) -> WindowConfig {
        let counts = [
            (self.left_words, &mut w.left_words),
            (self.right_words, &mut w.right_words),
            (self.left_pos, &mut w.left_pos),
            (self.right_pos, &mut w.right_pos),
            (self.left_chunk_tags, &mut w.left_chunk_tags),
        ];
        for (v, slot) in counts {
            if let Some(v) = v {
                *slot = v;
            }
        }
        let flags = [
            (self.use_focus_word, &mut w.use_focus_word),
            (self.use_focus_pos, &mut w.use_focus_pos),
            (self.complex_pairs, &mut w.complex_pairs),
        ];
        for (v, slot) in flags {
            if let Some(v) = v {
                *slot = v;
            }
        }
        w
    }
}

impl LearnerKnobs {
    pub fn config(&self, learner: &str) -> anyhow::Result<LearnerConfig> {
        let spec = match learner {
            "baseline" => LearnerSpec::Baseline {
                encoding: self.encoding,
            },
            "knn" | "ib1ig" => LearnerSpec::Knn {
                k: self.k,
                weighting: self.weighting,
            },
            "igtree" => LearnerSpec::IGTree,
            "maxent" => LearnerSpec::MaxEnt(MaxEntConfig {
                iterations: self.iterations,
                cutoff: self.cutoff,
                sigma: self.sigma,
            }),
            "rules" | "allis" => LearnerSpec::Rules(RulesConfig {
                threshold: self.threshold,
                min_support: self.min_support,
                encoding: self.encoding,
            }),
            other => bail!(UsageError(format!("unknown learner '{other}'"))),
        };
        let mut config = LearnerConfig::new(spec);
        if !matches!(config.spec, LearnerSpec::Baseline { .. }) {
            config.window = self.window.apply(config.window);
        }
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct SystemKnobs {
    /// Base systems as comma-separated `name=learner` or `learner` items.
    #[arg(long, default_value = "knn,igtree,maxent,rules")]
    pub systems: String,
    #[command(flatten)]
    pub learner: LearnerKnobs,
}

impl SystemKnobs {
    pub fn specs(&self) -> anyhow::Result<Vec<SystemSpec>> {
        self.systems
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|item| {
                let (name, learner) = item.split_once('=').unwrap_or((item, item));
                Ok(SystemSpec::new(name, self.learner.config(learner)?))
            })
            .collect()
    }
}

#[derive(Debug, Args)]
pub struct CombineKnobs {
    /// Combination method, e.g. majority, tag-pair, stacked-igtree-pos, best-3.
    #[arg(long, default_value = "majority")]
    pub method: CombinationMethod,
    /// Vote on chunk starts and ends instead of tags.
    #[arg(long, default_value_t = false, num_args = 0..=1, default_missing_value = "true", action = ArgAction::Set)]
    pub bracket_level: bool,
}

#[derive(Debug, Args)]
pub struct CascadeKnobs {
    /// Most passes per sentence.
    #[arg(long, default_value_t = 5)]
    pub max_depth: usize,
    /// Token a collapsed phrase keeps (last or first).
    #[arg(long, default_value = "last")]
    pub head: HeadRule,
}

/// Every long flag of every subcommand, in file-key form.
fn known_keys() -> BTreeSet<String> {
    Cli::command()
        .get_subcommands()
        .flat_map(|s| s.get_arguments().filter_map(|a| a.get_long()).map(key_form))
        .filter(|k| k != "config" && k != "help")
        .collect()
}

fn key_form(long: &str) -> String {
    long.replace('-', "_")
}

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(2);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

/// Reads `key = value` lines; `#` starts a comment line.
pub fn read_config(path: &Path) -> anyhow::Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let known = known_keys();
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!(UsageError(format!(
                "{}:{}: expected key = value",
                path.display(),
                n + 1
            )));
        };
        let (k, v) = (k.trim(), v.trim());
        if !known.contains(k) {
            bail!(UsageError(format!(
                "{}:{}: unknown key '{k}'",
                path.display(),
                n + 1
            )));
        }
        if !seen.insert(k.to_string()) {
            bail!(UsageError(format!(
                "{}:{}: key '{k}' given twice",
                path.display(),
                n + 1
            )));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Splices config file entries in front of the subcommand's own flags.
pub fn expand_args(args: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let sub = args[1].to_string_lossy().to_string();
    let cmd = Cli::command();
    let Some(sc) = cmd.get_subcommands().find(|s| s.get_name() == sub) else {
        return Ok(args);
    };
    let accepted: BTreeSet<String> = sc
        .get_arguments()
        .filter_map(|a| a.get_long())
        .map(key_form)
        .collect();
    let mut out = args[..2].to_vec();
    for (k, v) in read_config(&path)? {
        if accepted.contains(&k) {
            out.push(format!("--{}={v}", k.replace('_', "-")).into());
        }
    }
    out.extend_from_slice(&args[2..]);
    Ok(out)
}
