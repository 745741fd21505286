use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use chunkens::cascade::{cascade_corpus, level_training_corpus, CascadeConfig, EnsembleChunker};
use chunkens::corpus::{
    encode_chunks, io_encode, parse_conll, parse_conll_repaired, parse_nested, write_conll,
    write_nested, ChunkSpan, Corpus, NestedSentence, TagScheme,
};
use chunkens::ensemble::{
    best_n_select, cv_tuning_table, estimate_weights, parse_table, test_table, write_table,
    CombinationMethod, Combiner, CombinerWeights, PredictionTable,
};
use chunkens::learners::{load_model, save_model, tag_corpus, train, LearnerConfig, LearnerSpec};
use chunkens::metrics::{score_chunks, score_nested, score_tagged, EvalReport};

use crate::settings::{ReportFormat, ReportKnobs};
use crate::{Command, InputFormat, UsageError};

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn is_stdout(path: &Option<PathBuf>) -> bool {
    path.as_ref().is_none_or(|p| p.as_os_str() == "-")
}

fn write(path: &Option<PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))
        }
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes the artifact, and the report where it does not mix with it.
fn emit(path: &Option<PathBuf>, artifact: &str, report: Option<String>) -> anyhow::Result<()> {
    write(path, artifact)?;
    if let Some(r) = report {
        if is_stdout(path) {
            eprint!("{r}");
        } else {
            print!("{r}");
        }
    }
    Ok(())
}

fn render(report: &EvalReport, knobs: &ReportKnobs) -> String {
    let r = report.with_beta(knobs.beta);
    match knobs.format {
        ReportFormat::Text => r.to_text(),
        ReportFormat::Kv => r.to_key_values(),
    }
}

/// Reads a chunk file; two columns on the first line mean untagged input.
fn read_corpus(path: &Path, scheme: TagScheme) -> anyhow::Result<Corpus> {
    let text = read(path)?;
    let columns = match text.lines().find(|l| !l.trim().is_empty()) {
        Some(l) if l.split_whitespace().count() == 2 => 2,
        _ => 3,
    };
    parse_conll(&text, scheme, columns).with_context(|| format!("in {}", path.display()))
}

fn read_table(path: &Path) -> anyhow::Result<PredictionTable> {
    parse_table(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn read_nested(path: &Path) -> anyhow::Result<Vec<NestedSentence>> {
    parse_nested(&read(path)?).with_context(|| format!("in {}", path.display()))
}

/// Spans that contain no other span.
fn base_spans(spans: &[ChunkSpan]) -> Vec<ChunkSpan> {
    let mut out: Vec<ChunkSpan> = spans
        .iter()
        .filter(|s| {
            !spans
                .iter()
                .any(|t| (t.begin, t.end) != (s.begin, s.end) && s.contains(t))
        })
        .cloned()
        .collect();
    out.sort();
    out.dedup_by(|a, b| (a.begin, a.end) == (b.begin, b.end));
    out
}

fn labeled(corpus: Corpus, what: &str) -> anyhow::Result<Corpus> {
    if !corpus.is_labeled() {
        bail!(UsageError(format!("{what} needs chunk tags")));
    }
    Ok(corpus)
}

pub fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Convert {
            input,
            output,
            from,
            to,
            io,
            common,
        } => {
            let mut corpus = match from {
                InputFormat::Conll => read_corpus(&input, common.scheme)?.to_scheme(to)?,
                InputFormat::Nested => {
                    let sentences = read_nested(&input)?
                        .iter()
                        .map(|n| {
                            let tags = encode_chunks(&base_spans(&n.spans), n.tokens.len(), to);
                            n.sentence().with_tags(&tags)
                        })
                        .collect();
                    Corpus::new(sentences, to)?
                }
            };
            if io {
                for s in &mut corpus.sentences {
                    if let Some(tags) = s.chunk_tags() {
                        *s = s.with_tags(&io_encode(&tags));
                    }
                }
            }
            write(&output, &write_conll(&corpus))
        }
        Command::Baseline {
            train: train_path,
            test,
            output,
            encoding,
            report,
            common,
        } => {
            let train_c = labeled(read_corpus(&train_path, common.scheme)?, "--train")?;
            let test_c = labeled(read_corpus(&test, common.scheme)?, "--test")?;
            let model = train(
                &train_c,
                &LearnerConfig::new(LearnerSpec::Baseline { encoding }),
            )?;
            let out = tag_corpus(&model, &test_c.unlabeled());
            if output.is_some() {
                write(&output, &write_conll(&out))?;
            }
            print!("{}", render(&score_tagged(&test_c, &out)?, &report));
            Ok(())
        }
        Command::Train {
            train: train_path,
            model,
            learner,
            knobs,
            common,
        } => {
            let corpus = labeled(read_corpus(&train_path, common.scheme)?, "--train")?;
            let trained = train(&corpus, &knobs.config(&learner)?)?;
            write(&Some(model), &save_model(&trained))
        }
        Command::Tag {
            model,
            input,
            output,
            common,
        } => {
            let m =
                load_model(&read(&model)?).with_context(|| format!("in {}", model.display()))?;
            let corpus = read_corpus(&input, common.scheme)?;
            write(&output, &write_conll(&tag_corpus(&m, &corpus.unlabeled())))
        }
        Command::Eval {
            gold,
            pred,
            nested,
            report,
            common,
        } => {
            let r = if nested {
                score_nested(&read_nested(&gold)?, &read_nested(&pred)?)?
            } else {
                let g = labeled(read_corpus(&gold, common.scheme)?, "--gold")?;
                let p = parse_conll_repaired(&read(&pred)?, common.scheme)
                    .with_context(|| format!("in {}", pred.display()))?;
                score_tagged(&g, &p)?
            };
            print!("{}", render(&r, &report));
            Ok(())
        }
        Command::CvTune {
            train: train_path,
            output,
            folds,
            systems,
            common,
        } => {
            let corpus = labeled(read_corpus(&train_path, common.scheme)?, "--train")?;
            let table = cv_tuning_table(&corpus, &systems.specs()?, folds)?;
            write(&output, &write_table(&table))
        }
        Command::Table {
            train: train_path,
            test,
            output,
            systems,
            common,
        } => {
            let train_c = labeled(read_corpus(&train_path, common.scheme)?, "--train")?;
            let test_c = read_corpus(&test, common.scheme)?;
            let table = test_table(&train_c, &test_c, &systems.specs()?)?;
            write(&output, &write_table(&table))
        }
        Command::Weights { tuning, output, .. } => {
            let w = estimate_weights(&read_table(&tuning)?)?;
            write(&output, &w.to_text())
        }
        Command::Combine {
            table,
            tuning,
            weights,
            output,
            combine,
            report,
            common,
        } => {
            let test = read_table(&table)?;
            let combiner = match (weights, combine.method) {
                (Some(path), CombinationMethod::Vote(m)) => {
                    if combine.bracket_level {
                        bail!(UsageError(
                            "saved weights apply to tag-level voting only".into()
                        ));
                    }
                    let w = CombinerWeights::from_text(&read(&path)?)
                        .with_context(|| format!("in {}", path.display()))?;
                    Combiner::from_weights(m, w, common.scheme)
                }
                (Some(_), m) => {
                    bail!(UsageError(format!("--weights does not apply to {m}")))
                }
                (None, m) => {
                    let tuning = tuning.as_deref().map(read_table).transpose()?;
                    Combiner::fit(m, tuning.as_ref(), common.scheme, combine.bracket_level)?
                }
            };
            let out = combiner.combine(&test)?.to_scheme(common.scheme)?;
            let r = if test.has_gold() {
                let pred: Vec<Vec<ChunkSpan>> = out.chunk_spans();
                Some(render(
                    &score_chunks(&test.gold_spans(common.scheme), &pred)?,
                    &report,
                ))
            } else {
                None
            };
            emit(&output, &write_conll(&out), r)
        }
        Command::BestN {
            tuning,
            best_n,
            bracket_level,
            common,
        } => {
            let t = read_table(&tuning)?;
            let (subset, f) = best_n_select(&t, best_n, common.scheme, bracket_level)?;
            let names: Vec<&str> = subset.iter().map(|&i| t.systems[i].as_str()).collect();
            println!("subset {}", names.join(" "));
            println!("f {:.2}", 100.0 * f);
            Ok(())
        }
        Command::Cascade {
            train: train_path,
            test,
            output,
            folds,
            cascade,
            systems,
            combine,
            report,
            ..
        } => {
            let config = CascadeConfig {
                max_depth: cascade.max_depth,
                head: cascade.head,
            };
            let gold_train = read_nested(&train_path)?;
            let levels = level_training_corpus(&gold_train, &config)?;
            let specs = systems.specs()?;
            let models = specs
                .iter()
                .map(|s| Ok((s.name.clone(), train(&levels, &s.config)?)))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let tuning = if combine.method.needs_tuning() && specs.len() > 1 {
                Some(cv_tuning_table(&levels, &specs, folds)?)
            } else {
                None
            };
            let combiner = Combiner::fit(
                combine.method,
                tuning.as_ref(),
                TagScheme::Iob2,
                combine.bracket_level,
            )?;
            let chunker = EnsembleChunker { models, combiner };
            let gold_test = read_nested(&test)?;
            let sentences: Vec<_> = gold_test.iter().map(|n| n.sentence()).collect();
            let out = cascade_corpus(&sentences, &chunker, &config)?;
            let r = render(&score_nested(&gold_test, &out)?, &report);
            emit(&output, &write_nested(&out), Some(r))
        }
        Command::Report {
            tuning,
            test,
            best_n,
            bracket_level,
            beta,
            common,
        } => {
            let tune = read_table(&tuning)?;
            let t = read_table(&test)?;
            if !t.has_gold() {
                bail!(UsageError("--test table needs gold tags".into()));
            }
            if tune.systems != t.systems {
                bail!(UsageError(
                    "tuning and test tables name different systems".into()
                ));
            }
            let gold = t.gold_spans(common.scheme);
            let row = |name: &str, r: &EvalReport| {
                let r = r.with_beta(beta);
                format!(
                    "{name:<24} {:>6.2} {:>6.2} {:>6.2}\n",
                    100.0 * r.precision,
                    100.0 * r.recall,
                    100.0 * r.f_rate
                )
            };
            let mut out = format!("{:<24} {:>6} {:>6} {:>6}\n", "system", "P", "R", "F");
            for (s, name) in t.systems.iter().enumerate() {
                out.push_str(&row(
                    name,
                    &score_chunks(&gold, &t.system_spans(s, common.scheme))?,
                ));
            }
            for m in CombinationMethod::all(best_n.clamp(1, t.system_count())) {
                if bracket_level && matches!(m, CombinationMethod::Stacked { .. }) {
                    continue;
                }
                let c = Combiner::fit(m, Some(&tune), common.scheme, bracket_level)?;
                out.push_str(&row(
                    &m.to_string(),
                    &score_chunks(&gold, &c.combine_spans(&t)?)?,
                ));
            }
            print!("{out}");
            Ok(())
        }
    }
}
