//! Chunk combination by voting on start and end positions separately.

use super::table::{PredictionTable, TableRow};
use super::voting::{vote, VotingMethod};
use super::weights::{estimate_weights, CombinerWeights};
use crate::corpus::{extract_chunks, ChunkSpan, TagScheme};
use crate::error::{Error, Result};

/// Vote cast where no chunk starts (or ends).
pub const NO_BRACKET: &str = "-";

/// Weights for the start stream and the end stream.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketWeights {
    pub start: CombinerWeights,
    pub end: CombinerWeights,
}

/// Per-token start and end votes for one sentence's spans.
pub fn bracket_votes(spans: &[ChunkSpan], len: usize) -> (Vec<String>, Vec<String>) {
    let mut starts = vec![NO_BRACKET.to_string(); len];
    let mut ends = vec![NO_BRACKET.to_string(); len];
    for s in spans {
        if s.begin < len && s.end >= 1 && s.end <= len {
            starts[s.begin] = s.label.clone();
            ends[s.end - 1] = s.label.clone();
        }
    }
    (starts, ends)
}

/// Rewrites a tag table as two tables of start and end votes.
pub fn bracket_tables(
    table: &PredictionTable,
    scheme: TagScheme,
) -> (PredictionTable, PredictionTable) {
    let k = table.system_count();
    let mut start = PredictionTable::new(table.systems.clone());
    let mut end = PredictionTable::new(table.systems.clone());
    for sentence in &table.sentences {
        let n = sentence.len();
        let votes: Vec<(Vec<String>, Vec<String>)> = (0..k)
            .map(|s| {
                let tags: Vec<&str> = sentence.iter().map(|r| r.preds[s].as_str()).collect();
                bracket_votes(&extract_chunks(&tags, scheme), n)
            })
            .collect();
        let gold = sentence.iter().all(|r| r.gold.is_some()).then(|| {
            let tags: Vec<&str> = sentence
                .iter()
                .map(|r| r.gold.as_deref().expect("checked"))
                .collect();
            bracket_votes(&extract_chunks(&tags, scheme), n)
        });
        let make = |i: usize, pick: fn(&(Vec<String>, Vec<String>)) -> &Vec<String>| TableRow {
            word: sentence[i].word.clone(),
            gold: gold.as_ref().map(|g| pick(g)[i].clone()),
            pos: sentence[i].pos.clone(),
            preds: votes.iter().map(|v| pick(v)[i].clone()).collect(),
        };
        start
            .sentences
            .push((0..n).map(|i| make(i, |v| &v.0)).collect());
        end.sentences
            .push((0..n).map(|i| make(i, |v| &v.1)).collect());
    }
    (start, end)
}

pub fn estimate_bracket_weights(
    tuning: &PredictionTable,
    scheme: TagScheme,
) -> Result<BracketWeights> {
    let (start, end) = bracket_tables(tuning, scheme);
    Ok(BracketWeights {
        start: estimate_weights(&start)?,
        end: estimate_weights(&end)?,
    })
}

/// Pairs surviving starts and ends into chunks.
///
/// A start of type T closes at the nearest end of type T at or after it,
/// provided no later start of type T comes first. Unmatched brackets are
/// dropped, and spans overlapping an earlier kept span are discarded.
pub fn restore_chunks<S: AsRef<str>>(starts: &[S], ends: &[S]) -> Vec<ChunkSpan> {
    let n = starts.len().min(ends.len());
    let mut candidates = Vec::new();
    for b in 0..n {
        let t = starts[b].as_ref();
        if t == NO_BRACKET {
            continue;
        }
        for e in b..n {
            if e > b && starts[e].as_ref() == t {
                break;
            }
            if ends[e].as_ref() == t {
                candidates.push(ChunkSpan::new(b, e + 1, t));
                break;
            }
        }
    }
    let mut kept: Vec<ChunkSpan> = Vec::with_capacity(candidates.len());
    for c in candidates {
        if kept.last().is_none_or(|k| k.end <= c.begin) {
            kept.push(c);
        }
    }
    kept
}

/// Combines chunk outputs, indexed `[system][sentence]`, by voting per
/// token on starts and ends and restoring chunks from the two streams.
pub fn combine_brackets(
    systems: &[Vec<Vec<ChunkSpan>>],
    lengths: &[usize],
    method: VotingMethod,
    weights: Option<&BracketWeights>,
) -> Result<Vec<Vec<ChunkSpan>>> {
    if systems.is_empty() {
        return Err(Error::Contract("no systems to combine".into()));
    }
    if let Some(bad) = systems.iter().position(|s| s.len() != lengths.len()) {
        return Err(Error::Alignment(format!(
            "system {bad} covers {} sentences, expected {}",
            systems[bad].len(),
            lengths.len()
        )));
    }
    let mut out = Vec::with_capacity(lengths.len());
    for (si, &len) in lengths.iter().enumerate() {
        let votes: Vec<(Vec<String>, Vec<String>)> =
            systems.iter().map(|s| bracket_votes(&s[si], len)).collect();
        let mut starts = Vec::with_capacity(len);
        let mut ends = Vec::with_capacity(len);
        for i in 0..len {
            let row: Vec<&str> = votes.iter().map(|v| v.0[i].as_str()).collect();
            starts.push(vote(&row, method, weights.map(|w| &w.start))?);
            let row: Vec<&str> = votes.iter().map(|v| v.1[i].as_str()).collect();
            ends.push(vote(&row, method, weights.map(|w| &w.end))?);
        }
        out.push(restore_chunks(&starts, &ends));
    }
    Ok(out)
}

/// Span lists per system and sentence lengths from a table.
pub fn table_spans(
    table: &PredictionTable,
    scheme: TagScheme,
) -> (Vec<Vec<Vec<ChunkSpan>>>, Vec<usize>) {
    let spans = (0..table.system_count())
        .map(|s| table.system_spans(s, scheme))
        .collect();
    let lengths = table.sentences.iter().map(Vec::len).collect();
    (spans, lengths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(b: usize, e: usize, l: &str) -> ChunkSpan {
        ChunkSpan::new(b, e, l)
    }

    #[test]
    fn majority_per_stream_then_restore() {
        // starts at 0: {NP, NP, none}; ends at 1: {NP, NP, none}
        let systems = vec![
            vec![vec![sp(0, 2, "NP")]],
            vec![vec![sp(0, 2, "NP")]],
            vec![vec![sp(2, 3, "NP")]],
        ];
        let out = combine_brackets(&systems, &[3], VotingMethod::Majority, None).unwrap();
        assert_eq!(out, vec![vec![sp(0, 2, "NP")]]);
    }

    #[test]
    fn start_and_end_chosen_independently() {
        // A says NP[0,3), B says NP[0,1), C says NP[1,3): starts {0:2 votes},
        // ends {2:2 votes} give NP[0,3).
        let systems = vec![
            vec![vec![sp(0, 3, "NP")]],
            vec![vec![sp(0, 1, "NP")]],
            vec![vec![sp(1, 3, "NP")]],
        ];
        let out = combine_brackets(&systems, &[3], VotingMethod::Majority, None).unwrap();
        assert_eq!(out, vec![vec![sp(0, 3, "NP")]]);
    }

    #[test]
    fn unanimous_is_fixed_point() {
        let s = vec![vec![sp(0, 2, "NP"), sp(2, 3, "VP"), sp(4, 6, "NP")], vec![]];
        let systems = vec![s.clone(), s.clone(), s.clone()];
        let out = combine_brackets(&systems, &[6, 2], VotingMethod::Majority, None).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn unmatched_brackets_dropped() {
        let starts = ["NP", "-", "-"];
        let ends = ["-", "-", "-"];
        assert!(restore_chunks(&starts, &ends).is_empty());
        // end of another type does not close
        assert!(restore_chunks(&["NP", "-"], &["-", "VP"]).is_empty());
        // a later start of the same type closes nothing for the earlier one
        assert_eq!(
            restore_chunks(&["NP", "NP", "-"], &["-", "-", "NP"]),
            vec![sp(1, 3, "NP")]
        );
    }

    #[test]
    fn cross_type_overlaps_resolved_by_begin() {
        let out = restore_chunks(&["NP", "VP", "-"], &["-", "NP", "VP"]);
        assert_eq!(out, vec![sp(0, 2, "NP")]);
    }

    #[test]
    fn votes_encode_brackets() {
        let (s, e) = bracket_votes(&[sp(0, 2, "NP"), sp(2, 3, "VP")], 4);
        assert_eq!(s, vec!["NP", "-", "VP", "-"]);
        assert_eq!(e, vec!["-", "NP", "VP", "-"]);
    }

    #[test]
    fn stream_tables_carry_gold() {
        let t = super::super::table::parse_table(
            "# gold pos a b\nB-NP DT B-NP O\nI-NP NN I-NP B-NP\n\n",
        )
        .unwrap();
        let (start, end) = bracket_tables(&t, TagScheme::Iob2);
        assert_eq!(start.sentences[0][0].gold.as_deref(), Some("NP"));
        assert_eq!(start.sentences[0][1].preds, vec!["-", "NP"]);
        assert_eq!(end.sentences[0][1].gold.as_deref(), Some("NP"));
        assert_eq!(end.sentences[0][0].preds, vec!["-", "-"]);
        let w = estimate_bracket_weights(&t, TagScheme::Iob2).unwrap();
        assert_eq!(w.start.accuracy, vec![1.0, 0.0]);
    }
}
