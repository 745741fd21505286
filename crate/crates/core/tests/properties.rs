use std::collections::BTreeMap;

use chunkens::cascade::{
    cascade_bracket, collapse, CascadeConfig, Chunker, CollapseMap, HeadRule, Level,
};
use chunkens::corpus::{
    convert_scheme, encode_chunks, extract_chunks, is_properly_nested, ChunkSpan, Sentence,
    TagScheme,
};
use chunkens::ensemble::{combine_brackets, vote, CombinerWeights, VotingMethod};
use chunkens::error::Result;
use chunkens::features::{gain_ratio, information_gain, Dataset, FeatureVector};
use chunkens::learners::ClassPrior;
use chunkens::metrics::score_chunks;
use proptest::prelude::*;

const LABELS: [&str; 3] = ["NP", "VP", "PP"];

/// Sorted, disjoint spans over a sentence, as `(len, spans)`.
fn flat_spans() -> impl Strategy<Value = (usize, Vec<ChunkSpan>)> {
    prop::collection::vec((0usize..3, 1usize..4, 0usize..3), 0..8).prop_map(|parts| {
        let mut spans = Vec::new();
        let mut at = 0;
        for (gap, len, label) in parts {
            let b = at + gap;
            spans.push(ChunkSpan::new(b, b + len, LABELS[label]));
            at = b + len;
        }
        (at + 1, spans)
    })
}

fn tag_soup() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec!["O", "B-NP", "I-NP", "B-VP", "I-VP", "I-PP", "junk"]),
        0..25,
    )
    .prop_map(|v| v.into_iter().map(str::to_string).collect())
}

fn spans_for(len: usize) -> impl Strategy<Value = Vec<ChunkSpan>> {
    prop::collection::vec((0..len.max(1), 1usize..5, 0usize..3), 0..6).prop_map(move |raw| {
        raw.into_iter()
            .filter(|&(b, l, _)| b + l <= len)
            .map(|(b, l, t)| ChunkSpan::new(b, b + l, LABELS[t]))
            .collect()
    })
}

fn disjoint_sorted(spans: &[ChunkSpan]) -> bool {
    spans.windows(2).all(|w| w[0].end <= w[1].begin) && spans.iter().all(|s| s.begin < s.end)
}

fn weights(acc: &[f64], prec: &[BTreeMap<String, f64>]) -> CombinerWeights {
    CombinerWeights {
        systems: (0..acc.len()).map(|i| format!("s{i}")).collect(),
        accuracy: acc.to_vec(),
        tag_precision: prec.to_vec(),
        tag_recall: vec![BTreeMap::new(); acc.len()],
        pair_prob: BTreeMap::new(),
        prior: ClassPrior::default(),
    }
}

proptest! {
    #[test]
    fn encoding_round_trips((len, spans) in flat_spans()) {
        for scheme in [TagScheme::Iob1, TagScheme::Iob2] {
            let tags = encode_chunks(&spans, len, scheme);
            prop_assert_eq!(&extract_chunks(&tags, scheme), &spans);
        }
        let one = encode_chunks(&spans, len, TagScheme::Iob1);
        let two = convert_scheme(&one, TagScheme::Iob1, TagScheme::Iob2).unwrap();
        prop_assert_eq!(&two, &encode_chunks(&spans, len, TagScheme::Iob2));
        prop_assert_eq!(convert_scheme(&two, TagScheme::Iob2, TagScheme::Iob1).unwrap(), one);
    }

    #[test]
    fn extracted_spans_never_overlap(tags in tag_soup()) {
        let spans = extract_chunks(&tags, TagScheme::Iob2);
        prop_assert!(disjoint_sorted(&spans));
        prop_assert!(spans.iter().all(|s| s.end <= tags.len()));
    }

    #[test]
    fn swapping_gold_and_prediction_swaps_rates(
        (_len, gold) in flat_spans(),
        noise in prop::collection::vec(any::<bool>(), 8),
    ) {
        let pred: Vec<ChunkSpan> = gold
            .iter()
            .zip(noise.iter().cycle())
            .map(|(s, &shift)| if shift { ChunkSpan::new(s.begin, s.end, "NP") } else { s.clone() })
            .collect();
        let a = score_chunks(std::slice::from_ref(&gold), std::slice::from_ref(&pred)).unwrap();
        let b = score_chunks(&[pred], &[gold]).unwrap();
        prop_assert_eq!(a.precision, b.recall);
        prop_assert_eq!(a.recall, b.precision);
        prop_assert_eq!(a.f_rate, b.f_rate);
    }

    #[test]
    fn feature_weights_are_bounded(
        rows in prop::collection::vec((0u8..4, 0u8..3, 0u8..2), 1..40),
    ) {
        let mut d = Dataset::with_arity(2);
        for (a, b, c) in rows {
            let v = FeatureVector::new(vec![format!("a{a}"), format!("b{b}")]);
            d.push(v, format!("c{c}")).unwrap();
        }
        for slot in 0..2 {
            let gr = gain_ratio(&d, slot);
            prop_assert!((0.0..=1.0).contains(&gr));
            prop_assert!(information_gain(&d, slot) >= 0.0);
        }
    }

    #[test]
    fn bracket_combination_never_overlaps(
        (len, systems) in (1usize..15).prop_flat_map(|len| {
            (Just(len), prop::collection::vec(spans_for(len), 1..5))
        }),
    ) {
        let per_system: Vec<Vec<Vec<ChunkSpan>>> =
            systems.into_iter().map(|s| vec![s]).collect();
        let out = combine_brackets(&per_system, &[len], VotingMethod::Majority, None).unwrap();
        prop_assert_eq!(out.len(), 1);
        prop_assert!(disjoint_sorted(&out[0]));
        prop_assert!(out[0].iter().all(|s| s.end <= len));
    }

    #[test]
    fn simple_votes_pick_an_input(
        row in prop::collection::vec(prop::sample::select(vec!["B-NP", "I-NP", "O", "B-VP"]), 1..7),
        acc in prop::collection::vec(0.0f64..1.0, 7),
        prec in prop::collection::vec(0.0f64..1.0, 28),
    ) {
        let k = row.len();
        let precision: Vec<BTreeMap<String, f64>> = (0..k)
            .map(|s| {
                ["B-NP", "I-NP", "O", "B-VP"]
                    .iter()
                    .enumerate()
                    .map(|(i, t)| (t.to_string(), prec[s * 4 + i]))
                    .collect()
            })
            .collect();
        let w = weights(&acc[..k], &precision);
        for m in [VotingMethod::Majority, VotingMethod::TotPrecision, VotingMethod::TagPrecision] {
            let winner = vote(&row, m, Some(&w)).unwrap();
            prop_assert!(row.contains(&winner.as_str()));
        }
    }

    #[test]
    fn equal_accuracy_is_majority(
        row in prop::collection::vec(prop::sample::select(vec!["B-NP", "I-NP", "O"]), 1..8),
        a in 0.01f64..1.0,
    ) {
        let w = weights(&vec![a; row.len()], &vec![BTreeMap::new(); row.len()]);
        prop_assert_eq!(
            vote(&row, VotingMethod::TotPrecision, Some(&w)).unwrap(),
            vote(&row, VotingMethod::Majority, None).unwrap()
        );
    }

    #[test]
    fn collapse_offsets_are_exact((len, spans) in flat_spans(), first in any::<bool>()) {
        let words: Vec<String> = (0..len).map(|i| format!("w{i}")).collect();
        let sentence = Sentence::from_words_pos(&words, &words);
        let head = if first { HeadRule::First } else { HeadRule::Last };
        let (reduced, map) = collapse(&sentence, &spans, head).unwrap();
        let removed: usize = spans.iter().map(|s| s.len() - 1).sum();
        prop_assert_eq!(reduced.len(), len - removed);
        prop_assert_eq!(map.len(), reduced.len());
        let mut at = 0;
        for (i, &(b, e)) in map.intervals.iter().enumerate() {
            prop_assert_eq!(b, at);
            let h = if first { b } else { e - 1 };
            prop_assert_eq!(&reduced.tokens[i].word, &words[h]);
            at = e;
        }
        prop_assert_eq!(at, len);
        for s in &spans {
            let r = map.reduce(s).unwrap();
            prop_assert_eq!(r.len(), 1);
            prop_assert_eq!(&map.expand(&r), s);
        }
        prop_assert_eq!(CollapseMap::identity(len).compose(&map), map.clone());
        prop_assert_eq!(map.compose(&CollapseMap::identity(map.len())), map);
    }

    #[test]
    fn cascades_stay_nested(
        len in 1usize..14,
        plans in prop::collection::vec(prop::collection::vec((0usize..14, 1usize..5), 0..5), 1..6),
    ) {
        let words: Vec<String> = (0..len).map(|i| format!("w{i}")).collect();
        let sentence = Sentence::from_words_pos(&words, &words);
        let chunker = Scripted(plans);
        let spans = cascade_bracket(&sentence, &chunker, &CascadeConfig::default()).unwrap();
        prop_assert!(is_properly_nested(&spans));
        prop_assert!(spans.iter().all(|s| s.begin < s.end && s.end <= len));
    }
}

/// Returns arbitrary, possibly overlapping or out-of-range spans per pass.
struct Scripted(Vec<Vec<(usize, usize)>>);

impl Chunker for Scripted {
    fn chunk(&self, _: &Sentence, level: &Level<'_>) -> Result<Vec<ChunkSpan>> {
        Ok(self
            .0
            .get(level.depth)
            .map(|p| {
                p.iter()
                    .map(|&(b, l)| ChunkSpan::new(b, b + l, "NP"))
                    .collect()
            })
            .unwrap_or_default())
    }
}
