use chunkens::corpus::{parse_conll, Corpus, TagScheme};
use chunkens::ensemble::{cv_tuning_table, fold_partition, SystemSpec};
use chunkens::learners::{tag_corpus, train, LearnerConfig, LearnerSpec};

fn corpus() -> Corpus {
    let nouns = ["dog", "cat", "bird", "stock", "price"];
    let verbs = ["barks", "rises", "falls"];
    let mut text = String::new();
    for i in 0..23 {
        let n = nouns[i % nouns.len()];
        let v = verbs[i % verbs.len()];
        if i % 4 == 0 {
            text.push_str(&format!("{n} NN B-NP\n{v} VBZ B-VP\n\n"));
        } else {
            text.push_str(&format!(
                "the DT B-NP\n{n} NN I-NP\n{v} VBZ B-VP\nin IN B-PP\nMay NNP B-NP\n\n"
            ));
        }
    }
    parse_conll(&text, TagScheme::Iob2, 3).unwrap()
}

/// Retrains each fold by hand and compares with the table column.
#[test]
fn table_matches_per_fold_retraining() {
    let c = corpus();
    let systems = vec![
        SystemSpec::new("base", LearnerConfig::new("baseline".parse().unwrap())),
        SystemSpec::new("tree", LearnerConfig::new(LearnerSpec::IGTree)),
        SystemSpec::new("knn", LearnerConfig::new("knn".parse().unwrap())),
    ];
    let folds = 4;
    let table = cv_tuning_table(&c, &systems, folds).unwrap();
    let parts = fold_partition(c.len(), folds);
    for (s, spec) in systems.iter().enumerate() {
        let mut correct = 0;
        let mut total = 0;
        for held in &parts {
            let train_c = Corpus {
                sentences: (0..c.len())
                    .filter(|i| !held.contains(i))
                    .map(|i| c.sentences[i].clone())
                    .collect(),
                scheme: c.scheme,
            };
            let test_c = Corpus {
                sentences: held.iter().map(|&i| c.sentences[i].unlabeled()).collect(),
                scheme: c.scheme,
            };
            let out = tag_corpus(&train(&train_c, &spec.config).unwrap(), &test_c);
            for (&i, sentence) in held.iter().zip(&out.sentences) {
                let tags = sentence.chunk_tags().unwrap();
                let gold = c.sentences[i].chunk_tags().unwrap();
                for (t, row) in tags.iter().zip(&table.sentences[i]) {
                    assert_eq!(*t, row.preds[s], "system {} sentence {i}", spec.name);
                }
                total += tags.len();
                correct += tags.iter().zip(&gold).filter(|(a, b)| a == b).count();
            }
        }
        assert_eq!(table.accuracy(s), correct as f64 / total as f64);
    }
}

#[test]
fn folds_cover_every_sentence_once() {
    for (n, k) in [(10, 3), (7, 7), (100, 10)] {
        let mut seen: Vec<usize> = fold_partition(n, k).concat();
        seen.sort();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
    }
}
