//! Combining the outputs of several chunkers: voting, stacking, best-N
//! subset selection and start/end bracket voting, plus the tuning tables
//! that feed them.

mod brackets;
mod combine;
mod cv;
mod stacked;
mod table;
mod voting;
mod weights;

pub use brackets::{
    bracket_tables, bracket_votes, combine_brackets, estimate_bracket_weights, restore_chunks,
    table_spans, BracketWeights, NO_BRACKET,
};
pub use combine::{best_n_select, combine_corpus, subset_f, subsets, CombinationMethod, Combiner};
pub use cv::{cv_tuning_table, fold_partition, test_table, SystemSpec};
pub use stacked::{
    stacked_dataset, stacked_train, StackedClassifier, StackedLearner, StackedModel,
};
pub use table::{parse_table, write_table, PredictionTable, TableRow, NO_WORD};
pub use voting::{vote, vote_scores, VotingMethod};
pub use weights::{estimate_weights, CombinerWeights, PairTable};
