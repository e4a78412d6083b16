//! The truth-value-potential laboratory: finite micro-languages where every
//! sentence has an exactly computable truth value, plus the distributional
//! oracles and experiments run against trained embeddings.

pub mod cooccur;
pub mod stats;
pub mod tvp;
pub mod world;

pub use cooccur::{build_cooccurrence, jsd_base2, CooccurrenceModel};
pub use stats::{correlation_experiment, spearman, CorrelationOutcome};
pub use tvp::{
    class_recovery_score, compute_tvp_classes, designed_partition, RecoveryScore, TvpPartition,
    Witness,
};
pub use world::{
    corpus_of_truths, corrupt_corpus, enumerate_sentences, generate_world, Denotation,
    MicroGrammar, MicroWorld, SentenceRecord, Template,
};
