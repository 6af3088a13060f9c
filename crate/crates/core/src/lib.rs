//! Data layer for the explainable news review platform.
//!
//! [`corpus`] holds claims and their related articles, [`textprep`] turns text
//! into token ids for the detectors, and [`synth`] generates labelled corpora
//! with a known, planted signal that tests use as ground truth.

pub mod corpus;
pub mod rng;
pub mod synth;
pub mod textprep;

pub use corpus::{Corpus, CorpusError, CorpusSplit, Label, NewsStory, RelatedArticle, SplitRatios};
pub use textprep::{EmbeddingTable, SegmentedArticle, TextBounds, Vocabulary};
