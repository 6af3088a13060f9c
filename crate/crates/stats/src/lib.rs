//! Inferential statistics for the study: one-way ANOVA, Tukey-Kramer
//! post-hoc, Levene, Shapiro-Wilk and Pearson, plus the analysis pipeline
//! over per-session metrics.

use thiserror::Error;

pub mod analysis;
pub mod dist;
pub mod inference;

pub use analysis::{analyze_study, render_text, AnalysisPlan, AnalysisReport, AnalysisRow, GroupTest, Measure};
pub use inference::{
    absolute_deviations, anova_oneway, levene, pearson, shapiro_wilk, t_test_pooled, tukey_hsd, Center, GroupSample,
    PairwiseRow, StatsResult,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatsError {
    #[error("at least 2 groups required, got {0}")]
    TooFewGroups(usize),
    #[error("group {group} has {n} observation(s); at least 2 required")]
    TooFewObservations { group: String, n: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("constant input")]
    ConstantInput,
    #[error("inputs differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("sample size {0} outside the supported range")]
    SampleSize(usize),
}
