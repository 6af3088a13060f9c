//! Accuracy reports with FAKE as the positive class.

use serde::{Deserialize, Serialize};

use newsxai_core::corpus::Label;

use crate::encode::EncodedStory;
use crate::{Detector, ModelError};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Fake, Label::Fake) => self.true_positive += 1,
            (Label::True, Label::Fake) => self.false_positive += 1,
            (Label::True, Label::True) => self.true_negative += 1,
            (Label::Fake, Label::True) => self.false_negative += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub n: usize,
    pub accuracy: f64,
    /// None when nothing was predicted FAKE.
    pub precision: Option<f64>,
    /// None when no story is FAKE.
    pub recall: Option<f64>,
    pub confusion: Confusion,
}

impl AccuracyReport {
    pub fn from_labels(truth: &[Label], predicted: &[Label]) -> Result<Self, ModelError> {
        assert_eq!(truth.len(), predicted.len());
        if truth.is_empty() {
            return Err(ModelError::EmptyEvaluation);
        }
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            c.record(t, p);
        }
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        Ok(Self {
            n: truth.len(),
            accuracy: (c.true_positive + c.true_negative) as f64 / truth.len() as f64,
            precision: ratio(c.true_positive, c.true_positive + c.false_positive),
            recall: ratio(c.true_positive, c.true_positive + c.false_negative),
            confusion: c,
        })
    }

    pub fn from_scores(truth: &[Label], scores: &[f64]) -> Result<Self, ModelError> {
        let predicted: Vec<Label> = scores.iter().map(|&s| Label::from_score(s)).collect();
        Self::from_labels(truth, &predicted)
    }
}

pub fn evaluate(model: &dyn Detector, stories: &[EncodedStory]) -> Result<AccuracyReport, ModelError> {
    if stories.is_empty() {
        return Err(ModelError::EmptyEvaluation);
    }
    let truth: Vec<Label> = stories.iter().map(|s| s.label).collect();
    AccuracyReport::from_scores(&truth, &model.predict_scores(stories))
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Fake as F, True as T};

    #[test]
    fn three_of_four() {
        let r = AccuracyReport::from_labels(&[F, T, F, T], &[F, T, T, T]).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert_eq!(r.confusion.false_negative, 1);
        assert_eq!(r.precision, Some(1.0));
        assert_eq!(r.recall, Some(0.5));
    }

    #[test]
    fn undefined_precision() {
        let r = AccuracyReport::from_labels(&[T, T], &[T, T]).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.precision, None);
        assert_eq!(r.recall, None);
    }

    #[test]
    fn empty_is_error() {
        assert!(AccuracyReport::from_labels(&[], &[]).is_err());
    }
}
