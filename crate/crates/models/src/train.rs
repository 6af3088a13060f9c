//! Training configuration, the shared minibatch loop, and gradient checking.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use newsxai_core::rng::{self, Rng};

use crate::autodiff::{Adam, Gradients, ParamStore, Tape, Var};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub hidden_size: usize,
    pub embedding_dim: usize,
    pub attention_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub dropout: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden_size: 64,
            embedding_dim: 100,
            attention_size: 32,
            epochs: 3,
            learning_rate: 0.005,
            batch_size: 32,
            dropout: 0.2,
            seed: 7,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), crate::ModelError> {
        if self.hidden_size == 0 || self.embedding_dim == 0 || self.attention_size == 0 {
            return Err(crate::ModelError::Config("layer sizes must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(crate::ModelError::Config("batch_size must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(crate::ModelError::Config("dropout must be in [0, 1)".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(crate::ModelError::Config("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

/// Mean training loss per epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epoch_losses: Vec<f64>,
}

impl TrainingHistory {
    pub fn decreased(&self) -> bool {
        match (self.epoch_losses.first(), self.epoch_losses.last()) {
            (Some(first), Some(last)) => self.epoch_losses.len() > 1 && last < first,
            _ => false,
        }
    }
}

/// A differentiable model trained on items of type `Item`.
pub trait Trainable {
    type Item;

    fn params(&self) -> &ParamStore;
    fn params_mut(&mut self) -> &mut ParamStore;

    /// Builds the batch loss on `tape`. Dropout is active when `rng` is Some.
    fn batch_loss(&self, tape: &mut Tape, batch: &[&Self::Item], rng: Option<&mut Rng>) -> Var;
}

/// Shuffled minibatch Adam over `items`.
pub fn fit<M: Trainable>(model: &mut M, items: &[M::Item], cfg: &ModelConfig, stream: &str) -> TrainingHistory {
    let mut order_rng = rng::seeded(cfg.seed, &format!("{stream}/order"));
    let mut dropout_rng = rng::seeded(cfg.seed, &format!("{stream}/dropout"));
    let mut opt = Adam::new(model.params(), cfg.learning_rate);
    let mut history = TrainingHistory::default();
    let mut order: Vec<usize> = (0..items.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut order_rng);
        let mut total = 0.0;
        let mut seen = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&M::Item> = chunk.iter().map(|&i| &items[i]).collect();
            let (loss, grads) = {
                let mut tape = Tape::new(model.params());
                let loss = model.batch_loss(&mut tape, &batch, Some(&mut dropout_rng));
                (tape.value(loss)[[0, 0]], tape.backward(loss))
            };
            opt.step(model.params_mut(), &grads);
            total += loss * batch.len() as f64;
            seen += batch.len();
        }
        history.epoch_losses.push(total / seen.max(1) as f64);
    }
    history
}

/// Result of comparing analytic gradients to central finite differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub checked: usize,
    pub max_relative_error: f64,
    pub worst_param: String,
}

/// Loss and gradients without dropout.
pub fn loss_and_grads<M: Trainable>(model: &M, batch: &[&M::Item]) -> (f64, Gradients) {
    let mut tape = Tape::new(model.params());
    let loss = model.batch_loss(&mut tape, batch, None);
    (tape.value(loss)[[0, 0]], tape.backward(loss))
}

/// Checks up to `per_param` randomly chosen entries of every parameter.
///
/// Relative error is `|analytic - numeric| / max(|analytic|, |numeric|)`;
/// entries where both magnitudes are below `1e-7` are compared on absolute
/// error instead, since their ratio is dominated by rounding.
pub fn gradient_check<M: Trainable>(model: &mut M, batch: &[&M::Item], per_param: usize, seed: u64) -> GradCheckReport {
    let eps = 1e-5;
    let (_, grads) = loss_and_grads(model, batch);
    let mut r = rng::seeded(seed, "gradcheck");
    let mut report = GradCheckReport {
        checked: 0,
        max_relative_error: 0.0,
        worst_param: String::new(),
    };
    let ids: Vec<_> = model.params().ids().collect();
    for id in ids {
        let (rows, cols) = model.params().get(id).dim();
        let analytic = grads.get(id).cloned();
        for _ in 0..per_param.min(rows * cols) {
            let (i, j) = (r.random_range(0..rows), r.random_range(0..cols));
            let orig = model.params().get(id)[[i, j]];
            model.params_mut().get_mut(id)[[i, j]] = orig + eps;
            let up = loss_and_grads(model, batch).0;
            model.params_mut().get_mut(id)[[i, j]] = orig - eps;
            let down = loss_and_grads(model, batch).0;
            model.params_mut().get_mut(id)[[i, j]] = orig;
            let numeric = (up - down) / (2.0 * eps);
            let a = analytic.as_ref().map(|g| g[[i, j]]).unwrap_or(0.0);
            let scale = a.abs().max(numeric.abs());
            let err = if scale < 1e-7 {
                (a - numeric).abs()
            } else {
                (a - numeric).abs() / scale
            };
            report.checked += 1;
            if err > report.max_relative_error {
                report.max_relative_error = err;
                report.worst_param = model.params().name(id).to_string();
            }
        }
    }
    report
}
