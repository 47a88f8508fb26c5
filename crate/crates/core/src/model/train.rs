//! Minibatch SGD.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::arch::ArchitectureSpec;
use super::network::{image_to_tensor, loss_and_grad, predict_tensor, ModelParams};
use crate::dataset::{CrackLevel, Manifest, Split};
use crate::imaging::{io::load_png, resize_bilinear};
use crate::metrics::ConfusionMatrix;
use crate::rng::{derive_seed, seeded_rng};
use crate::tensor::{sgd_step, Tensor};
use crate::{Error, Result};

/// Multiply the learning rate by `factor` every `every` epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDecay {
    pub every: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Network input as (height, width).
    pub model_input: (usize, usize),
    pub lr_decay: Option<StepDecay>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            epochs: 10,
            batch_size: 16,
            seed: 1,
            model_input: (120, 160),
            lr_decay: None,
        }
    }
}

impl TrainConfig {
    /// A learning rate of exactly zero is accepted and freezes the
    /// parameters (useful for evaluating an initialisation).
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be positive".into()));
        }
        let (h, w) = self.model_input;
        if h == 0 || w == 0 || h % 8 != 0 || w % 8 != 0 {
            return Err(Error::Config(format!(
                "model_input {h}x{w} must be positive and divisible by 8"
            )));
        }
        if let Some(d) = self.lr_decay {
            if d.every == 0 || !(d.factor > 0.0 && d.factor.is_finite()) {
                return Err(Error::Config(format!("invalid lr_decay {d:?}")));
            }
        }
        Ok(())
    }

    pub fn rate_for_epoch(&self, epoch: usize) -> f64 {
        match self.lr_decay {
            Some(d) => self.learning_rate * d.factor.powi((epoch / d.every) as i32),
            None => self.learning_rate,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Example {
    pub input: Tensor,
    pub level: CrackLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub learning_rate: f64,
    pub train_loss: f64,
    pub val_accuracy: f64,
}

/// Load every record of `split`, resized to `(height, width)`. Manifest
/// paths are resolved against `base_dir`.
pub fn load_examples(
    manifest: &Manifest,
    base_dir: &Path,
    split: Split,
    (height, width): (usize, usize),
) -> Result<Vec<Example>> {
    manifest
        .split(split)
        .map(|r| {
            let img = load_png(base_dir.join(&r.image_path))?;
            let img = if img.width() == width && img.height() == height {
                img
            } else {
                resize_bilinear(&img, width, height)?
            };
            Ok(Example {
                input: image_to_tensor(&img),
                level: r.level,
            })
        })
        .collect()
}

pub fn evaluate(
    spec: &ArchitectureSpec,
    params: &ModelParams,
    examples: &[Example],
) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::default();
    for ex in examples {
        let (pred, _) = predict_tensor(spec, params, &ex.input)?;
        cm.accumulate(ex.level, pred);
    }
    Ok(cm)
}

/// Train for `config.epochs` epochs.
///
/// Each epoch visits the training set in an order drawn from
/// `(config.seed, epoch)`, averages the per-sample gradients of each batch
/// (summed in sample order, in `f64`) and applies one SGD step per tensor.
/// Aborts with [`Error::Diverged`] if any parameter becomes non-finite.
pub fn train(
    spec: &ArchitectureSpec,
    params: &ModelParams,
    train_set: &[Example],
    val_set: &[Example],
    config: &TrainConfig,
) -> Result<(ModelParams, Vec<EpochStats>)> {
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Config(format!(
            "training needs non-empty train and val splits (got {} and {})",
            train_set.len(),
            val_set.len()
        )));
    }
    if (spec.input.height, spec.input.width) != config.model_input {
        return Err(Error::Config(format!(
            "architecture input {}x{} differs from model_input {:?}",
            spec.input.height, spec.input.width, config.model_input
        )));
    }
    params.check(spec)?;

    let mut params = params.clone();
    let mut history = Vec::with_capacity(config.epochs);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut acc: Vec<Vec<f64>> = params.tensors().map(|t| vec![0.0; t.len()]).collect();

    for epoch in 0..config.epochs {
        let lr = config.rate_for_epoch(epoch);
        order.sort_unstable();
        order.shuffle(&mut seeded_rng(derive_seed(config.seed, &[0xe90c, epoch as u64])));

        let mut loss_sum = 0.0;
        for (bi, batch) in order.chunks(config.batch_size).enumerate() {
            acc.iter_mut().for_each(|a| a.fill(0.0));
            for &i in batch {
                let ex = &train_set[i];
                let (loss, grads) = loss_and_grad(spec, &params, &ex.input, ex.level.index())?;
                loss_sum += loss;
                for (a, g) in acc.iter_mut().zip(grads.tensors()) {
                    for (s, &v) in a.iter_mut().zip(g.data()) {
                        *s += f64::from(v);
                    }
                }
            }
            if lr == 0.0 {
                continue;
            }
            let scale = 1.0 / batch.len() as f64;
            for (t, a) in params.tensors_mut().zip(&acc) {
                let g = Tensor::new(
                    t.shape().to_vec(),
                    a.iter().map(|&v| (v * scale) as f32).collect(),
                )?;
                *t = sgd_step(t, &g, lr)?;
            }
            if !params.is_finite() {
                return Err(Error::Diverged(format!(
                    "non-finite parameters after epoch {epoch} batch {bi} (running loss {loss_sum})"
                )));
            }
        }

        let cm = evaluate(spec, &params, val_set)?;
        history.push(EpochStats {
            epoch: epoch + 1,
            learning_rate: lr,
            train_loss: loss_sum / train_set.len() as f64,
            val_accuracy: cm.trace() as f64 / cm.total() as f64,
        });
    }
    Ok((params, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_network;

    fn toy(n: usize, hw: usize) -> Vec<Example> {
        (0..n)
            .map(|i| {
                let level = CrackLevel::ALL[i % 3];
                let v = 0.2 + 0.3 * level.index() as f32;
                Example {
                    input: Tensor::filled(&[3, hw, hw], v),
                    level,
                }
            })
            .collect()
    }

    fn cfg(lr: f64, epochs: usize) -> TrainConfig {
        TrainConfig {
            learning_rate: lr,
            epochs,
            batch_size: 4,
            seed: 3,
            model_input: (8, 8),
            lr_decay: None,
        }
    }

    #[test]
    fn zero_rate_freezes_parameters() {
        let spec = ArchitectureSpec::new(8, 8);
        let p0 = build_network(&spec, 1).unwrap();
        let data = toy(9, 8);
        let (p1, hist) = train(&spec, &p0, &data, &data, &cfg(0.0, 3)).unwrap();
        assert_eq!(p0, p1);
        assert_eq!(hist.len(), 3);
    }

    #[test]
    fn deterministic() {
        let spec = ArchitectureSpec::new(8, 8);
        let p0 = build_network(&spec, 1).unwrap();
        let data = toy(10, 8);
        let a = train(&spec, &p0, &data, &data, &cfg(0.1, 2)).unwrap();
        let b = train(&spec, &p0, &data, &data, &cfg(0.1, 2)).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn empty_split_is_config_error() {
        let spec = ArchitectureSpec::new(8, 8);
        let p0 = build_network(&spec, 1).unwrap();
        let data = toy(3, 8);
        assert!(matches!(
            train(&spec, &p0, &data, &[], &cfg(0.1, 1)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            train(&spec, &p0, &[], &data, &cfg(0.1, 1)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let mut c = TrainConfig::default();
        c.model_input = (120, 150);
        assert!(c.validate().is_err());
        c = TrainConfig::default();
        c.learning_rate = -1.0;
        assert!(c.validate().is_err());
        c = TrainConfig::default();
        c.batch_size = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn step_decay_schedule() {
        let mut c = TrainConfig::default();
        c.lr_decay = Some(StepDecay {
            every: 3,
            factor: 0.1,
        });
        assert_eq!(c.rate_for_epoch(0), 0.1);
        assert_eq!(c.rate_for_epoch(2), 0.1);
        assert!((c.rate_for_epoch(3) - 0.01).abs() < 1e-15);
        assert!((c.rate_for_epoch(6) - 0.001).abs() < 1e-15);
    }
}
