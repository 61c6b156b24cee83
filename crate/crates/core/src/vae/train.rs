use rayon::prelude::*;
use serde::Serialize;

use super::{accumulate_gradient, LossParts, VaeConfig, VaeParams};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// RMSProp decay of the squared-gradient average.
    pub rho: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 200, batch_size: 32, learning_rate: 0.001, rho: 0.9, epsilon: 1e-7 }
    }
}

/// Per-epoch means over the examples seen, evaluated before each update.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TrainHistory {
    pub loss: Vec<f64>,
    pub reconstruction: Vec<f64>,
    pub kl: Vec<f64>,
}

/// Minibatch RMSProp from Glorot-initialized weights. The generator seeded
/// with `config.seed` draws the weights, the per-epoch shuffles and one `ε`
/// per example per step, in that order.
pub fn train(data: &[Vec<f64>], config: VaeConfig, train: &TrainConfig) -> Result<(VaeParams, TrainHistory)> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if let Some(bad) = data.iter().find(|x| x.len() != config.k) {
        return Err(Error::Dimension { expected: config.k, found: bad.len() });
    }
    if data.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument("training data must lie in [0, 1]".into()));
    }
    if train.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }

    let mut rng = SeededRng::new(config.seed);
    let mut params = VaeParams::init(config, &mut rng)?;
    let layout = params.layout();
    let mut cache = vec![0.0; layout.len];
    let mut history = TrainHistory::default();
    let mut order: Vec<usize> = (0..data.len()).collect();

    for epoch in 0..train.epochs {
        rng.shuffle(&mut order);
        let mut epoch_parts = LossParts::default();
        for (batch, idx) in order.chunks(train.batch_size).enumerate() {
            let noise: Vec<Vec<f64>> = idx.iter().map(|_| rng.normal_vec(config.d)).collect();
            let per_example: Vec<(LossParts, Vec<f64>)> = idx
                .par_iter()
                .zip(noise.par_iter())
                .map(|(&i, eps)| {
                    let mut g = vec![0.0; layout.len];
                    let parts = accumulate_gradient(&params, &layout, &data[i], eps, &mut g);
                    (parts, g)
                })
                .collect();

            let mut grad = vec![0.0; layout.len];
            let mut batch_parts = LossParts::default();
            for (parts, g) in &per_example {
                batch_parts.reconstruction += parts.reconstruction;
                batch_parts.kl += parts.kl;
                for (a, b) in grad.iter_mut().zip(g) {
                    *a += b;
                }
            }
            if !batch_parts.total().is_finite() {
                return Err(Error::NonFiniteLoss { epoch, batch });
            }
            epoch_parts.reconstruction += batch_parts.reconstruction;
            epoch_parts.kl += batch_parts.kl;

            let scale = 1.0 / idx.len() as f64;
            for ((theta, c), g) in params.theta.iter_mut().zip(cache.iter_mut()).zip(&grad) {
                let g = g * scale;
                *c = train.rho * *c + (1.0 - train.rho) * g * g;
                *theta -= train.learning_rate * g / (c.sqrt() + train.epsilon);
            }
        }
        let n = data.len() as f64;
        history.reconstruction.push(epoch_parts.reconstruction / n);
        history.kl.push(epoch_parts.kl / n);
        history.loss.push(epoch_parts.total() / n);
    }
    Ok((params, history))
}
