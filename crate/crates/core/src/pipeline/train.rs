//! Minibatch Adam with decoupled weight decay and cosine-annealed learning
//! rate. Deterministic given the seed: fixed shuffle order, sequential
//! gradient accumulation, single-owner model updates.

use super::loss::{compute_batch_loss, LossBreakdown, ParamGrads};
use super::Model;
use crate::error::{Error, Result};
use crate::imgcore::ImageBuf;
use crate::metrics::{ecas, psnr, EcasConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Optimizer and schedule settings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Initial learning rate; annealed to zero on a cosine schedule.
    pub lr: f64,
    /// Decoupled weight decay, applied to MLP parameters only. Decaying LUT
    /// entries would fight the identity initialization.
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 150,
            batch_size: 16,
            lr: 5e-5,
            weight_decay: 5e-4,
            seed: 0,
        }
    }
}

/// One training pair: degraded input and clean target.
#[derive(Debug, Clone)]
pub struct TrainPair {
    pub fringed: ImageBuf,
    pub clean: ImageBuf,
}

/// Per-epoch log record (JSON-lines friendly).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub lr: f64,
    pub losses: LossBreakdown,
    pub val_psnr: Option<f64>,
    pub val_ecas: Option<f64>,
}

/// Cosine annealing from `lr0` at step 0 to 0 at step `total`.
pub fn cosine_lr(step: usize, total: usize, lr0: f64) -> f64 {
    if total == 0 {
        return lr0;
    }
    let t = (step as f64 / total as f64).min(1.0);
    0.5 * lr0 * (1.0 + (std::f64::consts::PI * t).cos())
}

/// Adam moment estimates for every parameter group.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: ParamGrads,
    v: ParamGrads,
    t: u64,
}

impl AdamState {
    pub fn new(model: &Model) -> Self {
        AdamState {
            m: ParamGrads::zeros_like(model),
            v: ParamGrads::zeros_like(model),
            t: 0,
        }
    }

    /// One Adam step. `decay` applies only to the MLP groups.
    pub fn step(&mut self, model: &mut Model, grads: &ParamGrads, lr: f64, decay: f64) {
        self.t += 1;
        let bc1 = 1.0 - BETA1.powi(self.t as i32);
        let bc2 = 1.0 - BETA2.powi(self.t as i32);

        let update =
            |theta: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], wd: f64| {
                for i in 0..theta.len() {
                    m[i] = BETA1 * m[i] + (1.0 - BETA1) * g[i];
                    v[i] = BETA2 * v[i] + (1.0 - BETA2) * g[i] * g[i];
                    let mhat = m[i] / bc1;
                    let vhat = v[i] / bc2;
                    theta[i] -= lr * mhat / (vhat.sqrt() + ADAM_EPS);
                    if wd > 0.0 {
                        theta[i] -= lr * wd * theta[i];
                    }
                }
            };

        let p = &mut model.predictor;
        update(&mut p.w1, &grads.w1, &mut self.m.w1, &mut self.v.w1, decay);
        update(&mut p.b1, &grads.b1, &mut self.m.b1, &mut self.v.b1, decay);
        update(&mut p.w2, &grads.w2, &mut self.m.w2, &mut self.v.w2, decay);
        update(&mut p.b2, &grads.b2, &mut self.m.b2, &mut self.v.b2, decay);
        update(
            &mut model.lut5.entries,
            &grads.lut5,
            &mut self.m.lut5,
            &mut self.v.lut5,
            0.0,
        );
        update(
            &mut model.lut1.entries,
            &grads.lut1,
            &mut self.m.lut1,
            &mut self.v.lut1,
            0.0,
        );
    }
}

/// Trains the model in place, returning one log record per epoch. With a
/// non-empty validation set, each epoch also reports mean PSNR and ECAS of
/// the corrected validation images against their clean targets.
pub fn train(
    model: &mut Model,
    train_pairs: &[TrainPair],
    val_pairs: &[TrainPair],
    config: &TrainConfig,
) -> Result<Vec<EpochLog>> {
    if train_pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = AdamState::new(model);
    let mut logs = Vec::with_capacity(config.epochs);
    let ecas_cfg = EcasConfig::default();

    let mut order: Vec<usize> = (0..train_pairs.len()).collect();
    for epoch in 0..config.epochs {
        let lr = cosine_lr(epoch, config.epochs, config.lr);

        // Fisher-Yates reshuffle per epoch from the run's RNG stream.
        for i in (1..order.len()).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }

        let mut epoch_loss: Option<LossBreakdown> = None;
        let mut samples_seen = 0usize;
        for (step, chunk) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<(&ImageBuf, &ImageBuf)> = chunk
                .iter()
                .map(|&i| (&train_pairs[i].fringed, &train_pairs[i].clean))
                .collect();
            let (breakdown, grads) = compute_batch_loss(model, &batch)?;
            if !breakdown.total.is_finite() || !grads.is_finite() {
                return Err(Error::NanLoss {
                    epoch,
                    step,
                    detail: format!("batch indices {chunk:?}, losses {breakdown:?}"),
                });
            }
            adam.step(model, &grads, lr, config.weight_decay);

            // Sample-weighted running mean of the epoch's loss terms.
            let w_new = chunk.len() as f64;
            let w_old = samples_seen as f64;
            epoch_loss = Some(match epoch_loss {
                None => breakdown,
                Some(prev) => {
                    let mix = |a: f64, b: f64| (a * w_old + b * w_new) / (w_old + w_new);
                    LossBreakdown {
                        l1: mix(prev.l1, breakdown.l1),
                        perceptual_y: mix(prev.perceptual_y, breakdown.perceptual_y),
                        chroma: mix(prev.chroma, breakdown.chroma),
                        smooth: mix(prev.smooth, breakdown.smooth),
                        align: mix(prev.align, breakdown.align),
                        total: mix(prev.total, breakdown.total),
                    }
                }
            });
            samples_seen += chunk.len();
        }

        let (val_psnr, val_ecas) = if val_pairs.is_empty() {
            (None, None)
        } else {
            let mut psnr_sum = 0.0;
            let mut ecas_sum = 0.0;
            for pair in val_pairs {
                let corrected = super::correct_image(model, &pair.fringed)?;
                psnr_sum += psnr(&corrected, &pair.clean)?;
                ecas_sum += ecas(&corrected, &pair.clean, &ecas_cfg)?;
            }
            (
                Some(psnr_sum / val_pairs.len() as f64),
                Some(ecas_sum / val_pairs.len() as f64),
            )
        };

        let losses = epoch_loss.expect("at least one batch");
        log::info!(
            "epoch {epoch}: lr {lr:.3e} total {:.6} l1 {:.6} val_psnr {:?}",
            losses.total,
            losses.l1,
            val_psnr
        );
        logs.push(EpochLog {
            epoch,
            lr,
            losses,
            val_psnr,
            val_ecas,
        });
    }
    Ok(logs)
}
