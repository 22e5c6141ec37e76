//! Static pretraining and dynamic training by minibatch Adagrad.
//!
//! Every step draws one batch from one slice, samples negatives, and ascends
//! the batch objective plus `1/M` of the log-prior on the rows the batch
//! touches (`M` batches per slice). Updates are applied sequentially, so a
//! run is a pure function of corpus, config and seed.

mod checkpoint;
mod config;

use log::{debug, info, warn};
use rand::seq::SliceRandom;

pub use checkpoint::{Checkpoint, MetricRow, ValidRow, CHECKPOINT_MAGIC};
pub use config::{Init, SliceOrder, TrainingConfig};

use crate::corpus::{batches, Split, TimeSlicedCorpus};
use crate::error::{Error, Result};
use crate::evaluation::evaluate;
use crate::model::{gradients, loss_prior, slice_prior, EmbeddingState, NegativeSampler, PriorConfig, SparseGradient, Variant};
use crate::seed;

const ADAGRAD_EPS: f64 = 1e-8;

/// Per-coordinate Adagrad with sparse row updates.
#[derive(Clone, Debug)]
pub struct Adagrad {
    rate: f64,
    rho_acc: Vec<f64>,
    alpha_acc: Vec<f64>,
}

impl Adagrad {
    pub fn new(state: &EmbeddingState, rate: f64, initial_accumulator: f64) -> Self {
        Adagrad {
            rate,
            rho_acc: vec![initial_accumulator; state.rho_data().len()],
            alpha_acc: vec![initial_accumulator; state.alpha_data().len()],
        }
    }

    /// Ascend along `grad`.
    pub fn step(&mut self, state: &mut EmbeddingState, grad: &SparseGradient) {
        let (nv, dim) = (state.vocab_size(), state.dim());
        let rate = self.rate;
        let update = |x: &mut [f64], acc: &mut [f64], g: &[f64]| {
            for ((x, a), g) in x.iter_mut().zip(acc.iter_mut()).zip(g) {
                *a += g * g;
                *x += rate * g / (a.sqrt() + ADAGRAD_EPS);
            }
        };
        for ((t, v), g) in grad.rho_iter() {
            let o = (t * nv + v) * dim;
            update(state.rho_mut(t, v), &mut self.rho_acc[o..o + dim], g);
        }
        for (v, g) in grad.alpha_iter() {
            let o = v * dim;
            update(state.alpha_mut(v), &mut self.alpha_acc[o..o + dim], g);
        }
    }
}

/// Result of a training run. On divergence the checkpoint holds the last
/// finite state and `diverged` the `(epoch, slice)` where it happened.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub checkpoint: Checkpoint,
    pub diverged: Option<(usize, usize)>,
}

impl Outcome {
    pub fn into_result(self) -> Result<Checkpoint> {
        match self.diverged {
            None => Ok(self.checkpoint),
            Some((epoch, slice)) => Err(Error::Diverged { epoch, slice }),
        }
    }
}

/// Unigram frequencies of the training split, used for negative sampling.
pub fn train_frequencies(corpus: &TimeSlicedCorpus) -> Vec<f64> {
    let mut counts = vec![0u64; corpus.vocab_size];
    for s in &corpus.slices {
        for (&id, &sp) in s.tokens.iter().zip(&s.splits) {
            if sp == Split::Train {
                counts[id as usize] += 1;
            }
        }
    }
    let total: u64 = counts.iter().sum();
    counts.iter().map(|&c| c as f64 / total.max(1) as f64).collect()
}

struct Plan<'a> {
    prior: PriorConfig,
    prior_scale: f64,
    epochs: usize,
    label: &'a str,
}

fn check_corpus(corpus: &TimeSlicedCorpus, config: &TrainingConfig) -> Result<()> {
    config.validate()?;
    if corpus.num_slices() == 0 || corpus.split_tokens(Split::Train) == 0 {
        return Err(Error::InvalidArgument("corpus has no training tokens".into()));
    }
    Ok(())
}

fn run(mut state: EmbeddingState, corpus: &TimeSlicedCorpus, config: &TrainingConfig, plan: Plan) -> Result<Outcome> {
    let nt = corpus.num_slices();
    let mut sampler = NegativeSampler::new(
        &train_frequencies(corpus),
        config.negative_power,
        config.negatives,
        seed::derive_seed(config.seed, plan.label),
    )?;
    let mut opt = Adagrad::new(&state, config.learning_rate, config.initial_accumulator);
    let mut metrics = Vec::new();
    let mut validation = Vec::new();
    let mut order: Vec<usize> = (0..nt).collect();

    for epoch in 0..plan.epochs {
        let epoch_seed = seed::derive_indexed(config.seed, plan.label, epoch as u64);
        if config.order == SliceOrder::Shuffled {
            order.shuffle(&mut seed::rng_indexed(config.seed, "order", epoch as u64));
        }
        for &t in &order {
            let mut stream = batches(corpus, t, config.window, config.batch_size, Split::Train, epoch_seed)?;
            if stream.positions().is_empty() {
                continue;
            }
            let (mut l_pos, mut l_neg) = (0.0, 0.0);
            for _ in 0..config.minibatches_per_slice {
                let batch = stream.next_batch().unwrap();
                let draws = sampler.draw(&batch);
                let mut grad = gradients(&state, &batch, &draws, &plan.prior, plan.prior_scale);
                let (p, n) = grad.data_loss();
                let norm = grad.norm();
                if !(p + n).is_finite() || !norm.is_finite() {
                    warn!("{} training diverged at epoch {epoch}, slice {t}", plan.label);
                    let checkpoint = Checkpoint {
                        state,
                        config: config.clone(),
                        epoch,
                        metrics,
                        validation,
                    };
                    return Ok(Outcome {
                        checkpoint,
                        diverged: Some((epoch, t)),
                    });
                }
                if let Some(c) = config.clip_norm {
                    if norm > c {
                        grad.scale(c / norm);
                    }
                }
                opt.step(&mut state, &grad);
                l_pos += p;
                l_neg += n;
            }
            let m = config.minibatches_per_slice.max(1) as f64;
            let l_prior = if state.num_slices() == 1 {
                loss_prior(&state, &plan.prior)
            } else {
                slice_prior(&state, &plan.prior, t)
            };
            metrics.push(MetricRow {
                epoch,
                slice: t,
                l_pos: l_pos / m,
                l_neg: l_neg / m,
                l_prior,
            });
            debug!("{} epoch {epoch} slice {t}: l_pos {} l_neg {}", plan.label, l_pos / m, l_neg / m);
        }
        if config.validate {
            match evaluate(&state, corpus, Split::Valid, config.window, config.batch_size) {
                Ok(curve) => {
                    info!("{} epoch {epoch}: validation mean {}", plan.label, curve.mean);
                    validation.extend(curve.per_slice.iter().enumerate().map(|(t, &value)| ValidRow {
                        epoch,
                        slice: t,
                        value,
                    }));
                }
                Err(e) => debug!("no validation after epoch {epoch}: {e}"),
            }
        }
    }
    Ok(Outcome {
        checkpoint: Checkpoint {
            state,
            config: config.clone(),
            epoch: plan.epochs,
            metrics,
            validation,
        },
        diverged: None,
    })
}

/// Single-slice model trained on every slice of the corpus, regularized by
/// the initial-precision terms only.
pub fn train_static(corpus: &TimeSlicedCorpus, config: &TrainingConfig) -> Result<Outcome> {
    check_corpus(corpus, config)?;
    let init = EmbeddingState::random(1, corpus.vocab_size, config.dim, config.init_scale, config.seed);
    let prior = PriorConfig {
        variant: Variant::DbeI,
        ..config.prior
    };
    let batches_per_epoch = config.minibatches_per_slice * corpus.num_slices();
    let plan = Plan {
        prior,
        prior_scale: 1.0 / batches_per_epoch.max(1) as f64,
        epochs: config.static_epochs,
        label: "static",
    };
    info!(
        "static training: {} epochs of {batches_per_epoch} batches",
        config.static_epochs
    );
    run(init, corpus, config, plan)
}

/// Broadcast a single-slice state to `num_slices` slices.
pub fn init_dynamic(static_state: &EmbeddingState, num_slices: usize) -> Result<EmbeddingState> {
    if static_state.num_slices() != 1 {
        return Err(Error::Shape(format!(
            "static state must have one slice, found {}",
            static_state.num_slices()
        )));
    }
    if num_slices == 0 {
        return Err(Error::InvalidArgument("need at least one slice".into()));
    }
    Ok(static_state.broadcast(num_slices))
}

/// Random initial state for dynamic training without pretraining.
pub fn random_init(corpus: &TimeSlicedCorpus, config: &TrainingConfig) -> EmbeddingState {
    EmbeddingState::random(
        corpus.num_slices(),
        corpus.vocab_size,
        config.dim,
        config.init_scale,
        seed::derive_seed(config.seed, "dynamic-init"),
    )
}

/// Train one target slice per corpus slice from `init`.
pub fn train_dynamic(corpus: &TimeSlicedCorpus, config: &TrainingConfig, init: EmbeddingState) -> Result<Outcome> {
    check_corpus(corpus, config)?;
    if init.num_slices() != corpus.num_slices() || init.vocab_size() != corpus.vocab_size || init.dim() != config.dim {
        return Err(Error::Shape(format!(
            "initial state is {}x{}x{}, expected {}x{}x{}",
            init.num_slices(),
            init.vocab_size(),
            init.dim(),
            corpus.num_slices(),
            corpus.vocab_size,
            config.dim
        )));
    }
    let plan = Plan {
        prior: config.prior,
        prior_scale: 1.0 / config.minibatches_per_slice.max(1) as f64,
        epochs: config.epochs,
        label: "dynamic",
    };
    info!(
        "dynamic {} training: {} epochs over {} slices",
        config.prior.variant,
        config.epochs,
        corpus.num_slices()
    );
    run(init, corpus, config, plan)
}
