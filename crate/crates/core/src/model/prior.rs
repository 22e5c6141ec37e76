use std::fmt;
use std::str::FromStr;

use super::state::{sq_dist, sq_norm, EmbeddingState};
use crate::error::{Error, Result};

/// Which drift regularizer ties the slices together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Gaussian random walk between consecutive slices.
    Dbe,
    /// No drift term; only the two initial-precision terms.
    DbeI,
    /// Every slice anchored to slice 0.
    DbeNc,
    /// Anchored to slice 0 with weight growing linearly in `t`.
    DbeSc,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Dbe, Variant::DbeI, Variant::DbeNc, Variant::DbeSc];
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Dbe => "dbe",
            Variant::DbeI => "dbe-i",
            Variant::DbeNc => "dbe-nc",
            Variant::DbeSc => "dbe-sc",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dbe" => Ok(Variant::Dbe),
            "dbe-i" => Ok(Variant::DbeI),
            "dbe-nc" => Ok(Variant::DbeNc),
            "dbe-sc" => Ok(Variant::DbeSc),
            other => Err(Error::InvalidArgument(format!("unknown variant {other}"))),
        }
    }
}

/// Gaussian prior over the embeddings.
///
/// `lambda` is the drift precision (inverse variance of one random-walk
/// step), `lambda0` the precision of the zero-mean prior on `alpha` and on
/// `rho^(0)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriorConfig {
    pub variant: Variant,
    pub lambda: f64,
    pub lambda0: f64,
    /// Replace the `t` weight of DBE-SC by 1. Only used to check that the
    /// weighted anchor reduces to DBE-NC.
    pub unit_time_weights: bool,
}

impl PriorConfig {
    pub fn new(variant: Variant, lambda: f64, lambda0: f64) -> Self {
        PriorConfig {
            variant,
            lambda,
            lambda0,
            unit_time_weights: false,
        }
    }

    /// `lambda0 = lambda / 1000`.
    pub fn with_default_lambda0(variant: Variant, lambda: f64) -> Self {
        PriorConfig::new(variant, lambda, lambda / 1000.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 > 0.0) || !self.lambda0.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda0 must be positive, got {}",
                self.lambda0
            )));
        }
        if self.variant != Variant::DbeI && !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive for {}, got {}",
                self.variant, self.lambda
            )));
        }
        Ok(())
    }

    /// Weight of the anchor term `||rho^(t) - rho^(0)||^2` for anchored
    /// variants, `None` otherwise.
    pub(crate) fn anchor_weight(&self, t: usize) -> Option<f64> {
        match self.variant {
            Variant::DbeNc => Some(1.0),
            Variant::DbeSc if self.unit_time_weights => Some(1.0),
            Variant::DbeSc => Some(t as f64),
            _ => None,
        }
    }
}

/// Exact log-prior over the whole parameter set.
pub fn loss_prior(state: &EmbeddingState, config: &PriorConfig) -> f64 {
    let (nt, nv) = (state.num_slices(), state.vocab_size());
    let mut alpha_sq = 0.0;
    let mut rho0_sq = 0.0;
    for v in 0..nv {
        alpha_sq += sq_norm(state.alpha(v));
        rho0_sq += sq_norm(state.rho(0, v));
    }
    let mut total = -0.5 * config.lambda0 * (alpha_sq + rho0_sq);

    match config.variant {
        Variant::DbeI => {}
        Variant::Dbe => {
            let mut drift = 0.0;
            for t in 1..nt {
                for v in 0..nv {
                    drift += sq_dist(state.rho(t, v), state.rho(t - 1, v));
                }
            }
            total -= 0.5 * config.lambda * drift;
        }
        Variant::DbeNc | Variant::DbeSc => {
            for t in 1..nt {
                let w = config.anchor_weight(t).unwrap();
                let mut drift = 0.0;
                for v in 0..nv {
                    drift += sq_dist(state.rho(t, v), state.rho(0, v));
                }
                total -= 0.5 * config.lambda * w * drift;
            }
        }
    }
    total
}

/// Prior terms attributed to slice `t`: the initial-precision terms for
/// `t = 0`, otherwise the drift term linking slice `t` to its predecessor
/// (DBE) or to slice 0 (anchored variants). Summing over all slices gives
/// [`loss_prior`].
pub fn slice_prior(state: &EmbeddingState, config: &PriorConfig, t: usize) -> f64 {
    let nv = state.vocab_size();
    if t == 0 {
        let sq: f64 = (0..nv)
            .map(|v| sq_norm(state.alpha(v)) + sq_norm(state.rho(0, v)))
            .sum();
        return -0.5 * config.lambda0 * sq;
    }
    let (base, w) = match config.variant {
        Variant::DbeI => return 0.0,
        Variant::Dbe => (t - 1, 1.0),
        Variant::DbeNc | Variant::DbeSc => (0, config.anchor_weight(t).unwrap()),
    };
    let drift: f64 = (0..nv).map(|v| sq_dist(state.rho(t, v), state.rho(base, v))).sum();
    -0.5 * config.lambda * w * drift
}

/// Add `scale * d(log-prior)/d(rho_v^(t))` to `out`.
pub(crate) fn add_rho_prior_gradient(
    state: &EmbeddingState,
    config: &PriorConfig,
    t: usize,
    v: usize,
    scale: f64,
    out: &mut [f64],
) {
    let nt = state.num_slices();
    let row = state.rho(t, v);
    if t == 0 {
        for (o, x) in out.iter_mut().zip(row) {
            *o -= scale * config.lambda0 * x;
        }
    }
    match config.variant {
        Variant::DbeI => {}
        Variant::Dbe => {
            let c = scale * config.lambda;
            if t >= 1 {
                for ((o, x), p) in out.iter_mut().zip(row).zip(state.rho(t - 1, v)) {
                    *o -= c * (x - p);
                }
            }
            if t + 1 < nt {
                for ((o, x), n) in out.iter_mut().zip(row).zip(state.rho(t + 1, v)) {
                    *o += c * (n - x);
                }
            }
        }
        Variant::DbeNc | Variant::DbeSc => {
            if t >= 1 {
                let c = scale * config.lambda * config.anchor_weight(t).unwrap();
                for ((o, x), a) in out.iter_mut().zip(row).zip(state.rho(0, v)) {
                    *o -= c * (x - a);
                }
            } else {
                for s in 1..nt {
                    let c = scale * config.lambda * config.anchor_weight(s).unwrap();
                    for ((o, x), r) in out.iter_mut().zip(row).zip(state.rho(s, v)) {
                        *o += c * (r - x);
                    }
                }
            }
        }
    }
}

/// Add `scale * d(log-prior)/d(alpha_v)` to `out`.
pub(crate) fn add_alpha_prior_gradient(
    state: &EmbeddingState,
    config: &PriorConfig,
    v: usize,
    scale: f64,
    out: &mut [f64],
) {
    for (o, x) in out.iter_mut().zip(state.alpha(v)) {
        *o -= scale * config.lambda0 * x;
    }
}

/// Rows of `rho` coupled by the drift term to row `(t, v)`, other than
/// `(t, v)` itself, that receive prior gradient when `(t, v)` is touched.
pub(crate) fn coupled_slices(config: &PriorConfig, num_slices: usize, t: usize) -> Vec<usize> {
    match config.variant {
        Variant::DbeI => Vec::new(),
        Variant::Dbe => {
            let mut out = Vec::with_capacity(2);
            if t >= 1 {
                out.push(t - 1);
            }
            if t + 1 < num_slices {
                out.push(t + 1);
            }
            out
        }
        Variant::DbeNc | Variant::DbeSc => {
            if t >= 1 {
                vec![0]
            } else {
                (1..num_slices).collect()
            }
        }
    }
}
