//! Dynamic Bernoulli embedding model: parameters, objective and gradients.
//!
//! A center word `v` at slice `t` is predicted from the sum of the context
//! vectors around it, `p = sigmoid(rho_v^(t) . sum_j alpha_{c_j})`. The
//! objective adds the log-likelihood of observed centers, the
//! log-likelihood of rejecting sampled negatives, and a Gaussian log-prior
//! whose drift term depends on the [`Variant`].

mod io;
mod loss;
mod prior;
mod sampler;
mod state;

pub use io::{alpha_to_string, read_embeddings, rho_to_string, write_embeddings, ALPHA_FILE, RHO_FILE};
pub use loss::{
    bernoulli_param, context_sum, gradients, log_sigmoid, loss_breakdown, loss_neg, loss_neg_with,
    loss_pos, sigmoid, LossBreakdown, SparseGradient,
};
pub use prior::{loss_prior, slice_prior, PriorConfig, Variant};
pub use sampler::{NegativeDraws, NegativeSampler, DEFAULT_NEGATIVE_POWER};
pub use state::{dot, sq_dist, sq_norm, EmbeddingState};
