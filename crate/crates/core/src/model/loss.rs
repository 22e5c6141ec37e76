use super::prior::{add_alpha_prior_gradient, add_rho_prior_gradient, coupled_slices, loss_prior, PriorConfig};
use super::sampler::{NegativeDraws, NegativeSampler};
use super::state::{axpy, dot, EmbeddingState};
use crate::corpus::ContextBatch;
use crate::error::{Error, Result};

/// Logistic function.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(sigmoid(x))` without materializing the probability.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Sum of the context embeddings at unmasked positions, written to `out`.
/// Returns the number of unmasked positions.
pub fn context_sum(state: &EmbeddingState, ids: &[u32], mask: &[bool], out: &mut [f64]) -> usize {
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut used = 0;
    for (&id, &m) in ids.iter().zip(mask) {
        if m {
            axpy(1.0, state.alpha(id as usize), out);
            used += 1;
        }
    }
    used
}

/// Bernoulli parameter of word `v` at slice `t` given its context.
pub fn bernoulli_param(
    state: &EmbeddingState,
    t: usize,
    v: usize,
    context: &[u32],
    mask: &[bool],
) -> Result<f64> {
    let mut ctx = vec![0.0; state.dim()];
    if context_sum(state, context, mask, &mut ctx) == 0 {
        return Err(Error::EmptyContext);
    }
    Ok(sigmoid(dot(state.rho(t, v), &ctx)))
}

/// Log-likelihood of the observed centers: `sum_i log p_iv`.
pub fn loss_pos(state: &EmbeddingState, batch: &ContextBatch) -> f64 {
    let t = state.slice_for(batch.slice);
    let mut ctx = vec![0.0; state.dim()];
    let mut total = 0.0;
    for (i, &center) in batch.centers.iter().enumerate() {
        let (ids, mask) = batch.context(i);
        context_sum(state, ids, mask, &mut ctx);
        total += log_sigmoid(dot(state.rho(t, center as usize), &ctx));
    }
    total
}

/// Log-likelihood of the given negatives: `sum_i sum_j log(1 - p_i,neg_j)`.
pub fn loss_neg_with(state: &EmbeddingState, batch: &ContextBatch, draws: &NegativeDraws) -> f64 {
    if draws.k == 0 {
        return 0.0;
    }
    let t = state.slice_for(batch.slice);
    let mut ctx = vec![0.0; state.dim()];
    let mut total = 0.0;
    for i in 0..batch.len() {
        let (ids, mask) = batch.context(i);
        context_sum(state, ids, mask, &mut ctx);
        for &neg in draws.for_example(i) {
            total += log_sigmoid(-dot(state.rho(t, neg as usize), &ctx));
        }
    }
    total
}

/// Draw negatives from `sampler` and score them.
pub fn loss_neg(state: &EmbeddingState, batch: &ContextBatch, sampler: &mut NegativeSampler) -> f64 {
    let draws = sampler.draw(batch);
    loss_neg_with(state, batch, &draws)
}

/// The three objective terms and their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub l_pos: f64,
    pub l_neg: f64,
    pub l_prior: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(l_pos: f64, l_neg: f64, l_prior: f64) -> Self {
        LossBreakdown {
            l_pos,
            l_neg,
            l_prior,
            total: l_pos + l_neg + l_prior,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
    }
}

/// Batch objective with the exact full-parameter prior.
pub fn loss_breakdown(
    state: &EmbeddingState,
    batch: &ContextBatch,
    draws: &NegativeDraws,
    prior: &PriorConfig,
) -> LossBreakdown {
    LossBreakdown::new(
        loss_pos(state, batch),
        loss_neg_with(state, batch, draws),
        loss_prior(state, prior),
    )
}

/// Gradient restricted to a set of rows, in deterministic insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseGradient {
    dim: usize,
    l_pos: f64,
    l_neg: f64,
    rho_rows: Vec<(usize, usize)>,
    rho_values: Vec<f64>,
    alpha_rows: Vec<usize>,
    alpha_values: Vec<f64>,
}

impl SparseGradient {
    fn new(dim: usize) -> Self {
        SparseGradient {
            dim,
            l_pos: 0.0,
            l_neg: 0.0,
            rho_rows: Vec::new(),
            rho_values: Vec::new(),
            alpha_rows: Vec::new(),
            alpha_values: Vec::new(),
        }
    }

    fn push_rho(&mut self, t: usize, v: usize) -> usize {
        self.rho_rows.push((t, v));
        self.rho_values.resize(self.rho_values.len() + self.dim, 0.0);
        self.rho_rows.len() - 1
    }

    fn push_alpha(&mut self, v: usize) -> usize {
        self.alpha_rows.push(v);
        self.alpha_values.resize(self.alpha_values.len() + self.dim, 0.0);
        self.alpha_rows.len() - 1
    }

    fn rho_slot_mut(&mut self, slot: usize) -> &mut [f64] {
        &mut self.rho_values[slot * self.dim..(slot + 1) * self.dim]
    }

    fn alpha_slot_mut(&mut self, slot: usize) -> &mut [f64] {
        &mut self.alpha_values[slot * self.dim..(slot + 1) * self.dim]
    }

    /// `((t, v), gradient)` for every `rho` row present.
    pub fn rho_iter(&self) -> impl Iterator<Item = ((usize, usize), &[f64])> {
        self.rho_rows.iter().copied().zip(self.rho_values.chunks_exact(self.dim.max(1)))
    }

    /// `(v, gradient)` for every `alpha` row present.
    pub fn alpha_iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.alpha_rows.iter().copied().zip(self.alpha_values.chunks_exact(self.dim.max(1)))
    }

    pub fn rho_row(&self, t: usize, v: usize) -> Option<&[f64]> {
        self.rho_rows
            .iter()
            .position(|&r| r == (t, v))
            .map(|s| &self.rho_values[s * self.dim..(s + 1) * self.dim])
    }

    pub fn alpha_row(&self, v: usize) -> Option<&[f64]> {
        self.alpha_rows
            .iter()
            .position(|&r| r == v)
            .map(|s| &self.alpha_values[s * self.dim..(s + 1) * self.dim])
    }

    /// `L_pos` and `L_neg` of the batch, computed alongside the gradient.
    pub fn data_loss(&self) -> (f64, f64) {
        (self.l_pos, self.l_neg)
    }

    pub fn rho_rows(&self) -> &[(usize, usize)] {
        &self.rho_rows
    }

    pub fn alpha_rows(&self) -> &[usize] {
        &self.alpha_rows
    }

    pub fn norm(&self) -> f64 {
        self.rho_values
            .iter()
            .chain(&self.alpha_values)
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, c: f64) {
        self.rho_values
            .iter_mut()
            .chain(self.alpha_values.iter_mut())
            .for_each(|x| *x *= c);
    }
}

/// Analytic gradient (ascent direction) of
/// `L_pos + L_neg + prior_scale * L_prior` for one batch.
///
/// Rows present: the target rows of the batch slice touched by a center or a
/// negative, the context rows touched by an unmasked position, and the target
/// rows tied to touched rows by the drift term (`t - 1` and `t + 1` for DBE;
/// slice 0, or every later slice when `t = 0`, for the anchored variants).
/// Every present row carries its full derivative, prior included; all other
/// rows are absent.
pub fn gradients(
    state: &EmbeddingState,
    batch: &ContextBatch,
    draws: &NegativeDraws,
    prior: &PriorConfig,
    prior_scale: f64,
) -> SparseGradient {
    let dim = state.dim();
    let t = state.slice_for(batch.slice);
    let mut grad = SparseGradient::new(dim);

    const NONE: u32 = u32::MAX;
    let mut rho_slot = vec![NONE; state.vocab_size()];
    let mut alpha_slot = vec![NONE; state.vocab_size()];

    let mut ctx = vec![0.0; dim];
    let mut ctx_grad = vec![0.0; dim];

    for i in 0..batch.len() {
        let (ids, mask) = batch.context(i);
        context_sum(state, ids, mask, &mut ctx);
        ctx_grad.iter_mut().for_each(|x| *x = 0.0);

        let center = batch.centers[i] as usize;
        let negs: &[u32] = if draws.k == 0 { &[] } else { draws.for_example(i) };
        let targets = std::iter::once((center, true)).chain(negs.iter().map(|&n| (n as usize, false)));
        for (v, positive) in targets {
            let rho = state.rho(t, v);
            let score = dot(rho, &ctx);
            let p = sigmoid(score);
            if positive {
                grad.l_pos += log_sigmoid(score);
            } else {
                grad.l_neg += log_sigmoid(-score);
            }
            // d/ds log sigmoid(s) = 1 - p ; d/ds log sigmoid(-s) = -p
            let g = if positive { 1.0 - p } else { -p };
            axpy(g, rho, &mut ctx_grad);
            if rho_slot[v] == NONE {
                rho_slot[v] = grad.push_rho(t, v) as u32;
            }
            axpy(g, &ctx, grad.rho_slot_mut(rho_slot[v] as usize));
        }

        for (&id, &m) in ids.iter().zip(mask) {
            if !m {
                continue;
            }
            let id = id as usize;
            if alpha_slot[id] == NONE {
                alpha_slot[id] = grad.push_alpha(id) as u32;
            }
            axpy(1.0, &ctx_grad, grad.alpha_slot_mut(alpha_slot[id] as usize));
        }
    }

    if prior_scale != 0.0 {
        let touched: Vec<(usize, usize)> = grad.rho_rows.clone();
        for (slot, &(_, v)) in touched.iter().enumerate() {
            add_rho_prior_gradient(state, prior, t, v, prior_scale, grad.rho_slot_mut(slot));
        }
        for s in coupled_slices(prior, state.num_slices(), t) {
            for &(_, v) in &touched {
                let slot = grad.push_rho(s, v);
                add_rho_prior_gradient(state, prior, s, v, prior_scale, grad.rho_slot_mut(slot));
            }
        }
        for slot in 0..grad.alpha_rows.len() {
            let v = grad.alpha_rows[slot];
            add_alpha_prior_gradient(state, prior, v, prior_scale, grad.alpha_slot_mut(slot));
        }
    }

    grad
}
