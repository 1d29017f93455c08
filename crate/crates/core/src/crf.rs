//! Linear-chain CRF over the seven BIO tags.
//!
//! A path `y_1..y_n` scores
//!
//! ```text
//! A[start, y_1] + Σ A[y_i, y_{i+1}] + A[y_n, end] + Σ P[i, y_i]
//! ```
//!
//! where `P` is the `n × 7` emission matrix and `A` the `9 × 9` transition
//! matrix whose last two indices are the virtual start and end tags. All sums
//! over paths run in log space.

#![allow(clippy::needless_range_loop)]

use alloc::vec;
use alloc::vec::Vec;

use crate::corpus::EmissionMatrix;
use crate::error::{Error, Result};
use crate::math::{exp, logsumexp};
use crate::tagscheme::{Tag, NUM_TAGS};

/// Side length of the transition matrix: the tags plus start and end.
pub const TRANSITION_SIZE: usize = NUM_TAGS + 2;
pub const START: usize = NUM_TAGS;
pub const END: usize = NUM_TAGS + 1;

/// `A[i][j]` is the score of moving from tag `i` to tag `j`. Row [`END`] and
/// column [`START`] are never read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionMatrix(pub [[f64; TRANSITION_SIZE]; TRANSITION_SIZE]);

impl Default for TransitionMatrix {
    fn default() -> Self {
        Self::zeros()
    }
}

impl TransitionMatrix {
    pub fn zeros() -> Self {
        Self([[0.0; TRANSITION_SIZE]; TRANSITION_SIZE])
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.0[from][to]
    }

    pub fn set(&mut self, from: usize, to: usize, value: f64) {
        self.0[from][to] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter().flatten()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.0.iter_mut().flatten()
    }
}

fn check_len(emissions: &EmissionMatrix, path: &[Tag]) -> Result<()> {
    if path.len() != emissions.rows() {
        return Err(Error::DimensionMismatch {
            expected: emissions.rows(),
            found: path.len(),
        });
    }
    Ok(())
}

/// Unnormalized log-score of one tag path.
pub fn path_score(emissions: &EmissionMatrix, trans: &TransitionMatrix, path: &[Tag]) -> Result<f64> {
    check_len(emissions, path)?;
    let mut score = trans.get(START, path[0].index());
    for (i, tag) in path.iter().enumerate() {
        score += emissions.get(i, tag.index());
    }
    for pair in path.windows(2) {
        score += trans.get(pair[0].index(), pair[1].index());
    }
    score += trans.get(path[path.len() - 1].index(), END);
    Ok(score)
}

/// Forward log-potentials: `alpha[i][t]` is the log-sum of scores of all
/// prefixes ending in tag `t` at position `i`.
fn forward(emissions: &EmissionMatrix, trans: &TransitionMatrix) -> Vec<[f64; NUM_TAGS]> {
    let n = emissions.rows();
    let mut alpha = vec![[0.0; NUM_TAGS]; n];
    for t in 0..NUM_TAGS {
        alpha[0][t] = trans.get(START, t) + emissions.get(0, t);
    }
    let mut buf = [0.0; NUM_TAGS];
    for i in 1..n {
        for t in 0..NUM_TAGS {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = alpha[i - 1][j] + trans.get(j, t);
            }
            alpha[i][t] = logsumexp(&buf) + emissions.get(i, t);
        }
    }
    alpha
}

/// Backward log-potentials: `beta[i][t]` is the log-sum of scores of all
/// suffixes after position `i` given tag `t` there, including the end
/// transition.
fn backward(emissions: &EmissionMatrix, trans: &TransitionMatrix) -> Vec<[f64; NUM_TAGS]> {
    let n = emissions.rows();
    let mut beta = vec![[0.0; NUM_TAGS]; n];
    for t in 0..NUM_TAGS {
        beta[n - 1][t] = trans.get(t, END);
    }
    let mut buf = [0.0; NUM_TAGS];
    for i in (0..n - 1).rev() {
        for t in 0..NUM_TAGS {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = trans.get(t, j) + emissions.get(i + 1, j) + beta[i + 1][j];
            }
            beta[i][t] = logsumexp(&buf);
        }
    }
    beta
}

fn log_partition_from_alpha(alpha: &[[f64; NUM_TAGS]], trans: &TransitionMatrix) -> f64 {
    let last = &alpha[alpha.len() - 1];
    let mut buf = [0.0; NUM_TAGS];
    for (t, b) in buf.iter_mut().enumerate() {
        *b = last[t] + trans.get(t, END);
    }
    logsumexp(&buf)
}

/// Log of the sum over all `7^n` paths of `exp(path_score)`, by the forward
/// recursion.
pub fn log_partition(emissions: &EmissionMatrix, trans: &TransitionMatrix) -> f64 {
    log_partition_from_alpha(&forward(emissions, trans), trans)
}

/// Same quantity as [`log_partition`], computed by the backward recursion.
pub fn log_partition_backward(emissions: &EmissionMatrix, trans: &TransitionMatrix) -> f64 {
    let beta = backward(emissions, trans);
    let mut buf = [0.0; NUM_TAGS];
    for (t, b) in buf.iter_mut().enumerate() {
        *b = trans.get(START, t) + emissions.get(0, t) + beta[0][t];
    }
    logsumexp(&buf)
}

/// Negative log-likelihood of `gold`: `log Z − score(gold)`.
pub fn nll(emissions: &EmissionMatrix, trans: &TransitionMatrix, gold: &[Tag]) -> Result<f64> {
    let score = path_score(emissions, trans, gold)?;
    Ok(log_partition(emissions, trans) - score)
}

/// Per-position tag marginals `p(y_i = t | S)`.
pub fn marginals(emissions: &EmissionMatrix, trans: &TransitionMatrix) -> Vec<[f64; NUM_TAGS]> {
    let alpha = forward(emissions, trans);
    let beta = backward(emissions, trans);
    let log_z = log_partition_from_alpha(&alpha, trans);
    alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| {
            let mut row = [0.0; NUM_TAGS];
            for t in 0..NUM_TAGS {
                row[t] = exp(a[t] + b[t] - log_z);
            }
            row
        })
        .collect()
}

/// Gradient of [`nll`] with respect to the emissions (`n × 7`, row-major)
/// and the transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NllGradient {
    pub emissions: Vec<f64>,
    pub transitions: TransitionMatrix,
}

/// NLL and its gradient via forward-backward: expected feature counts under
/// the model minus the gold path's counts.
pub fn nll_with_gradient(
    emissions: &EmissionMatrix,
    trans: &TransitionMatrix,
    gold: &[Tag],
) -> Result<(f64, NllGradient)> {
    check_len(emissions, gold)?;
    let n = emissions.rows();
    let alpha = forward(emissions, trans);
    let beta = backward(emissions, trans);
    let log_z = log_partition_from_alpha(&alpha, trans);
    let loss = log_z - path_score(emissions, trans, gold)?;

    let mut d_emit = vec![0.0; n * NUM_TAGS];
    let mut d_trans = TransitionMatrix::zeros();
    for i in 0..n {
        for t in 0..NUM_TAGS {
            d_emit[i * NUM_TAGS + t] = exp(alpha[i][t] + beta[i][t] - log_z);
        }
    }
    for t in 0..NUM_TAGS {
        d_trans.0[START][t] = d_emit[t];
        d_trans.0[t][END] = d_emit[(n - 1) * NUM_TAGS + t];
    }
    for i in 0..n - 1 {
        for a in 0..NUM_TAGS {
            for b in 0..NUM_TAGS {
                d_trans.0[a][b] += exp(
                    alpha[i][a] + trans.get(a, b) + emissions.get(i + 1, b) + beta[i + 1][b]
                        - log_z,
                );
            }
        }
    }

    for (i, tag) in gold.iter().enumerate() {
        d_emit[i * NUM_TAGS + tag.index()] -= 1.0;
    }
    d_trans.0[START][gold[0].index()] -= 1.0;
    d_trans.0[gold[n - 1].index()][END] -= 1.0;
    for pair in gold.windows(2) {
        d_trans.0[pair[0].index()][pair[1].index()] -= 1.0;
    }

    Ok((
        loss,
        NllGradient {
            emissions: d_emit,
            transitions: d_trans,
        },
    ))
}

pub fn nll_gradient(
    emissions: &EmissionMatrix,
    trans: &TransitionMatrix,
    gold: &[Tag],
) -> Result<NllGradient> {
    nll_with_gradient(emissions, trans, gold).map(|(_, g)| g)
}

/// Highest-scoring tag path. With `constrain_bio`, any move into `I-X` from
/// something other than `B-X` / `I-X` (including the sentence start) is
/// forbidden. Ties go to the lowest tag index.
pub fn viterbi_decode(emissions: &EmissionMatrix, trans: &TransitionMatrix, constrain_bio: bool) -> Vec<Tag> {
    let n = emissions.rows();
    let allowed = |prev: Option<Tag>, next: Tag| !constrain_bio || next.may_follow(prev);

    let mut delta = [f64::NEG_INFINITY; NUM_TAGS];
    for (t, tag) in Tag::ALL.iter().enumerate() {
        if allowed(None, *tag) {
            delta[t] = trans.get(START, t) + emissions.get(0, t);
        }
    }
    let mut back: Vec<[u8; NUM_TAGS]> = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let mut next = [f64::NEG_INFINITY; NUM_TAGS];
        let mut bp = [0u8; NUM_TAGS];
        for (t, tag) in Tag::ALL.iter().enumerate() {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (j, prev) in Tag::ALL.iter().enumerate() {
                if !allowed(Some(*prev), *tag) {
                    continue;
                }
                let cand = delta[j] + trans.get(j, t);
                if cand > best {
                    best = cand;
                    arg = j;
                }
            }
            next[t] = best + emissions.get(i, t);
            bp[t] = arg as u8;
        }
        delta = next;
        back.push(bp);
    }

    let mut best = f64::NEG_INFINITY;
    let mut last = 0;
    for t in 0..NUM_TAGS {
        let cand = delta[t] + trans.get(t, END);
        if cand > best {
            best = cand;
            last = t;
        }
    }
    let mut path = vec![Tag::O; n];
    path[n - 1] = Tag::ALL[last];
    let mut cur = last;
    for i in (1..n).rev() {
        cur = back[i - 1][cur] as usize;
        path[i - 1] = Tag::ALL[cur];
    }
    path
}
