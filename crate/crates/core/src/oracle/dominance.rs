use serde::Serialize;

use super::TruncatedDistribution;
use crate::error::{CrsError, Result};

/// Upper tails of both sides of the dominance inequality, per threshold `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DominanceReport {
    /// `Pr[max(Y + P, Z + Q) ≥ k]`.
    pub dominating: Vec<f64>,
    /// `Pr[X + max(P, Q) ≥ k]`.
    pub dominated: Vec<f64>,
    pub tolerance: f64,
}

impl DominanceReport {
    pub fn holds(&self) -> bool {
        self.dominating
            .iter()
            .zip(&self.dominated)
            .all(|(a, b)| a + self.tolerance >= *b)
    }

    /// The inequality with the two sides swapped.
    pub fn reversed_holds(&self) -> bool {
        self.dominating
            .iter()
            .zip(&self.dominated)
            .all(|(a, b)| b + self.tolerance >= *a)
    }

    pub fn is_equality(&self) -> bool {
        self.holds() && self.reversed_holds()
    }
}

fn upper_tails(d: &TruncatedDistribution, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    let mut acc = 0.0;
    for k in (0..len).rev() {
        acc += d.probs().get(k).copied().unwrap_or(0.0);
        out[k] = acc;
    }
    out
}

/// Compares `max(Y + P, Z + Q)` against `X + max(P, Q)` with `X, Y, Z` iid `xyz`.
pub fn check_stochastic_dominance(
    p: &TruncatedDistribution,
    q: &TruncatedDistribution,
    xyz: &TruncatedDistribution,
) -> Result<DominanceReport> {
    if p.max_support() != q.max_support() || p.max_support() != xyz.max_support() {
        return Err(CrsError::input(
            "distributions must share the same truncation point",
        ));
    }
    let lhs = xyz.convolve(p).max_with(&xyz.convolve(q));
    let rhs = xyz.convolve(&p.max_with(q));
    let len = lhs.probs().len().max(rhs.probs().len());
    Ok(DominanceReport {
        dominating: upper_tails(&lhs, len),
        dominated: upper_tails(&rhs, len),
        tolerance: 1e-12 + 2.0 * (p.tail() + q.tail() + 2.0 * xyz.tail()),
    })
}
