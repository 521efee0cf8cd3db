use crate::error::{CrsError, Result};

/// Default neglected-tail bound for truncated Poisson laws.
pub const DEFAULT_TAIL: f64 = 1e-13;

/// A law on `0..=K` whose listed probabilities sum to `1 − tail`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedDistribution {
    probs: Vec<f64>,
    tail: f64,
}

impl TruncatedDistribution {
    pub fn new(probs: Vec<f64>, tail: f64) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(CrsError::input(
                "probabilities must be finite and nonnegative",
            ));
        }
        if !(0.0..1.0).contains(&tail) {
            return Err(CrsError::input("tail mass must lie in [0, 1)"));
        }
        let total: f64 = probs.iter().sum();
        if (total + tail - 1.0).abs() > 1e-9 {
            return Err(CrsError::input(format!(
                "probabilities sum to {total} with tail {tail}, expected 1"
            )));
        }
        Ok(TruncatedDistribution { probs, tail })
    }

    pub fn point(k: usize) -> Self {
        let mut probs = vec![0.0; k + 1];
        probs[k] = 1.0;
        TruncatedDistribution { probs, tail: 0.0 }
    }

    /// Poisson(λ) on `0..=k_max`.
    pub fn poisson(lambda: f64, k_max: usize) -> Self {
        let mut probs = Vec::with_capacity(k_max + 1);
        let mut p = (-lambda).exp();
        for k in 0..=k_max {
            if k > 0 {
                p *= lambda / k as f64;
            }
            probs.push(p);
        }
        let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        TruncatedDistribution { probs, tail }
    }

    /// Poisson(λ) truncated at the first point where the tail drops below `bound`.
    pub fn poisson_with_tail(lambda: f64, bound: f64) -> Self {
        let mut probs = Vec::new();
        let mut p = (-lambda).exp();
        let mut cdf = 0.0;
        let mut k = 0usize;
        loop {
            if k > 0 {
                p *= lambda / k as f64;
            }
            probs.push(p);
            cdf += p;
            if 1.0 - cdf < bound && k as f64 >= lambda {
                break;
            }
            k += 1;
        }
        TruncatedDistribution {
            probs,
            tail: (1.0 - cdf).max(0.0),
        }
    }

    /// Poisson(λ) conditioned on being at least 1, for `λ > 0`.
    pub fn poisson_geq1_with_tail(lambda: f64, bound: f64) -> Self {
        let mass = -(-lambda).exp_m1();
        let mut probs = vec![0.0];
        let mut p = lambda * (-lambda).exp() / mass;
        let mut cdf = 0.0;
        let mut k = 1usize;
        loop {
            if k > 1 {
                p *= lambda / k as f64;
            }
            probs.push(p);
            cdf += p;
            if 1.0 - cdf < bound && k as f64 >= lambda {
                break;
            }
            k += 1;
        }
        TruncatedDistribution {
            probs,
            tail: (1.0 - cdf).max(0.0),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Largest listed support point.
    pub fn max_support(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    /// `Pr[X ≤ k]` over the listed mass.
    pub fn cdf(&self, k: usize) -> f64 {
        self.probs.iter().take(k + 1).sum()
    }

    /// Law of `X + Y` for independent `X`, `Y`.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut probs = vec![0.0; self.probs.len() + other.probs.len() - 1];
        for (i, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for (j, &q) in other.probs.iter().enumerate() {
                probs[i + j] += p * q;
            }
        }
        TruncatedDistribution {
            probs,
            tail: self.tail + other.tail,
        }
    }

    /// Law of `max(X, Y)` for independent `X`, `Y`.
    pub fn max_with(&self, other: &Self) -> Self {
        let n = self.probs.len().max(other.probs.len());
        let mut probs = Vec::with_capacity(n);
        let (mut fa, mut fb, mut prev) = (0.0, 0.0, 0.0);
        for k in 0..n {
            fa += self.probs.get(k).copied().unwrap_or(0.0);
            fb += other.probs.get(k).copied().unwrap_or(0.0);
            let f = fa * fb;
            probs.push((f - prev).max(0.0));
            prev = f;
        }
        TruncatedDistribution {
            probs,
            tail: self.tail + other.tail,
        }
    }

    /// Drops high support points carrying total mass below `eps`, moving it into the tail.
    pub fn trim(mut self, eps: f64) -> Self {
        let mut dropped = 0.0;
        while self.probs.len() > 1 {
            let last = *self.probs.last().unwrap();
            if dropped + last >= eps {
                break;
            }
            dropped += last;
            self.probs.pop();
        }
        self.tail += dropped;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_tail_is_small() {
        let d = TruncatedDistribution::poisson_with_tail(1.0, 1e-13);
        assert!(d.tail() < 1e-13);
        assert!((d.mean() - 1.0).abs() < 1e-12);
        let g = TruncatedDistribution::poisson_geq1_with_tail(0.5, 1e-13);
        assert_eq!(g.probs()[0], 0.0);
        let expect = 0.5 / (1.0 - (-0.5f64).exp());
        assert!((g.mean() - expect).abs() < 1e-12);
    }

    #[test]
    fn convolution_of_poissons_is_poisson() {
        let a = TruncatedDistribution::poisson(0.3, 30);
        let b = TruncatedDistribution::poisson(0.7, 30);
        let c = a.convolve(&b);
        let d = TruncatedDistribution::poisson(1.0, 60);
        for k in 0..20 {
            assert!((c.probs()[k] - d.probs()[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn max_of_points() {
        let m = TruncatedDistribution::point(2).max_with(&TruncatedDistribution::point(5));
        assert_eq!(m.probs()[5], 1.0);
        assert!(TruncatedDistribution::new(vec![0.5], 0.0).is_err());
        assert!(TruncatedDistribution::new(vec![0.5, 0.5], 0.0).is_ok());
    }
}
