//! Deterministic parallel Monte Carlo accumulation.

use rayon::prelude::*;

use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

use crate::error::Result;
use crate::rng::RngStream;

/// Trials per work unit; fixed so results do not depend on the worker count.
const CHUNK: u64 = 4096;

/// Per-coordinate running mean and centred second moment over trials.
#[derive(Clone, Debug)]
pub struct Moments {
    pub trials: u64,
    means: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn zeros(width: usize) -> Self {
        Moments {
            trials: 0,
            means: vec![0.0; width],
            m2: vec![0.0; width],
        }
    }

    fn push(&mut self, obs: &[f64]) {
        self.trials += 1;
        let n = self.trials as f64;
        for (i, &v) in obs.iter().enumerate() {
            let d = v - self.means[i];
            self.means[i] += d / n;
            self.m2[i] += d * (v - self.means[i]);
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        if other.trials == 0 {
            return self;
        }
        let (na, nb) = (self.trials as f64, other.trials as f64);
        let n = na + nb;
        for i in 0..self.means.len() {
            let d = other.means[i] - self.means[i];
            self.means[i] += d * nb / n;
            self.m2[i] += other.m2[i] + d * d * na * nb / n;
        }
        self.trials += other.trials;
        self
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.means[i]
    }

    /// Sum of the observations in coordinate `i`.
    pub fn total(&self, i: usize) -> f64 {
        self.means[i] * self.trials as f64
    }

    /// Standard error of the mean (plug-in variance).
    pub fn std_error(&self, i: usize) -> f64 {
        let n = self.trials as f64;
        let var = self.m2[i].max(0.0) / (n - 1.0).max(1.0);
        (var / n).sqrt()
    }
}

/// Runs `trials` independent trials; trial `t` draws from `base.derive(t)` and writes
/// `width` observations into the provided buffer.
pub fn run_trials<F>(trials: u64, base: &RngStream, width: usize, f: F) -> Result<Moments>
where
    F: Fn(&mut RngStream, &mut [f64]) -> Result<()> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<Moments> {
            let mut m = Moments::zeros(width);
            let mut buf = vec![0.0; width];
            let end = ((c + 1) * CHUNK).min(trials);
            for t in c * CHUNK..end {
                let mut r = base.derive(t);
                buf.iter_mut().for_each(|v| *v = 0.0);
                f(&mut r, &mut buf)?;
                m.push(&buf);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    Ok(parts
        .iter()
        .fold(Moments::zeros(width), |acc, p| acc.merge(p)))
}

/// Per-comparison threshold, in standard errors, for z-score batteries.
pub const BATTERY_Z: f64 = 3.0;
/// No single comparison in a battery may exceed this many standard errors.
pub const BATTERY_HARD_Z: f64 = 4.5;
/// Confidence level of the allowed exceedance count.
const BATTERY_LEVEL: f64 = 0.999;

/// Outcome of many simultaneous `|z| ≤ 3` comparisons.
///
/// With `n` independent comparisons, a few nominal exceedances are expected; the battery
/// passes when their count is within the 99.9% binomial quantile for the nominal rate and
/// no comparison exceeds [`BATTERY_HARD_Z`].
#[derive(Clone, Debug, PartialEq)]
pub struct ZBattery {
    pub comparisons: usize,
    pub exceedances: usize,
    pub allowed: usize,
    pub max_abs_z: f64,
}

impl ZBattery {
    pub fn new(zs: &[f64]) -> Self {
        let n = zs.len();
        let p = 2.0 * Normal::standard().sf(BATTERY_Z);
        let allowed = if n == 0 {
            0
        } else {
            let b = Binomial::new(p, n as u64).expect("valid binomial parameters");
            b.inverse_cdf(BATTERY_LEVEL) as usize
        };
        ZBattery {
            comparisons: n,
            exceedances: zs.iter().filter(|z| z.abs() > BATTERY_Z).count(),
            allowed,
            max_abs_z: zs.iter().fold(0.0, |m, z| m.max(z.abs())),
        }
    }

    pub fn passed(&self) -> bool {
        self.exceedances <= self.allowed && self.max_abs_z <= BATTERY_HARD_Z
    }
}

/// `z = (estimate − reference) / se`, shrinking the gap by a known reference error bound.
/// A zero standard error gives `0` for agreement and infinity otherwise.
pub fn z_score(estimate: f64, reference: f64, std_error: f64, reference_error: f64) -> f64 {
    let gap = ((estimate - reference).abs() - reference_error).max(0.0);
    if gap <= 1e-12 {
        0.0
    } else if std_error > 0.0 {
        gap / std_error
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_of_thread_count() {
        let base = RngStream::new(9, 0);
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                run_trials(10_000, &base, 2, |r, out| {
                    out[0] = r.uniform();
                    out[1] = r.poisson(1.0) as f64;
                    Ok(())
                })
                .unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.means, b.means);
        assert_eq!(a.m2, b.m2);
        assert!((a.mean(0) - 0.5).abs() < 3.0 * a.std_error(0));
    }

    #[test]
    fn battery_thresholds() {
        assert_eq!(ZBattery::new(&[0.0; 10]).allowed, 1);
        let b = ZBattery::new(&vec![0.5; 350]);
        assert!(b.allowed >= 3 && b.passed());
        assert!(!ZBattery::new(&[5.0]).passed());
        assert_eq!(z_score(0.5, 0.5, 0.0, 0.0), 0.0);
        assert!(z_score(0.6, 0.5, 0.0, 0.0).is_infinite());
        assert!((z_score(0.6, 0.5, 0.05, 0.0) - 2.0).abs() < 1e-12);
    }
}
