//! Seeded random streams and the handful of distributions the schemes draw from.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CrsError, Result};
use crate::graph::{EdgeSet, FractionalPoint};

/// Tail mass below which Poisson inversion stops searching.
const POISSON_TAIL: f64 = 1e-15;
/// Largest mean handled by a single inversion pass.
const INVERSION_LIMIT: f64 = 10.0;

/// A reproducible random stream identified by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed and a stream id hashed from `(self.stream_id, label)`.
    pub fn derive(&self, label: u64) -> RngStream {
        RngStream::new(self.seed, splitmix64(self.stream_id ^ splitmix64(label)))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform in `(0, 1]`.
    pub fn uniform_open(&mut self) -> f64 {
        1.0 - self.uniform()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn poisson(&mut self, lambda: f64) -> u64 {
        if lambda <= 0.0 {
            return 0;
        }
        if lambda <= INVERSION_LIMIT {
            return poisson_inversion(self.uniform(), lambda);
        }
        let pieces = (lambda / INVERSION_LIMIT).ceil() as u64;
        let part = lambda / pieces as f64;
        (0..pieces)
            .map(|_| poisson_inversion(self.uniform(), part))
            .sum()
    }

    /// Poisson(λ) conditioned on being at least 1.
    pub fn poisson_geq1(&mut self, lambda: f64) -> Result<u64> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(CrsError::parameter(format!(
                "PoissonGeq1 needs a positive finite mean, got {lambda}"
            )));
        }
        Ok(poisson_geq1_inversion(self.uniform(), lambda))
    }

    pub fn binomial(&mut self, n: u64, p: f64) -> u64 {
        if n == 0 || p <= 0.0 {
            return 0;
        }
        if p >= 1.0 {
            return n;
        }
        if p > 0.5 {
            return n - self.binomial(n, 1.0 - p);
        }
        let chunk = ((INVERSION_LIMIT / p).floor() as u64).max(1);
        let mut left = n;
        let mut total = 0;
        while left > 0 {
            let size = left.min(chunk);
            total += binomial_inversion(self.uniform(), size, p);
            left -= size;
        }
        total
    }

    /// Exponential with the given rate; rate 0 yields `+∞`.
    pub fn exponential(&mut self, rate: f64) -> f64 {
        if rate == 0.0 {
            return f64::INFINITY;
        }
        -self.uniform_open().ln() / rate
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.rng);
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn poisson_inversion(u: f64, lambda: f64) -> u64 {
    let mut k = 0u64;
    let mut pmf = (-lambda).exp();
    let mut cdf = pmf;
    while u >= cdf && 1.0 - cdf > POISSON_TAIL {
        k += 1;
        pmf *= lambda / k as f64;
        cdf += pmf;
        if pmf == 0.0 && k as f64 > lambda {
            break;
        }
    }
    k
}

fn poisson_geq1_inversion(u: f64, lambda: f64) -> u64 {
    let mass = -(-lambda).exp_m1();
    let target = u * mass;
    let mut k = 1u64;
    let mut pmf = lambda * (-lambda).exp();
    let mut cdf = pmf;
    while target >= cdf && (mass - cdf) / mass > POISSON_TAIL {
        k += 1;
        pmf *= lambda / k as f64;
        cdf += pmf;
        if pmf == 0.0 && k as f64 > lambda {
            break;
        }
    }
    k
}

fn binomial_inversion(u: f64, n: u64, p: f64) -> u64 {
    let ratio = p / (1.0 - p);
    let mut pmf = (n as f64 * (-p).ln_1p()).exp();
    let mut cdf = pmf;
    let mut k = 0u64;
    while u >= cdf && k < n {
        pmf *= (n - k) as f64 / (k + 1) as f64 * ratio;
        k += 1;
        cdf += pmf;
        if 1.0 - cdf <= POISSON_TAIL {
            break;
        }
    }
    k
}

/// Precomputed inversion table for repeated draws with a fixed small mean.
#[derive(Clone, Debug)]
pub struct CdfTable {
    cdf: Vec<f64>,
    offset: u64,
}

impl CdfTable {
    /// Poisson(λ) for `0 ≤ λ ≤ 10`.
    pub fn poisson(lambda: f64) -> Self {
        assert!((0.0..=INVERSION_LIMIT).contains(&lambda));
        let mut cdf = Vec::new();
        let mut pmf = (-lambda).exp();
        let mut acc = pmf;
        let mut k = 0u64;
        cdf.push(acc);
        while 1.0 - acc > POISSON_TAIL && !(pmf == 0.0 && k as f64 > lambda) {
            k += 1;
            pmf *= lambda / k as f64;
            acc += pmf;
            cdf.push(acc);
        }
        CdfTable { cdf, offset: 0 }
    }

    /// Poisson(λ) conditioned on at least 1, for `0 < λ ≤ 10`.
    pub fn poisson_geq1(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= INVERSION_LIMIT) {
            return Err(CrsError::parameter(format!(
                "PoissonGeq1 table needs 0 < λ ≤ {INVERSION_LIMIT}, got {lambda}"
            )));
        }
        let mass = -(-lambda).exp_m1();
        let mut cdf = Vec::new();
        let mut pmf = lambda * (-lambda).exp() / mass;
        let mut acc = pmf;
        let mut k = 1u64;
        cdf.push(acc);
        while 1.0 - acc > POISSON_TAIL && !(pmf == 0.0 && k as f64 > lambda) {
            k += 1;
            pmf *= lambda / k as f64;
            acc += pmf;
            cdf.push(acc);
        }
        Ok(CdfTable { cdf, offset: 1 })
    }

    /// Binomial(n, p) via its full pmf.
    pub fn binomial(n: u64, p: f64) -> Self {
        let mut cdf = Vec::with_capacity(n as usize + 1);
        if p <= 0.0 {
            return CdfTable {
                cdf: vec![1.0],
                offset: 0,
            };
        }
        if p >= 1.0 {
            let mut cdf = vec![0.0; n as usize];
            cdf.push(1.0);
            return CdfTable { cdf, offset: 0 };
        }
        let ratio = p / (1.0 - p);
        let mut pmf = (n as f64 * (-p).ln_1p()).exp();
        let mut acc = pmf;
        cdf.push(acc);
        for k in 0..n {
            pmf *= (n - k) as f64 / (k + 1) as f64 * ratio;
            acc += pmf;
            cdf.push(acc);
            if 1.0 - acc <= POISSON_TAIL && pmf < 1e-300 {
                break;
            }
        }
        CdfTable { cdf, offset: 0 }
    }

    /// Inverts a uniform `u ∈ [0, 1)`.
    pub fn invert(&self, u: f64) -> u64 {
        let k = self
            .cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cdf.len() - 1);
        k as u64 + self.offset
    }

    pub fn sample(&self, r: &mut RngStream) -> u64 {
        self.invert(r.uniform())
    }
}

/// `(1 − e^{−x}) / x`, continuous at 0.
pub fn keep_probability(x: f64) -> f64 {
    if x < 1e-8 {
        1.0 - x / 2.0
    } else {
        -(-x).exp_m1() / x
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Distribution {
    Bernoulli(f64),
    Binomial(u64, f64),
    Poisson(f64),
    PoissonGeq1(f64),
    Exponential(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sample {
    Int(u64),
    Real(f64),
}

impl Sample {
    pub fn as_f64(self) -> f64 {
        match self {
            Sample::Int(k) => k as f64,
            Sample::Real(v) => v,
        }
    }
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| p.is_finite() && (0.0..=1.0).contains(&p);
        let ok = match *self {
            Distribution::Bernoulli(p) | Distribution::Binomial(_, p) => prob(p),
            Distribution::Poisson(l) | Distribution::Exponential(l) => l.is_finite() && l >= 0.0,
            Distribution::PoissonGeq1(l) => l.is_finite() && l > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(CrsError::parameter(format!(
                "invalid distribution {self:?}"
            )))
        }
    }
}

pub fn draw(d: Distribution, r: &mut RngStream) -> Result<Sample> {
    d.validate()?;
    Ok(match d {
        Distribution::Bernoulli(p) => Sample::Int(r.bernoulli(p) as u64),
        Distribution::Binomial(n, p) => Sample::Int(r.binomial(n, p)),
        Distribution::Poisson(l) => Sample::Int(r.poisson(l)),
        Distribution::PoissonGeq1(l) => Sample::Int(r.poisson_geq1(l)?),
        Distribution::Exponential(rate) => Sample::Real(r.exponential(rate)),
    })
}

/// `R(x)`: each edge independently with probability `x_e`.
pub fn independent_round(x: &FractionalPoint, r: &mut RngStream) -> EdgeSet {
    EdgeSet::from_mask(x.values().iter().map(|&p| r.bernoulli(p)).collect())
}

/// Keeps each `e ∈ a` independently with probability `(1 − e^{−x_e}) / x_e`.
pub fn subsample(a: &EdgeSet, x: &FractionalPoint, r: &mut RngStream) -> Result<EdgeSet> {
    if a.universe() != x.len() {
        return Err(CrsError::input("edge set and point have different lengths"));
    }
    let mut out = EdgeSet::empty(a.universe());
    for e in a.iter() {
        let xe = x.get(e);
        if xe <= 0.0 {
            return Err(CrsError::input(format!("edge {e} is not in supp(x)")));
        }
        if r.bernoulli(keep_probability(xe)) {
            out.insert(e);
        }
    }
    Ok(out)
}
