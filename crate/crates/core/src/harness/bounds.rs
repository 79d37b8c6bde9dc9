//! Exact checks of the rewinding bound β ≥ α³ and of Serfling's inequality
//! for sampling without replacement.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::bits::Bits;
use crate::error::{param, Error, Result};
use crate::harness::{trial_rng, ExperimentConfig};

/// Largest challenge space handled exactly.
pub const UNRUH_MAX_CHALLENGES: usize = 1 << 12;

/// Largest number of subsets enumerated by the Serfling experiment.
pub const SERFLING_MAX_SUBSETS: u64 = 10_000_000;

/// One initial state of the adversary: its probability and, per challenge,
/// the probability of answering that challenge acceptably.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnruhState {
    pub weight: BigRational,
    pub accept: Vec<BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnruhStrategy {
    pub name: String,
    pub challenges: usize,
    pub states: Vec<UnruhState>,
}

impl UnruhStrategy {
    /// A single initial state that accepts exactly the marked challenges.
    pub fn deterministic(name: &str, accept: Vec<bool>) -> Self {
        let accept = accept.into_iter().map(|b| if b { BigRational::one() } else { BigRational::zero() }).collect::<Vec<_>>();
        UnruhStrategy { name: name.to_string(), challenges: accept.len(), states: vec![UnruhState { weight: BigRational::one(), accept }] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnruhReport {
    pub strategy: String,
    pub challenges: usize,
    pub alpha: BigRational,
    pub beta: BigRational,
    pub bound_holds: bool,
}

impl Serialize for UnruhReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Row<'a> {
            strategy: &'a str,
            challenges: usize,
            alpha: String,
            beta: String,
            alpha_f64: f64,
            beta_f64: f64,
            alpha_cubed_f64: f64,
            bound_holds: bool,
        }
        let a = self.alpha.to_f64().unwrap_or(f64::NAN);
        Row {
            strategy: &self.strategy,
            challenges: self.challenges,
            alpha: self.alpha.to_string(),
            beta: self.beta.to_string(),
            alpha_f64: a,
            beta_f64: self.beta.to_f64().unwrap_or(f64::NAN),
            alpha_cubed_f64: a * a * a,
            bound_holds: self.bound_holds,
        }
        .serialize(s)
    }
}

/// α is the probability of answering one uniform challenge; β that of
/// answering a uniform challenge, rewinding to the state before it, and
/// answering an independent uniform challenge. Given the initial state the
/// two answers are independent, so β = E[a(ρ)²] with a(ρ) the state's
/// average acceptance.
pub fn unruh_bound_experiment(strategy: &UnruhStrategy) -> Result<UnruhReport> {
    let c = strategy.challenges;
    if c == 0 {
        return param("empty challenge space");
    }
    if c > UNRUH_MAX_CHALLENGES {
        return Err(Error::Capability(format!("|C| = {c} exceeds the exact limit {UNRUH_MAX_CHALLENGES}")));
    }
    let unit = |x: &BigRational| !x.is_negative() && *x <= BigRational::one();
    let mut total = BigRational::zero();
    let mut alpha = BigRational::zero();
    let mut beta = BigRational::zero();
    let size = BigRational::from_integer(BigInt::from(c));
    for s in &strategy.states {
        if s.accept.len() != c || !unit(&s.weight) || !s.accept.iter().all(unit) {
            return param(format!("state of strategy {} is malformed", strategy.name));
        }
        let a = s.accept.iter().fold(BigRational::zero(), |acc, p| acc + p) / &size;
        alpha += &s.weight * &a;
        beta += &s.weight * &a * &a;
        total += &s.weight;
    }
    if !total.is_one() {
        return param(format!("weights of strategy {} sum to {total}", strategy.name));
    }
    let bound_holds = beta >= &alpha * &alpha * &alpha;
    Ok(UnruhReport { strategy: strategy.name.clone(), challenges: c, alpha, beta, bound_holds })
}

/// 2·exp(−2δ²kn/(n−k+1)).
pub fn serfling_bound(n: usize, k: usize, delta: f64) -> f64 {
    let (n, k) = (n as f64, k as f64);
    2.0 * (-2.0 * delta * delta * k * n / (n - k + 1.0)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SerflingRow {
    pub n: usize,
    pub k: usize,
    pub ones: usize,
    pub mu: f64,
    pub delta: f64,
    /// Pr[|sample mean − μ| > δ].
    pub tail: f64,
    /// The exact tail as a fraction; empty for Monte Carlo rows.
    pub tail_exact: String,
    pub bound: f64,
    pub exact: bool,
    /// Standard error of a Monte Carlo tail; 0 for exact rows.
    pub std_err: f64,
    /// Exact rows: tail ≤ bound. Monte Carlo rows: tail − 3·std_err ≤ bound.
    pub holds: bool,
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Next bit pattern with the same number of ones.
fn gosper(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

/// |j/k − ones/n| > δ, compared exactly.
fn deviates(j: usize, k: usize, ones: usize, n: usize, delta: &BigRational) -> bool {
    let diff = BigRational::new(BigInt::from(j * n) - BigInt::from(ones * k), BigInt::from(k * n));
    diff.abs() > *delta
}

/// Tail of the sample mean of k entries of `b` drawn without replacement,
/// against Serfling's bound, for each δ. Exact by enumerating all k-subsets
/// when there are at most 10^7; otherwise `config.trials` Monte Carlo
/// samples.
pub fn serfling_experiment(b: &Bits, k: usize, deltas: &[f64], config: &ExperimentConfig) -> Result<Vec<SerflingRow>> {
    let n = b.len();
    if k == 0 || k > n {
        return param(format!("sample size {k} must lie in 1..={n}"));
    }
    if deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return param("deltas must be positive");
    }
    let ones = b.count_ones();
    let exact = n <= 63 && binomial(n as u64, k as u64) <= SERFLING_MAX_SUBSETS as u128;
    // hist[j]: number of subsets (or samples) containing j ones.
    let mut hist = vec![0u64; k + 1];
    let samples: u64;
    if exact {
        let mask: u64 = (0..n).filter(|&i| b.get(i)).fold(0, |m, i| m | 1 << i);
        let mut s: u64 = (1u64 << k) - 1;
        let mut count = 0u64;
        while s < 1u64 << n {
            hist[(s & mask).count_ones() as usize] += 1;
            count += 1;
            if k == n {
                break;
            }
            s = gosper(s);
        }
        samples = count;
    } else {
        config.validate()?;
        let counts: Vec<usize> = (0..config.trials as u64)
            .into_par_iter()
            .map(|i| sample(&mut trial_rng(config.seed, i), n, k).iter().filter(|&i| b.get(i)).count())
            .collect();
        for j in counts {
            hist[j] += 1;
        }
        samples = config.trials as u64;
    }
    let mu = ones as f64 / n as f64;
    deltas
        .iter()
        .map(|&delta| {
            let d = BigRational::from_float(delta).ok_or_else(|| Error::Param(format!("delta {delta} is not finite")))?;
            let hits: u64 = (0..=k).filter(|&j| deviates(j, k, ones, n, &d)).map(|j| hist[j]).sum();
            let frac = BigRational::new(BigInt::from(hits), BigInt::from(samples));
            let tail = frac.to_f64().unwrap_or(f64::NAN);
            let bound = serfling_bound(n, k, delta);
            let std_err = if exact { 0.0 } else { (tail * (1.0 - tail) / samples as f64).sqrt() };
            let holds = if exact { tail <= bound } else { tail - 3.0 * std_err <= bound };
            Ok(SerflingRow {
                n,
                k,
                ones,
                mu,
                delta,
                tail,
                tail_exact: if exact { frac.to_string() } else { String::new() },
                bound,
                exact,
                std_err,
                holds,
            })
        })
        .collect()
}
