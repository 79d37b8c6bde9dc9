//! Scripted adversaries used by the experiments and tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, RngCore};

use crate::bits::Bits;
use crate::error::{param, protocol, Result};
use crate::extcom::StrongParams;
use crate::harness::bounds::{UnruhState, UnruhStrategy};
use crate::harness::extract::SimlessPoint;
use crate::vss::{vss_share, VssView};
use crate::wextcom::{ShareMatrix, WCommitter, WCommitterStrategy, WDecommit, WOpening, WParams};
use crate::wire::Encode;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WBehavior {
    Honest,
    /// Opens for this one challenge and aborts on every other.
    AcceptOnly(Bits),
    /// Aborts on challenges of odd weight.
    AbortOddParity,
    /// Flips a bit of the opened share of this pair when its challenge bit is 1.
    GarbleOnOne(usize),
}

/// A weak committer following a script; its commitments are always well
/// formed, its share pairs need not be consistent.
#[derive(Clone, Debug)]
pub struct ScriptedW {
    pub id: String,
    pub inner: WCommitter,
    pub behavior: WBehavior,
}

impl ScriptedW {
    pub fn new<R: RngCore + ?Sized>(message: &Bits, params: &WParams, behavior: WBehavior, rng: &mut R) -> Result<Self> {
        let inner = WCommitter::new(message, params, rng)?;
        Ok(ScriptedW { id: format!("{behavior:?}"), inner, behavior })
    }

    pub fn from_shares<R: RngCore + ?Sized>(shares: ShareMatrix, params: &WParams, behavior: WBehavior, rng: &mut R) -> Result<Self> {
        let inner = WCommitter::from_shares(shares, params, rng)?;
        Ok(ScriptedW { id: format!("{behavior:?}"), inner, behavior })
    }

    fn named(mut self, id: &str) -> Self {
        self.id = id.to_string();
        self
    }
}

impl WCommitterStrategy for ScriptedW {
    fn commit(&mut self, naor: &crate::wextcom::NaorFirst) -> Result<crate::wextcom::WComs> {
        self.inner.commit(naor)
    }

    fn open(&mut self, challenge: &Bits) -> Result<WOpening> {
        match &self.behavior {
            WBehavior::Honest => self.inner.open(challenge),
            WBehavior::AcceptOnly(c) if c == challenge => self.inner.open(challenge),
            WBehavior::AcceptOnly(_) => protocol("scripted abort"),
            WBehavior::AbortOddParity if challenge.count_ones() % 2 == 1 => protocol("scripted abort"),
            WBehavior::AbortOddParity => self.inner.open(challenge),
            WBehavior::GarbleOnOne(pair) => {
                let mut o = self.inner.open(challenge)?;
                if challenge.get(*pair) {
                    o.values[*pair].flip(0);
                }
                Ok(o)
            }
        }
    }

    fn decommit(&mut self) -> Result<WDecommit> {
        self.inner.decommit()
    }
}

/// Weak committer strategies for k pairs: honest and challenge-selective
/// ones with consistent shares, and two with one inconsistent pair.
pub fn w_suite<R: RngCore + ?Sized>(params: &WParams, rng: &mut R) -> Result<Vec<ScriptedW>> {
    let k = params.k;
    let m = Bits::random(params.len, rng);
    let mut out = vec![
        ScriptedW::new(&m, params, WBehavior::Honest, rng)?.named("honest"),
        ScriptedW::new(&m, params, WBehavior::AcceptOnly(Bits::zeros(k)), rng)?.named("accept-zero-only"),
        ScriptedW::new(&m, params, WBehavior::AcceptOnly(Bits::random(k, rng)), rng)?.named("accept-one-only"),
        ScriptedW::new(&m, params, WBehavior::AbortOddParity, rng)?.named("abort-odd-parity"),
        ScriptedW::new(&m, params, WBehavior::GarbleOnOne(0), rng)?.named("garble-first-pair"),
        ScriptedW::new(&m, params, WBehavior::GarbleOnOne(k - 1), rng)?.named("garble-last-pair"),
    ];
    let mut shares = ShareMatrix::share(&m, k, rng);
    shares.pairs[0][1].flip(0);
    out.push(ScriptedW::from_shares(shares.clone(), params, WBehavior::Honest, rng)?.named("inconsistent-pair"));
    out.push(ScriptedW::from_shares(shares, params, WBehavior::AbortOddParity, rng)?.named("inconsistent-pair-odd-abort"));
    Ok(out)
}

/// Honest views of `message` in which, for each listed pair (a, b), party a
/// recorded a wrong value from b and complained. Exactly those pairs become
/// inconsistent; every view stays well formed.
pub fn views_with_inconsistent_pairs<R: RngCore + ?Sized>(message: &Bits, params: &StrongParams, pairs: &[(usize, usize)], rng: &mut R) -> Result<Vec<Bits>> {
    let (mut views, _) = vss_share(message, &params.vss(), rng)?;
    let p = params.p;
    for &(a, b) in pairs {
        if a == b || a >= params.n || b >= params.n {
            return param(format!("bad pair ({a}, {b})"));
        }
        let v: &mut VssView = &mut views[a];
        let slot = v.slot_of(b + 1);
        v.cross[slot][0] = (v.cross[slot][0] + 1) % p;
        v.flags[slot] = true;
        for view in views.iter_mut() {
            view.complainers[a] = true;
        }
    }
    Ok(views.iter().map(|v| Bits::from_bytes(&v.encode())).collect())
}

/// Accept vector of the weak strategy at its rewind point, over all 2^k
/// challenges, as a deterministic Unruh strategy.
pub fn unruh_from_weak<S: WCommitterStrategy>(name: &str, point: &SimlessPoint<S>) -> UnruhStrategy {
    let k = point.params.k;
    let accept = (0..1u64 << k)
        .map(|c| {
            let c = Bits::from_u64(c, k);
            let mut adv = point.adversary.clone();
            let mut recv = point.receiver.clone();
            point.committed && recv.set_challenge(c.clone()).is_ok() && adv.open(&c).map(|o| recv.receive_opening(o)).unwrap_or(false)
        })
        .collect();
    UnruhStrategy::deterministic(name, accept)
}

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn bools(n: usize, f: impl Fn(usize) -> bool) -> Vec<bool> {
    (0..n).map(f).collect()
}

fn as_prob(v: &[bool]) -> Vec<BigRational> {
    v.iter().map(|&b| if b { BigRational::one() } else { BigRational::zero() }).collect()
}

/// Programmed challenge-accept strategies with |C| between 4 and 1024.
pub fn unruh_suite<R: RngCore + ?Sized>(rng: &mut R) -> Vec<UnruhStrategy> {
    let mut out = vec![
        UnruhStrategy::deterministic("accept-all", vec![true; 4]),
        UnruhStrategy::deterministic("accept-none", vec![false; 8]),
        UnruhStrategy::deterministic("accept-one", bools(8, |i| i == 0)),
        UnruhStrategy::deterministic("accept-half", bools(4, |i| i < 2)),
        UnruhStrategy::deterministic("accept-quarter", bools(64, |i| i < 16)),
        UnruhStrategy::deterministic("accept-even", bools(16, |i| i % 2 == 0)),
        UnruhStrategy::deterministic("accept-third", bools(300, |i| i < 100)),
        UnruhStrategy::deterministic("accept-last", bools(1024, |i| i == 1023)),
    ];
    for (name, size, density) in [("random-sparse", 128, 0.3), ("random-dense", 1024, 0.9), ("random-rare", 512, 0.02)] {
        let v: Vec<bool> = (0..size).map(|_| rng.gen_bool(density)).collect();
        out.push(UnruhStrategy::deterministic(name, v));
    }
    out.push(UnruhStrategy {
        name: "graded".into(),
        challenges: 32,
        states: vec![UnruhState { weight: BigRational::one(), accept: (0..32).map(|i| ratio(i, 31)).collect() }],
    });
    out.push(UnruhStrategy {
        name: "coin-per-challenge".into(),
        challenges: 4,
        states: vec![UnruhState { weight: BigRational::one(), accept: vec![ratio(1, 2); 4] }],
    });
    // One initial state per challenge, each accepting only its own: the
    // strategy that guesses the challenge in advance.
    out.push(UnruhStrategy {
        name: "guess-in-advance".into(),
        challenges: 16,
        states: (0..16).map(|s| UnruhState { weight: ratio(1, 16), accept: as_prob(&bools(16, |i| i == s)) }).collect(),
    });
    out.push(UnruhStrategy {
        name: "all-or-nothing".into(),
        challenges: 256,
        states: vec![
            UnruhState { weight: ratio(1, 2), accept: as_prob(&[true; 256]) },
            UnruhState { weight: ratio(1, 2), accept: as_prob(&[false; 256]) },
        ],
    });
    out.push(UnruhStrategy {
        name: "one-or-half".into(),
        challenges: 512,
        states: vec![
            UnruhState { weight: ratio(1, 3), accept: as_prob(&bools(512, |i| i == 7)) },
            UnruhState { weight: ratio(2, 3), accept: as_prob(&bools(512, |i| i % 2 == 1)) },
        ],
    });
    let weights: Vec<i64> = (0..8).map(|_| rng.gen_range(1..20)).collect();
    let total: i64 = weights.iter().sum();
    out.push(UnruhStrategy {
        name: "random-mixture".into(),
        challenges: 1024,
        states: weights
            .iter()
            .map(|&w| {
                let density = rng.gen_range(0.0..1.0);
                UnruhState { weight: ratio(w, total), accept: as_prob(&(0..1024).map(|_| rng.gen_bool(density)).collect::<Vec<_>>()) }
            })
            .collect(),
    });
    out.push(UnruhStrategy {
        name: "random-probabilities".into(),
        challenges: 100,
        states: vec![UnruhState { weight: BigRational::one(), accept: (0..100).map(|_| ratio(rng.gen_range(0..=10), 10)).collect() }],
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prg::PrgSpec;
    use crate::vss::vss_bytes_consistent;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn inconsistent_pairs_are_exactly_the_listed_ones() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let params = StrongParams::new(10, 3, 2, 8, PrgSpec::toy(4).unwrap()).unwrap();
        let views = views_with_inconsistent_pairs(&Bits::zeros(8), &params, &[(0, 1), (5, 2)], &mut rng).unwrap();
        for a in 0..10 {
            for b in a + 1..10 {
                let bad = [(0, 1), (2, 5)].contains(&(a, b));
                assert_eq!(vss_bytes_consistent(views[a].as_bytes(), views[b].as_bytes()), !bad, "pair {a} {b}");
            }
        }
    }

    #[test]
    fn scripted_behaviours() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let params = WParams::new(3, 4, PrgSpec::toy(4).unwrap()).unwrap();
        let suite = w_suite(&params, &mut rng).unwrap();
        assert_eq!(suite.len(), 8);
        let mut odd = suite[3].clone();
        assert!(odd.open(&Bits::parse("100").unwrap()).is_err());
        assert!(odd.open(&Bits::parse("110").unwrap()).is_ok());
        assert!(!suite[6].inner.shares.is_consistent());
    }
}
