//! Zero-knowledge simulation of the commit-and-prove prove stage.
//!
//! The simulator commits to 0^ℓ, fixes the audit subset T̃ in advance by
//! sampling a target coin, simulates the MPC views of T̃ from a sharing of
//! zero, commits to zero strings elsewhere, and forces the coin flip: it
//! extracts the verifier's r1 by rewinding and answers r2 = target ⊕ r1.

use std::collections::HashMap;

use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::base_commit::{commit_blocks, Blocks, Seeds};
use crate::bits::Bits;
use crate::circuit::Circuit;
use crate::ecnp::{ecnp_commit_with, EcnpParams, EcnpProver, EcnpVerdict, EcnpVerifier, Failure, ViewOpening};
use crate::error::{param, Error, Result};
use crate::extcom::{derive_subset, sc_decommit_verify, Framing, ScCommitterStrategy, ScReceiver};
use crate::field::Field;
use crate::harness::extract::strong_extract_with;
use crate::harness::{trial_rng, ExperimentConfig};
use crate::mpc::{mpc_run, MpcPlan, MpcView};
use crate::transport::exchange::Exchange;
use crate::transport::msg;
use crate::transport::transcript::{Party, Transcript};
use crate::vss::{views_from_dealer, DealerView, VssParams, VssView};
use crate::wextcom::WDecommit;
use crate::wire::Encode;

/// MPC views for an execution whose output is 1, from input views of any
/// sharing. `corrupt` holds exactly t parties (0-based). The run is honest
/// except that the output shares the other parties send to `corrupt` are
/// replaced by the degree-t polynomial through (0, 1) and the corrupted
/// parties' own output shares. All n views are returned; only those of
/// `corrupt` are meaningful.
pub fn mpc_simulate(circuit: &Circuit, inputs: &[VssView], tapes: &[Vec<u32>], corrupt: &[usize]) -> Result<Vec<MpcView>> {
    let first = inputs.first().ok_or_else(|| Error::Param("no input views".into()))?;
    let (n, t, p) = (first.n, first.t, first.p);
    if corrupt.len() != t || corrupt.iter().any(|&i| i >= n) {
        return param(format!("need {t} corrupted parties below {n}"));
    }
    let plan = MpcPlan::new(circuit, n, t, p)?;
    let field = Field::new(p)?;
    let last = plan.rounds() - 1;
    let mut own = vec![0u32; n];
    mpc_run(circuit, inputs, tapes, &mut |round, from, _, m| {
        if round == last {
            own[from - 1] = m[0] % p;
        }
    })?;
    let mut points = vec![(0u32, 1u32)];
    points.extend(corrupt.iter().map(|&j| (j as u32 + 1, own[j])));
    let poly = field.interpolate(&points);
    let (views, _) = mpc_run(circuit, inputs, tapes, &mut |round, from, to, m| {
        if round == last && corrupt.contains(&(to - 1)) && !corrupt.contains(&(from - 1)) {
            m[0] = field.eval(&poly, from as u32);
        }
    })?;
    Ok(views)
}

#[derive(Clone, Debug)]
pub struct ZkSimulation {
    pub transcript: Transcript,
    pub verdict: EcnpVerdict,
    /// The audit subset fixed before the prove stage.
    pub target: Vec<usize>,
    pub attempts: usize,
}

/// Simulated commit stage: the prover side commits to 0^ℓ.
pub fn zk_simulate_commit<R: RngCore + ?Sized>(mut verifier: EcnpVerifier, rng: &mut R) -> Result<(EcnpProver, EcnpVerifier, Transcript)> {
    let mut prover = EcnpProver::new(&Bits::zeros(verifier.params.outer.len), &verifier.params, rng)?;
    let mut tr = Transcript::new();
    ecnp_commit_with(&mut prover, &mut verifier, &mut tr);
    Ok((prover, verifier, tr))
}

/// Simulated prove stage against `verifier`, continuing `prefix`. `sim` is
/// the prover of the simulated commit stage. The verifier is rewound to its
/// state at the start of each attempt; an attempt is retried when the
/// extraction of r1 fails, at most ⌈1/ε⌉ times.
pub fn zk_simulate_prove_stage<R: RngCore + ?Sized>(
    sim: &EcnpProver,
    verifier: &EcnpVerifier,
    circuit: &Circuit,
    prefix: &Transcript,
    config: &ExperimentConfig,
    rng: &mut R,
) -> Result<ZkSimulation> {
    config.validate()?;
    let params = &sim.params;
    let o = params.outer;
    if !verifier.commit_accepted() {
        let verdict = EcnpVerdict::reject(false, Vec::new(), Failure::CommitRejected);
        return Ok(ZkSimulation { transcript: prefix.clone(), verdict, target: Vec::new(), attempts: 0 });
    }
    let plan = MpcPlan::new(circuit, o.n, o.t, o.p)?;
    let bits = params.mpc_view_bits(circuit)?;
    let coin = params.coin();
    let framing = Framing::Wrapped(msg::ECNP_COIN_ROUND, Party::P2);
    for attempt in 1..=config.retries() {
        let mut v = verifier.clone();
        let mut tr = prefix.clone();
        let r_target = Bits::random(o.coin_len, rng);
        let target = derive_subset(&r_target, o.n, o.t, &o.prg)?;
        let done = |tr: Transcript, verdict: EcnpVerdict| Ok(ZkSimulation { transcript: tr, verdict, target: target.clone(), attempts: attempt });
        let abort = |tr: Transcript, e: Error| done(tr, EcnpVerdict::reject(true, Vec::new(), Failure::Aborted(e.to_string())));

        let naor = match tr.msg(Party::P2, msg::ECNP_VIEW_NAOR, || v.view_naor(circuit)) {
            Ok(x) => x,
            Err(e) => return abort(tr, e),
        };
        let tapes: Vec<Vec<u32>> = (0..o.n).map(|_| plan.sample_tape(rng)).collect();
        let simulated = mpc_simulate(circuit, &sim.views, &tapes, &target)?;
        let views: Vec<Bits> = (0..o.n).map(|i| if target.contains(&i) { Bits::from_bytes(&simulated[i].encode()) } else { Bits::zeros(bits) }).collect();
        if views.iter().any(|x| x.len() != bits) {
            return Err(Error::Simulation("simulated view length differs from the schedule".into()));
        }
        let seeds: Vec<Seeds> = (0..o.n).map(|_| Seeds::random(&o.prg, bits, rng)).collect();
        let coms: Vec<Blocks> = tr.msg(Party::P1, msg::ECNP_VIEW_COMS, || views.iter().zip(&seeds).map(|(x, s)| commit_blocks(&o.prg, x, &naor.r, s)).collect::<Result<_>>())?;
        let coin_committer = match v.receive_view_coms(coms).and_then(|()| v.coin_committer().map(|c| c.clone())) {
            Ok(c) => c,
            Err(e) => return abort(tr, e),
        };

        let receiver = ScReceiver::new(&coin, rng);
        let ex = strong_extract_with(vec![coin_committer], vec![receiver], &coin, framing, &mut tr, rng);
        if !ex.accept.0 {
            // The main thread rejected the verifier's commitment: an honest
            // prover stops here as well.
            let why = ex.outcome.reason.clone().unwrap_or_default();
            return abort(tr, Error::Protocol(format!("coin commitment: {why}")));
        }
        let Some(r1) = ex.value().cloned() else { continue };
        let (mut committers, mut receivers) = (ex.committers, ex.receivers);
        v.coin = committers.pop();
        let r2 = r_target.xor(&r1);
        tr.msg(Party::P1, msg::ECNP_R2, || Ok(r2.clone()))?;
        let reveal: Vec<Option<WDecommit>> = match tr.msg(Party::P2, msg::ECNP_COIN_OPEN, || v.reveal(&r2)) {
            Ok(x) => x,
            Err(e) => return abort(tr, e),
        };
        let session = receivers.pop().expect("one coin session").into_session();
        match sc_decommit_verify(&session, &reveal) {
            None => return abort(tr, Error::Protocol("verifier's r1 decommitment is invalid".into())),
            Some(opened) if opened != r1 => continue,
            Some(_) => {}
        }
        let openings = target
            .iter()
            .map(|&i| Ok(ViewOpening { index: i, inner: sim.committers[i].clone().decommit()?, mpc_view: views[i].clone(), seeds: seeds[i].clone() }))
            .collect::<Result<Vec<_>>>()?;
        let sent = tr.msg(Party::P1, msg::ECNP_OPEN, || Ok(openings))?;
        let verdict = tr.msg(Party::P2, msg::ECNP_VERDICT, || Ok(v.verdict(circuit, &sent)))?;
        return done(tr, verdict);
    }
    Err(Error::Simulation(format!("extraction of the verifier's coin failed {} times", config.retries())))
}

/// Commit stage and prove stage, simulated without the message.
pub fn zk_simulate_prove<R: RngCore + ?Sized>(verifier: EcnpVerifier, circuit: &Circuit, config: &ExperimentConfig, rng: &mut R) -> Result<ZkSimulation> {
    let (sim, verifier, prefix) = zk_simulate_commit(verifier, rng)?;
    zk_simulate_prove_stage(&sim, &verifier, circuit, &prefix, config, rng)
}

/// Position of a sorted size-t subset of 0..n in colexicographic order.
pub fn subset_rank(subset: &[usize]) -> u64 {
    subset.iter().enumerate().map(|(i, &x)| binomial(x as u64, i as u64 + 1)).sum()
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Pearson chi-square test of `counts` against the uniform distribution.
/// Returns (statistic, p-value).
pub fn chi_square_uniform(counts: &[u64]) -> Result<(f64, f64)> {
    let total: u64 = counts.iter().sum();
    if counts.len() < 2 || total == 0 {
        return param("chi-square needs at least two cells and one sample");
    }
    let expect = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    let dist = ChiSquared::new((counts.len() - 1) as f64).map_err(|e| Error::Param(e.to_string()))?;
    Ok((stat, 1.0 - dist.cdf(stat)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZkReport {
    pub n: usize,
    pub t: usize,
    pub runs: usize,
    pub accepted: usize,
    /// Extraction attempts summed over all runs.
    pub attempts: usize,
    pub chi_square: f64,
    pub p_value: f64,
}

/// Simulates one commit stage against an honest verifier, then `trials`
/// prove stages from copies of the verifier with fresh coins, and tests the
/// audit subsets for uniformity.
pub fn zk_experiment(params: &EcnpParams, circuit: &Circuit, config: &ExperimentConfig) -> Result<ZkReport> {
    config.validate()?;
    let o = params.outer;
    let cells = binomial(o.n as u64, o.t as u64);
    if cells > 1 << 20 {
        return Err(Error::Capability(format!("C({}, {}) audit subsets is too many cells", o.n, o.t)));
    }
    let mut rng = trial_rng(config.seed, u64::MAX);
    let verifier = EcnpVerifier::new(params, &mut rng);
    let (sim, verifier, _) = zk_simulate_commit(verifier, &mut rng)?;
    let prefix = Transcript::disabled();
    let runs: Vec<(bool, usize, u64)> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(config.seed, i);
            let mut v = verifier.clone();
            v.reseed(rng.next_u64());
            let s = zk_simulate_prove_stage(&sim, &v, circuit, &prefix, config, &mut rng)?;
            Ok((s.verdict.prove_accept, s.attempts, subset_rank(&s.target)))
        })
        .collect::<Result<_>>()?;
    let mut counts = vec![0u64; cells as usize];
    for &(_, _, r) in &runs {
        counts[r as usize] += 1;
    }
    let (chi_square, p_value) = chi_square_uniform(&counts)?;
    Ok(ZkReport {
        n: o.n,
        t: o.t,
        runs: runs.len(),
        accepted: runs.iter().filter(|r| r.0).count(),
        attempts: runs.iter().map(|r| r.1).sum(),
        chi_square,
        p_value,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportReport {
    /// Executions enumerated on each side.
    pub executions: usize,
    pub real_support: usize,
    pub simulated_support: usize,
    pub identical_support: bool,
    /// Same multiset of (audited party, opened view).
    pub identical_distribution: bool,
}

/// Largest enumeration accepted by [`zk_support_check`].
pub const SUPPORT_MAX_EXECUTIONS: usize = 1 << 22;

/// Exact comparison of what a prove stage opens, at t = 1 and a one-chunk
/// message: the audited party and its MPC view, whose prefix is its VSS
/// view. Real side: every dealer polynomial sharing `secret`, every tape
/// vector, every audited party. Simulated side: the same over sharings of
/// 0, with the simulated output round. The unopened commitments are not
/// enumerated: with uniform pads in place of the generator they are uniform
/// strings on both sides.
pub fn zk_support_check(circuit: &Circuit, n: usize, p: u32, secret: u32) -> Result<SupportReport> {
    let params = VssParams::new(n, 1, p)?;
    let plan = MpcPlan::new(circuit, n, 1, p)?;
    let tape_values = (p as usize).checked_pow((n * plan.tape_len()) as u32).filter(|&x| x * (p * p) as usize * n <= SUPPORT_MAX_EXECUTIONS);
    let Some(tape_count) = tape_values else {
        return Err(Error::Capability("enumeration too large".into()));
    };
    let dealers = |s: u32| -> Vec<DealerView> {
        let mut out = Vec::new();
        for a01 in 0..p {
            for a11 in 0..p {
                out.push(DealerView { params, message_bits: params.chunk_bits(), bivariate: vec![vec![vec![s, a01], vec![a01, a11]]] });
            }
        }
        out
    };
    let tapes = |code: usize| -> Vec<Vec<u32>> {
        let mut c = code;
        (0..n)
            .map(|_| {
                (0..plan.tape_len())
                    .map(|_| {
                        let v = (c % p as usize) as u32;
                        c /= p as usize;
                        v
                    })
                    .collect()
            })
            .collect()
    };
    let mut real: HashMap<(usize, Vec<u8>), u64> = HashMap::new();
    let mut simulated: HashMap<(usize, Vec<u8>), u64> = HashMap::new();
    let mut executions = 0;
    for (d_real, d_zero) in dealers(secret).iter().zip(dealers(0).iter()) {
        let (vr, vz) = (views_from_dealer(d_real)?, views_from_dealer(d_zero)?);
        for code in 0..tape_count {
            let tp = tapes(code);
            let (mviews, outputs) = mpc_run(circuit, &vr, &tp, &mut |_, _, _, _| {})?;
            if outputs.iter().any(|&y| y != 1) {
                return param("the secret does not satisfy the circuit");
            }
            for i in 0..n {
                *real.entry((i, mviews[i].encode())).or_default() += 1;
                let sim = mpc_simulate(circuit, &vz, &tp, &[i])?;
                *simulated.entry((i, sim[i].encode())).or_default() += 1;
                executions += 1;
            }
        }
    }
    let identical_support = real.len() == simulated.len() && real.keys().all(|k| simulated.contains_key(k));
    Ok(SupportReport {
        executions,
        real_support: real.len(),
        simulated_support: simulated.len(),
        identical_support,
        identical_distribution: real == simulated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::compile_target_predicate;
    use crate::extcom::StrongParams;
    use crate::mpc::mpc_view_consistent;
    use crate::prg::PrgSpec;
    use crate::vss::vss_share;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn micro() -> EcnpParams {
        EcnpParams::new(StrongParams::new(4, 1, 2, 8, PrgSpec::toy(4).unwrap()).unwrap())
    }

    #[test]
    fn simulated_views_are_consistent_and_output_one() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let vp = VssParams::new(7, 2, 257).unwrap();
        let circuit = Circuit::parse("0 input 0\n1 mul 0 0\n2 mul 1 0\n3 output 2\n").unwrap();
        let (views, _) = vss_share(&Bits::from_u64(5, 8), &vp, &mut rng).unwrap();
        let plan = MpcPlan::new(&circuit, 7, 2, 257).unwrap();
        let tapes: Vec<Vec<u32>> = (0..7).map(|_| plan.sample_tape(&mut rng)).collect();
        let sim = mpc_simulate(&circuit, &views, &tapes, &[1, 5]).unwrap();
        assert_eq!((sim[1].output, sim[5].output), (1, 1));
        assert!(mpc_view_consistent(&sim[1], &sim[5], &circuit).unwrap());
    }

    #[test]
    fn simulator_convinces_the_honest_verifier() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let params = micro();
        let o = params.outer;
        // A predicate the all-zero message does not satisfy.
        let circuit = compile_target_predicate(&Bits::parse("10100101").unwrap(), o.len, o.vss().chunk_bits(), &o.vss().field).unwrap();
        let cfg = ExperimentConfig::default();
        for _ in 0..3 {
            let v = EcnpVerifier::new(&params, &mut rng);
            let sim = zk_simulate_prove(v, &circuit, &cfg, &mut rng).unwrap();
            assert!(sim.verdict.prove_accept, "{:?}", sim.verdict);
            assert_eq!(sim.verdict.subset, sim.target);
        }
    }

    #[test]
    fn subset_ranks_are_a_bijection() {
        let mut seen = std::collections::HashSet::new();
        for a in 0..6 {
            for b in a + 1..6 {
                for c in b + 1..6 {
                    let r = subset_rank(&[a, b, c]);
                    assert!(r < 20 && seen.insert(r));
                }
            }
        }
    }

    #[test]
    fn chi_square_values() {
        // Frozen from scipy.stats.chisquare([10, 20, 30]) -> (10.0, 0.006737946999085467).
        let (stat, p) = chi_square_uniform(&[10, 20, 30]).unwrap();
        assert!((stat - 10.0).abs() < 1e-12);
        assert!((p - 0.006_737_946_999_085_467).abs() < 1e-9);
        assert!(chi_square_uniform(&[5]).is_err());
    }

    #[test]
    fn audit_subsets_are_uniform() {
        let params = EcnpParams::new(StrongParams::with_options(5, 1, 2, 8, PrgSpec::toy(4).unwrap(), 32, 257).unwrap());
        let o = params.outer;
        let circuit = compile_target_predicate(&Bits::parse("00000001").unwrap(), o.len, o.vss().chunk_bits(), &o.vss().field).unwrap();
        let cfg = ExperimentConfig::default().with_trials(400).with_seed(5);
        let rep = zk_experiment(&params, &circuit, &cfg).unwrap();
        assert_eq!(rep.accepted, 400);
        assert!(rep.p_value > 0.01, "{rep:?}");
    }

    #[test]
    fn micro_supports_match() {
        // x ↦ x² at p = 5, secret 1 (output 1), n = 4, t = 1.
        let circuit = Circuit::parse("0 input 0\n1 mul 0 0\n2 output 1\n").unwrap();
        let rep = zk_support_check(&circuit, 4, 5, 1).unwrap();
        assert_eq!(rep.executions, 25 * 625 * 4);
        assert!(rep.identical_support && rep.identical_distribution, "{rep:?}");
        assert!(zk_support_check(&circuit, 4, 5, 2).is_err());
    }
}
