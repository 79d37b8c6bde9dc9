//! Extractable commit-and-prove.
//!
//! Commit stage: the prover VSS-shares the message into views v_1..v_n and
//! commits to each with its own strong extractable commitment, all n run in
//! lockstep.
//!
//! Prove stage for a predicate circuit:
//! 1. the prover runs the MPC in the head on the views, giving v'_i whose
//!    encoding starts with the encoding of v_i;
//! 2. it commits to every v'_i with the base scheme;
//! 3. the verifier commits to r1 with a strong extractable commitment;
//! 4. the prover sends r2;
//! 5. the verifier decommits r1;
//! 6. the prover opens v_i and v'_i for every i in T = derive_subset(r1 ⊕ r2);
//! 7. the verifier checks the openings, that v_i is a prefix of v'_i, that
//!    all opened pairs are consistent, and that every opened output is 1.

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::base_commit::{commit_blocks, sample_receiver_r, verify_with_seeds, BaseCommitment, Blocks, Seeds};
use crate::bits::Bits;
use crate::circuit::Circuit;
use crate::error::{param, protocol, Error, Result};
use crate::extcom::{
    decode_view_slot, derive_subset, sc_decommit_verify, sc_drive, Framing, ScCommitter, ScCommitterStrategy, ScReceiver, StrongParams,
    StrongSession,
};
use crate::mpc::{mpc_execute, mpc_run, mpc_view_consistent, MpcPlan, MpcView};
use crate::transport::exchange::Exchange;
use crate::transport::msg;
use crate::transport::transcript::{Party, Transcript};
use crate::vss::{vss_recon, vss_share, ReconInput, VssView};
use crate::wextcom::{NaorFirst, WDecommit};
use crate::wire::{Decode, Encode, Reader, Writer};

/// Outer parameters: n, t, k, message length, PRG, coin length, modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EcnpParams {
    pub outer: StrongParams,
}

impl EcnpParams {
    pub fn new(outer: StrongParams) -> Self {
        EcnpParams { outer }
    }

    /// Parameters of each strong commitment to one encoded view.
    pub fn inner(&self) -> StrongParams {
        self.outer.for_len(self.outer.view_bits()).expect("outer parameters validated")
    }

    /// Parameters of the verifier's strong commitment to r1.
    pub fn coin(&self) -> StrongParams {
        self.outer.for_len(self.outer.coin_len).expect("outer parameters validated")
    }

    pub fn mpc_view_bits(&self, circuit: &Circuit) -> Result<usize> {
        let o = &self.outer;
        let plan = MpcPlan::new(circuit, o.n, o.t, o.p)?;
        Ok(8 * plan.view_len(o.vss().view_len(o.chunks())))
    }
}

/// Why a prove stage rejected.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Failure {
    None,
    CommitRejected,
    /// A party aborted; the text says who and why.
    Aborted(String),
    /// Opening of view i (1-based) did not verify.
    OpenInvalid(usize),
    PrefixMismatch(usize),
    InconsistentPair(usize, usize),
    /// View i opened fine but its MPC output is not 1.
    OutputNotOne(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EcnpVerdict {
    pub commit_accept: bool,
    pub prove_accept: bool,
    /// Opened indices, 0-based ascending; empty if the stage ended early.
    pub subset: Vec<usize>,
    pub failure: Failure,
}

impl EcnpVerdict {
    pub(crate) fn reject(commit_accept: bool, subset: Vec<usize>, failure: Failure) -> Self {
        EcnpVerdict { commit_accept, prove_accept: false, subset, failure }
    }
}

impl Encode for EcnpVerdict {
    fn encode_into(&self, w: &mut Writer) {
        w.u8(self.commit_accept as u8).u8(self.prove_accept as u8);
        w.u16(self.subset.len() as u16);
        for &i in &self.subset {
            w.u16(i as u16);
        }
        match &self.failure {
            Failure::None => w.u8(0),
            Failure::CommitRejected => w.u8(1),
            Failure::Aborted(s) => w.u8(2).bytes(s.as_bytes()),
            Failure::OpenInvalid(i) => w.u8(3).u16(*i as u16),
            Failure::PrefixMismatch(i) => w.u8(4).u16(*i as u16),
            Failure::InconsistentPair(i, j) => w.u8(5).u16(*i as u16).u16(*j as u16),
            Failure::OutputNotOne(i) => w.u8(6).u16(*i as u16),
        };
    }
}

impl Decode for EcnpVerdict {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        let commit_accept = bool::decode_from(r)?;
        let prove_accept = bool::decode_from(r)?;
        let count = r.u16()? as usize;
        let subset = (0..count).map(|_| r.u16().map(usize::from)).collect::<Result<_>>()?;
        let failure = match r.u8()? {
            0 => Failure::None,
            1 => Failure::CommitRejected,
            2 => Failure::Aborted(String::from_utf8_lossy(r.bytes()?).into_owned()),
            3 => Failure::OpenInvalid(r.u16()? as usize),
            4 => Failure::PrefixMismatch(r.u16()? as usize),
            5 => Failure::InconsistentPair(r.u16()? as usize, r.u16()? as usize),
            6 => Failure::OutputNotOne(r.u16()? as usize),
            _ => return protocol("unknown failure code"),
        };
        Ok(EcnpVerdict { commit_accept, prove_accept, subset, failure })
    }
}

/// Step-6 opening of one index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViewOpening {
    pub index: usize,
    /// Decommitment of the strong commitment to v_i.
    pub inner: Vec<Option<WDecommit>>,
    /// v'_i and its base-commitment seeds.
    pub mpc_view: Bits,
    pub seeds: Seeds,
}

impl Encode for ViewOpening {
    fn encode_into(&self, w: &mut Writer) {
        w.u16(self.index as u16);
        self.inner.encode_into(w);
        self.mpc_view.encode_into(w);
        self.seeds.encode_into(w);
    }
}

impl Decode for ViewOpening {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        Ok(ViewOpening {
            index: r.u16()? as usize,
            inner: Vec::decode_from(r)?,
            mpc_view: Bits::decode_from(r)?,
            seeds: Seeds::decode_from(r)?,
        })
    }
}

/// Deviations a scripted cheating prover can apply in the prove stage.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum ProverCheat {
    #[default]
    Honest,
    /// Replace the MPC views at these 0-based positions with views of an
    /// unrelated execution on `message`.
    SubstituteViews { positions: Vec<usize>, message: Bits },
    /// At these positions, rewrite the received output shares to 1 and
    /// record output 1.
    ForgeOutputs(Vec<usize>),
}

/// The prover: VSS views, their strong commitments, and prove-stage state.
#[derive(Clone, Debug)]
pub struct EcnpProver {
    pub params: EcnpParams,
    pub message: Bits,
    pub views: Vec<VssView>,
    pub committers: Vec<ScCommitter>,
    pub cheat: ProverCheat,
    commit_accept: bool,
    mpc_views: Vec<Bits>,
    seeds: Vec<Seeds>,
    coin: Option<ScReceiver>,
    r2: Option<Bits>,
    subset: Option<Vec<usize>>,
    rng: ChaCha20Rng,
}

impl EcnpProver {
    pub fn new<R: RngCore + ?Sized>(message: &Bits, params: &EcnpParams, rng: &mut R) -> Result<Self> {
        if message.len() != params.outer.len {
            return param(format!("message has {} bits, expected {}", message.len(), params.outer.len));
        }
        let (views, _) = vss_share(message, &params.outer.vss(), rng)?;
        Self::from_views(message.clone(), views, params, rng)
    }

    /// Commits to the given views; `message` is only what the prover claims.
    pub fn from_views<R: RngCore + ?Sized>(message: Bits, views: Vec<VssView>, params: &EcnpParams, rng: &mut R) -> Result<Self> {
        let inner = params.inner();
        if views.len() != inner.n {
            return param(format!("need {} views", inner.n));
        }
        let committers = views
            .iter()
            .map(|v| {
                let bits = Bits::from_bytes(&v.encode());
                if bits.len() != inner.len {
                    return param("view encoding does not match the parameters");
                }
                ScCommitter::new(&bits, &inner, rng)
            })
            .collect::<Result<_>>()?;
        let rng = ChaCha20Rng::from_rng(rng).map_err(|e| Error::Param(e.to_string()))?;
        Ok(EcnpProver {
            params: *params,
            message,
            views,
            committers,
            cheat: ProverCheat::Honest,
            commit_accept: false,
            mpc_views: Vec::new(),
            seeds: Vec::new(),
            coin: None,
            r2: None,
            subset: None,
            rng,
        })
    }

    pub fn with_cheat(mut self, cheat: ProverCheat) -> Self {
        self.cheat = cheat;
        self
    }

    pub fn subset(&self) -> Option<&[usize]> {
        self.subset.as_deref()
    }

    pub fn mpc_views(&self) -> &[Bits] {
        &self.mpc_views
    }

    fn run_mpc(&mut self, circuit: &Circuit) -> Result<Vec<MpcView>> {
        match &self.cheat {
            ProverCheat::Honest => Ok(mpc_execute(circuit, &self.views, &mut self.rng)?.0),
            ProverCheat::SubstituteViews { positions, message } => {
                let (mut mine, _) = mpc_execute(circuit, &self.views, &mut self.rng)?;
                let (other, _) = vss_share(message, &self.params.outer.vss(), &mut self.rng)?;
                let (fresh, _) = mpc_execute(circuit, &other, &mut self.rng)?;
                for &i in positions {
                    mine[i] = fresh[i].clone();
                }
                Ok(mine)
            }
            ProverCheat::ForgeOutputs(positions) => {
                let o = &self.params.outer;
                let plan = MpcPlan::new(circuit, o.n, o.t, o.p)?;
                let tapes: Vec<Vec<u32>> = (0..o.n).map(|_| plan.sample_tape(&mut self.rng)).collect();
                let last = plan.rounds() - 1;
                let forged = positions.clone();
                let (mut views, _) = mpc_run(circuit, &self.views, &tapes, &mut |round, _, to, m: &mut [u32]| {
                    if round == last && forged.contains(&(to - 1)) {
                        m[0] = 1;
                    }
                })?;
                for &i in positions {
                    views[i].output = 1;
                }
                Ok(views)
            }
        }
    }

    /// Steps 1–2: MPC in the head and base commitments to every v'_i.
    pub fn commit_views(&mut self, circuit: &Circuit, naor: &NaorFirst) -> Result<Vec<Blocks>> {
        let expect = self.params.mpc_view_bits(circuit)?;
        if naor.r.len() != expect {
            return protocol(format!("view Naor message covers {} bits, expected {expect}", naor.r.len()));
        }
        self.coin = None;
        self.r2 = None;
        self.subset = None;
        let views = self.run_mpc(circuit)?;
        self.mpc_views = views.iter().map(|v| Bits::from_bytes(&v.encode())).collect();
        if self.mpc_views.iter().any(|v| v.len() != expect) {
            return protocol("MPC view length differs from the schedule");
        }
        let prg = self.params.outer.prg;
        self.seeds = (0..self.mpc_views.len()).map(|_| Seeds::random(&prg, expect, &mut self.rng)).collect();
        self.mpc_views.iter().zip(&self.seeds).map(|(v, s)| commit_blocks(&prg, v, &naor.r, s)).collect()
    }

    /// The prover's receiver for the verifier's commitment to r1.
    pub fn coin_receiver(&mut self) -> &mut ScReceiver {
        let coin = self.params.coin();
        let rng = &mut self.rng;
        self.coin.get_or_insert_with(|| ScReceiver::new(&coin, rng))
    }

    /// Step 4, after the verifier's commitment to r1 was accepted.
    pub fn r2(&mut self) -> Result<Bits> {
        if !self.coin.as_ref().is_some_and(|c| c.verdict_so_far().accepted()) {
            return protocol("verifier's coin commitment was not accepted");
        }
        let r2 = Bits::random(self.params.outer.coin_len, &mut self.rng);
        self.r2 = Some(r2.clone());
        Ok(r2)
    }

    /// Step 6, given the verifier's decommitment of r1.
    pub fn open(&mut self, coin_decommit: &[Option<WDecommit>]) -> Result<Vec<ViewOpening>> {
        let (Some(coin), Some(r2)) = (self.coin.take(), self.r2.clone()) else { return protocol("opening out of order") };
        let session = coin.into_session();
        let r1 = sc_decommit_verify(&session, coin_decommit).ok_or_else(|| Error::Protocol("verifier's r1 decommitment is invalid".into()))?;
        let o = &self.params.outer;
        let subset = derive_subset(&r1.xor(&r2), o.n, o.t, &o.prg)?;
        let openings = subset
            .iter()
            .map(|&i| {
                Ok(ViewOpening {
                    index: i,
                    inner: self.committers[i].decommit()?,
                    mpc_view: self.mpc_views[i].clone(),
                    seeds: self.seeds[i].clone(),
                })
            })
            .collect::<Result<_>>()?;
        self.subset = Some(subset);
        Ok(openings)
    }

    /// Decommit stage: every strong decommitment.
    pub fn decommit(&mut self) -> Result<Vec<Vec<Option<WDecommit>>>> {
        self.committers.iter_mut().map(ScCommitterStrategy::decommit).collect()
    }
}

/// The verifier's choice of r1.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum CoinChoice {
    #[default]
    Uniform,
    Fixed(Bits),
}

/// The verifier.
#[derive(Clone, Debug)]
pub struct EcnpVerifier {
    pub params: EcnpParams,
    pub receivers: Vec<ScReceiver>,
    pub coin_choice: CoinChoice,
    sessions: Vec<StrongSession>,
    commit_accept: bool,
    view_coms: Vec<BaseCommitment>,
    view_r: Option<Arc<Blocks>>,
    pub(crate) coin: Option<ScCommitter>,
    r1: Option<Bits>,
    subset: Option<Vec<usize>>,
    rng: ChaCha20Rng,
}

impl EcnpVerifier {
    pub fn new<R: RngCore + ?Sized>(params: &EcnpParams, rng: &mut R) -> Self {
        let inner = params.inner();
        let receivers = (0..inner.n).map(|_| ScReceiver::new(&inner, rng)).collect();
        let rng = ChaCha20Rng::from_rng(rng).expect("ChaCha seeding from an RNG does not fail");
        EcnpVerifier {
            params: *params,
            receivers,
            coin_choice: CoinChoice::Uniform,
            sessions: Vec::new(),
            commit_accept: false,
            view_coms: Vec::new(),
            view_r: None,
            coin: None,
            r1: None,
            subset: None,
            rng,
        }
    }

    pub fn with_coin(mut self, choice: CoinChoice) -> Self {
        self.coin_choice = choice;
        self
    }

    /// Closes the commit stage, keeping each session's record.
    pub fn finish_commit(&mut self, accepted: bool) -> bool {
        self.sessions = std::mem::take(&mut self.receivers).into_iter().map(ScReceiver::into_session).collect();
        self.commit_accept = accepted && self.sessions.iter().all(|s| s.verdict.accepted());
        self.commit_accept
    }

    /// Replaces the verifier's remaining coins, e.g. for a rewound copy.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha20Rng::seed_from_u64(seed);
    }

    pub fn commit_accepted(&self) -> bool {
        self.commit_accept
    }

    pub fn sessions(&self) -> &[StrongSession] {
        &self.sessions
    }

    pub fn subset(&self) -> Option<&[usize]> {
        self.subset.as_deref()
    }

    pub fn r1(&self) -> Option<&Bits> {
        self.r1.as_ref()
    }

    /// Naor string for the base commitments to the MPC views.
    pub fn view_naor(&mut self, circuit: &Circuit) -> Result<NaorFirst> {
        let bits = self.params.mpc_view_bits(circuit)?;
        self.coin = None;
        self.r1 = None;
        self.subset = None;
        self.view_coms.clear();
        let r = sample_receiver_r(&self.params.outer.prg, bits, &mut self.rng);
        self.view_r = Some(r.clone());
        Ok(NaorFirst { r })
    }

    pub fn receive_view_coms(&mut self, coms: Vec<Blocks>) -> Result<()> {
        let r = self.view_r.clone().ok_or_else(|| Error::Protocol("view commitments out of order".into()))?;
        if coms.len() != self.params.outer.n {
            return protocol("wrong number of view commitments");
        }
        let prg = self.params.outer.prg;
        self.view_coms = coms.into_iter().map(|b| BaseCommitment::assemble(prg, r.clone(), b)).collect::<Result<_>>()?;
        Ok(())
    }

    /// Step 3: the committer for r1.
    pub fn coin_committer(&mut self) -> Result<&mut ScCommitter> {
        if self.coin.is_none() {
            let coin = self.params.coin();
            let r1 = match &self.coin_choice {
                CoinChoice::Uniform => Bits::random(coin.len, &mut self.rng),
                CoinChoice::Fixed(b) if b.len() == coin.len => b.clone(),
                CoinChoice::Fixed(_) => return param("fixed r1 has the wrong length"),
            };
            self.coin = Some(ScCommitter::new(&r1, &coin, &mut self.rng)?);
            self.r1 = Some(r1);
        }
        Ok(self.coin.as_mut().expect("just set"))
    }

    /// Step 5: the decommitment of r1, given r2.
    pub fn reveal(&mut self, r2: &Bits) -> Result<Vec<Option<WDecommit>>> {
        let o = self.params.outer;
        if r2.len() != o.coin_len {
            return protocol("r2 has the wrong length");
        }
        let r1 = self.r1.clone().ok_or_else(|| Error::Protocol("r2 before the coin commitment".into()))?;
        self.subset = Some(derive_subset(&r1.xor(r2), o.n, o.t, &o.prg)?);
        self.coin.as_mut().expect("set with r1").decommit()
    }

    /// Step 7.
    pub fn verdict(&self, circuit: &Circuit, openings: &[ViewOpening]) -> EcnpVerdict {
        let subset = self.subset.clone().unwrap_or_default();
        let reject = |f| EcnpVerdict::reject(self.commit_accept, subset.clone(), f);
        if !self.commit_accept {
            return reject(Failure::CommitRejected);
        }
        if openings.len() != subset.len() || openings.iter().zip(&subset).any(|(o, &i)| o.index != i) {
            return reject(Failure::Aborted("prover opened the wrong indices".into()));
        }
        let o = &self.params.outer;
        let mut mviews = Vec::with_capacity(openings.len());
        for op in openings {
            let i = op.index;
            // 7a: both openings verify.
            let Some(v) = sc_decommit_verify(&self.sessions[i], &op.inner) else { return reject(Failure::OpenInvalid(i + 1)) };
            if decode_view_slot(o, &v, i).is_none() {
                return reject(Failure::OpenInvalid(i + 1));
            }
            if self.view_coms.len() != o.n || !verify_with_seeds(&self.view_coms[i], &op.mpc_view, &op.seeds) {
                return reject(Failure::OpenInvalid(i + 1));
            }
            // 7b: byte prefix.
            if op.mpc_view.len() < v.len() || op.mpc_view.slice(0, v.len()) != v {
                return reject(Failure::PrefixMismatch(i + 1));
            }
            let Ok(mv) = MpcView::decode(op.mpc_view.as_bytes()) else { return reject(Failure::OpenInvalid(i + 1)) };
            if mv.party() != i + 1 {
                return reject(Failure::OpenInvalid(i + 1));
            }
            mviews.push(mv);
        }
        // 7c: pairwise consistency of VSS and MPC parts.
        for a in 0..mviews.len() {
            for b in a + 1..mviews.len() {
                if !mpc_view_consistent(&mviews[a], &mviews[b], circuit).unwrap_or(false) {
                    return reject(Failure::InconsistentPair(subset[a] + 1, subset[b] + 1));
                }
            }
        }
        if let Some(v) = mviews.iter().find(|v| v.output != 1) {
            return reject(Failure::OutputNotOne(v.party()));
        }
        EcnpVerdict { commit_accept: true, prove_accept: true, subset, failure: Failure::None }
    }
}

/// Commit stage in process. Returns the prover, the verifier, and whether
/// the verifier accepted.
pub fn ecnp_commit_stage<R1: RngCore + ?Sized, R2: RngCore + ?Sized>(
    message: &Bits,
    params: &EcnpParams,
    prover_rng: &mut R1,
    verifier_rng: &mut R2,
    transcript: &mut Transcript,
) -> Result<(EcnpProver, EcnpVerifier, bool)> {
    let mut prover = EcnpProver::new(message, params, prover_rng)?;
    let mut verifier = EcnpVerifier::new(params, verifier_rng);
    let ok = ecnp_commit_with(&mut prover, &mut verifier, transcript);
    Ok((prover, verifier, ok))
}

/// Commit stage between a given prover and verifier.
pub fn ecnp_commit_with(prover: &mut EcnpProver, verifier: &mut EcnpVerifier, transcript: &mut Transcript) -> bool {
    ecnp_commit_run(Some(prover), Some(verifier), transcript).unwrap_or(false)
}

fn params_of(prover: &Option<&mut EcnpProver>, verifier: &Option<&mut EcnpVerifier>) -> Result<EcnpParams> {
    match (prover, verifier) {
        (Some(p), Some(v)) if p.params != v.params => param("prover and verifier parameters differ"),
        (Some(p), _) => Ok(p.params),
        (_, Some(v)) => Ok(v.params),
        _ => param("no local party"),
    }
}

/// Commit stage over any exchange, with the local parties given.
pub fn ecnp_commit_run<X: Exchange>(mut prover: Option<&mut EcnpProver>, mut verifier: Option<&mut EcnpVerifier>, ex: &mut X) -> Result<bool> {
    params_of(&prover, &verifier)?;
    if prover.is_some() != ex.is_local(Party::P1) || verifier.is_some() != ex.is_local(Party::P2) {
        return param("local parties do not match the exchange");
    }
    let framing = Framing::Wrapped(msg::ECNP_COMMIT_ROUND, Party::P1);
    let cs: &mut [ScCommitter] = match prover.as_deref_mut() {
        Some(p) => &mut p.committers,
        None => &mut [],
    };
    let rs: &mut [ScReceiver] = match verifier.as_deref_mut() {
        Some(v) => &mut v.receivers,
        None => &mut [],
    };
    let out = sc_drive(cs, rs, ex, framing);
    let ok = ex.msg(Party::P2, msg::ECNP_COMMIT_VERDICT, || Ok(verifier.expect("local").finish_commit(out.accept)))?;
    if let Some(p) = prover {
        p.commit_accept = ok;
    }
    Ok(ok)
}

/// Prove stage in process.
pub fn ecnp_prove_stage(prover: &mut EcnpProver, verifier: &mut EcnpVerifier, circuit: &Circuit, transcript: &mut Transcript) -> EcnpVerdict {
    ecnp_prove_run(Some(prover), Some(verifier), circuit, transcript)
}

/// Prove stage over any exchange. Both sides end with the same verdict,
/// except that abort texts may differ.
pub fn ecnp_prove_run<X: Exchange>(mut prover: Option<&mut EcnpProver>, mut verifier: Option<&mut EcnpVerifier>, circuit: &Circuit, ex: &mut X) -> EcnpVerdict {
    let commit_accept = match (&prover, &verifier) {
        (_, Some(v)) => v.commit_accepted(),
        (Some(p), None) => p.commit_accept,
        _ => false,
    };
    if let Err(e) = params_of(&prover, &verifier) {
        return EcnpVerdict::reject(commit_accept, Vec::new(), Failure::Aborted(e.to_string()));
    }
    if !commit_accept {
        return EcnpVerdict::reject(false, Vec::new(), Failure::CommitRejected);
    }
    let mut run = || -> Result<EcnpVerdict> {
        let naor = ex.msg(Party::P2, msg::ECNP_VIEW_NAOR, || verifier.as_deref_mut().expect("local").view_naor(circuit))?;
        let coms: Vec<Blocks> = ex.msg(Party::P1, msg::ECNP_VIEW_COMS, || prover.as_deref_mut().expect("local").commit_views(circuit, &naor))?;
        ex.local(Party::P2, || {
            let v = verifier.as_deref_mut().expect("local");
            v.receive_view_coms(coms)?;
            v.coin_committer().map(drop)
        })?;
        let mut cs: Vec<ScCommitter> = verifier.as_deref_mut().map(|v| v.coin.clone().expect("created above")).into_iter().collect();
        let mut rs: Vec<ScReceiver> = prover.as_deref_mut().map(|p| p.coin_receiver().clone()).into_iter().collect();
        let coin = sc_drive(&mut cs, &mut rs, ex, Framing::Wrapped(msg::ECNP_COIN_ROUND, Party::P2));
        if let (Some(v), Some(c)) = (verifier.as_deref_mut(), cs.pop()) {
            v.coin = Some(c);
        }
        if let (Some(p), Some(r)) = (prover.as_deref_mut(), rs.pop()) {
            p.coin = Some(r);
        }
        if !coin.accept {
            return Err(Error::Protocol(format!("coin commitment: {}", coin.reason.unwrap_or_default())));
        }
        let r2 = ex.msg(Party::P1, msg::ECNP_R2, || prover.as_deref_mut().expect("local").r2())?;
        let reveal: Vec<Option<WDecommit>> = ex.msg(Party::P2, msg::ECNP_COIN_OPEN, || verifier.as_deref_mut().expect("local").reveal(&r2))?;
        let openings: Vec<ViewOpening> = ex.msg(Party::P1, msg::ECNP_OPEN, || prover.as_deref_mut().expect("local").open(&reveal))?;
        ex.msg(Party::P2, msg::ECNP_VERDICT, || Ok(verifier.as_deref().expect("local").verdict(circuit, &openings)))
    };
    run().unwrap_or_else(|e| EcnpVerdict::reject(commit_accept, Vec::new(), Failure::Aborted(e.to_string())))
}

/// Decommit stage verification: each strong decommitment yields v_i or ⊥,
/// then VSS reconstruction.
pub fn ecnp_decommit_verify(params: &EcnpParams, sessions: &[StrongSession], decoms: &[Vec<Option<WDecommit>>]) -> Option<Bits> {
    let o = &params.outer;
    if sessions.len() != o.n || decoms.len() != o.n {
        return None;
    }
    let views = sessions
        .iter()
        .zip(decoms)
        .enumerate()
        .map(|(i, (s, d))| sc_decommit_verify(s, d).and_then(|v| decode_view_slot(o, &v, i)))
        .collect();
    vss_recon(&ReconInput { params: o.vss(), message_bits: o.len, views })
}

/// Decommit stage in process.
pub fn ecnp_decommit_stage(prover: &mut EcnpProver, verifier: &EcnpVerifier, transcript: &mut Transcript) -> Option<Bits> {
    ecnp_decommit_run(Some(prover), Some(verifier), transcript).ok().flatten()
}

/// Decommit stage over any exchange; the verifier's side returns the value.
pub fn ecnp_decommit_run<X: Exchange>(prover: Option<&mut EcnpProver>, verifier: Option<&EcnpVerifier>, ex: &mut X) -> Result<Option<Bits>> {
    let decoms: Vec<Vec<Option<WDecommit>>> = ex.msg(Party::P1, msg::ECNP_DECOMMIT, || prover.expect("local").decommit())?;
    Ok(verifier.filter(|v| v.commit_accepted()).and_then(|v| ecnp_decommit_verify(&v.params, v.sessions(), &decoms)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::compile_target_predicate;
    use crate::prg::PrgSpec;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn micro() -> EcnpParams {
        EcnpParams::new(StrongParams::new(4, 1, 2, 8, PrgSpec::toy(4).unwrap()).unwrap())
    }

    fn eq(params: &EcnpParams, target: &Bits) -> Circuit {
        let o = &params.outer;
        compile_target_predicate(target, o.len, o.vss().chunk_bits(), &o.vss().field).unwrap()
    }

    #[test]
    fn honest_commit_prove_decommit() {
        let params = micro();
        let m = Bits::parse("10011100").unwrap();
        let mut tr = Transcript::new();
        let (mut p, mut v, ok) = ecnp_commit_stage(&m, &params, &mut rng(1), &mut rng(2), &mut tr).unwrap();
        assert!(ok);
        assert_eq!(v.sessions().len(), 4);
        let verdict = ecnp_prove_stage(&mut p, &mut v, &eq(&params, &m), &mut tr);
        assert_eq!(verdict.failure, Failure::None);
        assert!(verdict.prove_accept && verdict.commit_accept);
        assert_eq!(verdict.subset.len(), 1);
        assert_eq!(p.subset(), Some(verdict.subset.as_slice()));
        // The opened MPC views have the length predicted from the schedule.
        assert_eq!(p.mpc_views()[0].len(), params.mpc_view_bits(&eq(&params, &m)).unwrap());
        assert_eq!(ecnp_decommit_stage(&mut p, &v, &mut tr), Some(m));
        let last = tr.records().last().unwrap();
        assert_eq!(last.msg_type, "ECNP_DECOMMIT");
    }

    #[test]
    fn false_statement_is_rejected_by_output() {
        let params = micro();
        let m = Bits::parse("10011100").unwrap();
        let (mut p, mut v, ok) = ecnp_commit_stage(&m, &params, &mut rng(3), &mut rng(4), &mut Transcript::disabled()).unwrap();
        assert!(ok);
        let verdict = ecnp_prove_stage(&mut p, &mut v, &eq(&params, &Bits::parse("10011101").unwrap()), &mut Transcript::disabled());
        assert!(!verdict.prove_accept);
        assert!(matches!(verdict.failure, Failure::OutputNotOne(_)));
    }

    #[test]
    fn substituted_views_fail_prefix_when_opened() {
        let params = micro();
        let m = Bits::parse("00001111").unwrap();
        let circuit = eq(&params, &m);
        let mut caught = 0;
        for s in 0..12 {
            let mut g = rng(10 + s);
            let mut p = EcnpProver::new(&m, &params, &mut g)
                .unwrap()
                .with_cheat(ProverCheat::SubstituteViews { positions: vec![1], message: m.clone() });
            let mut v = EcnpVerifier::new(&params, &mut g);
            assert!(ecnp_commit_with(&mut p, &mut v, &mut Transcript::disabled()));
            let verdict = ecnp_prove_stage(&mut p, &mut v, &circuit, &mut Transcript::disabled());
            let hit = verdict.subset.contains(&1);
            assert_eq!(verdict.prove_accept, !hit);
            if hit {
                caught += 1;
                assert_eq!(verdict.failure, Failure::PrefixMismatch(2));
            }
        }
        assert!(caught > 0);
    }

    #[test]
    fn forged_outputs_only_pass_when_the_forged_view_is_alone() {
        // t = 1: a single opened view is checked only against itself, so a
        // forged output survives exactly when T lands on a forged position.
        let params = micro();
        let m = Bits::parse("00001111").unwrap();
        let circuit = eq(&params, &Bits::parse("11110000").unwrap());
        for s in 0..12 {
            let mut g = rng(40 + s);
            let mut p = EcnpProver::new(&m, &params, &mut g).unwrap().with_cheat(ProverCheat::ForgeOutputs(vec![0, 3]));
            let mut v = EcnpVerifier::new(&params, &mut g);
            assert!(ecnp_commit_with(&mut p, &mut v, &mut Transcript::disabled()));
            let verdict = ecnp_prove_stage(&mut p, &mut v, &circuit, &mut Transcript::disabled());
            let on_forged = verdict.subset.iter().all(|i| [0, 3].contains(i));
            assert_eq!(verdict.prove_accept, on_forged, "{:?}", verdict);
        }
    }

    #[test]
    fn fixed_verifier_coin_still_completes() {
        let params = micro();
        let m = Bits::parse("01010101").unwrap();
        let mut g = rng(60);
        let mut p = EcnpProver::new(&m, &params, &mut g).unwrap();
        let mut v = EcnpVerifier::new(&params, &mut g).with_coin(CoinChoice::Fixed(Bits::zeros(4)));
        assert!(ecnp_commit_with(&mut p, &mut v, &mut Transcript::disabled()));
        let verdict = ecnp_prove_stage(&mut p, &mut v, &eq(&params, &m), &mut Transcript::disabled());
        assert!(verdict.prove_accept);
        assert_eq!(v.r1(), Some(&Bits::zeros(4)));
    }

    #[test]
    fn decommit_tolerates_t_erasures() {
        let params = EcnpParams::new(StrongParams::new(7, 2, 2, 8, PrgSpec::toy(3).unwrap()).unwrap());
        let m = Bits::parse("11001010").unwrap();
        let (mut p, v, ok) = ecnp_commit_stage(&m, &params, &mut rng(70), &mut rng(71), &mut Transcript::disabled()).unwrap();
        assert!(ok);
        let mut decoms = p.decommit().unwrap();
        decoms[0] = vec![None; 7];
        decoms[6] = vec![None; 7];
        assert_eq!(ecnp_decommit_verify(&params, v.sessions(), &decoms), Some(m));
        let all_bad = vec![vec![None; 7]; 7];
        assert_eq!(ecnp_decommit_verify(&params, v.sessions(), &all_bad), None);
    }

    #[test]
    fn verdict_encoding_round_trips() {
        for f in [
            Failure::None,
            Failure::CommitRejected,
            Failure::Aborted("x".into()),
            Failure::OpenInvalid(3),
            Failure::PrefixMismatch(1),
            Failure::InconsistentPair(2, 4),
            Failure::OutputNotOne(7),
        ] {
            let v = EcnpVerdict { commit_accept: true, prove_accept: false, subset: vec![1, 5], failure: f };
            assert_eq!(EcnpVerdict::decode(&v.encode()).unwrap(), v);
        }
    }
}
