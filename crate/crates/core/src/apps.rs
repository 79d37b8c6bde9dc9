//! Applications built on commit-and-prove: coin flipping, zero-knowledge
//! arguments of knowledge, and selective-opening commitments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::circuit::{compile_equality_predicate, compile_target_predicate, Circuit};
use crate::ecnp::{ecnp_commit_run, ecnp_prove_run, EcnpParams, EcnpProver, EcnpVerdict, EcnpVerifier};
use crate::error::{param, protocol, Error, Result};
use crate::transport::exchange::Exchange;
use crate::transport::msg;
use crate::transport::transcript::Party;
use crate::vss::message_to_chunks;
use crate::wire::{Decode, Encode, Reader, Writer};

fn rejected(stage: &str, v: &EcnpVerdict) -> Error {
    Error::Protocol(format!("{stage} rejected: {:?}", v.failure))
}

fn check_sides<X: Exchange>(p1: bool, p2: bool, ex: &X) -> Result<()> {
    if p1 != ex.is_local(Party::P1) || p2 != ex.is_local(Party::P2) {
        return param("local parties do not match the exchange");
    }
    Ok(())
}

fn fork(rng: &mut (impl RngCore + ?Sized)) -> ChaCha20Rng {
    ChaCha20Rng::from_rng(rng).expect("ChaCha seeding from an RNG does not fail")
}

// ---------------------------------------------------------------- coin flip

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinResult {
    pub r1: Bits,
    pub r2: Bits,
    pub r: Bits,
}

/// P1: commits to r1, later announces it and proves the announcement.
#[derive(Clone, Debug)]
pub struct CoinCommitter {
    pub prover: EcnpProver,
    /// What P1 claims as r1; the committed value when `None`.
    pub announce: Option<Bits>,
}

impl CoinCommitter {
    pub fn new<R: RngCore + ?Sized>(params: &EcnpParams, rng: &mut R) -> Result<Self> {
        let r1 = Bits::random(params.outer.len, rng);
        Self::with_r1(&r1, params, rng)
    }

    pub fn with_r1<R: RngCore + ?Sized>(r1: &Bits, params: &EcnpParams, rng: &mut R) -> Result<Self> {
        Ok(CoinCommitter { prover: EcnpProver::new(r1, params, rng)?, announce: None })
    }
}

/// P2: verifies and contributes r2.
#[derive(Clone, Debug)]
pub struct CoinResponder {
    pub verifier: EcnpVerifier,
    rng: ChaCha20Rng,
}

impl CoinResponder {
    pub fn new<R: RngCore + ?Sized>(params: &EcnpParams, rng: &mut R) -> Self {
        let verifier = EcnpVerifier::new(params, rng);
        CoinResponder { verifier, rng: fork(rng) }
    }
}

/// Coin flipping of `params.outer.len` bits. Both sides return r1 ⊕ r2, or
/// an error when P2 aborts.
pub fn coin_flip_run<X: Exchange>(mut p1: Option<&mut CoinCommitter>, mut p2: Option<&mut CoinResponder>, ex: &mut X) -> Result<CoinResult> {
    check_sides(p1.is_some(), p2.is_some(), ex)?;
    let params = p1.as_ref().map(|p| p.prover.params).or(p2.as_ref().map(|p| p.verifier.params)).expect("a local side");
    let len = params.outer.len;
    if len == 0 {
        return param("coin length must be at least 1");
    }
    if !ecnp_commit_run(p1.as_deref_mut().map(|p| &mut p.prover), p2.as_deref_mut().map(|p| &mut p.verifier), ex)? {
        return protocol("commit stage rejected");
    }
    let r2 = ex.msg(Party::P2, msg::COIN_R2, || {
        let p = p2.as_deref_mut().expect("local");
        Ok(Bits::random(len, &mut p.rng))
    })?;
    let r1 = ex.msg(Party::P1, msg::COIN_R1, || {
        let p = p1.as_deref().expect("local");
        Ok(p.announce.clone().unwrap_or_else(|| p.prover.message.clone()))
    })?;
    if r1.len() != len || r2.len() != len {
        return protocol("coin shares have the wrong length");
    }
    let vss = params.outer.vss();
    let circuit = compile_target_predicate(&r1, len, vss.chunk_bits(), &vss.field)?;
    let verdict = ecnp_prove_run(p1.map(|p| &mut p.prover), p2.map(|p| &mut p.verifier), &circuit, ex);
    if !verdict.prove_accept {
        return Err(rejected("prove stage", &verdict));
    }
    let r = r1.xor(&r2);
    Ok(CoinResult { r1, r2, r })
}

// --------------------------------------------------------------------- zkaok

/// Zero-knowledge argument of knowledge of w with relation(w) = 1. The
/// witness is the committed message; the relation circuit reads its chunks.
pub fn zkaok_run<X: Exchange>(relation: &Circuit, prover: Option<&mut EcnpProver>, verifier: Option<&mut EcnpVerifier>, ex: &mut X) -> Result<EcnpVerdict> {
    check_sides(prover.is_some(), verifier.is_some(), ex)?;
    let mut prover = prover;
    let mut verifier = verifier;
    let params = prover.as_ref().map(|p| p.params).or(verifier.as_ref().map(|v| v.params)).expect("a local side");
    let vss = params.outer.vss();
    relation.check_field(&vss.field)?;
    if relation.inputs() > vss.chunks_for(params.outer.len) {
        return param("relation reads more chunks than the witness has");
    }
    let commit = ecnp_commit_run(prover.as_deref_mut(), verifier.as_deref_mut(), ex)?;
    if !commit {
        return Ok(EcnpVerdict { commit_accept: false, prove_accept: false, subset: Vec::new(), failure: crate::ecnp::Failure::CommitRejected });
    }
    Ok(ecnp_prove_run(prover, verifier, relation, ex))
}

/// Evaluates a relation on a witness, as the circuit sees it.
pub fn relation_holds(relation: &Circuit, params: &EcnpParams, witness: &Bits) -> Result<bool> {
    let vss = params.outer.vss();
    let mut chunks = message_to_chunks(witness, vss.chunk_bits());
    chunks.resize(vss.chunks_for(params.outer.len).max(relation.inputs()), 0);
    Ok(relation.eval(&vss.field, &chunks)? == 1)
}

// -------------------------------------------------------------------- so-com

/// Layout of t_msgs messages inside one commit-and-prove message. Each
/// message takes a whole number of chunks, zero padded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SoComParams {
    pub ecnp: EcnpParams,
    pub t_msgs: usize,
    pub msg_bits: usize,
}

impl SoComParams {
    /// `ecnp.outer.len` is ignored and replaced by the packed length.
    pub fn new(ecnp: EcnpParams, t_msgs: usize, msg_bits: usize) -> Result<Self> {
        if t_msgs == 0 || msg_bits == 0 {
            return param("need at least one message of at least one bit");
        }
        let slot = msg_bits.div_ceil(ecnp.outer.vss().chunk_bits()) * ecnp.outer.vss().chunk_bits();
        let outer = ecnp.outer.for_len(t_msgs * slot)?;
        Ok(SoComParams { ecnp: EcnpParams::new(outer), t_msgs, msg_bits })
    }

    pub fn slot_bits(&self) -> usize {
        let c = self.ecnp.outer.vss().chunk_bits();
        self.msg_bits.div_ceil(c) * c
    }

    pub fn pack(&self, messages: &[Bits]) -> Result<Bits> {
        if messages.len() != self.t_msgs || messages.iter().any(|m| m.len() != self.msg_bits) {
            return param(format!("need {} messages of {} bits", self.t_msgs, self.msg_bits));
        }
        let pad = Bits::zeros(self.slot_bits() - self.msg_bits);
        let mut out = Bits::zeros(0);
        for m in messages {
            out.extend(m);
            out.extend(&pad);
        }
        Ok(out)
    }

    /// The predicate "m'_i = m_i for every revealed i", padding included.
    pub fn reveal_predicate(&self, revealed: &BTreeMap<usize, Bits>) -> Result<Circuit> {
        let mut constraints = vec![None; self.ecnp.outer.len];
        for (&i, m) in revealed {
            if i >= self.t_msgs || m.len() != self.msg_bits {
                return param(format!("bad revealed message {i}"));
            }
            let base = i * self.slot_bits();
            for k in 0..self.slot_bits() {
                constraints[base + k] = Some(k < self.msg_bits && m.get(k));
            }
        }
        let vss = self.ecnp.outer.vss();
        compile_equality_predicate(&constraints, vss.chunk_bits(), &vss.field)
    }
}

/// The functionality's record of one sid. The committer knows every
/// message; the receiver knows only what was opened to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoComRecord {
    pub sid: u64,
    pub messages: Vec<Option<Bits>>,
    pub committed: bool,
    pub revealed_sets: Vec<BTreeSet<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommitMsg {
    pub sid: u64,
    pub t_msgs: u32,
    pub msg_bits: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReceiptMsg {
    pub sid: u64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RevealMsg {
    pub sid: u64,
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenMsg {
    pub sid: u64,
    pub values: Vec<(usize, Bits)>,
}

impl Encode for CommitMsg {
    fn encode_into(&self, w: &mut Writer) {
        w.u64(self.sid).u32(self.t_msgs).u32(self.msg_bits);
    }
}

impl Decode for CommitMsg {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        Ok(CommitMsg { sid: r.u64()?, t_msgs: r.u32()?, msg_bits: r.u32()? })
    }
}

impl Encode for ReceiptMsg {
    fn encode_into(&self, w: &mut Writer) {
        w.u64(self.sid).u8(self.accepted as u8);
    }
}

impl Decode for ReceiptMsg {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        Ok(ReceiptMsg { sid: r.u64()?, accepted: bool::decode_from(r)? })
    }
}

impl Encode for RevealMsg {
    fn encode_into(&self, w: &mut Writer) {
        w.u64(self.sid).u32(self.indices.len() as u32);
        for &i in &self.indices {
            w.u32(i as u32);
        }
    }
}

impl Decode for RevealMsg {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        let sid = r.u64()?;
        let count = r.u32()? as usize;
        if count > r.remaining() {
            return protocol("index count exceeds payload");
        }
        let indices = (0..count).map(|_| r.u32().map(|i| i as usize)).collect::<Result<_>>()?;
        Ok(RevealMsg { sid, indices })
    }
}

impl Encode for OpenMsg {
    fn encode_into(&self, w: &mut Writer) {
        w.u64(self.sid).u32(self.values.len() as u32);
        for (i, v) in &self.values {
            w.u32(*i as u32);
            v.encode_into(w);
        }
    }
}

impl Decode for OpenMsg {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        let sid = r.u64()?;
        let count = r.u32()? as usize;
        if count > r.remaining() {
            return protocol("value count exceeds payload");
        }
        let values = (0..count).map(|_| Ok((r.u32()? as usize, Bits::decode_from(r)?))).collect::<Result<_>>()?;
        Ok(OpenMsg { sid, values })
    }
}

struct SenderEntry {
    record: SoComRecord,
    prover: EcnpProver,
}

struct ReceiverEntry {
    record: SoComRecord,
    verifier: EcnpVerifier,
}

/// Lying behaviour of a committer at reveal time.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SoComLie {
    /// Replacement values announced for some indices.
    pub values: BTreeMap<usize, Bits>,
}

/// The committer side of the selective-opening service. Sessions for
/// distinct sids may run concurrently; one sid is handled sequentially.
pub struct SoComCommitter {
    pub params: SoComParams,
    entries: Mutex<HashMap<u64, Arc<Mutex<SenderEntry>>>>,
    rng: Mutex<ChaCha20Rng>,
    lie: Mutex<SoComLie>,
}

impl SoComCommitter {
    pub fn new(params: SoComParams, seed: u64) -> Self {
        SoComCommitter { params, entries: Mutex::new(HashMap::new()), rng: Mutex::new(ChaCha20Rng::seed_from_u64(seed)), lie: Mutex::default() }
    }

    pub fn set_lie(&self, lie: SoComLie) {
        *self.lie.lock().expect("lock") = lie;
    }

    pub fn record(&self, sid: u64) -> Option<SoComRecord> {
        let e = self.entries.lock().expect("lock").get(&sid).cloned()?;
        let rec = e.lock().expect("lock").record.clone();
        Some(rec)
    }

    fn entry(&self, sid: u64) -> Option<Arc<Mutex<SenderEntry>>> {
        self.entries.lock().expect("lock").get(&sid).cloned()
    }
}

/// The receiver side of the selective-opening service.
pub struct SoComReceiver {
    pub params: SoComParams,
    entries: Mutex<HashMap<u64, Arc<Mutex<ReceiverEntry>>>>,
    rng: Mutex<ChaCha20Rng>,
}

impl SoComReceiver {
    pub fn new(params: SoComParams, seed: u64) -> Self {
        SoComReceiver { params, entries: Mutex::new(HashMap::new()), rng: Mutex::new(ChaCha20Rng::seed_from_u64(seed)) }
    }

    pub fn record(&self, sid: u64) -> Option<SoComRecord> {
        let e = self.entries.lock().expect("lock").get(&sid).cloned()?;
        let rec = e.lock().expect("lock").record.clone();
        Some(rec)
    }
}

/// What a commit call did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommitOutcome {
    Receipt,
    /// The sid was already committed; nothing happened.
    Ignored,
    Rejected,
}

/// Commit of `messages` under `sid`. The committer ignores a repeated sid
/// without sending anything; a receiver that sees a repeated sid aborts
/// and leaves its record untouched.
pub fn socom_commit<X: Exchange>(
    committer: Option<(&SoComCommitter, &[Bits])>,
    receiver: Option<&SoComReceiver>,
    sid: u64,
    ex: &mut X,
) -> Result<CommitOutcome> {
    check_sides(committer.is_some(), receiver.is_some(), ex)?;
    if let Some((c, _)) = committer {
        if c.entry(sid).is_some() {
            return Ok(CommitOutcome::Ignored);
        }
    }
    let params = committer.map(|(c, _)| c.params).or(receiver.map(|r| r.params)).expect("a local side");
    let mut prover = None;
    let head = ex.msg(Party::P1, msg::SOCOM_COMMIT, || {
        let (c, messages) = committer.expect("local");
        let packed = params.pack(messages)?;
        let mut rng = c.rng.lock().expect("lock");
        prover = Some(EcnpProver::new(&packed, &params.ecnp, &mut *rng)?);
        Ok(CommitMsg { sid, t_msgs: params.t_msgs as u32, msg_bits: params.msg_bits as u32 })
    })?;
    let mut verifier = None;
    ex.local(Party::P2, || {
        let r = receiver.expect("local");
        if head.sid != sid || head.t_msgs as usize != params.t_msgs || head.msg_bits as usize != params.msg_bits {
            return protocol("commit header does not match the session");
        }
        if r.entries.lock().expect("lock").contains_key(&sid) {
            return protocol(format!("sid {sid} is already committed"));
        }
        verifier = Some(EcnpVerifier::new(&params.ecnp, &mut *r.rng.lock().expect("lock")));
        Ok(())
    })?;
    let ok = ecnp_commit_run(prover.as_mut(), verifier.as_mut(), ex)?;
    let receipt = ex.msg(Party::P2, msg::SOCOM_RECEIPT, || Ok(ReceiptMsg { sid, accepted: ok }))?;
    if !receipt.accepted {
        return Ok(CommitOutcome::Rejected);
    }
    if let (Some((c, messages)), Some(prover)) = (committer, prover) {
        let record = SoComRecord { sid, messages: messages.iter().cloned().map(Some).collect(), committed: true, revealed_sets: Vec::new() };
        c.entries.lock().expect("lock").entry(sid).or_insert_with(|| Arc::new(Mutex::new(SenderEntry { record, prover })));
    }
    if let (Some(r), Some(verifier)) = (receiver, verifier) {
        let record = SoComRecord { sid, messages: vec![None; params.t_msgs], committed: true, revealed_sets: Vec::new() };
        r.entries.lock().expect("lock").insert(sid, Arc::new(Mutex::new(ReceiverEntry { record, verifier })));
    }
    Ok(CommitOutcome::Receipt)
}

/// Reveal of the index set chosen by the receiver (0-based indices). The
/// receiver returns the opened values on acceptance; revealing an unknown
/// sid does nothing and returns `None` without sending anything.
pub fn socom_reveal<X: Exchange>(
    committer: Option<&SoComCommitter>,
    receiver: Option<(&SoComReceiver, &BTreeSet<usize>)>,
    sid: u64,
    ex: &mut X,
) -> Result<Option<BTreeMap<usize, Bits>>> {
    check_sides(committer.is_some(), receiver.is_some(), ex)?;
    let params = committer.map(|c| c.params).or(receiver.map(|(r, _)| r.params)).expect("a local side");
    let r_entry = match receiver {
        Some((r, set)) => {
            if set.iter().any(|&i| i >= params.t_msgs) {
                return param("reveal index out of range");
            }
            match r.entries.lock().expect("lock").get(&sid).cloned() {
                Some(e) => Some(e),
                None => return Ok(None),
            }
        }
        None => None,
    };
    let reveal = ex.msg(Party::P2, msg::SOCOM_REVEAL, || Ok(RevealMsg { sid, indices: receiver.expect("local").1.iter().copied().collect() }))?;
    let c_entry = committer.map(|c| c.entry(sid));
    let open = ex.msg(Party::P1, msg::SOCOM_OPEN, || {
        let c = committer.expect("local");
        let entry = c_entry.clone().flatten().ok_or_else(|| Error::Protocol(format!("unknown sid {sid}")))?;
        let entry = entry.lock().expect("lock");
        if reveal.sid != sid || reveal.indices.iter().any(|&i| i >= params.t_msgs) {
            return protocol("bad reveal request");
        }
        let lie = c.lie.lock().expect("lock");
        let values = reveal
            .indices
            .iter()
            .map(|&i| (i, lie.values.get(&i).cloned().unwrap_or_else(|| entry.record.messages[i].clone().expect("committer knows every message"))))
            .collect();
        Ok(OpenMsg { sid, values })
    })?;
    let revealed: BTreeMap<usize, Bits> = open.values.iter().cloned().collect();
    let mut circuit = None;
    ex.local(Party::P2, || {
        let want: Vec<usize> = receiver.expect("local").1.iter().copied().collect();
        if open.sid != sid || revealed.keys().copied().collect::<Vec<_>>() != want || revealed.len() != open.values.len() {
            return protocol("opened indices differ from the request");
        }
        circuit = Some(params.reveal_predicate(&revealed)?);
        Ok(())
    })?;
    let circuit = match circuit {
        Some(c) => c,
        None => params.reveal_predicate(&revealed)?,
    };
    let c_arc = c_entry.flatten();
    let mut c_guard = c_arc.as_ref().map(|e| e.lock().expect("lock"));
    let mut r_guard = r_entry.as_ref().map(|e| e.lock().expect("lock"));
    let verdict = ecnp_prove_run(c_guard.as_deref_mut().map(|g| &mut g.prover), r_guard.as_deref_mut().map(|g| &mut g.verifier), &circuit, ex);
    if !verdict.prove_accept {
        return Err(rejected("reveal", &verdict));
    }
    let set: BTreeSet<usize> = revealed.keys().copied().collect();
    if let Some(g) = c_guard.as_deref_mut() {
        g.record.revealed_sets.push(set.clone());
    }
    if let Some(g) = r_guard.as_deref_mut() {
        let rec = &mut g.record;
        for (&i, v) in &revealed {
            rec.messages[i] = Some(v.clone());
        }
        rec.revealed_sets.push(set);
    }
    Ok(Some(revealed))
}
