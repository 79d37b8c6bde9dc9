//! Weakly extractable commitment: k pairs of XOR shares of the message, each
//! share committed with the base scheme, then a k-bit challenge selecting one
//! share per pair to open.

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::base_commit::{base_val, commit_blocks, sample_receiver_r, verify_with_seeds, BaseCommitment, Blocks, Seeds};
use crate::bits::Bits;
use crate::error::{param, protocol, Error, Result};
use crate::prg::PrgSpec;
use crate::transport::msg;
use crate::transport::transcript::{Party, Transcript};
use crate::transport::exchange::Exchange;
use crate::wire::{Decode, Encode, Reader, Writer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WParams {
    /// Number of share pairs.
    pub k: usize,
    /// Message length in bits.
    pub len: usize,
    pub prg: PrgSpec,
}

impl WParams {
    pub fn new(k: usize, len: usize, prg: PrgSpec) -> Result<Self> {
        if k == 0 || len == 0 {
            return param("wExtCom needs k ≥ 1 and ℓ ≥ 1");
        }
        Ok(WParams { k, len, prg })
    }

    /// k defaults to the seed length.
    pub fn with_default_k(len: usize, prg: PrgSpec) -> Result<Self> {
        Self::new(prg.lambda(), len, prg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Pending,
    Accept,
    Reject,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Accept
        } else {
            Verdict::Reject
        }
    }

    pub fn accepted(self) -> bool {
        self == Verdict::Accept
    }
}

/// k pairs `(v0_i, v1_i)`; for an honest committer each pair XORs to `message`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareMatrix {
    pub message: Bits,
    pub pairs: Vec<[Bits; 2]>,
}

impl ShareMatrix {
    pub fn share<R: RngCore + ?Sized>(message: &Bits, k: usize, rng: &mut R) -> Self {
        let pairs = (0..k)
            .map(|_| {
                let eta = Bits::random(message.len(), rng);
                let other = message.xor(&eta);
                [eta, other]
            })
            .collect();
        ShareMatrix { message: message.clone(), pairs }
    }

    pub fn k(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_consistent(&self) -> bool {
        self.pairs.iter().all(|[a, b]| a.xor(b) == self.message)
    }
}

/// Receiver's first message: the Naor strings, one per bit of the message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NaorFirst {
    pub r: Arc<Blocks>,
}

/// The 2k block vectors, ordered v0_1, v1_1, v0_2, ...
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WComs {
    pub blocks: Vec<Blocks>,
}

/// Openings of the challenged share of every pair, ascending pair index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WOpening {
    pub values: Vec<Bits>,
    pub seeds: Vec<Seeds>,
}

/// Openings of all 2k shares.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WDecommit {
    pub message: Bits,
    pub values: Vec<[Bits; 2]>,
    pub seeds: Vec<[Seeds; 2]>,
}

impl Encode for NaorFirst {
    fn encode_into(&self, w: &mut Writer) {
        self.r.encode_into(w);
    }
}

impl Decode for NaorFirst {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        Ok(NaorFirst { r: Arc::new(Blocks::decode_from(r)?) })
    }
}

impl Encode for WComs {
    fn encode_into(&self, w: &mut Writer) {
        self.blocks.encode_into(w);
    }
}

impl Decode for WComs {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        Ok(WComs { blocks: Vec::decode_from(r)? })
    }
}

impl Encode for WOpening {
    fn encode_into(&self, w: &mut Writer) {
        w.u32(self.values.len() as u32);
        for (v, s) in self.values.iter().zip(&self.seeds) {
            v.encode_into(w);
            s.encode_into(w);
        }
    }
}

impl Decode for WOpening {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        let k = r.u32()? as usize;
        if k > r.remaining() {
            return protocol("opening count exceeds payload");
        }
        let mut values = Vec::with_capacity(k);
        let mut seeds = Vec::with_capacity(k);
        for _ in 0..k {
            values.push(r.bits()?);
            seeds.push(Seeds::decode_from(r)?);
        }
        Ok(WOpening { values, seeds })
    }
}

impl Encode for WDecommit {
    fn encode_into(&self, w: &mut Writer) {
        self.message.encode_into(w);
        w.u32(self.values.len() as u32);
        for (vs, ss) in self.values.iter().zip(&self.seeds) {
            for b in 0..2 {
                vs[b].encode_into(w);
                ss[b].encode_into(w);
            }
        }
    }
}

impl Decode for WDecommit {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        let message = r.bits()?;
        let k = r.u32()? as usize;
        if k > r.remaining() {
            return protocol("decommitment count exceeds payload");
        }
        let mut values = Vec::with_capacity(k);
        let mut seeds = Vec::with_capacity(k);
        for _ in 0..k {
            let v0 = r.bits()?;
            let s0 = Seeds::decode_from(r)?;
            let v1 = r.bits()?;
            let s1 = Seeds::decode_from(r)?;
            values.push([v0, v1]);
            seeds.push([s0, s1]);
        }
        Ok(WDecommit { message, values, seeds })
    }
}

/// The receiver's record of a commitment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WCommitment {
    pub params: WParams,
    /// Base commitments in the layout com0_1, com1_1, com0_2, ...
    pub coms: Vec<BaseCommitment>,
    pub challenge: Option<Bits>,
    pub opening: Option<WOpening>,
    pub accepted: Verdict,
}

impl WCommitment {
    pub fn com(&self, pair: usize, side: usize) -> &BaseCommitment {
        &self.coms[2 * pair + side]
    }
}

/// Behaviour of a committer, honest or not. `Err` from any step means abort.
pub trait WCommitterStrategy: Clone {
    fn commit(&mut self, naor: &NaorFirst) -> Result<WComs>;
    fn open(&mut self, challenge: &Bits) -> Result<WOpening>;
    fn decommit(&mut self) -> Result<WDecommit>;
}

/// Committer state: the share matrix and every seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WCommitter {
    pub params: WParams,
    pub shares: ShareMatrix,
    pub seeds: Vec<[Seeds; 2]>,
}

impl WCommitter {
    pub fn new<R: RngCore + ?Sized>(message: &Bits, params: &WParams, rng: &mut R) -> Result<Self> {
        if message.len() != params.len {
            return param(format!("message has {} bits, expected {}", message.len(), params.len));
        }
        let shares = ShareMatrix::share(message, params.k, rng);
        Self::from_shares(shares, params, rng)
    }

    /// Commits to arbitrary pairs; they need not XOR to a common value.
    pub fn from_shares<R: RngCore + ?Sized>(shares: ShareMatrix, params: &WParams, rng: &mut R) -> Result<Self> {
        if shares.k() != params.k || shares.pairs.iter().flatten().any(|v| v.len() != params.len) {
            return param("share matrix does not match parameters");
        }
        let seeds = (0..params.k)
            .map(|_| [Seeds::random(&params.prg, params.len, rng), Seeds::random(&params.prg, params.len, rng)])
            .collect();
        Ok(WCommitter { params: *params, shares, seeds })
    }
}

impl WCommitterStrategy for WCommitter {
    fn commit(&mut self, naor: &NaorFirst) -> Result<WComs> {
        let p = &self.params;
        if naor.r.len() != p.len {
            return protocol(format!("Naor message covers {} bits, expected {}", naor.r.len(), p.len));
        }
        let mut blocks = Vec::with_capacity(2 * p.k);
        for (pair, seeds) in self.shares.pairs.iter().zip(&self.seeds) {
            for b in 0..2 {
                blocks.push(commit_blocks(&p.prg, &pair[b], &naor.r, &seeds[b]).map_err(|e| Error::Protocol(e.to_string()))?);
            }
        }
        Ok(WComs { blocks })
    }

    fn open(&mut self, challenge: &Bits) -> Result<WOpening> {
        if challenge.len() != self.params.k {
            return protocol(format!("challenge has {} bits, expected {}", challenge.len(), self.params.k));
        }
        let mut values = Vec::with_capacity(self.params.k);
        let mut seeds = Vec::with_capacity(self.params.k);
        for i in 0..self.params.k {
            let b = challenge.get(i) as usize;
            values.push(self.shares.pairs[i][b].clone());
            seeds.push(self.seeds[i][b].clone());
        }
        Ok(WOpening { values, seeds })
    }

    fn decommit(&mut self) -> Result<WDecommit> {
        Ok(WDecommit { message: self.shares.message.clone(), values: self.shares.pairs.clone(), seeds: self.seeds.clone() })
    }
}

/// Receiver state machine.
#[derive(Clone, Debug)]
pub struct WReceiver {
    params: WParams,
    r: Arc<Blocks>,
    com: Option<WCommitment>,
}

impl WReceiver {
    pub fn new<R: RngCore + ?Sized>(params: &WParams, rng: &mut R) -> (Self, NaorFirst) {
        let r = sample_receiver_r(&params.prg, params.len, rng);
        (WReceiver { params: *params, r: r.clone(), com: None }, NaorFirst { r })
    }

    pub fn receive_coms(&mut self, coms: WComs) -> Result<()> {
        let p = &self.params;
        if coms.blocks.len() != 2 * p.k {
            return protocol(format!("expected {} commitments, got {}", 2 * p.k, coms.blocks.len()));
        }
        let coms = coms
            .blocks
            .into_iter()
            .map(|b| BaseCommitment::assemble(p.prg, self.r.clone(), b))
            .collect::<Result<Vec<_>>>()?;
        self.com = Some(WCommitment { params: *p, coms, challenge: None, opening: None, accepted: Verdict::Pending });
        Ok(())
    }

    pub fn choose_challenge<R: RngCore + ?Sized>(&mut self, rng: &mut R) -> Result<Bits> {
        let c = Bits::random(self.params.k, rng);
        self.set_challenge(c.clone())?;
        Ok(c)
    }

    pub fn set_challenge(&mut self, c: Bits) -> Result<()> {
        let com = self.com.as_mut().ok_or_else(|| Error::Protocol("challenge before commitments".into()))?;
        if c.len() != self.params.k {
            return param("challenge length differs from k");
        }
        com.challenge = Some(c);
        Ok(())
    }

    pub fn receive_opening(&mut self, opening: WOpening) -> bool {
        let Some(com) = self.com.as_mut() else { return false };
        let Some(c) = com.challenge.clone() else { return false };
        let ok = accepting_opening_check(com, &c, &opening).unwrap_or(false);
        com.opening = Some(opening);
        com.accepted = Verdict::from_bool(ok);
        ok
    }

    /// Marks the commitment rejected, e.g. after the committer aborted.
    pub fn reject(&mut self) {
        if let Some(com) = self.com.as_mut() {
            com.accepted = Verdict::Reject;
        }
    }

    pub fn commitment(&self) -> Option<&WCommitment> {
        self.com.as_ref()
    }

    pub fn into_commitment(self) -> Option<WCommitment> {
        self.com
    }
}

/// True iff the opened share verifies at every challenged position.
pub fn accepting_opening_check(com: &WCommitment, c: &Bits, opening: &WOpening) -> Result<bool> {
    let k = com.params.k;
    if c.len() != k {
        return param(format!("challenge has {} bits, expected {k}", c.len()));
    }
    if opening.values.len() != k || opening.seeds.len() != k || com.coms.len() != 2 * k {
        return Ok(false);
    }
    Ok((0..k).all(|i| {
        let side = c.get(i) as usize;
        verify_with_seeds(com.com(i, side), &opening.values[i], &opening.seeds[i])
    }))
}

/// True iff all 2k openings verify and every pair XORs to `message`.
pub fn w_verify_decommit(com: &WCommitment, message: &Bits, decom: &WDecommit) -> bool {
    let k = com.params.k;
    if decom.message != *message || decom.values.len() != k || decom.seeds.len() != k || com.coms.len() != 2 * k {
        return false;
    }
    (0..k).all(|i| {
        let [v0, v1] = &decom.values[i];
        v0.len() == message.len()
            && v1.len() == message.len()
            && v0.xor(v1) == *message
            && verify_with_seeds(com.com(i, 0), v0, &decom.seeds[i][0])
            && verify_with_seeds(com.com(i, 1), v1, &decom.seeds[i][1])
    })
}

/// The value of a commitment by exhaustive seed search: every base commitment
/// must have a unique value and all pairs must XOR to the same message.
pub fn vcom_val(com: &WCommitment, cap: usize) -> Result<Option<Bits>> {
    let mut out: Option<Bits> = None;
    for i in 0..com.params.k {
        let (Some(a), Some(b)) = (base_val(com.com(i, 0), cap)?, base_val(com.com(i, 1), cap)?) else {
            return Ok(None);
        };
        let m = a.xor(&b);
        match &out {
            Some(prev) if *prev != m => return Ok(None),
            _ => out = Some(m),
        }
    }
    Ok(out)
}

/// Runs the commit stage between `committer` and an honest receiver, in
/// process. Returns the receiver's record and whether it accepted.
pub fn w_commit_stage_with<S: WCommitterStrategy, R: RngCore + ?Sized>(
    committer: &mut S,
    params: &WParams,
    receiver_rng: &mut R,
    transcript: &mut Transcript,
) -> Result<(WCommitment, bool)> {
    let (com, ok) = w_commit_run(Some(committer), Some(receiver_rng), params, transcript)?;
    Ok((com.expect("receiver is local"), ok))
}

/// Commit stage over any exchange. `committer` and `receiver_rng` are given
/// exactly for the local parties; the receiver's record is returned when it
/// is local.
pub fn w_commit_run<S: WCommitterStrategy, R: RngCore + ?Sized, X: Exchange>(
    mut committer: Option<&mut S>,
    mut receiver_rng: Option<&mut R>,
    params: &WParams,
    ex: &mut X,
) -> Result<(Option<WCommitment>, bool)> {
    if committer.is_some() != ex.is_local(Party::P1) || receiver_rng.is_some() != ex.is_local(Party::P2) {
        return param("local parties do not match the exchange");
    }
    let mut recv = None;
    let naor = ex.msg(Party::P2, msg::W_NAOR_R, || {
        let (r, naor) = WReceiver::new(params, receiver_rng.as_deref_mut().expect("local"));
        recv = Some(r);
        Ok(naor)
    })?;
    let coms = ex.msg(Party::P1, msg::W_COMS, || committer.as_deref_mut().expect("local").commit(&naor))?;
    let c = ex.msg(Party::P2, msg::W_CHALLENGE, || {
        let r = recv.as_mut().expect("local");
        r.receive_coms(coms)?;
        r.choose_challenge(receiver_rng.expect("local"))
    })?;
    let opening = ex.msg(Party::P1, msg::W_OPENING, || committer.expect("local").open(&c));
    let ok = ex.msg(Party::P2, msg::W_VERDICT, || {
        let r = recv.as_mut().expect("local");
        Ok(match opening {
            Ok(o) => r.receive_opening(o),
            Err(_) => {
                r.reject();
                false
            }
        })
    })?;
    Ok((recv.and_then(WReceiver::into_commitment), ok))
}

/// Decommit stage over any exchange: the committer sends its decommitment;
/// the receiver, given its record, returns the message or `None`.
pub fn w_decommit_run<S: WCommitterStrategy, X: Exchange>(committer: Option<&mut S>, com: Option<&WCommitment>, ex: &mut X) -> Result<Option<Bits>> {
    let d = ex.msg(Party::P1, msg::W_DECOMMIT, || committer.expect("local").decommit())?;
    Ok(com.filter(|c| c.accepted.accepted() && w_verify_decommit(c, &d.message, &d)).map(|_| d.message))
}

/// Honest commit stage.
pub fn w_commit_stage<R1: RngCore + ?Sized, R2: RngCore + ?Sized>(
    message: &Bits,
    params: &WParams,
    committer_rng: &mut R1,
    receiver_rng: &mut R2,
    transcript: &mut Transcript,
) -> Result<(WCommitment, WCommitter, bool)> {
    let mut committer = WCommitter::new(message, params, committer_rng)?;
    let (com, ok) = w_commit_stage_with(&mut committer, params, receiver_rng, transcript)?;
    Ok((com, committer, ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base_commit::{block_openings, naor_blocks, DEFAULT_VAL_CAP};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashMap;

    fn rngs(seed: u64) -> (ChaCha20Rng, ChaCha20Rng) {
        (ChaCha20Rng::seed_from_u64(seed), ChaCha20Rng::seed_from_u64(seed ^ 0xdead))
    }

    fn params(k: usize, len: usize, lambda: usize) -> WParams {
        WParams::new(k, len, PrgSpec::toy(lambda).unwrap()).unwrap()
    }

    #[test]
    fn honest_commit_accepts_and_decommits() {
        for seed in 0..10 {
            let (mut cr, mut rr) = rngs(seed);
            let p = params(4, 9, 4);
            let m = Bits::random(9, &mut cr);
            let (com, mut st, ok) = w_commit_stage(&m, &p, &mut cr, &mut rr, &mut Transcript::disabled()).unwrap();
            assert!(ok && com.accepted.accepted());
            assert!(w_verify_decommit(&com, &m, &st.decommit().unwrap()));
        }
    }

    #[derive(Clone)]
    struct GarbleOpening(WCommitter, usize);

    impl WCommitterStrategy for GarbleOpening {
        fn commit(&mut self, naor: &NaorFirst) -> Result<WComs> {
            self.0.commit(naor)
        }
        fn open(&mut self, c: &Bits) -> Result<WOpening> {
            let mut op = self.0.open(c)?;
            op.values[self.1].flip(0);
            Ok(op)
        }
        fn decommit(&mut self) -> Result<WDecommit> {
            self.0.decommit()
        }
    }

    #[test]
    fn garbled_opening_is_rejected() {
        let (mut cr, mut rr) = rngs(1);
        let p = params(4, 6, 6);
        let honest = WCommitter::new(&Bits::zeros(6), &p, &mut cr).unwrap();
        let mut adv = GarbleOpening(honest, 2);
        let (com, ok) = w_commit_stage_with(&mut adv, &p, &mut rr, &mut Transcript::disabled()).unwrap();
        assert!(!ok);
        assert_eq!(com.accepted, Verdict::Reject);
    }

    #[test]
    fn inconsistent_pairs_still_pass_commit_stage() {
        let (mut cr, mut rr) = rngs(2);
        let p = params(2, 3, 5);
        let m1 = Bits::parse("101").unwrap();
        let m2 = Bits::parse("011").unwrap();
        let eta1 = Bits::random(3, &mut cr);
        let eta2 = Bits::random(3, &mut cr);
        let shares = ShareMatrix { message: m1.clone(), pairs: vec![[eta1.clone(), eta1.xor(&m1)], [eta2.clone(), eta2.xor(&m2)]] };
        assert!(!shares.is_consistent());
        let mut c = WCommitter::from_shares(shares, &p, &mut cr).unwrap();
        let (com, ok) = w_commit_stage_with(&mut c, &p, &mut rr, &mut Transcript::disabled()).unwrap();
        assert!(ok);
        assert!(!w_verify_decommit(&com, &m1, &c.decommit().unwrap()));
        assert_eq!(vcom_val(&com, DEFAULT_VAL_CAP).unwrap(), None);
    }

    #[test]
    fn crafted_decommit_cases() {
        // k = 2, ℓ = 2. Pair XORs: 10 and 10 (consistent), then 10 and 11.
        let (mut cr, mut rr) = rngs(3);
        let p = params(2, 2, 4);
        let b = |s: &str| Bits::parse(s).unwrap();
        let good = ShareMatrix { message: b("10"), pairs: vec![[b("01"), b("11")], [b("00"), b("10")]] };
        let bad = ShareMatrix { message: b("10"), pairs: vec![[b("01"), b("11")], [b("00"), b("11")]] };
        for (shares, expect) in [(good, true), (bad, false)] {
            let mut c = WCommitter::from_shares(shares, &p, &mut cr).unwrap();
            let (com, ok) = w_commit_stage_with(&mut c, &p, &mut rr, &mut Transcript::disabled()).unwrap();
            assert!(ok);
            assert_eq!(w_verify_decommit(&com, &b("10"), &c.decommit().unwrap()), expect);
        }
    }

    #[test]
    fn val_of_honest_and_random_commitments() {
        let (mut cr, mut rr) = rngs(4);
        let p = params(3, 4, 4);
        let m = Bits::parse("1100").unwrap();
        let mut hits = 0;
        for _ in 0..20 {
            let (com, _, _) = w_commit_stage(&m, &p, &mut cr, &mut rr, &mut Transcript::disabled()).unwrap();
            if let Some(v) = vcom_val(&com, DEFAULT_VAL_CAP).unwrap() {
                assert_eq!(v, m);
                hits += 1;
            }
        }
        assert!(hits >= 15, "{hits}");
        let (mut com, _, _) = w_commit_stage(&m, &p, &mut cr, &mut rr, &mut Transcript::disabled()).unwrap();
        // Replace one base commitment with random blocks: no opening exists
        // except with probability about 2^-7 per bit.
        let spec = p.prg;
        loop {
            let blocks = Blocks::random(&spec, 4, &mut cr);
            let cand = BaseCommitment::assemble(spec, com.coms[3].receiver_r.clone(), blocks).unwrap();
            let openable = (0..4).all(|i| {
                let (a, b) = block_openings(&spec, cand.blocks.get(i), cand.receiver_r.get(i)).unwrap();
                a.is_some() || b.is_some()
            });
            if !openable {
                com.coms[3] = cand;
                break;
            }
        }
        assert_eq!(vcom_val(&com, DEFAULT_VAL_CAP).unwrap(), None);
    }

    #[test]
    fn accepting_opening_mixed_validity() {
        // k = 3: corrupt only the unchallenged side of pair 2, which must not matter.
        let (mut cr, mut rr) = rngs(5);
        let p = params(3, 5, 6);
        let mut c = WCommitter::new(&Bits::parse("10101").unwrap(), &p, &mut cr).unwrap();
        let (mut recv, naor) = WReceiver::new(&p, &mut rr);
        let mut coms = c.commit(&naor).unwrap();
        let chal = Bits::parse("010").unwrap();
        // Unchallenged side of pair 2 is side 1 (index 2*2+1).
        let stride = coms.blocks[5].stride();
        let mut raw = coms.blocks[5].raw().to_vec();
        raw[0] ^= 0x80;
        coms.blocks[5] = Blocks::from_raw(stride, raw).unwrap();
        recv.receive_coms(coms).unwrap();
        recv.set_challenge(chal.clone()).unwrap();
        let mut op = c.open(&chal).unwrap();
        let com = recv.commitment().unwrap().clone();
        assert!(accepting_opening_check(&com, &chal, &op).unwrap());
        op.values[1].flip(3);
        assert!(!accepting_opening_check(&com, &chal, &op).unwrap());
        assert!(matches!(accepting_opening_check(&com, &Bits::zeros(2), &op), Err(Error::Param(_))));
    }

    #[test]
    fn no_ambiguous_openings_at_lambda_8() {
        let (mut cr, mut rr) = rngs(6);
        let p = params(8, 8, 8);
        for _ in 0..10 {
            let m = Bits::random(8, &mut cr);
            let (com, _, _) = w_commit_stage(&m, &p, &mut cr, &mut rr, &mut Transcript::disabled()).unwrap();
            for bc in &com.coms {
                for i in 0..bc.len() {
                    let (a, b) = block_openings(&p.prg, bc.blocks.get(i), bc.receiver_r.get(i)).unwrap();
                    assert!(!(a.is_some() && b.is_some()));
                }
            }
        }
    }

    #[test]
    fn idealized_hiding_is_exact() {
        // k = 2, ℓ = 1, λ = 2. Pairs are independent given (r, c), so it is
        // enough that each pair's view has the same law for m = 0 and m = 1.
        // With idealized pads the opened "seed" is the pad itself.
        for r in 0..64u8 {
            for c in 0..2usize {
                let law = |m: u8| {
                    let mut h: HashMap<[u8; 4], u32> = HashMap::new();
                    for eta in 0..2u8 {
                        let shares = [eta, eta ^ m];
                        for p0 in 0..64u8 {
                            for p1 in 0..64u8 {
                                let rb = Blocks::from_raw(1, vec![r << 2]).unwrap();
                                let pads = [p0, p1];
                                let blk = |b: usize| {
                                    let pb = Blocks::from_raw(1, vec![pads[b] << 2]).unwrap();
                                    naor_blocks(&Bits::from_bools(&[shares[b] == 1]), &rb, &pb).raw()[0]
                                };
                                *h.entry([blk(0), blk(1), shares[c], pads[c]]).or_default() += 1;
                            }
                        }
                    }
                    h
                };
                assert_eq!(law(0), law(1), "r={r} c={c}");
            }
        }
    }

    #[test]
    fn messages_round_trip() {
        let (mut cr, mut rr) = rngs(7);
        let p = params(3, 10, 9);
        let mut c = WCommitter::new(&Bits::random(10, &mut cr), &p, &mut cr).unwrap();
        let (_, naor) = WReceiver::new(&p, &mut rr);
        assert_eq!(NaorFirst::decode(&naor.encode()).unwrap(), naor);
        let coms = c.commit(&naor).unwrap();
        assert_eq!(WComs::decode(&coms.encode()).unwrap(), coms);
        let op = c.open(&Bits::parse("011").unwrap()).unwrap();
        assert_eq!(WOpening::decode(&op.encode()).unwrap(), op);
        let d = c.decommit().unwrap();
        assert_eq!(WDecommit::decode(&d.encode()).unwrap(), d);
    }

    #[test]
    fn transcript_follows_schedule() {
        let (mut cr, mut rr) = rngs(8);
        let p = params(2, 4, 4);
        let mut t = Transcript::new();
        w_commit_stage(&Bits::zeros(4), &p, &mut cr, &mut rr, &mut t).unwrap();
        let types: Vec<_> = t.records().iter().map(|r| (r.from, r.msg_type.as_str())).collect();
        assert_eq!(
            types,
            vec![
                (Party::P2, "W_NAOR_R"),
                (Party::P1, "W_COMS"),
                (Party::P2, "W_CHALLENGE"),
                (Party::P1, "W_OPENING"),
                (Party::P2, "W_VERDICT")
            ]
        );
    }
}
