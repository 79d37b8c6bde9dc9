//! Strongly extractable commitment: VSS views of the message committed under
//! n parallel weak commitments, then a one-sided coin flip selects t views
//! that are fully opened and checked for pairwise consistency.
//!
//! The coin flip runs in reverse: the receiver commits to r1 with a weak
//! commitment, the committer answers with r2, the receiver opens r1, and the
//! opened subset is `derive_subset(r1 ⊕ r2)`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{param, protocol, Error, Result};
use crate::prg::{prg_expand, PrgSpec};
use crate::transport::exchange::Exchange;
use crate::transport::msg;
use crate::transport::transcript::{Party, Transcript};
use crate::vss::{vss_recon, vss_share, vss_view_consistent, ReconInput, VssParams, VssView, DEFAULT_MODULUS};
use crate::wextcom::{
    w_verify_decommit, NaorFirst, Verdict, WCommitment, WCommitter, WCommitterStrategy, WComs, WDecommit, WOpening, WParams, WReceiver,
};
use crate::wire::{Decode, Encode, Writer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrongParams {
    pub n: usize,
    pub t: usize,
    /// Share pairs per weak commitment.
    pub k: usize,
    /// Message length in bits.
    pub len: usize,
    pub prg: PrgSpec,
    pub coin_len: usize,
    pub p: u32,
}

impl StrongParams {
    pub fn new(n: usize, t: usize, k: usize, len: usize, prg: PrgSpec) -> Result<Self> {
        Self::with_options(n, t, k, len, prg, prg.lambda(), DEFAULT_MODULUS)
    }

    pub fn with_options(n: usize, t: usize, k: usize, len: usize, prg: PrgSpec, coin_len: usize, p: u32) -> Result<Self> {
        if t == 0 {
            return param("cut-and-choose needs t ≥ 1");
        }
        if k == 0 || len == 0 || coin_len == 0 {
            return param("k, message length, and coin length must be positive");
        }
        VssParams::new(n, t, p)?;
        Ok(StrongParams { n, t, k, len, prg, coin_len, p })
    }

    pub fn vss(&self) -> VssParams {
        VssParams::new(self.n, self.t, self.p).expect("validated on construction")
    }

    pub fn chunks(&self) -> usize {
        self.vss().chunks_for(self.len)
    }

    /// Bits of one encoded VSS view.
    pub fn view_bits(&self) -> usize {
        8 * self.vss().view_len(self.chunks())
    }

    pub fn view_wparams(&self) -> WParams {
        WParams::new(self.k, self.view_bits(), self.prg).expect("positive sizes")
    }

    pub fn coin_wparams(&self) -> WParams {
        WParams::new(self.k, self.coin_len, self.prg).expect("positive sizes")
    }

    /// Parameters of a strong commitment to one value of `len` bits with
    /// everything else unchanged.
    pub fn for_len(&self, len: usize) -> Result<Self> {
        Self::with_options(self.n, self.t, self.k, len, self.prg, self.coin_len, self.p)
    }
}

/// Size-t subset of `0..n`, ascending, read from the bit stream `r`.
///
/// Candidates are ⌈log2 n⌉-bit chunks; values ≥ n and repeats are skipped.
/// When `r` runs out, the stream is extended with the PRG applied to its last
/// λ bits. If the extension keeps failing (a short PRG cycle), the remaining
/// slots take the smallest unused indices.
pub fn derive_subset(r: &Bits, n: usize, t: usize, prg: &PrgSpec) -> Result<Vec<usize>> {
    if t > n {
        return param(format!("subset size {t} exceeds n = {n}"));
    }
    if t == n {
        return Ok((0..n).collect());
    }
    let width = (usize::BITS - (n - 1).leading_zeros()) as usize;
    let mut chosen = vec![false; n];
    let mut out = Vec::with_capacity(t);
    let mut stream = r.clone();
    let mut pos = 0;
    let mut extensions = 0;
    const MAX_EXTENSIONS: usize = 4096;
    while out.len() < t {
        if pos + width > stream.len() {
            if extensions == MAX_EXTENSIONS {
                break;
            }
            let lambda = prg.lambda();
            let tail = if stream.len() >= lambda {
                stream.slice(stream.len() - lambda, lambda)
            } else {
                Bits::zeros(lambda - stream.len()).concat(&stream)
            };
            stream.extend(&prg_expand(&tail, prg)?);
            extensions += 1;
            continue;
        }
        let cand = stream.read_uint(pos, width) as usize;
        pos += width;
        if cand < n && !chosen[cand] {
            chosen[cand] = true;
            out.push(cand);
        }
    }
    for i in 0..n {
        if out.len() == t {
            break;
        }
        if !chosen[i] {
            chosen[i] = true;
            out.push(i);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Committer behaviour; `Err` from any step is an abort.
pub trait ScCommitterStrategy: Clone {
    fn commit(&mut self, naors: &[NaorFirst]) -> Result<Vec<WComs>>;
    fn open(&mut self, challenges: &[Bits]) -> Result<Vec<WOpening>>;
    /// First message of the receiver's coin commitment, sent by the committer.
    fn coin_naor(&mut self) -> Result<NaorFirst>;
    fn coin_challenge(&mut self, coms: WComs) -> Result<Bits>;
    fn coin_r2(&mut self, opening: WOpening) -> Result<Bits>;
    fn open_subset(&mut self, r1: &WDecommit) -> Result<Vec<WDecommit>>;
    fn decommit(&mut self) -> Result<Vec<Option<WDecommit>>>;
}

/// Receiver behaviour; `Err` from any step is an abort.
pub trait ScReceiverStrategy: Clone {
    fn naors(&mut self) -> Result<Vec<NaorFirst>>;
    fn receive_coms(&mut self, coms: Vec<WComs>) -> Result<()>;
    fn challenges(&mut self) -> Result<Vec<Bits>>;
    fn receive_openings(&mut self, openings: Vec<WOpening>) -> Result<()>;
    fn coin_commit(&mut self, naor: &NaorFirst) -> Result<WComs>;
    fn coin_open(&mut self, challenge: &Bits) -> Result<WOpening>;
    fn coin_reveal(&mut self, r2: &Bits) -> Result<WDecommit>;
    fn verdict(&mut self, opened: Vec<WDecommit>) -> Result<bool>;
}

/// Honest committer. Also commits to arbitrary view strings, which is how
/// cheating committers with prepared views are built.
#[derive(Clone, Debug)]
pub struct ScCommitter {
    pub params: StrongParams,
    pub views: Vec<Bits>,
    w: Vec<WCommitter>,
    coin: Option<WReceiver>,
    r2: Option<Bits>,
    subset: Option<Vec<usize>>,
    rng: ChaCha20Rng,
}

impl ScCommitter {
    pub fn new<R: RngCore + ?Sized>(message: &Bits, params: &StrongParams, rng: &mut R) -> Result<Self> {
        if message.len() != params.len {
            return param(format!("message has {} bits, expected {}", message.len(), params.len));
        }
        let (views, _) = vss_share(message, &params.vss(), rng)?;
        Self::from_views(&views, params, rng)
    }

    pub fn from_views<R: RngCore + ?Sized>(views: &[VssView], params: &StrongParams, rng: &mut R) -> Result<Self> {
        let bits = views.iter().map(|v| Bits::from_bytes(&v.encode())).collect();
        Self::from_view_bits(bits, params, rng)
    }

    /// Commits to `views[i]` in session i; the strings need not decode.
    pub fn from_view_bits<R: RngCore + ?Sized>(views: Vec<Bits>, params: &StrongParams, rng: &mut R) -> Result<Self> {
        let wp = params.view_wparams();
        if views.len() != params.n || views.iter().any(|v| v.len() != wp.len) {
            return param(format!("need {} view strings of {} bits", params.n, wp.len));
        }
        let w = views.iter().map(|v| WCommitter::new(v, &wp, rng)).collect::<Result<_>>()?;
        let rng = ChaCha20Rng::from_rng(rng).map_err(|e| Error::Param(e.to_string()))?;
        Ok(ScCommitter { params: *params, views, w, coin: None, r2: None, subset: None, rng })
    }

    pub fn subset(&self) -> Option<&[usize]> {
        self.subset.as_deref()
    }

    pub fn weak(&self) -> &[WCommitter] {
        &self.w
    }
}

impl ScCommitterStrategy for ScCommitter {
    fn commit(&mut self, naors: &[NaorFirst]) -> Result<Vec<WComs>> {
        if naors.len() != self.params.n {
            return protocol(format!("expected {} Naor messages, got {}", self.params.n, naors.len()));
        }
        self.w.iter_mut().zip(naors).map(|(w, naor)| w.commit(naor)).collect()
    }

    fn open(&mut self, challenges: &[Bits]) -> Result<Vec<WOpening>> {
        if challenges.len() != self.params.n {
            return protocol(format!("expected {} challenges, got {}", self.params.n, challenges.len()));
        }
        self.w.iter_mut().zip(challenges).map(|(w, c)| w.open(c)).collect()
    }

    fn coin_naor(&mut self) -> Result<NaorFirst> {
        let (recv, naor) = WReceiver::new(&self.params.coin_wparams(), &mut self.rng);
        self.coin = Some(recv);
        Ok(naor)
    }

    fn coin_challenge(&mut self, coms: WComs) -> Result<Bits> {
        let coin = self.coin.as_mut().ok_or_else(|| Error::Protocol("coin commitment out of order".into()))?;
        coin.receive_coms(coms)?;
        coin.choose_challenge(&mut self.rng)
    }

    fn coin_r2(&mut self, opening: WOpening) -> Result<Bits> {
        let coin = self.coin.as_mut().ok_or_else(|| Error::Protocol("coin opening out of order".into()))?;
        if !coin.receive_opening(opening) {
            return protocol("receiver's coin commitment did not open correctly");
        }
        let r2 = Bits::random(self.params.coin_len, &mut self.rng);
        self.r2 = Some(r2.clone());
        Ok(r2)
    }

    fn open_subset(&mut self, r1: &WDecommit) -> Result<Vec<WDecommit>> {
        let (Some(coin), Some(r2)) = (self.coin.as_ref().and_then(WReceiver::commitment), self.r2.as_ref()) else {
            return protocol("subset opening out of order");
        };
        if r1.message.len() != self.params.coin_len || !w_verify_decommit(coin, &r1.message, r1) {
            return protocol("receiver's r1 decommitment is invalid");
        }
        let p = &self.params;
        let subset = derive_subset(&r1.message.xor(r2), p.n, p.t, &p.prg)?;
        let opened = subset.iter().map(|&i| self.w[i].decommit()).collect::<Result<_>>()?;
        self.subset = Some(subset);
        Ok(opened)
    }

    fn decommit(&mut self) -> Result<Vec<Option<WDecommit>>> {
        self.w.iter_mut().map(|w| w.decommit().map(Some)).collect()
    }
}

/// The receiver's record of a strong commitment.
#[derive(Clone, Debug)]
pub struct StrongSession {
    pub params: StrongParams,
    pub wcoms: Vec<WCommitment>,
    pub r1: Option<Bits>,
    pub r2: Option<Bits>,
    pub subset: Option<Vec<usize>>,
    pub verdict: Verdict,
}

/// Honest receiver.
#[derive(Clone, Debug)]
pub struct ScReceiver {
    params: StrongParams,
    w: Vec<WReceiver>,
    coin: Option<WCommitter>,
    r1: Option<Bits>,
    r2: Option<Bits>,
    subset: Option<Vec<usize>>,
    forced: Option<Vec<Bits>>,
    verdict: Verdict,
    rng: ChaCha20Rng,
}

impl ScReceiver {
    pub fn new<R: RngCore + ?Sized>(params: &StrongParams, rng: &mut R) -> Self {
        let rng = ChaCha20Rng::from_rng(rng).expect("ChaCha seeding from an RNG does not fail");
        ScReceiver { params: *params, w: Vec::new(), coin: None, r1: None, r2: None, subset: None, forced: None, verdict: Verdict::Pending, rng }
    }

    /// Makes the next call to `challenges` return exactly these (rewinding
    /// extractors pick their own challenges).
    pub fn force_challenges(&mut self, challenges: Vec<Bits>) {
        self.forced = Some(challenges);
    }

    /// Replaces the receiver's randomness for the steps still to come.
    pub fn reseed(&mut self, seed: u64) {
        self.rng = ChaCha20Rng::seed_from_u64(seed);
    }

    pub fn weak(&self) -> &[WReceiver] {
        &self.w
    }

    pub fn verdict_so_far(&self) -> Verdict {
        self.verdict
    }

    pub fn into_session(self) -> StrongSession {
        StrongSession {
            params: self.params,
            wcoms: self.w.into_iter().filter_map(WReceiver::into_commitment).collect(),
            r1: self.r1,
            r2: self.r2,
            subset: self.subset,
            verdict: self.verdict,
        }
    }

    fn fail<T>(&mut self, why: &str) -> Result<T> {
        self.verdict = Verdict::Reject;
        protocol(why)
    }
}

impl ScReceiverStrategy for ScReceiver {
    fn naors(&mut self) -> Result<Vec<NaorFirst>> {
        let wp = self.params.view_wparams();
        let (w, naors): (Vec<_>, Vec<_>) = (0..self.params.n).map(|_| WReceiver::new(&wp, &mut self.rng)).unzip();
        self.w = w;
        Ok(naors)
    }

    fn receive_coms(&mut self, coms: Vec<WComs>) -> Result<()> {
        if coms.len() != self.params.n {
            return self.fail("wrong number of weak commitments");
        }
        for (w, c) in self.w.iter_mut().zip(coms) {
            if let Err(e) = w.receive_coms(c) {
                self.verdict = Verdict::Reject;
                return Err(e);
            }
        }
        Ok(())
    }

    fn challenges(&mut self) -> Result<Vec<Bits>> {
        let forced = self.forced.take();
        let mut out = Vec::with_capacity(self.params.n);
        for (i, w) in self.w.iter_mut().enumerate() {
            match &forced {
                Some(f) => {
                    w.set_challenge(f[i].clone())?;
                    out.push(f[i].clone());
                }
                None => out.push(w.choose_challenge(&mut self.rng)?),
            }
        }
        Ok(out)
    }

    fn receive_openings(&mut self, openings: Vec<WOpening>) -> Result<()> {
        if openings.len() != self.params.n {
            return self.fail("wrong number of openings");
        }
        let mut bad = Vec::new();
        for (i, (w, o)) in self.w.iter_mut().zip(openings).enumerate() {
            if !w.receive_opening(o) {
                bad.push(i + 1);
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            self.fail(&format!("weak commitments {bad:?} did not open correctly"))
        }
    }

    fn coin_commit(&mut self, naor: &NaorFirst) -> Result<WComs> {
        let r1 = Bits::random(self.params.coin_len, &mut self.rng);
        let mut coin = WCommitter::new(&r1, &self.params.coin_wparams(), &mut self.rng)?;
        let coms = coin.commit(naor)?;
        self.coin = Some(coin);
        self.r1 = Some(r1);
        Ok(coms)
    }

    fn coin_open(&mut self, challenge: &Bits) -> Result<WOpening> {
        match self.coin.as_mut() {
            Some(c) => c.open(challenge),
            None => protocol("coin challenge out of order"),
        }
    }

    fn coin_reveal(&mut self, r2: &Bits) -> Result<WDecommit> {
        if r2.len() != self.params.coin_len {
            return self.fail("r2 has the wrong length");
        }
        let Some(coin) = self.coin.as_mut() else { return protocol("r2 out of order") };
        let dec = coin.decommit()?;
        self.r2 = Some(r2.clone());
        let p = &self.params;
        self.subset = Some(derive_subset(&self.r1.as_ref().expect("set with coin").xor(r2), p.n, p.t, &p.prg)?);
        Ok(dec)
    }

    fn verdict(&mut self, opened: Vec<WDecommit>) -> Result<bool> {
        let subset = self.subset.clone().ok_or_else(|| Error::Protocol("subset opening out of order".into()))?;
        let coms: Vec<&WCommitment> = self.w.iter().filter_map(WReceiver::commitment).collect();
        let ok = check_subset_opening(&self.params, &coms, &subset, &opened).is_ok();
        self.verdict = Verdict::from_bool(ok);
        Ok(ok)
    }
}

/// Verifies the opened views of `subset`: every decommitment is valid, every
/// view decodes for its slot, and all pairs are consistent.
pub fn check_subset_opening(params: &StrongParams, coms: &[&WCommitment], subset: &[usize], opened: &[WDecommit]) -> Result<Vec<VssView>> {
    if opened.len() != subset.len() || coms.len() != params.n {
        return protocol(format!("expected {} opened views, got {}", subset.len(), opened.len()));
    }
    let views = subset
        .iter()
        .zip(opened)
        .map(|(&i, d)| opened_view(params, coms[i], i, d).ok_or_else(|| Error::Protocol(format!("view {} failed to open", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    for a in 0..views.len() {
        for b in a + 1..views.len() {
            if !vss_view_consistent(&views[a], &views[b])? {
                return protocol(format!("views {} and {} are inconsistent", subset[a] + 1, subset[b] + 1));
            }
        }
    }
    Ok(views)
}

/// The view behind a full decommitment of session `slot`, if it verifies and
/// decodes to a view of this setup at the right position.
pub fn opened_view(params: &StrongParams, com: &WCommitment, slot: usize, d: &WDecommit) -> Option<VssView> {
    if d.message.len() != params.view_bits() || !w_verify_decommit(com, &d.message, d) {
        return None;
    }
    decode_view_slot(params, &d.message, slot)
}

/// Decodes a committed view string for position `slot` (0-based).
pub fn decode_view_slot(params: &StrongParams, bits: &Bits, slot: usize) -> Option<VssView> {
    let v = VssView::decode(bits.as_bytes()).ok()?;
    let ok = v.party == slot + 1 && v.n == params.n && v.t == params.t && v.p == params.p && v.chunks() == params.chunks();
    ok.then_some(v)
}

/// Decommit stage: slots whose decommitment fails become ⊥, then VSS
/// reconstruction.
pub fn sc_decommit_verify(session: &StrongSession, decoms: &[Option<WDecommit>]) -> Option<Bits> {
    let p = &session.params;
    if decoms.len() != p.n || session.wcoms.len() != p.n {
        return None;
    }
    let views = decoms
        .iter()
        .enumerate()
        .map(|(i, d)| d.as_ref().and_then(|d| opened_view(p, &session.wcoms[i], i, d)))
        .collect();
    vss_recon(&ReconInput { params: p.vss(), message_bits: p.len, views })
}

/// How a driver labels messages in the transcript.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Framing {
    /// One session with the committer as P1; records carry `SC_*` types and
    /// the bare message.
    Single,
    /// Lockstep sessions inside a larger protocol; records carry the given
    /// type, the committer is the given party, and the payload is the `SC_*`
    /// type followed by all sub-messages.
    Wrapped(u8, Party),
}

impl Framing {
    fn committer(self) -> Party {
        match self {
            Framing::Single => Party::P1,
            Framing::Wrapped(_, p) => p,
        }
    }

    fn outer(self, sc_type: u8) -> (u8, Party) {
        match self {
            Framing::Single => (sc_type, Party::P1),
            Framing::Wrapped(t, p) => (t, p),
        }
    }
}

fn encode_batch<T: Encode>(framing: Framing, sc_type: u8, items: &[T]) -> Vec<u8> {
    match framing {
        Framing::Single if items.len() == 1 => items[0].encode(),
        Framing::Single => {
            let mut w = Writer::new();
            for item in items {
                item.encode_into(&mut w);
            }
            w.finish()
        }
        Framing::Wrapped(..) => {
            let mut w = Writer::new();
            w.u8(sc_type);
            for item in items {
                item.encode_into(&mut w);
            }
            w.finish()
        }
    }
}

fn decode_framed<T: Decode>(framing: Framing, sc_type: u8, payload: &[u8], count: usize) -> Result<Vec<T>> {
    match framing {
        Framing::Single => decode_batch(payload, count),
        Framing::Wrapped(..) => match payload.split_first() {
            Some((&ty, rest)) if ty == sc_type => decode_batch(rest, count),
            _ => protocol(format!("expected sub-message {}", msg::name(sc_type).unwrap_or("?"))),
        },
    }
}

/// One batch of lockstep sub-messages, sent by the committer side when
/// `committer_sends`.
pub(crate) fn batch<T: Encode + Decode, X: Exchange>(
    ex: &mut X,
    committer_sends: bool,
    framing: Framing,
    sc_type: u8,
    count: usize,
    make: impl FnOnce() -> Result<Vec<T>>,
) -> Result<Vec<T>> {
    let from = if committer_sends { framing.committer() } else { framing.committer().other() };
    let (outer, _) = framing.outer(sc_type);
    ex.transfer(from, outer, make, |items| encode_batch(framing, sc_type, items), |b| decode_framed(framing, sc_type, b, count))
}

/// Result of driving commit stages to their end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScOutcome {
    pub accept: bool,
    pub reason: Option<String>,
}

impl ScOutcome {
    fn abort(who: &str, e: Error) -> Self {
        ScOutcome { accept: false, reason: Some(format!("{who}: {e}")) }
    }
}

fn each<T, S>(items: &mut [S], mut f: impl FnMut(usize, &mut S) -> Result<T>) -> Result<Vec<T>> {
    items.iter_mut().enumerate().map(|(i, s)| f(i, s)).collect()
}

/// First half of lockstep commit stages: Naor messages and commitments. The
/// state afterwards is the rewind point of the extractors.
///
/// `cs` and `rs` hold the local sides only; a remote side is an empty slice
/// and `count` is the number of sessions.
pub fn sc_drive_to_challenge<C: ScCommitterStrategy, R: ScReceiverStrategy, X: Exchange>(
    cs: &mut [C],
    rs: &mut [R],
    ex: &mut X,
    framing: Framing,
) -> std::result::Result<(), ScOutcome> {
    let n = cs.len().max(rs.len());
    let rp = framing.committer().other();
    let naors = batch(ex, false, framing, msg::SC_NAOR_BATCH, n, || each(rs, |_, r| r.naors())).map_err(|e| ScOutcome::abort("receiver", e))?;
    let coms = batch(ex, true, framing, msg::SC_WCOMS_BATCH, n, || each(cs, |i, c| c.commit(&naors[i]))).map_err(|e| ScOutcome::abort("committer", e))?;
    let mut coms = coms.into_iter();
    ex.local(rp, || each(rs, |_, r| r.receive_coms(coms.next().expect("one per session"))).map(drop))
        .map_err(|e| ScOutcome::abort("receiver", e))?;
    Ok(())
}

/// Challenges and openings; the receiver checks the openings. Afterwards
/// only the coin flip and the subset opening remain.
pub fn sc_drive_openings<C: ScCommitterStrategy, R: ScReceiverStrategy, X: Exchange>(
    cs: &mut [C],
    rs: &mut [R],
    ex: &mut X,
    framing: Framing,
) -> std::result::Result<(), ScOutcome> {
    let n = cs.len().max(rs.len());
    let rcv = |e| ScOutcome::abort("receiver", e);
    let ch = batch(ex, false, framing, msg::SC_CHALLENGE_BATCH, n, || each(rs, |_, r| r.challenges())).map_err(rcv)?;
    let op = batch(ex, true, framing, msg::SC_OPENING_BATCH, n, || each(cs, |i, c| c.open(&ch[i]))).map_err(|e| ScOutcome::abort("committer", e))?;
    let mut op = op.into_iter();
    ex.local(framing.committer().other(), || each(rs, |_, r| r.receive_openings(op.next().expect("one per session"))).map(drop))
        .map_err(rcv)
}

/// Coin flip for the audited subset, subset opening, verdicts.
pub fn sc_drive_audit<C: ScCommitterStrategy, R: ScReceiverStrategy, X: Exchange>(
    cs: &mut [C],
    rs: &mut [R],
    ex: &mut X,
    framing: Framing,
) -> ScOutcome {
    let n = cs.len().max(rs.len());
    let mut run = || -> std::result::Result<bool, ScOutcome> {
        let rcv = |e| ScOutcome::abort("receiver", e);
        let cmt = |e| ScOutcome::abort("committer", e);
        let naor = batch(ex, true, framing, msg::SC_COIN_NAOR, n, || each(cs, |_, c| c.coin_naor())).map_err(cmt)?;
        let coms = batch(ex, false, framing, msg::SC_COIN_COMMIT, n, || each(rs, |i, r| r.coin_commit(&naor[i]))).map_err(rcv)?;
        let mut coms = coms.into_iter();
        let cch = batch(ex, true, framing, msg::SC_COIN_CHALLENGE, n, || each(cs, |_, c| c.coin_challenge(coms.next().expect("one per session"))))
            .map_err(cmt)?;
        let cop = batch(ex, false, framing, msg::SC_COIN_OPENING, n, || each(rs, |i, r| r.coin_open(&cch[i]))).map_err(rcv)?;
        let mut cop = cop.into_iter();
        let r2 = batch(ex, true, framing, msg::SC_COIN_R2, n, || each(cs, |_, c| c.coin_r2(cop.next().expect("one per session")))).map_err(cmt)?;
        let r1 = batch(ex, false, framing, msg::SC_COIN_OPEN, n, || each(rs, |i, r| r.coin_reveal(&r2[i]))).map_err(rcv)?;
        let opened = batch(ex, true, framing, msg::SC_SUBSET_OPEN, n, || each(cs, |i, c| c.open_subset(&r1[i]))).map_err(cmt)?;
        let mut opened = opened.into_iter();
        let verdicts = batch(ex, false, framing, msg::SC_VERDICT, n, || each(rs, |_, r| r.verdict(opened.next().expect("one per session")))).map_err(rcv)?;
        Ok(verdicts.iter().all(|&v| v))
    };
    match run() {
        Ok(true) => ScOutcome { accept: true, reason: None },
        Ok(false) => ScOutcome { accept: false, reason: Some("receiver rejected the opened views".into()) },
        Err(o) => o,
    }
}

/// Second half: challenges, openings, coin flip, subset opening, verdicts.
pub fn sc_drive_from_challenge<C: ScCommitterStrategy, R: ScReceiverStrategy, X: Exchange>(
    cs: &mut [C],
    rs: &mut [R],
    ex: &mut X,
    framing: Framing,
) -> ScOutcome {
    match sc_drive_openings(cs, rs, ex, framing) {
        Ok(()) => sc_drive_audit(cs, rs, ex, framing),
        Err(o) => o,
    }
}

/// Whole commit stage between the given strategies.
pub fn sc_drive<C: ScCommitterStrategy, R: ScReceiverStrategy, X: Exchange>(cs: &mut [C], rs: &mut [R], ex: &mut X, framing: Framing) -> ScOutcome {
    match sc_drive_to_challenge(cs, rs, ex, framing) {
        Ok(()) => sc_drive_from_challenge(cs, rs, ex, framing),
        Err(o) => o,
    }
}

/// Honest commit stage in process.
pub fn sc_commit_stage<R1: RngCore + ?Sized, R2: RngCore + ?Sized>(
    message: &Bits,
    params: &StrongParams,
    committer_rng: &mut R1,
    receiver_rng: &mut R2,
    transcript: &mut Transcript,
) -> Result<(StrongSession, ScCommitter, bool)> {
    let mut c = [ScCommitter::new(message, params, committer_rng)?];
    let mut r = [ScReceiver::new(params, receiver_rng)];
    let out = sc_drive(&mut c, &mut r, transcript, Framing::Single);
    let [c] = c;
    let [r] = r;
    Ok((r.into_session(), c, out.accept))
}

/// Decommit stage in process: the committer's decommitments, recorded, then
/// verified.
pub fn sc_decommit_stage<C: ScCommitterStrategy>(session: &StrongSession, committer: &mut C, transcript: &mut Transcript) -> Option<Bits> {
    sc_decommit_run(Some(committer), Some(session), transcript).ok().flatten()
}

/// Decommit stage over any exchange.
pub fn sc_decommit_run<C: ScCommitterStrategy, X: Exchange>(committer: Option<&mut C>, session: Option<&StrongSession>, ex: &mut X) -> Result<Option<Bits>> {
    let decoms: Vec<Option<WDecommit>> = ex.msg(Party::P1, msg::SC_DECOMMIT, || committer.expect("local").decommit())?;
    Ok(session.and_then(|s| sc_decommit_verify(s, &decoms)))
}

/// Decodes a batch payload of n sub-messages (used by channel drivers).
pub fn decode_batch<T: Decode>(payload: &[u8], count: usize) -> Result<Vec<T>> {
    let mut r = crate::wire::Reader::new(payload);
    let items = (0..count).map(|_| T::decode_from(&mut r)).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vss::vss_share;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn small(n: usize, t: usize, len: usize) -> StrongParams {
        StrongParams::new(n, t, 2, len, PrgSpec::toy(4).unwrap()).unwrap()
    }

    #[test]
    fn subset_rule_examples() {
        let prg = PrgSpec::toy(4).unwrap();
        assert_eq!(derive_subset(&Bits::parse("0101").unwrap(), 5, 5, &prg).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(derive_subset(&Bits::parse("0").unwrap(), 2, 1, &prg).unwrap(), vec![0]);
        assert_eq!(derive_subset(&Bits::parse("1").unwrap(), 2, 1, &prg).unwrap(), vec![1]);
        // 11 -> 3, 00 -> 0.
        assert_eq!(derive_subset(&Bits::parse("11000000").unwrap(), 4, 2, &prg).unwrap(), vec![0, 3]);
        // 11, 11 (repeat), 01.
        assert_eq!(derive_subset(&Bits::parse("111101").unwrap(), 4, 2, &prg).unwrap(), vec![1, 3]);
        // n = 5: 3-bit chunks 111 (skip), 110 (skip), 100 -> 4, 100 (repeat), 001 -> 1.
        assert_eq!(derive_subset(&Bits::parse("111110100100001").unwrap(), 5, 2, &prg).unwrap(), vec![1, 4]);
        assert!(derive_subset(&Bits::zeros(4), 3, 4, &prg).is_err());
    }

    #[test]
    fn subset_stream_extension_is_deterministic() {
        let prg = PrgSpec::toy(4).unwrap();
        let r = Bits::parse("1111").unwrap();
        let a = derive_subset(&r, 10, 3, &prg).unwrap();
        assert_eq!(a, derive_subset(&r, 10, 3, &prg).unwrap());
        assert_eq!(a.len(), 3);
        assert!(a.windows(2).all(|w| w[0] < w[1]) && a.iter().all(|&i| i < 10));
    }

    #[test]
    fn honest_commit_and_decommit() {
        let params = small(4, 1, 8);
        let m = Bits::parse("10110010").unwrap();
        let mut tr = Transcript::new();
        let (session, mut c, ok) = sc_commit_stage(&m, &params, &mut rng(1), &mut rng(2), &mut tr).unwrap();
        assert!(ok);
        assert_eq!(session.verdict, Verdict::Accept);
        assert_eq!(session.subset.as_ref().unwrap().len(), 1);
        assert_eq!(session.subset.as_deref(), c.subset());
        let types: Vec<&str> = tr.records().iter().map(|r| r.msg_type.as_str()).collect();
        assert_eq!(
            types,
            [
                "SC_NAOR_BATCH",
                "SC_WCOMS_BATCH",
                "SC_CHALLENGE_BATCH",
                "SC_OPENING_BATCH",
                "SC_COIN_NAOR",
                "SC_COIN_COMMIT",
                "SC_COIN_CHALLENGE",
                "SC_COIN_OPENING",
                "SC_COIN_R2",
                "SC_COIN_OPEN",
                "SC_SUBSET_OPEN",
                "SC_VERDICT"
            ]
        );
        assert_eq!(sc_decommit_stage(&session, &mut c, &mut tr), Some(m));
    }

    #[test]
    fn decommit_tolerates_t_invalid_and_rejects_all_invalid() {
        let params = small(7, 2, 8);
        let m = Bits::parse("01100111").unwrap();
        let (session, mut c, ok) = sc_commit_stage(&m, &params, &mut rng(3), &mut rng(4), &mut Transcript::disabled()).unwrap();
        assert!(ok);
        let mut decoms = c.decommit().unwrap();
        decoms[1] = None;
        decoms[5].as_mut().unwrap().values[0][0].flip(3);
        assert_eq!(sc_decommit_verify(&session, &decoms), Some(m));
        let none = vec![None; 7];
        assert_eq!(sc_decommit_verify(&session, &none), None);
    }

    #[derive(Clone)]
    struct Refuser(ScCommitter);

    impl ScCommitterStrategy for Refuser {
        fn commit(&mut self, naors: &[NaorFirst]) -> Result<Vec<WComs>> {
            self.0.commit(naors)
        }
        fn open(&mut self, c: &[Bits]) -> Result<Vec<WOpening>> {
            self.0.open(c)
        }
        fn coin_naor(&mut self) -> Result<NaorFirst> {
            self.0.coin_naor()
        }
        fn coin_challenge(&mut self, coms: WComs) -> Result<Bits> {
            self.0.coin_challenge(coms)
        }
        fn coin_r2(&mut self, o: WOpening) -> Result<Bits> {
            self.0.coin_r2(o)
        }
        fn open_subset(&mut self, r1: &WDecommit) -> Result<Vec<WDecommit>> {
            let mut v = self.0.open_subset(r1)?;
            v.pop();
            Ok(v)
        }
        fn decommit(&mut self) -> Result<Vec<Option<WDecommit>>> {
            self.0.decommit()
        }
    }

    #[test]
    fn refusing_to_open_rejects() {
        let params = small(4, 1, 8);
        let m = Bits::parse("11110000").unwrap();
        let mut c = [Refuser(ScCommitter::new(&m, &params, &mut rng(5)).unwrap())];
        let mut r = [ScReceiver::new(&params, &mut rng(6))];
        let out = sc_drive(&mut c, &mut r, &mut Transcript::disabled(), Framing::Single);
        assert!(!out.accept);
    }

    #[test]
    fn one_corrupted_view_passes_only_when_missed() {
        // n = 10, t = 3: view 3 inconsistent with all others. Acceptance is
        // exactly the event that the subset misses index 2.
        let params = small(10, 3, 8);
        let m = Bits::parse("00011011").unwrap();
        let mut accepted = 0;
        let trials = 60;
        for s in 0..trials {
            let mut g = rng(100 + s);
            let (mut views, _) = vss_share(&m, &params.vss(), &mut g).unwrap();
            views[2].share_polys[0][1] = (views[2].share_polys[0][1] + 1) % 257;
            // Refresh the corrupted party's own flags so the view is well formed.
            let f = crate::field::Field::new(257).unwrap();
            for j in views[2].others().collect::<Vec<_>>() {
                let slot = views[2].slot_of(j);
                views[2].flags[slot] = f.eval(&views[2].share_polys[0], j as u32) != views[2].cross[slot][0];
            }
            views[2].complainers[2] = true;
            let mut c = [ScCommitter::from_views(&views, &params, &mut g).unwrap()];
            let mut r = [ScReceiver::new(&params, &mut g)];
            let out = sc_drive(&mut c, &mut r, &mut Transcript::disabled(), Framing::Single);
            let missed = !c[0].subset().unwrap().contains(&2);
            assert_eq!(out.accept, missed, "trial {s}: {:?}", out.reason);
            accepted += out.accept as u32;
        }
        assert!(accepted > 0 && accepted < trials as u32);
    }

    #[test]
    fn invalid_coin_decommitment_aborts_committer() {
        #[derive(Clone)]
        struct LyingReceiver(ScReceiver);
        impl ScReceiverStrategy for LyingReceiver {
            fn naors(&mut self) -> Result<Vec<NaorFirst>> {
                self.0.naors()
            }
            fn receive_coms(&mut self, c: Vec<WComs>) -> Result<()> {
                self.0.receive_coms(c)
            }
            fn challenges(&mut self) -> Result<Vec<Bits>> {
                self.0.challenges()
            }
            fn receive_openings(&mut self, o: Vec<WOpening>) -> Result<()> {
                self.0.receive_openings(o)
            }
            fn coin_commit(&mut self, n: &NaorFirst) -> Result<WComs> {
                self.0.coin_commit(n)
            }
            fn coin_open(&mut self, c: &Bits) -> Result<WOpening> {
                self.0.coin_open(c)
            }
            fn coin_reveal(&mut self, r2: &Bits) -> Result<WDecommit> {
                let mut d = self.0.coin_reveal(r2)?;
                d.message.flip(0);
                Ok(d)
            }
            fn verdict(&mut self, o: Vec<WDecommit>) -> Result<bool> {
                self.0.verdict(o)
            }
        }
        let params = small(4, 1, 8);
        let m = Bits::parse("11110000").unwrap();
        let mut c = [ScCommitter::new(&m, &params, &mut rng(7)).unwrap()];
        let mut r = [LyingReceiver(ScReceiver::new(&params, &mut rng(8)))];
        let out = sc_drive(&mut c, &mut r, &mut Transcript::disabled(), Framing::Single);
        assert!(!out.accept);
        assert!(out.reason.unwrap().contains("r1 decommitment"));
    }
}
