//! Rewinding extractors for the weak and the strong commitment.

use rand::RngCore;

use crate::bits::Bits;
use crate::ecnp::EcnpParams;
use crate::extcom::{decode_view_slot, sc_drive_from_challenge, sc_drive_to_challenge, Framing, ScCommitterStrategy, ScOutcome, ScReceiver, StrongParams};
use crate::transport::msg;
use crate::transport::transcript::{Party, Transcript};
use crate::vss::{vss_recon, ReconInput};
use crate::wextcom::{WCommitment, WCommitterStrategy, WParams, WReceiver};

/// The state right after the commitments: the rewind point.
#[derive(Clone, Debug)]
pub struct SimlessPoint<S> {
    pub params: WParams,
    pub adversary: S,
    pub receiver: WReceiver,
    /// False when the adversary aborted or sent malformed commitments.
    pub committed: bool,
}

#[derive(Clone, Debug)]
pub struct SimlessOutcome<S> {
    /// `None` is Fail.
    pub value: Option<Bits>,
    /// The adversary after the first run.
    pub adversary: S,
    /// The receiver's record of the first run.
    pub commitment: Option<WCommitment>,
    pub accepted: bool,
}

/// Runs the commit message against a fresh honest receiver.
pub fn simless_prepare<S: WCommitterStrategy, R: RngCore + ?Sized>(mut adversary: S, params: &WParams, rng: &mut R) -> SimlessPoint<S> {
    let (mut receiver, naor) = WReceiver::new(params, rng);
    let committed = adversary.commit(&naor).and_then(|coms| receiver.receive_coms(coms)).is_ok();
    SimlessPoint { params: *params, adversary, receiver, committed }
}

/// Both runs from the rewind point with the given challenges.
pub fn simless_finish<S: WCommitterStrategy>(point: &SimlessPoint<S>, c1: &Bits, c2: &Bits) -> SimlessOutcome<S> {
    let run = |c: &Bits| {
        let mut adv = point.adversary.clone();
        let mut recv = point.receiver.clone();
        let ok = point.committed
            && recv.set_challenge(c.clone()).is_ok()
            && match adv.open(c) {
                Ok(o) => recv.receive_opening(o),
                Err(_) => {
                    recv.reject();
                    false
                }
            };
        (adv, recv, ok)
    };
    let (adversary, first, ok1) = run(c1);
    let (_, second, ok2) = run(c2);
    let value = if ok1 && ok2 {
        (0..point.params.k).find(|&j| c1.get(j) != c2.get(j)).and_then(|j| {
            let a = first.commitment()?.opening.as_ref()?;
            let b = second.commitment()?.opening.as_ref()?;
            Some(a.values[j].xor(&b.values[j]))
        })
    } else {
        None
    };
    SimlessOutcome { value, adversary, commitment: first.into_commitment(), accepted: ok1 }
}

/// Commit, snapshot, run with a uniform challenge, rewind, run with an
/// independent one; Fail if either run rejects or the challenges coincide.
pub fn simless_extract<S: WCommitterStrategy, R: RngCore + ?Sized>(adversary: S, params: &WParams, rng: &mut R) -> SimlessOutcome<S> {
    let point = simless_prepare(adversary, params, rng);
    let c1 = Bits::random(params.k, rng);
    let c2 = Bits::random(params.k, rng);
    simless_finish(&point, &c1, &c2)
}

/// Extraction from lockstep strong commitments.
#[derive(Clone, Debug)]
pub struct StrongExtraction<C> {
    /// Per session; all `None` unless both runs were accepted.
    pub values: Vec<Option<Bits>>,
    /// Receiver verdicts of the main run and of the rewound run.
    pub accept: (bool, bool),
    /// Committers after the main run.
    pub committers: Vec<C>,
    /// Receivers after the main run.
    pub receivers: Vec<ScReceiver>,
    pub outcome: ScOutcome,
}

impl<C> StrongExtraction<C> {
    pub fn value(&self) -> Option<&Bits> {
        self.values.first()?.as_ref()
    }

    pub fn both_accepted(&self) -> bool {
        self.accept.0 && self.accept.1
    }
}

/// Runs lockstep strong commitments to the rewind point (recorded in
/// `transcript`), then the main run with uniform challenges (recorded) and a
/// rewound run with independent challenges and fresh receiver randomness
/// (not recorded). Each slot of each session yields a share from the first
/// differing challenge coordinate; the session value is the VSS
/// reconstruction over the slots.
pub fn strong_extract_with<C: ScCommitterStrategy, R: RngCore + ?Sized>(
    committers: Vec<C>,
    receivers: Vec<ScReceiver>,
    params: &StrongParams,
    framing: Framing,
    transcript: &mut Transcript,
    rng: &mut R,
) -> StrongExtraction<C> {
    let (mut cs, mut rs) = (committers, receivers);
    let sessions = rs.len();
    if let Err(outcome) = sc_drive_to_challenge(&mut cs, &mut rs, transcript, framing) {
        return StrongExtraction { values: vec![None; sessions], accept: (false, false), committers: cs, receivers: rs, outcome };
    }
    let (mut cs2, mut rs2) = (cs.clone(), rs.clone());
    let mut challenges = || -> Vec<Bits> { (0..params.n).map(|_| Bits::random(params.k, rng)).collect() };
    for r in &mut rs {
        r.force_challenges(challenges());
    }
    for r in &mut rs2 {
        r.force_challenges(challenges());
    }
    for r in &mut rs2 {
        r.reseed(rng.next_u64());
    }
    let out1 = sc_drive_from_challenge(&mut cs, &mut rs, transcript, framing);
    let out2 = sc_drive_from_challenge(&mut cs2, &mut rs2, &mut Transcript::disabled(), framing);
    let values = if out1.accept && out2.accept {
        rs.iter().zip(&rs2).map(|(a, b)| extract_session(params, a, b)).collect()
    } else {
        vec![None; sessions]
    };
    StrongExtraction { values, accept: (out1.accept, out2.accept), committers: cs, receivers: rs, outcome: out1 }
}

fn extract_session(params: &StrongParams, a: &ScReceiver, b: &ScReceiver) -> Option<Bits> {
    let views = (0..params.n)
        .map(|i| {
            let (x, y) = (a.weak().get(i)?.commitment()?, b.weak().get(i)?.commitment()?);
            if !x.accepted.accepted() || !y.accepted.accepted() {
                return None;
            }
            let (cx, cy) = (x.challenge.as_ref()?, y.challenge.as_ref()?);
            let j = (0..params.k).find(|&j| cx.get(j) != cy.get(j))?;
            let share = x.opening.as_ref()?.values[j].xor(&y.opening.as_ref()?.values[j]);
            decode_view_slot(params, &share, i)
        })
        .collect();
    vss_recon(&ReconInput { params: params.vss(), message_bits: params.len, views })
}

/// One strong commitment against an honest receiver, extracted.
pub fn strong_extract<C: ScCommitterStrategy, R: RngCore + ?Sized>(committer: C, params: &StrongParams, rng: &mut R) -> StrongExtraction<C> {
    let receiver = ScReceiver::new(params, rng);
    strong_extract_with(vec![committer], vec![receiver], params, Framing::Single, &mut Transcript::disabled(), rng)
}

/// Extracts the message of a commit-and-prove commit stage: every view
/// commitment is extracted, then the views are reconstructed.
pub fn ecnp_extract<C: ScCommitterStrategy, R: RngCore + ?Sized>(committers: Vec<C>, params: &EcnpParams, rng: &mut R) -> (Option<Bits>, StrongExtraction<C>) {
    let inner = params.inner();
    let receivers = (0..params.outer.n).map(|_| ScReceiver::new(&inner, rng)).collect();
    let framing = Framing::Wrapped(msg::ECNP_COMMIT_ROUND, Party::P1);
    let ex = strong_extract_with(committers, receivers, &inner, framing, &mut Transcript::disabled(), rng);
    if !ex.both_accepted() {
        return (None, ex);
    }
    let o = &params.outer;
    let views = ex.values.iter().enumerate().map(|(i, v)| v.as_ref().and_then(|b| decode_view_slot(o, b, i))).collect();
    (vss_recon(&ReconInput { params: o.vss(), message_bits: o.len, views }), ex)
}
