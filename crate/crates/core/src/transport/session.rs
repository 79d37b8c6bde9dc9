//! Two-party sessions: HELLO negotiation, then one protocol run.
//!
//! Both sides derive their randomness from the session seed, one ChaCha
//! stream per party, so a run with the same seed and parameters produces
//! the same transcript in process, over the in-memory channel and over TCP.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::net::{TcpListener, TcpStream};
use std::str::FromStr;
use std::thread;
use std::time::Duration;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::apps::{coin_flip_run, socom_commit, socom_reveal, zkaok_run, CoinCommitter, CoinResponder, CommitOutcome, SoComCommitter, SoComParams, SoComReceiver};
use crate::bits::Bits;
use crate::circuit::{compile_target_predicate, Circuit};
use crate::ecnp::{ecnp_commit_run, ecnp_prove_run, EcnpParams, EcnpProver, EcnpVerifier, Failure};
use crate::error::{param, Error, Result};
use crate::extcom::{sc_decommit_run, sc_drive, Framing, ScCommitter, ScReceiver, StrongParams};
use crate::prg::{PrgBackend, PrgSpec};
use crate::transport::channel::{Channel, TcpChannel};
use crate::transport::exchange::{Exchange, Peer};
use crate::transport::msg;
use crate::transport::transcript::{Party, Transcript};
use crate::vss::DEFAULT_MODULUS;
use crate::wextcom::{w_commit_run, w_decommit_run, WCommitter, WParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolId {
    /// Weak commitment, commit stage.
    WCommit,
    /// Weak commitment, commit then decommit.
    WDecommit,
    /// Strong commitment, commit stage.
    Commit,
    /// Strong commitment, commit then decommit.
    Decommit,
    /// Commit-and-prove: commit stage then one prove stage.
    Prove,
    CoinFlip,
    Zkaok,
    /// Selective-opening commitment: commit then one reveal.
    SoCom,
}

impl ProtocolId {
    pub const ALL: [ProtocolId; 8] = [
        ProtocolId::WCommit,
        ProtocolId::WDecommit,
        ProtocolId::Commit,
        ProtocolId::Decommit,
        ProtocolId::Prove,
        ProtocolId::CoinFlip,
        ProtocolId::Zkaok,
        ProtocolId::SoCom,
    ];

    pub fn id(self) -> &'static str {
        match self {
            ProtocolId::WCommit => "w-commit",
            ProtocolId::WDecommit => "w-decommit",
            ProtocolId::Commit => "commit",
            ProtocolId::Decommit => "decommit",
            ProtocolId::Prove => "prove",
            ProtocolId::CoinFlip => "coinflip",
            ProtocolId::Zkaok => "zkaok",
            ProtocolId::SoCom => "socom",
        }
    }

    fn needs_predicate(self) -> bool {
        matches!(self, ProtocolId::Prove | ProtocolId::Zkaok)
    }
}

impl fmt::Display for ProtocolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ProtocolId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|p| p.id() == s).ok_or_else(|| Error::Param(format!("unknown protocol {s:?}")))
    }
}

/// Sender is P1 (committer, prover, first coin contributor); receiver is P2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Sender,
    Receiver,
}

impl Role {
    pub fn party(self) -> Party {
        match self {
            Role::Sender => Party::P1,
            Role::Receiver => Party::P2,
        }
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sender" | "committer" | "prover" | "p1" => Ok(Role::Sender),
            "receiver" | "verifier" | "p2" => Ok(Role::Receiver),
            _ => param(format!("unknown role {s:?}")),
        }
    }
}

/// Everything a session needs besides the channel and the seed.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionParams {
    pub lambda: usize,
    pub prg: PrgBackend,
    pub n: usize,
    pub t: usize,
    /// Share pairs per weak commitment; λ when `None`.
    pub k: Option<usize>,
    /// Message length in bits (per message for selective opening).
    pub len: usize,
    /// Audit coin length; λ when `None`.
    pub coin_len: Option<usize>,
    pub p: u32,
    /// The sender's message; sampled from the seed when `None`. For prove
    /// and zkaok without a circuit it is also the public statement
    /// "the committed value equals this", so both sides must give it.
    pub message: Option<Bits>,
    pub circuit: Option<Circuit>,
    /// Number of messages under one selective-opening commitment.
    pub t_msgs: usize,
    /// Indices the selective-opening receiver asks to open.
    pub reveal: BTreeSet<usize>,
}

impl Default for SessionParams {
    fn default() -> Self {
        SessionParams {
            lambda: 8,
            prg: PrgBackend::Production,
            n: 10,
            t: 3,
            k: None,
            len: 32,
            coin_len: None,
            p: DEFAULT_MODULUS,
            message: None,
            circuit: None,
            t_msgs: 4,
            reveal: BTreeSet::from([0]),
        }
    }
}

impl SessionParams {
    pub fn prg_spec(&self) -> Result<PrgSpec> {
        PrgSpec::new(self.lambda, self.prg)
    }

    /// Message length actually used: the message's own when one is given.
    pub fn message_len(&self) -> usize {
        self.message.as_ref().map_or(self.len, Bits::len)
    }

    pub fn strong(&self) -> Result<StrongParams> {
        let prg = self.prg_spec()?;
        StrongParams::with_options(self.n, self.t, self.k.unwrap_or(self.lambda), self.message_len(), prg, self.coin_len.unwrap_or(self.lambda), self.p)
    }

    pub fn weak(&self) -> Result<WParams> {
        WParams::new(self.k.unwrap_or(self.lambda), self.message_len(), self.prg_spec()?)
    }

    pub fn ecnp(&self) -> Result<EcnpParams> {
        Ok(EcnpParams::new(self.strong()?))
    }

    pub fn socom(&self) -> Result<SoComParams> {
        SoComParams::new(self.ecnp()?, self.t_msgs, self.len)
    }

    /// The predicate of prove and zkaok: the given circuit, or equality
    /// with the public message.
    pub fn predicate(&self) -> Result<Circuit> {
        if let Some(c) = &self.circuit {
            return Ok(c.clone());
        }
        let Some(m) = &self.message else { return param("prove and zkaok need a circuit or a public message") };
        let vss = self.strong()?.vss();
        compile_target_predicate(m, m.len(), vss.chunk_bits(), &vss.field)
    }

    /// Canonical parameter string exchanged in HELLO. Local choices (the
    /// sender's message, the reveal set) are left out unless they are part
    /// of the public statement.
    pub fn canonical(&self, protocol: ProtocolId) -> Result<String> {
        let len = if protocol == ProtocolId::SoCom { self.len } else { self.message_len() };
        let mut s = format!(
            "protocol={protocol};lambda={};prg={};n={};t={};k={};len={};coin={};p={}",
            self.lambda,
            self.prg.id(),
            self.n,
            self.t,
            self.k.unwrap_or(self.lambda),
            len,
            self.coin_len.unwrap_or(self.lambda),
            self.p
        );
        if protocol.needs_predicate() {
            let digest = Sha256::digest(self.predicate()?.to_text().as_bytes());
            s.push_str(&format!(";circuit={}", hex::encode(&digest[..16])));
        }
        if protocol == ProtocolId::SoCom {
            s.push_str(&format!(";t_msgs={}", self.t_msgs));
        }
        Ok(s)
    }
}

/// The result of one session as seen by one side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SessionOutcome {
    pub protocol: ProtocolId,
    /// `None` for a run with both parties in process.
    pub role: Option<Role>,
    pub accepted: bool,
    /// Hex of the value the run produced for this side, if any: the opened
    /// message, the coin, or `index:hex` pairs for a selective reveal.
    pub value: Option<String>,
    pub detail: String,
    #[serde(skip)]
    pub transcript: Transcript,
}

/// The RNG of one party under a session seed.
pub fn party_rng(seed: u64, party: Party) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(match party {
        Party::P1 => 1,
        Party::P2 => 2,
    });
    rng
}

/// HELLO exchange: P1 speaks first, P2 answers with its own string. A
/// mismatch is answered with ERROR and fails on both sides.
pub fn negotiate(channel: &mut dyn Channel, local: Party, hello: &str) -> Result<()> {
    let mismatch = |theirs: &[u8]| Error::Negotiation(format!("peer has {:?}, local has {hello:?}", String::from_utf8_lossy(theirs)));
    let check = |channel: &mut dyn Channel| -> Result<()> {
        let f = channel.recv()?;
        match f.msg_type {
            msg::HELLO if f.payload == hello.as_bytes() => Ok(()),
            msg::HELLO => {
                let e = mismatch(&f.payload);
                let _ = channel.send(msg::ERROR, e.to_string().as_bytes());
                Err(e)
            }
            msg::ERROR => Err(Error::Negotiation(String::from_utf8_lossy(&f.payload).into_owned())),
            _ => Err(Error::Negotiation(format!("expected HELLO, got type 0x{:02x}", f.msg_type))),
        }
    };
    match local {
        Party::P1 => {
            channel.send(msg::HELLO, hello.as_bytes())?;
            check(channel)
        }
        Party::P2 => {
            check(channel)?;
            channel.send(msg::HELLO, hello.as_bytes())
        }
    }
}

/// One side of a session over `channel`.
pub fn run_session(protocol: ProtocolId, role: Role, channel: &mut dyn Channel, params: &SessionParams, seed: u64) -> Result<SessionOutcome> {
    let local = role.party();
    negotiate(channel, local, &params.canonical(protocol)?)?;
    let mut rng = party_rng(seed, local);
    let mut transcript = Transcript::new();
    let (r1, r2) = match local {
        Party::P1 => (Some(&mut rng), None),
        Party::P2 => (None, Some(&mut rng)),
    };
    let out = drive(protocol, params, r1, r2, &mut Peer::new(channel, local, &mut transcript));
    finish(protocol, Some(role), out, transcript)
}

/// Both sides in this process, with the same per-party randomness as
/// [`run_session`]; the outcome is the receiver's.
pub fn run_in_process(protocol: ProtocolId, params: &SessionParams, seed: u64) -> Result<SessionOutcome> {
    run_in_process_with(protocol, params, seed, Transcript::new())
}

/// [`run_in_process`] recording into `transcript`, which may be disabled.
pub fn run_in_process_with(protocol: ProtocolId, params: &SessionParams, seed: u64, mut transcript: Transcript) -> Result<SessionOutcome> {
    params.canonical(protocol)?;
    let (mut a, mut b) = (party_rng(seed, Party::P1), party_rng(seed, Party::P2));
    let out = drive(protocol, params, Some(&mut a), Some(&mut b), &mut transcript);
    finish(protocol, None, out, transcript)
}

fn finish(protocol: ProtocolId, role: Option<Role>, out: Result<(bool, Option<String>, String)>, transcript: Transcript) -> Result<SessionOutcome> {
    match out {
        Ok((accepted, value, detail)) => Ok(SessionOutcome { protocol, role, accepted, value, detail, transcript }),
        // A protocol violation is a rejection, not a failure of the session.
        Err(Error::Protocol(reason)) => Ok(SessionOutcome { protocol, role, accepted: false, value: None, detail: reason, transcript }),
        Err(e) => Err(e),
    }
}

type Driven = (bool, Option<String>, String);

fn drive<X: Exchange>(protocol: ProtocolId, params: &SessionParams, mut r1: Option<&mut ChaCha20Rng>, mut r2: Option<&mut ChaCha20Rng>, ex: &mut X) -> Result<Driven> {
    let message = |r: &mut ChaCha20Rng| params.message.clone().unwrap_or_else(|| Bits::random(params.message_len(), r));
    match protocol {
        ProtocolId::WCommit | ProtocolId::WDecommit => {
            let wp = params.weak()?;
            let sent = r1.as_deref_mut().map(message);
            let mut c = r1.as_deref_mut().zip(sent.as_ref()).map(|(r, m)| WCommitter::new(m, &wp, r)).transpose()?;
            let (com, ok) = w_commit_run(c.as_mut(), r2.as_deref_mut(), &wp, ex)?;
            if protocol == ProtocolId::WCommit || !ok {
                return Ok((ok, None, verdict_text(ok, "commit")));
            }
            let opened = w_decommit_run(c.as_mut(), com.as_ref(), ex)?;
            Ok(opened_outcome(ex, opened, sent))
        }
        ProtocolId::Commit | ProtocolId::Decommit => {
            let sp = params.strong()?;
            let sent = r1.as_deref_mut().map(message);
            let mut cs: Vec<ScCommitter> = r1.as_deref_mut().zip(sent.as_ref()).map(|(r, m)| ScCommitter::new(m, &sp, r)).transpose()?.into_iter().collect();
            let mut rs: Vec<ScReceiver> = r2.as_deref_mut().map(|r| ScReceiver::new(&sp, r)).into_iter().collect();
            let out = sc_drive(&mut cs, &mut rs, ex, Framing::Single);
            if protocol == ProtocolId::Commit || !out.accept {
                let detail = out.reason.unwrap_or_else(|| verdict_text(out.accept, "commit"));
                return Ok((out.accept, None, detail));
            }
            let session = rs.pop().map(ScReceiver::into_session);
            let opened = sc_decommit_run(cs.first_mut(), session.as_ref(), ex)?;
            Ok(opened_outcome(ex, opened, sent))
        }
        ProtocolId::Prove | ProtocolId::Zkaok => {
            let ep = params.ecnp()?;
            let circuit = params.predicate()?;
            let witness = r1.as_deref_mut().map(message);
            let mut prover = r1.as_deref_mut().zip(witness.as_ref()).map(|(r, m)| EcnpProver::new(m, &ep, r)).transpose()?;
            let mut verifier = r2.as_deref_mut().map(|r| EcnpVerifier::new(&ep, r));
            let verdict = if protocol == ProtocolId::Zkaok {
                zkaok_run(&circuit, prover.as_mut(), verifier.as_mut(), ex)?
            } else {
                if !ecnp_commit_run(prover.as_mut(), verifier.as_mut(), ex)? {
                    return Ok((false, None, "commit stage rejected".into()));
                }
                ecnp_prove_run(prover.as_mut(), verifier.as_mut(), &circuit, ex)
            };
            let subset = verdict.subset.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",");
            let detail = match verdict.failure {
                Failure::None => format!("audited {{{subset}}}"),
                f => format!("{f:?}; audited {{{subset}}}"),
            };
            Ok((verdict.prove_accept, None, detail))
        }
        ProtocolId::CoinFlip => {
            let ep = params.ecnp()?;
            let mut c = r1.as_deref_mut().map(|r| CoinCommitter::new(&ep, r)).transpose()?;
            let mut v = r2.as_deref_mut().map(|r| CoinResponder::new(&ep, r));
            let res = coin_flip_run(c.as_mut(), v.as_mut(), ex)?;
            Ok((true, Some(res.r.to_hex()), format!("r1={} r2={}", res.r1.to_hex(), res.r2.to_hex())))
        }
        ProtocolId::SoCom => {
            let sp = params.socom()?;
            let committer = r1.as_deref_mut().map(|r| SoComCommitter::new(sp, r.next_u64()));
            let receiver = r2.map(|r| SoComReceiver::new(sp, r.next_u64()));
            let messages: Vec<Bits> = match (r1, &params.message) {
                (None, _) => Vec::new(),
                (Some(_), Some(m)) if m.len() == sp.t_msgs * sp.msg_bits => (0..sp.t_msgs).map(|i| m.slice(i * sp.msg_bits, sp.msg_bits)).collect(),
                (Some(_), Some(m)) => return param(format!("{} message bits do not split into {} messages of {}", m.len(), sp.t_msgs, sp.msg_bits)),
                (Some(r), None) => (0..sp.t_msgs).map(|_| Bits::random(sp.msg_bits, r)).collect(),
            };
            let sid = 1;
            let c_side = committer.as_ref().map(|c| (c, messages.as_slice()));
            match socom_commit(c_side, receiver.as_ref(), sid, ex)? {
                CommitOutcome::Receipt => {}
                other => return Ok((false, None, format!("commit: {other:?}"))),
            }
            let opened = socom_reveal(committer.as_ref(), receiver.as_ref().map(|r| (r, &params.reveal)), sid, ex)?;
            Ok(match (opened, ex.is_local(Party::P2)) {
                (Some(map), _) => (true, Some(reveal_text(&map)), format!("opened {} of {}", map.len(), sp.t_msgs)),
                (None, true) => (false, None, "reveal rejected".into()),
                (None, false) => (true, None, "reveal answered".into()),
            })
        }
    }
}

fn verdict_text(ok: bool, stage: &str) -> String {
    format!("{stage} {}", if ok { "accepted" } else { "rejected" })
}

/// The receiver reports what it opened; the sender what it committed to.
fn opened_outcome<X: Exchange>(ex: &X, opened: Option<Bits>, sent: Option<Bits>) -> Driven {
    if ex.is_local(Party::P2) {
        let ok = opened.is_some();
        (ok, opened.map(|m| m.to_hex()), verdict_text(ok, "decommit"))
    } else {
        (true, sent.map(|m| m.to_hex()), "decommitment sent".into())
    }
}

fn reveal_text(map: &BTreeMap<usize, Bits>) -> String {
    map.iter().map(|(i, m)| format!("{i}:{}", m.to_hex())).collect::<Vec<_>>().join(",")
}

/// Accepts `:port` as shorthand for all interfaces.
pub fn normalize_addr(addr: &str) -> String {
    match addr.strip_prefix(':') {
        Some(port) => format!("0.0.0.0:{port}"),
        None => addr.to_string(),
    }
}

/// Connects, retrying for up to `wait` while the listener comes up.
pub fn connect_retry(addr: &str, wait: Duration) -> Result<TcpChannel> {
    let addr = normalize_addr(addr).replace("0.0.0.0", "127.0.0.1");
    let start = std::time::Instant::now();
    loop {
        match TcpStream::connect(&addr) {
            Ok(s) => return TcpChannel::new(s),
            Err(e) if start.elapsed() >= wait => return Err(Error::Session(format!("connect {addr}: {e}"))),
            Err(_) => thread::sleep(Duration::from_millis(50)),
        }
    }
}

/// Accepts `sessions` connections and runs `handler` on each in its own
/// thread. Sessions share nothing; results come back in accept order.
pub fn serve<T: Send + 'static>(listener: TcpListener, sessions: usize, handler: impl Fn(TcpChannel) -> T + Send + Sync + Clone + 'static) -> Result<Vec<T>> {
    let mut handles = Vec::with_capacity(sessions);
    for _ in 0..sessions {
        let (stream, _) = listener.accept().map_err(|e| Error::Session(format!("accept: {e}")))?;
        let channel = TcpChannel::new(stream)?;
        let h = handler.clone();
        handles.push(thread::spawn(move || h(channel)));
    }
    handles.into_iter().map(|h| h.join().map_err(|_| Error::Session("session thread panicked".into()))).collect()
}
