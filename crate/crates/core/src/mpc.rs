//! BGW-style MPC over the VSS diagonal sharing, executed in the head.
//!
//! Every party holds a degree-t Shamir share of each message chunk (its VSS
//! diagonal value). Linear gates are local. A layer of multiplications takes
//! two rounds:
//!
//! 1. each party reshares its local product with a fresh degree-t polynomial
//!    whose higher coefficients come from its random tape;
//! 2. each party broadcasts its shares of the syndromes of the product vector
//!    under the degree-2t Reed–Solomon parity checks. Honest products lie on
//!    a degree-2t polynomial, so every syndrome sharing must be a degree-t
//!    sharing of zero; otherwise the receiving party aborts and outputs 0.
//!
//! The new share is the Lagrange recombination of the received reshares. A
//! final round exchanges output shares, which are RS-decoded.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::error::{param, protocol, Error, Result};
use crate::field::Field;
use crate::vss::{vss_view_consistent, VssView};
use crate::wire::{Decode, Encode, Reader, Writer};

/// Per-circuit schedule shared by all parties of one execution.
#[derive(Clone, Debug)]
pub struct MpcPlan {
    pub n: usize,
    pub t: usize,
    pub field: Field,
    pub layers: Vec<Vec<usize>>,
    /// Lagrange weights at 0 over points 1..=n.
    recombine: Vec<u32>,
    /// Parity-check rows of the degree-2t RS code on points 1..=n.
    checks: Vec<Vec<u32>>,
}

impl MpcPlan {
    pub fn new(circuit: &Circuit, n: usize, t: usize, p: u32) -> Result<Self> {
        let field = Field::new(p)?;
        if n == 0 || 3 * t > n || p as usize <= n {
            return param(format!("unsupported MPC setup n = {n}, t = {t}, p = {p}"));
        }
        circuit.check_field(&field)?;
        let xs: Vec<u32> = (1..=n as u32).collect();
        let recombine = field.lagrange_at_zero(&xs);
        let weights: Vec<u32> = xs
            .iter()
            .map(|&xj| {
                let d = xs.iter().filter(|&&xi| xi != xj).fold(1, |acc, &xi| field.mul(acc, field.sub(xj, xi)));
                field.inv(d)
            })
            .collect();
        let rows = n.saturating_sub(2 * t + 1);
        let checks = (0..rows)
            .map(|m| xs.iter().zip(&weights).map(|(&x, &u)| field.mul(u, field.pow(x, m as u64))).collect())
            .collect();
        Ok(MpcPlan { n, t, field, layers: circuit.mul_layers(), recombine, checks })
    }

    pub fn rounds(&self) -> usize {
        2 * self.layers.len() + 1
    }

    pub fn tape_len(&self) -> usize {
        self.t * self.layers.iter().map(Vec::len).sum::<usize>()
    }

    pub fn sample_tape<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<u32> {
        (0..self.tape_len()).map(|_| rng.gen_range(0..self.field.p())).collect()
    }

    /// Encoded size of an honest party's view given its VSS view size.
    pub fn view_len(&self, vss_view_len: usize) -> usize {
        let msgs: usize = (0..self.rounds()).map(|r| (self.n - 1) * (2 + 2 * self.message_len(r))).sum();
        vss_view_len + 2 + 2 * self.tape_len() + 2 + msgs + 2
    }

    /// Message length, in field elements, that every party sends per round.
    pub fn message_len(&self, round: usize) -> usize {
        if round + 1 == self.rounds() {
            1
        } else if round.is_multiple_of(2) {
            self.layers[round / 2].len()
        } else {
            self.layers[round / 2].len() * self.checks.len()
        }
    }
}

/// Deterministic party logic. Used both to run the protocol and to replay a
/// recorded view.
pub struct PartyMachine<'a> {
    plan: &'a MpcPlan,
    circuit: &'a Circuit,
    party: usize,
    tape: &'a [u32],
    tape_pos: usize,
    wires: Vec<Option<u32>>,
    round: usize,
    /// Current layer's reshares, indexed [mul][sender - 1].
    reshares: Vec<Vec<u32>>,
    /// Own outgoing broadcast of the current round, kept for self-delivery.
    own: Vec<u32>,
    aborted: bool,
    output: Option<u32>,
}

impl<'a> PartyMachine<'a> {
    pub fn new(plan: &'a MpcPlan, circuit: &'a Circuit, input: &VssView, tape: &'a [u32]) -> Result<Self> {
        if input.n != plan.n || input.t != plan.t || input.p != plan.field.p() {
            return param("input view does not match the MPC setup");
        }
        if input.chunks() < circuit.inputs() {
            return param(format!("circuit reads {} chunks, view has {}", circuit.inputs(), input.chunks()));
        }
        if tape.len() != plan.tape_len() || tape.iter().any(|&v| v >= plan.field.p()) {
            return protocol("random tape has the wrong shape");
        }
        let diag = input.diagonal();
        let wires = circuit.gates().iter().map(|g| if let Gate::Input(c) = g { Some(diag[*c]) } else { None }).collect();
        Ok(PartyMachine {
            plan,
            circuit,
            party: input.party,
            tape,
            tape_pos: 0,
            wires,
            round: 0,
            reshares: Vec::new(),
            own: Vec::new(),
            aborted: false,
            output: None,
        })
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn output(&self) -> Option<u32> {
        self.output
    }

    pub fn aborted(&self) -> bool {
        self.aborted
    }

    fn advance_local(&mut self) {
        let f = &self.plan.field;
        for (id, gate) in self.circuit.gates().iter().enumerate() {
            if self.wires[id].is_some() {
                continue;
            }
            let w = &self.wires;
            self.wires[id] = match *gate {
                Gate::Const(v) => Some(v),
                Gate::Add(a, b) => w[a].zip(w[b]).map(|(x, y)| f.add(x, y)),
                Gate::Sub(a, b) => w[a].zip(w[b]).map(|(x, y)| f.sub(x, y)),
                Gate::Output(a) => w[a],
                Gate::Input(_) | Gate::Mul(..) => None,
            };
        }
    }

    /// This round's outgoing payload. Resharing rounds return the sharing
    /// polynomials, which [`PartyMachine::message_for`] evaluates per
    /// recipient; other rounds are broadcasts.
    pub fn send(&mut self) -> Vec<u32> {
        let plan = self.plan;
        let f = &plan.field;
        let out = if self.round + 1 == plan.rounds() {
            self.advance_local();
            vec![self.wires[self.circuit.output_wire()].expect("output wire computed")]
        } else if self.round.is_multiple_of(2) {
            self.advance_local();
            let layer = &plan.layers[self.round / 2];
            self.reshares = vec![vec![0; plan.n]; layer.len()];
            let mut polys = Vec::with_capacity(layer.len());
            for &g in layer {
                let Gate::Mul(a, b) = self.circuit.gates()[g] else { unreachable!("layers hold mul gates") };
                let d = f.mul(self.wires[a].expect("operand ready"), self.wires[b].expect("operand ready"));
                let mut poly = vec![d];
                poly.extend_from_slice(&self.tape[self.tape_pos..self.tape_pos + plan.t]);
                self.tape_pos += plan.t;
                polys.push(poly);
            }
            polys.concat()
        } else {
            let mut s = Vec::with_capacity(self.reshares.len() * plan.checks.len());
            for col in &self.reshares {
                for row in &plan.checks {
                    s.push(row.iter().zip(col).fold(0, |acc, (&y, &h)| f.add(acc, f.mul(y, h))));
                }
            }
            s
        };
        self.own = out.clone();
        out
    }

    /// The message for party `to`, derived from this round's payload.
    pub fn message_for(&self, sent: &[u32], to: usize) -> Vec<u32> {
        let plan = self.plan;
        if self.round + 1 != plan.rounds() && self.round.is_multiple_of(2) {
            sent.chunks(plan.t + 1).map(|poly| plan.field.eval(poly, to as u32)).collect()
        } else {
            sent.to_vec()
        }
    }

    /// Absorbs the messages of this round, one per other party in ascending
    /// order, and moves to the next round.
    pub fn receive(&mut self, incoming: &[Vec<u32>]) -> Result<()> {
        let plan = self.plan;
        let f = &plan.field;
        let (n, i) = (plan.n, self.party);
        let expect = plan.message_len(self.round);
        if incoming.len() != n - 1 || incoming.iter().any(|m| m.len() != expect || m.iter().any(|&v| v >= f.p())) {
            return protocol(format!("malformed round {} messages for party {i}", self.round));
        }
        let own = self.message_for(&self.own.clone(), i);
        let from = |k: usize| -> &[u32] {
            if k == i {
                &own
            } else {
                &incoming[if k < i { k - 1 } else { k - 2 }]
            }
        };
        if self.round + 1 == plan.rounds() {
            let pts: Vec<(u32, u32)> = (1..=n).map(|k| (k as u32, from(k)[0])).collect();
            let value = f.rs_decode(&pts, plan.t).map(|poly| poly[0]).unwrap_or(0);
            self.output = Some(if self.aborted { 0 } else { value });
        } else if self.round.is_multiple_of(2) {
            for k in 1..=n {
                for (m, &v) in from(k).iter().enumerate() {
                    self.reshares[m][k - 1] = v;
                }
            }
        } else {
            let layer = &plan.layers[self.round / 2];
            let rows = plan.checks.len();
            for m in 0..layer.len() {
                for r in 0..rows {
                    let mut pts = vec![(0u32, 0u32)];
                    pts.extend((1..=n).map(|k| (k as u32, from(k)[m * rows + r])));
                    if !on_degree(f, &pts, plan.t) {
                        self.aborted = true;
                    }
                }
            }
            for (m, &g) in layer.iter().enumerate() {
                let share = plan.recombine.iter().zip(&self.reshares[m]).fold(0, |acc, (&l, &h)| f.add(acc, f.mul(l, h)));
                self.wires[g] = Some(share);
            }
        }
        self.round += 1;
        Ok(())
    }
}

/// Whether the points lie on one polynomial of degree ≤ `degree`.
fn on_degree(f: &Field, pts: &[(u32, u32)], degree: usize) -> bool {
    if pts.len() <= degree + 1 {
        return true;
    }
    let poly = f.interpolate(&pts[..degree + 1]);
    pts[degree + 1..].iter().all(|&(x, y)| f.eval(&poly, x) == y)
}

/// One party's record of the MPC: its VSS view verbatim, its random tape,
/// every message it received, and its output.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MpcView {
    pub vss: VssView,
    pub tape: Vec<u32>,
    /// `[round][sender]`, senders j ≠ i ascending.
    pub rounds: Vec<Vec<Vec<u32>>>,
    pub output: u32,
}

impl MpcView {
    pub fn party(&self) -> usize {
        self.vss.party
    }
}

impl Encode for MpcView {
    fn encode_into(&self, w: &mut Writer) {
        self.vss.encode_into(w);
        w.u16(self.tape.len() as u16);
        for &v in &self.tape {
            w.u16(v as u16);
        }
        w.u16(self.rounds.len() as u16);
        for round in &self.rounds {
            for msg in round {
                w.u16(msg.len() as u16);
                for &v in msg {
                    w.u16(v as u16);
                }
            }
        }
        w.u16(self.output as u16);
    }
}

impl Decode for MpcView {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        let vss = VssView::decode_from(r)?;
        let tape_len = r.u16()? as usize;
        let tape = (0..tape_len).map(|_| r.u16().map(u32::from)).collect::<Result<_>>()?;
        let count = r.u16()? as usize;
        let mut rounds = Vec::with_capacity(count);
        for _ in 0..count {
            let mut round = Vec::with_capacity(vss.n - 1);
            for _ in 1..vss.n {
                let len = r.u16()? as usize;
                round.push((0..len).map(|_| r.u16().map(u32::from)).collect::<Result<Vec<u32>>>()?);
            }
            rounds.push(round);
        }
        let output = r.u16()? as u32;
        Ok(MpcView { vss, tape, rounds, output })
    }
}

/// Hook for deviating parties: `(round, from, to, message)`, parties 1-based.
pub type Interceptor<'a> = dyn FnMut(usize, usize, usize, &mut [u32]) + 'a;

/// Runs the protocol with explicit tapes. The interceptor may rewrite any
/// message in flight; values are reduced mod p afterwards.
pub fn mpc_run(circuit: &Circuit, inputs: &[VssView], tapes: &[Vec<u32>], intercept: &mut Interceptor<'_>) -> Result<(Vec<MpcView>, Vec<u32>)> {
    let first = inputs.first().ok_or_else(|| Error::Param("no input views".into()))?;
    let (n, t, p) = (first.n, first.t, first.p);
    if inputs.len() != n || tapes.len() != n {
        return param(format!("need {n} input views and tapes"));
    }
    if inputs.iter().enumerate().any(|(k, v)| v.party != k + 1 || !v.same_setup(first)) {
        return param("input views must be parties 1..=n of one setup");
    }
    let plan = MpcPlan::new(circuit, n, t, p)?;
    let mut machines = inputs
        .iter()
        .zip(tapes)
        .map(|(v, tape)| PartyMachine::new(&plan, circuit, v, tape))
        .collect::<Result<Vec<_>>>()?;
    let mut rounds: Vec<Vec<Vec<Vec<u32>>>> = vec![Vec::new(); n];
    for round in 0..plan.rounds() {
        let sent: Vec<Vec<u32>> = machines.iter_mut().map(PartyMachine::send).collect();
        let mut inbox: Vec<Vec<Vec<u32>>> = vec![Vec::with_capacity(n - 1); n];
        for to in 1..=n {
            for from in (1..=n).filter(|&k| k != to) {
                let mut msg = machines[from - 1].message_for(&sent[from - 1], to);
                intercept(round, from, to, &mut msg);
                msg.iter_mut().for_each(|v| *v %= p);
                inbox[to - 1].push(msg);
            }
        }
        for (k, msgs) in inbox.into_iter().enumerate() {
            machines[k].receive(&msgs)?;
            rounds[k].push(msgs);
        }
    }
    let outputs: Vec<u32> = machines.iter().map(|m| m.output().expect("final round sets the output")).collect();
    let views = inputs
        .iter()
        .zip(tapes)
        .zip(rounds)
        .zip(&outputs)
        .map(|(((v, tape), rounds), &output)| MpcView { vss: v.clone(), tape: tape.clone(), rounds, output })
        .collect();
    Ok((views, outputs))
}

/// Honest execution with fresh tapes.
pub fn mpc_execute<R: RngCore + ?Sized>(circuit: &Circuit, inputs: &[VssView], rng: &mut R) -> Result<(Vec<MpcView>, Vec<u32>)> {
    let first = inputs.first().ok_or_else(|| Error::Param("no input views".into()))?;
    let plan = MpcPlan::new(circuit, first.n, first.t, first.p)?;
    let tapes: Vec<Vec<u32>> = (0..inputs.len()).map(|_| plan.sample_tape(rng)).collect();
    mpc_run(circuit, inputs, &tapes, &mut |_, _, _, _| {})
}

/// Recomputes what the view's party sent to each other party, per round,
/// `[round][recipient]`. `None` if the view is not a possible honest record
/// (wrong shapes, or a recorded output the replay does not reproduce).
pub fn replay(view: &MpcView, circuit: &Circuit) -> Option<Vec<Vec<Vec<u32>>>> {
    let v = &view.vss;
    if !v.well_formed() {
        return None;
    }
    let plan = MpcPlan::new(circuit, v.n, v.t, v.p).ok()?;
    if view.rounds.len() != plan.rounds() {
        return None;
    }
    let mut m = PartyMachine::new(&plan, circuit, v, &view.tape).ok()?;
    let mut out = Vec::with_capacity(plan.rounds());
    for incoming in &view.rounds {
        let sent = m.send();
        out.push(v.others().map(|j| m.message_for(&sent, j)).collect());
        m.receive(incoming).ok()?;
    }
    (m.output() == Some(view.output)).then_some(out)
}

/// View consistency: each view's replayed outgoing messages match what the
/// other recorded as received, and the VSS prefixes are consistent.
pub fn mpc_view_consistent(a: &MpcView, b: &MpcView, circuit: &Circuit) -> Result<bool> {
    if !vss_view_consistent(&a.vss, &b.vss)? {
        return Ok(false);
    }
    let (Some(out_a), Some(out_b)) = (replay(a, circuit), replay(b, circuit)) else { return Ok(false) };
    let (i, j) = (a.party(), b.party());
    let (ai, bj) = (a.vss.slot_of(j), b.vss.slot_of(i));
    Ok((0..out_a.len()).all(|r| out_a[r][ai] == b.rounds[r][bj] && out_b[r][bj] == a.rounds[r][ai]))
}

/// [`mpc_view_consistent`] on encodings; undecodable input is inconsistent.
pub fn mpc_bytes_consistent(a: &[u8], b: &[u8], circuit: &Circuit) -> bool {
    match (MpcView::decode(a), MpcView::decode(b)) {
        (Ok(va), Ok(vb)) if va.party() != vb.party() => mpc_view_consistent(&va, &vb, circuit).unwrap_or(false),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::circuit::compile_target_predicate;
    use crate::vss::{vss_share, views_from_dealer, DealerView, VssParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashMap;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn eq_circuit(target: &Bits, params: &VssParams) -> Circuit {
        compile_target_predicate(target, target.len(), params.chunk_bits(), &params.field).unwrap()
    }

    #[test]
    fn constant_circuit_outputs_one() {
        let params = VssParams::new(4, 1, 257).unwrap();
        let (views, _) = vss_share(&Bits::random(8, &mut rng(1)), &params, &mut rng(2)).unwrap();
        let (_, out) = mpc_execute(&Circuit::constant_one(), &views, &mut rng(3)).unwrap();
        assert_eq!(out, vec![1; 4]);
    }

    #[test]
    fn equality_matches_direct_evaluation() {
        let params = VssParams::new(7, 2, 257).unwrap();
        let mut g = rng(4);
        let target = Bits::parse("1011001011110000").unwrap();
        let circuit = eq_circuit(&target, &params);
        for trial in 0..20 {
            let m = if trial % 2 == 0 { target.clone() } else { Bits::random(16, &mut g) };
            let (views, _) = vss_share(&m, &params, &mut g).unwrap();
            let (mviews, out) = mpc_execute(&circuit, &views, &mut g).unwrap();
            let expect = (m == target) as u32;
            assert_eq!(out, vec![expect; 7]);
            for a in 0..7 {
                for b in a + 1..7 {
                    assert!(mpc_view_consistent(&mviews[a], &mviews[b], &circuit).unwrap());
                }
            }
        }
    }

    #[test]
    fn view_encoding_extends_vss_prefix() {
        let params = VssParams::new(4, 1, 257).unwrap();
        let target = Bits::parse("10100101").unwrap();
        let circuit = eq_circuit(&target, &params);
        let (views, _) = vss_share(&target, &params, &mut rng(5)).unwrap();
        let (mviews, _) = mpc_execute(&circuit, &views, &mut rng(6)).unwrap();
        let bytes = mviews[2].encode();
        assert!(bytes.starts_with(&views[2].encode()));
        assert_eq!(MpcView::decode(&bytes).unwrap(), mviews[2]);
        // Length depends only on the parameters and the circuit.
        let (other, _) = mpc_execute(&circuit, &vss_share(&Bits::zeros(8), &params, &mut rng(7)).unwrap().0, &mut rng(8)).unwrap();
        assert_eq!(other[2].encode().len(), bytes.len());
        let plan = MpcPlan::new(&circuit, 4, 1, 257).unwrap();
        assert_eq!(plan.view_len(params.view_len(1)), bytes.len());
        assert!(mpc_bytes_consistent(&bytes, &mviews[0].encode(), &circuit));
        assert!(!mpc_bytes_consistent(&bytes, &bytes, &circuit));
        assert!(!mpc_bytes_consistent(&bytes[..bytes.len() - 1], &mviews[0].encode(), &circuit));
    }

    #[test]
    fn tampered_message_breaks_consistency_with_receiver_only() {
        let params = VssParams::new(4, 1, 257).unwrap();
        let target = Bits::parse("11110000").unwrap();
        let circuit = eq_circuit(&target, &params);
        let (views, _) = vss_share(&target, &params, &mut rng(9)).unwrap();
        let (mut mviews, _) = mpc_execute(&circuit, &views, &mut rng(10)).unwrap();
        // Party 1's record of what party 3 sent in round 1.
        let slot = mviews[0].vss.slot_of(3);
        mviews[0].rounds[1][slot][0] ^= 1;
        // Replay of party 1 may now change its later messages or output; in
        // any case party 1 is inconsistent with party 3, which sent the
        // original message.
        assert!(!mpc_view_consistent(&mviews[0], &mviews[2], &circuit).unwrap());
        assert!(mpc_view_consistent(&mviews[1], &mviews[2], &circuit).unwrap());
        assert!(mpc_view_consistent(&mviews[1], &mviews[3], &circuit).unwrap());
    }

    #[test]
    fn swapped_tape_is_detected() {
        let params = VssParams::new(4, 1, 257).unwrap();
        let target = Bits::parse("00111100").unwrap();
        let circuit = eq_circuit(&target, &params);
        let (views, _) = vss_share(&target, &params, &mut rng(11)).unwrap();
        let (mut mviews, _) = mpc_execute(&circuit, &views, &mut rng(12)).unwrap();
        mviews[1].tape = mviews[2].tape.clone();
        assert!(!mpc_view_consistent(&mviews[1], &mviews[0], &circuit).unwrap());
        assert!(mpc_view_consistent(&mviews[2], &mviews[0], &circuit).unwrap());
    }

    #[test]
    fn same_party_is_an_error() {
        let params = VssParams::new(4, 1, 257).unwrap();
        let (views, _) = vss_share(&Bits::zeros(8), &params, &mut rng(13)).unwrap();
        let (mviews, _) = mpc_execute(&Circuit::constant_one(), &views, &mut rng(14)).unwrap();
        assert!(mpc_view_consistent(&mviews[0], &mviews[0], &Circuit::constant_one()).is_err());
    }

    /// All symmetric 2x2 coefficient matrices with the given constant term.
    fn dealers(params: VssParams, secret: u32) -> Vec<DealerView> {
        let p = params.p();
        let mut out = Vec::new();
        for a01 in 0..p {
            for a11 in 0..p {
                out.push(DealerView { params, message_bits: 2, bivariate: vec![vec![vec![secret, a01], vec![a01, a11]]] });
            }
        }
        out
    }

    #[test]
    fn single_view_law_depends_only_on_output() {
        // x -> x^2 at p = 5: inputs 2 and 3 share the output 4. Enumerate all
        // dealer randomness and all tapes (one coefficient per party).
        let params = VssParams::new(4, 1, 5).unwrap();
        let circuit = Circuit::parse("0 input 0\n1 mul 0 0\n2 output 1\n").unwrap();
        let law = |secret: u32, party: usize| {
            let mut h: HashMap<Vec<u8>, u32> = HashMap::new();
            for dealer in dealers(params, secret) {
                let views = views_from_dealer(&dealer).unwrap();
                for code in 0..625u32 {
                    let tapes: Vec<Vec<u32>> = (0..4).map(|k| vec![code / 5u32.pow(k) % 5]).collect();
                    let (mviews, out) = mpc_run(&circuit, &views, &tapes, &mut |_, _, _, _| {}).unwrap();
                    assert_eq!(out[0], secret * secret % 5);
                    *h.entry(mviews[party].encode()).or_default() += 1;
                }
            }
            h
        };
        for party in 0..4 {
            assert_eq!(law(2, party), law(3, party));
        }
        assert_ne!(law(1, 0), law(2, 0));
    }

    #[test]
    fn single_corrupted_party_cannot_force_acceptance() {
        // p = 5, n = 4, t = 1, two-chunk message, equality with a fixed target.
        // For every message that misses the target, every corrupted party,
        // every scripted deviation and offset: no honest party outputs 1.
        let params = VssParams::new(4, 1, 5).unwrap();
        let target = Bits::parse("1001").unwrap();
        let circuit = eq_circuit(&target, &params);
        let plan = MpcPlan::new(&circuit, 4, 1, 5).unwrap();
        let last = plan.rounds() - 1;
        let mut g = rng(15);
        let mut honest_runs = 0;
        for m in 0..16u64 {
            let msg = Bits::from_u64(m, 4);
            if msg == target {
                continue;
            }
            for _ in 0..3 {
                let (views, _) = vss_share(&msg, &params, &mut g).unwrap();
                let tapes: Vec<Vec<u32>> = (0..4).map(|_| plan.sample_tape(&mut g)).collect();
                for bad in 1..=4usize {
                    for strategy in 0..5 {
                        for delta in 1..5u32 {
                            let mut hook = |round: usize, from: usize, to: usize, msg: &mut [u32]| {
                                if from != bad {
                                    return;
                                }
                                let hit = match strategy {
                                    // shift every reshare constant
                                    0 => round.is_multiple_of(2) && round != last,
                                    // corrupt syndromes
                                    1 => round % 2 == 1,
                                    // shift reshares and syndromes together
                                    2 => round != last,
                                    // lie only to one recipient
                                    3 => to == bad % 4 + 1 && round != last,
                                    // push the output share
                                    _ => round == last,
                                };
                                if hit {
                                    for v in msg.iter_mut() {
                                        *v += delta * (round as u32 + 1);
                                    }
                                }
                            };
                            let (_, out) = mpc_run(&circuit, &views, &tapes, &mut hook).unwrap();
                            for (k, &o) in out.iter().enumerate() {
                                if k + 1 != bad {
                                    assert_ne!(o, 1, "m={msg} bad={bad} strategy={strategy} delta={delta}");
                                }
                            }
                            honest_runs += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(honest_runs, 15 * 3 * 4 * 5 * 4);
    }

    #[test]
    fn corrupted_output_share_is_corrected() {
        let params = VssParams::new(4, 1, 257).unwrap();
        let target = Bits::parse("01010101").unwrap();
        let circuit = eq_circuit(&target, &params);
        let plan = MpcPlan::new(&circuit, 4, 1, 257).unwrap();
        let last = plan.rounds() - 1;
        let (views, _) = vss_share(&target, &params, &mut rng(16)).unwrap();
        let tapes: Vec<Vec<u32>> = (0..4).map(|_| plan.sample_tape(&mut rng(17))).collect();
        let (_, out) = mpc_run(&circuit, &views, &tapes, &mut |round, from, _, msg: &mut [u32]| {
            if round == last && from == 2 {
                msg[0] += 5;
            }
        })
        .unwrap();
        assert_eq!(out, vec![1; 4]);
    }
}
