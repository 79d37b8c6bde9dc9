//! Arithmetic circuits over GF(p) for predicates on shared messages.
//!
//! Text format, one gate per line, ids consecutive from 0:
//!
//! ```text
//! # x == 3 over GF(5)
//! 0 input 0
//! 1 const 3
//! 2 sub 0 1
//! 3 mul 2 2
//! 4 mul 3 3
//! 5 const 1
//! 6 sub 5 4
//! 7 output 6
//! ```
//!
//! `input <chunk>` reads a message chunk, `const <v>` a field constant,
//! `add|sub|mul <a> <b>` combine earlier wires, and `output <a>` marks the
//! single result wire.

use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{param, Result};
use crate::field::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    Input(usize),
    Const(u32),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Output(usize),
}

impl Gate {
    fn operands(&self) -> Vec<usize> {
        match *self {
            Gate::Input(_) | Gate::Const(_) => Vec::new(),
            Gate::Add(a, b) | Gate::Sub(a, b) | Gate::Mul(a, b) => vec![a, b],
            Gate::Output(a) => vec![a],
        }
    }
}

/// A validated, topologically ordered circuit with exactly one output.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Circuit {
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(gates: Vec<Gate>) -> Result<Self> {
        let mut outputs = 0;
        for (id, gate) in gates.iter().enumerate() {
            for a in gate.operands() {
                if a >= id {
                    return param(format!("gate {id} uses wire {a} before it is defined"));
                }
                if matches!(gates[a], Gate::Output(_)) {
                    return param(format!("gate {id} reads the output marker {a}"));
                }
            }
            if matches!(gate, Gate::Output(_)) {
                outputs += 1;
            }
        }
        if outputs != 1 {
            return param(format!("circuit has {outputs} outputs, expected exactly one"));
        }
        Ok(Circuit { gates })
    }

    /// Single-output circuit returning the constant 1.
    pub fn constant_one() -> Self {
        Circuit { gates: vec![Gate::Const(1), Gate::Output(0)] }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of message chunks the circuit reads (1 + highest input index).
    pub fn inputs(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Input(c) => Some(c + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// The wire feeding the output marker.
    pub fn output_wire(&self) -> usize {
        self.gates
            .iter()
            .find_map(|g| match g {
                Gate::Output(a) => Some(*a),
                _ => None,
            })
            .expect("validated circuit has an output")
    }

    pub fn mul_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Mul(..))).count()
    }

    /// Multiplication gates grouped by multiplicative depth, shallowest first.
    pub fn mul_layers(&self) -> Vec<Vec<usize>> {
        let mut depth = vec![0usize; self.gates.len()];
        let mut layers: Vec<Vec<usize>> = Vec::new();
        for (id, gate) in self.gates.iter().enumerate() {
            let below = gate.operands().iter().map(|&a| depth[a]).max().unwrap_or(0);
            depth[id] = below;
            if matches!(gate, Gate::Mul(..)) {
                depth[id] = below + 1;
                if layers.len() < below + 1 {
                    layers.resize(below + 1, Vec::new());
                }
                layers[below].push(id);
            }
        }
        layers
    }

    pub fn check_field(&self, field: &Field) -> Result<()> {
        for gate in &self.gates {
            if let Gate::Const(v) = gate {
                if *v >= field.p() {
                    return param(format!("constant {v} is not below p = {}", field.p()));
                }
            }
        }
        Ok(())
    }

    /// Plain evaluation on chunk values.
    pub fn eval(&self, field: &Field, inputs: &[u32]) -> Result<u32> {
        self.check_field(field)?;
        if inputs.len() < self.inputs() {
            return param(format!("circuit reads {} chunks, got {}", self.inputs(), inputs.len()));
        }
        let mut w = vec![0u32; self.gates.len()];
        for (id, gate) in self.gates.iter().enumerate() {
            w[id] = match *gate {
                Gate::Input(c) => field.reduce(inputs[c] as u64),
                Gate::Const(v) => v,
                Gate::Add(a, b) => field.add(w[a], w[b]),
                Gate::Sub(a, b) => field.sub(w[a], w[b]),
                Gate::Mul(a, b) => field.mul(w[a], w[b]),
                Gate::Output(a) => w[a],
            };
        }
        Ok(w[self.output_wire()])
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut gates = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| param(format!("line {}: {what}: {raw:?}", lineno + 1));
            let tok: Vec<&str> = line.split_whitespace().collect();
            let Ok(id) = tok[0].parse::<usize>() else { return bad("gate id is not a number") };
            if id != gates.len() {
                return bad("gate ids must be consecutive from 0");
            }
            let args: Option<Vec<usize>> = tok.get(2..).unwrap_or(&[]).iter().map(|a| a.parse().ok()).collect();
            let Some(args) = args else { return bad("argument is not a number") };
            let gate = match (tok.get(1).copied(), args.as_slice()) {
                (Some("input"), &[c]) => Gate::Input(c),
                (Some("const"), &[v]) => match u32::try_from(v) {
                    Ok(v) => Gate::Const(v),
                    Err(_) => return bad("constant out of range"),
                },
                (Some("add"), &[a, b]) => Gate::Add(a, b),
                (Some("sub"), &[a, b]) => Gate::Sub(a, b),
                (Some("mul"), &[a, b]) => Gate::Mul(a, b),
                (Some("output"), &[a]) => Gate::Output(a),
                _ => return bad("unknown gate or wrong arity"),
            };
            gates.push(gate);
        }
        Circuit::new(gates)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, gate) in self.gates.iter().enumerate() {
            let body = match *gate {
                Gate::Input(c) => format!("input {c}"),
                Gate::Const(v) => format!("const {v}"),
                Gate::Add(a, b) => format!("add {a} {b}"),
                Gate::Sub(a, b) => format!("sub {a} {b}"),
                Gate::Mul(a, b) => format!("mul {a} {b}"),
                Gate::Output(a) => format!("output {a}"),
            };
            out.push_str(&format!("{id} {body}\n"));
        }
        out
    }
}

/// Incremental construction of a circuit; every method returns a wire.
#[derive(Clone, Debug, Default)]
pub struct CircuitBuilder {
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, g: Gate) -> usize {
        self.gates.push(g);
        self.gates.len() - 1
    }

    pub fn input(&mut self, chunk: usize) -> usize {
        self.push(Gate::Input(chunk))
    }

    pub fn constant(&mut self, v: u32) -> usize {
        self.push(Gate::Const(v))
    }

    pub fn mul(&mut self, a: usize, b: usize) -> usize {
        self.push(Gate::Mul(a, b))
    }

    pub fn sub(&mut self, a: usize, b: usize) -> usize {
        self.push(Gate::Sub(a, b))
    }

    /// base^exp by left-to-right square-and-multiply, exp ≥ 1.
    pub fn pow(&mut self, base: usize, exp: u64) -> usize {
        let mut acc = base;
        for bit in (0..63 - exp.leading_zeros()).rev() {
            acc = self.push(Gate::Mul(acc, acc));
            if exp >> bit & 1 == 1 {
                acc = self.push(Gate::Mul(acc, base));
            }
        }
        acc
    }

    /// 1 if a = b, else 0, over GF(p).
    pub fn is_equal(&mut self, a: usize, b: usize, p: u32) -> usize {
        let d = self.sub(a, b);
        let pow = self.pow(d, p as u64 - 1);
        let one = self.constant(1);
        self.sub(one, pow)
    }

    /// 1 if a ≠ b, else 0, over GF(p).
    pub fn is_different(&mut self, a: usize, b: usize, p: u32) -> usize {
        let d = self.sub(a, b);
        self.pow(d, p as u64 - 1)
    }

    /// Balanced product tree; `terms` must be nonempty.
    pub fn product(&mut self, mut terms: Vec<usize>) -> usize {
        while terms.len() > 1 {
            let mut next = Vec::with_capacity(terms.len().div_ceil(2));
            for pair in terms.chunks(2) {
                next.push(if pair.len() == 2 { self.push(Gate::Mul(pair[0], pair[1])) } else { pair[0] });
            }
            terms = next;
        }
        terms[0]
    }

    pub fn finish(mut self, out: usize) -> Result<Circuit> {
        self.push(Gate::Output(out));
        Circuit::new(self.gates)
    }
}

/// Relation "a · b = n with a ≠ 1 and b ≠ 1" over chunks 0 and 1: a toy
/// NP statement whose witness is a nontrivial factorisation in GF(p).
pub fn compile_factor_relation(n: u32, field: &Field) -> Result<Circuit> {
    let p = field.p();
    if n >= p {
        return param("target must be a field element");
    }
    let mut b = CircuitBuilder::new();
    let x = b.input(0);
    let y = b.input(1);
    let xy = b.mul(x, y);
    let target = b.constant(n);
    let eq = b.is_equal(xy, target, p);
    let one = b.constant(1);
    let nx = b.is_different(x, one, p);
    let ny = b.is_different(y, one, p);
    let out = b.product(vec![eq, nx, ny]);
    b.finish(out)
}

/// Circuit that outputs 1 iff every constrained message position holds its
/// required bit. `constraints[k]` covers message bit k; a chunk that has any
/// constrained position must have all of its positions constrained (padding
/// past the message end counts as a fixed zero).
pub fn compile_equality_predicate(constraints: &[Option<bool>], chunk_bits: usize, field: &Field) -> Result<Circuit> {
    if chunk_bits == 0 || 1u64 << chunk_bits > field.p() as u64 {
        return param(format!("{chunk_bits}-bit chunks do not fit GF({})", field.p()));
    }
    let mut b = CircuitBuilder::new();
    let mut eqs = Vec::new();
    let mut one = None;
    for (chunk, span) in constraints.chunks(chunk_bits).enumerate() {
        let fixed = span.iter().filter(|c| c.is_some()).count();
        if fixed == 0 {
            continue;
        }
        if fixed != span.len() {
            return param(format!("chunk {chunk} is only partially constrained"));
        }
        let mut value = 0u32;
        for k in 0..chunk_bits {
            value = value << 1 | span.get(k).copied().flatten().unwrap_or(false) as u32;
        }
        let x = b.push(Gate::Input(chunk));
        let c = b.push(Gate::Const(value));
        let d = b.push(Gate::Sub(x, c));
        let pow = b.pow(d, field.p() as u64 - 1);
        let one = *one.get_or_insert_with(|| b.push(Gate::Const(1)));
        eqs.push(b.push(Gate::Sub(one, pow)));
    }
    let out = if eqs.is_empty() { b.push(Gate::Const(1)) } else { b.product(eqs) };
    b.push(Gate::Output(out));
    Circuit::new(b.gates)
}

/// Equality with `target` on the first `target.len()` positions of an
/// `message_bits`-bit message.
pub fn compile_target_predicate(target: &Bits, message_bits: usize, chunk_bits: usize, field: &Field) -> Result<Circuit> {
    if target.len() > message_bits {
        return param(format!("target of {} bits exceeds message length {message_bits}", target.len()));
    }
    let mut constraints = vec![None; message_bits];
    for (k, bit) in target.iter().enumerate() {
        constraints[k] = Some(bit);
    }
    compile_equality_predicate(&constraints, chunk_bits, field)
}
