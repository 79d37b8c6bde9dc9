//! Naor-style bit commitments over a [`PrgSpec`], applied bitwise to strings.

use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::bits::Bits;
use crate::error::{param, Error, Result};
use crate::prg::{read_left_aligned, PrgSpec};
use crate::wire::{Decode, Encode, Reader, Writer};

/// Brute-force limit on λ for [`base_val`].
pub const DEFAULT_VAL_CAP: usize = 12;

/// A sequence of equal-width blocks (3λ bits each, byte aligned).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Blocks {
    stride: usize,
    data: Vec<u8>,
}

impl Blocks {
    pub fn zeroed(stride: usize, count: usize) -> Self {
        Blocks { stride, data: vec![0; stride * count] }
    }

    pub fn from_raw(stride: usize, data: Vec<u8>) -> Result<Self> {
        if stride == 0 || !data.len().is_multiple_of(stride) {
            return param("block data is not a whole number of blocks");
        }
        Ok(Blocks { stride, data })
    }

    pub fn random<R: RngCore + ?Sized>(spec: &PrgSpec, count: usize, rng: &mut R) -> Self {
        let stride = spec.block_bytes();
        let mut data = vec![0u8; stride * count];
        rng.fill_bytes(&mut data);
        let rem = spec.out_bits() % 8;
        if rem != 0 {
            for chunk in data.chunks_mut(stride) {
                chunk[stride - 1] &= 0xffu8 << (8 - rem);
            }
        }
        Blocks { stride, data }
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.stride
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u8] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut [u8] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn raw(&self) -> &[u8] {
        &self.data
    }
}

impl Encode for Blocks {
    fn encode_into(&self, w: &mut Writer) {
        w.u16(self.stride as u16).bytes(&self.data);
    }
}

impl Decode for Blocks {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        let stride = r.u16()? as usize;
        let data = r.bytes()?.to_vec();
        Blocks::from_raw(stride, data).map_err(|_| Error::Protocol("ragged block data".into()))
    }
}

/// λ-bit seeds, one per committed bit, stored in `ceil(λ/8)` bytes each.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seeds {
    width: u8,
    data: Vec<u8>,
}

impl Seeds {
    pub fn random<R: RngCore + ?Sized>(spec: &PrgSpec, count: usize, rng: &mut R) -> Self {
        let width = spec.seed_bytes();
        let mut data = vec![0u8; width * count];
        rng.fill_bytes(&mut data);
        let rem = spec.lambda() % 8;
        if rem != 0 {
            for chunk in data.chunks_mut(width) {
                chunk[0] &= (1u8 << rem) - 1;
            }
        }
        Seeds { width: width as u8, data }
    }

    pub fn from_values(spec: &PrgSpec, values: &[u64]) -> Result<Self> {
        let width = spec.seed_bytes();
        let mut data = Vec::with_capacity(width * values.len());
        for &v in values {
            if v & !spec.seed_mask() != 0 {
                return param(format!("seed {v} exceeds {} bits", spec.lambda()));
            }
            data.extend_from_slice(&v.to_be_bytes()[8 - width..]);
        }
        Ok(Seeds { width: width as u8, data })
    }

    pub fn len(&self) -> usize {
        if self.width == 0 {
            0
        } else {
            self.data.len() / self.width as usize
        }
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> u64 {
        let w = self.width as usize;
        self.data[i * w..(i + 1) * w].iter().fold(0u64, |acc, &b| (acc << 8) | b as u64)
    }

    pub fn set(&mut self, i: usize, v: u64) {
        let w = self.width as usize;
        self.data[i * w..(i + 1) * w].copy_from_slice(&v.to_be_bytes()[8 - w..]);
    }

    /// Keeps only the first `n` seeds.
    pub fn truncate(&mut self, n: usize) {
        self.data.truncate(n * self.width as usize);
    }

    fn width_ok(&self, spec: &PrgSpec) -> bool {
        self.width as usize == spec.seed_bytes() && self.data.len().is_multiple_of(spec.seed_bytes())
    }

    fn values_in_range(&self, spec: &PrgSpec) -> bool {
        (0..self.len()).all(|i| self.get(i) & !spec.seed_mask() == 0)
    }
}

impl Encode for Seeds {
    fn encode_into(&self, w: &mut Writer) {
        w.u8(self.width).bytes(&self.data);
    }
}

impl Decode for Seeds {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        let width = r.u8()?;
        let data = r.bytes()?.to_vec();
        if width == 0 || width > 8 || data.len() % width as usize != 0 {
            return Err(Error::Protocol("malformed seed vector".into()));
        }
        Ok(Seeds { width, data })
    }
}

/// The receiver's first message: one 3λ-bit string per committed bit slot.
pub fn sample_receiver_r<R: RngCore + ?Sized>(spec: &PrgSpec, len: usize, rng: &mut R) -> Arc<Blocks> {
    Arc::new(Blocks::random(spec, len, rng))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseCommitment {
    pub spec: PrgSpec,
    pub receiver_r: Arc<Blocks>,
    pub blocks: Blocks,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseDecommit {
    pub message: Bits,
    pub seeds: Seeds,
}

impl Encode for BaseDecommit {
    fn encode_into(&self, w: &mut Writer) {
        self.message.encode_into(w);
        self.seeds.encode_into(w);
    }
}

impl Decode for BaseDecommit {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        Ok(BaseDecommit { message: r.bits()?, seeds: Seeds::decode_from(r)? })
    }
}

impl BaseCommitment {
    pub fn lambda(&self) -> usize {
        self.spec.lambda()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Reattaches a received block vector to the receiver's own first message.
    pub fn assemble(spec: PrgSpec, receiver_r: Arc<Blocks>, blocks: Blocks) -> Result<Self> {
        if blocks.stride() != spec.block_bytes() || blocks.len() != receiver_r.len() {
            return Err(Error::Protocol(format!(
                "commitment has {} blocks of {} bytes, expected {} of {}",
                blocks.len(),
                blocks.stride(),
                receiver_r.len(),
                spec.block_bytes()
            )));
        }
        Ok(BaseCommitment { spec, receiver_r, blocks })
    }
}

/// Computes the Naor blocks `pad_i XOR m_i·r_i`. With `pads` drawn from the
/// generator this is the commitment; with uniform pads it is the idealized one.
pub fn naor_blocks(message: &Bits, receiver_r: &Blocks, pads: &Blocks) -> Blocks {
    let mut out = pads.clone();
    for i in 0..message.len() {
        if message.get(i) {
            for (o, r) in out.get_mut(i).iter_mut().zip(receiver_r.get(i)) {
                *o ^= r;
            }
        }
    }
    out
}

/// Commits to `message` bit by bit.
pub fn base_commit(
    spec: &PrgSpec,
    message: &Bits,
    receiver_r: Arc<Blocks>,
    seeds: Seeds,
) -> Result<(BaseCommitment, BaseDecommit)> {
    let blocks = commit_blocks(spec, message, &receiver_r, &seeds)?;
    let com = BaseCommitment { spec: *spec, receiver_r, blocks };
    Ok((com, BaseDecommit { message: message.clone(), seeds }))
}

/// Calls `$body` with `$s` bound to the block stride as a constant, so the
/// per-bit loops below compile to fixed-width code.
macro_rules! with_stride {
    ($stride:expr, $s:ident => $body:expr) => {
        match $stride {
            1 => { const $s: usize = 1; $body }
            2 => { const $s: usize = 2; $body }
            3 => { const $s: usize = 3; $body }
            4 => { const $s: usize = 4; $body }
            5 => { const $s: usize = 5; $body }
            6 => { const $s: usize = 6; $body }
            7 => { const $s: usize = 7; $body }
            8 => { const $s: usize = 8; $body }
            other => unreachable!("tabulated generators have blocks of at most 8 bytes, got {other}"),
        }
    };
}

/// Per-bit commitment arithmetic for a generator with a lookup table.
struct TableRows<'a> {
    table: &'a [u64],
    shift: u32,
    message: &'a Bits,
    seeds: &'a Seeds,
}

impl TableRows<'_> {
    /// Calls `f(i, expected block)` for every row until it returns false.
    #[inline(always)]
    fn rows<const S: usize, const W: usize>(&self, receiver_r: &[u8], mut f: impl FnMut(usize, [u8; S]) -> bool) -> bool {
        let seeds = self.seeds.data.chunks_exact(W);
        let rs = receiver_r.chunks_exact(S);
        for (i, (seed, r)) in seeds.zip(rs).enumerate() {
            let seed = seed.iter().fold(0usize, |acc, &b| (acc << 8) | b as usize);
            let Some(&g) = self.table.get(seed) else { return false };
            let g = (g << self.shift).to_be_bytes();
            let mask = 0u8.wrapping_sub((self.message.as_bytes()[i / 8] >> (7 - i % 8)) & 1);
            if !f(i, std::array::from_fn(|j| g[j] ^ (r[j] & mask))) {
                return false;
            }
        }
        true
    }

    fn by_width<const S: usize>(&self, receiver_r: &[u8], f: impl FnMut(usize, [u8; S]) -> bool) -> bool {
        match self.seeds.width {
            1 => self.rows::<S, 1>(receiver_r, f),
            2 => self.rows::<S, 2>(receiver_r, f),
            3 => self.rows::<S, 3>(receiver_r, f),
            w => unreachable!("tabulated generators have seeds of at most 3 bytes, got {w}"),
        }
    }

    fn commit<const S: usize>(&self, receiver_r: &[u8], out: &mut [u8]) {
        let ok = self.by_width::<S>(receiver_r, |i, row| {
            out[i * S..(i + 1) * S].copy_from_slice(&row);
            true
        });
        assert!(ok, "seeds checked in range");
    }

    fn verify<const S: usize>(&self, receiver_r: &[u8], blocks: &[u8]) -> bool {
        self.by_width::<S>(receiver_r, |i, row| blocks[i * S..(i + 1) * S] == row)
    }
}

/// The block vector of a commitment, without taking ownership of the inputs.
pub fn commit_blocks(spec: &PrgSpec, message: &Bits, receiver_r: &Blocks, seeds: &Seeds) -> Result<Blocks> {
    let n = message.len();
    if receiver_r.len() != n || receiver_r.stride() != spec.block_bytes() {
        return param(format!("receiver string covers {} bits, message has {n}", receiver_r.len()));
    }
    if seeds.len() != n || !seeds.width_ok(spec) || !seeds.values_in_range(spec) {
        return param(format!("need {n} seeds of {} bits", spec.lambda()));
    }
    let mut blocks = Blocks::zeroed(spec.block_bytes(), n);
    if let Some(table) = spec.table() {
        let rows = TableRows { table, shift: 64 - spec.out_bits() as u32, message, seeds };
        with_stride!(blocks.stride, S => rows.commit::<S>(&receiver_r.data, &mut blocks.data));
        return Ok(blocks);
    }
    for i in 0..n {
        let out = blocks.get_mut(i);
        spec.expand_into(seeds.get(i), out);
        if message.get(i) {
            for (o, r) in out.iter_mut().zip(receiver_r.get(i)) {
                *o ^= r;
            }
        }
    }
    Ok(blocks)
}

/// Checks that `decom` opens `com` to `message`. Malformed input is rejected.
pub fn base_verify(com: &BaseCommitment, message: &Bits, decom: &BaseDecommit) -> bool {
    decom.message == *message && verify_with_seeds(com, message, &decom.seeds)
}

/// [`base_verify`] with the seeds passed separately.
pub fn verify_with_seeds(com: &BaseCommitment, message: &Bits, seeds: &Seeds) -> bool {
    let spec = &com.spec;
    let n = message.len();
    if com.blocks.len() != n || com.receiver_r.len() != n || seeds.len() != n || !seeds.width_ok(spec) {
        return false;
    }
    if let Some(table) = spec.table() {
        let rows = TableRows { table, shift: 64 - spec.out_bits() as u32, message, seeds };
        return with_stride!(spec.block_bytes(), S => rows.verify::<S>(&com.receiver_r.data, &com.blocks.data));
    }
    let mut buf = [0u8; 24];
    let buf = &mut buf[..spec.block_bytes()];
    for i in 0..n {
        let seed = seeds.get(i);
        if seed & !spec.seed_mask() != 0 {
            return false;
        }
        spec.expand_into(seed, buf);
        let block = com.blocks.get(i);
        let ok = if message.get(i) {
            buf.iter().zip(com.receiver_r.get(i)).zip(block).all(|((g, r), b)| g ^ r == *b)
        } else {
            &buf[..] == block
        };
        if !ok {
            return false;
        }
    }
    true
}

/// Which bits a single block can be opened to: (opens to 0, opens to 1).
pub fn block_openings(spec: &PrgSpec, block: &[u8], r: &[u8]) -> Result<(Option<u64>, Option<u64>)> {
    let index = spec.image_index()?;
    let width = spec.out_bits();
    let b = read_left_aligned(block, width);
    let rv = read_left_aligned(r, width);
    Ok((index.get(&b).copied(), index.get(&(b ^ rv)).copied()))
}

/// The unique message `com` can be opened to, or `None` when some bit has no
/// opening or two openings. Exhaustive in the seed space.
pub fn base_val(com: &BaseCommitment, cap: usize) -> Result<Option<Bits>> {
    if com.lambda() > cap {
        return Err(Error::Capability(format!("λ = {} exceeds the brute-force cap {cap}", com.lambda())));
    }
    let mut out = Bits::zeros(com.len());
    for i in 0..com.len() {
        match block_openings(&com.spec, com.blocks.get(i), com.receiver_r.get(i))? {
            (Some(_), None) => {}
            (None, Some(_)) => out.set(i, true),
            _ => return Ok(None),
        }
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prg::prg_expand;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::collections::HashMap;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn commit(spec: &PrgSpec, m: &Bits, r: &mut ChaCha20Rng) -> (BaseCommitment, BaseDecommit) {
        let recv = sample_receiver_r(spec, m.len(), r);
        let seeds = Seeds::random(spec, m.len(), r);
        base_commit(spec, m, recv, seeds).unwrap()
    }

    fn block_bits(spec: &PrgSpec, com: &BaseCommitment, i: usize) -> Bits {
        Bits::from_bytes_len(com.blocks.get(i), spec.out_bits())
    }

    #[test]
    fn zero_bit_block_is_generator_output() {
        let spec = PrgSpec::toy(4).unwrap();
        let mut g = rng(1);
        let m = Bits::parse("0").unwrap();
        let (com, decom) = commit(&spec, &m, &mut g);
        let seed = Bits::from_u64(decom.seeds.get(0), 4);
        assert_eq!(block_bits(&spec, &com, 0), prg_expand(&seed, &spec).unwrap());
    }

    #[test]
    fn one_bit_with_zero_receiver_string() {
        let spec = PrgSpec::toy(4).unwrap();
        let recv = Arc::new(Blocks::zeroed(spec.block_bytes(), 1));
        let seeds = Seeds::from_values(&spec, &[9]).unwrap();
        let (com, _) = base_commit(&spec, &Bits::parse("1").unwrap(), recv, seeds).unwrap();
        assert_eq!(block_bits(&spec, &com, 0), prg_expand(&Bits::from_u64(9, 4), &spec).unwrap());
    }

    #[test]
    fn one_bit_specific_block() {
        // seed 0 expands to 101011110101 in the λ=4 table; r = 000011110000.
        let spec = PrgSpec::toy(4).unwrap();
        let r = Bits::parse("000011110000").unwrap();
        let recv = Arc::new(Blocks::from_raw(2, r.as_bytes().to_vec()).unwrap());
        let seeds = Seeds::from_values(&spec, &[0]).unwrap();
        let (com, _) = base_commit(&spec, &Bits::parse("1").unwrap(), recv, seeds).unwrap();
        assert_eq!(block_bits(&spec, &com, 0), Bits::parse("101000000101").unwrap());
    }

    #[test]
    fn honest_round_trip_verifies() {
        for spec in [PrgSpec::toy(4).unwrap(), PrgSpec::production(32).unwrap()] {
            let mut g = rng(2);
            let m = Bits::random(37, &mut g);
            let (com, decom) = commit(&spec, &m, &mut g);
            assert!(base_verify(&com, &m, &decom));
        }
    }

    #[test]
    fn flipped_bit_fails_verification() {
        let spec = PrgSpec::toy(4).unwrap();
        let mut g = rng(3);
        let m = Bits::parse("1011").unwrap();
        let (com, decom) = commit(&spec, &m, &mut g);
        let index = spec.image_index().unwrap();
        for i in 0..4 {
            let mut m2 = m.clone();
            m2.flip(i);
            // The flipped bit verifies only if the same seed also explains the
            // other opening, which needs r_i = 0.
            let r_zero = com.receiver_r.get(i).iter().all(|&b| b == 0);
            let mut decom2 = decom.clone();
            decom2.message = m2.clone();
            assert_eq!(base_verify(&com, &m2, &decom2), r_zero);
            assert!(index.len() == 16);
        }
    }

    #[test]
    fn truncated_decommitment_fails() {
        let spec = PrgSpec::toy(4).unwrap();
        let mut g = rng(4);
        let m = Bits::parse("110").unwrap();
        let (com, mut decom) = commit(&spec, &m, &mut g);
        decom.seeds.truncate(2);
        assert!(!base_verify(&com, &m, &decom));
    }

    #[test]
    fn val_recovers_two_bit_message() {
        let spec = PrgSpec::toy(4).unwrap();
        let mut g = rng(5);
        let mut recovered = 0;
        for trial in 0..20u64 {
            let m = Bits::from_u64(trial % 4, 2);
            let (com, _) = commit(&spec, &m, &mut g);
            match base_val(&com, DEFAULT_VAL_CAP).unwrap() {
                Some(v) => {
                    assert_eq!(v, m);
                    recovered += 1;
                }
                // Only possible when some r admits two openings of this block.
                None => assert!((0..2).any(|i| {
                    let (a, b) = block_openings(&spec, com.blocks.get(i), com.receiver_r.get(i)).unwrap();
                    a.is_some() && b.is_some()
                })),
            }
        }
        assert!(recovered >= 18);
    }

    #[test]
    fn random_blocks_have_no_value() {
        let spec = PrgSpec::toy(4).unwrap();
        let mut g = rng(6);
        let mut none = 0;
        for _ in 0..200 {
            let recv = sample_receiver_r(&spec, 1, &mut g);
            let com = BaseCommitment::assemble(spec, recv, Blocks::random(&spec, 1, &mut g)).unwrap();
            if base_val(&com, DEFAULT_VAL_CAP).unwrap().is_none() {
                none += 1;
            }
        }
        // A random 12-bit block lies in the 16-element image (or its r-shift)
        // with probability about 2 * 16/4096.
        assert!(none >= 190, "{none}");
    }

    #[test]
    fn val_above_cap_is_capability_error() {
        let spec = PrgSpec::toy(13).unwrap();
        let mut g = rng(7);
        let (com, _) = commit(&spec, &Bits::parse("1").unwrap(), &mut g);
        assert!(matches!(base_val(&com, DEFAULT_VAL_CAP), Err(Error::Capability(_))));
        assert_eq!(base_val(&com, 13).unwrap(), Some(Bits::parse("1").unwrap()));
    }

    #[test]
    fn statistical_binding_fraction() {
        // Bad receiver strings are exactly the XORs of two outputs (including
        // r = 0). Their fraction must not exceed 2^-λ.
        for lambda in 4..=8 {
            let spec = PrgSpec::toy(lambda).unwrap();
            let outs: Vec<u64> = (0..1u64 << lambda).map(|s| spec.expand_u64(s)).collect();
            let space = 1usize << (3 * lambda);
            let mut bad = vec![false; space];
            for &a in &outs {
                for &b in &outs {
                    bad[(a ^ b) as usize] = true;
                }
            }
            let count = bad.iter().filter(|&&b| b).count();
            assert!(count * (1 << lambda) <= space, "λ={lambda}: {count} bad of {space}");
        }
    }

    #[test]
    fn idealized_hiding_is_exact() {
        // λ = 2: pads range over all 6-bit strings; the joint distribution of
        // (r, block) must not depend on the committed bit.
        let spec = PrgSpec::toy(2).unwrap();
        let dist = |bit: bool| {
            let mut h: HashMap<(Vec<u8>, Vec<u8>), u32> = HashMap::new();
            for r in 0..64u64 {
                for pad in 0..64u64 {
                    let rb = Blocks::from_raw(1, vec![(r << 2) as u8]).unwrap();
                    let pb = Blocks::from_raw(1, vec![(pad << 2) as u8]).unwrap();
                    let out = naor_blocks(&Bits::from_bools(&[bit]), &rb, &pb);
                    *h.entry((rb.raw().to_vec(), out.raw().to_vec())).or_default() += 1;
                }
            }
            h
        };
        assert_eq!(dist(false), dist(true));
        assert_eq!(spec.out_bits(), 6);
    }

    #[test]
    fn mismatched_lengths_are_parameter_errors() {
        let spec = PrgSpec::toy(4).unwrap();
        let mut g = rng(8);
        let recv = sample_receiver_r(&spec, 3, &mut g);
        let seeds = Seeds::random(&spec, 2, &mut g);
        assert!(matches!(base_commit(&spec, &Bits::zeros(2), recv, seeds), Err(Error::Param(_))));
    }
}
