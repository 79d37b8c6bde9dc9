//! Packed bitstrings, most significant bit first.

use std::fmt;

use rand::RngCore;
use serde::{Deserialize, Serialize};

/// A bitstring of arbitrary length. Bit 0 is the high bit of byte 0.
/// Padding bits in the last byte are always zero, so equality and hashing
/// are on the logical value.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Bits {
    len: usize,
    bytes: Vec<u8>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits { len, bytes: vec![0; len.div_ceil(8)] }
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        Bits { len: bytes.len() * 8, bytes: bytes.to_vec() }
    }

    /// Takes the first `len` bits of `bytes`.
    pub fn from_bytes_len(bytes: &[u8], len: usize) -> Self {
        let nb = len.div_ceil(8);
        assert!(bytes.len() >= nb, "not enough bytes for {len} bits");
        let mut b = Bits { len, bytes: bytes[..nb].to_vec() };
        b.clear_padding();
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Bits::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            b.set(i, v);
        }
        b
    }

    /// Parses a string of '0'/'1' characters; '_' and spaces are ignored.
    pub fn parse(s: &str) -> Option<Self> {
        let mut out = Vec::new();
        for ch in s.chars() {
            match ch {
                '0' => out.push(false),
                '1' => out.push(true),
                '_' | ' ' => {}
                _ => return None,
            }
        }
        Some(Bits::from_bools(&out))
    }

    /// The low `len` bits of `value`, most significant first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut b = Bits::zeros(len);
        for i in 0..len {
            b.set(i, (value >> (len - 1 - i)) & 1 == 1);
        }
        b
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut bytes = vec![0u8; len.div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        let mut b = Bits { len, bytes };
        b.clear_padding();
        b
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u8 << (7 - i % 8);
        if v {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        let bytes = self.bytes.iter().zip(&other.bytes).map(|(a, b)| a ^ b).collect();
        Bits { len: self.len, bytes }
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.bytes.iter_mut().zip(&other.bytes) {
            *a ^= b;
        }
    }

    pub fn slice(&self, start: usize, len: usize) -> Bits {
        assert!(start + len <= self.len);
        if start.is_multiple_of(8) {
            return Bits::from_bytes_len(&self.bytes[start / 8..], len);
        }
        let mut out = Bits::zeros(len);
        for i in 0..len {
            out.set(i, self.get(start + i));
        }
        out
    }

    pub fn concat(&self, other: &Bits) -> Bits {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn extend(&mut self, other: &Bits) {
        if self.len.is_multiple_of(8) {
            self.bytes.extend_from_slice(&other.bytes);
            self.len += other.len;
            return;
        }
        let start = self.len;
        self.len += other.len;
        self.bytes.resize(self.len.div_ceil(8), 0);
        for i in 0..other.len {
            self.set(start + i, other.get(i));
        }
    }

    pub fn push(&mut self, v: bool) {
        self.len += 1;
        if self.bytes.len() < self.len.div_ceil(8) {
            self.bytes.push(0);
        }
        self.set(self.len - 1, v);
    }

    /// Reads `width` bits starting at `start` as an unsigned integer.
    pub fn read_uint(&self, start: usize, width: usize) -> u64 {
        assert!(width <= 64 && start + width <= self.len);
        let mut v = 0u64;
        for i in 0..width {
            v = (v << 1) | self.get(start + i) as u64;
        }
        v
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn to_bit_string(&self) -> String {
        self.iter().map(|b| if b { '1' } else { '0' }).collect()
    }

    fn clear_padding(&mut self) {
        let rem = self.len % 8;
        if rem != 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << (8 - rem);
            }
        }
    }
}

impl fmt::Debug for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 64 {
            write!(f, "Bits({})", self.to_bit_string())
        } else {
            write!(f, "Bits[{}]({})", self.len, self.to_hex())
        }
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn msb_first_layout() {
        let b = Bits::parse("1010 0000 1").unwrap();
        assert_eq!(b.len(), 9);
        assert_eq!(b.as_bytes(), &[0xa0, 0x80]);
        assert_eq!(b.read_uint(0, 4), 0b1010);
    }

    #[test]
    fn from_bytes_len_clears_padding() {
        let b = Bits::from_bytes_len(&[0xff, 0xff], 10);
        assert_eq!(b.as_bytes(), &[0xff, 0xc0]);
        assert_eq!(b, Bits::parse("1111111111").unwrap());
    }

    proptest! {
        #[test]
        fn xor_is_involutive(a in proptest::collection::vec(any::<bool>(), 0..80), seed in any::<u64>()) {
            use rand::SeedableRng;
            let a = Bits::from_bools(&a);
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let b = Bits::random(a.len(), &mut rng);
            prop_assert_eq!(a.xor(&b).xor(&b), a);
        }

        #[test]
        fn concat_then_slice(a in proptest::collection::vec(any::<bool>(), 0..40), b in proptest::collection::vec(any::<bool>(), 0..40)) {
            let (x, y) = (Bits::from_bools(&a), Bits::from_bools(&b));
            let c = x.concat(&y);
            prop_assert_eq!(c.slice(0, x.len()), x.clone());
            prop_assert_eq!(c.slice(x.len(), y.len()), y);
        }

        #[test]
        fn uint_round_trip(v in any::<u64>(), w in 1usize..=64) {
            let v = if w == 64 { v } else { v & ((1u64 << w) - 1) };
            prop_assert_eq!(Bits::from_u64(v, w).read_uint(0, w), v);
        }
    }
}
