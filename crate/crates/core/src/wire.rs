//! Big-endian byte encoding helpers shared by every message type.

use crate::bits::Bits;
use crate::error::{Error, Result};

#[derive(Default, Debug, Clone)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Writer::default()
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u16(&mut self, v: u16) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn raw(&mut self, bytes: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(bytes);
        self
    }

    /// u32 length prefix followed by the bytes.
    pub fn bytes(&mut self, bytes: &[u8]) -> &mut Self {
        self.u32(bytes.len() as u32);
        self.raw(bytes)
    }

    /// u32 bit length followed by the packed bytes.
    pub fn bits(&mut self, b: &Bits) -> &mut Self {
        self.u32(b.len() as u32);
        self.raw(b.as_bytes())
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn short() -> Error {
    Error::Protocol("message truncated".into())
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(short());
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    pub fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    pub fn u64(&mut self) -> Result<u64> {
        let b = self.take(8)?;
        Ok(u64::from_be_bytes(b.try_into().unwrap()))
    }

    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    pub fn bits(&mut self) -> Result<Bits> {
        let len = self.u32()? as usize;
        let raw = self.take(len.div_ceil(8))?;
        let b = Bits::from_bytes_len(raw, len);
        if b.as_bytes() != raw {
            return Err(Error::Protocol("nonzero padding bits".into()));
        }
        Ok(b)
    }

    /// Fails unless every byte was consumed.
    pub fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(Error::Protocol(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

/// Types with a canonical byte encoding.
pub trait Encode {
    fn encode_into(&self, w: &mut Writer);

    fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.encode_into(&mut w);
        w.finish()
    }
}

/// Types decodable from their canonical encoding.
pub trait Decode: Sized {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self>;

    fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let v = Self::decode_from(&mut r)?;
        r.finish()?;
        Ok(v)
    }
}

impl Encode for Bits {
    fn encode_into(&self, w: &mut Writer) {
        w.bits(self);
    }
}

impl Decode for Bits {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        r.bits()
    }
}

impl<T: Encode> Encode for Vec<T> {
    fn encode_into(&self, w: &mut Writer) {
        w.u32(self.len() as u32);
        for item in self {
            item.encode_into(w);
        }
    }
}

impl<T: Decode> Decode for Vec<T> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        let n = r.u32()? as usize;
        // Every item takes at least one byte; refuse absurd counts early.
        if n > r.remaining() {
            return Err(short());
        }
        (0..n).map(|_| T::decode_from(r)).collect()
    }
}

impl<T: Encode> Encode for Option<T> {
    fn encode_into(&self, w: &mut Writer) {
        match self {
            None => {
                w.u8(0);
            }
            Some(v) => {
                w.u8(1);
                v.encode_into(w);
            }
        }
    }
}

impl<T: Decode> Decode for Option<T> {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        match r.u8()? {
            0 => Ok(None),
            1 => T::decode_from(r).map(Some),
            _ => Err(Error::Protocol("option tag is not 0 or 1".into())),
        }
    }
}

impl Encode for bool {
    fn encode_into(&self, w: &mut Writer) {
        w.u8(*self as u8);
    }
}

impl Decode for bool {
    fn decode_from(r: &mut Reader<'_>) -> Result<Self> {
        match r.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::Protocol("boolean byte is not 0 or 1".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_round_trip_and_padding_check() {
        let b = Bits::parse("10110").unwrap();
        let enc = b.encode();
        assert_eq!(enc, vec![0, 0, 0, 5, 0b1011_0000]);
        assert_eq!(Bits::decode(&enc).unwrap(), b);
        let mut bad = enc.clone();
        bad[4] |= 1;
        assert!(Bits::decode(&bad).is_err());
    }

    #[test]
    fn trailing_bytes_rejected() {
        let mut enc = Bits::parse("1").unwrap().encode();
        enc.push(0);
        assert!(Bits::decode(&enc).is_err());
    }
}
