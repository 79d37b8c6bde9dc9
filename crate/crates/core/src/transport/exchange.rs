//! How protocol drivers move messages between the two parties.
//!
//! A driver is written once against [`Exchange`]. With a [`Transcript`] both
//! parties run in this process and every message is only recorded. With a
//! [`Peer`] one party is local: its messages are produced and sent, the other
//! party's are received and decoded. Both record the same transcript.

use crate::error::{Error, Result};
use crate::transport::channel::Channel;
use crate::transport::msg;
use crate::transport::transcript::{Party, Transcript};
use crate::wire::{Decode, Encode};

pub trait Exchange {
    fn is_local(&self, party: Party) -> bool;

    /// One message from `from`. `make` runs only when `from` is local; an
    /// error from it aborts the session for both sides.
    fn transfer<T>(
        &mut self,
        from: Party,
        msg_type: u8,
        make: impl FnOnce() -> Result<T>,
        encode: impl FnOnce(&T) -> Vec<u8>,
        decode: impl FnOnce(&[u8]) -> Result<T>,
    ) -> Result<T>;

    /// Local processing by `party` with no message; skipped when remote.
    fn local(&mut self, party: Party, step: impl FnOnce() -> Result<()>) -> Result<()>;

    fn msg<T: Encode + Decode>(&mut self, from: Party, msg_type: u8, make: impl FnOnce() -> Result<T>) -> Result<T> {
        self.transfer(from, msg_type, make, |t| t.encode(), |b| T::decode(b))
    }
}

impl Exchange for Transcript {
    fn is_local(&self, _: Party) -> bool {
        true
    }

    fn transfer<T>(
        &mut self,
        from: Party,
        msg_type: u8,
        make: impl FnOnce() -> Result<T>,
        encode: impl FnOnce(&T) -> Vec<u8>,
        _: impl FnOnce(&[u8]) -> Result<T>,
    ) -> Result<T> {
        let t = make()?;
        self.record(from, msg_type, || encode(&t));
        Ok(t)
    }

    fn local(&mut self, _: Party, step: impl FnOnce() -> Result<()>) -> Result<()> {
        step()
    }
}

/// One party of a two-process session.
pub struct Peer<'a> {
    pub channel: &'a mut dyn Channel,
    pub local: Party,
    pub transcript: &'a mut Transcript,
}

impl<'a> Peer<'a> {
    pub fn new(channel: &'a mut dyn Channel, local: Party, transcript: &'a mut Transcript) -> Self {
        Peer { channel, local, transcript }
    }

    fn abort(&mut self, e: Error) -> Error {
        let _ = self.channel.send(msg::ERROR, e.to_string().as_bytes());
        e
    }
}

impl Exchange for Peer<'_> {
    fn is_local(&self, party: Party) -> bool {
        party == self.local
    }

    fn transfer<T>(
        &mut self,
        from: Party,
        msg_type: u8,
        make: impl FnOnce() -> Result<T>,
        encode: impl FnOnce(&T) -> Vec<u8>,
        decode: impl FnOnce(&[u8]) -> Result<T>,
    ) -> Result<T> {
        if from == self.local {
            let t = make().map_err(|e| self.abort(e))?;
            let bytes = encode(&t);
            self.channel.send(msg_type, &bytes)?;
            self.transcript.push(from, msg_type, &bytes);
            return Ok(t);
        }
        let frame = self.channel.recv()?;
        if frame.msg_type == msg::ERROR {
            return Err(Error::Protocol(format!("peer aborted: {}", String::from_utf8_lossy(&frame.payload))));
        }
        if frame.msg_type != msg_type {
            let e = Error::Protocol(format!("expected {}, got {}", msg::name(msg_type).unwrap_or("?"), msg::name(frame.msg_type).unwrap_or("?")));
            return Err(self.abort(e));
        }
        self.transcript.push(from, msg_type, &frame.payload);
        decode(&frame.payload).map_err(|e| self.abort(e))
    }

    fn local(&mut self, party: Party, step: impl FnOnce() -> Result<()>) -> Result<()> {
        if party == self.local {
            step().map_err(|e| self.abort(e))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::transport::channel::mem_pair;

    fn script<X: Exchange>(x: &mut X, fail_second: bool) -> Result<Bits> {
        let a = x.msg(Party::P1, msg::W_COMS, || Ok(Bits::parse("101").unwrap()))?;
        let b = x.msg(Party::P2, msg::W_CHALLENGE, || if fail_second { Err(Error::Protocol("no".into())) } else { Ok(a.xor(&Bits::parse("011").unwrap())) })?;
        x.msg(Party::P1, msg::W_OPENING, || Ok(b.concat(&a)))
    }

    #[test]
    fn peers_record_the_in_process_transcript() {
        let mut local = Transcript::new();
        let expect = script(&mut local, false).unwrap();
        let (mut a, mut b) = mem_pair();
        let h = std::thread::spawn(move || {
            let mut tr = Transcript::new();
            let out = script(&mut Peer::new(&mut b, Party::P2, &mut tr), false);
            (out, tr)
        });
        let mut tr = Transcript::new();
        let out = script(&mut Peer::new(&mut a, Party::P1, &mut tr), false).unwrap();
        let (other, tr2) = h.join().unwrap();
        assert_eq!(out, expect);
        assert_eq!(other.unwrap(), expect);
        assert_eq!(tr.to_json(), local.to_json());
        assert_eq!(tr2.to_json(), local.to_json());
    }

    #[test]
    fn local_failure_reaches_the_peer() {
        let (mut a, mut b) = mem_pair();
        let h = std::thread::spawn(move || script(&mut Peer::new(&mut b, Party::P2, &mut Transcript::new()), true));
        let err = script(&mut Peer::new(&mut a, Party::P1, &mut Transcript::new()), true).unwrap_err();
        assert!(err.to_string().contains("peer aborted"));
        assert!(h.join().unwrap().is_err());
    }
}
