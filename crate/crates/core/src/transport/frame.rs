//! Length-prefixed frames: 4-byte big-endian length, 1-byte type, payload.
//! The length counts the type byte. Payloads above the frame limit are split
//! into frames whose type carries the continuation bit, except the last.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::transport::msg;

pub const MAX_PAYLOAD: usize = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub msg_type: u8,
    pub payload: Vec<u8>,
}

fn framing<T>(s: impl Into<String>) -> Result<T> {
    Err(Error::Framing(s.into()))
}

pub fn frame_encode(frame: &Frame) -> Result<Vec<u8>> {
    if frame.payload.len() > MAX_PAYLOAD {
        return framing(format!("payload of {} bytes exceeds {MAX_PAYLOAD}", frame.payload.len()));
    }
    if !msg::is_registered(frame.msg_type) {
        return framing(format!("unregistered type 0x{:02x}", frame.msg_type));
    }
    let mut out = Vec::with_capacity(5 + frame.payload.len());
    out.extend_from_slice(&(frame.payload.len() as u32 + 1).to_be_bytes());
    out.push(frame.msg_type);
    out.extend_from_slice(&frame.payload);
    Ok(out)
}

/// Decodes one frame from the front of `bytes`, returning it and the number
/// of bytes consumed.
pub fn frame_decode(bytes: &[u8]) -> Result<(Frame, usize)> {
    if bytes.len() < 5 {
        return framing(format!("truncated header ({} bytes)", bytes.len()));
    }
    let len = u32::from_be_bytes(bytes[..4].try_into().expect("4 bytes")) as usize;
    if len == 0 || len > MAX_PAYLOAD + 1 {
        return framing(format!("bad length {len}"));
    }
    if bytes.len() < 4 + len {
        return framing(format!("truncated frame: {} of {} bytes", bytes.len() - 4, len));
    }
    let msg_type = bytes[4];
    if !msg::is_registered(msg_type) {
        return framing(format!("unregistered type 0x{msg_type:02x}"));
    }
    Ok((Frame { msg_type, payload: bytes[5..4 + len].to_vec() }, 4 + len))
}

/// Writes a message, splitting it with continuation frames when needed.
pub fn write_message<W: Write>(w: &mut W, msg_type: u8, payload: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Session(format!("write: {e}"));
    let mut chunks = payload.chunks(MAX_PAYLOAD).peekable();
    if chunks.peek().is_none() {
        w.write_all(&frame_encode(&Frame { msg_type, payload: Vec::new() })?).map_err(io)?;
    }
    while let Some(chunk) = chunks.next() {
        let ty = if chunks.peek().is_some() { msg_type | msg::CONTINUATION } else { msg_type };
        w.write_all(&frame_encode(&Frame { msg_type: ty, payload: chunk.to_vec() })?).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn read_frame<R: Read>(r: &mut R) -> Result<Frame> {
    let mut header = [0u8; 5];
    r.read_exact(&mut header).map_err(|e| Error::Session(format!("peer disconnected: {e}")))?;
    let len = u32::from_be_bytes(header[..4].try_into().expect("4 bytes")) as usize;
    if len == 0 || len > MAX_PAYLOAD + 1 {
        return framing(format!("bad length {len}"));
    }
    if !msg::is_registered(header[4]) {
        return framing(format!("unregistered type 0x{:02x}", header[4]));
    }
    let mut payload = vec![0u8; len - 1];
    r.read_exact(&mut payload).map_err(|e| Error::Framing(format!("truncated frame: {e}")))?;
    Ok(Frame { msg_type: header[4], payload })
}

/// Reads one message, joining continuation frames.
pub fn read_message<R: Read>(r: &mut R) -> Result<Frame> {
    let mut first = read_frame(r)?;
    let base = first.msg_type & !msg::CONTINUATION;
    let mut more = first.msg_type & msg::CONTINUATION != 0;
    first.msg_type = base;
    while more {
        let next = read_frame(r)?;
        if next.msg_type & !msg::CONTINUATION != base {
            return framing("continuation changed message type");
        }
        more = next.msg_type & msg::CONTINUATION != 0;
        first.payload.extend(next.payload);
    }
    Ok(first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_payload_is_five_bytes() {
        let bytes = frame_encode(&Frame { msg_type: msg::HELLO, payload: vec![] }).unwrap();
        assert_eq!(bytes, vec![0, 0, 0, 1, msg::HELLO]);
    }

    #[test]
    fn short_input_is_a_framing_error() {
        assert!(matches!(frame_decode(&[0, 0, 0]), Err(Error::Framing(_))));
        assert!(matches!(frame_decode(&[0, 0, 0, 0, 1]), Err(Error::Framing(_))));
        assert!(matches!(frame_decode(&[0, 0, 0, 9, msg::HELLO, 1]), Err(Error::Framing(_))));
        assert!(matches!(frame_decode(&[0, 0, 0, 1, 0x7f]), Err(Error::Framing(_))));
    }

    #[test]
    fn oversize_payload_is_refused() {
        let f = Frame { msg_type: msg::HELLO, payload: vec![0; MAX_PAYLOAD + 1] };
        assert!(matches!(frame_encode(&f), Err(Error::Framing(_))));
    }

    #[test]
    fn long_message_uses_continuation_frames() {
        let payload: Vec<u8> = (0..MAX_PAYLOAD + 10).map(|i| i as u8).collect();
        let mut buf = Vec::new();
        write_message(&mut buf, msg::ECNP_OPEN, &payload).unwrap();
        assert_eq!(buf[4], msg::ECNP_OPEN | msg::CONTINUATION);
        let f = read_message(&mut buf.as_slice()).unwrap();
        assert_eq!(f.msg_type, msg::ECNP_OPEN);
        assert_eq!(f.payload, payload);
    }

    proptest! {
        #[test]
        fn round_trip(payload in proptest::collection::vec(any::<u8>(), 0..300), idx in 0usize..40) {
            let (ty, _) = msg::all().nth(idx % msg::all().count()).unwrap();
            let f = Frame { msg_type: ty, payload };
            let bytes = frame_encode(&f).unwrap();
            let (g, used) = frame_decode(&bytes).unwrap();
            prop_assert_eq!(used, bytes.len());
            prop_assert_eq!(g, f);
        }

        #[test]
        fn fuzzed_streams_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let _ = frame_decode(&bytes);
            let _ = read_message(&mut bytes.as_slice());
        }
    }
}
