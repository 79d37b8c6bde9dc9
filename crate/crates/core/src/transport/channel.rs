//! Duplex message channels: in-memory and TCP.

use std::io::{BufReader, BufWriter};
use std::net::TcpStream;
use std::sync::mpsc::{channel, Receiver, Sender};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::transport::frame::{read_message, write_message, Frame};

pub trait Channel: Send {
    fn send(&mut self, msg_type: u8, payload: &[u8]) -> Result<()>;
    fn recv(&mut self) -> Result<Frame>;
}

/// One end of an in-process channel. Messages travel as framed bytes so the
/// same decoder runs as over TCP.
pub struct MemChannel {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    timeout: Duration,
}

pub fn mem_pair() -> (MemChannel, MemChannel) {
    let (atx, brx) = channel();
    let (btx, arx) = channel();
    let timeout = Duration::from_secs(600);
    (MemChannel { tx: atx, rx: arx, timeout }, MemChannel { tx: btx, rx: brx, timeout })
}

impl Channel for MemChannel {
    fn send(&mut self, msg_type: u8, payload: &[u8]) -> Result<()> {
        let mut buf = Vec::with_capacity(payload.len() + 5);
        write_message(&mut buf, msg_type, payload)?;
        self.tx.send(buf).map_err(|_| Error::Session("peer disconnected".into()))
    }

    fn recv(&mut self) -> Result<Frame> {
        let buf = self.rx.recv_timeout(self.timeout).map_err(|e| Error::Session(format!("peer disconnected: {e}")))?;
        read_message(&mut buf.as_slice())
    }
}

pub struct TcpChannel {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
}

impl TcpChannel {
    pub fn new(stream: TcpStream) -> Result<Self> {
        let io = |e: std::io::Error| Error::Session(e.to_string());
        stream.set_nodelay(true).map_err(io)?;
        let reader = BufReader::new(stream.try_clone().map_err(io)?);
        Ok(TcpChannel { reader, writer: BufWriter::new(stream) })
    }

    pub fn connect(addr: &str) -> Result<Self> {
        let stream = TcpStream::connect(addr).map_err(|e| Error::Session(format!("connect {addr}: {e}")))?;
        Self::new(stream)
    }
}

impl Channel for TcpChannel {
    fn send(&mut self, msg_type: u8, payload: &[u8]) -> Result<()> {
        write_message(&mut self.writer, msg_type, payload)
    }

    fn recv(&mut self) -> Result<Frame> {
        read_message(&mut self.reader)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::msg;
    use std::net::TcpListener;

    #[test]
    fn memory_pair_delivers_in_order() {
        let (mut a, mut b) = mem_pair();
        a.send(msg::W_COMS, b"one").unwrap();
        a.send(msg::W_OPENING, b"").unwrap();
        assert_eq!(b.recv().unwrap(), Frame { msg_type: msg::W_COMS, payload: b"one".to_vec() });
        assert_eq!(b.recv().unwrap().msg_type, msg::W_OPENING);
        drop(a);
        assert!(matches!(b.recv(), Err(Error::Session(_))));
    }

    #[test]
    fn tcp_round_trip() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        let h = std::thread::spawn(move || {
            let (s, _) = listener.accept().unwrap();
            let mut ch = TcpChannel::new(s).unwrap();
            let f = ch.recv().unwrap();
            ch.send(f.msg_type, &f.payload.iter().rev().copied().collect::<Vec<_>>()).unwrap();
        });
        let mut ch = TcpChannel::connect(&addr).unwrap();
        ch.send(msg::HELLO, &[1, 2, 3]).unwrap();
        assert_eq!(ch.recv().unwrap().payload, vec![3, 2, 1]);
        h.join().unwrap();
    }
}
