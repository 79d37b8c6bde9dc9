//! A commit-and-prove session between two endpoints over TCP, with
//! parameter negotiation and a saved transcript.
//!
//! cargo run --example tcp_session

use std::net::TcpListener;
use std::thread;
use std::time::Duration;

use pqext::prg::PrgBackend;
use pqext::transport::session::{connect_retry, serve};
use pqext::transport::{run_session, ProtocolId, Role, SessionParams};
use pqext::Bits;

fn main() -> pqext::Result<()> {
    let params = SessionParams { lambda: 8, prg: PrgBackend::Production, n: 7, t: 2, len: 16, message: Some(Bits::from_u64(0x1234, 16)), ..Default::default() };
    let listener = TcpListener::bind("127.0.0.1:0").map_err(|e| pqext::Error::Session(e.to_string()))?;
    let addr = listener.local_addr().map_err(|e| pqext::Error::Session(e.to_string()))?.to_string();

    let verifier_params = params.clone();
    let server = thread::spawn(move || serve(listener, 1, move |mut ch| run_session(ProtocolId::Prove, Role::Receiver, &mut ch, &verifier_params, 42)));

    let mut channel = connect_retry(&addr, Duration::from_secs(5))?;
    let prover = run_session(ProtocolId::Prove, Role::Sender, &mut channel, &params, 42)?;
    let verifier = server.join().expect("server thread")?.remove(0)?;

    println!("prover sees: accepted {} ({})", prover.accepted, prover.detail);
    println!("verifier sees: accepted {} ({})", verifier.accepted, verifier.detail);
    println!("transcripts identical: {}", prover.transcript == verifier.transcript);
    let path = std::env::temp_dir().join("pqext-prove.json");
    verifier.transcript.save(&path)?;
    println!("{} messages written to {}", verifier.transcript.len(), path.display());
    Ok(())
}
