//! Selective-opening commitments: commit to several messages at once, then
//! reveal any subset chosen by the receiver.
//!
//! cargo run --example selective_opening

use std::collections::BTreeSet;

use pqext::apps::{socom_commit, socom_reveal, SoComCommitter, SoComParams, SoComReceiver};
use pqext::ecnp::EcnpParams;
use pqext::extcom::StrongParams;
use pqext::prg::PrgSpec;
use pqext::transport::Transcript;
use pqext::Bits;

fn main() -> pqext::Result<()> {
    let ecnp = EcnpParams::new(StrongParams::new(4, 1, 4, 1, PrgSpec::toy(8)?)?);
    let params = SoComParams::new(ecnp, 4, 8)?;
    let committer = SoComCommitter::new(params, 1);
    let receiver = SoComReceiver::new(params, 2);
    let messages: Vec<Bits> = [0x11u64, 0x22, 0x33, 0x44].iter().map(|&v| Bits::from_u64(v, 8)).collect();

    let mut transcript = Transcript::new();
    let outcome = socom_commit(Some((&committer, &messages)), Some(&receiver), 7, &mut transcript)?;
    println!("commit under sid 7: {outcome:?}");

    for set in [BTreeSet::from([1, 3]), BTreeSet::from([0])] {
        let opened = socom_reveal(Some(&committer), Some((&receiver, &set)), 7, &mut transcript)?;
        let shown: Vec<String> = opened.unwrap_or_default().iter().map(|(i, m)| format!("m[{i}]={}", m.to_hex())).collect();
        println!("reveal {set:?}: {}", shown.join(" "));
    }
    if let Some(record) = receiver.record(7) {
        let known: Vec<String> = record.messages.iter().map(|m| m.as_ref().map(|m| m.to_hex()).unwrap_or_else(|| "?".into())).collect();
        println!("receiver now knows [{}] after {} messages", known.join(", "), transcript.len());
    }
    Ok(())
}
