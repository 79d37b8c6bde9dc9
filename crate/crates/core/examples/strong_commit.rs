//! Strongly extractable commitment: n weak commitments to VSS views, a
//! cut-and-choose audit, decommitment, and the rewinding extractor.
//!
//! cargo run --example strong_commit

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pqext::extcom::{sc_commit_stage, sc_decommit_verify, ScCommitter, ScCommitterStrategy, StrongParams};
use pqext::harness::strong_extract;
use pqext::prg::PrgSpec;
use pqext::transport::Transcript;
use pqext::Bits;

fn main() -> pqext::Result<()> {
    let params = StrongParams::new(10, 3, 8, 32, PrgSpec::production(8)?)?;
    let message = Bits::from_u64(0x0dd_ba11, 32);
    let (mut cr, mut rr) = (ChaCha20Rng::seed_from_u64(1), ChaCha20Rng::seed_from_u64(2));

    let mut transcript = Transcript::new();
    let (session, mut committer, accepted) = sc_commit_stage(&message, &params, &mut cr, &mut rr, &mut transcript)?;
    println!("commit accepted: {accepted}, {} messages", transcript.len());

    // Up to t missing sub-decommitments are tolerated by reconstruction.
    let mut decoms = committer.decommit()?;
    for d in decoms.iter_mut().take(params.t) {
        *d = None;
    }
    let opened = sc_decommit_verify(&session, &decoms);
    println!("opened with {} sub-decommitments erased: {:?}", params.t, opened.map(|m| m.to_hex()));

    // Extraction against a committer with one corrupted view.
    let toy = StrongParams::new(7, 2, 6, 8, PrgSpec::toy(8)?)?;
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let m = Bits::from_u64(0xa7, 8);
    let mut views = ScCommitter::new(&m, &toy, &mut rng)?.views;
    views[4] = Bits::random(views[4].len(), &mut rng);
    for run in 1..=6 {
        let c = ScCommitter::from_view_bits(views.clone(), &toy, &mut rng)?;
        let ex = strong_extract(c, &toy, &mut rng);
        let value = ex.value().map(|v| v.to_hex());
        println!("run {run}: accepted {:?}, extracted {value:?}", ex.accept);
    }
    Ok(())
}
