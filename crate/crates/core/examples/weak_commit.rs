//! Weakly extractable commitment: commit, open, and extract by rewinding.
//!
//! cargo run --example weak_commit

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pqext::harness::simless_extract;
use pqext::prg::PrgSpec;
use pqext::transport::Transcript;
use pqext::wextcom::{w_commit_stage, w_decommit_run, WCommitter, WParams};
use pqext::Bits;

fn main() -> pqext::Result<()> {
    let params = WParams::new(8, 16, PrgSpec::production(16)?)?;
    let message = Bits::from_u64(0xbeef, 16);
    let (mut committer_rng, mut receiver_rng) = (ChaCha20Rng::seed_from_u64(1), ChaCha20Rng::seed_from_u64(2));

    let mut transcript = Transcript::new();
    let (com, mut committer, accepted) = w_commit_stage(&message, &params, &mut committer_rng, &mut receiver_rng, &mut transcript)?;
    println!("commit stage accepted: {accepted} ({} messages)", transcript.len());

    let opened = w_decommit_run(Some(&mut committer), Some(&com), &mut transcript)?;
    println!("opened to {}", opened.map(|m| m.to_hex()).unwrap_or_else(|| "nothing".into()));

    // The extractor runs the committer twice from the same state with two
    // challenges and combines the two openings of a differing pair.
    let toy = WParams::new(4, 16, PrgSpec::toy(8)?)?;
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for attempt in 1..=5 {
        let adversary = WCommitter::new(&message, &toy, &mut rng)?;
        let out = simless_extract(adversary, &toy, &mut rng);
        match out.value {
            Some(v) => {
                println!("extracted {} on attempt {attempt}", v.to_hex());
                break;
            }
            None => println!("attempt {attempt}: the two challenges coincided, no output"),
        }
    }
    Ok(())
}
