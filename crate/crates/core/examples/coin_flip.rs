//! Two-party coin flipping: P1 commits to r1, P2 answers with r2, P1
//! announces r1 and proves it matches the commitment.
//!
//! cargo run --example coin_flip

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pqext::apps::{coin_flip_run, CoinCommitter, CoinResponder};
use pqext::ecnp::EcnpParams;
use pqext::extcom::StrongParams;
use pqext::prg::PrgSpec;
use pqext::transport::Transcript;

fn main() -> pqext::Result<()> {
    let params = EcnpParams::new(StrongParams::new(4, 1, 4, 16, PrgSpec::toy(8)?)?);
    for seed in 0..4 {
        let mut p1 = CoinCommitter::new(&params, &mut ChaCha20Rng::seed_from_u64(2 * seed))?;
        let mut p2 = CoinResponder::new(&params, &mut ChaCha20Rng::seed_from_u64(2 * seed + 1));
        let mut transcript = Transcript::new();
        let out = coin_flip_run(Some(&mut p1), Some(&mut p2), &mut transcript)?;
        println!("r1 {} xor r2 {} = r {}", out.r1.to_hex(), out.r2.to_hex(), out.r.to_hex());
    }

    // P1 announcing a value other than the committed one is caught.
    let mut p1 = CoinCommitter::new(&params, &mut ChaCha20Rng::seed_from_u64(10))?;
    let mut lie = p1.prover.message.clone();
    lie.flip(3);
    p1.announce = Some(lie);
    let mut p2 = CoinResponder::new(&params, &mut ChaCha20Rng::seed_from_u64(11));
    match coin_flip_run(Some(&mut p1), Some(&mut p2), &mut Transcript::disabled()) {
        Ok(out) => println!("unexpected success: {}", out.r.to_hex()),
        Err(e) => println!("cheating P1 rejected: {e}"),
    }
    Ok(())
}
