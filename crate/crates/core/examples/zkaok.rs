//! Zero-knowledge argument of knowledge of a factorisation of 143.
//!
//! cargo run --example zkaok

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pqext::apps::{relation_holds, zkaok_run};
use pqext::circuit::compile_factor_relation;
use pqext::ecnp::{EcnpParams, EcnpProver, EcnpVerifier};
use pqext::extcom::StrongParams;
use pqext::prg::PrgSpec;
use pqext::transport::Transcript;
use pqext::Bits;

fn main() -> pqext::Result<()> {
    let params = EcnpParams::new(StrongParams::new(4, 1, 4, 16, PrgSpec::toy(8)?)?);
    let relation = compile_factor_relation(143, &params.outer.vss().field)?;
    for (a, b) in [(11u8, 13u8), (1, 143)] {
        let witness = Bits::from_bytes(&[a, b]);
        let holds = relation_holds(&relation, &params, &witness)?;
        let mut prover = EcnpProver::new(&witness, &params, &mut ChaCha20Rng::seed_from_u64(a as u64))?;
        let mut verifier = EcnpVerifier::new(&params, &mut ChaCha20Rng::seed_from_u64(b as u64));
        let verdict = zkaok_run(&relation, Some(&mut prover), Some(&mut verifier), &mut Transcript::disabled())?;
        println!("witness ({a}, {b}): relation {holds}, verifier accepts {} ({:?})", verdict.prove_accept, verdict.failure);
    }
    Ok(())
}
