//! Commit to a message, then prove in zero knowledge that it satisfies a
//! public predicate: here, that its top byte is 0xca.
//!
//! cargo run --example commit_and_prove

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pqext::circuit::compile_equality_predicate;
use pqext::ecnp::{ecnp_commit_stage, ecnp_decommit_stage, ecnp_prove_stage, EcnpParams};
use pqext::extcom::StrongParams;
use pqext::prg::PrgSpec;
use pqext::transport::Transcript;
use pqext::Bits;

fn main() -> pqext::Result<()> {
    let params = EcnpParams::new(StrongParams::new(7, 2, 8, 16, PrgSpec::production(8)?)?);
    let vss = params.outer.vss();
    let top = Bits::from_u64(0xca, 8);
    let constraints: Vec<Option<bool>> = (0..16).map(|i| (i < 8).then(|| top.get(i))).collect();
    let predicate = compile_equality_predicate(&constraints, vss.chunk_bits(), &vss.field)?;

    for (label, value) in [("true statement", 0xca11u64), ("false statement", 0xfe11)] {
        let message = Bits::from_u64(value, 16);
        let (mut pr, mut vr) = (ChaCha20Rng::seed_from_u64(1), ChaCha20Rng::seed_from_u64(2));
        let mut transcript = Transcript::new();
        let (mut prover, mut verifier, committed) = ecnp_commit_stage(&message, &params, &mut pr, &mut vr, &mut transcript)?;
        let verdict = ecnp_prove_stage(&mut prover, &mut verifier, &predicate, &mut transcript);
        println!("{label}: commit {committed}, prove {}, audited views {:?}, {:?}", verdict.prove_accept, verdict.subset, verdict.failure);
        if verdict.prove_accept {
            let opened = ecnp_decommit_stage(&mut prover, &verifier, &mut transcript);
            println!("  later opened to {:?} after {} messages", opened.map(|m| m.to_hex()), transcript.len());
        }
    }
    Ok(())
}
