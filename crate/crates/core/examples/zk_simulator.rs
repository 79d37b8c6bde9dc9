//! The zero-knowledge simulator: accepting prove-stage transcripts without
//! the witness, and the uniformity of the audited subsets it produces.
//!
//! cargo run --release --example zk_simulator

use pqext::circuit::{compile_target_predicate, Circuit};
use pqext::ecnp::EcnpParams;
use pqext::extcom::StrongParams;
use pqext::harness::{zk_experiment, zk_support_check, ExperimentConfig};
use pqext::prg::PrgSpec;
use pqext::Bits;

fn main() -> pqext::Result<()> {
    let outer = StrongParams::with_options(6, 2, 2, 8, PrgSpec::toy(4)?, 32, 257)?;
    let params = EcnpParams::new(outer);
    let vss = outer.vss();
    let predicate = compile_target_predicate(&Bits::from_u64(0xff, 8), 8, vss.chunk_bits(), &vss.field)?;
    let rep = zk_experiment(&params, &predicate, &ExperimentConfig::default().with_trials(1000))?;
    println!(
        "{} simulated runs, {} accepted, {} attempts; audited subsets chi-square {:.2} (p = {:.3})",
        rep.runs, rep.accepted, rep.attempts, rep.chi_square, rep.p_value
    );

    let square = Circuit::parse("0 input 0\n1 mul 0 0\n2 output 1\n")?;
    let micro = zk_support_check(&square, 4, 5, 1)?;
    println!("micro parameters: {} executions per side, identical supports {}", micro.executions, micro.identical_support);
    Ok(())
}
