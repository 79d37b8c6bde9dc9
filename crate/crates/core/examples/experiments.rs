//! The quantitative checks: rewinding bound, sampling tail, and
//! cut-and-choose soundness against an exact miss probability.
//!
//! cargo run --release --example experiments

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pqext::extcom::StrongParams;
use pqext::harness::suite::{unruh_suite, views_with_inconsistent_pairs};
use pqext::harness::{serfling_experiment, soundness_experiment, unruh_bound_experiment, ExperimentConfig};
use pqext::prg::PrgSpec;
use pqext::Bits;

fn main() -> pqext::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for s in unruh_suite(&mut rng).iter().take(6) {
        let r = unruh_bound_experiment(s)?;
        println!("{:>16}: alpha {} beta {} holds {}", r.strategy, r.alpha, r.beta, r.bound_holds);
    }

    let b = Bits::from_bools(&(0..16).map(|i| i % 3 == 0).collect::<Vec<_>>());
    for row in serfling_experiment(&b, 6, &[0.1, 0.2, 0.3], &ExperimentConfig::default())? {
        println!("serfling mu {:.3} delta {}: tail {:.4} <= bound {:.4}", row.mu, row.delta, row.tail, row.bound);
    }

    let edges: Vec<(usize, usize)> = (0..5).map(|i| (2 * i, 2 * i + 1)).collect();
    for t in [4, 6, 8, 10] {
        let params = StrongParams::with_options(30, t, 2, 8, PrgSpec::toy(4)?, 128, 257)?;
        let views = views_with_inconsistent_pairs(&Bits::zeros(8), &params, &edges, &mut rng)?;
        let rep = soundness_experiment(views, &params, &ExperimentConfig::default().with_trials(2000))?;
        println!("t={t:>2}: accepted {:.3}, exact {:.3} (sigma {:.3})", rep.empirical, rep.exact, rep.sigma);
    }
    Ok(())
}
