//! Bivariate verifiable secret sharing: share, drop and corrupt views,
//! reconstruct with error correction.
//!
//! cargo run --example vss_sharing

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pqext::vss::{vss_recon, vss_share, vss_view_consistent, ReconInput, VssParams};
use pqext::Bits;

fn main() -> pqext::Result<()> {
    let params = VssParams::new(7, 2, 257)?;
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let message = Bits::from_u64(0x5eed_cafe, 32);
    let (views, _) = vss_share(&message, &params, &mut rng)?;
    println!("{} views, pairwise consistent: {}", views.len(), vss_view_consistent(&views[0], &views[1])?);

    let (other, _) = vss_share(&Bits::from_u64(0xdead_beef, 32), &params, &mut rng)?;
    let mut slots: Vec<_> = views.into_iter().map(Some).collect();
    slots[1] = None;
    slots[5] = Some(other[5].clone());
    let out = vss_recon(&ReconInput { params, message_bits: 32, views: slots });
    println!("one view missing, one foreign: reconstructed {:?}", out.map(|m| m.to_hex()));
    Ok(())
}
