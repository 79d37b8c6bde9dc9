use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use pqext::base_commit::{base_commit, base_verify, sample_receiver_r, BaseDecommit, Seeds};
use pqext::prg::PrgSpec;
use pqext::transport::{Party, Transcript};
use pqext::vss::{vss_recon, vss_share, ReconInput, VssParams, VssView};
use pqext::wextcom::{w_commit_stage, w_verify_decommit, WDecommit, WParams, WCommitterStrategy};
use pqext::wire::{Decode, Encode};
use pqext::Bits;

fn bits(v: &[bool]) -> Bits {
    Bits::from_bools(v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn base_commitments_open_to_their_message(msg in prop::collection::vec(any::<bool>(), 1..64), lambda in 4usize..=12, toy in any::<bool>(), seed in any::<u64>()) {
        let spec = if toy { PrgSpec::toy(lambda).unwrap() } else { PrgSpec::production(lambda).unwrap() };
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let m = bits(&msg);
        let r = sample_receiver_r(&spec, m.len(), &mut rng);
        let seeds = Seeds::random(&spec, m.len(), &mut rng);
        let (com, decom) = base_commit(&spec, &m, r, seeds).unwrap();
        prop_assert!(base_verify(&com, &m, &decom));
        let again = BaseDecommit::decode(&decom.encode()).unwrap();
        prop_assert!(base_verify(&com, &m, &again));
    }

    #[test]
    fn weak_commitments_decommit_honestly(msg in prop::collection::vec(any::<bool>(), 1..24), k in 1usize..6, seed in any::<u64>()) {
        let params = WParams::new(k, msg.len(), PrgSpec::production(8).unwrap()).unwrap();
        let (mut cr, mut rr) = (ChaCha20Rng::seed_from_u64(seed), ChaCha20Rng::seed_from_u64(!seed));
        let m = bits(&msg);
        let (com, mut committer, ok) = w_commit_stage(&m, &params, &mut cr, &mut rr, &mut Transcript::disabled()).unwrap();
        prop_assert!(ok);
        let d = committer.decommit().unwrap();
        prop_assert!(w_verify_decommit(&com, &m, &WDecommit::decode(&d.encode()).unwrap()));
        let mut other = m.clone();
        other.flip(0);
        prop_assert!(!w_verify_decommit(&com, &other, &d));
    }

    #[test]
    fn vss_tolerates_erasures_up_to_the_threshold(msg in prop::collection::vec(any::<bool>(), 1..40), seed in any::<u64>(), erase in prop::collection::btree_set(0usize..7, 0..=2)) {
        let params = VssParams::new(7, 2, 257).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let m = bits(&msg);
        let (views, _) = vss_share(&m, &params, &mut rng).unwrap();
        for v in &views {
            prop_assert_eq!(&VssView::decode(&v.encode()).unwrap(), v);
        }
        let slots = views.into_iter().enumerate().map(|(i, v)| (!erase.contains(&i)).then_some(v)).collect();
        prop_assert_eq!(vss_recon(&ReconInput { params, message_bits: m.len(), views: slots }), Some(m));
    }

    #[test]
    fn transcripts_survive_json(records in prop::collection::vec((any::<bool>(), 0x10u8..0x16, prop::collection::vec(any::<u8>(), 0..40)), 0..12)) {
        let mut t = Transcript::new();
        for (p1, ty, payload) in &records {
            t.push(if *p1 { Party::P1 } else { Party::P2 }, *ty, payload);
        }
        let back = Transcript::from_json(&t.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), t.to_json());
        prop_assert_eq!(back.len(), records.len());
    }
}
