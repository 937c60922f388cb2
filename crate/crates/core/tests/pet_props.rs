use jnsc_core::pet::{
    check_layout, decode, encode, make_layout, pack_bits, unpack_bits, PetManifest, PetProfile,
};
use proptest::prelude::*;

/// Profiles with levels in eighths, so every non-empty segment is a
/// multiple of 8 bits at block length 64.
fn eighths_profile() -> impl Strategy<Value = PetProfile> {
    (1usize..=6, 1u32..=4).prop_flat_map(|(k, half_rate)| {
        proptest::collection::vec(0usize..k, 8).prop_map(move |slots| {
            let mut y = vec![0.0; k];
            for s in slots {
                y[s] += 0.125;
            }
            PetProfile::new(y, half_rate as f64 / 2.0).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_subset_recovers_its_prefix(profile in eighths_profile(), seed in any::<u64>()) {
        let layout = make_layout(&profile, 64).unwrap();
        check_layout(&layout).unwrap();
        let bits: Vec<bool> = (0..layout.source_bits())
            .map(|i| (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1)
            .collect();
        let descriptions = encode(&bits, &layout, &profile).unwrap();
        let k = profile.descriptions();
        for mask in 0u32..(1 << k) {
            let subset: Vec<_> = descriptions
                .iter()
                .filter(|d| mask & (1 << (d.index - 1)) != 0)
                .cloned()
                .collect();
            let got = decode(&subset, &layout, &profile).unwrap();
            prop_assert_eq!(&got[..], &bits[..layout.prefix_len(subset.len())]);
        }
    }

    #[test]
    fn prefixes_are_monotone_and_total(
        levels in proptest::collection::vec(0.0f64..1.0, 1..=8),
        n in 1usize..200,
    ) {
        let s: f64 = levels.iter().sum();
        prop_assume!(s > 1e-6);
        let y: Vec<f64> = levels.iter().map(|v| v / s).collect();
        let profile = PetProfile::new(y, 1.0).unwrap();
        let layout = make_layout(&profile, n).unwrap();
        let xi = layout.source_prefix_lengths();
        prop_assert_eq!(xi[0], 0);
        prop_assert!(xi.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(layout.segment_widths().iter().sum::<usize>(), n);
        prop_assert_eq!(*xi.last().unwrap(), layout.source_bits());
    }

    #[test]
    fn manifest_restores_the_layout(profile in eighths_profile()) {
        let layout = make_layout(&profile, 64).unwrap();
        let bits = vec![true; layout.source_bits()];
        let descriptions = encode(&bits, &layout, &profile).unwrap();
        let manifest = PetManifest::new(&profile, &layout, &descriptions);
        let text = serde_json::to_string(&manifest).unwrap();
        let back: PetManifest = serde_json::from_str(&text).unwrap();
        let (p2, l2) = back.restore().unwrap();
        prop_assert_eq!(p2, profile);
        prop_assert_eq!(l2, layout);
        prop_assert!(descriptions.iter().all(|d| back.verify(d)));
    }

    #[test]
    fn bit_packing_round_trips(bits in proptest::collection::vec(any::<bool>(), 0..100)) {
        prop_assert_eq!(unpack_bits(&pack_bits(&bits), bits.len()), bits);
    }
}
