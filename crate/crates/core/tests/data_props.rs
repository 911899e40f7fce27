use proptest::prelude::*;

use hypercore::data::{
    decode_dataset, encode_dataset, inject_label_noise, load_csv, load_dataset, save_csv, save_dataset,
    synth_gaussian_mixture, FeatureDataset, NoiseSpec,
};

fn dataset() -> impl Strategy<Value = FeatureDataset> {
    (1usize..6, 2usize..5, 1usize..40).prop_flat_map(|(dim, classes, n)| {
        (
            prop::collection::vec(-1e6f32..1e6, n * dim),
            prop::collection::vec(0..classes as u32, n),
        )
            .prop_map(move |(f, l)| FeatureDataset::new(dim, classes, f, l).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn binary_encoding_round_trips(ds in dataset()) {
        let bytes = encode_dataset(&ds);
        let back = decode_dataset(&bytes).unwrap();
        prop_assert_eq!(encode_dataset(&back), bytes);
        prop_assert_eq!(back, ds);
    }

    #[test]
    fn any_truncation_is_rejected(ds in dataset(), cut in 1usize..64) {
        let bytes = encode_dataset(&ds);
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(decode_dataset(&bytes[..keep]).is_err());
    }

    #[test]
    fn noise_is_exact_and_reversible(seed in any::<u64>(), rate in 0.0f64..=1.0) {
        let clean = synth_gaussian_mixture(4, 25, 3, 3.0, 5).unwrap();
        let (noisy, mask) = inject_label_noise(&clean, NoiseSpec::new(rate, seed).unwrap()).unwrap();
        prop_assert_eq!(mask.flipped.len(), (rate * 100.0).round() as usize);
        for &i in &mask.flipped {
            prop_assert_ne!(noisy.label(i), clean.label(i));
        }
        let flipped: std::collections::HashSet<_> = mask.flipped.iter().copied().collect();
        for i in (0..clean.len()).filter(|i| !flipped.contains(i)) {
            prop_assert_eq!(noisy.label(i), clean.label(i));
        }
        prop_assert_eq!(mask.restore(&noisy).unwrap(), clean.clone());

        let (again, mask_again) = inject_label_noise(&clean, NoiseSpec::new(rate, seed).unwrap()).unwrap();
        prop_assert_eq!(again, noisy);
        prop_assert_eq!(mask_again, mask);
    }
}

#[test]
fn csv_binary_csv_preserves_text() {
    let dir = tempfile::tempdir().unwrap();
    let ds = synth_gaussian_mixture(5, 20, 7, 4.0, 11).unwrap();
    assert_eq!(ds.len(), 100);

    let first = dir.path().join("a.csv");
    let bin = dir.path().join("a.bin");
    let second = dir.path().join("b.csv");
    save_csv(&ds, &first, true).unwrap();
    save_dataset(&load_csv(&first, true).unwrap(), &bin).unwrap();
    save_csv(&load_dataset(&bin).unwrap(), &second, true).unwrap();

    let a = std::fs::read_to_string(&first).unwrap();
    assert_eq!(a, std::fs::read_to_string(&second).unwrap());
    assert_eq!(a.lines().count(), 101);
    assert_eq!(load_dataset(&bin).unwrap(), ds);
}

#[test]
fn generators_are_pure_functions_of_seed() {
    let a = synth_gaussian_mixture(3, 10, 4, 2.0, 77).unwrap();
    let b = synth_gaussian_mixture(3, 10, 4, 2.0, 77).unwrap();
    let c = synth_gaussian_mixture(3, 10, 4, 2.0, 78).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
