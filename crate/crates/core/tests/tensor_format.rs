use std::io::Cursor;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use chansel::tensorio::{
    decode_dataset, encode_dataset, load_dataset, read_dataset, save_dataset, Dataset, TensorError,
    HEADER_LEN,
};

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (0usize..6, 1usize..5, 1usize..9).prop_flat_map(|(n, c, t)| {
        (
            proptest::collection::vec(any::<u32>(), n * c * t),
            proptest::collection::vec(0u16..4, n),
            proptest::collection::vec(any::<bool>(), n),
            1.0f64..5000.0,
        )
            .prop_map(move |(bits, labels, flags, rate)| {
                // Raw bit patterns cover NaN payloads, infinities and subnormals.
                let data = bits.into_iter().map(f32::from_bits).collect();
                Dataset::new((n, c, t), data, labels, flags, rate).unwrap()
            })
    })
}

fn bits(d: &Dataset) -> Vec<u32> {
    d.data().iter().map(|x| x.to_bits()).collect()
}

proptest! {
    #[test]
    fn encode_decode_is_bit_exact(d in arb_dataset()) {
        let back = decode_dataset(&encode_dataset(&d)).unwrap();
        prop_assert_eq!(back.shape(), d.shape());
        prop_assert_eq!(bits(&back), bits(&d));
        prop_assert_eq!(back.labels(), d.labels());
        prop_assert_eq!(back.artifact_flags(), d.artifact_flags());
        prop_assert_eq!(back.sample_rate_hz().to_bits(), d.sample_rate_hz().to_bits());
    }

    #[test]
    fn every_strict_prefix_is_rejected(d in arb_dataset(), cut in any::<prop::sample::Index>()) {
        let bytes = encode_dataset(&d);
        let len = cut.index(bytes.len());
        prop_assert!(decode_dataset(&bytes[..len]).is_err());
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..256)) {
        let _ = decode_dataset(&bytes);
    }
}

#[test]
fn large_random_dataset_round_trips_through_a_file() {
    let (n, c, t) = (10, 22, 1125);
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    let data: Vec<f32> = (0..n * c * t)
        .map(|_| rng.random_range(-150.0..150.0))
        .collect();
    let labels = (0..n).map(|_| rng.random_range(0..4)).collect();
    let flags = (0..n).map(|_| rng.random_bool(0.2)).collect();
    let d = Dataset::new((n, c, t), data, labels, flags, 250.0).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.sft");
    save_dataset(&d, &path).unwrap();
    let len = std::fs::metadata(&path).unwrap().len() as usize;
    assert_eq!(len, HEADER_LEN + 3 * n + 4 * n * c * t);
    let back = load_dataset(&path).unwrap();
    assert_eq!(back, d);
}

#[test]
fn hand_built_file_decodes() {
    // Independent byte layout: one trial, two channels, two samples.
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"SFTENS01");
    for v in [1u32, 1, 2, 2, 1] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend_from_slice(&160.0f64.to_le_bytes());
    bytes.extend_from_slice(&3u16.to_le_bytes());
    bytes.push(1);
    for x in [1.5f32, -2.0, 0.25, 8.0] {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    let d = decode_dataset(&bytes).unwrap();
    assert_eq!(d.shape(), (1, 2, 2));
    assert_eq!(d.series(0, 1), &[0.25, 8.0]);
    assert_eq!(d.labels(), &[3]);
    assert_eq!(d.artifact_flags(), &[true]);
    assert_eq!(d.sample_rate_hz(), 160.0);
    assert_eq!(encode_dataset(&d), bytes);
}

#[test]
fn stream_reader_leaves_following_bytes_untouched() {
    let a = Dataset::new((1, 1, 3), vec![1.0, 2.0, 3.0], vec![0], vec![false], 100.0).unwrap();
    let b = Dataset::new(
        (2, 1, 1),
        vec![7.0, 8.0],
        vec![1, 0],
        vec![true, false],
        50.0,
    )
    .unwrap();
    let mut stream = encode_dataset(&a);
    stream.extend(encode_dataset(&b));
    let mut cursor = Cursor::new(stream);
    assert_eq!(read_dataset(&mut cursor).unwrap(), a);
    assert_eq!(read_dataset(&mut cursor).unwrap(), b);
}

#[test]
fn load_reports_trailing_bytes_and_missing_files() {
    let d = Dataset::new((1, 1, 1), vec![0.0], vec![0], vec![false], 1.0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.sft");
    let mut bytes = encode_dataset(&d);
    bytes.extend_from_slice(&[0, 0]);
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(
        load_dataset(&path),
        Err(TensorError::TrailingData { extra: 2, .. })
    ));
    assert!(matches!(
        load_dataset(dir.path().join("missing.sft")),
        Err(TensorError::Io(_))
    ));
}
