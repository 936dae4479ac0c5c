mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};

use attractor_core::{ActivationSet, PromptMeta};
use attractor_kit::{decode, encode, read_container, write_container, ContainerError};
use common::*;
use proptest::prelude::*;

fn set_234() -> ActivationSet {
    let prompts = vec![PromptMeta::new("p0", "star_wars"), PromptMeta::new("p1", "dune")];
    ActivationSet::new(vec![0, 12, 24], 4, prompts, (0..24).map(|i| i as f32).collect()).unwrap()
}

#[test]
fn shape_is_read_back() {
    let set = decode(&encode(&set_234()).unwrap()).unwrap();
    assert_eq!(set.shape(), (2, 3, 4));
    assert_eq!(set, set_234());
}

#[test]
fn short_payload_is_a_header_mismatch() {
    let mut bytes = encode(&set_234()).unwrap();
    bytes.truncate(bytes.len() - 4);
    assert!(matches!(decode(&bytes), Err(ContainerError::HeaderMismatch(_))));
    bytes.extend_from_slice(&[0; 8]);
    assert!(matches!(decode(&bytes), Err(ContainerError::HeaderMismatch(_))));
}

#[test]
fn wrong_signature_or_version() {
    assert!(matches!(decode(b"NOPE\x01\0\0\0\0"), Err(ContainerError::BadMagic(_))));
    assert!(matches!(decode(b"ACT"), Err(ContainerError::BadMagic(_))));
    let mut bytes = encode(&set_234()).unwrap();
    bytes[4] = 2;
    assert!(matches!(decode(&bytes), Err(ContainerError::BadMagic(_))));
}

#[test]
fn non_finite_set_is_refused_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.actv");
    let mut data: Vec<f32> = vec![0.5; 24];
    data[13] = f32::NAN;
    let set = ActivationSet::new_unchecked(vec![0, 12, 24], 4, set_234().prompts().to_vec(), data);
    let err = write_container(&set, &path).unwrap_err();
    assert!(
        matches!(
            err,
            ContainerError::NonFinite {
                prompt: 1,
                slot: 0,
                dim: 1
            }
        ),
        "{err:?}"
    );
    assert_eq!(err.name(), "NonFinite");
    assert!(!path.exists());
}

#[test]
fn duplicate_ids_are_reported() {
    let mut bytes = encode(&set_234()).unwrap();
    // same length, so the header length field stays valid
    let at = bytes.windows(4).position(|w| w == b"\"p1\"").unwrap();
    bytes[at + 2] = b'0';
    let err = decode(&bytes).unwrap_err();
    assert!(
        matches!(err, ContainerError::DuplicatePromptId(ref id) if id == "p0"),
        "{err:?}"
    );
}

#[test]
fn file_round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.actv");
    let b = dir.path().join("b.actv");
    let set = random_set(3, 5, 4, 7, 2);
    write_container(&set, &a).unwrap();
    write_container(&read_container(&a).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(matches!(
        read_container(dir.path().join("missing")),
        Err(ContainerError::Io(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn round_trip(seed in any::<u64>(), n in 1usize..=16, l in 1usize..=16, d in 1usize..=16, c in 1usize..=4) {
        let set = random_set(seed, n, l, d, c);
        let bytes = encode(&set).unwrap();
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(&back, &set);
        prop_assert_eq!(encode(&back).unwrap(), bytes);
    }
}

#[test]
fn mutated_containers_never_panic() {
    let base = encode(&random_set(11, 4, 3, 5, 2)).unwrap();
    let mut r = rng(2024);
    let mut rejected = 0;
    for _ in 0..10_000 {
        let m = mutate(&base, &mut r);
        let out = catch_unwind(AssertUnwindSafe(|| decode(&m)));
        match out.expect("decoder panicked") {
            Ok(set) => set.validate().unwrap(),
            Err(e) => {
                rejected += 1;
                assert_ne!(e.name(), "IoFailure");
            }
        }
    }
    assert!(rejected > 5_000);
}
