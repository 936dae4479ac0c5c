mod common;

use attractor_core::attractor::{estimate_attractor, Attractor};
use attractor_core::steering::{
    apply_spec, build_add_spec, build_drift_spec, build_reinforce_spec, build_switch_spec, perturb_attractor, ApplyAt,
    SteeringMode, SteeringSpec,
};
use attractor_core::Error;
use common::*;
use proptest::prelude::*;

fn attr(layer: u32, v: Vec<f64>) -> Attractor {
    Attractor {
        concept: "x".into(),
        layer,
        vector: v,
        support: 4,
        spread: Some(0.2),
        spread_euclidean: 0.7,
    }
}

fn vec_strategy(d: usize) -> impl Strategy<Value = Vec<f32>> {
    prop::collection::vec(-10.0f32..10.0, d)
}

fn all_specs(y: &[f32], src: &[f32], lambda: f32) -> Vec<SteeringSpec> {
    let a = attr(4, y.iter().map(|&v| v.into()).collect());
    let s = attr(4, src.iter().map(|&v| v.into()).collect());
    vec![
        build_add_spec(&a, lambda, None).unwrap(),
        build_drift_spec(&a, lambda, None).unwrap(),
        build_switch_spec(&s, &a, lambda).unwrap(),
        build_reinforce_spec(4, lambda).unwrap(),
    ]
}

fn close(a: &[f32], b: &[f32], tol: f32) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())))
}

#[test]
fn drift_spec_for_layer_16() {
    let s = build_drift_spec(&attr(16, vec![0.5, -1.0]), 1.0, None).unwrap();
    assert_eq!(
        (s.mode, s.layer, s.apply_at),
        (SteeringMode::Subtract, 16, ApplyAt::AllPositions)
    );
    assert_eq!(s.target_vector.as_deref(), Some(&[0.5f32, -1.0][..]));
    assert_eq!(s, build_drift_spec(&attr(16, vec![0.5, -1.0]), 1.0, None).unwrap());
    let custom = build_drift_spec(&attr(16, vec![1.0]), 1.0, Some(ApplyAt::PrefillLast)).unwrap();
    assert_eq!(custom.apply_at, ApplyAt::PrefillLast);
}

#[test]
fn switch_spec_rules() {
    let py = attr(19, vec![1.0, 0.0, 2.0]);
    let java = attr(19, vec![0.0, 1.0, 2.0]);
    let s = build_switch_spec(&py, &java, 1.0).unwrap();
    assert_eq!((s.layer, s.apply_at), (19, ApplyAt::AllPositions));
    let h = [0.1f32, 0.2, 0.3];
    let same = build_switch_spec(&py, &py, 3.0).unwrap();
    assert_eq!(apply_spec(&same, &h, None).unwrap(), h.to_vec());
    let fwd = apply_spec(&s, &[0.0; 3], None).unwrap();
    let back = apply_spec(&build_switch_spec(&java, &py, 1.0).unwrap(), &[0.0; 3], None).unwrap();
    assert_eq!(fwd, back.iter().map(|v| -v).collect::<Vec<_>>());
    assert!(matches!(
        build_switch_spec(&py, &attr(20, vec![0.0, 1.0, 2.0]), 1.0),
        Err(Error::LayerMismatch { .. })
    ));
    assert!(matches!(
        build_switch_spec(&py, &attr(19, vec![0.0, 1.0]), 1.0),
        Err(Error::DimMismatch { .. })
    ));
}

#[test]
fn switch_hand_arithmetic() {
    let src = attr(2, vec![1.0, 1.0, 1.0]);
    let tgt = attr(2, vec![2.0, 1.0, 1.0]);
    let s = build_switch_spec(&src, &tgt, 2.0).unwrap();
    assert_eq!(apply_spec(&s, &[0.0; 3], None).unwrap(), vec![2.0, 0.0, 0.0]);
}

#[test]
fn reinforce_spec_needs_runtime_anchor() {
    let s = build_reinforce_spec(8, 0.5).unwrap();
    assert_eq!(
        (s.mode, s.apply_at, s.target_vector.is_none()),
        (SteeringMode::ReinforceInitial, ApplyAt::DecodeSteps, true)
    );
    assert_eq!(s, build_reinforce_spec(8, 0.5).unwrap());
    assert_eq!(apply_spec(&s, &[1.0, 1.0], None), Err(Error::MissingAnchor));
    assert_eq!(apply_spec(&s, &[1.0, 1.0], Some(&[2.0, 4.0])).unwrap(), vec![2.0, 3.0]);
    let zero = build_reinforce_spec(8, 0.0).unwrap();
    assert_eq!(
        apply_spec(&zero, &[1.0, -1.0], Some(&[9.0, 9.0])).unwrap(),
        vec![1.0, -1.0]
    );
}

#[test]
fn invalid_lambda_is_rejected() {
    assert!(build_reinforce_spec(1, -0.1).is_err());
    assert!(build_drift_spec(&attr(1, vec![1.0]), f32::NAN, None).is_err());
}

#[test]
fn dim_mismatch_on_apply() {
    let s = build_add_spec(&attr(1, vec![1.0, 2.0]), 1.0, None).unwrap();
    assert!(matches!(apply_spec(&s, &[1.0], None), Err(Error::DimMismatch { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn zero_lambda_is_identity(h in vec_strategy(6), y in vec_strategy(6), src in vec_strategy(6), anchor in vec_strategy(6)) {
        for spec in all_specs(&y, &src, 0.0) {
            prop_assert_eq!(apply_spec(&spec, &h, Some(&anchor)).unwrap(), h.clone());
        }
    }

    #[test]
    fn subtract_undoes_add(h in vec_strategy(8), y in vec_strategy(8), lambda in 0.0f32..5.0) {
        let a = attr(3, y.iter().map(|&v| v.into()).collect());
        let add = build_add_spec(&a, lambda, None).unwrap();
        let sub = build_drift_spec(&a, lambda, None).unwrap();
        let back = apply_spec(&add, &apply_spec(&sub, &h, None).unwrap(), None).unwrap();
        // f32 rounding error scales with the largest intermediate magnitude
        let within = |back: &[f32]| {
            back.iter().zip(&h).zip(&y).all(|((a, b), v)| (a - b).abs() <= 1e-6 * (1.0f32).max(b.abs() + lambda * v.abs()))
        };
        prop_assert!(within(&back), "{back:?} vs {h:?}");
        let back = apply_spec(&sub, &apply_spec(&add, &h, None).unwrap(), None).unwrap();
        prop_assert!(within(&back));
    }

    #[test]
    fn update_is_affine(u in vec_strategy(5), v in vec_strategy(5), y in vec_strategy(5), src in vec_strategy(5), anchor in vec_strategy(5), lambda in 0.0f32..3.0) {
        let sum: Vec<f32> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        for spec in all_specs(&y, &src, lambda) {
            let f = |h: &[f32]| apply_spec(&spec, h, Some(&anchor)).unwrap();
            let (fs, fu, fv, f0) = (f(&sum), f(&u), f(&v), f(&[0.0; 5]));
            for i in 0..5 {
                let r = fs[i] - fu[i] - fv[i] + f0[i];
                prop_assert!(r.abs() <= 1e-5 * (1.0 + fs[i].abs() + fu[i].abs() + fv[i].abs() + f0[i].abs()));
            }
        }
    }

    #[test]
    fn add_composes(h in vec_strategy(6), y in vec_strategy(6), l1 in 0.0f32..3.0, l2 in 0.0f32..3.0) {
        let a = attr(0, y.iter().map(|&v| v.into()).collect());
        let two = apply_spec(&build_add_spec(&a, l2, None).unwrap(), &apply_spec(&build_add_spec(&a, l1, None).unwrap(), &h, None).unwrap(), None).unwrap();
        let one = apply_spec(&build_add_spec(&a, l1 + l2, None).unwrap(), &h, None).unwrap();
        prop_assert!(close(&two, &one, 1e-5), "{two:?} vs {one:?}");
    }
}

#[test]
fn zero_rho_returns_the_attractor() {
    let a = attr(1, vec![0.25, -3.0, 7.5]);
    let p = perturb_attractor(&a, 0.0, 12).unwrap();
    assert_eq!(p.vector, a.vector);
    assert_eq!(p.sigma, 0.0);
}

#[test]
fn perturbation_is_seeded() {
    let a = attr(1, vec![0.0; 16]);
    assert_eq!(
        perturb_attractor(&a, 0.5, 3).unwrap(),
        perturb_attractor(&a, 0.5, 3).unwrap()
    );
    assert_ne!(
        perturb_attractor(&a, 0.5, 3).unwrap().vector,
        perturb_attractor(&a, 0.5, 4).unwrap().vector
    );
    assert!(perturb_attractor(&a, -1.0, 3).is_err());
}

#[test]
fn sigma_follows_estimated_spread() {
    let mut r = rng(31);
    let rows = (0..10)
        .map(|_| Row {
            concept: "k".into(),
            states: vec![(0..4).map(|_| normal(&mut r)).collect()],
        })
        .collect();
    let set = build_set(vec![5], rows);
    let a = estimate_attractor(&set, "k", 5).unwrap();
    // oracle: mean Euclidean distance of supporters to their mean
    let spread: f64 = (0..10)
        .map(|p| {
            set.vector(p, 0)
                .iter()
                .zip(&a.vector)
                .map(|(&x, m)| (f64::from(x) - m).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum::<f64>()
        / 10.0;
    let p = perturb_attractor(&a, 0.5, 0).unwrap();
    assert!((p.sigma - 0.5 * spread).abs() < 1e-12);
}

#[test]
fn perturbation_statistics() {
    let a = attr(1, vec![1.0, -2.0, 0.5, 3.0, 0.0, -0.25]);
    let n = 10_000;
    let sigma = a.spread_euclidean;
    let d = a.vector.len();
    let mut sum = vec![0.0; d];
    let mut sq = vec![0.0; d];
    for seed in 0..n {
        let p = perturb_attractor(&a, 1.0, seed).unwrap();
        assert_eq!(p.sigma, sigma);
        for i in 0..d {
            let dev = p.vector[i] - a.vector[i];
            sum[i] += dev;
            sq[i] += dev * dev;
        }
    }
    let n = n as f64;
    for i in 0..d {
        let mean = sum[i] / n;
        let std = ((sq[i] - n * mean * mean) / (n - 1.0)).sqrt();
        assert!(
            mean.abs() <= 3.0 * sigma / n.sqrt(),
            "coordinate {i}: mean offset {mean}"
        );
        assert!((std - sigma).abs() <= 0.05 * sigma, "coordinate {i}: std {std}");
    }
}
