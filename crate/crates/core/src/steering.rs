//! Steering specifications and their reference update rule.
//!
//! The continuous drift `dx/dt = f(x) + λ(y − x)` is discretised as a
//! constant-vector update applied to the hidden state at one layer:
//!
//! | mode                | update                  |
//! |---------------------|-------------------------|
//! | `add`               | `h + λ·y`               |
//! | `subtract`          | `h − λ·y`               |
//! | `switch`            | `h + λ·(y − y_src)`     |
//! | `reinforce_initial` | `h + λ·anchor`          |
//!
//! [`apply_spec`] evaluates these in `f32`, element by element, in exactly
//! the order written above. Hooks in an inference runtime must do the same
//! to match bit for bit.

use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::attractor::Attractor;
use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteeringMode {
    Add,
    Subtract,
    Switch,
    ReinforceInitial,
}

impl SteeringMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SteeringMode::Add => "add",
            SteeringMode::Subtract => "subtract",
            SteeringMode::Switch => "switch",
            SteeringMode::ReinforceInitial => "reinforce_initial",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "add" => SteeringMode::Add,
            "subtract" => SteeringMode::Subtract,
            "switch" => SteeringMode::Switch,
            "reinforce_initial" => SteeringMode::ReinforceInitial,
            _ => return None,
        })
    }
}

/// Token positions a hook applies the update to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyAt {
    PrefillLast,
    AllPositions,
    DecodeSteps,
}

impl ApplyAt {
    pub fn as_str(self) -> &'static str {
        match self {
            ApplyAt::PrefillLast => "prefill_last",
            ApplyAt::AllPositions => "all_positions",
            ApplyAt::DecodeSteps => "decode_steps",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "prefill_last" => ApplyAt::PrefillLast,
            "all_positions" => ApplyAt::AllPositions,
            "decode_steps" => ApplyAt::DecodeSteps,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringSpec {
    pub layer: u32,
    pub mode: SteeringMode,
    pub lambda: f32,
    pub target_vector: Option<Vec<f32>>,
    pub source_vector: Option<Vec<f32>>,
    pub apply_at: ApplyAt,
}

impl SteeringSpec {
    /// Checks the vector-presence rules of each mode and finiteness.
    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() {
            return Err(Error::NonFiniteInput("lambda"));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        let need_target = self.mode != SteeringMode::ReinforceInitial;
        let need_source = self.mode == SteeringMode::Switch;
        if self.target_vector.is_some() != need_target {
            return Err(Error::InvalidArgument(format!(
                "mode {} {} a target vector",
                self.mode.as_str(),
                if need_target { "requires" } else { "must not carry" }
            )));
        }
        if self.source_vector.is_some() != need_source {
            return Err(Error::InvalidArgument(format!(
                "mode {} {} a source vector",
                self.mode.as_str(),
                if need_source { "requires" } else { "must not carry" }
            )));
        }
        if let (Some(t), Some(s)) = (&self.target_vector, &self.source_vector) {
            check_dim(t.len(), s.len())?;
        }
        for v in self.target_vector.iter().chain(&self.source_vector) {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteInput("steering vector"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> Option<usize> {
        self.target_vector.as_ref().map(Vec::len)
    }
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

fn check_lambda(lambda: f32) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "lambda must be finite and non-negative, got {lambda}"
        )))
    }
}

/// Pushes states toward an attractor: `h + λ·a`.
pub fn build_add_spec(attr: &Attractor, lambda: f32, apply_at: Option<ApplyAt>) -> Result<SteeringSpec> {
    check_lambda(lambda)?;
    Ok(SteeringSpec {
        layer: attr.layer,
        mode: SteeringMode::Add,
        lambda,
        target_vector: Some(to_f32(&attr.vector)),
        source_vector: None,
        apply_at: apply_at.unwrap_or(ApplyAt::AllPositions),
    })
}

/// Drift away from an attractor: `h − λ·a` at every token position by default.
pub fn build_drift_spec(attr: &Attractor, lambda: f32, apply_at: Option<ApplyAt>) -> Result<SteeringSpec> {
    check_lambda(lambda)?;
    Ok(SteeringSpec {
        layer: attr.layer,
        mode: SteeringMode::Subtract,
        lambda,
        target_vector: Some(to_f32(&attr.vector)),
        source_vector: None,
        apply_at: apply_at.unwrap_or(ApplyAt::AllPositions),
    })
}

/// Move from the `source` attractor to the `target` attractor.
pub fn build_switch_spec(source: &Attractor, target: &Attractor, lambda: f32) -> Result<SteeringSpec> {
    check_lambda(lambda)?;
    if source.layer != target.layer {
        return Err(Error::LayerMismatch {
            expected: source.layer,
            found: target.layer,
        });
    }
    check_dim(source.dim(), target.dim())?;
    Ok(SteeringSpec {
        layer: target.layer,
        mode: SteeringMode::Switch,
        lambda,
        target_vector: Some(to_f32(&target.vector)),
        source_vector: Some(to_f32(&source.vector)),
        apply_at: ApplyAt::AllPositions,
    })
}

/// Re-add the state captured on the first generation step at every decode step.
pub fn build_reinforce_spec(layer: u32, lambda: f32) -> Result<SteeringSpec> {
    check_lambda(lambda)?;
    Ok(SteeringSpec {
        layer,
        mode: SteeringMode::ReinforceInitial,
        lambda,
        target_vector: None,
        source_vector: None,
        apply_at: ApplyAt::DecodeSteps,
    })
}

/// Reference update for one hidden state.
pub fn apply_spec(spec: &SteeringSpec, hidden: &[f32], anchor: Option<&[f32]>) -> Result<Vec<f32>> {
    let lambda = spec.lambda;
    let missing = || Error::InvalidArgument(format!("spec of mode {} lacks its vector", spec.mode.as_str()));
    match spec.mode {
        SteeringMode::Add | SteeringMode::Subtract => {
            let y = spec.target_vector.as_deref().ok_or_else(missing)?;
            check_dim(y.len(), hidden.len())?;
            let sign = if spec.mode == SteeringMode::Add { 1.0f32 } else { -1.0 };
            Ok(hidden
                .iter()
                .zip(y)
                .map(|(&h, &v)| if sign > 0.0 { h + lambda * v } else { h - lambda * v })
                .collect())
        }
        SteeringMode::Switch => {
            let y = spec.target_vector.as_deref().ok_or_else(missing)?;
            let src = spec.source_vector.as_deref().ok_or_else(missing)?;
            check_dim(y.len(), hidden.len())?;
            check_dim(src.len(), hidden.len())?;
            Ok(hidden
                .iter()
                .zip(y.iter().zip(src))
                .map(|(&h, (&t, &s))| h + lambda * (t - s))
                .collect())
        }
        SteeringMode::ReinforceInitial => {
            let a = anchor.ok_or(Error::MissingAnchor)?;
            check_dim(a.len(), hidden.len())?;
            Ok(hidden.iter().zip(a).map(|(&h, &v)| h + lambda * v).collect())
        }
    }
}

/// An attractor displaced by isotropic Gaussian noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedAttractor {
    pub base: Attractor,
    pub rho: f64,
    pub sigma: f64,
    pub seed: u64,
    pub vector: Vec<f64>,
}

/// `a + σ·z` with `σ = rho · spread_euclidean` and `z ~ N(0, I)` drawn from
/// a ChaCha8 stream seeded with `seed`.
pub fn perturb_attractor(attr: &Attractor, rho: f64, seed: u64) -> Result<PerturbedAttractor> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "rho must be finite and non-negative, got {rho}"
        )));
    }
    let sigma = rho * attr.spread_euclidean;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vector = attr
        .vector
        .iter()
        .map(|&a| {
            let z: f64 = rng.sample(StandardNormal);
            a + sigma * z
        })
        .collect();
    Ok(PerturbedAttractor {
        base: attr.clone(),
        rho,
        sigma,
        seed,
        vector,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn attr(layer: u32, v: Vec<f64>) -> Attractor {
        Attractor {
            concept: "c".into(),
            layer,
            vector: v,
            support: 3,
            spread: Some(0.1),
            spread_euclidean: 0.5,
        }
    }

    #[test]
    fn drift_spec_defaults() {
        let s = build_drift_spec(&attr(16, vec![1.0, 2.0]), 1.0, None).unwrap();
        assert_eq!(s.mode, SteeringMode::Subtract);
        assert_eq!(s.layer, 16);
        assert_eq!(s.apply_at, ApplyAt::AllPositions);
        assert_eq!(s, build_drift_spec(&attr(16, vec![1.0, 2.0]), 1.0, None).unwrap());
        assert!(build_drift_spec(&attr(16, vec![1.0]), -1.0, None).is_err());
    }

    #[test]
    fn switch_rules() {
        let a = attr(19, vec![1.0, 0.0]);
        let b = attr(19, vec![0.0, 1.0]);
        let s = build_switch_spec(&a, &b, 1.0).unwrap();
        assert_eq!(s.layer, 19);
        let same = build_switch_spec(&a, &a, 3.0).unwrap();
        assert_eq!(apply_spec(&same, &[0.5, 0.5], None).unwrap(), vec![0.5, 0.5]);
        assert!(matches!(
            build_switch_spec(&a, &attr(20, vec![0.0, 1.0]), 1.0),
            Err(Error::LayerMismatch { .. })
        ));
        assert!(matches!(
            build_switch_spec(&a, &attr(19, vec![0.0]), 1.0),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn switch_hand_arithmetic() {
        let spec = SteeringSpec {
            layer: 0,
            mode: SteeringMode::Switch,
            lambda: 2.0,
            target_vector: Some(vec![1.5, 0.25, 0.0]),
            source_vector: Some(vec![0.5, 0.25, 0.0]),
            apply_at: ApplyAt::AllPositions,
        };
        assert_eq!(apply_spec(&spec, &[0.0; 3], None).unwrap(), vec![2.0, 0.0, 0.0]);
    }

    #[test]
    fn reinforce_needs_anchor() {
        let s = build_reinforce_spec(5, 0.5).unwrap();
        assert!(s.target_vector.is_none());
        assert_eq!(s.apply_at, ApplyAt::DecodeSteps);
        assert_eq!(apply_spec(&s, &[1.0], None), Err(Error::MissingAnchor));
        assert_eq!(apply_spec(&s, &[1.0], Some(&[2.0])).unwrap(), vec![2.0]);
    }

    #[test]
    fn validate_presence_rules() {
        let mut s = build_reinforce_spec(5, 0.5).unwrap();
        assert!(s.validate().is_ok());
        s.target_vector = Some(vec![1.0]);
        assert!(s.validate().is_err());
        let mut d = build_drift_spec(&attr(1, vec![1.0]), 1.0, None).unwrap();
        d.source_vector = Some(vec![1.0]);
        assert!(d.validate().is_err());
    }

    #[test]
    fn zero_rho_is_exact() {
        let a = attr(3, vec![0.1, -2.0, 7.5]);
        assert_eq!(perturb_attractor(&a, 0.0, 9).unwrap().vector, a.vector);
        let p1 = perturb_attractor(&a, 1.0, 9).unwrap();
        let p2 = perturb_attractor(&a, 1.0, 9).unwrap();
        let p3 = perturb_attractor(&a, 1.0, 10).unwrap();
        assert_eq!(p1, p2);
        assert_ne!(p1.vector, p3.vector);
        assert_eq!(p1.sigma, 0.5);
    }
}
