//! Concept guardrails: block a request when its hidden state at the policy
//! layer is cosine-similar to a stored concept attractor.
//!
//! Blocking uses a strict comparison, `similarity > tau`, so `tau = 1`
//! never blocks and `tau < -1` blocks everything. The false-block rate on
//! a retain set stands in for utility damage.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::attractor::{cosine_similarity, Attractor};
use crate::error::{check_dim, Error, Result};
use crate::linalg::norm;
use crate::store::ActivationSet;

/// Placeholder replaced by the entry's request id when rendering a message.
pub const REQUEST_ID_PLACEHOLDER: &str = "<id>";

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyEntry {
    pub concept: String,
    pub request_id: String,
    pub message_template: String,
    pub vector: Vec<f64>,
}

impl PolicyEntry {
    pub fn from_attractor(
        attr: &Attractor,
        request_id: impl Into<String>,
        message_template: impl Into<String>,
    ) -> Self {
        PolicyEntry {
            concept: attr.concept.clone(),
            request_id: request_id.into(),
            message_template: message_template.into(),
            vector: attr.vector.clone(),
        }
    }

    pub fn render(&self) -> String {
        self.message_template.replace(REQUEST_ID_PLACEHOLDER, &self.request_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuardrailPolicy {
    layer: u32,
    tau: f64,
    entries: Vec<PolicyEntry>,
}

impl GuardrailPolicy {
    pub fn new(layer: u32, tau: f64, entries: Vec<PolicyEntry>) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::NonFiniteInput("tau"));
        }
        if !(-1.0..=1.0).contains(&tau) {
            return Err(Error::InvalidArgument(format!("tau must lie in [-1, 1], got {tau}")));
        }
        let Some(first) = entries.first() else {
            return Err(Error::InvalidArgument("a policy needs at least one entry".into()));
        };
        let d = first.vector.len();
        for e in &entries {
            check_dim(d, e.vector.len())?;
            if e.vector.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteInput("policy vector"));
            }
            if norm(&e.vector) == 0.0 {
                return Err(Error::ZeroVector(format!("policy entry `{}`", e.concept)));
            }
        }
        Ok(GuardrailPolicy { layer, tau, entries })
    }

    pub fn layer(&self) -> u32 {
        self.layer
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn entries(&self) -> &[PolicyEntry] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries[0].vector.len()
    }

    /// Same entries under a different threshold.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        GuardrailPolicy::new(self.layer, tau, self.entries.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub blocked: bool,
    pub best_concept: Option<String>,
    pub best_similarity: f64,
    pub rendered_message: Option<String>,
}

/// Best matching entry and its cosine similarity; ties keep the first entry.
fn best_match(hidden: &[f64], policy: &GuardrailPolicy) -> Result<(usize, f64)> {
    check_dim(policy.dim(), hidden.len())?;
    if norm(hidden) == 0.0 {
        return Err(Error::ZeroVector("hidden state".into()));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, e) in policy.entries.iter().enumerate() {
        let s = cosine_similarity(hidden, &e.vector)?;
        if s > best.1 {
            best = (i, s);
        }
    }
    Ok(best)
}

pub fn check(hidden: &[f64], policy: &GuardrailPolicy) -> Result<Decision> {
    let (idx, sim) = best_match(hidden, policy)?;
    let entry = &policy.entries[idx];
    let blocked = sim > policy.tau;
    Ok(Decision {
        blocked,
        best_concept: Some(entry.concept.clone()),
        best_similarity: sim,
        rendered_message: blocked.then(|| entry.render()),
    })
}

/// Best similarity of every prompt in `set` at the policy layer.
pub fn similarity_scores(set: &ActivationSet, policy: &GuardrailPolicy) -> Result<Vec<f64>> {
    let slot = set.layer_slot(policy.layer).map_err(|_| Error::LayerMismatch {
        expected: policy.layer,
        found: set.first_layer(),
    })?;
    check_dim(policy.dim(), set.hidden_dim())?;
    let mut buf = alloc::vec![0.0; set.hidden_dim()];
    (0..set.num_prompts())
        .map(|p| {
            for (b, &v) in buf.iter_mut().zip(set.vector(p, slot)) {
                *b = f64::from(v);
            }
            best_match(&buf, policy).map(|(_, s)| s).map_err(|e| match e {
                Error::ZeroVector(_) => Error::ZeroVector(format!("hidden state of prompt `{}`", set.prompts()[p].id)),
                other => other,
            })
        })
        .collect()
}

fn blocked_fraction(scores: &[f64], tau: f64) -> f64 {
    scores.iter().filter(|&&s| s > tau).count() as f64 / scores.len() as f64
}

/// Fraction of prompts in `forget` that the policy blocks.
pub fn cutoff_rate(forget: &ActivationSet, policy: &GuardrailPolicy) -> Result<f64> {
    let scores = similarity_scores(forget, policy)?;
    Ok(blocked_fraction(&scores, policy.tau))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub tau: f64,
    /// Blocked fraction of the forget set.
    pub cutoff: f64,
    /// Blocked fraction of the retain set.
    pub false_block_rate: f64,
}

/// Cutoff and false-block rate for every threshold in `grid` (ascending).
/// Both columns are non-increasing in `tau`.
pub fn sweep_tau(
    forget: &ActivationSet,
    retain: &ActivationSet,
    policy: &GuardrailPolicy,
    grid: &[f64],
) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("tau grid is empty".into()));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFiniteInput("tau grid"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("tau grid must be sorted ascending".into()));
    }
    let forget_scores = similarity_scores(forget, policy)?;
    let retain_scores = similarity_scores(retain, policy)?;
    Ok(grid
        .iter()
        .map(|&tau| SweepPoint {
            tau,
            cutoff: blocked_fraction(&forget_scores, tau),
            false_block_rate: blocked_fraction(&retain_scores, tau),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn entry(concept: &str, v: Vec<f64>) -> PolicyEntry {
        PolicyEntry {
            concept: concept.into(),
            request_id: "R-17".into(),
            message_template: "blocked under request <id>".into(),
            vector: v,
        }
    }

    fn policy(tau: f64) -> GuardrailPolicy {
        GuardrailPolicy::new(
            24,
            tau,
            vec![entry("a", vec![1.0, 0.0, 0.0]), entry("b", vec![0.0, 1.0, 0.0])],
        )
        .unwrap()
    }

    #[test]
    fn exact_match_blocks() {
        let d = check(&[0.0, 2.0, 0.0], &policy(0.9)).unwrap();
        assert!(d.blocked);
        assert_eq!(d.best_concept.as_deref(), Some("b"));
        assert!((d.best_similarity - 1.0).abs() < 1e-12);
        assert_eq!(d.rendered_message.as_deref(), Some("blocked under request R-17"));
    }

    #[test]
    fn tau_one_never_blocks() {
        let d = check(&[1.0, 0.0, 0.0], &policy(1.0)).unwrap();
        assert!(!d.blocked);
        assert!(d.rendered_message.is_none());
    }

    #[test]
    fn orthogonal_is_allowed() {
        let d = check(&[0.0, 0.0, 3.0], &policy(0.5)).unwrap();
        assert!(!d.blocked);
        assert_eq!(d.best_similarity, 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(check(&[0.0; 3], &policy(0.5)), Err(Error::ZeroVector(_))));
        assert!(matches!(check(&[1.0; 2], &policy(0.5)), Err(Error::DimMismatch { .. })));
        assert!(GuardrailPolicy::new(1, 0.5, vec![]).is_err());
        assert!(GuardrailPolicy::new(1, f64::NAN, vec![entry("a", vec![1.0])]).is_err());
        assert!(GuardrailPolicy::new(1, 0.5, vec![entry("a", vec![0.0])]).is_err());
    }

    #[test]
    fn scale_invariant() {
        let p = policy(0.3);
        let h = [0.3, 0.8, -0.1];
        let a = check(&h, &p).unwrap();
        let b = check(&h.map(|v| v * 37.0), &p).unwrap();
        assert_eq!(a.blocked, b.blocked);
        assert!((a.best_similarity - b.best_similarity).abs() < 1e-12);
    }
}
