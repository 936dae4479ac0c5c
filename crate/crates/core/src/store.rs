//! In-memory model of a hidden-state dump: `N` prompts × `L` stored layers ×
//! `d` hidden dimensions, prompt-major, with one concept label per prompt.
//!
//! The vector for prompt `i` at layer slot `j` starts at flat offset
//! `(i·L + j)·d`. A set is validated once at construction and immutable
//! afterwards.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-prompt metadata. The prompt text itself is never stored, only its digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptMeta {
    pub id: String,
    pub concept: String,
    pub text_digest: [u8; 32],
    pub token_count: u32,
}

impl PromptMeta {
    pub fn new(id: impl Into<String>, concept: impl Into<String>) -> Self {
        PromptMeta {
            id: id.into(),
            concept: concept.into(),
            text_digest: [0; 32],
            token_count: 1,
        }
    }
}

/// Concept filter for [`ActivationSet::slice`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConceptFilter<'a> {
    All,
    Concept(&'a str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivationSet {
    hidden_dim: usize,
    layer_indices: Vec<u32>,
    prompts: Vec<PromptMeta>,
    data: Vec<f32>,
}

impl ActivationSet {
    /// Validates and builds a set.
    pub fn new(layer_indices: Vec<u32>, hidden_dim: usize, prompts: Vec<PromptMeta>, data: Vec<f32>) -> Result<Self> {
        let set = ActivationSet {
            hidden_dim,
            layer_indices,
            prompts,
            data,
        };
        set.validate()?;
        Ok(set)
    }

    /// Builds a set without validation. Anything that persists or analyses
    /// the set must call [`ActivationSet::validate`] first.
    pub fn new_unchecked(layer_indices: Vec<u32>, hidden_dim: usize, prompts: Vec<PromptMeta>, data: Vec<f32>) -> Self {
        ActivationSet {
            hidden_dim,
            layer_indices,
            prompts,
            data,
        }
    }

    /// Checks shape first, then metadata, then payload finiteness.
    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        self.validate_metadata()?;
        self.validate_payload()
    }

    pub(crate) fn validate_shape(&self) -> Result<()> {
        let (n, l, d) = (self.prompts.len(), self.layer_indices.len(), self.hidden_dim);
        if n == 0 || l == 0 || d == 0 {
            return Err(Error::InvalidShape(format!(
                "all of N, L, d must be at least 1 (got {n}, {l}, {d})"
            )));
        }
        let expected = n
            .checked_mul(l)
            .and_then(|x| x.checked_mul(d))
            .ok_or_else(|| Error::InvalidShape(format!("{n}x{l}x{d} overflows")))?;
        if expected != self.data.len() {
            return Err(Error::InvalidShape(format!(
                "declared {n}x{l}x{d} = {expected} values, payload has {}",
                self.data.len()
            )));
        }
        Ok(())
    }

    fn validate_metadata(&self) -> Result<()> {
        if self.layer_indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::UnorderedLayers);
        }
        let mut seen = BTreeSet::new();
        for (i, p) in self.prompts.iter().enumerate() {
            if p.id.is_empty() {
                return Err(Error::InvalidPrompt(format!("prompt {i} has an empty id")));
            }
            if p.concept.is_empty() {
                return Err(Error::InvalidPrompt(format!(
                    "prompt `{}` has an empty concept label",
                    p.id
                )));
            }
            if p.token_count == 0 {
                return Err(Error::InvalidPrompt(format!("prompt `{}` has token_count 0", p.id)));
            }
            if !seen.insert(p.id.as_str()) {
                return Err(Error::DuplicatePromptId(p.id.clone()));
            }
        }
        Ok(())
    }

    fn validate_payload(&self) -> Result<()> {
        match self.data.iter().position(|v| !v.is_finite()) {
            None => Ok(()),
            Some(pos) => {
                let d = self.hidden_dim;
                let l = self.layer_indices.len();
                Err(Error::NonFinite {
                    prompt: pos / (l * d),
                    slot: (pos / d) % l,
                    dim: pos % d,
                })
            }
        }
    }

    #[inline]
    pub fn num_prompts(&self) -> usize {
        self.prompts.len()
    }

    #[inline]
    pub fn num_layers(&self) -> usize {
        self.layer_indices.len()
    }

    #[inline]
    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.num_prompts(), self.num_layers(), self.hidden_dim)
    }

    pub fn layer_indices(&self) -> &[u32] {
        &self.layer_indices
    }

    pub fn prompts(&self) -> &[PromptMeta] {
        &self.prompts
    }

    /// Flat prompt-major payload.
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Smallest stored layer; its rows are the initial states of the dynamics.
    pub fn first_layer(&self) -> u32 {
        self.layer_indices[0]
    }

    pub fn layer_slot(&self, layer: u32) -> Result<usize> {
        self.layer_indices
            .binary_search(&layer)
            .map_err(|_| Error::UnknownLayer(layer))
    }

    /// Hidden state of prompt `prompt` at layer slot `slot`.
    #[inline]
    pub fn vector(&self, prompt: usize, slot: usize) -> &[f32] {
        let start = (prompt * self.layer_indices.len() + slot) * self.hidden_dim;
        &self.data[start..start + self.hidden_dim]
    }

    /// Distinct concept labels in order of first appearance.
    pub fn concepts(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for p in &self.prompts {
            if !out.contains(&p.concept.as_str()) {
                out.push(&p.concept);
            }
        }
        out
    }

    /// Prompt indices carrying `concept`, in prompt order.
    pub fn prompts_for(&self, concept: &str) -> Result<Vec<usize>> {
        let idx: Vec<usize> = self
            .prompts
            .iter()
            .enumerate()
            .filter(|(_, p)| p.concept == concept)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            Err(Error::UnknownConcept(concept.to_string()))
        } else {
            Ok(idx)
        }
    }

    pub(crate) fn select(&self, filter: ConceptFilter<'_>) -> Result<Vec<usize>> {
        match filter {
            ConceptFilter::All => Ok((0..self.num_prompts()).collect()),
            ConceptFilter::Concept(c) => self.prompts_for(c),
        }
    }

    /// Rows (as `f64`) for the selected prompts at `layer`, in prompt order.
    pub fn slice(&self, filter: ConceptFilter<'_>, layer: u32) -> Result<Matrix> {
        let slot = self.layer_slot(layer)?;
        let idx = self.select(filter)?;
        Ok(self.rows_at(&idx, slot))
    }

    pub(crate) fn rows_at(&self, prompts: &[usize], slot: usize) -> Matrix {
        let d = self.hidden_dim;
        let mut data = Vec::with_capacity(prompts.len() * d);
        for &p in prompts {
            data.extend(self.vector(p, slot).iter().map(|&v| f64::from(v)));
        }
        // shape is consistent by construction
        Matrix::from_vec(prompts.len(), d, data).expect("row buffer matches shape")
    }
}
