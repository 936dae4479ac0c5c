//! Attractor analysis of layer-wise hidden-state dynamics.
//!
//! Treats the stack of transformer layers as an iterated function system:
//! concept attractors are estimated from stored hidden states, the layer at
//! which concepts separate is selected, contractive affine maps are fitted to
//! the observed layer-to-layer transport, and the resulting attractors drive
//! guardrail policies and steering interventions.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, parallel
//! drivers and the command line live in the `attractor-kit` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod attractor;
pub mod error;
pub mod guardrail;
pub mod ifs;
pub mod linalg;
mod math;
pub mod spatial;
pub mod steering;
pub mod store;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use store::{ActivationSet, PromptMeta};
