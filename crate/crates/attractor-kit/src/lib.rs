//! File formats, parallel drivers and the command line around
//! [`attractor_core`].
//!
//! - [`container`]: the ACTV1 activation container.
//! - [`formats`]: JSON and CSV artifacts (attractors, policies, steering
//!   specs, fitted maps).
//! - [`parallel`]: multi-threaded versions of the per-layer and per-candidate
//!   loops.
//! - [`cli`]: the `attractor-kit` command.

pub mod cli;
pub mod container;
pub mod formats;
pub mod io;
pub mod parallel;

pub use attractor_core;
pub use container::{decode, encode, read_container, write_container, ContainerError};

#[derive(Debug, thiserror::Error)]
pub enum KitError {
    #[error(transparent)]
    Core(#[from] attractor_core::Error),
    #[error(transparent)]
    Container(#[from] ContainerError),
    #[error("cannot parse {what}: {message}")]
    Parse { what: String, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl KitError {
    /// Error tag printed by the command line.
    pub fn name(&self) -> &'static str {
        match self {
            KitError::Core(e) => e.name(),
            KitError::Container(e) => e.name(),
            KitError::Parse { .. } => "ParseError",
            KitError::Io { .. } => "IoFailure",
        }
    }
}

pub type Result<T> = std::result::Result<T, KitError>;
