use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Domain errors raised by the analysis, fitting and intervention routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid prompt metadata: {0}")]
    InvalidPrompt(String),
    #[error("layer indices must be strictly increasing")]
    UnorderedLayers,
    #[error("duplicate prompt id `{0}`")]
    DuplicatePromptId(String),
    #[error("non-finite value at prompt {prompt}, layer slot {slot}, dim {dim}")]
    NonFinite { prompt: usize, slot: usize, dim: usize },
    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),
    #[error("layer {0} is not stored in this set")]
    UnknownLayer(u32),
    #[error("no prompt carries concept `{0}`")]
    UnknownConcept(String),
    #[error("zero-norm vector: {0}")]
    ZeroVector(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("separation needs at least two concepts, found {0}")]
    NeedTwoConcepts(usize),
    #[error("separation profile is empty")]
    EmptyProfile,
    #[error("concept `{0}` needs at least two prompts")]
    NeedTwoPrompts(String),
    #[error("baseline pairwise distance is zero for concept `{0}`")]
    DegenerateBaseline(String),
    #[error("concept `{concept}` has support {support}, need at least {required}")]
    SupportTooSmall {
        concept: String,
        support: usize,
        required: usize,
    },
    #[error("need at least {required} points, found {found}")]
    TooFewPoints { required: usize, found: usize },
    #[error("power iteration did not converge (last estimate {estimate})")]
    NoConvergence { estimate: f64 },
    #[error("map is not contractive (operator norm {norm})")]
    NotContractive { norm: f64 },
    #[error("linear system is singular")]
    Singular,
    #[error("point set is empty")]
    EmptySet,
    #[error("coordinate magnitude exceeded {limit:e} at iteration {iteration}")]
    ExplosionGuard { iteration: usize, limit: f64 },
    #[error("layer mismatch: expected {expected}, found {found}")]
    LayerMismatch { expected: u32, found: u32 },
    #[error("reinforce_initial requires a runtime anchor")]
    MissingAnchor,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable variant name, used as the error tag on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidShape(_) => "InvalidShape",
            Error::InvalidPrompt(_) => "InvalidPrompt",
            Error::UnorderedLayers => "UnorderedLayers",
            Error::DuplicatePromptId(_) => "DuplicatePromptId",
            Error::NonFinite { .. } | Error::NonFiniteInput(_) => "NonFinite",
            Error::UnknownLayer(_) => "UnknownLayer",
            Error::UnknownConcept(_) => "UnknownConcept",
            Error::ZeroVector(_) => "ZeroVector",
            Error::DimMismatch { .. } => "DimMismatch",
            Error::NeedTwoConcepts(_) => "NeedTwoConcepts",
            Error::EmptyProfile => "EmptyProfile",
            Error::NeedTwoPrompts(_) => "NeedTwoPrompts",
            Error::DegenerateBaseline(_) => "DegenerateBaseline",
            Error::SupportTooSmall { .. } => "SupportTooSmall",
            Error::TooFewPoints { .. } => "TooFewPoints",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NotContractive { .. } => "NotContractive",
            Error::Singular => "Singular",
            Error::EmptySet => "EmptySet",
            Error::ExplosionGuard { .. } => "ExplosionGuard",
            Error::LayerMismatch { .. } => "LayerMismatch",
            Error::MissingAnchor => "MissingAnchor",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, found })
    }
}
