use thiserror::Error;

/// Errors raised while building meshes, bases or slab systems, or while solving them.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid temporal mesh: {0}")]
    InvalidTemporalMesh(String),

    #[error("refinement ratio {0} is not a power of two")]
    NonPowerOfTwoRatio(usize),

    #[error("unsupported dG order {0}; only 0 and 1 are implemented")]
    UnsupportedOrder(usize),

    #[error("temporal meshes are not nested: {0}")]
    NestingViolation(String),

    #[error("invalid spatial mesh: {0}")]
    InvalidMesh(String),

    #[error("unknown boundary marker `{0}`")]
    UnknownMarker(String),

    #[error("non-conforming interface: {0}")]
    NonConformingInterface(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular system{}: {reason}", slab.map(|s| format!(" on slab {s}")).unwrap_or_default())]
    SingularSystem { slab: Option<usize>, reason: String },

    #[error("slab {slab}: {source}")]
    Slab { slab: usize, source: Box<Error> },
}

impl Error {
    /// Attaches a slab index to an error raised while processing that slab.
    pub fn on_slab(self, slab: usize) -> Self {
        match self {
            Error::SingularSystem { reason, .. } => Error::SingularSystem { slab: Some(slab), reason },
            Error::Slab { .. } => self,
            other => Error::Slab { slab, source: Box::new(other) },
        }
    }

    pub fn slab_index(&self) -> Option<usize> {
        match self {
            Error::SingularSystem { slab, .. } => *slab,
            Error::Slab { slab, .. } => Some(*slab),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
