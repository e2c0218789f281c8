//! Subjective-logic opinions, source trust, diversity clustering, budgeted
//! source selection and cluster-aware fusion of reports.
//!
//! Reports from sources with similar features are assumed to be correlated:
//! they are fused with the idempotent averaging operator inside a cluster and
//! with cumulative fusion across clusters, so a crowd of near-identical sources
//! counts no more than one of them.

mod diversity;
mod fusion;
mod opinion;
mod source;

pub use diversity::{cluster_sources, cosine_similarity, select_sources, Candidate, DiversityModel};
pub use fusion::{fuse_hypothesis, fuse_hypothesis_traced, ClusterTrace, FusionTrace, Report, ReportTrace};
pub use opinion::{fuse_averaging_all, fuse_cumulative_all, Opinion, DEFAULT_BASE_RATE, OPINION_TOLERANCE};
pub use source::{
    feedback, Codebook, Evidence, Outcome, Profiles, SourceAttributes, SourceProfile, SourceRecord, SourceRegistry,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TrustError {
    #[error("invalid opinion {0:?}")]
    InvalidOpinion(Opinion),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("base rates differ: {0} vs {1}")]
    BaseRateMismatch(f64, f64),
    #[error("no opinions to fuse")]
    NoOpinions,
    #[error("feature vector of `{source_id}` has dimension {found}, expected {expected}")]
    DimensionMismatch { source_id: String, expected: usize, found: usize },
    #[error("reports concern different hypotheses: `{0}` and `{1}`")]
    HypothesisMismatch(String, String),
    #[error("source registry: {0}")]
    Registry(String),
}

impl TrustError {
    pub fn code(&self) -> &'static str {
        match self {
            TrustError::InvalidOpinion(_) => "InvalidOpinion",
            TrustError::DomainError(_) => "DomainError",
            TrustError::BaseRateMismatch(..) => "BaseRateMismatch",
            TrustError::NoOpinions => "NoOpinions",
            TrustError::DimensionMismatch { .. } => "DimensionMismatch",
            TrustError::HypothesisMismatch(..) => "HypothesisMismatch",
            TrustError::Registry(_) => "Registry",
        }
    }
}
