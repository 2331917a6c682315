use thiserror::Error;

use crate::exact::ExtRational;
use crate::space::AtomId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),

    #[error("unknown example {0:?}")]
    UnknownExample(String),

    #[error("annotation error: {0}")]
    Annotation(String),

    #[error("atom {0} does not belong to the space")]
    SpaceMismatch(AtomId),

    #[error("h is undefined pointwise on the null atom {0}")]
    NullAtom(AtomId),

    #[error("preimage of {atom} is not certified complete at window {level}{}", norm_note(.norm_sq))]
    IncompletePreimage {
        atom: AtomId,
        level: u32,
        /// Exact ‖C_φ f‖² when the h-engine could certify it anyway.
        norm_sq: Option<ExtRational>,
    },

    #[error("vector is not in the domain: h is infinite at {0}")]
    NotInDomain(AtomId),

    #[error("vector is not in the domain of the adjoint: h is infinite at {0}")]
    NotInAdjointDomain(AtomId),

    #[error("preimage class of {0} is not certified complete")]
    IncompleteClass(AtomId),

    #[error("value at {0} is not certified at this window")]
    NotCertified(AtomId),

    #[error("composition operator is not densely defined (h infinite at {0})")]
    NotDenselyDefined(AtomId),

    #[error("inconclusive at window {level}: {reason}")]
    Inconclusive { level: u32, reason: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("internal consistency violation: {0}")]
    Internal(String),
}

fn norm_note(norm: &Option<ExtRational>) -> String {
    match norm {
        Some(n) => format!(" (norm² certified as {n})"),
        None => String::new(),
    }
}

impl Error {
    /// Errors caused by a malformed or inconsistent input document.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse(_)
                | Error::Schema(_)
                | Error::UnknownGenerator(_)
                | Error::UnknownExample(_)
                | Error::Annotation(_)
                | Error::SpaceMismatch(_)
        )
    }
}
