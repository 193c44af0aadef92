use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("invalid set expression: {0}")]
    InvalidExpr(String),

    #[error("invalid Cayley table: {0}")]
    InvalidTable(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A search or enumeration would exceed its configured size cap.
    #[error("scale exceeded: {what} needs {size} but the cap is {cap}")]
    ScaleExceeded { what: String, size: u128, cap: u128 },

    #[error("certificate construction failed: {0}")]
    ConstructionFailed(String),

    #[error("no covering translate for {subset}: the supplied witness is invalid")]
    NoCoveringTranslate { subset: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn scale(what: impl Into<String>, size: u128, cap: u128) -> Self {
        Error::ScaleExceeded { what: what.into(), size, cap }
    }
}
