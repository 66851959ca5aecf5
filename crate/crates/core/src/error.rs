use thiserror::Error;

use crate::numerics::roots::Rect;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("near critical layer: |Im c| = {im:e} is below the floor {floor:e}; use |Im c| >= {floor:e}")]
    NearCriticalLayer { im: f64, floor: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Winding counts could not be reconciled with the roots found.
    #[error("unresolved search boxes: {}", fmt_boxes(.0))]
    Unresolved(Vec<Rect>),

    /// A stability computation found nothing unstable. This is an outcome, not a numerical failure.
    #[error("stable: {0}")]
    Stable(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("time step {dt:e} violates the stability bound; admissible dt <= {max_dt:e}")]
    TimeStep { dt: f64, max_dt: f64 },

    #[error("admissibility violated: {0}")]
    Admissibility(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_boxes(b: &[Rect]) -> String {
    b.iter()
        .map(|r| format!("[{:e},{:e}]x[{:e},{:e}]", r.re.0, r.re.1, r.im.0, r.im.1))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
