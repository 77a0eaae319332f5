use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("energy {0} sits on a channel threshold or outside the first band")]
    Threshold(f64),
    #[error("invalid eigen-data: {0}")]
    Schema(String),
    #[error("eigenvalue {0} lies on the boundary of the splitting interval")]
    Split(f64),
    #[error("energy {lambda} hits pole #{index}")]
    Pole { lambda: f64, index: usize },
    #[error("closed-channel denominator is singular at {0}")]
    DenominatorSingular(f64),
    #[error("energy {0} is an intermediate eigenvalue")]
    IntermediatePole(f64),
    #[error("I + K~K_- is not invertible at {0}")]
    NeumannThinViolated(f64),
    #[error("scattering bracket is singular at {0}")]
    SMatrixSingular(f64),
    #[error("energy {lambda} is outside the low-temperature window of half-width {half_width}")]
    Window { lambda: f64, half_width: f64 },
    #[error("gamma = 0: no symmetric vertex parameter")]
    DegenerateSymmetry,
    #[error("deficiency subspaces overlap (smallest angle sine {0:e})")]
    Overlap(f64),
    #[error("Krein bracket is singular at {0}")]
    ExtensionEigenvalue(f64),
    #[error("boundary current map has rank zero")]
    EmptyModel,
    #[error("resonance continuation failed: {0}")]
    Continuation(String),
    #[error("poles {0} and {1} coincide")]
    DegenerateCollision(usize, usize),
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
