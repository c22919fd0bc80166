use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("{0}")]
    Domain(String),
    #[error("n = {0} is out of range (2 <= n <= 5)")]
    Dimension(usize),
    #[error("{label} is not valid at n = {n}")]
    InvalidClass { label: String, n: usize },
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("Bianchi identity violated")]
    Bianchi,
    #[error("unexpected relation multiplicity {0}")]
    RelationMultiplicity(usize),
    #[error("jet file: {0}")]
    Jet(String),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
