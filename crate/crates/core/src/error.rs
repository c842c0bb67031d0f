use thiserror::Error;

/// Errors raised by mesh construction, projections, assembly and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("projection error: {0}")]
    Projection(String),

    #[error("singular matrix: pivot {pivot} below tolerance")]
    Singular { pivot: usize },

    #[error("linear solve failed: relative residual {residual:.3e}")]
    Numerical { residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
