use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate problem (Q = 1): {0}")]
    Degenerate(&'static str),

    #[error("point outside the domain: {0}")]
    Domain(String),

    #[error("x = {x} is a node of f; one-sided slopes differ")]
    NodePoint { x: f64 },

    #[error("incompatible trees: fan-out {left} vs {right}")]
    Fanout { left: usize, right: usize },

    #[error("malformed tree: {0}")]
    Malformed(String),

    #[error("depth cap exceeded: {requested} > {cap}")]
    DepthCap { requested: usize, cap: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction error bound violated: {0}")]
    Construction(String),

    #[error("infeasible size: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
