use thiserror::Error;

/// Errors raised by configuration builders, residual evaluators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    /// Two bodies closer than the collision tolerance.
    #[error("bodies {i} and {j} collide (distance {distance:e} < {tolerance:e})")]
    Collision {
        i: usize,
        j: usize,
        distance: f64,
        tolerance: f64,
    },

    /// Moment of inertia requested for a system whose center of mass is not at the origin.
    #[error("system is not centered: |sum m q| = {offset:e} exceeds {tolerance:e}")]
    NotCentered { offset: f64, tolerance: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// Argument outside the domain of a lemma function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation at the collision point a = 1, x = 0 of the height-difference function.
    #[error("singular point a = 1, x = 0")]
    Singularity,

    /// The coefficient multiplying the unknown vanished.
    #[error("degenerate linear relation: coefficient {coefficient:e} at a = {a}")]
    Degenerate { a: f64, coefficient: f64 },

    /// No sign change was found while bracketing.
    #[error("no root bracketed: {trace}")]
    NoRootInBracket { trace: String },

    /// A root count contradicting a uniqueness statement.
    #[error("expected exactly {expected} sign change(s), found {found}")]
    BracketCount { expected: usize, found: usize },
}

pub type Result<T> = std::result::Result<T, PolyError>;
