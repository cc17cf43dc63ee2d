//! Error type shared by every module in the crate.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// Two tables that must live on the same cube have different dimensions.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A formula referenced a coordinate that is not bound by the assignment.
    #[error("evaluation error: {0}")]
    Eval(String),

    /// The requested object does not fit the dense-table memory/enumeration caps.
    #[error("domain too large: {0}")]
    DomainTooLarge(String),

    /// A probe or query table violates its sup-norm constraint.
    #[error("norm violation: {0}")]
    Norm(String),

    /// A supplied point map is not a permutation.
    #[error("not a bijection: {0}")]
    Bijection(String),

    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Param(String),

    /// The loss function does not satisfy the contract the operation needs
    /// (convexity, unit slope at zero, 1-Lipschitz).
    #[error("loss contract violated: {0}")]
    LossContract(String),

    /// Power iteration did not converge within the iteration cap; carries the
    /// last eigenvalue estimate.
    #[error("power iteration did not converge after {iterations} iterations (last estimate {last_estimate})")]
    Convergence { last_estimate: f64, iterations: usize },

    /// A certified model bound does not hold where it was checked.
    #[error("model contract violated: {0}")]
    Contract(String),

    /// The learner out-queried the oracle: no surviving member certifies the
    /// loss floor any more.
    #[error("query budget exhausted: {0}")]
    BudgetExceeded(String),

    /// The requested parameters are the full-scale construction, far beyond
    /// what dense tables can represent; nothing is computed at that scale.
    #[error("infeasible scale: {0}")]
    InfeasibleScale(String),
}
