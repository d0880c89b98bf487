use thiserror::Error;

/// Errors produced by the solvers and evaluators in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument violated a domain requirement (negative SNR, probability
    /// vector not summing to one, point outside the unit disk, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Γ = 1 (open circuit) has no finite normalized impedance.
    #[error("open-circuit reflection coefficient: impedance is infinite")]
    OpenCircuit,

    /// Adaptive quadrature failed to reach the requested tolerance.
    #[error("numerical integration did not converge: {0}")]
    IntegrationFailure(String),

    /// An optimizer stopped without satisfying its convergence criteria.
    /// Carries the SNR in dB at which it happened and a description of the
    /// last feasible state.
    #[error("optimizer did not converge at {snr_db:.2} dB: {detail}")]
    OptimizerFailure { snr_db: f64, detail: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
