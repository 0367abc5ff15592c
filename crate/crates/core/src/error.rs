use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {left} vs {right}")]
    Shape { left: String, right: String },

    #[error("invalid dataset: {0}")]
    Dataset(&'static str),

    #[error("tolerance schedule is empty")]
    EmptySchedule,
    #[error("tolerance schedule must be strictly decreasing (entry {index}: {prev} then {next})")]
    ScheduleOrder { index: usize, prev: f64, next: f64 },
    #[error("tolerance schedule has negative final entry {0}")]
    NegativeTolerance(f64),

    #[error("invalid prior: {0}")]
    Prior(String),
    #[error("invalid kernel: {0}")]
    Kernel(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("degenerate distribution: all weights are zero")]
    DegenerateWeights,
    #[error("model {0} is not among the alive models")]
    DeadModel(usize),
    #[error("no model is alive")]
    NoAliveModels,
    #[error("particle {0} has no model index")]
    MissingModel(usize),

    #[error("integration diverged at t = {time}")]
    Divergence { time: f64 },
    #[error("stochastic simulation failed: {0}")]
    Simulation(String),
    #[error("parameter {0} is not on the model grid")]
    OffGrid(f64),

    #[error("numeric failure: {0}")]
    Numeric(&'static str),
    #[error("no proposal with positive prior density after {0} retries")]
    RetryBound(u32),
    #[error(
        "budget exhausted in generation {generation}: {accepted} of {target} accepted after {attempts} attempts"
    )]
    BudgetExhausted {
        generation: u32,
        accepted: usize,
        target: usize,
        attempts: u64,
    },
}
