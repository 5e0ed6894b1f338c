use thiserror::Error;

/// Errors produced by the model, the solvers, the oracle and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("zone {zone} out of range 1..={zones}")]
    ZoneOutOfRange { zone: usize, zones: usize },

    #[error("a drop can only follow a move from zone {from} to a lower zone index, got {to}")]
    NotADroppingMove { from: usize, to: usize },

    #[error("point at radius {0} lies outside the cell")]
    OutsideCell(f64),

    #[error("averaging factor {0} outside [0, 1]")]
    InvalidAlpha(f64),

    #[error("rate must be positive and finite, got {name} = {value}")]
    NonPositiveRate { name: &'static str, value: f64 },

    #[error("local factor for class {class} is not positive ({value}) at state {state:?}")]
    NonPositiveFactor { class: usize, value: f64, state: Vec<u32> },

    #[error("zone {zone} holds no connection; its local factor needs n >= 1")]
    EmptyClass { zone: usize },

    #[error("state space has {states} states, above the oracle cap of {cap}")]
    OracleCapExceeded { states: usize, cap: usize },

    #[error("generator is singular beyond the expected rank deficiency")]
    SingularGenerator,

    #[error("degenerate least-squares design: {0}")]
    DegenerateFit(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("capacity target unreachable: best P_b {best_pb} at K = {k_max}")]
    TargetUnreachable { k_max: u32, best_pb: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
