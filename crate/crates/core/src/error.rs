//! Error types, one enum per subsystem.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MomentsError {
    #[error("basis order {order} out of range (1..={max})")]
    OrderOutOfRange { order: u32, max: u32 },
    #[error("repetition q={q} exceeds radial order p={p}")]
    InvalidRepetition { p: u32, q: u32 },
    #[error("pseudo-Zernike evaluation outside the unit disk (r = {r})")]
    OutsideUnitDisk { r: f64 },
    #[error("moment computation needs at least one point")]
    EmptyPointSet,
    #[error("grid has no mass inside the basis domain")]
    ZeroMass,
    #[error("grid masses must be nonnegative (found {value} at row {row}, col {col})")]
    NegativeMass { row: usize, col: usize, value: f64 },
    #[error("moment vectors use different bases ({left} vs {right})")]
    BasisMismatch { left: String, right: String },
    #[error("moment vector length {got} does not match basis embedding length {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("reference reconstruction is identically zero; MSRE undefined")]
    ZeroDenominator,
    #[error("reconstruction grid must be at least 2x2 (got {rows}x{cols})")]
    GridTooSmall { rows: usize, cols: usize },
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("drop rate must lie in [0, 1) (got {0})")]
    InvalidDropRate(f64),
    #[error("edge ({src}, {dst}) references a vertex outside 0..{n}")]
    EdgeOutOfRange { src: usize, dst: usize, n: usize },
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
}

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("estimator gain violates gamma * d_out < 1 (gamma = {gamma}, d_out = {d_out})")]
    GainTooLarge { gamma: f64, d_out: usize },
    #[error("input vector length {got} does not match estimator dimension {expected}")]
    DimensionMismatch { got: usize, expected: usize },
}

#[derive(Debug, Error)]
pub enum ControllerError {
    #[error("dimension mismatch: jacobian rows {jac_rows}, estimate {mhat}, target {mstar}, gains {gains}")]
    DimensionMismatch {
        jac_rows: usize,
        mhat: usize,
        mstar: usize,
        gains: usize,
    },
    #[error("control parameters invalid: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Error)]
pub enum PgmError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a PGM file (magic {0:?})")]
    BadMagic(String),
    #[error("malformed PGM header: {0}")]
    BadHeader(String),
    #[error("maxval {0} unsupported (must be 1..=65535)")]
    BadMaxval(u32),
    #[error("pixel data truncated: expected {expected} samples, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("malformed pixel value: {0}")]
    BadPixel(String),
}

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("moment index set does not form a complete basis: {0}")]
    IncompleteBasis(String),
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario invalid: {0}")]
    Scenario(String),
    #[error(transparent)]
    Moments(#[from] MomentsError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Controller(#[from] ControllerError),
    #[error(transparent)]
    Pgm(#[from] PgmError),
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error("cannot remove all robots")]
    WouldEmptySwarm,
    #[error("unknown robot id {0}")]
    UnknownRobot(usize),
    #[error("position ({x}, {y}) outside the [-1,1]^2 arena")]
    OutsideArena { x: f64, y: f64 },
}
