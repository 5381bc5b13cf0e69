use thiserror::Error;

use crate::scenario::ServerId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("argument {0} is below -1/e; Lambert W0 undefined")]
    LambertDomain(f64),
    #[error("no sign change on [{lo}, {hi}] (f(lo) = {flo}, f(hi) = {fhi})")]
    NoSignChange { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("convex program infeasible: max constraint violation {violation:e}")]
    Infeasible { violation: f64, constraint: usize },
    #[error("invalid convex program: {0}")]
    InvalidProgram(String),
    #[error("singular linear system")]
    Singular,
    #[error("convex solver did not converge after {0} Newton steps")]
    NoConvergence(usize),
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("invalid scenario config: {0}")]
    Config(String),
    #[error("no interference term; SIR undefined for mobile user {mu}")]
    SirUndefined { mu: usize },
    #[error("non-positive clock {0} Hz")]
    NonPositiveClock(f64),
    #[error("functions on servers {from} and {to} are not connected by a backhaul link")]
    NotAdjacent { from: ServerId, to: ServerId },
    #[error("request infeasible for offloading: delay slack {slack:e} s")]
    NoOffloadSlack { slack: f64 },
    #[error("empty service function chain")]
    EmptyChain,
    #[error("incomplete assignment: {0}")]
    IncompleteAssignment(String),
    #[error("capacity-infeasible placement at server {server}")]
    CapacityInfeasible { server: ServerId },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
