//! The iterative offloading / placement / allocation solver.

mod assignment;
mod estimate;
mod local;
mod placement;
mod slave;
mod solver;
mod validate;

pub use assignment::{
    AllocationRecord, Assignment, Decision, Solution, SolutionReport, SolverTrace, TraceStep,
};
pub use estimate::{clock_for_multiplier, estimate_remote_alloc, RemoteEstimate};
pub use local::{local_allocation, split_local_offload};
pub use placement::{place_functions_gtda, place_home_only, Placement, PlacementRequest};
pub use slave::{solve_slave, SlaveRequest, SlaveSolution};
pub use solver::{
    allocate, allocate_with_priority, assemble, build_report, solve_jcora, step0_offloads, Allocation, PlacementMode, Prepared,
};
pub use validate::{
    validate, Constraint, ConstraintCheck, FeasibilityReport, CAPACITY_TOL_HZ, DELAY_TOL_S,
};
