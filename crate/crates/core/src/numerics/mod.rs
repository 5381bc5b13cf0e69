//! Numerical kernels used by the solver.

pub mod convex;
pub mod knapsack;
pub mod lambert;
pub mod linalg;
pub mod root;

pub use convex::{
    minimize_convex, ConvexFn, ConvexOptions, ConvexProgram, ConvexSolution, Hessian,
    KktResiduals, LinearConstraint,
};
pub use knapsack::{solve_knapsack, KnapsackItem};
pub use lambert::lambert_w0;
pub use root::find_root;
