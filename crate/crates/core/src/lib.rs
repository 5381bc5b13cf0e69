//! Joint computation offloading, service-function-chain placement and CPU
//! allocation for multi-cell mobile edge computing.
//!
//! [`scenario`] builds seeded worlds, [`radio`] and [`costs`] evaluate the
//! delay, energy and price model, [`jcora`] holds the iterative solver and
//! the feasibility validator, [`baselines`] the two comparison algorithms and
//! [`harness`] the sweep runner behind the `mec-sfc` binary.
//!
//! The kernels in [`numerics`] are generic over [`scalar::Real`]; the model
//! itself works in `f64`.
//!
//! ```
//! use mec_sfc::jcora::solve_jcora;
//! use mec_sfc::scenario::{generate_scenario, ScenarioConfig};
//!
//! let mut cfg = ScenarioConfig::default();
//! cfg.mus_per_cell = 2;
//! let scenario = generate_scenario(&cfg, 7).unwrap();
//! let sol = solve_jcora(&scenario).unwrap();
//! assert!(sol.report.feasibility.is_feasible());
//! ```

pub mod baselines;
pub mod costs;
pub mod error;
pub mod harness;
pub mod jcora;
pub mod numerics;
pub mod radio;
pub mod scalar;
pub mod scenario;

pub use error::{ModelError, NumericsError, Result};
pub use scalar::Real;

pub type ConvexProgram64<'a> = numerics::ConvexProgram<'a, f64>;
pub type ConvexSolution64 = numerics::ConvexSolution<f64>;
pub type ConvexOptions64 = numerics::ConvexOptions<f64>;
pub type KktResiduals64 = numerics::KktResiduals<f64>;
pub type KnapsackItem64 = numerics::KnapsackItem<f64>;
pub type LinearConstraint64 = numerics::LinearConstraint<f64>;
