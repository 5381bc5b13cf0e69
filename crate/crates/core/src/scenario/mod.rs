//! Domain types, backhaul topologies and seeded scenario generation.

mod config;
mod generate;
mod graph;
mod model;

pub use config::{
    Blacklist, BudgetConfig, CellsConfig, ChainConfig, MuConfig, RadioConfig, ScenarioConfig,
    TopologyConfig,
};
pub use generate::generate_scenario;
pub use graph::{build_topology, BackhaulGraph, FunctionId, Link, Server, ServerId, TopologyKind};
pub use model::{
    Cell, ChainStage, MobileUser, PriceParams, RequestRef, Scenario, ServiceRequest, Weights,
};
