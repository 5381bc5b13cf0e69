//! Seeded experiment sweeps and result files.

mod emit;
mod sweep;

pub use emit::{
    emit_results, read_results, Metadata, SolutionFile, CONSTRAINTS_FILE, METADATA_FILE, RESULTS_FILE,
    SUMMARY_FILE,
};
pub use sweep::{
    run_sweep, Aggregate, Algorithm, ConstraintRow, ResultRow, ResultsTable, SweepParam, SweepSpec, SweepValue,
};
