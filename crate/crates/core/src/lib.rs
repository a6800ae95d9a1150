//! Numerical verification of the spectral (coercivity) property of the virial
//! operator for the two-dimensional generalized Zakharov–Kuznetsov equation.
//!
//! The pipeline solves the radial ground state `Q`, discretizes the radial
//! operators `U` and `V` of the first even angular sector, and checks the three
//! sufficient conditions (index of `V`, non-singularity of `M`, sign of
//! `⟪f, f*⟫`). The [`oracle`] module repeats the question by brute force.

pub mod config;
pub mod error;
pub mod grid;
pub mod ground_state;
pub mod operators;
pub mod oracle;
pub mod report;
pub mod tridiag;
pub mod verifier;

pub use error::{Error, Result};
pub use grid::{inner_r3dr, inner_rdr, norm2d_sq, GridFunction, Measure, RadialGrid};
pub use ground_state::{
    lambda_q, pokhozhaev_report, solve_ground_state, taylor_start, Backend, GroundState, IdentityReport,
    SolveConfig,
};
pub use config::{OutputFormat, RunConfig};
pub use operators::{build_operators, Benchmark, Operators};
pub use oracle::{oracle_sweep, run_oracle, OracleConfig, OracleEntry, OracleReport};
pub use verifier::{
    sweep, sweep_pipelines, verify, verify_pipeline, Pipeline, PipelineEntry, SpectralReport, SweepEntry, VerifyConfig,
};
