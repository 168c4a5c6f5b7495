//! Config-driven experiments with JSON and CSV reports.
//!
//! Each runner only composes library operations, so every number in a report
//! can be reproduced by calling the same functions directly.

mod config;
mod details;
mod report;
mod runners;

pub use config::{
    parse_levels, parse_q_list, ExperimentConfig, ExperimentKind, UniformizeParams,
    DEFAULT_MAX_LEVEL,
};
pub use details::*;
pub use report::{Precondition, Report, Status, SumsetCsvRow, TableRow};
pub use runners::{
    run_improvement, run_infty_jump, run_porous_dual, run_regularity, run_repeated, run_sumset,
    run_uniformize, MONOTONE_TOL, STALL_SLACK, UP_FIT_LEVEL_CAP,
};

use crate::error::{Error, Result};

/// Process exit codes of the CLI.
pub mod exit_code {
    pub const SUCCESS: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const PRECONDITION_UNMET: i32 = 2;
    pub const INVALID_CONFIG: i32 = 3;
    pub const RESOURCE_LIMIT: i32 = 4;
}

/// Validates `cfg` for `kind` and dispatches.
pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate(kind)?;
    let mut cfg = cfg.clone();
    cfg.experiment = Some(kind);
    match kind {
        ExperimentKind::Improvement => run_improvement(&cfg),
        ExperimentKind::Repeated => run_repeated(&cfg),
        ExperimentKind::PorousDual => run_porous_dual(&cfg),
        ExperimentKind::InftyJump => run_infty_jump(&cfg),
        ExperimentKind::Regularity => run_regularity(&cfg),
        ExperimentKind::Sumset => run_sumset(&cfg),
        ExperimentKind::Uniformize => run_uniformize(&cfg),
    }
}

pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::PreconditionUnmet(_) | Error::DegenerateInput(_) => exit_code::PRECONDITION_UNMET,
        Error::InvalidConfig(_) | Error::InvalidArgument(_) | Error::SpecInvalid { .. } => {
            exit_code::INVALID_CONFIG
        }
        Error::ResourceLimit(_) => exit_code::RESOURCE_LIMIT,
        Error::Io(_) => exit_code::FAILURE,
    }
}

pub fn exit_code_for_report(r: &Report) -> i32 {
    match r.status {
        Status::Ok => exit_code::SUCCESS,
        Status::PreconditionUnmet => exit_code::PRECONDITION_UNMET,
    }
}
