//! Hypothesis checkers, the Minty-type test, and the well-posedness diagnosis.

mod checkers;
mod diagnose;
mod minty;

use thiserror::Error;

use crate::expr::EvalError;
use crate::geometry::GeometryError;
use crate::sep::SepError;

pub use checkers::{
    check_convex_second, check_diagonal_nonneg, check_hemicontinuous, check_lsc_second, check_monotone,
    check_usc_first, run_checker, CheckConfig, CheckerReport, Counterexample, Property, Verdict, TOL_CHECK,
};
pub use diagnose::{
    diagnose, diagnose_with, run_all_checkers, uniqueness_crosscheck, Classification, Crosscheck, CrosscheckVerdict,
    DiagnoseOptions, DiagnosisReport, LevelSummary, Thresholds, REPORT_SCHEMA_VERSION,
};
pub use minty::{minty_check, MintyReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Sep(#[from] SepError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}
