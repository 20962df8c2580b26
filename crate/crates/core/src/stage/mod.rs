//! The two optimization stages: the switched MISOCP relaxation of AC
//! power flow (first stage) and the field-parameterized GIC pricing LP
//! (second stage).

pub mod first;
pub mod second;

pub use first::{build_first_stage, first_stage_cost, FirstStageHandles, FirstStagePlan};
pub use second::{
    append_second_stage, build_second_stage, evaluate_q, BigMConfig, SecondStageSolution,
    SecondStageVars, StageError, StageLink, VoltageEnvelope, XiVal, ZVal,
};
