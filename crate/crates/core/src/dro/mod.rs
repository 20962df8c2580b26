//! Two-stage distributionally robust solvers.
//!
//! Three interchangeable paths compute the same plan-plus-objective:
//! column-and-constraint generation over the support polytope's vertices
//! ([`ccg_solve`]), the exact three-scenario monolithic program for
//! triangle supports ([`monolithic_solve`]), and a single-scenario
//! deterministic mode ([`deterministic_solve`]). A complementarity-based
//! reformulation of the worst-case subproblem ([`subproblem_kkt`]) serves
//! as an independent oracle for the enumeration path.

mod ccg;
mod kkt;
mod monolithic;

pub use ccg::{ccg_solve, subproblem_enumerate, CcgIteration, CcgResult, MasterState};
pub use kkt::{subproblem_kkt, KktConfig, KktOutcome, KktSubproblem};
pub use monolithic::{deterministic_solve, monolithic_solve, DroSolution};

use crate::ambiguity::AmbiguityError;
use crate::gic::FieldScenario;
use crate::opt::{ConeCutConfig, ModelError, Status};
use crate::stage::StageError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DroError {
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error(transparent)]
    Ambiguity(#[from] AmbiguityError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("master problem reported {0:?}; the instance admits no feasible first stage")]
    MasterFailed(Status),
    #[error("second-stage LP at vertex {vertex} reported {status:?}")]
    SubproblemFailed { vertex: usize, status: Status },
    #[error("complementarity subproblem reported {0:?}")]
    KktFailed(Status),
    #[error("complementarity big-M is too small: value moved from {v1} to {v2} when the bound was scaled up")]
    KktUnstable { v1: f64, v2: f64 },
}

/// Shared solver options.
#[derive(Debug, Clone)]
pub struct DroConfig {
    /// Relative optimality gap for CCG termination.
    pub epsilon: f64,
    /// Cap on CCG scenario augmentations.
    pub max_iters: u32,
    pub cones: ConeCutConfig,
}

impl Default for DroConfig {
    fn default() -> Self {
        DroConfig {
            epsilon: 1e-4,
            max_iters: 50,
            cones: ConeCutConfig::default(),
        }
    }
}

/// The dual contribution of the mean constraints to the master objective:
/// `mu_E lambda_E + mu_N lambda_N`.
pub fn worst_case_dual_objective(lambda_e: f64, lambda_n: f64, mean: FieldScenario) -> f64 {
    mean.e * lambda_e + mean.n * lambda_n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_objective_terms() {
        assert_eq!(worst_case_dual_objective(0.0, 0.0, FieldScenario::new(3.0, 4.0)), 0.0);
        let v = worst_case_dual_objective(2.0, -1.0, FieldScenario::new(3.0, 4.0));
        assert_eq!(v, 2.0);
        // Bilinearity: negating both mean and multipliers is a no-op.
        let w = worst_case_dual_objective(-2.0, 1.0, FieldScenario::new(-3.0, -4.0));
        assert_eq!(v, w);
    }
}
