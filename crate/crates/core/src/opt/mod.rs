//! Backend-neutral optimization layer.
//!
//! [`Model`] collects variables, ranged linear rows, second-order cones and
//! separable quadratic costs. A [`Backend`] only has to solve LPs (with
//! duals) and MILPs; [`solve_conic_milp`] enforces cones through an
//! outer-approximation cut loop, so the whole stack runs on the bundled
//! simplex / branch-and-bound engine with no external dependencies.

pub mod backend;
pub mod bb;
pub mod conic;
pub mod model;
pub mod simplex;
mod tableau;

pub use backend::{
    backend_by_name, default_backend, Backend, BundledSimplex, DenseTableau, LpSolution,
    MilpSolution, Status,
};
pub use bb::{BbConfig, CutRow};
pub use conic::{
    cone_violation, mccormick, separate_cone, solve_conic_milp, solve_lp, ConeCut, ConeCutConfig,
    ConicSolution,
};
pub use model::{Cone, LinExpr, LinProblem, Model, ModelError, RowId, Sense, VarId, INF};
