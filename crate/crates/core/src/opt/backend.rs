//! The minimal contract a solver engine must satisfy: LP with duals, MILP,
//! and (optionally) MILP with lazy cut separation. Two engines ship with
//! the crate; external engines can be slotted in behind the same trait.

use super::bb::{self, BbConfig, CutRow, MilpStatus};
use super::model::LinProblem;
use super::simplex::{Simplex, SolveOutcome};
use super::tableau;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: Status,
    pub obj: f64,
    pub x: Vec<f64>,
    /// Per-row sensitivities of the optimum to the active row bound.
    pub duals: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: Status,
    pub obj: f64,
    pub x: Vec<f64>,
    pub nodes: u64,
    pub cuts_added: usize,
}

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    fn solve_lp(&self, p: &LinProblem) -> LpSolution;

    fn solve_milp(&self, p: &LinProblem) -> MilpSolution;

    /// Single-tree MILP that calls `separator` at integral LP optima and
    /// appends the returned (globally valid) rows before accepting an
    /// incumbent. Engines without callback support return `None`; callers
    /// fall back to the solve / separate / append loop.
    fn solve_milp_lazy(
        &self,
        p: &LinProblem,
        separator: &mut dyn FnMut(&[f64]) -> Vec<CutRow>,
    ) -> Option<MilpSolution> {
        let _ = (p, separator);
        None
    }
}

/// The bundled revised-simplex + branch-and-bound engine; the default.
#[derive(Debug, Clone, Default)]
pub struct BundledSimplex {
    pub bb: BbConfig,
}

impl Backend for BundledSimplex {
    fn name(&self) -> &str {
        "simplex"
    }

    fn solve_lp(&self, p: &LinProblem) -> LpSolution {
        let mut sx = Simplex::new(p);
        let status = match sx.solve_from_scratch() {
            SolveOutcome::Optimal => Status::Optimal,
            SolveOutcome::Infeasible => Status::Infeasible,
            SolveOutcome::Unbounded => Status::Unbounded,
            SolveOutcome::IterLimit => Status::Limit,
        };
        LpSolution {
            status,
            obj: if status == Status::Optimal { sx.objective() } else { f64::NAN },
            x: sx.primal().to_vec(),
            duals: if status == Status::Optimal { sx.duals() } else { vec![0.0; p.num_rows()] },
        }
    }

    fn solve_milp(&self, p: &LinProblem) -> MilpSolution {
        let out = bb::solve_milp(p, &self.bb, None);
        milp_out(out)
    }

    fn solve_milp_lazy(
        &self,
        p: &LinProblem,
        separator: &mut dyn FnMut(&[f64]) -> Vec<CutRow>,
    ) -> Option<MilpSolution> {
        let out = bb::solve_milp(p, &self.bb, Some(separator));
        Some(milp_out(out))
    }
}

fn milp_out(out: bb::MilpOutcome) -> MilpSolution {
    MilpSolution {
        status: match out.status {
            MilpStatus::Optimal => Status::Optimal,
            MilpStatus::Infeasible => Status::Infeasible,
            MilpStatus::Unbounded => Status::Unbounded,
            MilpStatus::Limit => Status::Limit,
        },
        obj: out.obj,
        x: out.x,
        nodes: out.nodes,
        cuts_added: out.cuts_added,
    }
}

/// The dense textbook engine; correct but slow, for cross-checks.
#[derive(Debug, Clone, Default)]
pub struct DenseTableau;

impl Backend for DenseTableau {
    fn name(&self) -> &str {
        "tableau"
    }

    fn solve_lp(&self, p: &LinProblem) -> LpSolution {
        let sol = tableau::solve_lp_dense(p);
        LpSolution {
            status: tab_status(sol.status),
            obj: sol.obj,
            x: sol.x,
            duals: sol.duals,
        }
    }

    fn solve_milp(&self, p: &LinProblem) -> MilpSolution {
        let sol = tableau::solve_milp_dense(p);
        MilpSolution {
            status: tab_status(sol.status),
            obj: sol.obj,
            x: sol.x,
            nodes: 0,
            cuts_added: 0,
        }
    }
}

fn tab_status(s: tableau::TabStatus) -> Status {
    match s {
        tableau::TabStatus::Optimal => Status::Optimal,
        tableau::TabStatus::Infeasible => Status::Infeasible,
        tableau::TabStatus::Unbounded => Status::Unbounded,
    }
}

/// Engine lookup for configuration and the CLI (`--backend`).
pub fn backend_by_name(name: &str) -> Option<Box<dyn Backend>> {
    match name {
        "simplex" | "bundled" => Some(Box::new(BundledSimplex::default())),
        "tableau" => Some(Box::new(DenseTableau)),
        _ => None,
    }
}

pub fn default_backend() -> Box<dyn Backend> {
    Box::new(BundledSimplex::default())
}
