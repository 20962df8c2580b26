//! Column-and-constraint generation for the two-stage DRO with a
//! polyhedral support set.
//!
//! The master carries the first stage, the mean-constraint multipliers
//! `lambda_E, lambda_N`, the epigraph `eta` and one second-stage copy per
//! generated scenario. The worst-case subproblem is solved by enumerating
//! the support vertices (one LP each), which keeps every subproblem free
//! of bilinear terms; the complementarity MILP in [`super::subproblem_kkt`]
//! cross-checks it. Because the vertex set is finite the loop terminates
//! after at most one augmentation per vertex.
//!
//! The first master would leave `eta` unbounded with an empty scenario
//! set, so it is seeded with a copy at the mean, whose multiplier terms
//! cancel exactly in the objective.

use super::monolithic::DroSolution;
use super::{worst_case_dual_objective, DroConfig, DroError};
use crate::ambiguity::AmbiguitySet;
use crate::gic::FieldScenario;
use crate::grid::GridCase;
use crate::opt::{
    solve_conic_milp, solve_lp, Backend, LinExpr, Model, Sense, Status, VarId, INF,
};
use crate::stage::{
    append_second_stage, build_first_stage, build_second_stage, first_stage_cost,
    FirstStageHandles, FirstStagePlan, StageLink, VoltageEnvelope, XiVal,
};
use std::time::Instant;

/// The growing master problem.
pub struct MasterState {
    pub model: Model,
    pub handles: FirstStageHandles,
    pub lambda_e: VarId,
    pub lambda_n: VarId,
    pub eta: VarId,
    /// Scenario fields with copies in the master (the seed at the mean
    /// plus every generated vertex).
    pub scenarios: Vec<FieldScenario>,
    pub lb_trace: Vec<f64>,
    pub ub_trace: Vec<f64>,
}

impl MasterState {
    fn new(grid: &GridCase, mean: FieldScenario) -> Result<Self, DroError> {
        let (mut model, handles) = build_first_stage(grid)?;
        let lambda_e = model.add_var("lambda_E", -INF, INF, mean.e);
        let lambda_n = model.add_var("lambda_N", -INF, INF, mean.n);
        let eta = model.add_var("eta", -INF, INF, 1.0);
        let mut state = MasterState {
            model,
            handles,
            lambda_e,
            lambda_n,
            eta,
            scenarios: Vec::new(),
            lb_trace: Vec::new(),
            ub_trace: Vec::new(),
        };
        state.add_scenario(grid, mean)?;
        Ok(state)
    }

    /// Appends a second-stage copy at `field` and its epigraph link
    /// `eta >= c^T x - lambda . xi`.
    fn add_scenario(&mut self, grid: &GridCase, field: FieldScenario) -> Result<(), DroError> {
        let idx = self.scenarios.len();
        let link = StageLink::from_handles(&self.handles);
        let vars = append_second_stage(
            &mut self.model,
            grid,
            &link,
            XiVal::Fixed(field),
            VoltageEnvelope::Box,
            &format!("t{idx}"),
        )?;
        let mut row = LinExpr::var(self.eta)
            .add(self.lambda_e, field.e)
            .add(self.lambda_n, field.n);
        for (v, c) in vars.cost_terms(grid) {
            row.terms.push((v, -c));
        }
        self.model
            .add_constraint(format!("eta_link[t{idx}]"), row, Sense::Ge, 0.0);
        self.scenarios.push(field);
        Ok(())
    }
}

/// One pass of the CCG loop, for the per-iteration log.
#[derive(Debug, Clone)]
pub struct CcgIteration {
    pub iter: u32,
    pub lb: f64,
    pub ub: f64,
    pub gap: f64,
    /// Vertex index the subproblem picked (None once it repeats and the
    /// loop stops).
    pub worst_vertex: Option<usize>,
    pub z_value: f64,
    pub wall_secs: f64,
}

/// Outcome of [`ccg_solve`].
#[derive(Debug, Clone)]
pub struct CcgResult {
    pub plan: FirstStagePlan,
    /// Best upper bound at termination (the certified objective).
    pub objective: f64,
    /// Scenario augmentations performed (bounded by the vertex count).
    pub iterations: u32,
    pub master_solves: u32,
    pub gap: f64,
    pub lambda: (f64, f64),
    pub log: Vec<CcgIteration>,
    pub tolerance_met: bool,
}

impl CcgResult {
    pub fn into_solution(self, grid: &GridCase) -> DroSolution {
        let _ = grid;
        DroSolution {
            plan: self.plan,
            objective: self.objective,
            method: "ccg",
            scenarios: Vec::new(),
            scenario_costs: Vec::new(),
            tolerance_met: self.tolerance_met,
        }
    }
}

/// Per-vertex second-stage value `Q(plan, xi_k)` and the penalized scores
/// `Q - lambda . xi`; the argmax with ties broken toward the lowest index.
///
/// Every vertex LP is independent; a failure aborts with the vertex id.
pub fn subproblem_enumerate(
    grid: &GridCase,
    plan: &FirstStagePlan,
    lambda_e: f64,
    lambda_n: f64,
    vertices: &[FieldScenario],
    backend: &dyn Backend,
) -> Result<(usize, f64, Vec<f64>), DroError> {
    let scores = enumerate_scores(grid, plan, lambda_e, lambda_n, vertices, backend)?;
    let mut worst = 0usize;
    for (k, z) in scores.iter().enumerate() {
        if *z > scores[worst] + 1e-12 {
            worst = k;
        }
    }
    Ok((worst, scores[worst], scores))
}

fn enumerate_scores(
    grid: &GridCase,
    plan: &FirstStagePlan,
    lambda_e: f64,
    lambda_n: f64,
    vertices: &[FieldScenario],
    backend: &dyn Backend,
) -> Result<Vec<f64>, DroError> {
    vertices
        .iter()
        .enumerate()
        .map(|(k, &xi)| {
            let (model, _) = build_second_stage(grid, plan, xi, VoltageEnvelope::Box)?;
            let sol = solve_lp(&model, backend);
            if sol.status != Status::Optimal {
                return Err(DroError::SubproblemFailed {
                    vertex: k,
                    status: sol.status,
                });
            }
            Ok(sol.obj - lambda_e * xi.e - lambda_n * xi.n)
        })
        .collect()
}

/// Algorithm: solve the master for `(z, lambda, eta)`, enumerate the
/// worst vertex at the incumbent, update the upper bound, stop on a small
/// relative gap, otherwise augment the master with the worst vertex's
/// second-stage copy.
pub fn ccg_solve(
    grid: &GridCase,
    ambiguity: &AmbiguitySet,
    backend: &dyn Backend,
    cfg: &DroConfig,
) -> Result<CcgResult, DroError> {
    let vertices = ambiguity.support.vertices()?;
    let mut master = MasterState::new(grid, ambiguity.mean)?;
    let mut log = Vec::new();
    let mut best: Option<(f64, FirstStagePlan, (f64, f64))> = None;
    let mut ub = INF;
    let mut lb = -INF;
    let mut augmentations = 0u32;
    let mut master_solves = 0u32;
    let mut added: Vec<usize> = Vec::new();
    let started = Instant::now();

    loop {
        let sol = solve_conic_milp(&master.model, &cfg.cones, backend);
        master_solves += 1;
        if sol.status != Status::Optimal {
            return Err(DroError::MasterFailed(sol.status));
        }
        lb = lb.max(sol.obj);
        master.lb_trace.push(lb);

        let plan = master.handles.extract_plan(grid, &|v| sol.value(v));
        let le = sol.value(master.lambda_e);
        let ln = sol.value(master.lambda_n);

        let (worst, z_value, _scores) =
            subproblem_enumerate(grid, &plan, le, ln, &vertices, backend)?;
        let ub_cand =
            first_stage_cost(grid, &plan) + worst_case_dual_objective(le, ln, ambiguity.mean) + z_value;
        if ub_cand < ub {
            ub = ub_cand;
            best = Some((ub, plan, (le, ln)));
        }
        master.ub_trace.push(ub);

        let gap = relative_gap(lb, ub);
        let done = gap <= cfg.epsilon;
        let repeat = added.contains(&worst);
        log.push(CcgIteration {
            iter: master_solves,
            lb,
            ub,
            gap,
            worst_vertex: if done { None } else { Some(worst) },
            z_value,
            wall_secs: started.elapsed().as_secs_f64(),
        });
        if done || repeat || augmentations >= cfg.max_iters {
            let (objective, plan, lambda) = best.expect("at least one UB update");
            return Ok(CcgResult {
                plan,
                objective,
                iterations: augmentations,
                master_solves,
                gap,
                lambda,
                log,
                tolerance_met: done,
            });
        }
        master.add_scenario(grid, vertices[worst])?;
        added.push(worst);
        augmentations += 1;
    }
}

fn relative_gap(lb: f64, ub: f64) -> f64 {
    let diff = (ub - lb).max(0.0);
    if ub.abs() < 1e-12 {
        diff
    } else {
        diff / ub.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{inner_polytope, AmbiguitySet, Orientation, SupportSet};
    use crate::cases::synth_case;
    use crate::dro::monolithic::{deterministic_solve, monolithic_solve};
    use crate::opt::BundledSimplex;

    #[test]
    fn single_vertex_support_is_deterministic() {
        let grid = synth_case(4).unwrap();
        let backend = BundledSimplex::default();
        let cfg = DroConfig::default();
        let f = FieldScenario::new(1.5, 1.0);
        let support = SupportSet::Polytope {
            vertices: vec![(f.e, f.n)],
            orientation: Orientation::Exact,
        };
        let amb = AmbiguitySet {
            mean: f,
            support,
        };
        let ccg = ccg_solve(&grid, &amb, &backend, &cfg).unwrap();
        let det = deterministic_solve(&grid, f, &backend, &cfg).unwrap();
        let scale = 1.0 + det.objective.abs();
        assert!(
            (ccg.objective - det.objective).abs() <= 1e-6 * scale,
            "ccg {} vs det {}",
            ccg.objective,
            det.objective
        );
        assert!(ccg.iterations <= 1);
        assert!(ccg.tolerance_met);
    }

    #[test]
    fn triangle_matches_monolithic() {
        let grid = synth_case(4).unwrap();
        let backend = BundledSimplex::default();
        let cfg = DroConfig::default();
        let support = inner_polytope(2.5, 3).unwrap();
        let amb = AmbiguitySet::new(FieldScenario::new(0.5, 1.0), support).unwrap();
        let ccg = ccg_solve(&grid, &amb, &backend, &cfg).unwrap();
        let mono = monolithic_solve(&grid, &amb, &backend, &cfg).unwrap();
        let scale = 1.0 + mono.objective.abs();
        assert!(
            (ccg.objective - mono.objective).abs() <= 1e-6 * scale,
            "ccg {} vs mono {} (gap {})",
            ccg.objective,
            mono.objective,
            ccg.gap
        );
        assert!(ccg.iterations <= 3, "iterations {}", ccg.iterations);
        assert!(ccg.tolerance_met);
        // LB trace never decreases, UB trace never increases.
        for w in ccg.log.windows(2) {
            assert!(w[1].lb >= w[0].lb - 1e-9);
            assert!(w[1].ub <= w[0].ub + 1e-9);
        }
    }

    #[test]
    fn enumeration_tie_breaks_low_index() {
        let grid = synth_case(4).unwrap();
        let backend = BundledSimplex::default();
        let plan_model = {
            let cfg = DroConfig::default();
            deterministic_solve(&grid, FieldScenario::ZERO, &backend, &cfg).unwrap()
        };
        // Two identical vertices: the first must win.
        let verts = [FieldScenario::new(1.0, 1.0), FieldScenario::new(1.0, 1.0)];
        let (worst, _, scores) =
            subproblem_enumerate(&grid, &plan_model.plan, 0.0, 0.0, &verts, &backend).unwrap();
        assert_eq!(worst, 0);
        assert!((scores[0] - scores[1]).abs() < 1e-9);
    }
}
