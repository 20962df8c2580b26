//! Exact monolithic reformulation for triangle supports, and the
//! single-scenario deterministic mode.
//!
//! For a triangle support the worst-case expectation collapses to the
//! unique vertex weights reproducing the mean, so the whole two-stage
//! problem becomes one conic MILP with three weighted scenario copies.

use super::{DroConfig, DroError};
use crate::ambiguity::{scenario_weights, AmbiguitySet};
use crate::gic::FieldScenario;
use crate::grid::GridCase;
use crate::opt::{solve_conic_milp, Backend, Status, VarId};
use crate::stage::{
    append_second_stage, build_first_stage, first_stage_cost, FirstStagePlan, StageLink,
    VoltageEnvelope, XiVal,
};

/// A solved plan with its objective and bookkeeping shared by all methods.
#[derive(Debug, Clone)]
pub struct DroSolution {
    pub plan: FirstStagePlan,
    /// First-stage cost plus the (weighted / worst-case) second-stage cost,
    /// recomputed from solution values rather than epigraph variables.
    pub objective: f64,
    pub method: &'static str,
    /// Scenario fields the final model carried.
    pub scenarios: Vec<FieldScenario>,
    /// Per-scenario second-stage costs at the returned plan.
    pub scenario_costs: Vec<f64>,
    pub tolerance_met: bool,
}

/// Solves the three-scenario stochastic program equivalent to the DRO with
/// a triangle support: weights from the mean, one second-stage copy per
/// vertex (zero-weight copies still constrain feasibility).
pub fn monolithic_solve(
    grid: &GridCase,
    ambiguity: &AmbiguitySet,
    backend: &dyn Backend,
    cfg: &DroConfig,
) -> Result<DroSolution, DroError> {
    let weights = scenario_weights(&ambiguity.support, ambiguity.mean)?;
    let fields: Vec<FieldScenario> = weights.vertices.to_vec();
    solve_weighted(grid, &fields, &weights.p, backend, cfg, "monolithic")
}

/// Deterministic single-scenario model: one copy at the given field with
/// weight one.
pub fn deterministic_solve(
    grid: &GridCase,
    field: FieldScenario,
    backend: &dyn Backend,
    cfg: &DroConfig,
) -> Result<DroSolution, DroError> {
    solve_weighted(grid, &[field], &[1.0], backend, cfg, "deterministic")
}

pub(crate) fn solve_weighted(
    grid: &GridCase,
    fields: &[FieldScenario],
    weights: &[f64],
    backend: &dyn Backend,
    cfg: &DroConfig,
    method: &'static str,
) -> Result<DroSolution, DroError> {
    let (mut model, h) = build_first_stage(grid)?;
    let link = StageLink::from_handles(&h);
    let mut copies = Vec::with_capacity(fields.len());
    for (k, (&field, &p)) in fields.iter().zip(weights).enumerate() {
        let vars = append_second_stage(
            &mut model,
            grid,
            &link,
            XiVal::Fixed(field),
            VoltageEnvelope::Box,
            &format!("s{k}"),
        )?;
        for (v, c) in vars.cost_terms(grid) {
            model.add_obj_coef(v, p * c);
        }
        copies.push(vars);
    }

    let sol = solve_conic_milp(&model, &cfg.cones, backend);
    if sol.status != Status::Optimal {
        return Err(DroError::MasterFailed(sol.status));
    }
    let value = |v: VarId| sol.value(v);
    let plan = h.extract_plan(grid, &value);

    let scenario_costs: Vec<f64> = copies
        .iter()
        .map(|vars| {
            vars.cost_terms(grid)
                .iter()
                .map(|&(v, c)| c * sol.value(v))
                .sum::<f64>()
        })
        .collect();
    let objective = first_stage_cost(grid, &plan)
        + weights
            .iter()
            .zip(&scenario_costs)
            .map(|(p, q)| p * q)
            .sum::<f64>();

    Ok(DroSolution {
        plan,
        objective,
        method,
        scenarios: fields.to_vec(),
        scenario_costs,
        tolerance_met: sol.tolerance_met,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{inner_polytope, AmbiguitySet, Orientation, SupportSet};
    use crate::cases::synth_case;
    use crate::opt::BundledSimplex;

    #[test]
    fn zero_field_reduces_to_dispatch() {
        let grid = synth_case(4).unwrap();
        let backend = BundledSimplex::default();
        let cfg = DroConfig::default();
        let det = deterministic_solve(&grid, FieldScenario::ZERO, &backend, &cfg).unwrap();
        assert!(det.scenario_costs[0].abs() < 1e-9, "no GIC, no loss");
        assert!(det.plan.total_shed() < 1e-6);
        assert!(det.objective > 0.0, "dispatch still costs money");
    }

    #[test]
    fn degenerate_triangle_matches_deterministic() {
        // All three vertices at the same point: weights are irrelevant and
        // the model equals the deterministic one at that point.
        let grid = synth_case(4).unwrap();
        let backend = BundledSimplex::default();
        let cfg = DroConfig::default();
        let f = FieldScenario::new(2.0, 1.0);
        let det = deterministic_solve(&grid, f, &backend, &cfg).unwrap();
        let sol = solve_weighted(
            &grid,
            &[f, f, f],
            &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
            &backend,
            &cfg,
            "monolithic",
        )
        .unwrap();
        let scale = 1.0 + det.objective.abs();
        assert!(
            (det.objective - sol.objective).abs() <= 1e-6 * scale,
            "det {} vs mono {}",
            det.objective,
            sol.objective
        );
    }

    #[test]
    fn mean_at_vertex_is_single_scenario() {
        let grid = synth_case(4).unwrap();
        let backend = BundledSimplex::default();
        let cfg = DroConfig::default();
        let support = inner_polytope(2.0, 3).unwrap();
        // Mean at the (0, R) vertex puts all probability there.
        let amb = AmbiguitySet::new(FieldScenario::new(0.0, 2.0), support).unwrap();
        let mono = monolithic_solve(&grid, &amb, &backend, &cfg).unwrap();
        let det = deterministic_solve(&grid, FieldScenario::new(0.0, 2.0), &backend, &cfg).unwrap();
        let scale = 1.0 + det.objective.abs();
        assert!(
            (mono.objective - det.objective).abs() <= 2e-6 * scale,
            "mono {} vs det {}",
            mono.objective,
            det.objective
        );
    }

    #[test]
    fn mean_outside_triangle_propagates() {
        let grid = synth_case(4).unwrap();
        let backend = BundledSimplex::default();
        let support = SupportSet::Polytope {
            vertices: vec![(2.0, 0.0), (0.0, 2.0), (-2.0, 0.0)],
            orientation: Orientation::Inner,
        };
        // Bypass the AmbiguitySet check to exercise scenario_weights' own
        // rejection.
        let amb = AmbiguitySet {
            mean: FieldScenario::new(1.9, 1.9),
            support,
        };
        assert!(monolithic_solve(&grid, &amb, &backend, &DroConfig::default()).is_err());
    }
}
