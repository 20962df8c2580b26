//! Complementarity reformulation of the worst-case subproblem
//! `max_{xi in support} Q(plan, xi) - lambda . xi`.
//!
//! The inner minimization is replaced by its KKT system: primal rows,
//! dual feasibility `A^T beta = c`, and big-M complementarity
//! `0 <= beta <= M alpha`, `0 <= slack <= M_slack (1 - alpha)` with one
//! binary per inequality row. Used only as a verification oracle for the
//! enumeration path, which solves the same maximization vertex by vertex.

use super::{DroConfig, DroError};
use crate::ambiguity::SupportSet;
use crate::gic::FieldScenario;
use crate::grid::GridCase;
use crate::opt::{Backend, LinExpr, Model, Sense, Status, VarId, INF};
use crate::stage::{append_second_stage, FirstStagePlan, StageLink, VoltageEnvelope, XiVal};

#[derive(Debug, Clone)]
pub struct KktConfig {
    /// Bound on dual multipliers; defaults to
    /// `10 * (max |c| + max |d| + max slack bound)`.
    pub m_dual: Option<f64>,
    /// Re-solve with the dual bound scaled 10x and reject drifting values.
    pub verify_scaling: bool,
}

impl Default for KktConfig {
    fn default() -> Self {
        KktConfig {
            m_dual: None,
            verify_scaling: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KktOutcome {
    /// `max Q - lambda . xi` over the support.
    pub value: f64,
    /// A maximizing field.
    pub xi: FieldScenario,
    pub m_dual: f64,
    pub binaries: usize,
}

/// The assembled single-level MILP, exposed for inspection in tests.
pub struct KktSubproblem {
    pub model: Model,
    pub xi_e: VarId,
    pub xi_n: VarId,
    pub n_primal_vars: usize,
    pub n_complementarity: usize,
    pub m_dual: f64,
}

/// One harvested primal row `x_terms . x + xi_terms . xi {>=,=} rhs`.
struct PrimalRow {
    x_terms: Vec<(usize, f64)>,
    xi_terms: Vec<(usize, f64)>, // index 0 = xi_E, 1 = xi_N
    rhs: f64,
    equality: bool,
}

pub fn subproblem_kkt(
    grid: &GridCase,
    plan: &FirstStagePlan,
    lambda_e: f64,
    lambda_n: f64,
    support: &SupportSet,
    backend: &dyn Backend,
    cfg: &KktConfig,
) -> Result<KktOutcome, DroError> {
    let built = build_kkt(grid, plan, lambda_e, lambda_n, support, cfg)?;
    let m_dual = built.m_dual;
    let value1 = solve_one(&built, backend)?;
    if cfg.verify_scaling {
        let scaled = KktConfig {
            m_dual: Some(m_dual * 10.0),
            verify_scaling: false,
        };
        let built2 = build_kkt(grid, plan, lambda_e, lambda_n, support, &scaled)?;
        let value2 = solve_one(&built2, backend)?;
        let scale = 1.0 + value1.0.abs().max(value2.0.abs());
        if (value1.0 - value2.0).abs() > 1e-6 * scale {
            return Err(DroError::KktUnstable {
                v1: value1.0,
                v2: value2.0,
            });
        }
    }
    Ok(KktOutcome {
        value: value1.0,
        xi: value1.1,
        m_dual,
        binaries: built.n_complementarity,
    })
}

fn solve_one(built: &KktSubproblem, backend: &dyn Backend) -> Result<(f64, FieldScenario), DroError> {
    let sol = backend.solve_milp(&built.model.to_lin_problem());
    if sol.status != Status::Optimal {
        return Err(DroError::KktFailed(sol.status));
    }
    // The model minimizes the negated objective.
    Ok((
        -sol.obj,
        FieldScenario::new(sol.x[built.xi_e.index()], sol.x[built.xi_n.index()]),
    ))
}

/// Assembles the complementarity MILP.
pub fn build_kkt(
    grid: &GridCase,
    plan: &FirstStagePlan,
    lambda_e: f64,
    lambda_n: f64,
    support: &SupportSet,
    cfg: &KktConfig,
) -> Result<KktSubproblem, DroError> {
    // Field box from the support vertices.
    let verts = support.vertices()?;
    let (mut e_lo, mut e_hi, mut n_lo, mut n_hi) = (INF, -INF, INF, -INF);
    for v in &verts {
        e_lo = e_lo.min(v.e);
        e_hi = e_hi.max(v.e);
        n_lo = n_lo.min(v.n);
        n_hi = n_hi.max(v.n);
    }

    // Harvest the primal block from a scratch model with the field as
    // variables 0 and 1.
    let mut scratch = Model::new();
    let sxe = scratch.add_var("xi_E", e_lo, e_hi, 0.0);
    let sxn = scratch.add_var("xi_N", n_lo, n_hi, 0.0);
    debug_assert_eq!(sxe.index(), 0);
    debug_assert_eq!(sxn.index(), 1);
    let link = StageLink::from_plan(plan);
    let vars = append_second_stage(
        &mut scratch,
        grid,
        &link,
        XiVal::Vars { e: sxe, n: sxn },
        VoltageEnvelope::Box,
        "kkt",
    )?;
    // The slack variables have no feasible-side upper bound in the matrix
    // form; cap them (the cap is never active at an inner optimum) so every
    // row's slack range is finite for the complementarity big-Ms.
    let s_caps: Vec<f64> = (0..grid.buses.len())
        .map(|i| {
            let total: f64 = grid
                .transformers_at_loss_bus(crate::grid::BusId(i))
                .iter()
                .map(|&e| {
                    let tx = grid.ac_edges[e.0].transformer().unwrap();
                    tx.k_loss * grid.buses[i].v_hi * tx.i_eff_max
                })
                .sum();
            total + 1.0
        })
        .collect();
    for (i, &cap) in s_caps.iter().enumerate() {
        scratch.add_constraint(
            format!("kkt:s_cap[{}]", grid.buses[i].name),
            LinExpr::scaled(vars.s[i], -1.0),
            Sense::Ge,
            -cap,
        );
    }

    // Nominal boxes for interval arithmetic on row slacks.
    let n_scratch = scratch.num_vars();
    let mut box_lo = vec![-INF; n_scratch];
    let mut box_hi = vec![INF; n_scratch];
    box_lo[0] = e_lo;
    box_hi[0] = e_hi;
    box_lo[1] = n_lo;
    box_hi[1] = n_hi;
    let xi_abs = |le: f64, ln: f64| -> f64 {
        let corners = [
            le * e_lo + ln * n_lo,
            le * e_lo + ln * n_hi,
            le * e_hi + ln * n_lo,
            le * e_hi + ln * n_hi,
        ];
        corners.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    };
    for (l, &v) in vars.i_arc.iter().enumerate() {
        let arc = &grid.dc_arcs[l];
        let bound = arc.gamma * (grid.gmd.vbar_d + xi_abs(arc.len_e, arc.len_n));
        box_lo[v.index()] = -bound;
        box_hi[v.index()] = bound;
    }
    for &v in &vars.v_node {
        box_lo[v.index()] = -grid.gmd.vbar_d;
        box_hi[v.index()] = grid.gmd.vbar_d;
    }
    for &(e, v) in &vars.i_eff {
        box_lo[v.index()] = 0.0;
        box_hi[v.index()] = grid.ac_edges[e.0].transformer().unwrap().i_eff_max;
    }
    for &(e, v) in &vars.u {
        let edge = &grid.ac_edges[e.0];
        let cap = edge.transformer().unwrap().i_eff_max;
        let vhi = grid.buses[edge.from.0].v_hi;
        box_lo[v.index()] = -vhi * cap;
        box_hi[v.index()] = vhi * cap;
    }
    for (i, &v) in vars.s.iter().enumerate() {
        box_lo[v.index()] = 0.0;
        box_hi[v.index()] = s_caps[i];
    }

    // Split harvested rows.
    let mut rows = Vec::new();
    for (terms, lb, ub) in scratch.rows_view() {
        let equality = lb.is_finite() && ub.is_finite() && (lb - ub).abs() <= 1e-12;
        debug_assert!(
            equality || (lb.is_finite() && ub == INF),
            "emitter produces only >= and = rows"
        );
        let mut x_terms = Vec::new();
        let mut xi_terms = Vec::new();
        for &(j, c) in terms {
            if j <= 1 {
                xi_terms.push((j, c));
            } else {
                x_terms.push((j - 2, c));
            }
        }
        rows.push(PrimalRow {
            x_terms,
            xi_terms,
            rhs: lb,
            equality,
        });
    }

    // Inner objective c over x (kappa_s on the slack block).
    let n_x = n_scratch - 2;
    let mut cost = vec![0.0; n_x];
    for (v, c) in vars.cost_terms(grid) {
        cost[v.index() - 2] = c;
    }

    // Per-row slack upper bound by interval arithmetic.
    let slack_bound = |row: &PrimalRow| -> f64 {
        let mut hi = -row.rhs;
        for &(j, c) in &row.x_terms {
            let (lo_j, hi_j) = (box_lo[j + 2], box_hi[j + 2]);
            hi += if c >= 0.0 { c * hi_j } else { c * lo_j };
        }
        for &(j, c) in &row.xi_terms {
            let (lo_j, hi_j) = (box_lo[j], box_hi[j]);
            hi += if c >= 0.0 { c * hi_j } else { c * lo_j };
        }
        hi.max(0.0)
    };

    let max_slack = rows
        .iter()
        .filter(|r| !r.equality)
        .map(|r| slack_bound(r))
        .fold(0.0_f64, f64::max);
    let max_c = cost.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let max_d = rows.iter().map(|r| r.rhs.abs()).fold(0.0_f64, f64::max);
    let m_dual = cfg.m_dual.unwrap_or(10.0 * (max_c + max_d + max_slack));

    // Assemble the MILP: maximize c.x - lambda.xi as a minimization.
    let mut m = Model::new();
    let xi_e = m.add_var("xi_E", e_lo, e_hi, lambda_e);
    let xi_n = m.add_var("xi_N", n_lo, n_hi, lambda_n);
    let x: Vec<VarId> = (0..n_x)
        .map(|j| m.add_var(format!("x[{j}]"), -INF, INF, -cost[j]))
        .collect();

    let mut n_alpha = 0usize;
    let mut beta_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_x];
    let mut betas: Vec<VarId> = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        let on_xi = |expr: &mut LinExpr| {
            for &(j, c) in &row.xi_terms {
                expr.terms.push((if j == 0 { xi_e } else { xi_n }, c));
            }
        };
        // Primal row.
        let mut pr = LinExpr::new();
        for &(j, c) in &row.x_terms {
            pr.terms.push((x[j], c));
        }
        on_xi(&mut pr);
        let sense = if row.equality { Sense::Eq } else { Sense::Ge };
        m.add_constraint(format!("primal[{r}]"), pr.clone(), sense, row.rhs);

        let beta = if row.equality {
            m.add_var(format!("beta[{r}]"), -INF, INF, 0.0)
        } else {
            let beta = m.add_var(format!("beta[{r}]"), 0.0, m_dual, 0.0);
            let alpha = m.add_binary(format!("alpha[{r}]"), 0.0);
            n_alpha += 1;
            // beta <= M alpha
            m.add_constraint(
                format!("comp_dual[{r}]"),
                LinExpr::var(beta).add(alpha, -m_dual),
                Sense::Le,
                0.0,
            );
            // slack <= M_slack (1 - alpha)
            let ms = slack_bound(row);
            let mut slack_row = pr;
            slack_row.terms.push((alpha, ms));
            m.add_constraint(format!("comp_slack[{r}]"), slack_row, Sense::Le, row.rhs + ms);
            beta
        };
        betas.push(beta);
        for &(j, c) in &row.x_terms {
            beta_cols[j].push((betas.len() - 1, c));
        }
    }

    // Dual feasibility A^T beta = c.
    for j in 0..n_x {
        let mut expr = LinExpr::new();
        for &(r, c) in &beta_cols[j] {
            expr.terms.push((betas[r], c));
        }
        m.add_constraint(format!("dualfeas[{j}]"), expr, Sense::Eq, cost[j]);
    }

    // The field ranges over the support polytope.
    for (k, ((ge, gn), h)) in support.half_planes()?.iter().enumerate() {
        m.add_constraint(
            format!("support[{k}]"),
            LinExpr::new().add(xi_e, *ge).add(xi_n, *gn),
            Sense::Le,
            *h,
        );
    }

    Ok(KktSubproblem {
        model: m,
        xi_e,
        xi_n,
        n_primal_vars: n_x,
        n_complementarity: n_alpha,
        m_dual,
    })
}

/// Convenience wrapper matching the enumeration signature; used by tests.
pub fn kkt_value(
    grid: &GridCase,
    plan: &FirstStagePlan,
    lambda_e: f64,
    lambda_n: f64,
    support: &SupportSet,
    backend: &dyn Backend,
) -> Result<f64, DroError> {
    let _ = DroConfig::default();
    Ok(subproblem_kkt(grid, plan, lambda_e, lambda_n, support, backend, &KktConfig::default())?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{inner_polytope, Orientation};
    use crate::cases::synth_case;
    use crate::dro::{deterministic_solve, subproblem_enumerate, DroConfig};
    use crate::opt::BundledSimplex;

    #[test]
    fn degenerate_support_equals_single_q() {
        let grid = synth_case(4).unwrap();
        let backend = BundledSimplex::default();
        let det = deterministic_solve(&grid, FieldScenario::new(1.0, 0.5), &backend, &DroConfig::default())
            .unwrap();
        let f = FieldScenario::new(2.0, 1.0);
        // A tiny triangle around f keeps the maximizer pinned at ~f.
        let eps = 1e-9;
        let tri = crate::ambiguity::SupportSet::Polytope {
            vertices: vec![(f.e, f.n), (f.e + eps, f.n), (f.e, f.n + eps)],
            orientation: Orientation::Exact,
        };
        let (lambda_e, lambda_n) = (3.0, -2.0);
        let kkt = subproblem_kkt(&grid, &det.plan, lambda_e, lambda_n, &tri, &backend, &KktConfig::default())
            .unwrap();
        let (_, z_enum, _) = subproblem_enumerate(
            &grid,
            &det.plan,
            lambda_e,
            lambda_n,
            &[f],
            &backend,
        )
        .unwrap();
        let scale = 1.0 + z_enum.abs();
        assert!(
            (kkt.value - z_enum).abs() <= 1e-5 * scale,
            "kkt {} vs enum {}",
            kkt.value,
            z_enum
        );
    }

    #[test]
    fn triangle_support_matches_enumeration() {
        let grid = synth_case(4).unwrap();
        let backend = BundledSimplex::default();
        let det = deterministic_solve(&grid, FieldScenario::new(1.5, 1.0), &backend, &DroConfig::default())
            .unwrap();
        let tri = inner_polytope(2.0, 3).unwrap();
        let verts = tri.vertices().unwrap();
        for (le, ln) in [(0.0, 0.0), (40.0, -25.0)] {
            let (_, z_enum, _) =
                subproblem_enumerate(&grid, &det.plan, le, ln, &verts, &backend).unwrap();
            let kkt =
                subproblem_kkt(&grid, &det.plan, le, ln, &tri, &backend, &KktConfig::default())
                    .unwrap();
            let scale = 1.0 + z_enum.abs();
            assert!(
                (kkt.value - z_enum).abs() <= 1e-5 * scale,
                "lambda ({le},{ln}): kkt {} vs enum {}",
                kkt.value,
                z_enum
            );
        }
    }
}
