//! Second-stage model: given switching states, bus voltages and loss
//! budgets, compute GICs on the energized DC network and price the
//! reactive losses exceeding the budget.
//!
//! One row emitter serves three consumers:
//! * scenario copies inside master/monolithic problems (first-stage
//!   quantities are model variables, the field is fixed);
//! * standalone LPs for a fixed plan (everything folds to constants);
//! * the complementarity subproblem (plan fixed, field variable) — the
//!   field only ever multiplies fixed plan values, so rows stay linear.
//!
//! Every variable bound is emitted as an explicit row so the matrix form
//! `A x + B(xi) z >= d` is complete for dualization; the `x`-coefficients
//! never depend on the field, which keeps `Q(z, .)` convex in the field.

use crate::gic::FieldScenario;
use crate::grid::{BusId, DcArcId, EdgeId, GridCase};
use crate::opt::{Backend, LinExpr, Model, Sense, Status, VarId, INF};
use crate::stage::first::{FirstStageHandles, FirstStagePlan};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StageError {
    #[error("induced EMF {emf:.3} V on arc \"{arc}\" exceeds vbar_d = {vbar:.3} V; big-M switching is invalid for this field")]
    BigMViolated { arc: String, emf: f64, vbar: f64 },
    #[error("second-stage LP reported {0:?}; the slack makes it complete-recourse, so this signals a modeling bug or an effective-GIC cap that no topology can satisfy")]
    LpFailed(Status),
    #[error("voltage envelope FixedAtPlan requires plan-fixed voltages")]
    EnvelopeNeedsPlan,
    #[error(transparent)]
    Model(#[from] crate::opt::ModelError),
}

/// How a first-stage quantity appears inside second-stage rows.
#[derive(Debug, Clone, Copy)]
pub enum ZVal {
    Var(VarId),
    Fixed(f64),
}

/// How the field appears inside second-stage rows.
#[derive(Debug, Clone, Copy)]
pub enum XiVal {
    Fixed(FieldScenario),
    /// Field components as model variables (complementarity subproblem).
    Vars { e: VarId, n: VarId },
}

/// Treatment of the `u = v_i * I_eff` product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoltageEnvelope {
    /// Static McCormick box over `[v_lo, v_hi] x [0, I_eff_max]`; this is
    /// the matrix form used by scenario copies, enumeration and the
    /// complementarity oracle.
    Box,
    /// Degenerate box `[v*, v*]`: exact product at a fixed plan voltage.
    FixedAtPlan,
}

/// First-stage quantities a second-stage block couples to.
#[derive(Debug, Clone)]
pub struct StageLink {
    pub z_edge: Vec<ZVal>,
    pub v_bus: Vec<ZVal>,
    pub d_qloss: Vec<ZVal>,
}

impl StageLink {
    pub fn from_handles(h: &FirstStageHandles) -> Self {
        StageLink {
            z_edge: h.z_edge.iter().map(|&v| ZVal::Var(v)).collect(),
            v_bus: h.v.iter().map(|&v| ZVal::Var(v)).collect(),
            d_qloss: h.d_qloss.iter().map(|&v| ZVal::Var(v)).collect(),
        }
    }

    pub fn from_plan(plan: &FirstStagePlan) -> Self {
        StageLink {
            z_edge: plan
                .z_edge
                .iter()
                .map(|&on| ZVal::Fixed(if on { 1.0 } else { 0.0 }))
                .collect(),
            v_bus: plan.v.iter().map(|&v| ZVal::Fixed(v)).collect(),
            d_qloss: plan.d_qloss.iter().map(|&v| ZVal::Fixed(v)).collect(),
        }
    }
}

/// Handles to one second-stage block's variables.
#[derive(Debug, Clone)]
pub struct SecondStageVars {
    pub i_arc: Vec<VarId>,
    pub v_node: Vec<VarId>,
    /// Per transformer edge, in edge order.
    pub i_eff: Vec<(EdgeId, VarId)>,
    /// Lifted `v_i * I_eff` products, aligned with `i_eff`.
    pub u: Vec<(EdgeId, VarId)>,
    pub s: Vec<VarId>,
}

impl SecondStageVars {
    /// The block's objective `c^T x = kappa_s * sum s_i` as terms.
    pub fn cost_terms(&self, grid: &GridCase) -> Vec<(VarId, f64)> {
        self.s.iter().map(|&v| (v, grid.gmd.kappa_s)).collect()
    }

    pub fn i_eff_of(&self, edge: EdgeId) -> Option<VarId> {
        self.i_eff.iter().find(|(e, _)| *e == edge).map(|(_, v)| *v)
    }
}

/// Per-arc big-M coefficients `M+ = vbar_d + xi_l`, `M- = vbar_d - xi_l`
/// for a fixed field; also the validity check `|xi_l| <= vbar_d`.
#[derive(Debug, Clone)]
pub struct BigMConfig {
    pub m_plus: Vec<f64>,
    pub m_minus: Vec<f64>,
}

impl BigMConfig {
    pub fn for_field(grid: &GridCase, field: FieldScenario) -> Result<Self, StageError> {
        let vbar = grid.gmd.vbar_d;
        let mut m_plus = Vec::with_capacity(grid.dc_arcs.len());
        let mut m_minus = Vec::with_capacity(grid.dc_arcs.len());
        for l in 0..grid.dc_arcs.len() {
            let emf = crate::gic::induced_emf(grid, DcArcId(l), field);
            if emf.abs() > vbar {
                return Err(StageError::BigMViolated {
                    arc: grid.dc_arcs[l].name.clone(),
                    emf,
                    vbar,
                });
            }
            m_plus.push(vbar + emf);
            m_minus.push(vbar - emf);
        }
        Ok(BigMConfig { m_plus, m_minus })
    }
}

/// Coefficient of a first-stage term inside one row, affine in the field:
/// `k0 + ke * xi_E + kn * xi_N`.
#[derive(Debug, Clone, Copy)]
struct ZCoef {
    k0: f64,
    ke: f64,
    kn: f64,
}

impl ZCoef {
    fn constant(k0: f64) -> Self {
        ZCoef { k0, ke: 0.0, kn: 0.0 }
    }

    fn at(&self, xi: FieldScenario) -> f64 {
        self.k0 + self.ke * xi.e + self.kn * xi.n
    }
}

/// Appends `coef * zterm` to a row under the given field treatment.
/// Constants migrate into the expression constant; with a variable field
/// the z-part must be fixed (otherwise the row would be bilinear).
fn push_z_term(expr: &mut LinExpr, z: ZVal, coef: ZCoef, xi: &XiVal) {
    match (z, xi) {
        (ZVal::Var(zv), XiVal::Fixed(f)) => {
            let c = coef.at(*f);
            if c != 0.0 {
                expr.terms.push((zv, c));
            }
        }
        (ZVal::Fixed(zval), XiVal::Fixed(f)) => {
            expr.constant += coef.at(*f) * zval;
        }
        (ZVal::Fixed(zval), XiVal::Vars { e, n }) => {
            expr.constant += coef.k0 * zval;
            if coef.ke * zval != 0.0 {
                expr.terms.push((*e, coef.ke * zval));
            }
            if coef.kn * zval != 0.0 {
                expr.terms.push((*n, coef.kn * zval));
            }
        }
        (ZVal::Var(_), XiVal::Vars { .. }) => {
            unreachable!("bilinear z * xi term; fix one side first")
        }
    }
}

/// Emits one second-stage block into `m`. All x-variables are created free
/// with their operational ranges enforced as rows, so the block is exactly
/// the matrix form `A x + B(xi) z >= d`.
pub fn append_second_stage(
    m: &mut Model,
    grid: &GridCase,
    link: &StageLink,
    xi: XiVal,
    envelope: VoltageEnvelope,
    tag: &str,
) -> Result<SecondStageVars, StageError> {
    if let XiVal::Fixed(f) = xi {
        // Validates |xi_l| <= vbar_d on every arc.
        BigMConfig::for_field(grid, f)?;
    }
    if envelope == VoltageEnvelope::FixedAtPlan
        && link.v_bus.iter().any(|z| matches!(z, ZVal::Var(_)))
    {
        return Err(StageError::EnvelopeNeedsPlan);
    }

    let vbar = grid.gmd.vbar_d;
    let na = grid.dc_arcs.len();
    let nn = grid.dc_nodes.len();
    let nb = grid.buses.len();

    let i_arc: Vec<VarId> = (0..na)
        .map(|l| m.add_var(format!("{tag}:I[{}]", grid.dc_arcs[l].name), -INF, INF, 0.0))
        .collect();
    let v_node: Vec<VarId> = (0..nn)
        .map(|n| m.add_var(format!("{tag}:vd[{}]", grid.dc_nodes[n].name), -INF, INF, 0.0))
        .collect();
    let i_eff: Vec<(EdgeId, VarId)> = grid
        .transformer_edges()
        .map(|e| {
            (
                e,
                m.add_var(format!("{tag}:Ieff[{}]", grid.ac_edges[e.0].name), -INF, INF, 0.0),
            )
        })
        .collect();
    let u: Vec<(EdgeId, VarId)> = i_eff
        .iter()
        .map(|&(e, _)| {
            (
                e,
                m.add_var(format!("{tag}:u[{}]", grid.ac_edges[e.0].name), -INF, INF, 0.0),
            )
        })
        .collect();
    let s: Vec<VarId> = (0..nb)
        .map(|i| m.add_var(format!("{tag}:s[{}]", grid.buses[i].name), -INF, INF, 0.0))
        .collect();

    // Switched flow law and flow caps, per arc. With z = 1 the pair of
    // big-M rows pins I/gamma = v_m - v_n + xi_l; with z = 0 the cap rows
    // force I = 0 and the big-M rows go inert.
    for l in 0..na {
        let arc = &grid.dc_arcs[l];
        let (le, ln) = (arc.len_e, arc.len_n);
        let zedge = link.z_edge[arc.ac_edge.0];
        let name = &arc.name;
        let ginv = 1.0 / arc.gamma;

        // -I/g + v_m - v_n + (xi_l - vbar) z >= -vbar
        let mut r = LinExpr::new()
            .add(i_arc[l], -ginv)
            .add(v_node[arc.from.0], 1.0)
            .add(v_node[arc.to.0], -1.0);
        push_z_term(&mut r, zedge, ZCoef { k0: -vbar, ke: le, kn: ln }, &xi);
        m.add_constraint(format!("{tag}:flow_ub[{name}]"), r, Sense::Ge, -vbar);

        // +I/g - v_m + v_n - (vbar + xi_l) z >= -vbar
        let mut r = LinExpr::new()
            .add(i_arc[l], ginv)
            .add(v_node[arc.from.0], -1.0)
            .add(v_node[arc.to.0], 1.0);
        push_z_term(&mut r, zedge, ZCoef { k0: -vbar, ke: -le, kn: -ln }, &xi);
        m.add_constraint(format!("{tag}:flow_lb[{name}]"), r, Sense::Ge, -vbar);

        // -I/g + (vbar + xi_l) z >= 0
        let mut r = LinExpr::new().add(i_arc[l], -ginv);
        push_z_term(&mut r, zedge, ZCoef { k0: vbar, ke: le, kn: ln }, &xi);
        m.add_constraint(format!("{tag}:cap_ub[{name}]"), r, Sense::Ge, 0.0);

        // +I/g + (vbar - xi_l) z >= 0
        let mut r = LinExpr::new().add(i_arc[l], ginv);
        push_z_term(&mut r, zedge, ZCoef { k0: vbar, ke: -le, kn: -ln }, &xi);
        m.add_constraint(format!("{tag}:cap_lb[{name}]"), r, Sense::Ge, 0.0);
    }

    // Nodal balance: sum(in) - sum(out) = a_m v_m.
    for n in 0..nn {
        let node = &grid.dc_nodes[n];
        let mut r = LinExpr::new();
        for &l in grid.arcs_into(crate::grid::DcNodeId(n)) {
            r.terms.push((i_arc[l.0], 1.0));
        }
        for &l in grid.arcs_out_of(crate::grid::DcNodeId(n)) {
            r.terms.push((i_arc[l.0], -1.0));
        }
        r.terms.push((v_node[n], -node.a));
        m.add_constraint(format!("{tag}:balance[{}]", node.name), r, Sense::Eq, 0.0);
    }

    // Nodal voltage box.
    for n in 0..nn {
        let name = &grid.dc_nodes[n].name;
        m.add_constraint(
            format!("{tag}:vd_lo[{name}]"),
            LinExpr::var(v_node[n]),
            Sense::Ge,
            -vbar,
        );
        m.add_constraint(
            format!("{tag}:vd_hi[{name}]"),
            LinExpr::scaled(v_node[n], -1.0),
            Sense::Ge,
            -vbar,
        );
    }

    // Effective GIC: epigraph of |Theta| plus the hard cap.
    for (&(e, ieff), &(_, uvar)) in i_eff.iter().zip(&u) {
        let edge = &grid.ac_edges[e.0];
        let tx = edge.transformer().unwrap();
        let name = &edge.name;
        let theta = grid.theta_terms(e);

        let mut plus = LinExpr::var(ieff);
        let mut minus = LinExpr::var(ieff);
        for &(l, wgt) in &theta {
            plus.terms.push((i_arc[l.0], -wgt));
            minus.terms.push((i_arc[l.0], wgt));
        }
        m.add_constraint(format!("{tag}:eff+[{name}]"), plus, Sense::Ge, 0.0);
        m.add_constraint(format!("{tag}:eff-[{name}]"), minus, Sense::Ge, 0.0);
        m.add_constraint(
            format!("{tag}:eff_lo[{name}]"),
            LinExpr::var(ieff),
            Sense::Ge,
            0.0,
        );
        m.add_constraint(
            format!("{tag}:eff_cap[{name}]"),
            LinExpr::scaled(ieff, -1.0),
            Sense::Ge,
            -tx.i_eff_max,
        );

        // u = v_i * I_eff through the chosen envelope; the loss is charged
        // to the from-side bus.
        let bus = edge.from;
        let b = &grid.buses[bus.0];
        let cap = tx.i_eff_max;
        let vz = link.v_bus[bus.0];
        match envelope {
            VoltageEnvelope::FixedAtPlan => {
                let vstar = match vz {
                    ZVal::Fixed(v) => v,
                    ZVal::Var(_) => unreachable!("checked above"),
                };
                m.add_constraint(
                    format!("{tag}:u_exact[{name}]"),
                    LinExpr::var(uvar).add(ieff, -vstar),
                    Sense::Eq,
                    0.0,
                );
            }
            VoltageEnvelope::Box => {
                // u >= v_lo * I
                m.add_constraint(
                    format!("{tag}:u_mc1[{name}]"),
                    LinExpr::var(uvar).add(ieff, -b.v_lo),
                    Sense::Ge,
                    0.0,
                );
                // u >= v_hi * I + cap * v - v_hi * cap
                let mut r = LinExpr::var(uvar).add(ieff, -b.v_hi);
                push_z_term(&mut r, vz, ZCoef::constant(-cap), &xi);
                m.add_constraint(format!("{tag}:u_mc2[{name}]"), r, Sense::Ge, -b.v_hi * cap);
                // u <= v_lo * I + cap * v - v_lo * cap
                let mut r = LinExpr::scaled(uvar, -1.0).add(ieff, b.v_lo);
                push_z_term(&mut r, vz, ZCoef::constant(cap), &xi);
                m.add_constraint(format!("{tag}:u_mc3[{name}]"), r, Sense::Ge, b.v_lo * cap);
                // u <= v_hi * I
                m.add_constraint(
                    format!("{tag}:u_mc4[{name}]"),
                    LinExpr::scaled(uvar, -1.0).add(ieff, b.v_hi),
                    Sense::Ge,
                    0.0,
                );
            }
        }
    }

    // Slack pricing: s_i >= sum k_e u_e - d_qloss_i, s_i >= 0.
    for i in 0..nb {
        let name = &grid.buses[i].name;
        let mut r = LinExpr::var(s[i]);
        for &e in grid.transformers_at_loss_bus(BusId(i)) {
            let k = grid.ac_edges[e.0].transformer().unwrap().k_loss;
            let uvar = u.iter().find(|(ee, _)| *ee == e).unwrap().1;
            r.terms.push((uvar, -k));
        }
        push_z_term(&mut r, link.d_qloss[i], ZCoef::constant(1.0), &xi);
        m.add_constraint(format!("{tag}:price[{name}]"), r, Sense::Ge, 0.0);
        m.add_constraint(
            format!("{tag}:s_lo[{name}]"),
            LinExpr::var(s[i]),
            Sense::Ge,
            0.0,
        );
    }

    Ok(SecondStageVars { i_arc, v_node, i_eff, u, s })
}

/// Builds the standalone second-stage LP for a fixed plan and field, with
/// objective `kappa_s * sum s_i`.
pub fn build_second_stage(
    grid: &GridCase,
    plan: &FirstStagePlan,
    field: FieldScenario,
    envelope: VoltageEnvelope,
) -> Result<(Model, SecondStageVars), StageError> {
    let mut m = Model::new();
    let link = StageLink::from_plan(plan);
    let vars = append_second_stage(&mut m, grid, &link, XiVal::Fixed(field), envelope, "q")?;
    for (v, c) in vars.cost_terms(grid) {
        m.add_obj_coef(v, c);
    }
    Ok((m, vars))
}

/// Second-stage point: currents, voltages, effective GICs, products and
/// priced slack.
#[derive(Debug, Clone)]
pub struct SecondStageSolution {
    pub objective: f64,
    pub i_arc: Vec<f64>,
    pub v_node: Vec<f64>,
    pub i_eff: Vec<(EdgeId, f64)>,
    pub u: Vec<(EdgeId, f64)>,
    pub s: Vec<f64>,
    pub duals: Vec<f64>,
}

/// Optimal second-stage cost `Q(z, xi)` with diagnostics. The default
/// (exact) envelope makes the reported losses equal the physical
/// `k_e v_i I_eff` products.
pub fn evaluate_q(
    grid: &GridCase,
    plan: &FirstStagePlan,
    field: FieldScenario,
    backend: &dyn Backend,
    envelope: VoltageEnvelope,
) -> Result<SecondStageSolution, StageError> {
    let (m, vars) = build_second_stage(grid, plan, field, envelope)?;
    let sol = crate::opt::solve_lp(&m, backend);
    if sol.status != Status::Optimal {
        return Err(StageError::LpFailed(sol.status));
    }
    let val = |v: VarId| sol.x[v.index()];
    Ok(SecondStageSolution {
        objective: sol.obj,
        i_arc: vars.i_arc.iter().map(|&v| val(v)).collect(),
        v_node: vars.v_node.iter().map(|&v| val(v)).collect(),
        i_eff: vars.i_eff.iter().map(|&(e, v)| (e, val(v))).collect(),
        u: vars.u.iter().map(|&(e, v)| (e, val(v))).collect(),
        s: vars.s.iter().map(|&v| val(v)).collect(),
        duals: sol.duals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::synth_case;
    use crate::gic::{solve_gic, Topology};
    use crate::opt::BundledSimplex;

    fn all_on_plan(grid: &GridCase, d_qloss: f64) -> FirstStagePlan {
        FirstStagePlan {
            z_edge: vec![true; grid.ac_edges.len()],
            z_gen: vec![true; grid.generators.len()],
            f_p: vec![0.0; grid.generators.len()],
            f_q: vec![0.0; grid.generators.len()],
            p_from: vec![0.0; grid.ac_edges.len()],
            p_to: vec![0.0; grid.ac_edges.len()],
            q_from: vec![0.0; grid.ac_edges.len()],
            q_to: vec![0.0; grid.ac_edges.len()],
            v: grid.buses.iter().map(|b| 0.5 * (b.v_lo + b.v_hi)).collect(),
            w: grid.buses.iter().map(|b| (0.5 * (b.v_lo + b.v_hi)).powi(2)).collect(),
            wz_from: vec![0.0; grid.ac_edges.len()],
            wz_to: vec![0.0; grid.ac_edges.len()],
            wcz: vec![0.0; grid.ac_edges.len()],
            wsz: vec![0.0; grid.ac_edges.len()],
            w_c: vec![0.0; grid.ac_edges.len()],
            w_s: vec![0.0; grid.ac_edges.len()],
            l_p_plus: vec![0.0; grid.buses.len()],
            l_p_minus: vec![0.0; grid.buses.len()],
            l_q_plus: vec![0.0; grid.buses.len()],
            l_q_minus: vec![0.0; grid.buses.len()],
            d_qloss: vec![d_qloss; grid.buses.len()],
            first_stage_cost: 0.0,
        }
    }

    #[test]
    fn all_lines_off_forces_zero_currents() {
        let grid = synth_case(4).unwrap();
        let mut plan = all_on_plan(&grid, 0.0);
        plan.z_edge.iter_mut().for_each(|z| *z = false);
        let backend = BundledSimplex::default();
        let sol = evaluate_q(
            &grid,
            &plan,
            FieldScenario::new(5.0, 4.0),
            &backend,
            VoltageEnvelope::FixedAtPlan,
        )
        .unwrap();
        assert!(sol.objective.abs() < 1e-9);
        assert!(sol.i_arc.iter().all(|&i| i.abs() < 1e-8));
        assert!(sol.i_eff.iter().all(|&(_, i)| i.abs() < 1e-8));
    }

    #[test]
    fn zero_field_is_free() {
        let grid = synth_case(8).unwrap();
        let plan = all_on_plan(&grid, 0.0);
        let backend = BundledSimplex::default();
        let sol = evaluate_q(&grid, &plan, FieldScenario::ZERO, &backend, VoltageEnvelope::FixedAtPlan)
            .unwrap();
        assert!(sol.objective.abs() < 1e-9, "Q = {}", sol.objective);
    }

    #[test]
    fn currents_match_the_physics_oracle() {
        let grid = synth_case(8).unwrap();
        let plan = all_on_plan(&grid, 1e6);
        let field = FieldScenario::new(4.0, 2.0);
        let backend = BundledSimplex::default();
        let sol = evaluate_q(&grid, &plan, field, &backend, VoltageEnvelope::FixedAtPlan).unwrap();
        assert!(sol.objective.abs() < 1e-9, "huge budget means zero cost");
        let oracle = solve_gic(&grid, &Topology::all_on(&grid), field).unwrap();
        for (l, (lp, orc)) in sol.i_arc.iter().zip(&oracle.i_arc).enumerate() {
            assert!(
                (lp - orc).abs() <= 1e-6 * (1.0 + orc.abs()),
                "arc {l}: LP {lp} vs oracle {orc}"
            );
        }
    }

    #[test]
    fn zero_budget_prices_full_loss() {
        let grid = synth_case(4).unwrap();
        let plan = all_on_plan(&grid, 0.0);
        let field = FieldScenario::new(5.0, 4.0);
        let backend = BundledSimplex::default();
        let sol = evaluate_q(&grid, &plan, field, &backend, VoltageEnvelope::FixedAtPlan).unwrap();

        let oracle = solve_gic(&grid, &plan.topology(), field).unwrap();
        let expected: f64 = (0..grid.buses.len())
            .map(|i| {
                let q = crate::gic::qloss_at_bus(&grid, BusId(i), plan.v[i], &oracle.i_eff);
                grid.gmd.kappa_s * q.max(0.0)
            })
            .sum();
        assert!(
            (sol.objective - expected).abs() <= 1e-6 * (1.0 + expected),
            "Q {} vs oracle {}",
            sol.objective,
            expected
        );
    }

    #[test]
    fn big_m_rejects_oversized_fields() {
        let grid = synth_case(4).unwrap();
        let plan = all_on_plan(&grid, 0.0);
        // vbar_d = 10 kV; a 1000 V/km field over ~30 km lines exceeds it.
        let err = build_second_stage(
            &grid,
            &plan,
            FieldScenario::new(1000.0, 0.0),
            VoltageEnvelope::Box,
        )
        .unwrap_err();
        assert!(matches!(err, StageError::BigMViolated { .. }));
    }

    #[test]
    fn box_envelope_never_exceeds_exact() {
        let grid = synth_case(4).unwrap();
        let plan = all_on_plan(&grid, 0.02);
        let field = FieldScenario::new(3.0, 2.0);
        let backend = BundledSimplex::default();
        let exact = evaluate_q(&grid, &plan, field, &backend, VoltageEnvelope::FixedAtPlan)
            .unwrap()
            .objective;
        let boxed = evaluate_q(&grid, &plan, field, &backend, VoltageEnvelope::Box)
            .unwrap()
            .objective;
        assert!(boxed <= exact + 1e-9, "box {boxed} vs exact {exact}");
    }
}
