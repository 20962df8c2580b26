//! Cones on top of LP/MILP: McCormick envelopes, supporting-hyperplane
//! separation, and the outer-approximation driver that turns any
//! [`Backend`] into a mixed-integer second-order-cone solver.

use super::backend::{Backend, Status};
use super::bb::CutRow;
use super::model::{Cone, LinExpr, LinProblem, Model, ModelError, RowId, VarId, INF};

/// Outer-approximation controls.
#[derive(Debug, Clone)]
pub struct ConeCutConfig {
    /// Cone feasibility tolerance.
    pub epsilon: f64,
    /// Maximum solve / separate rounds.
    pub max_rounds: u32,
}

impl Default for ConeCutConfig {
    fn default() -> Self {
        ConeCutConfig {
            epsilon: 1e-6,
            max_rounds: 200,
        }
    }
}

/// Adds the four McCormick inequalities for `w = x * y` over the factors'
/// boxes. Exact when one factor is binary or a box is degenerate.
pub fn mccormick(
    model: &mut Model,
    x: VarId,
    y: VarId,
    w: VarId,
    tag: &str,
) -> Result<[RowId; 4], ModelError> {
    let (xl, xu) = model.bounds(x);
    let (yl, yu) = model.bounds(y);
    if !(xl.is_finite() && xu.is_finite()) {
        return Err(ModelError::UnboundedFactor(model.var_name(x).to_owned()));
    }
    if !(yl.is_finite() && yu.is_finite()) {
        return Err(ModelError::UnboundedFactor(model.var_name(y).to_owned()));
    }
    // w >= xl*y + yl*x - xl*yl ; w >= xu*y + yu*x - xu*yu
    // w <= xl*y + yu*x - xl*yu ; w <= xu*y + yl*x - xu*yl
    let r1 = model.add_constraint(
        format!("{tag}:mc1"),
        LinExpr::var(w).add(y, -xl).add(x, -yl),
        super::model::Sense::Ge,
        -xl * yl,
    );
    let r2 = model.add_constraint(
        format!("{tag}:mc2"),
        LinExpr::var(w).add(y, -xu).add(x, -yu),
        super::model::Sense::Ge,
        -xu * yu,
    );
    let r3 = model.add_constraint(
        format!("{tag}:mc3"),
        LinExpr::var(w).add(y, -xl).add(x, -yu),
        super::model::Sense::Le,
        -xl * yu,
    );
    let r4 = model.add_constraint(
        format!("{tag}:mc4"),
        LinExpr::var(w).add(y, -xu).add(x, -yl),
        super::model::Sense::Le,
        -xu * yl,
    );
    Ok([r1, r2, r3, r4])
}

/// A violated cone yields a supporting hyperplane `sum c_j x_j <= rhs`.
#[derive(Debug, Clone)]
pub struct ConeCut {
    pub terms: Vec<(VarId, f64)>,
    pub rhs: f64,
    pub violation: f64,
}

/// Norm-cone view of a cone: members `e_i` and bound `e_0`, representing
/// `||e||_2 <= e_0`. Rotated cones map through the standard identity
/// `||(2 x, y1 - y2)|| <= y1 + y2`.
fn norm_view(cone: &Cone) -> (Vec<LinExpr>, LinExpr) {
    match cone {
        Cone::Norm { members, bound } => (members.clone(), bound.clone()),
        Cone::Rotated { members, y1, y2 } => {
            let mut ms: Vec<LinExpr> = members
                .iter()
                .map(|e| {
                    let mut e2 = e.clone();
                    for t in e2.terms.iter_mut() {
                        t.1 *= 2.0;
                    }
                    e2.constant *= 2.0;
                    e2
                })
                .collect();
            // y1 - y2
            let mut diff = y1.clone();
            for (v, c) in &y2.terms {
                diff.terms.push((*v, -c));
            }
            diff.constant -= y2.constant;
            ms.push(diff);
            // y1 + y2
            let mut sum = y1.clone();
            for (v, c) in &y2.terms {
                sum.terms.push((*v, *c));
            }
            sum.constant += y2.constant;
            (ms, sum)
        }
    }
}

/// Violation of a cone at a point (positive means infeasible).
pub fn cone_violation(cone: &Cone, x: &[f64]) -> f64 {
    let (members, bound) = norm_view(cone);
    let norm = members.iter().map(|e| e.eval(x).powi(2)).sum::<f64>().sqrt();
    norm - bound.eval(x)
}

/// Supporting-hyperplane separation at a point. Returns `None` when the
/// point satisfies the cone within `eps`. The cut never removes a feasible
/// point and always removes the queried one.
pub fn separate_cone(cone: &Cone, x: &[f64], eps: f64) -> Option<ConeCut> {
    let (members, bound) = norm_view(cone);
    let vals: Vec<f64> = members.iter().map(|e| e.eval(x)).collect();
    let norm = vals.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b = bound.eval(x);
    let violation = norm - b;
    if violation <= eps {
        return None;
    }
    // sum (v_i / ||v||) e_i <= e_0; when v = 0 the cut degenerates to
    // e_0 >= 0, which still removes the point (b < 0 here).
    let mut expr = LinExpr::new();
    if norm > 0.0 {
        for (e, v) in members.iter().zip(&vals) {
            let g = v / norm;
            if g != 0.0 {
                for (var, c) in &e.terms {
                    expr.terms.push((*var, g * c));
                }
                expr.constant += g * e.constant;
            }
        }
    }
    for (var, c) in &bound.terms {
        expr.terms.push((*var, -c));
    }
    expr.constant -= bound.constant;
    // expr <= 0 in "terms + constant" form.
    let rhs = -expr.constant;
    let terms: Vec<(VarId, f64)> = expr
        .compacted()
        .into_iter()
        .map(|(j, c)| (VarId(j), c))
        .collect();
    Some(ConeCut { terms, rhs, violation })
}

/// Result of a conic solve.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: Status,
    pub obj: f64,
    /// Values by variable index (epigraph auxiliaries stripped).
    pub x: Vec<f64>,
    pub rounds: u32,
    pub cuts: usize,
    pub max_cone_violation: f64,
    /// False when the round limit was hit before reaching `epsilon`.
    pub tolerance_met: bool,
}

impl ConicSolution {
    pub fn value(&self, v: VarId) -> f64 {
        self.x[v.index()]
    }
}

/// Materialization of a model for a backend: quadratic costs become
/// epigraph rotated cones, every cone contributes its trivial bound rows.
struct Lowered {
    lp: LinProblem,
    cones: Vec<Cone>,
    n_model_vars: usize,
}

fn lower(model: &Model) -> Lowered {
    let mut lp = model.to_lin_problem();
    let n_model_vars = lp.num_cols();
    let mut cones: Vec<Cone> = model.cones().to_vec();

    // c2 * v^2 -> minimize c2 * t with v^2 <= t * 1.
    for &(v, c2) in model.quad_terms() {
        let t_idx = lp.num_cols();
        lp.cost.push(c2);
        lp.col_lb.push(0.0);
        lp.col_ub.push(INF);
        lp.integral.push(false);
        cones.push(Cone::Rotated {
            members: vec![LinExpr::var(v)],
            y1: LinExpr {
                terms: vec![(VarId(t_idx), 1.0)],
                constant: 0.0,
            },
            y2: LinExpr::constant(1.0),
        });
    }

    // Initial relaxation rows: the cone bound is nonnegative; rotated
    // cones also pin y1, y2 >= 0.
    let add_nonneg = |e: &LinExpr, lp: &mut LinProblem| {
        let terms = e.compacted();
        if terms.is_empty() {
            return;
        }
        lp.push_row(terms, -e.constant, INF);
    };
    for cone in &cones {
        match cone {
            Cone::Norm { bound, .. } => add_nonneg(bound, &mut lp),
            Cone::Rotated { y1, y2, .. } => {
                add_nonneg(y1, &mut lp);
                add_nonneg(y2, &mut lp);
            }
        }
    }
    Lowered { lp, cones, n_model_vars }
}

fn separate_all(cones: &[Cone], x: &[f64], eps: f64) -> (Vec<CutRow>, f64) {
    let mut cuts = Vec::new();
    let mut worst = 0.0_f64;
    for cone in cones {
        if let Some(cut) = separate_cone(cone, x, eps) {
            worst = worst.max(cut.violation);
            cuts.push(CutRow {
                terms: cut.terms.iter().map(|(v, c)| (v.index(), *c)).collect(),
                lb: -INF,
                ub: cut.rhs,
            });
        }
    }
    (cuts, worst)
}

/// Solves a mixed-integer conic model by outer approximation: solve the
/// MILP relaxation, separate all cones at the incumbent, append the cuts
/// and repeat until the worst violation is within tolerance or the round
/// limit is hit. Objective values are valid lower bounds (minimization) at
/// every round. Engines with lazy-cut support do the separation inside a
/// single tree; the outer loop then only verifies.
pub fn solve_conic_milp(model: &Model, cfg: &ConeCutConfig, backend: &dyn Backend) -> ConicSolution {
    let Lowered { mut lp, cones, n_model_vars } = lower(model);

    let mut rounds = 0;
    let mut cuts_total = 0usize;
    loop {
        rounds += 1;
        let sol = {
            let mut sep = |x: &[f64]| separate_all(&cones, x, cfg.epsilon).0;
            match backend.solve_milp_lazy(&lp, &mut sep) {
                Some(s) => s,
                None => backend.solve_milp(&lp),
            }
        };
        if sol.status != Status::Optimal {
            return ConicSolution {
                status: sol.status,
                obj: sol.obj,
                x: sol.x.get(..n_model_vars).map(|s| s.to_vec()).unwrap_or_default(),
                rounds,
                cuts: cuts_total,
                max_cone_violation: f64::NAN,
                tolerance_met: false,
            };
        }
        let (cuts, worst) = separate_all(&cones, &sol.x, cfg.epsilon);
        cuts_total += sol.cuts_added + cuts.len();
        if cuts.is_empty() {
            return ConicSolution {
                status: Status::Optimal,
                obj: sol.obj,
                x: sol.x[..n_model_vars].to_vec(),
                rounds,
                cuts: cuts_total,
                max_cone_violation: worst,
                tolerance_met: true,
            };
        }
        if rounds >= cfg.max_rounds {
            return ConicSolution {
                status: Status::Optimal,
                obj: sol.obj,
                x: sol.x[..n_model_vars].to_vec(),
                rounds,
                cuts: cuts_total,
                max_cone_violation: worst,
                tolerance_met: false,
            };
        }
        for c in &cuts {
            lp.push_row(c.terms.clone(), c.lb, c.ub);
        }
    }
}

/// LP solve of a cone-free, binary-free model, with row duals.
pub fn solve_lp(model: &Model, backend: &dyn Backend) -> super::backend::LpSolution {
    debug_assert!(model.num_cones() == 0 && !model.has_binaries());
    backend.solve_lp(&model.to_lin_problem())
}
