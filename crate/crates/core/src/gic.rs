//! Quasi-DC GIC computation for a fixed topology and geo-electric field.
//!
//! This is the deterministic physics core: it eliminates arc currents and
//! solves the reduced nodal system `(L + diag(a)) v = b` per connected
//! component of the active DC subgraph, where `L` is the weighted Laplacian
//! of the active arcs, `a` the grounding admittances and `b` the EMF
//! injections. Every optimization-layer second-stage result is checked
//! against this module.

use crate::grid::{BusId, DcArcId, EdgeId, GridCase, TransformerKind, Winding};
use thiserror::Error;

/// A realization of the geo-electric field in V/km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldScenario {
    /// Eastward component.
    pub e: f64,
    /// Northward component.
    pub n: f64,
}

impl FieldScenario {
    pub const ZERO: FieldScenario = FieldScenario { e: 0.0, n: 0.0 };

    pub fn new(e: f64, n: f64) -> Self {
        FieldScenario { e, n }
    }
}

/// On/off state per AC edge; a DC arc is active iff its source edge is on.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    edge_on: Vec<bool>,
}

impl Topology {
    pub fn all_on(case: &GridCase) -> Self {
        Topology {
            edge_on: vec![true; case.ac_edges.len()],
        }
    }

    pub fn from_flags(edge_on: Vec<bool>) -> Self {
        Topology { edge_on }
    }

    pub fn with_off(case: &GridCase, off: &[EdgeId]) -> Self {
        let mut t = Self::all_on(case);
        for e in off {
            t.edge_on[e.0] = false;
        }
        t
    }

    pub fn is_on(&self, edge: EdgeId) -> bool {
        self.edge_on[edge.0]
    }

    pub fn arc_active(&self, case: &GridCase, arc: DcArcId) -> bool {
        self.edge_on[case.dc_arcs[arc.0].ac_edge.0]
    }

    pub fn flags(&self) -> &[bool] {
        &self.edge_on
    }
}

/// Result of a GIC solve: nodal voltages, arc currents and per-transformer
/// effective GICs. Inactive arcs carry exactly zero current.
#[derive(Debug, Clone)]
pub struct GicSolution {
    /// Volts per DC node.
    pub v_node: Vec<f64>,
    /// Amps per DC arc, positive from `from` to `to`.
    pub i_arc: Vec<f64>,
    /// `(transformer edge, effective GIC in amps)`, in edge order.
    pub i_eff: Vec<(EdgeId, f64)>,
}

impl GicSolution {
    pub fn i_eff_of(&self, edge: EdgeId) -> Option<f64> {
        self.i_eff.iter().find(|(e, _)| *e == edge).map(|(_, v)| *v)
    }

    /// GIC-induced reactive loss at each bus for the given bus voltages.
    pub fn qloss_per_bus(&self, case: &GridCase, v_bus: &[f64]) -> Vec<f64> {
        (0..case.buses.len())
            .map(|i| qloss_at_bus(case, BusId(i), v_bus[i], &self.i_eff))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum GicError {
    #[error("floating active component with no grounding: nodes {}", .0.join(", "))]
    SingularComponent(Vec<String>),
    #[error("nodal solve residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
    #[error("effective GIC arity mismatch: kind {kind} expects {expected} currents, got {got}")]
    ArityMismatch {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
}

/// EMF induced on a DC arc by a uniform field: `xi_E L_E + xi_N L_N` for
/// line arcs, exactly zero for transformer winding arcs.
pub fn induced_emf(case: &GridCase, arc: DcArcId, field: FieldScenario) -> f64 {
    let a = &case.dc_arcs[arc.0];
    if a.winding.is_some() {
        0.0
    } else {
        field.e * a.len_e + field.n * a.len_n
    }
}

/// Solves the GIC circuit restricted to active arcs.
///
/// Every active component must reach a grounded node, otherwise the nodal
/// system is singular and an error naming the component is returned.
/// Isolated nodes (no active incident arc) are assigned zero volts.
pub fn solve_gic(
    case: &GridCase,
    topo: &Topology,
    field: FieldScenario,
) -> Result<GicSolution, GicError> {
    let n = case.dc_nodes.len();
    let active: Vec<bool> = (0..case.dc_arcs.len())
        .map(|l| topo.arc_active(case, DcArcId(l)))
        .collect();

    // Components of the active subgraph.
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut nodes = vec![start];
        comp[start] = id;
        let mut stack = vec![start];
        while let Some(m) = stack.pop() {
            let neighbors = case
                .arcs_out_of(crate::grid::DcNodeId(m))
                .iter()
                .map(|&l| (l, case.dc_arcs[l.0].to.0))
                .chain(
                    case.arcs_into(crate::grid::DcNodeId(m))
                        .iter()
                        .map(|&l| (l, case.dc_arcs[l.0].from.0)),
                );
            for (l, other) in neighbors {
                if active[l.0] && comp[other] == usize::MAX {
                    comp[other] = id;
                    nodes.push(other);
                    stack.push(other);
                }
            }
        }
        comps.push(nodes);
    }

    let mut v = vec![0.0; n];
    for nodes in &comps {
        let has_arc = nodes.iter().any(|&m| {
            case.arcs_out_of(crate::grid::DcNodeId(m))
                .iter()
                .chain(case.arcs_into(crate::grid::DcNodeId(m)))
                .any(|&l| active[l.0])
        });
        if !has_arc {
            continue; // isolated node, v = 0 by convention
        }
        let total_ground: f64 = nodes.iter().map(|&m| case.dc_nodes[m].a).sum();
        if total_ground <= 0.0 {
            return Err(GicError::SingularComponent(
                nodes.iter().map(|&m| case.dc_nodes[m].name.clone()).collect(),
            ));
        }

        // Local index map and dense SPD assembly.
        let k = nodes.len();
        let mut local = std::collections::HashMap::with_capacity(k);
        for (li, &m) in nodes.iter().enumerate() {
            local.insert(m, li);
        }
        let mut mat = vec![0.0; k * k];
        let mut rhs = vec![0.0; k];
        for (li, &m) in nodes.iter().enumerate() {
            mat[li * k + li] += case.dc_nodes[m].a;
        }
        for (l, arc) in case.dc_arcs.iter().enumerate() {
            if !active[l] || comp[arc.from.0] != comp[nodes[0]] {
                continue;
            }
            let (fi, ti) = (local[&arc.from.0], local[&arc.to.0]);
            mat[fi * k + fi] += arc.gamma;
            mat[ti * k + ti] += arc.gamma;
            mat[fi * k + ti] -= arc.gamma;
            mat[ti * k + fi] -= arc.gamma;
            // Balance at node x: sum(in) - sum(out) = a_x v_x; the EMF term
            // gamma*xi of arc (m -> n) injects +gamma*xi at n, -gamma*xi at m.
            let inj = arc.gamma * induced_emf(case, DcArcId(l), field);
            rhs[ti] += inj;
            rhs[fi] -= inj;
        }

        let sol = cholesky_solve(&mut mat, &rhs, k).ok_or_else(|| {
            GicError::SingularComponent(
                nodes.iter().map(|&m| case.dc_nodes[m].name.clone()).collect(),
            )
        })?;
        for (li, &m) in nodes.iter().enumerate() {
            v[m] = sol[li];
        }
    }

    // Currents from the flow law; zero on inactive arcs.
    let mut i_arc = vec![0.0; case.dc_arcs.len()];
    for (l, arc) in case.dc_arcs.iter().enumerate() {
        if active[l] {
            i_arc[l] =
                arc.gamma * (v[arc.from.0] - v[arc.to.0] + induced_emf(case, DcArcId(l), field));
        }
    }

    // Residual check on every nodal balance equation.
    let max_i = i_arc.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
    let tol = 1e-9 * (1.0 + max_i);
    for m in 0..n {
        let mut bal = 0.0;
        for &l in case.arcs_into(crate::grid::DcNodeId(m)) {
            bal += i_arc[l.0];
        }
        for &l in case.arcs_out_of(crate::grid::DcNodeId(m)) {
            bal -= i_arc[l.0];
        }
        bal -= case.dc_nodes[m].a * v[m];
        if bal.abs() > tol {
            return Err(GicError::ResidualTooLarge {
                residual: bal.abs(),
                tol,
            });
        }
    }

    let i_eff = case
        .transformer_edges()
        .map(|e| {
            if !topo.is_on(e) {
                return (e, 0.0);
            }
            let theta: f64 = case
                .theta_terms(e)
                .iter()
                .map(|&(l, w)| w * i_arc[l.0])
                .sum();
            (e, theta.abs())
        })
        .collect();

    Ok(GicSolution { v_node: v, i_arc, i_eff })
}

/// Effective GIC of a transformer from its winding currents, per kind:
/// GwyeGwye `|(Nh Ih + Nl Il)/Nh|`, auto `|(Ns Is + Nc Ic)/(Ns+Nc)|`,
/// GSU `|Ih|`. Currents are `(winding, amps)` pairs matching the kind's
/// winding set.
pub fn effective_gic(kind: &TransformerKind, currents: &[(Winding, f64)]) -> Result<f64, GicError> {
    let windings = kind.windings();
    if currents.len() != windings.len()
        || !windings.iter().zip(currents).all(|(w, (cw, _))| w == cw)
    {
        return Err(GicError::ArityMismatch {
            kind: kind.label(),
            expected: windings.len(),
            got: currents.len(),
        });
    }
    let theta: f64 = currents
        .iter()
        .map(|&(w, i)| kind.theta_weight(w) * i)
        .sum();
    Ok(theta.abs())
}

/// Reactive loss `sum_e k_e v_i I_eff_e` (p.u.) charged to a bus by its
/// transformers.
pub fn qloss_at_bus(case: &GridCase, bus: BusId, v_i: f64, i_eff: &[(EdgeId, f64)]) -> f64 {
    case.transformers_at_loss_bus(bus)
        .iter()
        .map(|&e| {
            let k = case.ac_edges[e.0].transformer().unwrap().k_loss;
            let ieff = i_eff
                .iter()
                .find(|(ee, _)| *ee == e)
                .map(|(_, v)| *v)
                .unwrap_or(0.0);
            k * v_i * ieff
        })
        .sum()
}

/// In-place dense Cholesky solve of an SPD system; returns `None` when a
/// pivot collapses (singular or indefinite input).
fn cholesky_solve(mat: &mut [f64], rhs: &[f64], k: usize) -> Option<Vec<f64>> {
    // Factor A = L L^T, L stored in the lower triangle.
    for j in 0..k {
        let mut d = mat[j * k + j];
        for p in 0..j {
            d -= mat[j * k + p] * mat[j * k + p];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let lj = d.sqrt();
        mat[j * k + j] = lj;
        for i in (j + 1)..k {
            let mut s = mat[i * k + j];
            for p in 0..j {
                s -= mat[i * k + p] * mat[j * k + p];
            }
            mat[i * k + j] = s / lj;
        }
    }
    // Forward then backward substitution.
    let mut y = rhs.to_vec();
    for i in 0..k {
        for p in 0..i {
            y[i] -= mat[i * k + p] * y[p];
        }
        y[i] /= mat[i * k + i];
    }
    for i in (0..k).rev() {
        for p in (i + 1)..k {
            y[i] -= mat[p * k + i] * y[p];
        }
        y[i] /= mat[i * k + i];
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::*;

    /// Two grounded nodes joined by one arc: the loop resistance is
    /// 1/gamma + 1/a + 1/a, so I = xi / (1/gamma + 2/a).
    fn two_node_case(gamma: f64, a: f64) -> GridCase {
        let buses = vec![
            Bus {
                name: "B1".into(),
                d_p: 0.0,
                d_q: 0.0,
                v_lo: 0.9,
                v_hi: 1.1,
                g_s: 0.0,
                b_s: 0.0,
                coords: None,
            },
            Bus {
                name: "B2".into(),
                d_p: 0.0,
                d_q: 0.0,
                v_lo: 0.9,
                v_hi: 1.1,
                g_s: 0.0,
                b_s: 0.0,
                coords: None,
            },
        ];
        let edges = vec![AcEdge {
            name: "L1".into(),
            from: BusId(0),
            to: BusId(1),
            g: 1.0,
            b: -5.0,
            b_c: 0.0,
            s_max: 1.0,
            tap: 1.0,
            theta_lo: -0.5,
            theta_hi: 0.5,
            kind: EdgeKind::Line,
            length_override: Some((1.0, 0.0)),
            r_dc: Some(1.0 / gamma),
        }];
        let dc_nodes = vec![
            DcNode {
                name: "B1.d".into(),
                a,
                origin: DcNodeOrigin::BusImage(BusId(0)),
            },
            DcNode {
                name: "B2.d".into(),
                a,
                origin: DcNodeOrigin::BusImage(BusId(1)),
            },
        ];
        let dc_arcs = vec![DcArc {
            name: "L1.d".into(),
            from: DcNodeId(0),
            to: DcNodeId(1),
            gamma,
            len_e: 1.0,
            len_n: 0.0,
            ac_edge: EdgeId(0),
            winding: None,
        }];
        GridCase::assemble(
            "two-node".into(),
            buses,
            edges,
            vec![],
            vec![],
            dc_nodes,
            dc_arcs,
            GmdParams {
                kappa_l: 1.0,
                kappa_s: 1.0,
                vbar_d: 1e4,
            },
        )
        .unwrap()
    }

    #[test]
    fn zero_field_is_all_zero() {
        let case = two_node_case(1.0, 1.0);
        let sol = solve_gic(&case, &Topology::all_on(&case), FieldScenario::ZERO).unwrap();
        assert!(sol.i_arc.iter().all(|&i| i == 0.0));
        assert!(sol.v_node.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_solved_two_node_loop() {
        // gamma = 1 S, a = 1 S, EMF = 3 V: I = 3/(1 + 2) = 1 A, v = (-1, +1).
        let case = two_node_case(1.0, 1.0);
        let field = FieldScenario::new(3.0, 0.0); // L_E = 1 km
        let sol = solve_gic(&case, &Topology::all_on(&case), field).unwrap();
        assert!((sol.i_arc[0] - 1.0).abs() < 1e-12);
        assert!((sol.v_node[0] + 1.0).abs() < 1e-12);
        assert!((sol.v_node[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analytic_loop_current() {
        let (gamma, a, xi) = (0.35, 2.7, 7.5);
        let case = two_node_case(gamma, a);
        let sol = solve_gic(&case, &Topology::all_on(&case), FieldScenario::new(xi, 0.0)).unwrap();
        let expected = xi / (1.0 / gamma + 2.0 / a);
        assert!((sol.i_arc[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn all_off_yields_zeros_not_error() {
        let case = two_node_case(1.0, 1.0);
        let topo = Topology::with_off(&case, &[EdgeId(0)]);
        let sol = solve_gic(&case, &topo, FieldScenario::new(5.0, 2.0)).unwrap();
        assert_eq!(sol.i_arc, vec![0.0]);
        assert_eq!(sol.v_node, vec![0.0, 0.0]);
    }

    #[test]
    fn ungrounded_active_component_errors() {
        let mut case = two_node_case(1.0, 0.0);
        // Bypass assemble-time acceptance: a = 0 everywhere is legal,
        // the singularity only appears at solve time.
        case.dc_nodes[0].a = 0.0;
        case.dc_nodes[1].a = 0.0;
        let err = solve_gic(&case, &Topology::all_on(&case), FieldScenario::new(1.0, 0.0))
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("B1.d") && msg.contains("B2.d"), "{msg}");
    }

    #[test]
    fn superposition_in_the_field() {
        let case = two_node_case(0.8, 1.5);
        let topo = Topology::all_on(&case);
        let base = solve_gic(&case, &topo, FieldScenario::new(2.0, 0.0)).unwrap();
        let scaled = solve_gic(&case, &topo, FieldScenario::new(-6.0, 0.0)).unwrap();
        for (s, b) in scaled.i_arc.iter().zip(&base.i_arc) {
            assert!((s - (-3.0) * b).abs() < 1e-12);
        }
    }

    #[test]
    fn conservation_of_ground_current() {
        let case = two_node_case(0.8, 1.5);
        let sol = solve_gic(&case, &Topology::all_on(&case), FieldScenario::new(4.0, 0.0)).unwrap();
        let total: f64 = case
            .dc_nodes
            .iter()
            .enumerate()
            .map(|(m, n)| n.a * sol.v_node[m])
            .sum();
        assert!(total.abs() < 1e-9 * (1.0 + sol.i_arc[0].abs()));
    }

    #[test]
    fn effective_gic_table_rows() {
        let gg = TransformerKind::GwyeGwye {
            n_high: 3.0,
            n_low: 1.0,
        };
        let v = effective_gic(&gg, &[(Winding::High, 6.0), (Winding::Low, 3.0)]).unwrap();
        assert!((v - 7.0).abs() < 1e-12); // |18 + 3| / 3

        let gsu = TransformerKind::GwyeDeltaGsu;
        let v = effective_gic(&gsu, &[(Winding::High, -5.0)]).unwrap();
        assert!((v - 5.0).abs() < 1e-12);

        let auto = TransformerKind::GwyeGwyeAuto {
            n_series: 1.0,
            n_common: 1.0,
        };
        let v = effective_gic(&auto, &[(Winding::Series, 2.0), (Winding::Common, -2.0)]).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn effective_gic_arity_mismatch() {
        let gg = TransformerKind::GwyeGwye {
            n_high: 3.0,
            n_low: 1.0,
        };
        assert!(effective_gic(&gg, &[(Winding::High, 6.0)]).is_err());
    }

    #[test]
    fn winding_emf_is_zero() {
        let case = crate::cases::synth_case(4).unwrap();
        let field = FieldScenario::new(9.9, -3.3);
        for (l, arc) in case.dc_arcs.iter().enumerate() {
            if arc.winding.is_some() {
                assert_eq!(induced_emf(&case, DcArcId(l), field), 0.0);
            }
        }
    }

    #[test]
    fn line_emf_dot_product() {
        let case = two_node_case(1.0, 1.0);
        let mut arc = case.dc_arcs[0].clone();
        arc.len_e = 3.0;
        arc.len_n = 4.0;
        let mut case2 = case.clone();
        case2.dc_arcs[0] = arc;
        let emf = induced_emf(&case2, DcArcId(0), FieldScenario::new(1.0, 2.0));
        assert!((emf - 11.0).abs() < 1e-12);
    }

    #[test]
    fn qloss_empty_and_linear() {
        let case = crate::cases::synth_case(4).unwrap();
        let topo = Topology::all_on(&case);
        let sol = solve_gic(&case, &topo, FieldScenario::new(5.0, 4.0)).unwrap();
        // A bus with no transformers charged to it has zero loss.
        for i in 0..case.buses.len() {
            let q1 = qloss_at_bus(&case, BusId(i), 1.0, &sol.i_eff);
            let q2 = qloss_at_bus(&case, BusId(i), 2.0, &sol.i_eff);
            if case.transformers_at_loss_bus(BusId(i)).is_empty() {
                assert_eq!(q1, 0.0);
            }
            assert!((q2 - 2.0 * q1).abs() < 1e-12);
        }
    }

    /// Triangle of three grounded nodes; used to compare "switched off"
    /// against true deletion of an arc.
    fn triangle_case(drop_third_edge: bool) -> GridCase {
        let mk_bus = |name: &str| Bus {
            name: name.into(),
            d_p: 0.0,
            d_q: 0.0,
            v_lo: 0.9,
            v_hi: 1.1,
            g_s: 0.0,
            b_s: 0.0,
            coords: None,
        };
        let mk_edge = |name: &str, from: usize, to: usize, len: (f64, f64)| AcEdge {
            name: name.into(),
            from: BusId(from),
            to: BusId(to),
            g: 1.0,
            b: -5.0,
            b_c: 0.0,
            s_max: 1.0,
            tap: 1.0,
            theta_lo: -0.5,
            theta_hi: 0.5,
            kind: EdgeKind::Line,
            length_override: Some(len),
            r_dc: Some(2.0),
        };
        let mut edges = vec![
            mk_edge("E1", 0, 1, (10.0, 0.0)),
            mk_edge("E2", 1, 2, (0.0, 10.0)),
        ];
        if !drop_third_edge {
            edges.push(mk_edge("E3", 2, 0, (-10.0, -10.0)));
        }
        let dc_nodes = (0..3)
            .map(|i| DcNode {
                name: format!("B{}.d", i + 1),
                a: 1.0,
                origin: DcNodeOrigin::BusImage(BusId(i)),
            })
            .collect();
        let dc_arcs = edges
            .iter()
            .enumerate()
            .map(|(i, e)| DcArc {
                name: format!("{}.d", e.name),
                from: DcNodeId(e.from.0),
                to: DcNodeId(e.to.0),
                gamma: 0.5,
                len_e: e.length_override.unwrap().0,
                len_n: e.length_override.unwrap().1,
                ac_edge: EdgeId(i),
                winding: None,
            })
            .collect();
        GridCase::assemble(
            "triangle".into(),
            vec![mk_bus("B1"), mk_bus("B2"), mk_bus("B3")],
            edges,
            vec![],
            vec![],
            dc_nodes,
            dc_arcs,
            GmdParams {
                kappa_l: 1.0,
                kappa_s: 1.0,
                vbar_d: 1e4,
            },
        )
        .unwrap()
    }

    #[test]
    fn switching_off_equals_deleting() {
        let field = FieldScenario::new(6.0, 2.0);
        let full = triangle_case(false);
        let switched = solve_gic(&full, &Topology::with_off(&full, &[EdgeId(2)]), field).unwrap();
        let deleted_case = triangle_case(true);
        let deleted = solve_gic(&deleted_case, &Topology::all_on(&deleted_case), field).unwrap();
        for l in 0..2 {
            assert!((switched.i_arc[l] - deleted.i_arc[l]).abs() < 1e-9);
        }
        assert_eq!(switched.i_arc[2], 0.0);
        for m in 0..3 {
            assert!((switched.v_node[m] - deleted.v_node[m]).abs() < 1e-9);
        }
    }
}
