//! AC network model, the derived quasi-DC (GIC) network, and instance I/O.
//!
//! The AC side is an ordinary bus/branch/generator model in per-unit. The DC
//! side is the GIC circuit: one image node per AC bus, one neutral node per
//! grounded substation, one arc per transmission line and one arc per
//! grounded transformer winding. [`EdgeMapping`] ties the two together so
//! the optimization layer can switch DC arcs with their source AC edge.

mod derive;
mod instance;

pub use derive::derive_dc_network;
pub use instance::{load_instance, serialize_instance, FORMAT_TAG};

use std::collections::HashMap;
use thiserror::Error;

/// Index of a bus within [`GridCase::buses`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BusId(pub usize);

/// Index of an AC edge within [`GridCase::ac_edges`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// Index of a generator within [`GridCase::generators`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenId(pub usize);

/// Index of a DC node within [`GridCase::dc_nodes`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DcNodeId(pub usize);

/// Index of a DC arc within [`GridCase::dc_arcs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DcArcId(pub usize);

/// AC bus: demand, voltage band, shunt, optional geographic position.
#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub name: String,
    /// Real power demand (p.u.).
    pub d_p: f64,
    /// Reactive power demand (p.u.).
    pub d_q: f64,
    /// Voltage magnitude bounds (p.u.), `0 < v_lo <= v_hi`.
    pub v_lo: f64,
    pub v_hi: f64,
    /// Shunt conductance and susceptance (p.u.).
    pub g_s: f64,
    pub b_s: f64,
    /// `(lat, lon)` in degrees; optional when arc lengths are given directly.
    pub coords: Option<(f64, f64)>,
}

/// Which end of an edge a bus sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndSide {
    From,
    To,
}

/// Transformer winding configuration, with the turn counts that enter the
/// effective-GIC expression.
#[derive(Debug, Clone, PartialEq)]
pub enum TransformerKind {
    /// Both windings grounded-wye; DC arcs `{high, low}`, each bus image to
    /// the neutral.
    GwyeGwye { n_high: f64, n_low: f64 },
    /// Autotransformer; DC arcs `{series, common}`: series between the bus
    /// images, common from the low-side image to the neutral.
    GwyeGwyeAuto { n_series: f64, n_common: f64 },
    /// Generator step-up, delta on the low side; a single `{high}` arc to
    /// the neutral. The delta winding passes no DC.
    GwyeDeltaGsu,
}

impl TransformerKind {
    /// Winding roles of the DC arcs this kind produces, in canonical order.
    pub fn windings(&self) -> &'static [Winding] {
        match self {
            TransformerKind::GwyeGwye { .. } => &[Winding::High, Winding::Low],
            TransformerKind::GwyeGwyeAuto { .. } => &[Winding::Series, Winding::Common],
            TransformerKind::GwyeDeltaGsu => &[Winding::High],
        }
    }

    /// Coefficient of each winding current in the effective-GIC expression.
    pub fn theta_weight(&self, winding: Winding) -> f64 {
        match (self, winding) {
            (TransformerKind::GwyeGwye { .. }, Winding::High) => 1.0,
            (TransformerKind::GwyeGwye { n_high, n_low }, Winding::Low) => n_low / n_high,
            (TransformerKind::GwyeGwyeAuto { n_series, n_common }, Winding::Series) => {
                n_series / (n_series + n_common)
            }
            (TransformerKind::GwyeGwyeAuto { n_series, n_common }, Winding::Common) => {
                n_common / (n_series + n_common)
            }
            (TransformerKind::GwyeDeltaGsu, Winding::High) => 1.0,
            _ => panic!("winding {winding:?} not part of {self:?}"),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            TransformerKind::GwyeGwye { .. } => "gwye_gwye",
            TransformerKind::GwyeGwyeAuto { .. } => "gwye_gwye_auto",
            TransformerKind::GwyeDeltaGsu => "gwye_delta_gsu",
        }
    }
}

/// Role of a DC arc inside a transformer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winding {
    High,
    Low,
    Series,
    Common,
}

impl Winding {
    pub fn label(&self) -> &'static str {
        match self {
            Winding::High => "high",
            Winding::Low => "low",
            Winding::Series => "series",
            Winding::Common => "common",
        }
    }
}

/// Transformer-specific data attached to an AC edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformer {
    pub kind: TransformerKind,
    /// Substation whose neutral grounds this transformer.
    pub substation: String,
    /// Reactive loss factor (p.u. MVar per amp of effective GIC per p.u. volt).
    pub k_loss: f64,
    /// Effective-GIC cap (amps).
    pub i_eff_max: f64,
    /// DC resistance (ohms) of each winding arc, ordered as
    /// [`TransformerKind::windings`].
    pub winding_r: Vec<f64>,
}

/// What an AC edge physically is.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeKind {
    Line,
    Transformer(Transformer),
}

/// AC branch (transmission line or transformer) in per-unit.
#[derive(Debug, Clone, PartialEq)]
pub struct AcEdge {
    pub name: String,
    pub from: BusId,
    pub to: BusId,
    /// Series conductance / susceptance (p.u.).
    pub g: f64,
    pub b: f64,
    /// Line charging susceptance (p.u.).
    pub b_c: f64,
    /// Apparent power limit (p.u.).
    pub s_max: f64,
    /// Tap ratio; 1.0 for lines.
    pub tap: f64,
    /// Angle-difference bounds (radians), `theta_lo < theta_hi`.
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub kind: EdgeKind,
    /// Per-direction line lengths (km) when overridden by the instance; for
    /// lines these otherwise come from bus coordinates.
    pub length_override: Option<(f64, f64)>,
    /// DC (per-phase quasi-DC path) resistance of a line in ohms; required
    /// to derive the DC network unless the instance ships it explicitly.
    pub r_dc: Option<f64>,
}

impl AcEdge {
    pub fn is_transformer(&self) -> bool {
        matches!(self.kind, EdgeKind::Transformer(_))
    }

    pub fn transformer(&self) -> Option<&Transformer> {
        match &self.kind {
            EdgeKind::Transformer(t) => Some(t),
            EdgeKind::Line => None,
        }
    }
}

/// Dispatchable generator with quadratic fuel cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub name: String,
    pub bus: BusId,
    /// Fixed cost when on ($), linear ($/p.u.) and quadratic ($/p.u.^2)
    /// fuel cost coefficients.
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub q_lo: f64,
    pub q_hi: f64,
}

/// Where a DC node comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DcNodeOrigin {
    /// Image of an AC bus; never grounded.
    BusImage(BusId),
    /// Neutral grounding point of the named substation.
    Neutral(String),
}

/// Node of the quasi-DC network.
#[derive(Debug, Clone, PartialEq)]
pub struct DcNode {
    pub name: String,
    /// Grounding admittance (siemens); 0 unless this is a grounded neutral.
    pub a: f64,
    pub origin: DcNodeOrigin,
}

/// Arc of the quasi-DC network, oriented `from -> to`; GIC is positive in
/// that direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DcArc {
    pub name: String,
    pub from: DcNodeId,
    pub to: DcNodeId,
    /// DC conductance (siemens).
    pub gamma: f64,
    /// Eastward / northward lengths (km); zero for winding arcs.
    pub len_e: f64,
    pub len_n: f64,
    /// The AC edge whose switch state controls this arc.
    pub ac_edge: EdgeId,
    /// Winding role when this arc belongs to a transformer.
    pub winding: Option<Winding>,
}

/// The forward map `E` (DC arc -> AC edge) and its fibers `E^-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMapping {
    /// `to_ac[arc] = source AC edge` (same as [`DcArc::ac_edge`]).
    pub to_ac: Vec<EdgeId>,
    /// `fibers[edge] = arcs controlled by that edge`, in arc order.
    pub fibers: Vec<Vec<DcArcId>>,
}

impl EdgeMapping {
    pub fn ac_edge_of(&self, arc: DcArcId) -> EdgeId {
        self.to_ac[arc.0]
    }

    pub fn arcs_of(&self, edge: EdgeId) -> &[DcArcId] {
        &self.fibers[edge.0]
    }
}

/// Substation with a grounding resistance for its neutral.
#[derive(Debug, Clone, PartialEq)]
pub struct Substation {
    pub name: String,
    /// Grounding resistance (ohms), > 0.
    pub r_ground: f64,
}

/// Scalar GMD model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct GmdParams {
    /// Penalty for shed load ($/p.u.).
    pub kappa_l: f64,
    /// Penalty for reactive loss above the budgeted allowance ($/p.u.).
    pub kappa_s: f64,
    /// Bound on GIC-induced nodal voltage magnitude (volts); also sets the
    /// big-M coefficients of the second stage.
    pub vbar_d: f64,
}

/// Immutable, validated problem instance: AC network, DC network, mapping,
/// and cost parameters. Construct through [`load_instance`] or
/// [`GridCase::assemble`]; safe to share across solver workers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCase {
    pub name: String,
    pub buses: Vec<Bus>,
    pub ac_edges: Vec<AcEdge>,
    pub generators: Vec<Generator>,
    pub substations: Vec<Substation>,
    pub dc_nodes: Vec<DcNode>,
    pub dc_arcs: Vec<DcArc>,
    pub mapping: EdgeMapping,
    pub gmd: GmdParams,

    // Adjacency caches, rebuilt on assembly.
    edges_at_bus: Vec<Vec<(EdgeId, EndSide)>>,
    gens_at_bus: Vec<Vec<GenId>>,
    arcs_in: Vec<Vec<DcArcId>>,
    arcs_out: Vec<Vec<DcArcId>>,
    tx_at_loss_bus: Vec<Vec<EdgeId>>,
}

/// Validation and parse errors for grid instances.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("instance document: {0}")]
    Schema(String),
    #[error("{entity} references unknown {kind} \"{name}\"")]
    UnknownRef {
        entity: String,
        kind: &'static str,
        name: String,
    },
    #[error("{entity}: {what}")]
    Invariant { entity: String, what: String },
    #[error("AC network is not connected ({0} components)")]
    Disconnected(usize),
    #[error("transformer \"{0}\" has no substation assignment")]
    NoSubstation(String),
    #[error("transformer \"{0}\": zero or negative winding resistance")]
    BadWindingResistance(String),
    #[error("line \"{0}\" has neither bus coordinates nor a length override")]
    MissingLengths(String),
}

fn invariant(entity: impl Into<String>, what: impl Into<String>) -> GridError {
    GridError::Invariant {
        entity: entity.into(),
        what: what.into(),
    }
}

impl GridCase {
    /// Builds the adjacency caches and validates every invariant. This is
    /// the single chokepoint through which all constructed cases pass.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        name: String,
        buses: Vec<Bus>,
        ac_edges: Vec<AcEdge>,
        generators: Vec<Generator>,
        substations: Vec<Substation>,
        dc_nodes: Vec<DcNode>,
        dc_arcs: Vec<DcArc>,
        gmd: GmdParams,
    ) -> Result<Self, GridError> {
        let mapping = build_mapping(ac_edges.len(), &dc_arcs);

        let mut case = GridCase {
            name,
            buses,
            ac_edges,
            generators,
            substations,
            dc_nodes,
            dc_arcs,
            mapping,
            gmd,
            edges_at_bus: Vec::new(),
            gens_at_bus: Vec::new(),
            arcs_in: Vec::new(),
            arcs_out: Vec::new(),
            tx_at_loss_bus: Vec::new(),
        };
        case.rebuild_adjacency();
        case.validate()?;
        Ok(case)
    }

    fn rebuild_adjacency(&mut self) {
        self.edges_at_bus = vec![Vec::new(); self.buses.len()];
        self.gens_at_bus = vec![Vec::new(); self.buses.len()];
        self.tx_at_loss_bus = vec![Vec::new(); self.buses.len()];
        for (i, e) in self.ac_edges.iter().enumerate() {
            self.edges_at_bus[e.from.0].push((EdgeId(i), EndSide::From));
            self.edges_at_bus[e.to.0].push((EdgeId(i), EndSide::To));
            if e.is_transformer() {
                self.tx_at_loss_bus[e.from.0].push(EdgeId(i));
            }
        }
        for (k, g) in self.generators.iter().enumerate() {
            self.gens_at_bus[g.bus.0].push(GenId(k));
        }
        self.arcs_in = vec![Vec::new(); self.dc_nodes.len()];
        self.arcs_out = vec![Vec::new(); self.dc_nodes.len()];
        for (l, arc) in self.dc_arcs.iter().enumerate() {
            self.arcs_out[arc.from.0].push(DcArcId(l));
            self.arcs_in[arc.to.0].push(DcArcId(l));
        }
    }

    /// Edges incident to a bus, with the side the bus sits on.
    pub fn edges_at(&self, bus: BusId) -> &[(EdgeId, EndSide)] {
        &self.edges_at_bus[bus.0]
    }

    pub fn generators_at(&self, bus: BusId) -> &[GenId] {
        &self.gens_at_bus[bus.0]
    }

    /// DC arcs oriented into / out of a node.
    pub fn arcs_into(&self, node: DcNodeId) -> &[DcArcId] {
        &self.arcs_in[node.0]
    }

    pub fn arcs_out_of(&self, node: DcNodeId) -> &[DcArcId] {
        &self.arcs_out[node.0]
    }

    /// Transformers whose reactive loss is charged to this bus. A
    /// transformer's loss is attributed to its from-side bus.
    pub fn transformers_at_loss_bus(&self, bus: BusId) -> &[EdgeId] {
        &self.tx_at_loss_bus[bus.0]
    }

    /// All transformer edges, in edge order.
    pub fn transformer_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.ac_edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.is_transformer())
            .map(|(i, _)| EdgeId(i))
    }

    /// `(arc, weight)` pairs of the effective-GIC expression for a
    /// transformer edge: `Theta = sum_l weight_l * I_l`.
    pub fn theta_terms(&self, edge: EdgeId) -> Vec<(DcArcId, f64)> {
        let tx = self.ac_edges[edge.0]
            .transformer()
            .expect("theta_terms called on a line");
        self.mapping
            .arcs_of(edge)
            .iter()
            .map(|&l| {
                let w = self.dc_arcs[l.0]
                    .winding
                    .expect("transformer arc without winding role");
                (l, tx.kind.theta_weight(w))
            })
            .collect()
    }

    fn validate(&self) -> Result<(), GridError> {
        for b in &self.buses {
            if !(b.v_lo > 0.0 && b.v_lo <= b.v_hi) {
                return Err(invariant(
                    format!("bus \"{}\"", b.name),
                    format!("requires 0 < v_lo <= v_hi, got [{}, {}]", b.v_lo, b.v_hi),
                ));
            }
            if !(b.d_p.is_finite() && b.d_q.is_finite()) {
                return Err(invariant(format!("bus \"{}\"", b.name), "non-finite demand"));
            }
        }
        for e in &self.ac_edges {
            let ent = format!("branch \"{}\"", e.name);
            if e.from.0 >= self.buses.len() || e.to.0 >= self.buses.len() {
                return Err(invariant(ent, "endpoint index out of range"));
            }
            if e.from == e.to {
                return Err(invariant(ent, "self-loop"));
            }
            if e.s_max <= 0.0 {
                return Err(invariant(ent, "apparent power limit must be positive"));
            }
            if e.tap <= 0.0 {
                return Err(invariant(ent, "tap ratio must be positive"));
            }
            if !(e.theta_lo < e.theta_hi) {
                return Err(invariant(ent, "requires theta_lo < theta_hi"));
            }
            let half_pi = std::f64::consts::FRAC_PI_2;
            if e.theta_lo <= -half_pi || e.theta_hi >= half_pi {
                return Err(invariant(ent, "angle bounds must lie inside (-90, 90) degrees"));
            }
            if let EdgeKind::Transformer(tx) = &e.kind {
                if tx.k_loss < 0.0 {
                    return Err(invariant(ent, "loss factor must be nonnegative"));
                }
                if tx.i_eff_max <= 0.0 {
                    return Err(invariant(ent, "effective-GIC cap must be positive"));
                }
                let turns_ok = match tx.kind {
                    TransformerKind::GwyeGwye { n_high, n_low } => n_high > 0.0 && n_low > 0.0,
                    TransformerKind::GwyeGwyeAuto { n_series, n_common } => {
                        n_series > 0.0 && n_common > 0.0
                    }
                    TransformerKind::GwyeDeltaGsu => true,
                };
                if !turns_ok {
                    return Err(invariant(ent, "winding turn counts must be positive"));
                }
                if !self.substations.iter().any(|s| s.name == tx.substation) {
                    return Err(GridError::UnknownRef {
                        entity: ent,
                        kind: "substation",
                        name: tx.substation.clone(),
                    });
                }
            }
        }
        for g in &self.generators {
            let ent = format!("generator \"{}\"", g.name);
            if g.bus.0 >= self.buses.len() {
                return Err(invariant(ent, "bus index out of range"));
            }
            if !(g.p_lo <= g.p_hi && g.q_lo <= g.q_hi) {
                return Err(invariant(ent, "generation bounds inverted"));
            }
            if g.c0 < 0.0 || g.c1 < 0.0 || g.c2 < 0.0 {
                return Err(invariant(ent, "cost coefficients must be nonnegative"));
            }
        }
        for s in &self.substations {
            if s.r_ground <= 0.0 {
                return Err(invariant(
                    format!("substation \"{}\"", s.name),
                    "grounding resistance must be positive",
                ));
            }
        }
        for n in &self.dc_nodes {
            if n.a < 0.0 || !n.a.is_finite() {
                return Err(invariant(
                    format!("dc node \"{}\"", n.name),
                    "grounding admittance must be finite and nonnegative",
                ));
            }
        }
        for arc in &self.dc_arcs {
            let ent = format!("dc arc \"{}\"", arc.name);
            if arc.from.0 >= self.dc_nodes.len() || arc.to.0 >= self.dc_nodes.len() {
                return Err(invariant(ent, "endpoint index out of range"));
            }
            if !(arc.gamma > 0.0 && arc.gamma.is_finite()) {
                return Err(invariant(ent, "conductance must be positive and finite"));
            }
            if arc.ac_edge.0 >= self.ac_edges.len() {
                return Err(invariant(ent, "source AC edge out of range"));
            }
            let on_transformer = self.ac_edges[arc.ac_edge.0].is_transformer();
            if on_transformer && (arc.len_e != 0.0 || arc.len_n != 0.0) {
                return Err(invariant(ent, "winding arcs must have zero lengths"));
            }
            if on_transformer != arc.winding.is_some() {
                return Err(invariant(
                    ent,
                    "winding role must be present exactly for transformer arcs",
                ));
            }
        }
        if self.gmd.vbar_d <= 0.0 {
            return Err(invariant("gmd", "vbar_d must be positive"));
        }
        if self.gmd.kappa_l < 0.0 || self.gmd.kappa_s < 0.0 {
            return Err(invariant("gmd", "penalties must be nonnegative"));
        }

        self.validate_mapping()?;
        self.validate_connected()?;
        Ok(())
    }

    fn validate_mapping(&self) -> Result<(), GridError> {
        // Fibers partition the arc set and invert the forward map.
        let mut seen = vec![false; self.dc_arcs.len()];
        for (e, fiber) in self.mapping.fibers.iter().enumerate() {
            if fiber.is_empty() {
                return Err(invariant(
                    format!("branch \"{}\"", self.ac_edges[e].name),
                    "maps to no DC arc",
                ));
            }
            for &l in fiber {
                if self.mapping.to_ac[l.0].0 != e {
                    return Err(invariant(
                        format!("dc arc \"{}\"", self.dc_arcs[l.0].name),
                        "fiber/forward-map mismatch",
                    ));
                }
                if std::mem::replace(&mut seen[l.0], true) {
                    return Err(invariant(
                        format!("dc arc \"{}\"", self.dc_arcs[l.0].name),
                        "appears in two fibers",
                    ));
                }
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(invariant("edge mapping", "unmapped DC arc"));
        }

        // Transformer fibers must carry exactly the winding set of the kind.
        for e in self.transformer_edges() {
            let tx = self.ac_edges[e.0].transformer().unwrap();
            let want = tx.kind.windings();
            let got: Vec<Winding> = self
                .mapping
                .arcs_of(e)
                .iter()
                .filter_map(|&l| self.dc_arcs[l.0].winding)
                .collect();
            if got.len() != self.mapping.arcs_of(e).len() || got != want {
                return Err(invariant(
                    format!("branch \"{}\"", self.ac_edges[e.0].name),
                    format!(
                        "transformer kind {} requires winding arcs {:?}, found {:?}",
                        tx.kind.label(),
                        want,
                        got
                    ),
                ));
            }
        }
        Ok(())
    }

    fn validate_connected(&self) -> Result<(), GridError> {
        if self.buses.is_empty() {
            return Err(invariant("instance", "no buses"));
        }
        let mut comp = vec![usize::MAX; self.buses.len()];
        let mut n_comp = 0;
        for start in 0..self.buses.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = n_comp;
            while let Some(i) = stack.pop() {
                for &(e, _) in &self.edges_at_bus[i] {
                    let edge = &self.ac_edges[e.0];
                    let other = if edge.from.0 == i { edge.to.0 } else { edge.from.0 };
                    if comp[other] == usize::MAX {
                        comp[other] = n_comp;
                        stack.push(other);
                    }
                }
            }
            n_comp += 1;
        }
        if n_comp > 1 {
            return Err(GridError::Disconnected(n_comp));
        }
        Ok(())
    }

    pub fn bus_index(&self, name: &str) -> Option<BusId> {
        self.buses.iter().position(|b| b.name == name).map(BusId)
    }

    pub fn edge_index(&self, name: &str) -> Option<EdgeId> {
        self.ac_edges.iter().position(|e| e.name == name).map(EdgeId)
    }
}

fn build_mapping(n_edges: usize, arcs: &[DcArc]) -> EdgeMapping {
    let mut fibers = vec![Vec::new(); n_edges];
    let mut to_ac = Vec::with_capacity(arcs.len());
    for (l, arc) in arcs.iter().enumerate() {
        to_ac.push(arc.ac_edge);
        if arc.ac_edge.0 < n_edges {
            fibers[arc.ac_edge.0].push(DcArcId(l));
        }
    }
    EdgeMapping { to_ac, fibers }
}

/// Default effective-GIC cap used when the instance omits one:
/// `2 * s_max / min(v_lo_i, v_lo_j)`.
pub fn default_i_eff_max(s_max: f64, v_lo_from: f64, v_lo_to: f64) -> f64 {
    2.0 * s_max / v_lo_from.min(v_lo_to)
}

/// Name-to-index resolution helper shared by the parser and derivation.
pub(crate) fn index_by_name<'a, T, F: Fn(&T) -> &str>(
    items: &'a [T],
    name_of: F,
) -> HashMap<&'a str, usize> {
    items
        .iter()
        .enumerate()
        .map(|(i, t)| (name_of(t), i))
        .collect()
}
