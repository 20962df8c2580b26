//! The `gmd-case/1` instance document: a self-describing TOML format with
//! `buses`, `branches`, `generators`, `substations` and `gmd` sections, and
//! an optional explicit DC network (`dc_nodes`, `dc_arcs`). When the DC
//! sections are absent the DC network is derived from the AC data.
//!
//! Units follow the domain types: power quantities in p.u., resistances in
//! ohms, conductances in siemens, lengths in km, angles in radians, fields
//! in V/km. [`serialize_instance`] emits a canonical document that always
//! carries the DC network explicitly, so a serialize/parse round trip
//! reproduces the case field-by-field.

use super::{
    default_i_eff_max, derive_dc_network, AcEdge, Bus, BusId, DcArc, DcNode, DcNodeId,
    DcNodeOrigin, EdgeId, EdgeKind, Generator, GmdParams, GridCase, GridError, Substation,
    Transformer, TransformerKind, Winding,
};
use serde::{Deserialize, Serialize};

/// Version tag every instance document must carry.
pub const FORMAT_TAG: &str = "gmd-case/1";

const DEFAULT_THETA_BOUND: f64 = std::f64::consts::PI / 6.0;

#[derive(Debug, Serialize, Deserialize)]
struct Doc {
    format: String,
    name: String,
    gmd: GmdDoc,
    #[serde(default)]
    buses: Vec<BusDoc>,
    #[serde(default)]
    branches: Vec<BranchDoc>,
    #[serde(default)]
    generators: Vec<GenDoc>,
    #[serde(default)]
    substations: Vec<SubDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    dc_nodes: Vec<DcNodeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    dc_arcs: Vec<DcArcDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
struct GmdDoc {
    kappa_l: f64,
    kappa_s: f64,
    vbar_d: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BusDoc {
    id: String,
    #[serde(default)]
    d_p: f64,
    #[serde(default)]
    d_q: f64,
    v_lo: f64,
    v_hi: f64,
    #[serde(default)]
    g_s: f64,
    #[serde(default)]
    b_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lon: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BranchDoc {
    id: String,
    from: String,
    to: String,
    g: f64,
    b: f64,
    #[serde(default)]
    b_c: f64,
    s_max: f64,
    #[serde(default = "one")]
    tap: f64,
    /// Angle-difference bounds in radians; default +-30 degrees.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta_max: Option<f64>,
    /// "line" (default), "gwye_gwye", "gwye_gwye_auto" or "gwye_delta_gsu".
    #[serde(default = "line_kind")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r_dc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length_e_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length_n_km: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    substation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k_loss: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    i_eff_max: Option<f64>,
    /// Turn counts: `[n_high, n_low]` or `[n_series, n_common]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    turns: Option<Vec<f64>>,
    /// Winding resistances (ohms), one per DC arc of the kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    winding_r: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

fn line_kind() -> String {
    "line".to_owned()
}

#[derive(Debug, Serialize, Deserialize)]
struct GenDoc {
    id: String,
    bus: String,
    #[serde(default)]
    c0: f64,
    #[serde(default)]
    c1: f64,
    #[serde(default)]
    c2: f64,
    p_min: f64,
    p_max: f64,
    q_min: f64,
    q_max: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SubDoc {
    id: String,
    r_ground: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DcNodeDoc {
    id: String,
    #[serde(default)]
    a: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bus: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    substation: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DcArcDoc {
    id: String,
    from: String,
    to: String,
    gamma: f64,
    #[serde(default)]
    len_e_km: f64,
    #[serde(default)]
    len_n_km: f64,
    branch: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    winding: Option<String>,
}

/// Parses and fully validates an instance document.
pub fn load_instance(text: &str) -> Result<GridCase, GridError> {
    let doc: Doc = toml::from_str(text).map_err(|e| GridError::Schema(e.to_string()))?;
    if doc.format != FORMAT_TAG {
        return Err(GridError::Schema(format!(
            "unsupported format tag \"{}\" (expected \"{FORMAT_TAG}\")",
            doc.format
        )));
    }

    let buses: Vec<Bus> = doc
        .buses
        .iter()
        .map(|b| {
            let coords = match (b.lat, b.lon) {
                (Some(lat), Some(lon)) => Some((lat, lon)),
                _ => None,
            };
            Bus {
                name: b.id.clone(),
                d_p: b.d_p,
                d_q: b.d_q,
                v_lo: b.v_lo,
                v_hi: b.v_hi,
                g_s: b.g_s,
                b_s: b.b_s,
                coords,
            }
        })
        .collect();
    let bus_idx = super::index_by_name(&buses, |b: &Bus| b.name.as_str());

    let mut edges: Vec<AcEdge> = Vec::with_capacity(doc.branches.len());
    for br in &doc.branches {
        let entity = format!("branch \"{}\"", br.id);
        let from = *bus_idx.get(br.from.as_str()).ok_or_else(|| GridError::UnknownRef {
            entity: entity.clone(),
            kind: "bus",
            name: br.from.clone(),
        })?;
        let to = *bus_idx.get(br.to.as_str()).ok_or_else(|| GridError::UnknownRef {
            entity: entity.clone(),
            kind: "bus",
            name: br.to.clone(),
        })?;

        let kind = parse_kind(br, &buses[from], &buses[to])?;
        let length_override = match (br.length_e_km, br.length_n_km) {
            (Some(e), Some(n)) => Some((e, n)),
            (None, None) => None,
            _ => {
                return Err(GridError::Invariant {
                    entity,
                    what: "length_e_km and length_n_km must be given together".into(),
                })
            }
        };
        edges.push(AcEdge {
            name: br.id.clone(),
            from: BusId(from),
            to: BusId(to),
            g: br.g,
            b: br.b,
            b_c: br.b_c,
            s_max: br.s_max,
            tap: br.tap,
            theta_lo: br.theta_min.unwrap_or(-DEFAULT_THETA_BOUND),
            theta_hi: br.theta_max.unwrap_or(DEFAULT_THETA_BOUND),
            kind,
            length_override,
            r_dc: br.r_dc,
        });
    }

    let mut generators = Vec::with_capacity(doc.generators.len());
    for g in &doc.generators {
        let bus = *bus_idx.get(g.bus.as_str()).ok_or_else(|| GridError::UnknownRef {
            entity: format!("generator \"{}\"", g.id),
            kind: "bus",
            name: g.bus.clone(),
        })?;
        generators.push(Generator {
            name: g.id.clone(),
            bus: BusId(bus),
            c0: g.c0,
            c1: g.c1,
            c2: g.c2,
            p_lo: g.p_min,
            p_hi: g.p_max,
            q_lo: g.q_min,
            q_hi: g.q_max,
        });
    }

    let substations: Vec<Substation> = doc
        .substations
        .iter()
        .map(|s| Substation {
            name: s.id.clone(),
            r_ground: s.r_ground,
        })
        .collect();

    let (dc_nodes, dc_arcs) = if doc.dc_nodes.is_empty() && doc.dc_arcs.is_empty() {
        let (n, a, _) = derive_dc_network(&buses, &edges, &substations)?;
        (n, a)
    } else {
        parse_explicit_dc(&doc, &buses, &edges, &bus_idx)?
    };

    GridCase::assemble(
        doc.name,
        buses,
        edges,
        generators,
        substations,
        dc_nodes,
        dc_arcs,
        GmdParams {
            kappa_l: doc.gmd.kappa_l,
            kappa_s: doc.gmd.kappa_s,
            vbar_d: doc.gmd.vbar_d,
        },
    )
}

fn parse_kind(br: &BranchDoc, from: &Bus, to: &Bus) -> Result<EdgeKind, GridError> {
    let entity = format!("branch \"{}\"", br.id);
    if br.kind == "line" {
        return Ok(EdgeKind::Line);
    }
    let turns = br.turns.clone().unwrap_or_default();
    let need_turns = |n: usize| -> Result<(), GridError> {
        if turns.len() != n {
            Err(GridError::Invariant {
                entity: entity.clone(),
                what: format!("kind {} requires {} turn counts", br.kind, n),
            })
        } else {
            Ok(())
        }
    };
    let kind = match br.kind.as_str() {
        "gwye_gwye" => {
            need_turns(2)?;
            TransformerKind::GwyeGwye {
                n_high: turns[0],
                n_low: turns[1],
            }
        }
        "gwye_gwye_auto" => {
            need_turns(2)?;
            TransformerKind::GwyeGwyeAuto {
                n_series: turns[0],
                n_common: turns[1],
            }
        }
        "gwye_delta_gsu" => TransformerKind::GwyeDeltaGsu,
        other => {
            return Err(GridError::Schema(format!(
                "{entity}: unknown branch kind \"{other}\""
            )))
        }
    };
    let substation = br.substation.clone().ok_or_else(|| GridError::NoSubstation(br.id.clone()))?;
    let k_loss = br.k_loss.ok_or_else(|| GridError::Invariant {
        entity: entity.clone(),
        what: "transformer requires k_loss".into(),
    })?;
    let winding_r = br.winding_r.clone().ok_or_else(|| GridError::Invariant {
        entity: entity.clone(),
        what: "transformer requires winding_r".into(),
    })?;
    let i_eff_max = br
        .i_eff_max
        .unwrap_or_else(|| default_i_eff_max(br.s_max, from.v_lo, to.v_lo));
    Ok(EdgeKind::Transformer(Transformer {
        kind,
        substation,
        k_loss,
        i_eff_max,
        winding_r,
    }))
}

fn parse_explicit_dc(
    doc: &Doc,
    _buses: &[Bus],
    edges: &[AcEdge],
    bus_idx: &std::collections::HashMap<&str, usize>,
) -> Result<(Vec<DcNode>, Vec<DcArc>), GridError> {
    let edge_idx = super::index_by_name(edges, |e: &AcEdge| e.name.as_str());

    let mut nodes = Vec::with_capacity(doc.dc_nodes.len());
    for n in &doc.dc_nodes {
        let entity = format!("dc node \"{}\"", n.id);
        let origin = match (&n.bus, &n.substation) {
            (Some(b), None) => {
                let bi = *bus_idx.get(b.as_str()).ok_or_else(|| GridError::UnknownRef {
                    entity: entity.clone(),
                    kind: "bus",
                    name: b.clone(),
                })?;
                DcNodeOrigin::BusImage(BusId(bi))
            }
            (None, Some(s)) => DcNodeOrigin::Neutral(s.clone()),
            _ => {
                return Err(GridError::Invariant {
                    entity,
                    what: "exactly one of bus/substation must be set".into(),
                })
            }
        };
        nodes.push(DcNode {
            name: n.id.clone(),
            a: n.a,
            origin,
        });
    }
    let node_idx = super::index_by_name(&nodes, |n: &DcNode| n.name.as_str());

    let mut arcs = Vec::with_capacity(doc.dc_arcs.len());
    for a in &doc.dc_arcs {
        let entity = format!("dc arc \"{}\"", a.id);
        let from = *node_idx.get(a.from.as_str()).ok_or_else(|| GridError::UnknownRef {
            entity: entity.clone(),
            kind: "dc node",
            name: a.from.clone(),
        })?;
        let to = *node_idx.get(a.to.as_str()).ok_or_else(|| GridError::UnknownRef {
            entity: entity.clone(),
            kind: "dc node",
            name: a.to.clone(),
        })?;
        let edge = *edge_idx.get(a.branch.as_str()).ok_or_else(|| GridError::UnknownRef {
            entity: entity.clone(),
            kind: "branch",
            name: a.branch.clone(),
        })?;
        let winding = match a.winding.as_deref() {
            None => None,
            Some("high") => Some(Winding::High),
            Some("low") => Some(Winding::Low),
            Some("series") => Some(Winding::Series),
            Some("common") => Some(Winding::Common),
            Some(other) => {
                return Err(GridError::Schema(format!(
                    "{entity}: unknown winding role \"{other}\""
                )))
            }
        };
        arcs.push(DcArc {
            name: a.id.clone(),
            from: DcNodeId(from),
            to: DcNodeId(to),
            gamma: a.gamma,
            len_e: a.len_e_km,
            len_n: a.len_n_km,
            ac_edge: EdgeId(edge),
            winding,
        });
    }
    Ok((nodes, arcs))
}

/// Emits the canonical document for a case. The DC network is always
/// written explicitly so the round trip is exact even for derived networks.
pub fn serialize_instance(case: &GridCase) -> String {
    let doc = Doc {
        format: FORMAT_TAG.to_owned(),
        name: case.name.clone(),
        gmd: GmdDoc {
            kappa_l: case.gmd.kappa_l,
            kappa_s: case.gmd.kappa_s,
            vbar_d: case.gmd.vbar_d,
        },
        buses: case
            .buses
            .iter()
            .map(|b| BusDoc {
                id: b.name.clone(),
                d_p: b.d_p,
                d_q: b.d_q,
                v_lo: b.v_lo,
                v_hi: b.v_hi,
                g_s: b.g_s,
                b_s: b.b_s,
                lat: b.coords.map(|c| c.0),
                lon: b.coords.map(|c| c.1),
            })
            .collect(),
        branches: case
            .ac_edges
            .iter()
            .map(|e| {
                let tx = e.transformer();
                BranchDoc {
                    id: e.name.clone(),
                    from: case.buses[e.from.0].name.clone(),
                    to: case.buses[e.to.0].name.clone(),
                    g: e.g,
                    b: e.b,
                    b_c: e.b_c,
                    s_max: e.s_max,
                    tap: e.tap,
                    theta_min: Some(e.theta_lo),
                    theta_max: Some(e.theta_hi),
                    kind: tx.map_or("line".to_owned(), |t| t.kind.label().to_owned()),
                    r_dc: e.r_dc,
                    length_e_km: e.length_override.map(|l| l.0),
                    length_n_km: e.length_override.map(|l| l.1),
                    substation: tx.map(|t| t.substation.clone()),
                    k_loss: tx.map(|t| t.k_loss),
                    i_eff_max: tx.map(|t| t.i_eff_max),
                    turns: tx.and_then(|t| match t.kind {
                        TransformerKind::GwyeGwye { n_high, n_low } => Some(vec![n_high, n_low]),
                        TransformerKind::GwyeGwyeAuto { n_series, n_common } => {
                            Some(vec![n_series, n_common])
                        }
                        TransformerKind::GwyeDeltaGsu => None,
                    }),
                    winding_r: tx.map(|t| t.winding_r.clone()),
                }
            })
            .collect(),
        generators: case
            .generators
            .iter()
            .map(|g| GenDoc {
                id: g.name.clone(),
                bus: case.buses[g.bus.0].name.clone(),
                c0: g.c0,
                c1: g.c1,
                c2: g.c2,
                p_min: g.p_lo,
                p_max: g.p_hi,
                q_min: g.q_lo,
                q_max: g.q_hi,
            })
            .collect(),
        substations: case
            .substations
            .iter()
            .map(|s| SubDoc {
                id: s.name.clone(),
                r_ground: s.r_ground,
            })
            .collect(),
        dc_nodes: case
            .dc_nodes
            .iter()
            .map(|n| DcNodeDoc {
                id: n.name.clone(),
                a: n.a,
                bus: match &n.origin {
                    DcNodeOrigin::BusImage(b) => Some(case.buses[b.0].name.clone()),
                    DcNodeOrigin::Neutral(_) => None,
                },
                substation: match &n.origin {
                    DcNodeOrigin::Neutral(s) => Some(s.clone()),
                    DcNodeOrigin::BusImage(_) => None,
                },
            })
            .collect(),
        dc_arcs: case
            .dc_arcs
            .iter()
            .map(|a| DcArcDoc {
                id: a.name.clone(),
                from: case.dc_nodes[a.from.0].name.clone(),
                to: case.dc_nodes[a.to.0].name.clone(),
                gamma: a.gamma,
                len_e_km: a.len_e,
                len_n_km: a.len_n,
                branch: case.ac_edges[a.ac_edge.0].name.clone(),
                winding: a.winding.map(|w| w.label().to_owned()),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("case serializes to TOML")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
format = "gmd-case/1"
name = "mini"

[gmd]
kappa_l = 1000.0
kappa_s = 2000.0
vbar_d = 10000.0

[[buses]]
id = "B1"
v_lo = 0.9
v_hi = 1.1
lat = 33.0
lon = -84.0

[[buses]]
id = "B2"
d_p = 1.0
d_q = 0.3
v_lo = 0.9
v_hi = 1.1
lat = 33.5
lon = -84.0

[[branches]]
id = "L1"
from = "B1"
to = "B2"
g = 1.0
b = -8.0
s_max = 3.0
r_dc = 2.0

[[generators]]
id = "G1"
bus = "B1"
c1 = 10.0
p_min = 0.0
p_max = 3.0
q_min = -2.0
q_max = 2.0
"#;

    #[test]
    fn minimal_two_bus() {
        let case = load_instance(MINIMAL).unwrap();
        assert_eq!(case.buses.len(), 2);
        assert_eq!(case.ac_edges.len(), 1);
        assert_eq!(case.transformer_edges().count(), 0);
        // Derived DC net: two bus images, no neutrals, one line arc.
        assert_eq!(case.dc_nodes.len(), 2);
        assert_eq!(case.dc_arcs.len(), 1);
        assert!((case.dc_arcs[0].gamma - 0.5).abs() < 1e-12);
        // Line arc picked up the projected coordinates: due north ~55.6 km.
        assert!(case.dc_arcs[0].len_e.abs() < 1e-9);
        assert!((case.dc_arcs[0].len_n - 55.6).abs() < 0.1);
    }

    #[test]
    fn gsu_transformer_gets_single_winding_arc() {
        let text = format!(
            "{MINIMAL}
[[substations]]
id = \"S1\"
r_ground = 0.5

[[branches]]
id = \"T1\"
from = \"B1\"
to = \"B2\"
g = 0.5
b = -10.0
s_max = 3.0
kind = \"gwye_delta_gsu\"
substation = \"S1\"
k_loss = 0.001
winding_r = [0.2]
"
        );
        let case = load_instance(&text).unwrap();
        let t1 = case.edge_index("T1").unwrap();
        assert_eq!(case.mapping.arcs_of(t1).len(), 1);
        let arc = &case.dc_arcs[case.mapping.arcs_of(t1)[0].0];
        assert_eq!(arc.winding, Some(Winding::High));
        assert_eq!(arc.len_e, 0.0);
        // Default cap: 2 * s_max / min(v_lo).
        let tx = case.ac_edges[t1.0].transformer().unwrap();
        assert!((tx.i_eff_max - 2.0 * 3.0 / 0.9).abs() < 1e-12);
    }

    #[test]
    fn unknown_bus_is_named_in_error() {
        let text = MINIMAL.replace("to = \"B2\"", "to = \"B99\"");
        let err = load_instance(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("B99"), "error should name the bus: {msg}");
    }

    #[test]
    fn round_trip_is_exact() {
        let case = load_instance(MINIMAL).unwrap();
        let text = serialize_instance(&case);
        let back = load_instance(&text).unwrap();
        assert_eq!(case, back);
    }

    #[test]
    fn bad_format_tag() {
        let text = MINIMAL.replace("gmd-case/1", "gmd-case/9");
        assert!(matches!(load_instance(&text), Err(GridError::Schema(_))));
    }
}
