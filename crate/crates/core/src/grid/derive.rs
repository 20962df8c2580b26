//! Construction of the quasi-DC network from the AC description.

use super::{
    AcEdge, Bus, DcArc, DcNode, DcNodeId, DcNodeOrigin, EdgeId, EdgeKind, EdgeMapping, GridError,
    Substation, Winding,
};
use crate::geo::east_north_lengths;

/// Derives the DC network: one image node per bus, one neutral per grounded
/// substation that hosts at least one transformer, one arc per transmission
/// line (lengths from coordinates unless overridden) and per-kind winding
/// arcs for every transformer. Output ordering is deterministic: bus images
/// in bus order, neutrals in substation order, arcs in AC edge order.
pub fn derive_dc_network(
    buses: &[Bus],
    edges: &[AcEdge],
    substations: &[Substation],
) -> Result<(Vec<DcNode>, Vec<DcArc>, EdgeMapping), GridError> {
    let mut nodes: Vec<DcNode> = buses
        .iter()
        .enumerate()
        .map(|(i, b)| DcNode {
            name: format!("{}.d", b.name),
            a: 0.0,
            origin: DcNodeOrigin::BusImage(super::BusId(i)),
        })
        .collect();

    // Neutral per substation actually used by some transformer.
    let mut neutral_of: Vec<Option<DcNodeId>> = vec![None; substations.len()];
    for (si, sub) in substations.iter().enumerate() {
        let used = edges
            .iter()
            .any(|e| e.transformer().is_some_and(|t| t.substation == sub.name));
        if used {
            neutral_of[si] = Some(DcNodeId(nodes.len()));
            nodes.push(DcNode {
                name: format!("{}.n", sub.name),
                a: 1.0 / sub.r_ground,
                origin: DcNodeOrigin::Neutral(sub.name.clone()),
            });
        }
    }

    let mut arcs: Vec<DcArc> = Vec::new();
    for (ei, e) in edges.iter().enumerate() {
        let edge_id = EdgeId(ei);
        match &e.kind {
            EdgeKind::Line => {
                let (len_e, len_n) = match e.length_override {
                    Some(pair) => pair,
                    None => {
                        let (ci, cj) = (buses[e.from.0].coords, buses[e.to.0].coords);
                        match (ci, cj) {
                            (Some((lat_i, lon_i)), Some((lat_j, lon_j))) => {
                                east_north_lengths(lat_i, lon_i, lat_j, lon_j)
                            }
                            _ => return Err(GridError::MissingLengths(e.name.clone())),
                        }
                    }
                };
                let r_dc = e.r_dc.ok_or_else(|| GridError::Invariant {
                    entity: format!("branch \"{}\"", e.name),
                    what: "line needs r_dc (ohms) to derive its DC arc".into(),
                })?;
                if !(r_dc > 0.0) {
                    return Err(GridError::Invariant {
                        entity: format!("branch \"{}\"", e.name),
                        what: "r_dc must be positive".into(),
                    });
                }
                arcs.push(DcArc {
                    name: format!("{}.d", e.name),
                    from: DcNodeId(e.from.0),
                    to: DcNodeId(e.to.0),
                    gamma: 1.0 / r_dc,
                    len_e,
                    len_n,
                    ac_edge: edge_id,
                    winding: None,
                });
            }
            EdgeKind::Transformer(tx) => {
                let si = substations
                    .iter()
                    .position(|s| s.name == tx.substation)
                    .ok_or_else(|| GridError::NoSubstation(e.name.clone()))?;
                let neutral = neutral_of[si].expect("used substation has a neutral");
                let windings = tx.kind.windings();
                if tx.winding_r.len() != windings.len() {
                    return Err(GridError::Invariant {
                        entity: format!("branch \"{}\"", e.name),
                        what: format!(
                            "kind {} needs {} winding resistances, got {}",
                            tx.kind.label(),
                            windings.len(),
                            tx.winding_r.len()
                        ),
                    });
                }
                for (w, &r) in windings.iter().zip(&tx.winding_r) {
                    if !(r > 0.0) {
                        return Err(GridError::BadWindingResistance(e.name.clone()));
                    }
                    let (from, to) = match w {
                        // High/series windings hang off the from-side bus.
                        Winding::High => (DcNodeId(e.from.0), neutral),
                        Winding::Low | Winding::Common => (DcNodeId(e.to.0), neutral),
                        Winding::Series => (DcNodeId(e.from.0), DcNodeId(e.to.0)),
                    };
                    arcs.push(DcArc {
                        name: format!("{}.{}", e.name, w.label()),
                        from,
                        to,
                        gamma: 1.0 / r,
                        len_e: 0.0,
                        len_n: 0.0,
                        ac_edge: edge_id,
                        winding: Some(*w),
                    });
                }
            }
        }
    }

    let mapping = super::build_mapping(edges.len(), &arcs);
    Ok((nodes, arcs, mapping))
}
