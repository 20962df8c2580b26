//! Bundled synthetic desk-scale instances.
//!
//! `synth-4`, `synth-8` and `synth-12` are hand-sized cases with 2-4
//! transformers of mixed kinds, geo-located on a ~1 degree box so derived
//! line lengths land in the 10-45 km range. They are the default suite for
//! the experiment harness; parameters are chosen so that effective-GIC caps
//! leave comfortable headroom for fields up to |xi| ~ 5 V/km while larger
//! storms force topology changes.

use crate::grid::*;

/// Returns a bundled case by bus count (4, 8 or 12).
pub fn synth_case(n: usize) -> Result<GridCase, GridError> {
    match n {
        4 => synth4(),
        8 => synth8(),
        12 => synth12(),
        _ => Err(GridError::Schema(format!(
            "no bundled case with {n} buses (choose 4, 8 or 12)"
        ))),
    }
}

/// Resolves an instance argument that is either a bundled name
/// (`synth-4`, `synth-8`, `synth-12`) or `None`.
pub fn by_name(name: &str) -> Option<Result<GridCase, GridError>> {
    match name {
        "synth-4" => Some(synth4()),
        "synth-8" => Some(synth8()),
        "synth-12" => Some(synth12()),
        _ => None,
    }
}

pub const BUNDLED: [&str; 3] = ["synth-4", "synth-8", "synth-12"];

fn bus(name: &str, d_p: f64, d_q: f64, lat: f64, lon: f64) -> Bus {
    Bus {
        name: name.into(),
        d_p,
        d_q,
        v_lo: 0.92,
        v_hi: 1.08,
        g_s: 0.0,
        b_s: 0.0,
        coords: Some((lat, lon)),
    }
}

fn line(name: &str, from: usize, to: usize, s_max: f64, r_dc: f64) -> AcEdge {
    AcEdge {
        name: name.into(),
        from: BusId(from),
        to: BusId(to),
        g: 1.0,
        b: -8.0,
        b_c: 0.02,
        s_max,
        tap: 1.0,
        theta_lo: -std::f64::consts::PI / 6.0,
        theta_hi: std::f64::consts::PI / 6.0,
        kind: EdgeKind::Line,
        length_override: None,
        r_dc: Some(r_dc),
    }
}

#[allow(clippy::too_many_arguments)]
fn tx(
    name: &str,
    from: usize,
    to: usize,
    s_max: f64,
    kind: TransformerKind,
    substation: &str,
    k_loss: f64,
    winding_r: Vec<f64>,
) -> AcEdge {
    AcEdge {
        name: name.into(),
        from: BusId(from),
        to: BusId(to),
        g: 0.6,
        b: -12.0,
        b_c: 0.0,
        s_max,
        tap: 1.0,
        theta_lo: -std::f64::consts::PI / 6.0,
        theta_hi: std::f64::consts::PI / 6.0,
        kind: EdgeKind::Transformer(Transformer {
            kind,
            substation: substation.into(),
            k_loss,
            i_eff_max: default_i_eff_max(s_max, 0.92, 0.92),
            winding_r,
        }),
        length_override: None,
        r_dc: None,
    }
}

#[allow(clippy::too_many_arguments)]
fn gen(name: &str, bus: usize, c0: f64, c1: f64, c2: f64, p_hi: f64, q_lo: f64, q_hi: f64) -> Generator {
    Generator {
        name: name.into(),
        bus: BusId(bus),
        c0,
        c1,
        c2,
        p_lo: 0.0,
        p_hi,
        q_lo,
        q_hi,
    }
}

fn assemble(
    name: &str,
    buses: Vec<Bus>,
    edges: Vec<AcEdge>,
    gens: Vec<Generator>,
    subs: Vec<Substation>,
    gmd: GmdParams,
) -> Result<GridCase, GridError> {
    let (nodes, arcs, _) = derive_dc_network(&buses, &edges, &subs)?;
    GridCase::assemble(name.into(), buses, edges, gens, subs, nodes, arcs, gmd)
}

fn gmd_defaults() -> GmdParams {
    GmdParams {
        kappa_l: 2000.0,
        kappa_s: 4000.0,
        vbar_d: 10_000.0,
    }
}

/// 4 buses, 2 transformers (GSU + GwyeGwye), double-circuit line.
///
///   B1 ==T1(gsu)== B2 ==L1/L2== B3 ==T2(gg)== B4
fn synth4() -> Result<GridCase, GridError> {
    let buses = vec![
        bus("B1", 0.0, 0.0, 33.60, -84.60),
        bus("B2", 0.3, 0.10, 33.70, -84.45),
        bus("B3", 0.9, 0.30, 33.95, -84.25),
        bus("B4", 0.8, 0.28, 33.90, -84.10),
    ];
    let edges = vec![
        tx("T1", 1, 0, 8.0, TransformerKind::GwyeDeltaGsu, "S1", 0.020, vec![3.0]),
        line("L1", 1, 2, 5.0, 20.0),
        line("L2", 1, 2, 5.0, 22.0),
        tx(
            "T2",
            2,
            3,
            7.0,
            TransformerKind::GwyeGwye { n_high: 2.4, n_low: 1.0 },
            "S2",
            0.025,
            vec![3.8, 2.2],
        ),
    ];
    let gens = vec![
        gen("G1", 0, 120.0, 12.0, 0.25, 3.5, -1.2, 1.2),
        gen("G2", 2, 80.0, 28.0, 0.60, 1.2, -0.5, 0.5),
    ];
    let subs = vec![
        Substation { name: "S1".into(), r_ground: 2.5 },
        Substation { name: "S2".into(), r_ground: 2.0 },
    ];
    assemble("synth-4", buses, edges, gens, subs, gmd_defaults())
}

/// 8 buses, 3 transformers (one of each kind), a 4-bus ring and two pockets.
fn synth8() -> Result<GridCase, GridError> {
    let buses = vec![
        bus("B1", 0.0, 0.0, 33.30, -84.90),
        bus("B2", 0.3, 0.10, 33.40, -84.80),
        bus("B3", 0.5, 0.18, 33.65, -84.70),
        bus("B4", 0.4, 0.15, 33.80, -84.45),
        bus("B5", 0.6, 0.20, 33.55, -84.30),
        bus("B6", 0.9, 0.30, 33.75, -84.75),
        bus("B7", 0.7, 0.22, 33.45, -84.15),
        bus("B8", 0.5, 0.16, 33.95, -84.30),
    ];
    let edges = vec![
        tx("T1", 1, 0, 9.0, TransformerKind::GwyeDeltaGsu, "S1", 0.018, vec![2.8]),
        line("L1", 1, 2, 5.0, 20.0),
        line("L2", 2, 3, 5.0, 22.0),
        line("L3", 3, 4, 5.0, 21.0),
        line("L4", 4, 1, 5.0, 24.0),
        line("L5", 3, 7, 4.0, 19.0),
        tx(
            "T2",
            2,
            5,
            6.0,
            TransformerKind::GwyeGwyeAuto { n_series: 1.0, n_common: 2.0 },
            "S2",
            0.022,
            vec![2.2, 1.5],
        ),
        tx(
            "T3",
            4,
            6,
            6.0,
            TransformerKind::GwyeGwye { n_high: 2.2, n_low: 1.0 },
            "S3",
            0.020,
            vec![3.5, 2.0],
        ),
    ];
    let gens = vec![
        gen("G1", 0, 150.0, 11.0, 0.20, 4.5, -2.0, 2.0),
        gen("G2", 3, 90.0, 22.0, 0.40, 1.8, -0.8, 0.8),
        gen("G3", 7, 60.0, 30.0, 0.80, 1.0, -0.5, 0.5),
    ];
    let subs = vec![
        Substation { name: "S1".into(), r_ground: 2.2 },
        Substation { name: "S2".into(), r_ground: 2.8 },
        Substation { name: "S3".into(), r_ground: 1.8 },
    ];
    assemble("synth-8", buses, edges, gens, subs, gmd_defaults())
}

/// 12 buses, 4 transformers (GSU, auto, two GwyeGwye), a 5-bus ring with a
/// secondary loop.
fn synth12() -> Result<GridCase, GridError> {
    let buses = vec![
        bus("B1", 0.0, 0.0, 33.20, -85.00),
        bus("B2", 0.25, 0.08, 33.35, -84.85),
        bus("B3", 0.45, 0.15, 33.60, -84.80),
        bus("B4", 0.40, 0.13, 33.85, -84.60),
        bus("B5", 0.50, 0.17, 33.70, -84.35),
        bus("B6", 0.35, 0.12, 33.45, -84.45),
        bus("B7", 0.55, 0.18, 33.90, -84.20),
        bus("B8", 0.45, 0.15, 34.05, -84.40),
        bus("B9", 0.30, 0.10, 33.95, -84.85),
        bus("B10", 0.80, 0.26, 34.10, -84.95),
        bus("B11", 0.70, 0.24, 33.30, -84.25),
        bus("B12", 0.60, 0.20, 33.75, -85.05),
    ];
    let edges = vec![
        tx("T1", 1, 0, 10.0, TransformerKind::GwyeDeltaGsu, "S1", 0.016, vec![2.5]),
        line("L1", 1, 2, 5.0, 20.0),
        line("L2", 2, 3, 5.0, 21.0),
        line("L3", 3, 4, 5.0, 22.0),
        line("L4", 4, 5, 4.5, 20.0),
        line("L5", 5, 1, 4.5, 24.0),
        line("L6", 4, 6, 4.0, 19.0),
        line("L7", 6, 7, 4.0, 20.0),
        line("L8", 7, 3, 4.0, 21.0),
        line("L9", 8, 9, 4.0, 18.0),
        tx(
            "T2",
            3,
            8,
            6.0,
            TransformerKind::GwyeGwyeAuto { n_series: 1.0, n_common: 1.8 },
            "S2",
            0.020,
            vec![2.2, 1.5],
        ),
        tx(
            "T3",
            5,
            10,
            6.0,
            TransformerKind::GwyeGwye { n_high: 2.5, n_low: 1.0 },
            "S3",
            0.022,
            vec![3.8, 2.2],
        ),
        tx(
            "T4",
            2,
            11,
            5.5,
            TransformerKind::GwyeGwye { n_high: 2.0, n_low: 1.0 },
            "S4",
            0.024,
            vec![3.2, 2.0],
        ),
    ];
    let gens = vec![
        gen("G1", 0, 160.0, 10.0, 0.18, 5.0, -2.2, 2.2),
        gen("G2", 9, 100.0, 20.0, 0.35, 2.0, -0.9, 0.9),
        gen("G3", 7, 70.0, 26.0, 0.55, 1.2, -0.6, 0.6),
        gen("G4", 11, 60.0, 32.0, 0.90, 0.8, -0.4, 0.4),
    ];
    let subs = vec![
        Substation { name: "S1".into(), r_ground: 2.2 },
        Substation { name: "S2".into(), r_ground: 2.5 },
        Substation { name: "S3".into(), r_ground: 2.0 },
        Substation { name: "S4".into(), r_ground: 3.0 },
    ];
    assemble("synth-12", buses, edges, gens, subs, gmd_defaults())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gic::{solve_gic, FieldScenario, Topology};

    #[test]
    fn bundled_cases_assemble() {
        for n in [4, 8, 12] {
            let case = synth_case(n).unwrap();
            assert_eq!(case.buses.len(), n);
            let n_tx = case.transformer_edges().count();
            assert!((2..=4).contains(&n_tx), "{n}: {n_tx} transformers");
        }
    }

    #[test]
    fn bundled_cases_round_trip() {
        for n in [4, 8, 12] {
            let case = synth_case(n).unwrap();
            let text = crate::grid::serialize_instance(&case);
            let back = crate::grid::load_instance(&text).unwrap();
            assert_eq!(case, back, "synth-{n} round trip");
        }
    }

    #[test]
    fn caps_leave_headroom_at_moderate_fields() {
        // Fields up to |xi| = 5 V/km must keep every effective GIC below
        // 85% of its cap with everything switched on; the DRO suite relies
        // on this headroom for its complete-recourse sampling.
        for n in [4, 8, 12] {
            let case = synth_case(n).unwrap();
            let topo = Topology::all_on(&case);
            for field in [
                FieldScenario::new(5.0, 0.0),
                FieldScenario::new(0.0, 5.0),
                FieldScenario::new(-5.0, 0.0),
                FieldScenario::new(3.5, 3.5),
                FieldScenario::new(-3.5, 3.5),
            ] {
                let sol = solve_gic(&case, &topo, field).unwrap();
                for &(e, ieff) in &sol.i_eff {
                    let cap = case.ac_edges[e.0].transformer().unwrap().i_eff_max;
                    assert!(
                        ieff <= 0.85 * cap,
                        "synth-{n} {} at ({}, {}): {ieff:.2} A vs cap {cap:.2} A",
                        case.ac_edges[e.0].name,
                        field.e,
                        field.n
                    );
                }
            }
        }
    }
}
