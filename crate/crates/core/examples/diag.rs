use gmdro::cases::synth_case;
use gmdro::gic::{solve_gic, FieldScenario, Topology};

fn main() {
    for n in [4usize, 8, 12] {
        let case = synth_case(n).unwrap();
        let topo = Topology::all_on(&case);
        println!("=== synth-{n}");
        for field in [(5.0, 0.0), (0.0, 5.0), (-5.0, 0.0), (3.5, 3.5), (-3.5, 3.5)] {
            let sol = solve_gic(&case, &topo, FieldScenario::new(field.0, field.1)).unwrap();
            for &(e, ieff) in &sol.i_eff {
                let tx = case.ac_edges[e.0].transformer().unwrap();
                let frac = ieff / tx.i_eff_max;
                if frac > 0.5 {
                    println!("  field ({:5.1},{:5.1})  {}  I^eff {:7.2} A  cap {:6.2}  {:4.0}%",
                        field.0, field.1, case.ac_edges[e.0].name, ieff, tx.i_eff_max, frac*100.0);
                }
            }
        }
    }
}
