use gmdro::cases::synth_case;
use gmdro::dro::{deterministic_solve, DroConfig};
use gmdro::gic::FieldScenario;
use gmdro::opt::BundledSimplex;

fn main() {
    let grid = synth_case(4).unwrap();
    let backend = BundledSimplex::default();
    let det = deterministic_solve(&grid, FieldScenario::ZERO, &backend, &DroConfig::default()).unwrap();
    println!("objective {}", det.objective);
    println!("scenario cost {:?}", det.scenario_costs);
    println!("z_edge {:?}", det.plan.z_edge);
    println!("z_gen {:?}", det.plan.z_gen);
    println!("f_p {:?}", det.plan.f_p);
    println!("shed p+ {:?}", det.plan.l_p_plus);
    println!("shed p- {:?}", det.plan.l_p_minus);
    println!("shed q+ {:?}", det.plan.l_q_plus);
    println!("shed q- {:?}", det.plan.l_q_minus);
    println!("d_qloss {:?}", det.plan.d_qloss);
    println!("v {:?}", det.plan.v);
}
