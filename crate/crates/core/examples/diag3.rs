use gmdro::cases::synth_case;
use gmdro::gic::FieldScenario;
use gmdro::opt::*;
use gmdro::stage::*;

fn main() {
    let grid = synth_case(4).unwrap();
    let (mut model, h) = build_first_stage(&grid).unwrap();
    let link = StageLink::from_handles(&h);
    let vars = append_second_stage(&mut model, &grid, &link, XiVal::Fixed(FieldScenario::ZERO),
        VoltageEnvelope::Box, "s0").unwrap();
    for (v, c) in vars.cost_terms(&grid) { model.add_obj_coef(v, c); }

    // Path A: full conic MILP (lazy in-tree cuts)
    let sol = solve_conic_milp(&model, &ConeCutConfig::default(), &BundledSimplex::default());
    println!("A lazy-tree : status {:?} obj {:.4} rounds {} cuts {} viol {:.2e}", sol.status, sol.obj, sol.rounds, sol.cuts, sol.max_cone_violation);

    // Path B: fix binaries to all-on and solve conic LP
    let mut m2 = model.clone();
    for &z in h.z_edge.iter().chain(h.z_gen.iter()) { m2.set_bounds(z, 1.0, 1.0); }
    let sol2 = solve_conic_milp(&m2, &ConeCutConfig::default(), &BundledSimplex::default());
    println!("B all-on    : status {:?} obj {:.4} rounds {} viol {:.2e}", sol2.status, sol2.obj, sol2.rounds, sol2.max_cone_violation);

    // Path C: no-lazy outer loop (forced via DenseTableau-like fallback):
    struct NoLazy(BundledSimplex);
    impl Backend for NoLazy {
        fn name(&self) -> &str { "nolazy" }
        fn solve_lp(&self, p: &LinProblem) -> LpSolution { self.0.solve_lp(p) }
        fn solve_milp(&self, p: &LinProblem) -> MilpSolution { self.0.solve_milp(p) }
    }
    let sol3 = solve_conic_milp(&model, &ConeCutConfig::default(), &NoLazy(BundledSimplex::default()));
    println!("C outer-loop: status {:?} obj {:.4} rounds {} viol {:.2e}", sol3.status, sol3.obj, sol3.rounds, sol3.max_cone_violation);
}
