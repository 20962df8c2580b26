//! Cross-checks between the two bundled engines on randomized LPs and
//! MILPs. The engines share no code beyond the problem struct, so
//! agreement here pins down both.

use gmdro::opt::{backend_by_name, Backend, BundledSimplex, DenseTableau, LinProblem, Status, INF};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn random_problem(rng: &mut ChaCha8Rng, with_binaries: bool) -> LinProblem {
    let n = rng.random_range(2..=8);
    let m = rng.random_range(1..=4);
    let mut cost = Vec::new();
    let mut col_lb = Vec::new();
    let mut col_ub = Vec::new();
    let mut integral = Vec::new();
    for _ in 0..n {
        let binary = with_binaries && rng.random_bool(0.4);
        if binary {
            cost.push(rng.random_range(-5.0..5.0_f64).round());
            col_lb.push(0.0);
            col_ub.push(1.0);
            integral.push(true);
        } else {
            cost.push(rng.random_range(-3.0..3.0));
            // Mix of boxed, one-sided and free variables; keep most boxed
            // so random instances are usually bounded.
            match rng.random_range(0..20) {
                0 => {
                    col_lb.push(-INF);
                    col_ub.push(rng.random_range(0.0..4.0));
                }
                1 => {
                    col_lb.push(rng.random_range(-4.0..0.0));
                    col_ub.push(INF);
                }
                _ => {
                    let lo = rng.random_range(-5.0..2.0);
                    col_lb.push(lo);
                    col_ub.push(lo + rng.random_range(0.0..6.0));
                }
            }
            integral.push(false);
        }
    }
    let mut rows = Vec::new();
    let mut row_lb = Vec::new();
    let mut row_ub = Vec::new();
    for _ in 0..m {
        let nnz = rng.random_range(1..=n.min(4));
        let mut cols: Vec<usize> = (0..n).collect();
        cols.shuffle(rng);
        let terms: Vec<(usize, f64)> = cols[..nnz]
            .iter()
            .map(|&j| (j, rng.random_range(-3.0..3.0)))
            .filter(|&(_, c): &(usize, f64)| c.abs() > 0.05)
            .collect();
        if terms.is_empty() {
            continue;
        }
        let b = rng.random_range(-5.0..5.0);
        match rng.random_range(0..5) {
            0 | 1 => {
                row_lb.push(-INF);
                row_ub.push(b);
            }
            2 | 3 => {
                row_lb.push(b);
                row_ub.push(INF);
            }
            _ => {
                row_lb.push(b);
                row_ub.push(b + rng.random_range(2.0..8.0));
            }
        }
        rows.push(terms);
    }
    LinProblem {
        cost,
        col_lb,
        col_ub,
        integral,
        rows,
        row_lb,
        row_ub,
        obj_offset: 0.0,
    }
}

#[test]
fn lp_objectives_agree_across_backends() {
    let fast = BundledSimplex::default();
    let dense = DenseTableau;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut optimal = 0;
    for trial in 0..400 {
        let p = random_problem(&mut rng, false);
        let a = fast.solve_lp(&p);
        let b = dense.solve_lp(&p);
        assert_eq!(
            a.status, b.status,
            "trial {trial}: status mismatch {:?} vs {:?}\n{p:?}",
            a.status, b.status
        );
        if a.status == Status::Optimal {
            optimal += 1;
            let scale = 1.0 + a.obj.abs().max(b.obj.abs());
            assert!(
                (a.obj - b.obj).abs() <= 1e-6 * scale,
                "trial {trial}: obj {} vs {}\n{p:?}",
                a.obj,
                b.obj
            );
        }
    }
    assert!(optimal > 150, "suite too degenerate: {optimal} optimal LPs");
}

#[test]
fn milp_objectives_agree_across_backends() {
    let fast = BundledSimplex::default();
    let dense = DenseTableau;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut optimal = 0;
    for trial in 0..150 {
        let p = random_problem(&mut rng, true);
        if !p.has_integrals() {
            continue;
        }
        let a = fast.solve_milp(&p);
        let b = dense.solve_milp(&p);
        // The dense engine cannot flag unbounded MILPs distinctly; skip
        // trials where either saw unboundedness.
        if a.status == Status::Unbounded || b.status == Status::Unbounded {
            continue;
        }
        assert_eq!(a.status, b.status, "trial {trial}:\n{p:?}");
        if a.status == Status::Optimal {
            optimal += 1;
            let scale = 1.0 + a.obj.abs().max(b.obj.abs());
            assert!(
                (a.obj - b.obj).abs() <= 1e-6 * scale,
                "trial {trial}: obj {} vs {}\n{p:?}",
                a.obj,
                b.obj
            );
        }
    }
    assert!(optimal > 30, "suite too degenerate: {optimal} optimal MILPs");
}

#[test]
fn duals_match_on_lps() {
    let fast = BundledSimplex::default();
    let dense = DenseTableau;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0;
    for _ in 0..200 {
        let p = random_problem(&mut rng, false);
        let a = fast.solve_lp(&p);
        let b = dense.solve_lp(&p);
        if a.status != Status::Optimal || b.status != Status::Optimal {
            continue;
        }
        // Duals can differ at degenerate optima; compare only through the
        // objective identity obj = sum duals * active bound + reduced-cost
        // part, which is awkward; instead require agreement when both
        // report the same active set implicitly via matching duals.
        let close = a
            .duals
            .iter()
            .zip(&b.duals)
            .all(|(x, y)| (x - y).abs() <= 1e-6 * (1.0 + x.abs().max(y.abs())));
        if close {
            checked += 1;
        }
    }
    // Degenerate ties may pick different optimal bases, so do not demand
    // equality on every instance; the bulk must agree.
    assert!(checked > 50, "only {checked} dual vectors agreed");
}

#[test]
fn registry_resolves_names() {
    assert!(backend_by_name("simplex").is_some());
    assert!(backend_by_name("tableau").is_some());
    assert!(backend_by_name("gurobi").is_none());
    assert_eq!(backend_by_name("bundled").unwrap().name(), "simplex");
}
