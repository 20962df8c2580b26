//! Depth-first branch-and-bound on top of the warm-started dual simplex.
//!
//! Nodes re-solve with the dual method after a single bound change, so the
//! tree never refactorizes from scratch on the hot path. An optional lazy
//! separator is invoked at every integral LP optimum; returned rows are
//! appended globally (they must be valid for the full mixed-integer set,
//! which holds for outer-approximation cuts of convex cones) and the node
//! re-solves before the point may become an incumbent.

use super::model::LinProblem;
use super::simplex::{Simplex, SolveOutcome};

/// A globally valid linear cut `lb <= terms . x <= ub`.
#[derive(Debug, Clone)]
pub struct CutRow {
    pub terms: Vec<(usize, f64)>,
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone)]
pub struct BbConfig {
    pub int_tol: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
    pub max_nodes: u64,
    /// Lazy-separation rounds allowed at a single node.
    pub cut_rounds_per_node: u32,
}

impl Default for BbConfig {
    fn default() -> Self {
        BbConfig {
            int_tol: 1e-6,
            gap_abs: 1e-9,
            gap_rel: 1e-9,
            max_nodes: 500_000,
            cut_rounds_per_node: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Limit,
}

#[derive(Debug, Clone)]
pub struct MilpOutcome {
    pub status: MilpStatus,
    pub obj: f64,
    /// Structural values of the incumbent (empty when none).
    pub x: Vec<f64>,
    pub nodes: u64,
    pub cuts_added: usize,
}

struct Search<'a> {
    sx: Simplex,
    int_vars: Vec<usize>,
    cfg: &'a BbConfig,
    lazy: Option<&'a mut dyn FnMut(&[f64]) -> Vec<CutRow>>,
    incumbent: Option<(f64, Vec<f64>)>,
    nodes: u64,
    cuts_added: usize,
    aborted: bool,
    unbounded: bool,
}

pub fn solve_milp<'a>(
    p: &LinProblem,
    cfg: &'a BbConfig,
    lazy: Option<&'a mut dyn FnMut(&[f64]) -> Vec<CutRow>>,
) -> MilpOutcome {
    let int_vars: Vec<usize> = (0..p.num_cols()).filter(|&j| p.integral[j]).collect();
    let mut search = Search {
        sx: Simplex::new(p),
        int_vars,
        cfg,
        lazy,
        incumbent: None,
        nodes: 0,
        cuts_added: 0,
        aborted: false,
        unbounded: false,
    };
    let root = search.sx.solve_from_scratch();
    search.node(root);

    let status = if search.unbounded {
        MilpStatus::Unbounded
    } else if search.aborted {
        MilpStatus::Limit
    } else if search.incumbent.is_some() {
        MilpStatus::Optimal
    } else {
        MilpStatus::Infeasible
    };
    let (obj, x) = search
        .incumbent
        .map(|(o, x)| (o, x))
        .unwrap_or((f64::NAN, Vec::new()));
    MilpOutcome {
        status,
        obj,
        x,
        nodes: search.nodes,
        cuts_added: search.cuts_added,
    }
}

impl Search<'_> {
    fn cutoff(&self) -> Option<f64> {
        self.incumbent
            .as_ref()
            .map(|(inc, _)| inc - self.cfg.gap_abs.max(self.cfg.gap_rel * inc.abs()))
    }

    /// Handles the node whose LP has just been solved with `outcome`.
    fn node(&mut self, mut outcome: SolveOutcome) {
        self.nodes += 1;
        if self.nodes > self.cfg.max_nodes {
            self.aborted = true;
            return;
        }
        let mut cut_rounds = 0u32;
        loop {
            if self.aborted || self.unbounded {
                return;
            }
            match outcome {
                SolveOutcome::Infeasible => return,
                SolveOutcome::Unbounded => {
                    self.unbounded = true;
                    return;
                }
                SolveOutcome::IterLimit => {
                    // One clean retry before giving up.
                    outcome = self.sx.solve_from_scratch();
                    if outcome == SolveOutcome::IterLimit {
                        self.aborted = true;
                        return;
                    }
                    continue;
                }
                SolveOutcome::Optimal => {}
            }
            let obj = self.sx.objective();
            if let Some(cut) = self.cutoff() {
                if obj >= cut {
                    return;
                }
            }

            // Most fractional integer variable.
            let x = self.sx.primal();
            let mut branch: Option<(usize, f64, f64)> = None; // (var, value, fractionality)
            for &j in &self.int_vars {
                let f = (x[j] - x[j].round()).abs();
                if f > self.cfg.int_tol && branch.as_ref().is_none_or(|&(_, _, bf)| f > bf) {
                    branch = Some((j, x[j], f));
                }
            }

            match branch {
                None => {
                    // Integral: run the lazy separator before accepting.
                    if let Some(sep) = self.lazy.as_deref_mut() {
                        let cuts = sep(self.sx.primal());
                        if !cuts.is_empty() {
                            cut_rounds += 1;
                            if cut_rounds > self.cfg.cut_rounds_per_node {
                                // Accept as incumbent of the current
                                // relaxation; the outer conic loop reports
                                // the residual violation.
                            } else {
                                for c in &cuts {
                                    self.sx.add_row(&c.terms, c.lb, c.ub);
                                }
                                self.cuts_added += cuts.len();
                                outcome = self.sx.reoptimize();
                                continue;
                            }
                        }
                    }
                    let better = self
                        .incumbent
                        .as_ref()
                        .is_none_or(|(inc, _)| obj < *inc);
                    if better {
                        self.incumbent = Some((obj, self.sx.primal().to_vec()));
                    }
                    return;
                }
                Some((j, val, _)) => {
                    let (lo, hi) = self.sx.col_bounds(j);
                    let floor = val.floor().max(lo);
                    let ceil = val.ceil().min(hi);
                    // Explore the rounding side first.
                    let down_first = val - floor < ceil - val;
                    for &down in if down_first { &[true, false] } else { &[false, true] } {
                        if self.aborted || self.unbounded {
                            break;
                        }
                        if down {
                            self.sx.set_col_bounds(j, lo, floor);
                        } else {
                            self.sx.set_col_bounds(j, ceil, hi);
                        }
                        let out = self.sx.reoptimize();
                        self.node(out);
                        self.sx.set_col_bounds(j, lo, hi);
                    }
                    return;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::model::INF;

    fn milp(
        cost: Vec<f64>,
        bounds: Vec<(f64, f64, bool)>,
        rows: Vec<(Vec<(usize, f64)>, f64, f64)>,
    ) -> LinProblem {
        LinProblem {
            cost,
            col_lb: bounds.iter().map(|b| b.0).collect(),
            col_ub: bounds.iter().map(|b| b.1).collect(),
            integral: bounds.iter().map(|b| b.2).collect(),
            rows: rows.iter().map(|r| r.0.clone()).collect(),
            row_lb: rows.iter().map(|r| r.1).collect(),
            row_ub: rows.iter().map(|r| r.2).collect(),
            obj_offset: 0.0,
        }
    }

    #[test]
    fn small_knapsack() {
        // max 5a + 4b + 3c s.t. 2a + 3b + c <= 4, binaries -> a=c=1, obj 8.
        let p = milp(
            vec![-5.0, -4.0, -3.0],
            vec![(0.0, 1.0, true); 3],
            vec![(vec![(0, 2.0), (1, 3.0), (2, 1.0)], -INF, 4.0)],
        );
        let out = solve_milp(&p, &BbConfig::default(), None);
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!((out.obj + 8.0).abs() < 1e-9);
        assert!((out.x[0] - 1.0).abs() < 1e-6);
        assert!((out.x[1]).abs() < 1e-6);
        assert!((out.x[2] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn integrality_changes_the_optimum() {
        // LP relaxation gives x = 1.5; MILP must settle on 1 or 2.
        // min |x - 1.5| is emulated with cost on two slack directions.
        let p = milp(
            vec![1.0, 1.0],
            vec![(0.0, 10.0, true), (0.0, INF, false)],
            // x + y >= 1.5 with y continuous padding
            vec![(vec![(0, 1.0), (1, 1.0)], 1.5, INF)],
        );
        let out = solve_milp(&p, &BbConfig::default(), None);
        assert_eq!(out.status, MilpStatus::Optimal);
        // Either x=1,y=0.5 (obj 1.5) or x=2 (obj 2): the former wins.
        assert!((out.obj - 1.5).abs() < 1e-9);
        assert!((out.x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_binary_system() {
        // a + b = 1.5 has no binary solution.
        let p = milp(
            vec![0.0, 0.0],
            vec![(0.0, 1.0, true); 2],
            vec![(vec![(0, 1.0), (1, 1.0)], 1.5, 1.5)],
        );
        let out = solve_milp(&p, &BbConfig::default(), None);
        assert_eq!(out.status, MilpStatus::Infeasible);
    }

    #[test]
    fn lazy_cuts_reject_until_valid() {
        // min -x - y over binaries with a lazy separator enforcing x + y <= 1.
        let p = milp(
            vec![-1.0, -1.0],
            vec![(0.0, 1.0, true); 2],
            vec![],
        );
        let mut sep = |x: &[f64]| {
            if x[0] + x[1] > 1.0 + 1e-9 {
                vec![CutRow {
                    terms: vec![(0, 1.0), (1, 1.0)],
                    lb: -INF,
                    ub: 1.0,
                }]
            } else {
                Vec::new()
            }
        };
        let out = solve_milp(&p, &BbConfig::default(), Some(&mut sep));
        assert_eq!(out.status, MilpStatus::Optimal);
        assert!((out.obj + 1.0).abs() < 1e-9);
        assert!(out.cuts_added >= 1);
    }
}
