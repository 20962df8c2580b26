//! Textbook dense two-phase simplex, kept deliberately independent of the
//! revised implementation in [`super::simplex`]. It exists as a second
//! backend: slower, allocation-happy, but written from the standard-form
//! recipe, which makes it a useful cross-check on small models.

use super::model::{LinProblem, INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TabStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct TabSolution {
    pub status: TabStatus,
    pub obj: f64,
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
}

/// Column bookkeeping for the standard-form transformation.
#[derive(Clone, Copy)]
enum ColMap {
    Shifted { var: usize, shift: f64, neg: bool },
    FreePlus { var: usize },
    FreeMinus { var: usize },
    Slack { erow: usize, sign: f64 },
    Artificial { erow: usize },
}

#[derive(Clone, Copy, PartialEq)]
enum Sense {
    Le,
    Ge,
    Eq,
}

pub fn solve_lp_dense(p: &LinProblem) -> TabSolution {
    let n = p.num_cols();

    // Nonnegative standard-form variables.
    let mut cols: Vec<ColMap> = Vec::new();
    let mut cost: Vec<f64> = Vec::new();
    let mut col_of_var = vec![usize::MAX; n];
    for j in 0..n {
        let (lb, ub) = (p.col_lb[j], p.col_ub[j]);
        col_of_var[j] = cols.len();
        if lb.is_finite() {
            cols.push(ColMap::Shifted { var: j, shift: lb, neg: false });
            cost.push(p.cost[j]);
        } else if ub.is_finite() {
            cols.push(ColMap::Shifted { var: j, shift: ub, neg: true });
            cost.push(-p.cost[j]);
        } else {
            cols.push(ColMap::FreePlus { var: j });
            cost.push(p.cost[j]);
            cols.push(ColMap::FreeMinus { var: j });
            cost.push(-p.cost[j]);
        }
    }
    let n_struct_cols = cols.len();

    let std_coeffs = |terms: &[(usize, f64)]| -> (Vec<f64>, f64) {
        let mut row = vec![0.0; n_struct_cols];
        let mut shift_total = 0.0;
        for &(j, c) in terms {
            match cols[col_of_var[j]] {
                ColMap::Shifted { shift, neg, .. } => {
                    row[col_of_var[j]] += if neg { -c } else { c };
                    shift_total += c * shift;
                }
                ColMap::FreePlus { .. } => {
                    row[col_of_var[j]] += c;
                    row[col_of_var[j] + 1] -= c;
                }
                _ => unreachable!(),
            }
        }
        (row, shift_total)
    };

    // Emitted rows, already normalized to rhs >= 0.
    struct ERow {
        coeffs: Vec<f64>,
        rhs: f64,
        sense: Sense,
        orig: Option<usize>,
        sign: f64,
    }
    let mut erows: Vec<ERow> = Vec::new();
    let mut push_row = |coeffs: Vec<f64>, rhs: f64, sense: Sense, orig: Option<usize>| {
        if rhs < 0.0 {
            erows.push(ERow {
                coeffs: coeffs.iter().map(|c| -c).collect(),
                rhs: -rhs,
                sense: match sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                },
                orig,
                sign: -1.0,
            });
        } else {
            erows.push(ERow { coeffs, rhs, sense, orig, sign: 1.0 });
        }
    };
    for (r, terms) in p.rows.iter().enumerate() {
        let (row, shift) = std_coeffs(terms);
        let (lo, hi) = (p.row_lb[r] - shift, p.row_ub[r] - shift);
        if lo.is_finite() && hi.is_finite() && (lo - hi).abs() <= 1e-12 {
            push_row(row, lo, Sense::Eq, Some(r));
        } else {
            if lo.is_finite() {
                push_row(row.clone(), lo, Sense::Ge, Some(r));
            }
            if hi.is_finite() {
                push_row(row, hi, Sense::Le, Some(r));
            }
        }
    }
    for j in 0..n {
        let (lb, ub) = (p.col_lb[j], p.col_ub[j]);
        if lb.is_finite() && ub.is_finite() {
            let mut row = vec![0.0; n_struct_cols];
            row[col_of_var[j]] = 1.0;
            push_row(row, ub - lb, Sense::Le, None);
        }
    }

    // Dense tableau with slack / surplus / artificial columns.
    let m = erows.len();
    let mut a: Vec<Vec<f64>> = erows.iter().map(|e| e.coeffs.clone()).collect();
    let mut b: Vec<f64> = erows.iter().map(|e| e.rhs).collect();
    for (i, e) in erows.iter().enumerate() {
        let sign = match e.sense {
            Sense::Le => 1.0,
            Sense::Ge => -1.0,
            Sense::Eq => continue,
        };
        for (r, row) in a.iter_mut().enumerate() {
            row.push(if r == i { sign } else { 0.0 });
        }
        cols.push(ColMap::Slack { erow: i, sign });
        cost.push(0.0);
    }
    let mut basis = vec![usize::MAX; m];
    for (i, e) in erows.iter().enumerate() {
        if matches!(e.sense, Sense::Le) {
            basis[i] = cols
                .iter()
                .position(|c| matches!(c, ColMap::Slack { erow, sign } if *erow == i && *sign > 0.0))
                .unwrap();
        } else {
            for (r, row) in a.iter_mut().enumerate() {
                row.push(if r == i { 1.0 } else { 0.0 });
            }
            cols.push(ColMap::Artificial { erow: i });
            cost.push(0.0);
            basis[i] = cols.len() - 1;
        }
    }
    let ncols = cols.len();

    // Phase 1: minimize the artificial sum.
    let phase1_cost: Vec<f64> = cols
        .iter()
        .map(|c| if matches!(c, ColMap::Artificial { .. }) { 1.0 } else { 0.0 })
        .collect();
    if !run_simplex(&mut a, &mut b, &mut basis, &phase1_cost, ncols) {
        return fail(TabStatus::Infeasible, n, p.num_rows());
    }
    let p1: f64 = basis.iter().enumerate().map(|(i, &bv)| phase1_cost[bv] * b[i]).sum();
    if p1 > 1e-7 {
        return fail(TabStatus::Infeasible, n, p.num_rows());
    }
    // Keep basic zero-level artificials but bar the rest from re-entering.
    for k in 0..ncols {
        if matches!(cols[k], ColMap::Artificial { .. }) && !basis.contains(&k) {
            for row in a.iter_mut() {
                row[k] = 0.0;
            }
        }
    }

    if !run_simplex(&mut a, &mut b, &mut basis, &cost, ncols) {
        return fail(TabStatus::Unbounded, n, p.num_rows());
    }

    // Recover x.
    let mut u = vec![0.0; ncols];
    for (i, &bv) in basis.iter().enumerate() {
        u[bv] = b[i];
    }
    let mut x = vec![0.0; n];
    for (k, cmap) in cols.iter().enumerate() {
        match cmap {
            ColMap::Shifted { var, shift, neg } => {
                x[*var] = if *neg { shift - u[k] } else { shift + u[k] }
            }
            ColMap::FreePlus { var } => x[*var] += u[k],
            ColMap::FreeMinus { var } => x[*var] -= u[k],
            _ => {}
        }
    }
    let obj = p.obj_offset + (0..n).map(|j| p.cost[j] * x[j]).sum::<f64>();

    // Duals: solve B^T y = c_B over the ORIGINAL standard-form columns,
    // then fold the emitted-row duals back onto the ranged rows (a flipped
    // row flips the sensitivity sign).
    let col_entry = |k: usize, i: usize| -> f64 {
        match cols[k] {
            ColMap::Slack { erow, sign } => {
                if erow == i {
                    sign
                } else {
                    0.0
                }
            }
            ColMap::Artificial { erow } => {
                if erow == i {
                    1.0
                } else {
                    0.0
                }
            }
            _ => erows[i].coeffs[k],
        }
    };
    let mut duals = vec![0.0; p.num_rows()];
    let mut bt = vec![0.0; m * m];
    let mut rhs = vec![0.0; m];
    for (pos, &bv) in basis.iter().enumerate() {
        for i in 0..m {
            bt[pos * m + i] = col_entry(bv, i);
        }
        rhs[pos] = cost[bv];
    }
    if let Some(y) = gauss_solve(&mut bt, &mut rhs, m) {
        for (i, e) in erows.iter().enumerate() {
            if let Some(r) = e.orig {
                duals[r] += y[i] * e.sign;
            }
        }
    }

    TabSolution { status: TabStatus::Optimal, obj, x, duals }
}

fn gauss_solve(mat: &mut [f64], rhs: &mut [f64], k: usize) -> Option<Vec<f64>> {
    for col in 0..k {
        let mut piv = col;
        for r in col + 1..k {
            if mat[r * k + col].abs() > mat[piv * k + col].abs() {
                piv = r;
            }
        }
        if mat[piv * k + col].abs() < 1e-11 {
            return None;
        }
        if piv != col {
            for c in 0..k {
                mat.swap(col * k + c, piv * k + c);
            }
            rhs.swap(col, piv);
        }
        let d = mat[col * k + col];
        for r in 0..k {
            if r != col {
                let f = mat[r * k + col] / d;
                if f != 0.0 {
                    for c in col..k {
                        mat[r * k + c] -= f * mat[col * k + c];
                    }
                    rhs[r] -= f * rhs[col];
                }
            }
        }
    }
    Some((0..k).map(|i| rhs[i] / mat[i * k + i]).collect())
}

/// Standard dense simplex iterations; returns false on unboundedness.
fn run_simplex(
    a: &mut [Vec<f64>],
    b: &mut [f64],
    basis: &mut [usize],
    cost: &[f64],
    ncols: usize,
) -> bool {
    let m = a.len();
    for _round in 0..200_000 {
        let mut entering = usize::MAX;
        let mut best = -1e-9;
        for k in 0..ncols {
            if basis.contains(&k) {
                continue;
            }
            let mut d = cost[k];
            for i in 0..m {
                d -= cost[basis[i]] * a[i][k];
            }
            if d < best {
                best = d;
                entering = k;
            }
        }
        if entering == usize::MAX {
            return true;
        }
        let mut leave = usize::MAX;
        let mut t = INF;
        for i in 0..m {
            if a[i][entering] > 1e-10 {
                let r = b[i] / a[i][entering];
                if r < t - 1e-12
                    || (r < t + 1e-12 && leave != usize::MAX && a[i][entering] > a[leave][entering])
                {
                    t = r;
                    leave = i;
                }
            }
        }
        if leave == usize::MAX {
            return false;
        }
        let piv = a[leave][entering];
        for k in 0..ncols {
            a[leave][k] /= piv;
        }
        b[leave] /= piv;
        for i in 0..m {
            if i != leave {
                let f = a[i][entering];
                if f != 0.0 {
                    for k in 0..ncols {
                        a[i][k] -= f * a[leave][k];
                    }
                    b[i] -= f * b[leave];
                }
            }
        }
        basis[leave] = entering;
    }
    true
}

fn fail(status: TabStatus, n: usize, m: usize) -> TabSolution {
    TabSolution {
        status,
        obj: f64::NAN,
        x: vec![0.0; n],
        duals: vec![0.0; m],
    }
}

/// Naive branch-and-bound over the dense LP; test-grade.
pub fn solve_milp_dense(p: &LinProblem) -> TabSolution {
    fn rec(p: &mut LinProblem, incumbent: &mut Option<(f64, Vec<f64>)>) {
        let sol = solve_lp_dense(p);
        if sol.status != TabStatus::Optimal {
            return;
        }
        if let Some((inc, _)) = incumbent {
            if sol.obj >= *inc - 1e-9 {
                return;
            }
        }
        let frac = (0..p.num_cols())
            .filter(|&j| p.integral[j])
            .map(|j| (j, (sol.x[j] - sol.x[j].round()).abs()))
            .filter(|&(_, f)| f > 1e-6)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match frac {
            None => {
                if incumbent.as_ref().is_none_or(|(inc, _)| sol.obj < *inc) {
                    *incumbent = Some((sol.obj, sol.x.clone()));
                }
            }
            Some((j, _)) => {
                let (lo, hi) = (p.col_lb[j], p.col_ub[j]);
                let v = sol.x[j];
                p.col_ub[j] = v.floor();
                rec(p, incumbent);
                p.col_ub[j] = hi;
                p.col_lb[j] = v.ceil();
                rec(p, incumbent);
                p.col_lb[j] = lo;
            }
        }
    }
    let mut work = p.clone();
    let mut incumbent = None;
    rec(&mut work, &mut incumbent);
    match incumbent {
        Some((obj, x)) => TabSolution {
            status: TabStatus::Optimal,
            obj,
            x,
            duals: vec![0.0; p.num_rows()],
        },
        None => fail(TabStatus::Infeasible, p.num_cols(), p.num_rows()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_hand_lp() {
        // min -x - 2y s.t. x + y <= 4, 0<=x<=3, 0<=y<=2 -> obj -6.
        let p = LinProblem {
            cost: vec![-1.0, -2.0],
            col_lb: vec![0.0, 0.0],
            col_ub: vec![3.0, 2.0],
            integral: vec![false, false],
            rows: vec![vec![(0, 1.0), (1, 1.0)]],
            row_lb: vec![-INF],
            row_ub: vec![4.0],
            obj_offset: 0.0,
        };
        let sol = solve_lp_dense(&p);
        assert_eq!(sol.status, TabStatus::Optimal);
        assert!((sol.obj + 6.0).abs() < 1e-8);
    }

    #[test]
    fn ge_row_dual() {
        let p = LinProblem {
            cost: vec![1.0],
            col_lb: vec![-INF],
            col_ub: vec![INF],
            integral: vec![false],
            rows: vec![vec![(0, 1.0)]],
            row_lb: vec![3.0],
            row_ub: vec![INF],
            obj_offset: 0.0,
        };
        let sol = solve_lp_dense(&p);
        assert_eq!(sol.status, TabStatus::Optimal);
        assert!((sol.obj - 3.0).abs() < 1e-9);
        assert!((sol.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn eq_row_dual() {
        // min x + 2y s.t. x + y = 2, x,y >= 0 -> x=2, dual 1.
        let p = LinProblem {
            cost: vec![1.0, 2.0],
            col_lb: vec![0.0, 0.0],
            col_ub: vec![INF, INF],
            integral: vec![false, false],
            rows: vec![vec![(0, 1.0), (1, 1.0)]],
            row_lb: vec![2.0],
            row_ub: vec![2.0],
            obj_offset: 0.0,
        };
        let sol = solve_lp_dense(&p);
        assert_eq!(sol.status, TabStatus::Optimal);
        assert!((sol.obj - 2.0).abs() < 1e-9);
        assert!((sol.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let p = LinProblem {
            cost: vec![0.0],
            col_lb: vec![0.0],
            col_ub: vec![1.0],
            integral: vec![false],
            rows: vec![vec![(0, 1.0)]],
            row_lb: vec![2.0],
            row_ub: vec![INF],
            obj_offset: 0.0,
        };
        assert_eq!(solve_lp_dense(&p).status, TabStatus::Infeasible);
    }

    #[test]
    fn small_milp() {
        let p = LinProblem {
            cost: vec![-5.0, -4.0, -3.0],
            col_lb: vec![0.0; 3],
            col_ub: vec![1.0; 3],
            integral: vec![true; 3],
            rows: vec![vec![(0, 2.0), (1, 3.0), (2, 1.0)]],
            row_lb: vec![-INF],
            row_ub: vec![4.0],
            obj_offset: 0.0,
        };
        let sol = solve_milp_dense(&p);
        assert_eq!(sol.status, TabStatus::Optimal);
        assert!((sol.obj + 8.0).abs() < 1e-8);
    }
}
