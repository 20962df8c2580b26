//! Bounded-variable revised simplex with an explicit dense basis inverse.
//!
//! Rows are kept as equalities `a_r x - s_r = 0` with the logical `s_r`
//! carrying the row range, so the basis always has one column per row.
//! The primal method (with a composite phase 1 that drives out-of-bound
//! basics back into range) solves from scratch; the dual method warm-starts
//! after bound changes and row appends, which is what branch-and-bound and
//! the cutting loop lean on.
//!
//! Sized for the problems this crate builds (a few thousand columns): all
//! dense kernels are O(m^2) per pivot with periodic refactorization.

use super::model::{LinProblem, INF};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VStat {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free variable parked at zero.
    FreeZero,
}

const PIVOT_TOL: f64 = 1e-10;
const MAX_ITERS: u64 = 200_000;
const REFACTOR_EVERY: u64 = 400;
/// Consecutive degenerate pivots before switching to Bland's rule.
const BLAND_AFTER: u64 = 400;

fn feas_tol(bound: f64) -> f64 {
    1e-9 * (1.0 + bound.abs())
}

fn dual_tol(cost: f64) -> f64 {
    1e-9 * (1.0 + cost.abs())
}

pub struct Simplex {
    n: usize,
    m: usize,
    /// Structural columns, sparse.
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    obj_offset: f64,

    vstat: Vec<VStat>,
    basis: Vec<usize>,
    binv: Vec<f64>,
    x: Vec<f64>,

    pivots_since_refactor: u64,
    degenerate_streak: u64,
    // scratch
    alpha: Vec<f64>,
    work: Vec<f64>,
}

impl Simplex {
    pub fn new(p: &LinProblem) -> Simplex {
        let n = p.num_cols();
        let m = p.num_rows();
        let mut cols = vec![Vec::new(); n];
        for (r, row) in p.rows.iter().enumerate() {
            for &(j, c) in row {
                if c != 0.0 {
                    cols[j].push((r, c));
                }
            }
        }
        let mut cost = p.cost.clone();
        cost.extend(std::iter::repeat(0.0).take(m));
        let mut lb = p.col_lb.clone();
        let mut ub = p.col_ub.clone();
        lb.extend_from_slice(&p.row_lb);
        ub.extend_from_slice(&p.row_ub);

        let mut sx = Simplex {
            n,
            m,
            cols,
            cost,
            lb,
            ub,
            obj_offset: p.obj_offset,
            vstat: Vec::new(),
            basis: Vec::new(),
            binv: Vec::new(),
            x: Vec::new(),
            pivots_since_refactor: 0,
            degenerate_streak: 0,
            alpha: vec![0.0; m],
            work: vec![0.0; m],
        };
        sx.reset_to_slack_basis();
        sx
    }

    pub fn num_structurals(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn col_bounds(&self, j: usize) -> (f64, f64) {
        (self.lb[j], self.ub[j])
    }

    pub fn set_col_bounds(&mut self, j: usize, lb: f64, ub: f64) {
        self.lb[j] = lb;
        self.ub[j] = ub;
        // Re-pin a nonbasic variable to a consistent bound.
        match self.vstat[j] {
            VStat::AtLower => {
                if lb.is_finite() {
                    self.x[j] = lb;
                } else {
                    self.vstat[j] = if ub.is_finite() { VStat::AtUpper } else { VStat::FreeZero };
                    self.x[j] = if ub.is_finite() { ub } else { 0.0 };
                }
            }
            VStat::AtUpper => {
                if ub.is_finite() {
                    self.x[j] = ub;
                } else {
                    self.vstat[j] = if lb.is_finite() { VStat::AtLower } else { VStat::FreeZero };
                    self.x[j] = if lb.is_finite() { lb } else { 0.0 };
                }
            }
            _ => {}
        }
    }

    /// Appends a ranged row; its logical enters the basis.
    pub fn add_row(&mut self, terms: &[(usize, f64)], lb: f64, ub: f64) {
        let r_new = self.m;
        // C * B^-1 where C holds the new row's coefficients on basic vars.
        let mut w = vec![0.0; self.m];
        for &(j, c) in terms {
            debug_assert!(j < self.n);
            self.cols[j].push((r_new, c));
            if let VStat::Basic(pos) = self.vstat[j] {
                for k in 0..self.m {
                    w[k] += c * self.binv[pos * self.m + k];
                }
            }
        }
        // Grow binv to (m+1)^2: [[B^-1, 0], [C B^-1, -1]].
        let m_old = self.m;
        let m_new = m_old + 1;
        let mut binv = vec![0.0; m_new * m_new];
        for i in 0..m_old {
            binv[i * m_new..i * m_new + m_old]
                .copy_from_slice(&self.binv[i * m_old..(i + 1) * m_old]);
        }
        binv[m_old * m_new..m_old * m_new + m_old].copy_from_slice(&w);
        binv[m_old * m_new + m_old] = -1.0;
        self.binv = binv;

        let logical = self.n + r_new;
        // Logical indices sit after structurals; the new one lands at the end.
        self.cost.insert(logical, 0.0);
        self.lb.insert(logical, lb);
        self.ub.insert(logical, ub);
        let activity: f64 = terms.iter().map(|&(j, c)| c * self.x[j]).sum();
        self.x.insert(logical, activity);
        self.vstat.insert(logical, VStat::Basic(m_old));
        self.basis.push(logical);
        self.m = m_new;
        self.alpha = vec![0.0; m_new];
        self.work = vec![0.0; m_new];
    }

    pub fn objective(&self) -> f64 {
        self.obj_offset
            + (0..self.n + self.m)
                .map(|j| self.cost[j] * self.x[j])
                .sum::<f64>()
    }

    /// Structural part of the current point.
    pub fn primal(&self) -> &[f64] {
        &self.x[..self.n]
    }

    /// Row duals `y = c_B B^-1`; the sensitivity of the optimum to the
    /// active row bound.
    pub fn duals(&self) -> Vec<f64> {
        self.btran_cost()
    }

    fn reset_to_slack_basis(&mut self) {
        let total = self.n + self.m;
        self.vstat = (0..total)
            .map(|j| {
                if j >= self.n {
                    VStat::Basic(j - self.n)
                } else if self.lb[j].is_finite() {
                    VStat::AtLower
                } else if self.ub[j].is_finite() {
                    VStat::AtUpper
                } else {
                    VStat::FreeZero
                }
            })
            .collect();
        self.basis = (self.n..total).collect();
        self.binv = vec![0.0; self.m * self.m];
        for i in 0..self.m {
            self.binv[i * self.m + i] = -1.0;
        }
        self.x = vec![0.0; total];
        for j in 0..self.n {
            self.x[j] = match self.vstat[j] {
                VStat::AtLower => self.lb[j],
                VStat::AtUpper => self.ub[j],
                _ => 0.0,
            };
        }
        self.recompute_basics();
        self.pivots_since_refactor = 0;
    }

    /// Recomputes basic values from the nonbasic point: x_B = B^-1 (-N x_N).
    fn recompute_basics(&mut self) {
        let m = self.m;
        let mut rhs = vec![0.0; m];
        for j in 0..self.n + m {
            if matches!(self.vstat[j], VStat::Basic(_)) {
                continue;
            }
            let xj = match self.vstat[j] {
                VStat::AtLower => self.lb[j],
                VStat::AtUpper => self.ub[j],
                _ => 0.0,
            };
            self.x[j] = xj;
            if xj != 0.0 {
                self.for_col(j, |r, c| rhs[r] -= c * xj);
            }
        }
        for pos in 0..m {
            let mut v = 0.0;
            for k in 0..m {
                v += self.binv[pos * m + k] * rhs[k];
            }
            self.x[self.basis[pos]] = v;
        }
    }

    fn for_col(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for &(r, c) in &self.cols[j] {
                f(r, c);
            }
        } else {
            f(j - self.n, -1.0);
        }
    }

    /// alpha = B^-1 A_j, into self.alpha.
    fn ftran(&mut self, j: usize) {
        let m = self.m;
        self.alpha[..m].iter_mut().for_each(|v| *v = 0.0);
        if j < self.n {
            for &(r, c) in &self.cols[j] {
                for i in 0..m {
                    self.alpha[i] += self.binv[i * m + r] * c;
                }
            }
        } else {
            let r = j - self.n;
            for i in 0..m {
                self.alpha[i] = -self.binv[i * m + r];
            }
        }
    }

    /// y = c_B B^-1 with the current (phase-2) cost vector.
    fn btran_cost(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for pos in 0..m {
            let cb = self.cost[self.basis[pos]];
            if cb != 0.0 {
                for k in 0..m {
                    y[k] += cb * self.binv[pos * m + k];
                }
            }
        }
        y
    }

    /// y for an arbitrary per-position cost vector.
    fn btran_with(&self, cb: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for pos in 0..m {
            if cb[pos] != 0.0 {
                for k in 0..m {
                    y[k] += cb[pos] * self.binv[pos * m + k];
                }
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = self.cost[j];
        self.for_col(j, |r, c| d -= y[r] * c);
        d
    }

    fn reduced_cost_zero_cost(&self, j: usize, y: &[f64]) -> f64 {
        let mut d = 0.0;
        self.for_col(j, |r, c| d -= y[r] * c);
        d
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        if x < self.lb[j] - feas_tol(self.lb[j]) {
            self.lb[j] - x
        } else if x > self.ub[j] + feas_tol(self.ub[j]) {
            x - self.ub[j]
        } else {
            0.0
        }
    }

    fn total_infeasibility(&self) -> f64 {
        self.basis.iter().map(|&b| self.infeasibility(b)).sum()
    }

    fn is_fixed(&self, j: usize) -> bool {
        self.ub[j] - self.lb[j] <= 0.0
    }

    /// Rebuilds the dense inverse from the basis columns. Returns false on
    /// a numerically singular basis.
    fn refactorize(&mut self) -> bool {
        let m = self.m;
        // Assemble B and invert via Gauss-Jordan with partial pivoting,
        // carrying the identity alongside.
        let mut b = vec![0.0; m * m];
        for (pos, &j) in self.basis.iter().enumerate() {
            self.for_col(j, |r, c| b[r * m + pos] = c);
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let mut piv_row = col;
            let mut piv_val = b[col * m + col].abs();
            for r in col + 1..m {
                let v = b[r * m + col].abs();
                if v > piv_val {
                    piv_val = v;
                    piv_row = r;
                }
            }
            if piv_val < 1e-12 {
                return false;
            }
            if piv_row != col {
                for k in 0..m {
                    b.swap(col * m + k, piv_row * m + k);
                    inv.swap(col * m + k, piv_row * m + k);
                }
            }
            let d = b[col * m + col];
            for k in 0..m {
                b[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for r in 0..m {
                if r != col {
                    let f = b[r * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            b[r * m + k] -= f * b[col * m + k];
                            inv[r * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        // binv maps row-space through B^-1: we need basis-position rows.
        // The Gauss-Jordan above reduced [B | I] to [I | B^-1] in the
        // column-of-basis ordering, i.e. inv[pos][r] = (B^-1)[pos][r].
        self.binv = inv;
        self.pivots_since_refactor = 0;
        true
    }

    fn pivot_in(&mut self, entering: usize, pos: usize) {
        let m = self.m;
        let piv = self.alpha[pos];
        debug_assert!(piv.abs() > PIVOT_TOL * 1e-2);
        for i in 0..m {
            if i != pos {
                let f = self.alpha[i] / piv;
                if f != 0.0 {
                    for k in 0..m {
                        self.binv[i * m + k] -= f * self.binv[pos * m + k];
                    }
                }
            }
        }
        for k in 0..m {
            self.binv[pos * m + k] /= piv;
        }
        self.basis[pos] = entering;
        self.vstat[entering] = VStat::Basic(pos);
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            if !self.refactorize() {
                // Fall back to a clean start on numerical failure.
                self.reset_to_slack_basis();
            }
            self.recompute_basics();
        }
    }

    // ---------------- primal simplex ----------------

    /// Full solve from the current basis: phase 1 if needed, then phase 2.
    pub fn primal_solve(&mut self) -> SolveOutcome {
        self.degenerate_streak = 0;
        if self.total_infeasibility() > 1e-7 {
            match self.phase1() {
                SolveOutcome::Optimal => {}
                other => return other,
            }
        }
        self.phase2()
    }

    /// Solve from a fresh slack basis.
    pub fn solve_from_scratch(&mut self) -> SolveOutcome {
        self.reset_to_slack_basis();
        self.primal_solve()
    }

    fn phase1(&mut self) -> SolveOutcome {
        let mut iters: u64 = 0;
        loop {
            iters += 1;
            if iters > MAX_ITERS {
                return SolveOutcome::IterLimit;
            }
            let infeas = self.total_infeasibility();
            if infeas <= 1e-8 {
                return SolveOutcome::Optimal;
            }
            // Phase-1 gradient on basics only.
            let mut cb = vec![0.0; self.m];
            for (pos, &b) in self.basis.iter().enumerate() {
                let x = self.x[b];
                if x < self.lb[b] - feas_tol(self.lb[b]) {
                    cb[pos] = -1.0;
                } else if x > self.ub[b] + feas_tol(self.ub[b]) {
                    cb[pos] = 1.0;
                }
            }
            let y = self.btran_with(&cb);

            let bland = self.degenerate_streak >= BLAND_AFTER;
            let mut best: Option<(usize, f64, i8)> = None; // (var, |d|, dir)
            for j in 0..self.n + self.m {
                if matches!(self.vstat[j], VStat::Basic(_)) || self.is_fixed(j) {
                    continue;
                }
                let d = self.reduced_cost_zero_cost(j, &y);
                let tol = 1e-9;
                let cand: Option<i8> = match self.vstat[j] {
                    VStat::AtLower if d < -tol => Some(1),
                    VStat::AtUpper if d > tol => Some(-1),
                    VStat::FreeZero if d.abs() > tol => Some(if d < 0.0 { 1 } else { -1 }),
                    _ => None,
                };
                if let Some(dir) = cand {
                    if bland {
                        best = Some((j, d.abs(), dir));
                        break;
                    }
                    if best.as_ref().is_none_or(|(_, s, _)| d.abs() > *s) {
                        best = Some((j, d.abs(), dir));
                    }
                }
            }
            let Some((entering, _, dir)) = best else {
                // No improving direction while infeasible.
                return SolveOutcome::Infeasible;
            };

            self.ftran(entering);
            match self.phase1_ratio_and_step(entering, dir as f64) {
                Ok(()) => {}
                Err(out) => return out,
            }
        }
    }

    /// Phase-1 ratio test: feasible basics block at their bounds, infeasible
    /// basics block at the bound they violate (restoring feasibility there).
    fn phase1_ratio_and_step(&mut self, entering: usize, dir: f64) -> Result<(), SolveOutcome> {
        let mut t_max = if self.lb[entering].is_finite() && self.ub[entering].is_finite() {
            self.ub[entering] - self.lb[entering]
        } else {
            INF
        };
        let mut blocker: Option<(usize, bool)> = None; // (pos, leaves_at_upper)
        let mut best_piv = 0.0;
        for pos in 0..self.m {
            let a = self.alpha[pos];
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let b = self.basis[pos];
            let rate = -dir * a; // d x_b / dt
            let xb = self.x[b];
            let (lbb, ubb) = (self.lb[b], self.ub[b]);
            let below = xb < lbb - feas_tol(lbb);
            let above = xb > ubb + feas_tol(ubb);
            let (limit, at_upper): (f64, bool) = if below {
                if rate > 0.0 {
                    ((lbb - xb) / rate, false)
                } else {
                    continue;
                }
            } else if above {
                if rate < 0.0 {
                    ((ubb - xb) / rate, true)
                } else {
                    continue;
                }
            } else if rate > 0.0 {
                if ubb.is_finite() {
                    ((ubb - xb) / rate, true)
                } else {
                    continue;
                }
            } else if lbb.is_finite() {
                ((lbb - xb) / rate, false)
            } else {
                continue;
            };
            let limit = limit.max(0.0);
            if limit < t_max - 1e-12 || (limit <= t_max + 1e-12 && a.abs() > best_piv) {
                t_max = t_max.min(limit);
                blocker = Some((pos, at_upper));
                best_piv = a.abs();
            }
        }

        if !t_max.is_finite() {
            // Phase-1 objective is bounded below by zero, so an unbounded
            // improving ray cannot exist.
            return Err(SolveOutcome::Infeasible);
        }
        self.apply_step(entering, dir, t_max, blocker);
        Ok(())
    }

    fn phase2(&mut self) -> SolveOutcome {
        let mut iters: u64 = 0;
        loop {
            iters += 1;
            if iters > MAX_ITERS {
                return SolveOutcome::IterLimit;
            }
            let y = self.btran_cost();
            let bland = self.degenerate_streak >= BLAND_AFTER;
            let mut best: Option<(usize, f64, i8)> = None;
            for j in 0..self.n + self.m {
                if matches!(self.vstat[j], VStat::Basic(_)) || self.is_fixed(j) {
                    continue;
                }
                let d = self.reduced_cost(j, &y);
                let tol = dual_tol(self.cost[j]);
                let cand: Option<i8> = match self.vstat[j] {
                    VStat::AtLower if d < -tol => Some(1),
                    VStat::AtUpper if d > tol => Some(-1),
                    VStat::FreeZero if d.abs() > tol => Some(if d < 0.0 { 1 } else { -1 }),
                    _ => None,
                };
                if let Some(dir) = cand {
                    if bland {
                        best = Some((j, d.abs(), dir));
                        break;
                    }
                    if best.as_ref().is_none_or(|(_, s, _)| d.abs() > *s) {
                        best = Some((j, d.abs(), dir));
                    }
                }
            }
            let Some((entering, _, dir)) = best else {
                return SolveOutcome::Optimal;
            };
            let dir = dir as f64;

            self.ftran(entering);
            let mut t_max = if self.lb[entering].is_finite() && self.ub[entering].is_finite() {
                self.ub[entering] - self.lb[entering]
            } else {
                INF
            };
            let mut blocker: Option<(usize, bool)> = None;
            let mut best_piv = 0.0;
            for pos in 0..self.m {
                let a = self.alpha[pos];
                if a.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[pos];
                let rate = -dir * a;
                let xb = self.x[b];
                let (limit, at_upper) = if rate > 0.0 {
                    if self.ub[b].is_finite() {
                        (((self.ub[b] - xb) / rate).max(0.0), true)
                    } else {
                        continue;
                    }
                } else if self.lb[b].is_finite() {
                    (((self.lb[b] - xb) / rate).max(0.0), false)
                } else {
                    continue;
                };
                if limit < t_max - 1e-12 || (limit <= t_max + 1e-12 && a.abs() > best_piv) {
                    t_max = t_max.min(limit);
                    blocker = Some((pos, at_upper));
                    best_piv = a.abs();
                }
            }
            if !t_max.is_finite() {
                return SolveOutcome::Unbounded;
            }
            self.apply_step(entering, dir, t_max, blocker);
        }
    }

    /// Moves the entering variable by `dir * t`, updates basic values and
    /// performs the pivot or bound flip.
    fn apply_step(&mut self, entering: usize, dir: f64, t: f64, blocker: Option<(usize, bool)>) {
        if t.abs() <= 1e-12 {
            self.degenerate_streak += 1;
        } else {
            self.degenerate_streak = 0;
        }
        if t != 0.0 {
            for pos in 0..self.m {
                let a = self.alpha[pos];
                if a != 0.0 {
                    let b = self.basis[pos];
                    self.x[b] -= dir * t * a;
                }
            }
            self.x[entering] += dir * t;
        }
        match blocker {
            None => {
                // Bound flip: entering moved across its whole range.
                self.vstat[entering] = match self.vstat[entering] {
                    VStat::AtLower => VStat::AtUpper,
                    VStat::AtUpper => VStat::AtLower,
                    s => s,
                };
                // Snap exactly.
                self.x[entering] = match self.vstat[entering] {
                    VStat::AtLower => self.lb[entering],
                    VStat::AtUpper => self.ub[entering],
                    _ => self.x[entering],
                };
            }
            Some((pos, at_upper)) => {
                let leaving = self.basis[pos];
                self.x[leaving] = if at_upper { self.ub[leaving] } else { self.lb[leaving] };
                self.vstat[leaving] = if at_upper { VStat::AtUpper } else { VStat::AtLower };
                self.pivot_in(entering, pos);
            }
        }
    }

    // ---------------- dual simplex ----------------

    /// Re-optimizes after bound changes / appended rows. Picks the cheapest
    /// correct path: dual simplex when reduced costs are still consistent,
    /// otherwise a primal (re-)solve.
    pub fn reoptimize(&mut self) -> SolveOutcome {
        self.recompute_basics();
        self.degenerate_streak = 0;
        if self.dual_feasible() {
            let out = self.dual_solve();
            if out != SolveOutcome::IterLimit {
                return out;
            }
        }
        self.primal_solve()
    }

    fn dual_feasible(&self) -> bool {
        let y = self.btran_cost();
        for j in 0..self.n + self.m {
            if matches!(self.vstat[j], VStat::Basic(_)) || self.is_fixed(j) {
                continue;
            }
            let d = self.reduced_cost(j, &y);
            let tol = 10.0 * dual_tol(self.cost[j]);
            let ok = match self.vstat[j] {
                VStat::AtLower => d >= -tol,
                VStat::AtUpper => d <= tol,
                VStat::FreeZero => d.abs() <= tol,
                VStat::Basic(_) => true,
            };
            if !ok {
                return false;
            }
        }
        true
    }

    fn dual_solve(&mut self) -> SolveOutcome {
        let mut iters: u64 = 0;
        loop {
            iters += 1;
            if iters > MAX_ITERS {
                return SolveOutcome::IterLimit;
            }
            // Leaving: most infeasible basic.
            let mut leave: Option<(usize, f64, bool)> = None; // (pos, violation, above_ub)
            for pos in 0..self.m {
                let b = self.basis[pos];
                let xb = self.x[b];
                if xb < self.lb[b] - feas_tol(self.lb[b]) {
                    let v = self.lb[b] - xb;
                    if leave.as_ref().is_none_or(|(_, bv, _)| v > *bv) {
                        leave = Some((pos, v, false));
                    }
                } else if xb > self.ub[b] + feas_tol(self.ub[b]) {
                    let v = xb - self.ub[b];
                    if leave.as_ref().is_none_or(|(_, bv, _)| v > *bv) {
                        leave = Some((pos, v, true));
                    }
                }
            }
            let Some((pos, _, above)) = leave else {
                return SolveOutcome::Optimal;
            };

            // Row of B^-1 N.
            let m = self.m;
            let rho_b: Vec<f64> = self.binv[pos * m..(pos + 1) * m].to_vec();
            let y = self.btran_cost();

            // dir = sign the basic must move: above ub -> decrease.
            let dirb = if above { 1.0 } else { -1.0 };
            let bland = self.degenerate_streak >= BLAND_AFTER;
            let mut best: Option<(usize, f64, f64)> = None; // (var, ratio, rho)
            for j in 0..self.n + self.m {
                if matches!(self.vstat[j], VStat::Basic(_)) || self.is_fixed(j) {
                    continue;
                }
                let mut rho = 0.0;
                self.for_col(j, |r, c| rho += rho_b[r] * c);
                let rho_t = dirb * rho;
                let eligible = match self.vstat[j] {
                    // increasing j changes x_b by -rho * t
                    VStat::AtLower => rho_t > PIVOT_TOL,
                    VStat::AtUpper => rho_t < -PIVOT_TOL,
                    VStat::FreeZero => rho_t.abs() > PIVOT_TOL,
                    VStat::Basic(_) => false,
                };
                if !eligible {
                    continue;
                }
                let d = self.reduced_cost(j, &y);
                let ratio = (d / rho_t).abs();
                let better = match &best {
                    None => true,
                    Some((bj, br, brho)) => {
                        if bland {
                            j < *bj
                        } else {
                            ratio < *br - 1e-12 || (ratio < *br + 1e-12 && rho.abs() > brho.abs())
                        }
                    }
                };
                if better {
                    best = Some((j, ratio, rho));
                }
            }
            let Some((entering, _, rho)) = best else {
                // Dual unbounded: the primal is infeasible.
                return SolveOutcome::Infeasible;
            };

            // Step that lands the leaving basic exactly on its bound.
            let b = self.basis[pos];
            let target = if above { self.ub[b] } else { self.lb[b] };
            let t = (self.x[b] - target) / rho;
            if t.abs() <= 1e-12 {
                self.degenerate_streak += 1;
            } else {
                self.degenerate_streak = 0;
            }

            self.ftran(entering);
            for p2 in 0..m {
                let a = self.alpha[p2];
                if a != 0.0 {
                    let bb = self.basis[p2];
                    self.x[bb] -= t * a;
                }
            }
            self.x[entering] += t;
            self.x[b] = target;
            self.vstat[b] = if above { VStat::AtUpper } else { VStat::AtLower };
            self.pivot_in(entering, pos);
        }
    }

    /// Max bound violation across all variables (diagnostics).
    pub fn max_primal_infeasibility(&self) -> f64 {
        (0..self.n + self.m)
            .map(|j| self.infeasibility(j))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(
        cost: Vec<f64>,
        bounds: Vec<(f64, f64)>,
        rows: Vec<(Vec<(usize, f64)>, f64, f64)>,
    ) -> LinProblem {
        let n = cost.len();
        LinProblem {
            cost,
            col_lb: bounds.iter().map(|b| b.0).collect(),
            col_ub: bounds.iter().map(|b| b.1).collect(),
            integral: vec![false; n],
            rows: rows.iter().map(|r| r.0.clone()).collect(),
            row_lb: rows.iter().map(|r| r.1).collect(),
            row_ub: rows.iter().map(|r| r.2).collect(),
            obj_offset: 0.0,
        }
    }

    #[test]
    fn one_dimensional_bound_row() {
        // min x s.t. x >= 3 -> x* = 3, dual 1.
        let p = lp(vec![1.0], vec![(-INF, INF)], vec![(vec![(0, 1.0)], 3.0, INF)]);
        let mut sx = Simplex::new(&p);
        assert_eq!(sx.solve_from_scratch(), SolveOutcome::Optimal);
        assert!((sx.objective() - 3.0).abs() < 1e-9);
        assert!((sx.duals()[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_pair() {
        // x >= 1 and x <= 0.
        let p = lp(
            vec![1.0],
            vec![(-INF, INF)],
            vec![(vec![(0, 1.0)], 1.0, INF), (vec![(0, 1.0)], -INF, 0.0)],
        );
        let mut sx = Simplex::new(&p);
        assert_eq!(sx.solve_from_scratch(), SolveOutcome::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        let p = lp(vec![-1.0], vec![(0.0, INF)], vec![]);
        let mut sx = Simplex::new(&p);
        assert_eq!(sx.solve_from_scratch(), SolveOutcome::Unbounded);
    }

    #[test]
    fn small_dense_lp() {
        // min -x - 2y s.t. x + y <= 4, x <= 3, y <= 2, x,y >= 0 -> (2,2), obj -6.
        let p = lp(
            vec![-1.0, -2.0],
            vec![(0.0, 3.0), (0.0, 2.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], -INF, 4.0)],
        );
        let mut sx = Simplex::new(&p);
        assert_eq!(sx.solve_from_scratch(), SolveOutcome::Optimal);
        assert!((sx.objective() + 6.0).abs() < 1e-9);
        assert!((sx.primal()[0] - 2.0).abs() < 1e-9);
        assert!((sx.primal()[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn equality_rows_and_free_vars() {
        // min x + y s.t. x + y = 2, x - y = 0 -> x = y = 1.
        let p = lp(
            vec![1.0, 1.0],
            vec![(-INF, INF), (-INF, INF)],
            vec![
                (vec![(0, 1.0), (1, 1.0)], 2.0, 2.0),
                (vec![(0, 1.0), (1, -1.0)], 0.0, 0.0),
            ],
        );
        let mut sx = Simplex::new(&p);
        assert_eq!(sx.solve_from_scratch(), SolveOutcome::Optimal);
        assert!((sx.primal()[0] - 1.0).abs() < 1e-9);
        assert!((sx.primal()[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dual_reoptimize_after_bound_change() {
        // Start at the small_dense_lp optimum, then force x <= 1.
        let p = lp(
            vec![-1.0, -2.0],
            vec![(0.0, 3.0), (0.0, 2.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], -INF, 4.0)],
        );
        let mut sx = Simplex::new(&p);
        sx.solve_from_scratch();
        sx.set_col_bounds(0, 0.0, 1.0);
        assert_eq!(sx.reoptimize(), SolveOutcome::Optimal);
        assert!((sx.objective() + 5.0).abs() < 1e-9); // (1,2) -> -5
    }

    #[test]
    fn dual_reoptimize_after_cut_row() {
        let p = lp(
            vec![-1.0, -2.0],
            vec![(0.0, 3.0), (0.0, 2.0)],
            vec![(vec![(0, 1.0), (1, 1.0)], -INF, 4.0)],
        );
        let mut sx = Simplex::new(&p);
        sx.solve_from_scratch();
        // Cut off (2,2): x + 2y <= 4.
        sx.add_row(&[(0, 1.0), (1, 2.0)], -INF, 4.0);
        assert_eq!(sx.reoptimize(), SolveOutcome::Optimal);
        // New optimum: maximize x + 2y under x+y<=4, x+2y<=4 -> obj -4.
        assert!((sx.objective() + 4.0).abs() < 1e-8, "obj {}", sx.objective());
    }
}
