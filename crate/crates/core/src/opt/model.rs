//! Backend-neutral optimization model: continuous/binary variables, linear
//! (ranged) constraints, second-order cones and separable quadratic costs.
//!
//! Cones are not handed to the backend; [`crate::opt::solve_conic_milp`]
//! enforces them with an outer-approximation cut loop on top of any LP/MILP
//! backend.

use std::fmt;

pub const INF: f64 = f64::INFINITY;

/// Handle to a model variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(&self) -> usize {
        self.0
    }
}

/// Handle to a linear row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowId(pub(crate) usize);

/// Affine expression `sum coef * var + constant`.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(v: VarId) -> Self {
        LinExpr {
            terms: vec![(v, 1.0)],
            constant: 0.0,
        }
    }

    pub fn constant(c: f64) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn scaled(v: VarId, c: f64) -> Self {
        LinExpr {
            terms: vec![(v, c)],
            constant: 0.0,
        }
    }

    pub fn add(mut self, v: VarId, c: f64) -> Self {
        self.terms.push((v, c));
        self
    }

    pub fn plus(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(v, c)| c * x[v.0]).sum::<f64>()
    }

    /// Merges duplicate terms; used when emitting rows.
    pub(crate) fn compacted(&self) -> Vec<(usize, f64)> {
        let mut terms: Vec<(usize, f64)> = self.terms.iter().map(|(v, c)| (v.0, *c)).collect();
        terms.sort_by_key(|t| t.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (i, c) in terms {
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        out
    }
}

/// Second-order cone constraint over affine expressions.
#[derive(Debug, Clone)]
pub enum Cone {
    /// `|| (e_1, ..., e_k) ||_2 <= bound`
    Norm { members: Vec<LinExpr>, bound: LinExpr },
    /// `sum e_i^2 <= y1 * y2`, with `y1, y2 >= 0`
    Rotated {
        members: Vec<LinExpr>,
        y1: LinExpr,
        y2: LinExpr,
    },
}

#[derive(Debug, Clone)]
struct VarDef {
    name: String,
    lb: f64,
    ub: f64,
    integral: bool,
    obj: f64,
}

#[derive(Debug, Clone)]
struct Row {
    name: String,
    terms: Vec<(usize, f64)>,
    lb: f64,
    ub: f64,
}

/// Sense of a linear constraint when added through the convenience API.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// Mutable model under construction.
#[derive(Debug, Clone, Default)]
pub struct Model {
    vars: Vec<VarDef>,
    rows: Vec<Row>,
    cones: Vec<Cone>,
    /// Separable quadratic objective terms `c2 * x^2` with `c2 >= 0`.
    quad: Vec<(VarId, f64)>,
    pub obj_offset: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("variable \"{0}\" needs finite bounds for a McCormick envelope")]
    UnboundedFactor(String),
    #[error("quadratic cost coefficient for \"{0}\" must be nonnegative")]
    NegativeQuadCost(String),
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cones(&self) -> usize {
        self.cones.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lb: f64, ub: f64, obj: f64) -> VarId {
        self.vars.push(VarDef {
            name: name.into(),
            lb,
            ub,
            integral: false,
            obj,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, obj: f64) -> VarId {
        self.vars.push(VarDef {
            name: name.into(),
            lb: 0.0,
            ub: 1.0,
            integral: true,
            obj,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0].name
    }

    pub fn bounds(&self, v: VarId) -> (f64, f64) {
        (self.vars[v.0].lb, self.vars[v.0].ub)
    }

    pub fn set_bounds(&mut self, v: VarId, lb: f64, ub: f64) {
        self.vars[v.0].lb = lb;
        self.vars[v.0].ub = ub;
    }

    pub fn is_integral(&self, v: VarId) -> bool {
        self.vars[v.0].integral
    }

    pub fn set_obj_coef(&mut self, v: VarId, c: f64) {
        self.vars[v.0].obj = c;
    }

    pub fn add_obj_coef(&mut self, v: VarId, c: f64) {
        self.vars[v.0].obj += c;
    }

    pub fn obj_coef(&self, v: VarId) -> f64 {
        self.vars[v.0].obj
    }

    /// Registers a `c2 * x^2` objective term, realized later through an
    /// epigraph rotated cone.
    pub fn add_quad_cost(&mut self, v: VarId, c2: f64) -> Result<(), ModelError> {
        if c2 < 0.0 {
            return Err(ModelError::NegativeQuadCost(self.vars[v.0].name.clone()));
        }
        if c2 > 0.0 {
            self.quad.push((v, c2));
        }
        Ok(())
    }

    pub fn quad_terms(&self) -> &[(VarId, f64)] {
        &self.quad
    }

    /// Adds `lb <= expr <= ub` (the expression constant is folded into the
    /// bounds).
    pub fn add_range(&mut self, name: impl Into<String>, expr: LinExpr, lb: f64, ub: f64) -> RowId {
        let terms = expr.compacted();
        self.rows.push(Row {
            name: name.into(),
            terms,
            lb: lb - expr.constant,
            ub: ub - expr.constant,
        });
        RowId(self.rows.len() - 1)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        expr: LinExpr,
        sense: Sense,
        rhs: f64,
    ) -> RowId {
        let (lb, ub) = match sense {
            Sense::Le => (-INF, rhs),
            Sense::Ge => (rhs, INF),
            Sense::Eq => (rhs, rhs),
        };
        self.add_range(name, expr, lb, ub)
    }

    pub fn add_cone(&mut self, cone: Cone) {
        self.cones.push(cone);
    }

    pub fn cones(&self) -> &[Cone] {
        &self.cones
    }

    pub fn row_name(&self, r: RowId) -> &str {
        &self.rows[r.0].name
    }

    /// Read-only view of the linear rows as `(terms, lb, ub)`.
    pub fn rows_view(&self) -> impl Iterator<Item = (&[(usize, f64)], f64, f64)> {
        self.rows.iter().map(|r| (r.terms.as_slice(), r.lb, r.ub))
    }

    /// Lowers the model to the plain LP/MILP data a backend consumes.
    /// Cones and quadratic terms are NOT materialized here; see
    /// [`crate::opt::solve_conic_milp`].
    pub fn to_lin_problem(&self) -> LinProblem {
        LinProblem {
            cost: self.vars.iter().map(|v| v.obj).collect(),
            col_lb: self.vars.iter().map(|v| v.lb).collect(),
            col_ub: self.vars.iter().map(|v| v.ub).collect(),
            integral: self.vars.iter().map(|v| v.integral).collect(),
            rows: self.rows.iter().map(|r| r.terms.clone()).collect(),
            row_lb: self.rows.iter().map(|r| r.lb).collect(),
            row_ub: self.rows.iter().map(|r| r.ub).collect(),
            obj_offset: self.obj_offset,
        }
    }

    pub fn has_binaries(&self) -> bool {
        self.vars.iter().any(|v| v.integral)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "model: {} vars ({} binary), {} rows, {} cones, {} quad terms",
            self.vars.len(),
            self.vars.iter().filter(|v| v.integral).count(),
            self.rows.len(),
            self.cones.len(),
            self.quad.len()
        )
    }
}

/// Plain LP/MILP in ranged-row form; the lingua franca of the backend
/// contract.
#[derive(Debug, Clone, Default)]
pub struct LinProblem {
    pub cost: Vec<f64>,
    pub col_lb: Vec<f64>,
    pub col_ub: Vec<f64>,
    pub integral: Vec<bool>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub row_lb: Vec<f64>,
    pub row_ub: Vec<f64>,
    pub obj_offset: f64,
}

impl LinProblem {
    pub fn num_cols(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn push_row(&mut self, terms: Vec<(usize, f64)>, lb: f64, ub: f64) {
        self.rows.push(terms);
        self.row_lb.push(lb);
        self.row_ub.push(ub);
    }

    pub fn has_integrals(&self) -> bool {
        self.integral.iter().any(|&b| b)
    }
}
