//! Planning toolkit for mitigating geomagnetic-disturbance (GMD) damage on
//! electric grids.
//!
//! A geomagnetic storm drives a quasi-DC geo-electric field `(xi_E, xi_N)`
//! across the grid footprint, inducing currents (GICs) in transmission lines
//! and transformer windings. Saturated transformers then draw extra reactive
//! power, which the operator must either budget for or pay for. This crate
//! models that problem as a two-stage distributionally robust program:
//!
//! * the first stage picks mitigation actions (line/transformer/generator
//!   switching, re-dispatch, load shedding, reactive-loss budgets) on a
//!   mixed-integer second-order-cone relaxation of AC power flow;
//! * the second stage prices, for a realized field, the reactive losses
//!   that exceed the budgeted allowance;
//! * the uncertainty is a mean-support ambiguity set over a half-circle
//!   (or polyhedral) support of the field vector.
//!
//! Three interchangeable solution paths are provided and are expected to
//! agree: column-and-constraint generation over polytope vertices
//! ([`dro::ccg_solve`]), an exact three-scenario monolithic program for
//! triangle supports ([`dro::monolithic_solve`]), and a single-scenario
//! deterministic mode ([`dro::deterministic_solve`]). A standalone nodal
//! GIC solver ([`gic::solve_gic`]) acts as the physics oracle against which
//! the optimization layer is checked.

pub mod ambiguity;
pub mod cases;
pub mod dro;
pub mod geo;
pub mod gic;
pub mod grid;
pub mod stage;
pub mod opt;

pub use grid::{GridCase, load_instance, serialize_instance};
pub use gic::{FieldScenario, Topology};
