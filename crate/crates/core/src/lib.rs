//! Solvers for the Thomas–Fermi equation `y'' = x^(-1/2) y^(3/2)` and the
//! wider Emden–Fowler family `y'' = x^(1-p) y^p`, built around their scaling
//! (homology) symmetry.
//!
//! - [`odes`]: direct integration from a series start at the origin, and
//!   bisection shooting for the critical Thomas–Fermi slope.
//! - [`homology`]: the scaling map and the Coppel, Milne, Dresner and
//!   Majorana invariant charts.
//! - [`reduced`]: first-order equations in each chart and their solvers.
//! - [`reconstruct`]: parametric `(x(t), y(t))` recovery by quadrature.
//! - [`sweep`]: batch workloads (invariance sweeps, slope scans), parallel
//!   with the `parallel` feature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod homology;
pub mod interp;
pub mod odes;
pub mod quad;
pub mod reconstruct;
pub mod reduced;
pub mod rk;
pub mod sweep;

pub use error::{Error, Result};
