//! Submodular function minimization through the minimum-norm-point dual pair,
//! with safe screening of active and inactive elements.
//!
//! The entry points are [`submodular::Oracle`] (a normalized set function),
//! [`solver::min_norm_point`] (the unscreened solver) and
//! [`screening::iaes_solve`] (the screened driver). Concrete functions live in
//! [`functions`], instance generators in [`datagen`], and the file formats used
//! by the command-line harness in [`io`].

pub mod datagen;
mod error;
pub mod functions;
pub mod io;
pub mod screening;
mod set;
pub mod solver;
pub mod submodular;

pub use error::{Error, Result};
pub use set::ElementSet;
pub use submodular::{Oracle, SetFunction};
