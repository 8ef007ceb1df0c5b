//! Numerical toolkit for Orlicz and Orlicz-Sobolev spaces.
//!
//! Young functions and their conjugates, growth indices and Matuszewska-Orlicz
//! functions, Orlicz-Sobolev conjugates, Luxemburg norms on grids,
//! concentration-compactness diagnostics for blow-up sequences, and a
//! mountain-pass solver for the critical problem
//! −div(a(|∇u|)∇u/|∇u|) = a_n(|u|)u/|u| + λ f(u) with Dirichlet data.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod ccp;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod matuszewska;
pub mod mountain_pass;
pub mod numerics;
pub mod runner;
pub mod sobolev;
pub mod suite;
pub mod young;

pub use error::{OrliczError, Result};
pub use young::{GrowthIndices, Interp, YoungFunction};
