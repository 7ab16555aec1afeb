//! Quasi-Fefferman Lorentzian metrics over three-dimensional CR structures.
//!
//! The crate is layered:
//!
//! - [`kernel`]: exact symbolic calculus in a frame adapted to a CR
//!   structure, with noncommuting derivations rewritten to a canonical
//!   order.
//! - [`forms`]: exterior forms over a chosen coframe with symbolic
//!   coefficients, plus wedge and exterior derivative.
//! - [`cr`]: coordinate CR structures, admissible coframes, structure
//!   functions, and gauge transformations.
//! - [`bundle`]: the circle-bundle metrics built from a CR structure, their
//!   orthonormal-type coframe, and parameter transformation laws.
//! - [`curvature`]: Levi-Civita connection forms, curvature, Ricci, Weyl,
//!   and the null-congruence diagnostics.
//! - [`embed`]: the fiber profile, the embeddability obstruction, and the
//!   construction of metrics from CR data.

pub mod bundle;
pub mod cr;
pub mod curvature;
pub mod embed;
pub mod error;
pub mod fd;
pub mod forms;
pub mod jets;
pub mod kernel;
pub mod latex;

pub use error::{Error, Result};
pub use kernel::{Algebra, Direction, EqPolicy, Expr, NormalForm, PointSample, Word};
