//! Numerical laboratory for band and quasi-local operators on finite metric
//! spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod oper;
pub mod propa;
pub mod quasilocal;
pub mod randsub;
pub mod reps;
pub mod rng;
pub mod space;
pub mod translations;

pub use error::{Error, Result};
pub use oper::{EpsMode, RectangleWitness, SpaceOperator};
pub use space::{ExpanderFamily, FiniteMetricSpace, GapRule, Kappa, KappaKind, KappaMode};
