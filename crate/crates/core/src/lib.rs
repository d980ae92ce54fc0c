//! Numerical tensor calculus for sequential warped products
//! `(M1 ×_f M2) ×_f̄ M3`.
//!
//! The crate is split into
//!
//! * [`expr`]: expression parsing and exact second-order forward-mode jets,
//! * [`geometry`]: a single-chart oracle (Christoffel symbols, curvature,
//!   Hessians, covariant and Lie derivatives) with no warped-product
//!   knowledge,
//! * [`swp`]: assembly of sequential, multiply and iterated warped products,
//!   the closed-form connection and curvature formulas, and their comparison
//!   against the oracle,
//! * [`fields`]: geodesics, Killing, conformal and concircular vector fields,
//! * [`spacetimes`]: standard static and generalized Robertson–Walker
//!   constructions,
//! * [`fixtures`]: the reference manifolds used by tests, benches and the CLI.

pub mod error;
pub mod expr;
pub mod fields;
pub mod fixtures;
pub mod geometry;
pub mod sampling;
pub mod spacetimes;
pub mod swp;

pub use error::{Error, Result};
pub use expr::{eval_jet2, parse_expr, Expr, Jet2};
pub use geometry::{Chart, Interval, LocalGeometry, VectorFieldSpec};
pub use swp::{assemble, Block, BlockVector, SequentialWarpedProduct, Warping};
