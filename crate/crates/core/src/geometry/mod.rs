//! Single-chart Riemannian and Lorentzian geometry.
//!
//! Everything here works on one coordinate patch with an arbitrary
//! non-degenerate metric given by expressions, and knows nothing about
//! warped products. The warped-product closed forms in [`crate::swp`] are
//! checked against these routines.

mod chart;
mod oracle;

pub use chart::{Chart, Interval, VectorFieldSpec};
pub(crate) use oracle::{bilinear, dot, mat_vec};
pub use oracle::{
    christoffel_at, covariant_derivative_at, curvature_at, lie_derivative_metric_at, metric_at,
    scalar_calculus_at, Christoffel, Curvature, LocalGeometry, MetricAt, Riemann, ScalarCalculus,
};
