//! Intrinsic measures of submanifolds in the Heisenberg group `H^n`.
//!
//! Points use standard exponential coordinates `(x_1, .., x_{2n}, x_{2n+1})` with the
//! group law `x·y = (x̃ + ỹ, x_t + y_t + Σ_k (x_k y_{k+n} − x_{k+n} y_k))`. Tangent data
//! is expressed in the left invariant orthonormal frame `(X_1, .., X_{2n}, Z)`.

// `!(x > 0.0)` style tests are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod coarea;
pub mod distance;
pub mod error;
pub mod expr;
pub mod group;
pub mod measure;
pub mod montecarlo;
pub mod multivec;
pub mod polyfield;
pub mod quadrature;
pub mod surface;

pub use coarea::{
    coarea_check, horizontal_jacobian, horizontal_normal, ratio_identity_check,
    riemannian_coarea_check, riemannian_jacobian, LevelSetFamily,
};
pub use distance::DistanceSpec;
pub use error::{Error, Result};
pub use expr::{parse, Env, Expr, ParseError, Var};
pub use group::{coords_to_frame, dilate, frame_at, group_inv, group_mul, GroupPoint};
pub use measure::{
    ball_volume, blowup_limit, blowup_quotient, metric_factor, metric_factor_in,
    rescaled_measure_invariance, riemannian_volume, spherical_measure, IntegrationConfig,
    MeasureReport, Method, MetricSpec, Sampler,
};
pub use multivec::{inner, norm, vertical_project, wedge, PVector};
pub use polyfield::{bracket_table_violations, lie_bracket, PolyVectorField, Polynomial};
pub use surface::{BoxDomain, ParamSurface, ScalarMap, CHARACTERISTIC_TOL};
