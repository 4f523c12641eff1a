//! Shared fixtures for the benchmarks.

use heisenmeasure_core::{BoxDomain, ParamSurface};

/// The `H^1` paraboloid over the unit square.
pub fn paraboloid() -> ParamSurface {
    ParamSurface::parse(1, &["u1", "u2", "(u1^2 + u2^2)/2"], BoxDomain::unit(2))
        .expect("fixture parses")
}

/// A curved 3-surface in `H^2`.
pub fn curved_h2() -> ParamSurface {
    ParamSurface::parse(2, &["u1", "u2", "u3", "u1*u3", "u2^2 - u1"], BoxDomain::unit(3))
        .expect("fixture parses")
}
