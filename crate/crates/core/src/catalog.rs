//! Worked examples with closed-form intrinsic densities and measures.

use crate::error::Result;
use crate::expr::{parse, Expr, Var};
use crate::surface::{BoxDomain, ParamSurface};

/// `φ(u) = (u1, u2, (u1² + u2²)/2)` in `H^1`.
pub fn paraboloid(domain: BoxDomain) -> Result<ParamSurface> {
    ParamSurface::parse(1, &["u1", "u2", "(u1^2 + u2^2)/2"], domain)
}

pub const PARABOLOID_DENSITY: &str = "sqrt(2*u1^2+2*u2^2)";

/// `φ(u) = (a1 u1, a2 u2, b u1 + c u2)` in `H^1`.
pub fn hyperplane(a1: f64, a2: f64, b: f64, c: f64, domain: BoxDomain) -> Result<ParamSurface> {
    ParamSurface::parse(
        1,
        &[
            &format!("({a1})*u1"),
            &format!("({a2})*u2"),
            &format!("({b})*u1 + ({c})*u2"),
        ],
        domain,
    )
}

pub fn hyperplane_density(a1: f64, a2: f64, b: f64, c: f64) -> String {
    format!(
        "sqrt(({a1})^2*(({c}) - ({a1})*({a2})*u1)^2 + ({a2})^2*(({a1})*({a2})*u2 + ({b}))^2)"
    )
}

/// `φ(u) = (u1, u2, u3, 0, (u1² + u2² + u3²)/2)` in `H^2`.
pub fn paraboloid3(domain: BoxDomain) -> Result<ParamSurface> {
    ParamSurface::parse(2, &["u1", "u2", "u3", "0", "(u1^2 + u2^2 + u3^2)/2"], domain)
}

pub const PARABOLOID3_DENSITY: &str = "sqrt(u2^2 + 2*(u3^2 + u1^2))";

/// `φ(s) = (a s, 0, b s)` for `s ∈ [alpha, beta]` in `H^1`.
pub fn line(a: f64, b: f64, alpha: f64, beta: f64) -> Result<ParamSurface> {
    ParamSurface::parse(
        1,
        &[&format!("({a})*u1"), "0", &format!("({b})*u1")],
        BoxDomain::new(vec![alpha], vec![beta])?,
    )
}

pub fn line_measure(b: f64, alpha: f64, beta: f64) -> f64 {
    b.abs() * (beta - alpha)
}

/// `∫∫_{[0,1]²} sqrt(u1² + u2²) du`.
pub fn unit_square_radius_integral() -> f64 {
    (2f64.sqrt() + 1f64.asinh()) / 3.0
}

/// Parses a density expression in `u1..up`.
pub fn density(text: &str, p: usize) -> Result<Expr> {
    Ok(parse(text, &Var::params(p))?)
}
