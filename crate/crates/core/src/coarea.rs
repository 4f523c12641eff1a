//! Jacobians of maps `f : H^n → R^k`, horizontal normals and coarea checks.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{Env, Expr};
use crate::group::GroupPoint;
use crate::measure::{surface_integral, Density, IntegrationConfig, MeasureReport, MetricSpec};
use crate::multivec::{norm, subset_basis, PVector};
use crate::quadrature::integrate_box;
use crate::surface::{BoxDomain, ParamSurface, ScalarMap};

/// `sqrt` of the sum of squared `k×k` minors of a `k×m` matrix over column subsets.
pub fn minor_norm(rows: &[Vec<f64>], cols: usize) -> f64 {
    let k = rows.len();
    if k == 0 {
        return 1.0;
    }
    if k == 1 {
        return rows[0][..cols].iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    let basis = subset_basis(cols, k);
    let mut total = 0.0;
    for idx in 0..basis.len() {
        let members = basis.members(idx);
        let m = DMatrix::from_fn(k, k, |i, j| rows[i][members[j]]);
        let d = m.determinant();
        total += d * d;
    }
    total.sqrt()
}

fn check_point(f: &ScalarMap, x: &GroupPoint) -> Result<()> {
    if x.n() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: 2 * f.n() + 1,
            got: x.dim(),
        });
    }
    Ok(())
}

/// Horizontal jacobian: minors of the matrix `(X_j f^i(x))` over horizontal columns.
pub fn horizontal_jacobian(f: &ScalarMap, x: &GroupPoint) -> Result<f64> {
    check_point(f, x)?;
    let rows = f.frame_jacobian(x.coords())?;
    Ok(minor_norm(&rows, 2 * f.n()))
}

/// Riemannian jacobian: minors over the full orthonormal frame, `Z` included.
pub fn riemannian_jacobian(f: &ScalarMap, x: &GroupPoint) -> Result<f64> {
    check_point(f, x)?;
    let rows = f.frame_jacobian(x.coords())?;
    Ok(minor_norm(&rows, 2 * f.n() + 1))
}

/// `(|τ_{Σ,V}(x)|, J_H f(x) / J_g f(x))` at `x = chart(u)`; the quotient `0/0` at
/// characteristic points is read as `0`.
pub fn ratio_identity_check(f: &ScalarMap, chart: &ParamSurface, u: &[f64]) -> Result<(f64, f64)> {
    if chart.n() != f.n() {
        return Err(Error::DimensionMismatch {
            expected: 2 * f.n() + 1,
            got: 2 * chart.n() + 1,
        });
    }
    let expected_p = 2 * f.n() + 1 - f.k();
    if chart.p() != expected_p {
        return Err(Error::WrongCodimension {
            expected: expected_p,
            got: chart.p(),
        });
    }
    let x = GroupPoint::new(f.n(), chart.point(u)?)?;
    let jg = riemannian_jacobian(f, &x)?;
    if jg == 0.0 {
        return Err(Error::DegenerateLevelSet);
    }
    let jh = horizontal_jacobian(f, &x)?;
    let tv = norm(&chart.vertical_tangent(u)?);
    Ok((tv, jh / jg))
}

/// Horizontal normal `ν_H` of a codimension-one surface, with
/// `ν_H^j = (−1)^j τ_{Σ,V}^j` where `τ_{Σ,V}^j` is the coefficient on the blade that
/// omits `X_j`.
pub fn horizontal_normal(s: &ParamSurface, u: &[f64]) -> Result<PVector> {
    let n = s.n();
    if s.p() != 2 * n {
        return Err(Error::WrongCodimension {
            expected: 2 * n,
            got: s.p(),
        });
    }
    let tv = s.vertical_tangent(u)?;
    let dim = 2 * n + 1;
    let mut nu = vec![0.0; dim];
    for (j, slot) in nu.iter_mut().enumerate().take(2 * n) {
        let omit: Vec<usize> = (1..=dim).filter(|&i| i != j + 1).collect();
        let sign = if (j + 1) % 2 == 0 { 1.0 } else { -1.0 };
        *slot = sign * tv.coeff(&omit);
    }
    PVector::vector(&nu)
}

/// Level sets `f^{-1}(t) ∩ A` of a map, parametrized by one chart family.
#[derive(Debug, Clone)]
pub struct LevelSetFamily {
    map: ScalarMap,
    chart: ParamSurface,
    t_domain: BoxDomain,
    region: BoxDomain,
}

impl LevelSetFamily {
    /// `chart` must depend on parameters `t1..tk`; it is checked for `f(chart_t(u)) = t`
    /// and `chart_t(u) ∈ A` on a grid of `(t, u)` samples.
    pub fn new(
        map: ScalarMap,
        chart: ParamSurface,
        t_domain: BoxDomain,
        region: BoxDomain,
    ) -> Result<Self> {
        let n = map.n();
        let k = map.k();
        if chart.n() != n || region.dim() != 2 * n + 1 {
            return Err(Error::DimensionMismatch {
                expected: 2 * n + 1,
                got: if chart.n() != n { 2 * chart.n() + 1 } else { region.dim() },
            });
        }
        if t_domain.dim() != k || chart.params().len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: if t_domain.dim() != k { t_domain.dim() } else { chart.params().len() },
            });
        }
        if chart.p() != 2 * n + 1 - k {
            return Err(Error::WrongCodimension {
                expected: 2 * n + 1 - k,
                got: chart.p(),
            });
        }
        let family = Self {
            map,
            chart,
            t_domain,
            region,
        };
        family.check_consistency()?;
        Ok(family)
    }

    fn check_consistency(&self) -> Result<()> {
        const GRID: usize = 3;
        let k = self.t_domain.dim();
        let p = self.chart.p();
        let ratio = |i: usize| (i % GRID) as f64 / (GRID - 1) as f64;
        for ti in 0..GRID.pow(k as u32) {
            let s: Vec<f64> = (0..k).map(|a| ratio(ti / GRID.pow(a as u32))).collect();
            let t = self.t_domain.map_unit(&s);
            let chart = self.chart.with_params(&t)?;
            for ui in 0..GRID.pow(p as u32) {
                let s: Vec<f64> = (0..p).map(|a| ratio(ui / GRID.pow(a as u32))).collect();
                let u = chart.domain().map_unit(&s);
                let x = chart.point(&u)?;
                let fx = self.map.value(&x)?;
                for (a, b) in fx.iter().zip(&t) {
                    if (a - b).abs() > 1e-9 * (1.0 + b.abs()) {
                        return Err(Error::ChartInconsistent(format!(
                            "f(chart(u = {u:?})) = {fx:?} at t = {t:?}"
                        )));
                    }
                }
                let inside = x.iter().enumerate().all(|(j, xj)| {
                    let (lo, hi) = (self.region.lo()[j], self.region.hi()[j]);
                    let slack = 1e-9 * (hi - lo);
                    *xj >= lo - slack && *xj <= hi + slack
                });
                if !inside {
                    return Err(Error::ChartInconsistent(format!(
                        "chart point {x:?} at t = {t:?} lies outside the region"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn map(&self) -> &ScalarMap {
        &self.map
    }

    pub fn chart(&self) -> &ParamSurface {
        &self.chart
    }

    pub fn t_domain(&self) -> &BoxDomain {
        &self.t_domain
    }

    pub fn region(&self) -> &BoxDomain {
        &self.region
    }
}

#[derive(Clone, Copy)]
enum Flavor {
    Intrinsic,
    Riemannian,
}

fn check_weight(weight: &Expr, n: usize) -> Result<()> {
    let dim = 2 * n + 1;
    for v in weight.vars() {
        if !matches!(v, crate::expr::Var::X(i) if i < dim) {
            return Err(Error::InvalidConfig(format!(
                "weight `{weight}` uses `{v}`, which is not a coordinate"
            )));
        }
    }
    Ok(())
}

fn coarea_sides(
    family: &LevelSetFamily,
    weight: &Expr,
    cfg: &IntegrationConfig,
    flavor: Flavor,
) -> Result<(MeasureReport, MeasureReport)> {
    cfg.validate()?;
    let n = family.map.n();
    check_weight(weight, n)?;
    let opts = cfg.quad_options();

    let lhs = integrate_box(
        |x: &[f64]| {
            let w = weight.eval(&Env::new().with_x(x))?;
            if w == 0.0 {
                return Ok(0.0);
            }
            let rows = family.map.frame_jacobian(x)?;
            let cols = match flavor {
                Flavor::Intrinsic => 2 * n,
                Flavor::Riemannian => 2 * n + 1,
            };
            Ok(w * minor_norm(&rows, cols))
        },
        &family.region,
        &opts,
    )?;

    let density = match flavor {
        Flavor::Intrinsic => Density::Vertical,
        Flavor::Riemannian => Density::Riemannian,
    };
    let standard = MetricSpec::standard(n);
    let inner_err = AtomicU64::new(0f64.to_bits());
    let inner_ok = AtomicU64::new(1);
    let inner_evals = AtomicU64::new(0);
    let rhs = integrate_box(
        |t: &[f64]| {
            let chart = family.chart.with_params(t)?;
            let r = surface_integral(&chart, density, &standard, Some(weight), cfg)?;
            inner_err.fetch_max(r.error_estimate.to_bits(), Ordering::Relaxed);
            inner_evals.fetch_add(r.samples_or_nodes, Ordering::Relaxed);
            if !r.converged {
                inner_ok.store(0, Ordering::Relaxed);
            }
            Ok(r.value)
        },
        &family.t_domain,
        &opts,
    )?;
    // non-negative floats order like their bit patterns
    let worst_inner = f64::from_bits(inner_err.load(Ordering::Relaxed));
    let rhs_report = MeasureReport {
        value: rhs.value,
        error_estimate: rhs.error + family.t_domain.volume() * worst_inner,
        method: crate::measure::Method::Quadrature,
        samples_or_nodes: inner_evals.load(Ordering::Relaxed),
        converged: rhs.converged && inner_ok.load(Ordering::Relaxed) == 1,
    };
    let lhs_report = MeasureReport {
        value: lhs.value,
        error_estimate: lhs.error,
        method: crate::measure::Method::Quadrature,
        samples_or_nodes: lhs.evals,
        converged: lhs.converged,
    };
    Ok((lhs_report, rhs_report))
}

/// Both sides of the intrinsic coarea formula:
/// `∫_A w J_H f dx` and `∫_T ∫_{f^{-1}(t) ∩ A} w dS dt`, the inner measure being the
/// intrinsic spherical measure of the level set.
pub fn coarea_check(
    family: &LevelSetFamily,
    weight: &Expr,
    cfg: &IntegrationConfig,
) -> Result<(MeasureReport, MeasureReport)> {
    coarea_sides(family, weight, cfg, Flavor::Intrinsic)
}

/// Both sides of the Riemannian coarea formula, with `J_g f` and Riemannian volume.
pub fn riemannian_coarea_check(
    family: &LevelSetFamily,
    weight: &Expr,
    cfg: &IntegrationConfig,
) -> Result<(MeasureReport, MeasureReport)> {
    coarea_sides(family, weight, cfg, Flavor::Riemannian)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Var};

    fn pt(c: &[f64]) -> GroupPoint {
        GroupPoint::from_slice(c).unwrap()
    }

    #[test]
    fn jacobian_examples() {
        let f = ScalarMap::parse(1, &["x3"]).unwrap();
        assert!((horizontal_jacobian(&f, &pt(&[1.0, 1.0, 0.0])).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((riemannian_jacobian(&f, &pt(&[1.0, 1.0, 0.0])).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(horizontal_jacobian(&f, &pt(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
        let g = ScalarMap::parse(1, &["x1"]).unwrap();
        assert_eq!(horizontal_jacobian(&g, &pt(&[0.3, -2.0, 5.0])).unwrap(), 1.0);
        assert_eq!(riemannian_jacobian(&g, &pt(&[0.3, -2.0, 5.0])).unwrap(), 1.0);
    }

    #[test]
    fn minors_of_a_two_row_matrix() {
        let rows = vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, 3.0]];
        // minors: {1,2} = 1, {1,3} = 3, {2,3} = 6
        assert!((minor_norm(&rows, 3) - 46f64.sqrt()).abs() < 1e-14);
        assert!((minor_norm(&rows, 2) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn plane_ratio_identity() {
        let f = ScalarMap::parse(1, &["x3"]).unwrap();
        let chart = ParamSurface::parse(
            1,
            &["u1", "u2", "0"],
            BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let (a, b) = ratio_identity_check(&f, &chart, &[0.3, -0.6]).unwrap();
        let r2: f64 = 0.3f64 * 0.3 + 0.36;
        let expected = r2.sqrt() / (1.0 + r2).sqrt();
        assert!((a - expected).abs() < 1e-14 && (b - expected).abs() < 1e-14);
        assert_eq!(ratio_identity_check(&f, &chart, &[0.0, 0.0]).unwrap(), (0.0, 0.0));

        let nu = horizontal_normal(&chart, &[0.3, -0.6]).unwrap();
        assert!((norm(&nu) - expected).abs() < 1e-14);
        // ν_H ∝ (u2, −u1)
        assert!((nu.coeffs()[0] * 0.3 + nu.coeffs()[1] * -0.6).abs() < 1e-15);
        assert!(nu.coeffs()[0] < 0.0);
        assert_eq!(norm(&horizontal_normal(&chart, &[0.0, 0.0]).unwrap()), 0.0);
    }

    #[test]
    fn wrong_dimensions() {
        let line = ParamSurface::parse(1, &["u1", "0", "0"], BoxDomain::unit(1)).unwrap();
        assert!(matches!(
            horizontal_normal(&line, &[0.5]),
            Err(Error::WrongCodimension { .. })
        ));
    }

    #[test]
    fn inconsistent_chart_is_rejected() {
        let f = ScalarMap::parse(1, &["x3"]).unwrap();
        let chart = ParamSurface::parse_family(1, &["u1", "u2", "t + 0.1"], BoxDomain::unit(2), &[0.0]).unwrap();
        let err = LevelSetFamily::new(f, chart, BoxDomain::unit(1), BoxDomain::unit(3)).unwrap_err();
        assert!(matches!(err, Error::ChartInconsistent(_)));
    }

    #[test]
    fn coarea_for_vertical_coordinate() {
        let f = ScalarMap::parse(1, &["x3"]).unwrap();
        let chart = ParamSurface::parse_family(1, &["u1", "u2", "t"], BoxDomain::unit(2), &[0.0]).unwrap();
        let fam = LevelSetFamily::new(f, chart, BoxDomain::unit(1), BoxDomain::unit(3)).unwrap();
        let one = parse("1", &[]).unwrap();
        let cfg = IntegrationConfig {
            rel_tol: 1e-7,
            ..Default::default()
        };
        let (lhs, rhs) = coarea_check(&fam, &one, &cfg).unwrap();
        let exact = (2f64.sqrt() + 1f64.asinh()) / 3.0;
        assert!((lhs.value - exact).abs() < 1e-6, "{lhs:?}");
        assert!((rhs.value - exact).abs() < 1e-6, "{rhs:?}");
        let w = parse("x1", &Var::coords(3)).unwrap();
        let (lhs, rhs) = riemannian_coarea_check(&fam, &w, &cfg).unwrap();
        assert!((lhs.value - rhs.value).abs() < 1e-6 * lhs.value, "{lhs:?} {rhs:?}");
    }
}
