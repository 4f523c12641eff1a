//! Parametrized submanifolds `Φ = F∘φ : U → H^n` and scalar maps `f : H^n → R^k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse, Env, Expr, Var};
use crate::group::{coords_to_frame_in_place, frame_derivatives, GroupPoint};
use crate::multivec::{vertical_project, wedge, PVector, MAX_N};

/// Default threshold for `|τ_{Σ,V}|` below which a point counts as characteristic.
pub const CHARACTERISTIC_TOL: f64 = 1e-9;
const EMBEDDING_RATIO: f64 = 1e-9;
const EMBEDDING_GRID: usize = 5;

/// Axis-aligned box `Π [lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::InvalidDomain("box has no axes".into()));
        }
        for (i, (a, b)) in lo.iter().zip(&hi).enumerate() {
            if !a.is_finite() || !b.is_finite() || a >= b {
                return Err(Error::InvalidDomain(format!(
                    "axis {} has bounds [{a}, {b}]",
                    i + 1
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    pub fn unit(dim: usize) -> Self {
        Self::new(vec![0.0; dim], vec![1.0; dim]).expect("unit box is valid")
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Closed containment with a rounding allowance of `1e-12` times the side length.
    pub fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim()
            && u.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| {
                    let slack = 1e-12 * (b - a);
                    *x >= a - slack && *x <= b + slack
                })
    }

    /// Strict containment with a margin.
    pub fn contains_interior(&self, u: &[f64], margin: f64) -> bool {
        u.len() == self.dim()
            && u.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| *x > a + margin && *x < b - margin)
    }

    /// The point with relative coordinates `s ∈ [0,1]^d`.
    pub fn map_unit(&self, s: &[f64]) -> Vec<f64> {
        s.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(s, (a, b))| a + s * (b - a))
            .collect()
    }
}

/// A parametrization `φ : U → R^{2n+1}` of a p-dimensional submanifold.
///
/// Components may also depend on parameters `t1..tk`, which makes the surface one
/// member of a family; see [`ParamSurface::with_params`].
#[derive(Debug, Clone)]
pub struct ParamSurface {
    n: usize,
    domain: BoxDomain,
    components: Vec<Expr>,
    partials: Vec<Vec<Expr>>,
    params: Vec<f64>,
}

impl ParamSurface {
    /// Builds and checks a surface; the embedding check runs on a grid of the domain.
    pub fn new(n: usize, components: Vec<Expr>, domain: BoxDomain) -> Result<Self> {
        let s = Self::unchecked(n, components, domain, Vec::new())?;
        s.check_embedding()?;
        Ok(s)
    }

    /// Parses component strings in `u1..up`, where `p` is the domain dimension.
    pub fn parse(n: usize, components: &[&str], domain: BoxDomain) -> Result<Self> {
        let vars = Var::params(domain.dim());
        let exprs = components
            .iter()
            .map(|c| parse(c, &vars))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(n, exprs, domain)
    }

    /// Parses a family of surfaces in `u1..up` and parameters `t1..tk`, fixed at `params`.
    pub fn parse_family(
        n: usize,
        components: &[&str],
        domain: BoxDomain,
        params: &[f64],
    ) -> Result<Self> {
        let mut vars = Var::params(domain.dim());
        vars.extend((0..params.len()).map(Var::T));
        let exprs = components
            .iter()
            .map(|c| parse(c, &vars))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new_family(n, exprs, domain, params)
    }

    /// A family in `u1..up` and `t1..tk`, fixed at `params`.
    pub fn new_family(
        n: usize,
        components: Vec<Expr>,
        domain: BoxDomain,
        params: &[f64],
    ) -> Result<Self> {
        let s = Self::unchecked(n, components, domain, params.to_vec())?;
        s.check_embedding()?;
        Ok(s)
    }

    fn unchecked(
        n: usize,
        components: Vec<Expr>,
        domain: BoxDomain,
        params: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::InvalidGroupParameter(n));
        }
        let dim = 2 * n + 1;
        if components.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: components.len(),
            });
        }
        let p = domain.dim();
        if p > 2 * n {
            return Err(Error::InvalidDegree { p, dim });
        }
        for e in &components {
            for v in e.vars() {
                let ok = match v {
                    Var::U(i) => i < p,
                    Var::T(i) => i < params.len(),
                    _ => false,
                };
                if !ok {
                    return Err(Error::InvalidConfig(format!(
                        "component `{e}` uses `{v}`, which is not a surface variable"
                    )));
                }
            }
        }
        let partials = components
            .iter()
            .map(|e| (0..p).map(|i| e.diff(Var::U(i))).collect())
            .collect();
        Ok(Self {
            n,
            domain,
            components,
            partials,
            params,
        })
    }

    /// The same family member at other parameter values (no re-check of the embedding).
    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                got: params.len(),
            });
        }
        Ok(Self {
            params: params.to_vec(),
            ..self.clone()
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// `∂φ^j/∂u_i` as `partials()[j][i]`.
    pub fn partials(&self) -> &[Vec<Expr>] {
        &self.partials
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// The same surface over a different box.
    pub fn restricted(&self, domain: BoxDomain) -> Result<Self> {
        if domain.dim() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: domain.dim(),
            });
        }
        Ok(Self {
            domain,
            ..self.clone()
        })
    }

    /// Composition with the left translation by `q`.
    pub fn left_translate(&self, q: &GroupPoint) -> Result<Self> {
        if q.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n + 1,
                got: q.dim(),
            });
        }
        let n = self.n;
        let qc = q.coords();
        let phi = &self.components;
        let k = |v: f64| Expr::constant(v);
        let add = |a: Expr, b: Expr| Expr::Add(Box::new(a), Box::new(b));
        let mul = |a: Expr, b: Expr| Expr::Mul(Box::new(a), Box::new(b));
        let mut out: Vec<Expr> = (0..2 * n).map(|j| add(k(qc[j]), phi[j].clone())).collect();
        let mut t = add(k(qc[2 * n]), phi[2 * n].clone());
        for j in 0..n {
            t = add(t, mul(k(qc[j]), phi[j + n].clone()));
            t = add(t, mul(k(-qc[j + n]), phi[j].clone()));
        }
        out.push(t);
        Self::unchecked(n, out, self.domain.clone(), self.params.clone())
    }

    fn env<'a>(&'a self, u: &'a [f64]) -> Env<'a> {
        Env::new().with_u(u).with_t(&self.params)
    }

    fn check_domain(&self, u: &[f64]) -> Result<()> {
        if u.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: u.len(),
            });
        }
        if !self.domain.contains(u) {
            return Err(Error::OutsideDomain { point: u.to_vec() });
        }
        Ok(())
    }

    /// `φ(u)` in standard coordinates.
    pub fn point(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(u)?;
        let env = self.env(u);
        self.components.iter().map(|e| e.eval(&env)).collect()
    }

    /// Coordinate partial vectors `∂_{u_i} φ(u)`, one per parameter.
    pub fn coordinate_partials(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_domain(u)?;
        self.coordinate_partials_unchecked(u)
    }

    fn coordinate_partials_unchecked(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        let env = self.env(u);
        let dim = 2 * self.n + 1;
        let mut out = vec![vec![0.0; dim]; self.p()];
        for (j, row) in self.partials.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                out[i][j] = e.eval(&env)?;
            }
        }
        Ok(out)
    }

    /// `Φ_{u_i}(u)` as frame coefficients, together with the point `φ(u)`.
    pub fn frame_partials(&self, u: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let x = self.point(u)?;
        let mut vs = self.coordinate_partials_unchecked(u)?;
        for v in &mut vs {
            coords_to_frame_in_place(self.n, &x, v);
        }
        Ok((x, vs))
    }

    /// `Φ_{u_1}(u), .., Φ_{u_p}(u)` as degree-one p-vectors.
    pub fn pushforward_partials(&self, u: &[f64]) -> Result<Vec<PVector>> {
        let (_, vs) = self.frame_partials(u)?;
        vs.iter().map(|v| PVector::vector(v)).collect()
    }

    /// Unnormalized tangent p-vector `Φ_{u_1} ∧ .. ∧ Φ_{u_p}`.
    pub fn tangent_pvector(&self, u: &[f64]) -> Result<PVector> {
        let (_, vs) = self.frame_partials(u)?;
        PVector::wedge_all(self.n, &vs)
    }

    /// `π_V(τ_Σ)`, the vertical projection of the unit tangent p-vector.
    pub fn vertical_tangent(&self, u: &[f64]) -> Result<PVector> {
        let t = self.tangent_pvector(u)?;
        let norm = crate::multivec::norm(&t);
        if norm == 0.0 {
            return Err(Error::NotAnEmbedding {
                point: u.to_vec(),
                ratio: 0.0,
            });
        }
        Ok(vertical_project(&t).scale(1.0 / norm))
    }

    /// Riemannian area density `|Φ_{u_1} ∧ .. ∧ Φ_{u_p}|`.
    pub fn area_density(&self, u: &[f64]) -> Result<f64> {
        Ok(crate::multivec::norm(&self.tangent_pvector(u)?))
    }

    /// Intrinsic density `|π_V(Φ_{u_1} ∧ .. ∧ Φ_{u_p})|`.
    pub fn vertical_density(&self, u: &[f64]) -> Result<f64> {
        Ok(self.tangent_pvector(u)?.vertical_norm())
    }

    pub fn is_characteristic(&self, u: &[f64], tol: f64) -> Result<bool> {
        Ok(crate::multivec::norm(&self.vertical_tangent(u)?) <= tol)
    }

    /// Largest relative gap between symbolic partials and central differences.
    pub fn finite_difference_gap(&self, u: &[f64], step: f64) -> Result<f64> {
        let exact = self.coordinate_partials(u)?;
        let env_at = |v: &[f64]| -> Result<Vec<f64>> {
            let env = self.env(v);
            self.components.iter().map(|e| e.eval(&env)).collect()
        };
        let mut worst: f64 = 0.0;
        for (i, ex) in exact.iter().enumerate() {
            let mut up = u.to_vec();
            let mut dn = u.to_vec();
            up[i] += step;
            dn[i] -= step;
            let (a, b) = (env_at(&up)?, env_at(&dn)?);
            for j in 0..ex.len() {
                let fd = (a[j] - b[j]) / (2.0 * step);
                worst = worst.max((fd - ex[j]).abs() / ex[j].abs().max(1.0));
            }
        }
        Ok(worst)
    }

    /// Smallest-to-largest singular value ratio of the coordinate partial matrix at `u`.
    pub fn embedding_ratio(&self, u: &[f64]) -> Result<f64> {
        let vs = self.coordinate_partials(u)?;
        let dim = 2 * self.n + 1;
        let m = DMatrix::from_fn(dim, self.p(), |j, i| vs[i][j]);
        let sv = m.singular_values();
        let max = sv.max();
        Ok(if max > 0.0 { sv.min() / max } else { 0.0 })
    }

    fn check_embedding(&self) -> Result<()> {
        let p = self.p();
        let total = EMBEDDING_GRID.pow(p as u32);
        for idx in 0..total {
            let mut s = vec![0.0; p];
            let mut r = idx;
            for si in s.iter_mut() {
                *si = (r % EMBEDDING_GRID) as f64 / (EMBEDDING_GRID - 1) as f64;
                r /= EMBEDDING_GRID;
            }
            let u = self.domain.map_unit(&s);
            let ratio = self.embedding_ratio(&u)?;
            if !(ratio > EMBEDDING_RATIO) {
                return Err(Error::NotAnEmbedding { point: u, ratio });
            }
        }
        Ok(())
    }
}

/// A map `f : H^n → R^k` given by `k` expressions in `x1..x_{2n+1}`.
#[derive(Debug, Clone)]
pub struct ScalarMap {
    n: usize,
    components: Vec<Expr>,
    partials: Vec<Vec<Expr>>,
}

impl ScalarMap {
    pub fn new(n: usize, components: Vec<Expr>) -> Result<Self> {
        if n == 0 || n > MAX_N {
            return Err(Error::InvalidGroupParameter(n));
        }
        let dim = 2 * n + 1;
        let k = components.len();
        if k == 0 || k >= dim {
            return Err(Error::InvalidDegree { p: k, dim });
        }
        for e in &components {
            if let Some(v) = e
                .vars()
                .into_iter()
                .find(|v| !matches!(v, Var::X(i) if *i < dim))
            {
                return Err(Error::InvalidConfig(format!(
                    "map component `{e}` uses `{v}`, which is not a coordinate"
                )));
            }
        }
        let partials = components
            .iter()
            .map(|e| (0..dim).map(|j| e.diff(Var::X(j))).collect())
            .collect();
        Ok(Self {
            n,
            components,
            partials,
        })
    }

    pub fn parse(n: usize, components: &[&str]) -> Result<Self> {
        let vars = Var::coords(2 * n + 1);
        let exprs = components
            .iter()
            .map(|c| parse(c, &vars))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Self::new(n, exprs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        let dim = 2 * self.n + 1;
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let env = Env::new().with_x(x);
        self.components.iter().map(|e| e.eval(&env)).collect()
    }

    /// Coordinate gradients, one row per component.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check(x)?;
        let env = Env::new().with_x(x);
        self.partials
            .iter()
            .map(|row| row.iter().map(|e| e.eval(&env)).collect())
            .collect()
    }

    /// Rows `(X_1 f^i, .., X_{2n} f^i, Z f^i)`.
    pub fn frame_jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        Ok(self
            .gradient(x)?
            .iter()
            .map(|g| frame_derivatives(self.n, x, g))
            .collect())
    }
}

/// Wedge of the frame partials, exposed for callers that already hold them.
pub fn wedge_of(n: usize, vectors: &[Vec<f64>]) -> Result<PVector> {
    let mut out = PVector::scalar(n, 1.0)?;
    for v in vectors {
        out = wedge(&out, &PVector::vector(v)?)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multivec::norm;
    use proptest::prelude::*;

    fn paraboloid() -> ParamSurface {
        ParamSurface::parse(
            1,
            &["u1", "u2", "(u1^2 + u2^2)/2"],
            BoxDomain::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn paraboloid_partials() {
        let s = paraboloid();
        let (_, vs) = s.frame_partials(&[1.0, 0.0]).unwrap();
        assert_eq!(vs[0], vec![1.0, 0.0, 1.0]);
        assert_eq!(vs[1], vec![0.0, 1.0, -1.0]);
        let t = s.tangent_pvector(&[0.0, 0.0]).unwrap();
        assert_eq!(t.coeffs(), &[1.0, 0.0, 0.0]);
        assert!(s.is_characteristic(&[0.0, 0.0], CHARACTERISTIC_TOL).unwrap());
        assert!(!s.is_characteristic(&[0.5, 0.0], CHARACTERISTIC_TOL).unwrap());
    }

    #[test]
    fn plane_partials() {
        let (a1, a2, b, c) = (1.5, -0.5, 0.3, 2.0);
        let s = ParamSurface::parse(
            1,
            &[
                &format!("{a1}*u1"),
                &format!("{a2}*u2"),
                &format!("{b}*u1 + {c}*u2"),
            ],
            BoxDomain::unit(2),
        )
        .unwrap();
        let u = [0.3, 0.7];
        let (_, vs) = s.frame_partials(&u).unwrap();
        assert!((vs[0][0] - a1).abs() < 1e-15);
        assert!((vs[0][2] - (a1 * a2 * u[1] + b)).abs() < 1e-14);
        assert!((vs[1][2] - (c - a1 * a2 * u[0])).abs() < 1e-14);
    }

    #[test]
    fn three_paraboloid_partials() {
        let s = ParamSurface::parse(
            2,
            &["u1", "u2", "u3", "0", "(u1^2+u2^2+u3^2)/2"],
            BoxDomain::unit(3),
        )
        .unwrap();
        let u = [0.2, 0.4, 0.9];
        let (_, vs) = s.frame_partials(&u).unwrap();
        assert_eq!(&vs[2][..4], &[0.0, 0.0, 1.0, 0.0]);
        assert!((vs[2][4] - (u[2] - u[0])).abs() < 1e-15);
    }

    #[test]
    fn lines() {
        let (a, b) = (0.8, 1.7);
        let line = ParamSurface::parse(
            1,
            &[&format!("{a}*u1"), "0", &format!("{b}*u1")],
            BoxDomain::new(vec![-1.0], vec![2.0]).unwrap(),
        )
        .unwrap();
        let t = line.tangent_pvector(&[0.4]).unwrap();
        assert_eq!(t.coeffs(), &[a, 0.0, b]);

        let vertical = ParamSurface::parse(1, &["0", "0", "3*u1"], BoxDomain::unit(1)).unwrap();
        let vt = vertical.vertical_tangent(&[0.5]).unwrap();
        assert_eq!(vt.coeffs(), &[0.0, 0.0, 1.0]);
        assert!(!vertical.is_characteristic(&[0.5], CHARACTERISTIC_TOL).unwrap());
    }

    #[test]
    fn rejects_bad_surfaces() {
        assert!(matches!(
            ParamSurface::parse(1, &["u1", "u1", "0"], BoxDomain::unit(2)),
            Err(Error::NotAnEmbedding { .. })
        ));
        assert!(ParamSurface::parse(1, &["u1", "u2"], BoxDomain::unit(2)).is_err());
        assert!(ParamSurface::parse(1, &["u1", "u2", "u1*("], BoxDomain::unit(2)).is_err());
        assert!(BoxDomain::new(vec![0.0], vec![0.0]).is_err());
        let s = paraboloid();
        assert!(matches!(
            s.point(&[3.0, 0.0]),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn scalar_map_frame_derivatives() {
        let f = ScalarMap::parse(1, &["x3"]).unwrap();
        let j = f.frame_jacobian(&[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(j, vec![vec![-1.0, 1.0, 1.0]]);
        assert!(ScalarMap::parse(1, &["u1"]).is_err());
        assert!(ScalarMap::parse(1, &["x1", "x2", "x3"]).is_err());
    }

    proptest! {
        #[test]
        fn paraboloid_densities(u1 in -2.0f64..2.0, u2 in -2.0f64..2.0) {
            let s = paraboloid();
            let area = s.area_density(&[u1, u2]).unwrap();
            let expected_area = (1.0 + 2.0 * u1 * u1 + 2.0 * u2 * u2).sqrt();
            prop_assert!((area - expected_area).abs() < 1e-12 * expected_area);
            let vt = norm(&s.vertical_tangent(&[u1, u2]).unwrap());
            let expected = (2.0 * u1 * u1 + 2.0 * u2 * u2).sqrt() / expected_area;
            prop_assert!((vt - expected).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&vt));
        }

        #[test]
        fn symbolic_partials_match_differences(u in proptest::collection::vec(0.1f64..0.9, 3)) {
            let s = ParamSurface::parse(
                2,
                &["u1*cos(u2)", "u2 + u3^3", "u3 + sin(u1*u3)", "exp(u2)/(1+u1^2)", "sqrt(1 + u1^2 + u2*u3)"],
                BoxDomain::unit(3),
            ).unwrap();
            prop_assert!(s.finite_difference_gap(&u, 1e-5).unwrap() < 1e-6);
        }

        #[test]
        fn permutation_changes_only_sign(u1 in -1.0f64..1.0, u2 in -1.0f64..1.0) {
            let dom = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
            let a = ParamSurface::parse(1, &["u1 + u2^2", "u2", "u1*u2"], dom.clone()).unwrap();
            let b = ParamSurface::parse(1, &["u2 + u1^2", "u1", "u2*u1"], dom).unwrap();
            let ta = a.tangent_pvector(&[u1, u2]).unwrap();
            let tb = b.tangent_pvector(&[u2, u1]).unwrap();
            prop_assert!(norm(&ta.add(&tb).unwrap()) < 1e-12 * (1.0 + norm(&ta)));
        }

        #[test]
        fn left_translation_preserves_frame_partials(q in proptest::collection::vec(-2.0f64..2.0, 3),
                                                     u1 in -1.0f64..1.0, u2 in -1.0f64..1.0) {
            let s = paraboloid();
            let qs = s.left_translate(&GroupPoint::from_slice(&q).unwrap()).unwrap();
            let (_, a) = s.frame_partials(&[u1, u2]).unwrap();
            let (_, b) = qs.frame_partials(&[u1, u2]).unwrap();
            for (va, vb) in a.iter().zip(&b) {
                for (x, y) in va.iter().zip(vb) {
                    prop_assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }
}
