//! Riemannian volumes, intrinsic spherical measures, metric factors and blow-ups.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::distance::DistanceSpec;
use crate::error::{Error, Result};
use crate::expr::{Env, Expr};
use crate::group::left_quotient_into;
use crate::montecarlo::{randomized_halton, strata_per_axis, stratified, McResult};
use crate::multivec::{norm, wedge, PVector};
use crate::quadrature::{integrate_box, integrate_region, QuadOptions, QuadResult, RegionOptions};
use crate::surface::{BoxDomain, ParamSurface, CHARACTERISTIC_TOL};

/// A left invariant metric making `(X_1, .., X_{2n}, W)` orthonormal, with
/// `W = λZ + Σ a_j X_j`. It agrees with the standard metric on horizontal vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    lambda: f64,
    a: Vec<f64>,
}

impl MetricSpec {
    pub fn new(lambda: f64, a: Vec<f64>) -> Result<Self> {
        if lambda == 0.0 {
            return Err(Error::ZeroLambda);
        }
        if !lambda.is_finite() {
            return Err(Error::NonFiniteCoordinate(a.len()));
        }
        if let Some(i) = a.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinate(i));
        }
        if a.is_empty() || !a.len().is_multiple_of(2) {
            return Err(Error::InvalidGroupParameter(a.len() / 2));
        }
        Ok(Self { lambda, a })
    }

    pub fn standard(n: usize) -> Self {
        Self {
            lambda: 1.0,
            a: vec![0.0; 2 * n],
        }
    }

    pub fn n(&self) -> usize {
        self.a.len() / 2
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn is_standard(&self) -> bool {
        self.lambda == 1.0 && self.a.iter().all(|v| *v == 0.0)
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if self.n() != n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: self.a.len(),
            });
        }
        Ok(())
    }

    /// The change of coordinates `A`, mapping metric-adapted coordinates to standard ones.
    pub fn matrix(&self) -> DMatrix<f64> {
        let dim = self.a.len() + 1;
        let mut m = DMatrix::identity(dim, dim);
        for (j, aj) in self.a.iter().enumerate() {
            m[(j, dim - 1)] = *aj;
        }
        m[(dim - 1, dim - 1)] = self.lambda;
        m
    }

    /// `x = A y`.
    pub fn apply(&self, y: &[f64], x: &mut [f64]) {
        let t = self.a.len();
        for j in 0..t {
            x[j] = y[j] + self.a[j] * y[t];
        }
        x[t] = self.lambda * y[t];
    }

    /// `y = A⁻¹ x`. Also converts standard frame coefficients of a vector into
    /// coefficients in the frame `(X_1, .., X_{2n}, W)`.
    pub fn apply_inverse(&self, x: &[f64], y: &mut [f64]) {
        let t = self.a.len();
        let yt = x[t] / self.lambda;
        for j in 0..t {
            y[j] = x[j] - self.a[j] * yt;
        }
        y[t] = yt;
    }

    fn to_metric_frame(&self, h: &mut [f64]) {
        let t = self.a.len();
        let ht = h[t] / self.lambda;
        for (hj, aj) in h[..t].iter_mut().zip(&self.a) {
            *hj -= aj * ht;
        }
        h[t] = ht;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    #[default]
    Stratified,
    Halton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationConfig {
    /// Gauss–Legendre order per axis.
    pub order: usize,
    /// Initial cells per axis for adaptive quadrature.
    pub subdivisions: usize,
    pub max_evals: u64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub mc_samples: u64,
    /// Approximate total number of strata.
    pub mc_strata: usize,
    pub seed: u64,
    pub sampler: Sampler,
    /// Refinement depth for cells straddling a ball boundary.
    pub region_depth: usize,
    pub region_order: usize,
    pub region_subdivisions: usize,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        Self {
            order: 8,
            subdivisions: 2,
            max_evals: 50_000_000,
            rel_tol: 1e-9,
            abs_tol: 1e-13,
            mc_samples: 1_000_000,
            mc_strata: 4096,
            seed: 0x5eed,
            sampler: Sampler::Stratified,
            region_depth: 6,
            region_order: 6,
            region_subdivisions: 8,
        }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidConfig(format!("{what} must be positive")));
        if self.order == 0 || self.order > 64 || self.region_order == 0 || self.region_order > 64 {
            return Err(Error::InvalidConfig("quadrature orders must lie in 1..=64".into()));
        }
        if self.subdivisions == 0 || self.region_subdivisions == 0 {
            return bad("subdivisions");
        }
        if self.max_evals == 0 {
            return bad("max_evals");
        }
        if self.mc_samples < 2 || self.mc_strata == 0 {
            return bad("Monte Carlo sample and stratum counts");
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) {
            return bad("tolerances");
        }
        Ok(())
    }

    pub fn quad_options(&self) -> QuadOptions {
        QuadOptions {
            order: self.order,
            initial_splits: self.subdivisions,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_evals: self.max_evals,
        }
    }

    pub fn region_options(&self) -> RegionOptions {
        RegionOptions {
            order: self.region_order,
            initial_splits: self.region_subdivisions,
            depth: self.region_depth,
            probes: 5,
            rel_tol: 1e-3,
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    fn monte_carlo<F>(&self, f: F, domain: &BoxDomain, seed: u64) -> (McResult, Method)
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        match self.sampler {
            Sampler::Stratified => {
                let s = strata_per_axis(self.mc_strata, domain.dim());
                (stratified(f, domain, self.mc_samples, s, seed), Method::MonteCarlo)
            }
            Sampler::Halton => (
                randomized_halton(f, domain, self.mc_samples, 16, seed),
                Method::QuasiMonteCarlo,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Quadrature,
    MonteCarlo,
    QuasiMonteCarlo,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureReport {
    pub value: f64,
    pub error_estimate: f64,
    pub method: Method,
    pub samples_or_nodes: u64,
    pub converged: bool,
}

impl MeasureReport {
    fn from_quad(q: QuadResult) -> Self {
        Self {
            value: q.value,
            error_estimate: q.error,
            method: Method::Quadrature,
            samples_or_nodes: q.evals,
            converged: q.converged,
        }
    }

    fn from_mc(r: McResult, method: Method) -> Self {
        Self {
            value: r.value,
            error_estimate: r.std_error,
            method,
            samples_or_nodes: r.samples,
            converged: r.std_error.is_finite(),
        }
    }

    /// Relative error estimate.
    pub fn relative_error(&self) -> f64 {
        self.error_estimate / self.value.abs()
    }
}

/// Which density to integrate over a parametrized surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Density {
    /// `|Φ_{u_1} ∧ .. ∧ Φ_{u_p}|`, the Riemannian area element.
    Riemannian,
    /// `|π_V(Φ_{u_1} ∧ .. ∧ Φ_{u_p})|`, the intrinsic spherical measure element.
    Vertical,
}

/// Density of `kind` at `u`, in the orthonormal frame of `metric`.
pub fn density_at(s: &ParamSurface, kind: Density, metric: &MetricSpec, u: &[f64]) -> Result<(Vec<f64>, f64)> {
    let (x, mut vs) = s.frame_partials(u)?;
    if !metric.is_standard() {
        for v in &mut vs {
            metric.to_metric_frame(v);
        }
    }
    let xi = PVector::wedge_all(s.n(), &vs)?;
    let d = match kind {
        Density::Riemannian => norm(&xi),
        Density::Vertical => xi.vertical_norm(),
    };
    Ok((x, d))
}

/// `∫_U w(Φ(u)) · density(u) du`, with an optional weight expression in `x1..x_{2n+1}`.
pub fn surface_integral(
    s: &ParamSurface,
    kind: Density,
    metric: &MetricSpec,
    weight: Option<&Expr>,
    cfg: &IntegrationConfig,
) -> Result<MeasureReport> {
    metric.check_n(s.n())?;
    let f = |u: &[f64]| -> Result<f64> {
        let (x, d) = density_at(s, kind, metric, u)?;
        match weight {
            Some(w) => Ok(d * w.eval(&Env::new().with_x(&x))?),
            None => Ok(d),
        }
    };
    let q = integrate_box(f, s.domain(), &cfg.quad_options())?;
    Ok(MeasureReport::from_quad(q))
}

/// Riemannian `p`-volume of `Φ(U)` with respect to `metric`.
pub fn riemannian_volume(
    s: &ParamSurface,
    metric: &MetricSpec,
    cfg: &IntegrationConfig,
) -> Result<MeasureReport> {
    surface_integral(s, Density::Riemannian, metric, None, cfg)
}

/// Intrinsic spherical measure `∫_U |π_V(Φ_{u_1} ∧ .. ∧ Φ_{u_p})| du`, without any
/// dimensional normalization. Distances whose metric factor is not constant are
/// rejected, because the formula depends on that constancy.
pub fn spherical_measure(
    s: &ParamSurface,
    spec: &DistanceSpec,
    cfg: &IntegrationConfig,
) -> Result<MeasureReport> {
    if !spec.has_constant_metric_factor() {
        return Err(Error::NonConstantMetricFactor);
    }
    surface_integral(s, Density::Vertical, &MetricSpec::standard(s.n()), None, cfg)
}

/// Orthonormal basis of the subspace `{v : v ∧ τ = 0}` for a vertical simple `τ`,
/// returned with `Z` first.
pub fn vertical_subspace_basis(tau: &PVector) -> Result<Vec<Vec<f64>>> {
    let dim = tau.dim();
    let p = tau.degree();
    let scale = norm(tau);
    if p == 0 || scale == 0.0 {
        return Err(Error::NotSimple {
            expected: p,
            found: dim,
        });
    }
    if norm(&tau.horizontal_part()) > 1e-10 * scale {
        return Err(Error::NotVertical);
    }
    let kernel: Vec<Vec<f64>> = if p == dim {
        (0..dim)
            .map(|j| (0..dim).map(|k| if j == k { 1.0 } else { 0.0 }).collect())
            .collect()
    } else {
        let cols: Vec<PVector> = (0..dim)
            .map(|j| {
                let mut e = vec![0.0; dim];
                e[j] = 1.0;
                wedge(&PVector::vector(&e)?, tau)
            })
            .collect::<Result<_>>()?;
        let rows = cols[0].coeffs().len();
        let m = DMatrix::from_fn(rows, dim, |i, j| cols[j].coeffs()[i] / scale);
        let eig = SymmetricEigen::new(m.transpose() * &m);
        let top = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
        (0..dim)
            .filter(|&k| eig.eigenvalues[k] <= 1e-10 * top)
            .map(|k| eig.eigenvectors.column(k).iter().copied().collect())
            .collect()
    };
    if kernel.len() != p {
        return Err(Error::NotSimple {
            expected: p,
            found: kernel.len(),
        });
    }
    let mut basis = vec![{
        let mut z = vec![0.0; dim];
        z[dim - 1] = 1.0;
        z
    }];
    for v in kernel {
        let mut w = v;
        for b in &basis {
            let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
        let len = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-6 {
            basis.push(w.iter().map(|x| x / len).collect());
        }
    }
    if basis.len() != p {
        return Err(Error::NotVertical);
    }
    Ok(basis)
}

fn gram_schmidt(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for mut w in vs {
        for b in &out {
            let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
        let len = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.push(w.iter().map(|x| x / len).collect());
    }
    out
}

/// Metric factor `θ(τ)`: Euclidean `p`-measure of the slice of the unit ball by the
/// subspace of `τ`, in standard coordinates.
pub fn metric_factor(
    spec: &DistanceSpec,
    tau: &PVector,
    cfg: &IntegrationConfig,
) -> Result<MeasureReport> {
    metric_factor_in(spec, tau, &MetricSpec::standard(tau.n()), cfg)
}

/// Metric factor of `τ` (given in the standard frame) measured in the graded
/// coordinates of `metric`, where the subspace becomes `A⁻¹ L(τ)`.
pub fn metric_factor_in(
    spec: &DistanceSpec,
    tau: &PVector,
    metric: &MetricSpec,
    cfg: &IntegrationConfig,
) -> Result<MeasureReport> {
    cfg.validate()?;
    let n = tau.n();
    metric.check_n(n)?;
    let dim = 2 * n + 1;
    let p = tau.degree();
    let basis = vertical_subspace_basis(tau)?;
    let (rh, rv) = spec.unit_ball_bounds(n);
    let (basis, half): (Vec<Vec<f64>>, Vec<f64>) = if metric.is_standard() {
        let mut half = vec![1.1 * rh; p];
        half[0] = 1.1 * rv;
        (basis, half)
    } else {
        let mapped = basis
            .iter()
            .map(|b| {
                let mut y = vec![0.0; dim];
                metric.apply_inverse(b, &mut y);
                y
            })
            .collect();
        let inv = metric.matrix().try_inverse().ok_or(Error::ZeroLambda)?;
        let radius = 1.1 * inv.norm() * rh.hypot(rv);
        (gram_schmidt(mapped), vec![radius; p])
    };
    let domain = BoxDomain::new(half.iter().map(|h| -h).collect(), half)?;
    let indicator = |w: &[f64]| -> f64 {
        let mut y = vec![0.0; dim];
        for (wi, b) in w.iter().zip(&basis) {
            for (yk, bk) in y.iter_mut().zip(b) {
                *yk += wi * bk;
            }
        }
        let x = if metric.is_standard() {
            y
        } else {
            let mut x = vec![0.0; dim];
            metric.apply(&y, &mut x);
            x
        };
        if spec.gauge(&x) < 1.0 {
            1.0
        } else {
            0.0
        }
    };
    let (r, method) = cfg.monte_carlo(indicator, &domain, cfg.seed);
    Ok(MeasureReport::from_mc(r, method))
}

/// Lebesgue volume of the unit ball in the graded coordinates of `metric`.
pub fn ball_volume(
    spec: &DistanceSpec,
    n: usize,
    metric: &MetricSpec,
    cfg: &IntegrationConfig,
) -> Result<MeasureReport> {
    cfg.validate()?;
    metric.check_n(n)?;
    let dim = 2 * n + 1;
    let (rh, rv) = spec.unit_ball_bounds(n);
    let (rh, rv) = (1.05 * rh, 1.05 * rv);
    let l = metric.lambda().abs();
    let hi: Vec<f64> = (0..dim)
        .map(|j| {
            if j < 2 * n {
                rh + metric.a()[j].abs() * rv / l
            } else {
                rv / l
            }
        })
        .collect();
    let domain = BoxDomain::new(hi.iter().map(|h| -h).collect(), hi)?;
    let indicator = |y: &[f64]| -> f64 {
        let mut x = vec![0.0; dim];
        metric.apply(y, &mut x);
        if spec.gauge(&x) < 1.0 {
            1.0
        } else {
            0.0
        }
    };
    let (r, method) = cfg.monte_carlo(indicator, &domain, cfg.seed);
    Ok(MeasureReport::from_mc(r, method))
}

/// Normalized intrinsic integral `∫_Σ |τ_{Σ,V}| dvol_p / vol_{2n+1}(B_1)` under
/// `metric` and under the standard metric, as `(rescaled, standard)`.
///
/// The two ball volumes are estimated with different random streams, so the two
/// values are independent estimates unless the metric is the standard one.
pub fn rescaled_measure_invariance(
    s: &ParamSurface,
    metric: &MetricSpec,
    spec: &DistanceSpec,
    cfg: &IntegrationConfig,
) -> Result<(MeasureReport, MeasureReport)> {
    let n = s.n();
    let standard = MetricSpec::standard(n);
    let normalized = |m: &MetricSpec, seed: u64| -> Result<MeasureReport> {
        let integral = surface_integral(s, Density::Vertical, m, None, cfg)?;
        let ball = ball_volume(spec, n, m, &cfg.with_seed(seed))?;
        let value = integral.value / ball.value;
        let rel = integral.relative_error().hypot(ball.relative_error());
        Ok(MeasureReport {
            value,
            error_estimate: value.abs() * rel,
            method: ball.method,
            samples_or_nodes: integral.samples_or_nodes + ball.samples_or_nodes,
            converged: integral.converged && ball.converged,
        })
    };
    let base = normalized(&standard, cfg.seed)?;
    let rescaled = if metric.is_standard() {
        base
    } else {
        normalized(metric, cfg.seed ^ 0x9e37_79b9_7f4a_7c15)?
    };
    Ok((rescaled, base))
}

struct AdaptedChart {
    u0: Vec<f64>,
    x0: Vec<f64>,
    /// Columns: `r`-scaled directions then the `r²`-scaled one.
    dirs: Vec<Vec<f64>>,
    speed: f64,
}

impl AdaptedChart {
    fn new(s: &ParamSurface, u0: &[f64]) -> Result<Self> {
        let n = s.n();
        let p = s.p();
        if s.is_characteristic(u0, CHARACTERISTIC_TOL)? {
            return Err(Error::CharacteristicPoint);
        }
        let (x0, vs) = s.frame_partials(u0)?;
        let v: Vec<f64> = vs.iter().map(|h| h[2 * n]).collect();
        let speed = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        // orthonormal complement of v, then v/|v|²
        let mut cand: Vec<Vec<f64>> = vec![v.iter().map(|c| c / speed).collect()];
        for k in 0..p {
            let mut e = vec![0.0; p];
            e[k] = 1.0;
            cand.push(e);
        }
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        for mut w in cand {
            for b in &ortho {
                let c: f64 = w.iter().zip(b).map(|(x, y)| x * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
            let len = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len > 1e-8 && ortho.len() < p {
                ortho.push(w.iter().map(|x| x / len).collect());
            }
        }
        let mut dirs: Vec<Vec<f64>> = ortho[1..].to_vec();
        dirs.push(v.iter().map(|c| c / (speed * speed)).collect());
        Ok(Self {
            u0: u0.to_vec(),
            x0,
            dirs,
            speed,
        })
    }

    fn u(&self, w: &[f64], r: f64) -> Vec<f64> {
        let p = w.len();
        let mut u = self.u0.clone();
        for (i, (wi, d)) in w.iter().zip(&self.dirs).enumerate() {
            let s = if i + 1 == p { r * r } else { r };
            for (uk, dk) in u.iter_mut().zip(d) {
                *uk += s * wi * dk;
            }
        }
        u
    }
}

/// `vol_p(Σ ∩ B(Φ(u0), r)) / r^{p+1}`.
///
/// The ball preimage is integrated in coordinates adapted to the point: `r`-scaled
/// along the parameter directions with horizontal image and `r²`-scaled along the
/// remaining one, which keeps the integration region bounded as `r → 0`.
pub fn blowup_quotient(
    s: &ParamSurface,
    u0: &[f64],
    r: f64,
    spec: &DistanceSpec,
    cfg: &IntegrationConfig,
) -> Result<MeasureReport> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::NonPositiveDilation(r));
    }
    cfg.validate()?;
    let chart = AdaptedChart::new(s, u0)?;
    let p = s.p();
    let n = s.n();
    let dim = 2 * n + 1;
    let standard = MetricSpec::standard(n);
    let rel_gauge = |w: &[f64]| -> Result<Option<f64>> {
        let u = chart.u(w, r);
        if !s.domain().contains(&u) {
            return Ok(None);
        }
        let x = s.point(&u)?;
        let mut q = vec![0.0; dim];
        left_quotient_into(n, &chart.x0, &x, &mut q);
        Ok(Some(spec.gauge(&q) / r))
    };

    // Bounding box of the region from ray bisection.
    let dirs = ray_directions(p);
    let mut half = vec![0.0f64; p];
    for e in &dirs {
        let at = |t: f64| -> Vec<f64> { e.iter().map(|c| c * t).collect() };
        let mut t_in = 0.0;
        let mut t = 0.25;
        let t_out = loop {
            match rel_gauge(&at(t))? {
                None => return Err(Error::BallTouchesBoundary),
                Some(g) if g >= 1.0 => break t,
                Some(_) => {
                    t_in = t;
                    t *= 2.0;
                    if t > 1e6 {
                        return Err(Error::BallTouchesBoundary);
                    }
                }
            }
        };
        let (mut a, mut b) = (t_in, t_out);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            match rel_gauge(&at(m))? {
                Some(g) if g < 1.0 => a = m,
                Some(_) => b = m,
                None => return Err(Error::BallTouchesBoundary),
            }
        }
        for (h, c) in half.iter_mut().zip(e) {
            *h = h.max((c * b).abs());
        }
    }
    // Pad the box so boundary cells are classified with margin, as far as the
    // parameter domain allows.
    let fits = |half: &[f64]| {
        (0..1usize << p).all(|corner| {
            let w: Vec<f64> = (0..p)
                .map(|k| if corner & (1 << k) == 0 { -half[k] } else { half[k] })
                .collect();
            s.domain().contains(&chart.u(&w, r))
        })
    };
    let half = [1.5, 1.25, 1.1, 1.02]
        .iter()
        .map(|pad| half.iter().map(|h| pad * h).collect::<Vec<f64>>())
        .find(|h| fits(h))
        .ok_or(Error::BallTouchesBoundary)?;
    let domain = BoxDomain::new(half.iter().map(|h| -h).collect(), half.clone())?;
    let speed = chart.speed;
    let density = |w: &[f64]| -> Result<f64> {
        let u = chart.u(w, r);
        Ok(density_at(s, Density::Riemannian, &standard, &u)?.1 / speed)
    };
    let inside = |w: &[f64]| -> Result<bool> {
        Ok(matches!(rel_gauge(w)?, Some(g) if g < 1.0))
    };
    let q = integrate_region(density, inside, &domain, &cfg.region_options())?;
    Ok(MeasureReport::from_quad(q))
}

fn ray_directions(p: usize) -> Vec<Vec<f64>> {
    match p {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..256)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 256.0;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xd1ec);
            let mut out: Vec<Vec<f64>> = (0..p)
                .flat_map(|k| {
                    let mut e = vec![0.0; p];
                    e[k] = 1.0;
                    let mut f = e.clone();
                    f[k] = -1.0;
                    [e, f]
                })
                .collect();
            out.extend((0..1024).map(|_| crate::distance::random_unit(&mut rng, p)));
            out
        }
    }
}

/// The blow-up limit `θ(τ_V/|τ_V|) / |τ_V|` predicted at a transverse point.
pub fn blowup_limit(
    s: &ParamSurface,
    u0: &[f64],
    spec: &DistanceSpec,
    cfg: &IntegrationConfig,
) -> Result<MeasureReport> {
    if s.is_characteristic(u0, CHARACTERISTIC_TOL)? {
        return Err(Error::CharacteristicPoint);
    }
    let tv = s.vertical_tangent(u0)?;
    let len = norm(&tv);
    let theta = metric_factor(spec, &tv.scale(1.0 / len), cfg)?;
    Ok(MeasureReport {
        value: theta.value / len,
        error_estimate: theta.error_estimate / len,
        ..theta
    })
}
