//! Homogeneous distances on `H^n`.
//!
//! Every distance is stored through its gauge `ρ(x) = ρ(0, x)` and extended by
//! left invariance, `ρ(x, y) = ρ(x^{-1}·y)`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{Env, Expr};
use crate::group::{left_quotient_into, GroupPoint};

type ProfileFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type GaugeFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

const VALIDATION_SAMPLES: usize = 1000;
const VALIDATION_TOL: f64 = 1e-9;
const VALIDATION_SEED: u64 = 0x5eed_d157;

/// A homogeneous distance.
#[derive(Clone)]
pub enum DistanceSpec {
    /// Korányi gauge `(|x̃|⁴ + 16 x_{2n+1}²)^{1/4}`.
    Koranyi,
    /// `max(|x̃|, |x_{2n+1}|^{1/2})`.
    MaxDist,
    /// A user profile `N(|x̃|, x_{2n+1})`.
    RadialProfile { name: String, profile: ProfileFn },
    /// A gauge depending on all coordinates. Its metric factor is in general
    /// not constant, so measure formulas reject it.
    General { name: String, gauge: GaugeFn },
}

impl fmt::Debug for DistanceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Koranyi => write!(f, "Koranyi"),
            Self::MaxDist => write!(f, "MaxDist"),
            Self::RadialProfile { name, .. } => write!(f, "RadialProfile({name})"),
            Self::General { name, .. } => write!(f, "General({name})"),
        }
    }
}

impl DistanceSpec {
    /// Builds a radial-profile distance after sampling homogeneity and positivity.
    pub fn radial<F>(name: impl Into<String>, profile: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        let spec = Self::RadialProfile {
            name: name.into(),
            profile: Arc::new(profile),
        };
        spec.validate(1)?;
        Ok(spec)
    }

    /// Radial profile from an expression in `s = |x̃|` and `t = x_{2n+1}`.
    pub fn radial_expr(expr: Expr) -> Result<Self> {
        let name = expr.to_string();
        Self::radial(name, move |s, t| {
            expr.eval(&Env::new().with_s(s).with_t(&[t]))
                .unwrap_or(f64::NAN)
        })
    }

    /// A gauge on full coordinates, validated on `H^n` for the given `n`.
    pub fn general<F>(name: impl Into<String>, n: usize, gauge: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let spec = Self::General {
            name: name.into(),
            gauge: Arc::new(gauge),
        };
        spec.validate(n)?;
        Ok(spec)
    }

    pub fn name(&self) -> String {
        match self {
            Self::Koranyi => "koranyi".into(),
            Self::MaxDist => "max".into(),
            Self::RadialProfile { name, .. } => format!("radial:{name}"),
            Self::General { name, .. } => format!("general:{name}"),
        }
    }

    /// Radial gauges depend only on `(|x̃|, x_{2n+1})`, which makes their metric
    /// factor constant on vertical simple p-vectors.
    pub fn has_constant_metric_factor(&self) -> bool {
        !matches!(self, Self::General { .. })
    }

    /// `ρ(0, x)` on raw standard coordinates.
    #[inline]
    pub fn gauge(&self, x: &[f64]) -> f64 {
        let t = x.len() - 1;
        match self {
            Self::Koranyi => {
                let h2: f64 = x[..t].iter().map(|v| v * v).sum();
                (h2 * h2 + 16.0 * x[t] * x[t]).sqrt().sqrt()
            }
            Self::MaxDist => {
                let h2: f64 = x[..t].iter().map(|v| v * v).sum();
                h2.sqrt().max(x[t].abs().sqrt())
            }
            Self::RadialProfile { profile, .. } => {
                let h2: f64 = x[..t].iter().map(|v| v * v).sum();
                profile(h2.sqrt(), x[t])
            }
            Self::General { gauge, .. } => gauge(x),
        }
    }

    /// `ρ(x, y) = ρ(0, x^{-1}·y)`.
    pub fn distance(&self, x: &GroupPoint, y: &GroupPoint) -> Result<f64> {
        if x.n() != y.n() {
            return Err(Error::DimensionMismatch {
                expected: x.dim(),
                got: y.dim(),
            });
        }
        let mut q = vec![0.0; x.dim()];
        left_quotient_into(x.n(), x.coords(), y.coords(), &mut q);
        let d = self.gauge(&q);
        if !d.is_finite() {
            let t = q[q.len() - 1];
            let s = q[..q.len() - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
            return Err(Error::NonFiniteProfile { s, t });
        }
        Ok(d)
    }

    /// Half-widths `(R_h, R_v)` of a box `{|x̃| ≤ R_h, |x_{2n+1}| ≤ R_v}` that
    /// contains the unit ball of `H^n`.
    pub fn unit_ball_bounds(&self, n: usize) -> (f64, f64) {
        match self {
            Self::Koranyi => (1.0, 0.25),
            Self::MaxDist => (1.0, 1.0),
            _ => {
                // ρ ≥ m·d_∞ with m the minimum of ρ on the d_∞ unit sphere, so the
                // unit ball sits inside the d_∞ ball of radius 1/m.
                let m = self.min_on_max_sphere(n) * 0.9;
                let r = 1.0 / m;
                (r, r * r)
            }
        }
    }

    fn min_on_max_sphere(&self, n: usize) -> f64 {
        let dim = 2 * n + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED ^ 0xba11);
        let mut x = vec![0.0; dim];
        let mut best = f64::INFINITY;
        for i in 0..20_000 {
            // alternate between the "side" |x̃| = 1 and the "caps" |t| = 1
            let dir = random_unit(&mut rng, 2 * n);
            if i % 2 == 0 {
                x[..2 * n].copy_from_slice(&dir);
                x[2 * n] = rng.random_range(-1.0..=1.0);
            } else {
                let rad = rng.random_range(0.0..=1.0f64);
                for (xi, di) in x[..2 * n].iter_mut().zip(&dir) {
                    *xi = rad * di;
                }
                x[2 * n] = if rng.random::<bool>() { 1.0 } else { -1.0 };
            }
            best = best.min(self.gauge(&x));
        }
        best
    }

    fn validate(&self, n: usize) -> Result<()> {
        let dim = 2 * n + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(VALIDATION_SEED);
        let zero = vec![0.0; dim];
        let g0 = self.gauge(&zero);
        if !(g0.abs() <= 1e-12) {
            return Err(Error::NotPositive(format!("gauge at the origin is {g0}")));
        }
        // random points almost never hit the axes, where profiles like `s` vanish
        for probe in [dim - 1, 0] {
            for sign in [1.0, -1.0] {
                let mut e = vec![0.0; dim];
                e[probe] = sign;
                let g = self.gauge(&e);
                if !(g > 0.0) || !g.is_finite() {
                    return Err(Error::NotPositive(format!("gauge({e:?}) = {g}")));
                }
            }
        }
        let mut x = vec![0.0; dim];
        let mut y = vec![0.0; dim];
        for _ in 0..VALIDATION_SAMPLES {
            for v in x.iter_mut() {
                *v = rng.random_range(-3.0..3.0);
            }
            let r: f64 = rng.random_range(0.1..10.0);
            for j in 0..dim - 1 {
                y[j] = r * x[j];
            }
            y[dim - 1] = r * r * x[dim - 1];
            let gx = self.gauge(&x);
            let gy = self.gauge(&y);
            if !gx.is_finite() || !gy.is_finite() {
                let s = x[..dim - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
                return Err(Error::NonFiniteProfile { s, t: x[dim - 1] });
            }
            if !(gx > 0.0) {
                return Err(Error::NotPositive(format!("gauge({x:?}) = {gx}")));
            }
            if (gy - r * gx).abs() > VALIDATION_TOL * (r * gx).max(1.0) {
                return Err(Error::NotHomogeneous(format!(
                    "gauge(δ_{r} x) = {gy}, r·gauge(x) = {}",
                    r * gx
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn random_unit<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| standard_normal(rng)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
