//! TOML job configuration.

use std::path::PathBuf;

use heisenmeasure_core::{
    parse, BoxDomain, DistanceSpec, Expr, IntegrationConfig, MetricSpec, PVector, ParamSurface,
    ScalarMap, Var,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Measure,
    Volume,
    Blowup,
    MetricFactor,
    Coarea,
    Catalog,
    BracketCheck,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Measure => "measure",
            Task::Volume => "volume",
            Task::Blowup => "blowup",
            Task::MetricFactor => "metric-factor",
            Task::Coarea => "coarea",
            Task::Catalog => "catalog",
            Task::BracketCheck => "bracket-check",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub task: Option<Task>,
    /// Group parameter of `H^n`.
    #[serde(default = "one")]
    pub n: usize,
    pub seed: Option<u64>,
    /// Relative tolerance for comparisons against `expected`.
    pub tolerance: Option<f64>,
    pub expected: Option<f64>,
    pub surface: Option<SurfaceConfig>,
    pub distance: Option<DistanceConfig>,
    pub metric: Option<MetricConfig>,
    pub integration: Option<IntegrationConfig>,
    pub blowup: Option<BlowupConfig>,
    pub tau: Option<TauConfig>,
    pub coarea: Option<CoareaConfig>,
    pub output: Option<PathBuf>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    /// `2n + 1` component expressions in `u1..up`.
    pub components: Vec<String>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    Koranyi,
    Max,
    Radial,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceConfig {
    pub kind: DistanceKind,
    /// Profile in `s = |x̃|` and `t`, required for `radial`.
    pub profile: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricConfig {
    pub lambda: f64,
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupConfig {
    pub u0: Vec<f64>,
    pub radii: Vec<f64>,
}

/// A vertical simple p-vector, given as a blade of 1-based frame indices (`Z` is
/// `2n + 1`) or as a list of spanning vectors in frame components.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauConfig {
    pub blade: Option<Vec<usize>>,
    pub vectors: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoareaConfig {
    /// Components of `f` in `x1..x_{2n+1}`.
    pub map: Vec<String>,
    /// Level-set chart in `u1..up` and `t1..tk`.
    pub chart: Vec<String>,
    pub chart_lo: Vec<f64>,
    pub chart_hi: Vec<f64>,
    pub t_lo: Vec<f64>,
    pub t_hi: Vec<f64>,
    pub region_lo: Vec<f64>,
    pub region_hi: Vec<f64>,
    /// Weight in `x1..x_{2n+1}`; defaults to 1.
    pub weight: Option<String>,
    #[serde(default)]
    pub riemannian: bool,
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn integration(&self) -> IntegrationConfig {
        let mut cfg = self.integration.clone().unwrap_or_default();
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg
    }

    pub fn effective_seed(&self) -> u64 {
        self.integration().seed
    }

    pub fn require<'a, T>(&self, field: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        field.as_ref().ok_or_else(|| {
            CliError::Config(format!(
                "task `{}` requires a [{name}] section",
                self.task.map_or("?", Task::name)
            ))
        })
    }

    pub fn distance_spec(&self) -> Result<DistanceSpec, CliError> {
        let Some(d) = &self.distance else {
            return Ok(DistanceSpec::Koranyi);
        };
        match d.kind {
            DistanceKind::Koranyi => Ok(DistanceSpec::Koranyi),
            DistanceKind::Max => Ok(DistanceSpec::MaxDist),
            DistanceKind::Radial => {
                let text = d.profile.as_deref().ok_or_else(|| {
                    CliError::Config("distance.profile is required for kind = \"radial\"".into())
                })?;
                let expr = parse_expr("distance.profile", text, &[Var::S, Var::T(0)])?;
                DistanceSpec::radial_expr(expr).map_err(CliError::from_core)
            }
        }
    }

    pub fn metric_spec(&self) -> Result<MetricSpec, CliError> {
        match &self.metric {
            None => Ok(MetricSpec::standard(self.n)),
            Some(m) => {
                if m.a.len() != 2 * self.n {
                    return Err(CliError::Config(format!(
                        "metric.a must have {} entries, got {}",
                        2 * self.n,
                        m.a.len()
                    )));
                }
                MetricSpec::new(m.lambda, m.a.clone()).map_err(CliError::from_core)
            }
        }
    }

    pub fn surface(&self) -> Result<ParamSurface, CliError> {
        let s = self.require(&self.surface, "surface")?;
        let domain = domain("surface", &s.lo, &s.hi)?;
        let vars = Var::params(domain.dim());
        let exprs = s
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| parse_expr(&format!("surface.components[{i}]"), c, &vars))
            .collect::<Result<Vec<_>, _>>()?;
        ParamSurface::new(self.n, exprs, domain).map_err(CliError::from_core)
    }

    pub fn tau(&self) -> Result<PVector, CliError> {
        let t = self.require(&self.tau, "tau")?;
        let dim = 2 * self.n + 1;
        match (&t.blade, &t.vectors) {
            (Some(b), None) => {
                if b.iter().any(|&i| i == 0 || i > dim) {
                    return Err(CliError::Config(format!(
                        "tau.blade indices must lie in 1..={dim}"
                    )));
                }
                PVector::blade(self.n, b).map_err(CliError::from_core)
            }
            (None, Some(v)) => {
                if v.iter().any(|c| c.len() != dim) {
                    return Err(CliError::Config(format!(
                        "tau.vectors entries must have {dim} components"
                    )));
                }
                PVector::wedge_all(self.n, v).map_err(CliError::from_core)
            }
            _ => Err(CliError::Config(
                "tau needs exactly one of `blade` or `vectors`".into(),
            )),
        }
    }

    pub fn coarea_parts(&self) -> Result<CoareaParts, CliError> {
        let c = self.require(&self.coarea, "coarea")?;
        let xs = Var::coords(2 * self.n + 1);
        let map = c
            .map
            .iter()
            .enumerate()
            .map(|(i, m)| parse_expr(&format!("coarea.map[{i}]"), m, &xs))
            .collect::<Result<Vec<_>, _>>()?;
        let k = map.len();
        let map = ScalarMap::new(self.n, map).map_err(CliError::from_core)?;
        let chart_domain = domain("coarea.chart", &c.chart_lo, &c.chart_hi)?;
        let t_domain = domain("coarea.t", &c.t_lo, &c.t_hi)?;
        let region = domain("coarea.region", &c.region_lo, &c.region_hi)?;
        let mut vars = Var::params(chart_domain.dim());
        vars.extend((0..k).map(Var::T));
        let chart = c
            .chart
            .iter()
            .enumerate()
            .map(|(i, s)| parse_expr(&format!("coarea.chart[{i}]"), s, &vars))
            .collect::<Result<Vec<_>, _>>()?;
        let weight = match &c.weight {
            Some(w) => parse_expr("coarea.weight", w, &xs)?,
            None => Expr::constant(1.0),
        };
        Ok(CoareaParts {
            map,
            chart,
            chart_domain,
            t_domain,
            region,
            weight,
            riemannian: c.riemannian,
        })
    }
}

pub struct CoareaParts {
    pub map: ScalarMap,
    pub chart: Vec<Expr>,
    pub chart_domain: BoxDomain,
    pub t_domain: BoxDomain,
    pub region: BoxDomain,
    pub weight: Expr,
    pub riemannian: bool,
}

fn domain(field: &str, lo: &[f64], hi: &[f64]) -> Result<BoxDomain, CliError> {
    BoxDomain::new(lo.to_vec(), hi.to_vec())
        .map_err(|e| CliError::Config(format!("{field}: {e}")))
}

/// Parses an expression, rendering a caret under the failing position on error.
pub fn parse_expr(field: &str, text: &str, vars: &[Var]) -> Result<Expr, CliError> {
    parse(text, vars).map_err(|e| {
        let col = text.char_indices().take_while(|(i, _)| *i < e.offset()).count();
        CliError::Config(format!(
            "{field}: {e}\n  {text}\n  {}^",
            " ".repeat(col)
        ))
    })
}
