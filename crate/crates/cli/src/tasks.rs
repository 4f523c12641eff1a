//! Job tasks.

use heisenmeasure_core::catalog::{self, PARABOLOID3_DENSITY, PARABOLOID_DENSITY};
use heisenmeasure_core::multivec::MAX_N;
use heisenmeasure_core::quadrature::{integrate_box, QuadOptions};
use heisenmeasure_core::{
    blowup_limit, blowup_quotient, bracket_table_violations, coarea_check, metric_factor,
    rescaled_measure_invariance, riemannian_coarea_check, riemannian_volume, spherical_measure,
    BoxDomain, DistanceSpec, Env, Expr, IntegrationConfig, LevelSetFamily, MeasureReport,
    PVector, ParamSurface, CHARACTERISTIC_TOL,
};
use serde_json::{json, Value};

use crate::config::{JobConfig, Task};
use crate::error::CliError;
use crate::report::Check;

/// Closed-form comparisons are relative; Monte Carlo ones use this many standard errors.
pub const CLOSED_FORM_REL_TOL: f64 = 1e-6;
pub const MC_SIGMAS: f64 = 3.0;
pub const BLOWUP_REL_TOL: f64 = 0.02;
pub const COAREA_REL_TOL: f64 = 5e-3;
const INTEGRAND_TOL: f64 = 1e-10;

pub struct TaskOutput {
    pub value: f64,
    pub error_estimate: f64,
    pub checks: Vec<Check>,
    pub details: Option<Value>,
}

pub fn run_task(task: Task, job: &JobConfig) -> Result<TaskOutput, CliError> {
    let cfg = job.integration();
    cfg.validate()?;
    match task {
        Task::Measure => measure(job, &cfg),
        Task::Volume => volume(job, &cfg),
        Task::Blowup => blowup(job, &cfg),
        Task::MetricFactor => metric_factor_task(job, &cfg),
        Task::Coarea => coarea(job, &cfg),
        Task::Catalog => catalog_task(&cfg, job.tolerance.unwrap_or(CLOSED_FORM_REL_TOL)),
        Task::BracketCheck => Ok(bracket_check()),
    }
}

fn report_details(r: &MeasureReport) -> Value {
    json!({ "method": r.method, "samples_or_nodes": r.samples_or_nodes })
}

fn with_expected(job: &JobConfig, checks: &mut Vec<Check>, got: f64, default_rel: f64) {
    if let Some(e) = job.expected {
        checks.push(Check::relative(
            "value matches expected",
            e,
            got,
            job.tolerance.unwrap_or(default_rel),
        ));
    }
}

fn measure(job: &JobConfig, cfg: &IntegrationConfig) -> Result<TaskOutput, CliError> {
    let s = job.surface()?;
    let spec = job.distance_spec()?;
    let r = spherical_measure(&s, &spec, cfg)?;
    let mut checks = vec![Check::flag("quadrature converged", r.converged)];
    with_expected(job, &mut checks, r.value, CLOSED_FORM_REL_TOL);
    Ok(TaskOutput {
        value: r.value,
        error_estimate: r.error_estimate,
        checks,
        details: Some(report_details(&r)),
    })
}

fn volume(job: &JobConfig, cfg: &IntegrationConfig) -> Result<TaskOutput, CliError> {
    let s = job.surface()?;
    let metric = job.metric_spec()?;
    let r = riemannian_volume(&s, &metric, cfg)?;
    let mut checks = vec![Check::flag("quadrature converged", r.converged)];
    with_expected(job, &mut checks, r.value, CLOSED_FORM_REL_TOL);
    let mut details = report_details(&r);
    if !metric.is_standard() {
        let spec = job.distance_spec()?;
        let (rescaled, standard) = rescaled_measure_invariance(&s, &metric, &spec, cfg)?;
        let tol = MC_SIGMAS * rescaled.error_estimate.hypot(standard.error_estimate);
        checks.push(Check::within(
            "normalized intrinsic integral invariant under metric rescaling",
            standard.value,
            rescaled.value,
            tol,
        ));
        details["normalized_rescaled"] = json!(rescaled.value);
        details["normalized_standard"] = json!(standard.value);
    }
    Ok(TaskOutput {
        value: r.value,
        error_estimate: r.error_estimate,
        checks,
        details: Some(details),
    })
}

fn blowup(job: &JobConfig, cfg: &IntegrationConfig) -> Result<TaskOutput, CliError> {
    let b = job.require(&job.blowup, "blowup")?;
    if b.radii.is_empty() {
        return Err(CliError::Config("blowup.radii must not be empty".into()));
    }
    let s = job.surface()?;
    let spec = job.distance_spec()?;
    // the limit theorem needs a transverse point; characteristic ones are flagged
    if s.is_characteristic(&b.u0, CHARACTERISTIC_TOL)? {
        return Err(CliError::Config(format!(
            "blowup.u0 = {:?} is a characteristic point; blow-up quotients need a transverse point",
            b.u0
        )));
    }
    let quotients = b
        .radii
        .iter()
        .map(|&r| blowup_quotient(&s, &b.u0, r, &spec, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let last = *quotients.last().expect("radii checked non-empty");
    let limit = blowup_limit(&s, &b.u0, &spec, cfg)?;
    let series: Vec<Value> = b
        .radii
        .iter()
        .zip(&quotients)
        .map(|(r, q)| json!({ "r": r, "quotient": q.value, "error": q.error_estimate }))
        .collect();
    let rel = job.tolerance.unwrap_or(BLOWUP_REL_TOL);
    let noise = |q: &MeasureReport| MC_SIGMAS * (q.error_estimate + limit.error_estimate);
    let increases = quotients
        .windows(2)
        .filter(|w| {
            (w[1].value - limit.value).abs()
                > (w[0].value - limit.value).abs() + noise(&w[0]) + noise(&w[1])
        })
        .count();
    let checks = vec![
        Check::relative(
            "quotient at smallest radius near theta/|tau_V|",
            limit.value,
            last.value,
            rel,
        ),
        Check::within("gap to limit non-increasing up to noise", 0.0, increases as f64, 0.0),
    ];
    let details = json!({
        "limit": limit.value,
        "limit_error": limit.error_estimate,
        "series": series,
    });
    Ok(TaskOutput {
        value: last.value,
        error_estimate: last.error_estimate,
        checks,
        details: Some(details),
    })
}

fn metric_factor_task(job: &JobConfig, cfg: &IntegrationConfig) -> Result<TaskOutput, CliError> {
    let tau = job.tau()?;
    let spec = job.distance_spec()?;
    let r = metric_factor(&spec, &tau, cfg)?;
    let mut checks = Vec::new();
    if let Some(e) = job.expected {
        checks.push(Check::within(
            "value within 3 standard errors of expected",
            e,
            r.value,
            MC_SIGMAS * r.error_estimate,
        ));
    }
    Ok(TaskOutput {
        value: r.value,
        error_estimate: r.error_estimate,
        checks,
        details: Some(report_details(&r)),
    })
}

fn coarea(job: &JobConfig, cfg: &IntegrationConfig) -> Result<TaskOutput, CliError> {
    let parts = job.coarea_parts()?;
    let center = parts.t_domain.center();
    let chart = ParamSurface::new_family(job.n, parts.chart, parts.chart_domain, &center)?;
    let family = LevelSetFamily::new(parts.map, chart, parts.t_domain, parts.region)?;
    let (lhs, rhs) = if parts.riemannian {
        riemannian_coarea_check(&family, &parts.weight, cfg)?
    } else {
        coarea_check(&family, &parts.weight, cfg)?
    };
    let rel = job.tolerance.unwrap_or(COAREA_REL_TOL);
    let mut checks = vec![
        Check::flag("quadrature converged", lhs.converged && rhs.converged),
        Check::relative("coarea sides agree", lhs.value, rhs.value, rel),
    ];
    if let Some(e) = job.expected {
        checks.push(Check::relative("left side matches expected", e, lhs.value, rel));
        checks.push(Check::relative("right side matches expected", e, rhs.value, rel));
    }
    Ok(TaskOutput {
        value: lhs.value,
        error_estimate: lhs.error_estimate,
        checks,
        details: Some(json!({
            "lhs": lhs.value,
            "lhs_error": lhs.error_estimate,
            "rhs": rhs.value,
            "rhs_error": rhs.error_estimate,
        })),
    })
}

fn bracket_check() -> TaskOutput {
    let mut total = 0usize;
    let checks = (1..=MAX_N)
        .map(|n| {
            let bad = bracket_table_violations(n).len();
            total += bad;
            Check::within(format!("frame brackets in H^{n}"), 0.0, bad as f64, 0.0)
        })
        .collect();
    TaskOutput {
        value: total as f64,
        error_estimate: 0.0,
        checks,
        details: None,
    }
}

/// Largest deviation between the computed intrinsic density and a closed form on a
/// regular grid of the domain.
fn integrand_gap(s: &ParamSurface, closed_form: &Expr, per_axis: usize) -> Result<f64, CliError> {
    let p = s.p();
    let mut worst = 0f64;
    for i in 0..per_axis.pow(p as u32) {
        let unit: Vec<f64> = (0..p)
            .map(|a| ((i / per_axis.pow(a as u32)) % per_axis) as f64 / (per_axis - 1) as f64)
            .collect();
        let u = s.domain().map_unit(&unit);
        let want = closed_form.eval(&Env::new().with_u(&u))?;
        worst = worst.max((s.vertical_density(&u)? - want).abs());
    }
    Ok(worst)
}

fn square(lo: f64, hi: f64, p: usize) -> Result<BoxDomain, CliError> {
    Ok(BoxDomain::new(vec![lo; p], vec![hi; p])?)
}

fn catalog_task(cfg: &IntegrationConfig, rel: f64) -> Result<TaskOutput, CliError> {
    let mut checks = Vec::new();

    let paraboloid = catalog::paraboloid(square(-2.0, 2.0, 2)?)?;
    let gap = integrand_gap(&paraboloid, &catalog::density(PARABOLOID_DENSITY, 2)?, 21)?;
    checks.push(Check::within(
        format!("paraboloid-h1 integrand {PARABOLOID_DENSITY}"),
        0.0,
        gap,
        INTEGRAND_TOL,
    ));
    let unit = catalog::paraboloid(BoxDomain::unit(2))?;
    let headline = spherical_measure(&unit, &DistanceSpec::Koranyi, cfg)?;
    checks.push(Check::relative(
        "paraboloid-h1 measure over (0,1)^2",
        2f64.sqrt() * catalog::unit_square_radius_integral(),
        headline.value,
        rel,
    ));

    for (a1, a2, b, c) in [(1.0, 1.0, 0.0, 0.0), (1.5, -0.5, 0.3, 2.0)] {
        let plane = catalog::hyperplane(a1, a2, b, c, square(-1.0, 1.0, 2)?)?;
        let text = catalog::hyperplane_density(a1, a2, b, c);
        let closed = catalog::density(&text, 2)?;
        let gap = integrand_gap(&plane, &closed, 21)?;
        checks.push(Check::within(
            format!("hyperplane-h1 (a1={a1}, a2={a2}, b={b}, c={c}) integrand {text}"),
            0.0,
            gap,
            INTEGRAND_TOL,
        ));
        // the closed-form integrand integrated on its own is an independent route
        let direct = integrate_box(
            |u: &[f64]| closed.eval(&Env::new().with_u(u)),
            plane.domain(),
            &QuadOptions::default(),
        )?;
        let m = spherical_measure(&plane, &DistanceSpec::Koranyi, cfg)?;
        checks.push(Check::relative(
            format!("hyperplane-h1 (a1={a1}, a2={a2}, b={b}, c={c}) measure over (-1,1)^2"),
            direct.value,
            m.value,
            rel,
        ));
    }

    let p3 = catalog::paraboloid3(square(-1.5, 1.5, 3)?)?;
    let gap = integrand_gap(&p3, &catalog::density(PARABOLOID3_DENSITY, 3)?, 9)?;
    checks.push(Check::within(
        format!("paraboloid3-h2 integrand {PARABOLOID3_DENSITY}"),
        0.0,
        gap,
        INTEGRAND_TOL,
    ));

    for (a, b, alpha, beta) in [(1.0, 2.0, 0.0, 1.0), (-0.7, 0.4, -1.0, 2.5), (0.0, -3.0, 0.5, 1.0)] {
        let line = catalog::line(a, b, alpha, beta)?;
        let m = spherical_measure(&line, &DistanceSpec::MaxDist, cfg)?;
        checks.push(Check::within(
            format!("line a={a} b={b} on [{alpha}, {beta}] measure"),
            catalog::line_measure(b, alpha, beta),
            m.value,
            INTEGRAND_TOL,
        ));
    }

    let x1z = PVector::blade(1, &[1, 3])?;
    let theta_max = metric_factor(&DistanceSpec::MaxDist, &x1z, cfg)?;
    checks.push(Check::within(
        "metric factor max-distance X1^Z",
        4.0,
        theta_max.value,
        MC_SIGMAS * theta_max.error_estimate,
    ));
    let theta_k = metric_factor(&DistanceSpec::Koranyi, &x1z, cfg)?;
    let slice = integrate_box(
        |s: &[f64]| Ok(0.5 * (1.0 - s[0].powi(4)).max(0.0).sqrt()),
        &BoxDomain::new(vec![-1.0], vec![1.0])?,
        &QuadOptions {
            rel_tol: 1e-12,
            ..QuadOptions::default()
        },
    )?;
    checks.push(Check::within(
        "metric factor koranyi X1^Z",
        slice.value,
        theta_k.value,
        MC_SIGMAS * theta_k.error_estimate + slice.error,
    ));

    let vertical = ParamSurface::parse(1, &["0", "0", "u1"], BoxDomain::new(vec![-1.0], vec![1.0])?)?;
    for r in [0.5, 0.1] {
        let q = blowup_quotient(&vertical, &[0.0], r, &DistanceSpec::MaxDist, cfg)?;
        checks.push(Check::within(
            format!("vertical line blow-up quotient max-distance r={r}"),
            2.0,
            q.value,
            1e-9,
        ));
    }

    Ok(TaskOutput {
        value: headline.value,
        error_estimate: headline.error_estimate,
        checks,
        details: None,
    })
}
