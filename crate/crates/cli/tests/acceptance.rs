//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Every expected value here is computed in this file from closed forms or from
//! small independent integrators, never read back from the library's catalog.

use std::process::Command;
use std::time::{Duration, Instant};

use heisenmeasure_core::{
    blowup_limit, blowup_quotient, bracket_table_violations, coarea_check, horizontal_normal,
    lie_bracket, metric_factor, ratio_identity_check, rescaled_measure_invariance,
    riemannian_coarea_check, spherical_measure, BoxDomain, DistanceSpec, Expr,
    IntegrationConfig, LevelSetFamily, MetricSpec, PVector, ParamSurface, PolyVectorField,
    ScalarMap,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

/// Composite Simpson rule on `[a, b]` with `m` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = f(a) + f(b);
    for i in 1..m {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `∫_0^1 sqrt(1 - s⁴) ds` with `s = 1 - w²`, which removes the endpoint singularity.
fn koranyi_slice_area() -> f64 {
    simpson(
        |w| {
            let s = 1.0 - w * w;
            2.0 * w * w * ((1.0 + s) * (1.0 + s * s)).sqrt()
        },
        0.0,
        1.0,
        20_000,
    )
}

/// A random polynomial of degree at most 3, rendered over the given variable texts.
fn random_poly(rng: &mut ChaCha8Rng, vars: &[String]) -> String {
    let mut terms = Vec::new();
    for _ in 0..4 {
        let c: f64 = rng.random_range(-1.0..1.0);
        let mut term = format!("({c})");
        let mut degree = 0;
        for v in vars {
            let k = rng.random_range(0..=(3 - degree).min(2));
            degree += k;
            if k > 0 {
                term.push_str(&format!("*({v})^{k}"));
            }
        }
        terms.push(term);
    }
    terms.join(" + ")
}

fn names(prefix: &str, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|i| format!("{prefix}{i}")).collect()
}

/// A random polynomial level-set family: `(n, map components, chart components, p)`.
/// The chart uses `u1..up` and `t1..tk`, and every family is a graph, hence embedded.
fn random_level_set(rng: &mut ChaCha8Rng, kind: usize) -> (usize, Vec<String>, Vec<String>, usize) {
    match kind {
        // x3 = P(x1, x2) + t in H^1
        0 => {
            let pf = random_poly(rng, &names("x", &[1, 2]));
            let pu = substitute(&pf, &[("x1", "u1"), ("x2", "u2")]);
            (1, vec![format!("x3 - ({pf})")], vec!["u1".into(), "u2".into(), format!("{pu} + t1")], 2)
        }
        // x1 = Q(x2, x3) + t in H^1
        1 => {
            let qf = random_poly(rng, &names("x", &[2, 3]));
            let qu = substitute(&qf, &[("x2", "u1"), ("x3", "u2")]);
            (1, vec![format!("x1 - ({qf})")], vec![format!("{qu} + t1"), "u1".into(), "u2".into()], 2)
        }
        // x5 = P(x1..x4) + t in H^2
        2 => {
            let pf = random_poly(rng, &names("x", &[1, 2, 3, 4]));
            let pu = substitute(&pf, &[("x1", "u1"), ("x2", "u2"), ("x3", "u3"), ("x4", "u4")]);
            let mut chart: Vec<String> = names("u", &[1, 2, 3, 4]);
            chart.push(format!("{pu} + t1"));
            (2, vec![format!("x5 - ({pf})")], chart, 4)
        }
        // x2 = Q(x1, x3, x4, x5) + t in H^2
        3 => {
            let qf = random_poly(rng, &names("x", &[1, 3, 4, 5]));
            let qu = substitute(&qf, &[("x1", "u1"), ("x3", "u2"), ("x4", "u3"), ("x5", "u4")]);
            (
                2,
                vec![format!("x2 - ({qf})")],
                vec!["u1".into(), format!("{qu} + t1"), "u2".into(), "u3".into(), "u4".into()],
                4,
            )
        }
        // codimension two in H^2: x4 = Q(x1, x2, x3) + t2, x5 = P(x1..x4) + t1
        _ => {
            let qf = random_poly(rng, &names("x", &[1, 2, 3]));
            let pf = random_poly(rng, &names("x", &[1, 2, 3, 4]));
            let x4 = format!(
                "({} + t2)",
                substitute(&qf, &[("x1", "u1"), ("x2", "u2"), ("x3", "u3")])
            );
            let x5 = substitute(&pf, &[("x1", "u1"), ("x2", "u2"), ("x3", "u3"), ("x4", &x4)]);
            (
                2,
                vec![format!("x5 - ({pf})"), format!("x4 - ({qf})")],
                vec!["u1".into(), "u2".into(), "u3".into(), x4, format!("{x5} + t1")],
                3,
            )
        }
    }
}

/// Substitutes variables in a rendered polynomial. Variable texts appear only as
/// `(name)`, so plain replacement is exact.
fn substitute(poly: &str, subs: &[(&str, &str)]) -> String {
    let mut out = poly.to_string();
    for (from, to) in subs {
        out = out.replace(&format!("({from})"), &format!("({to})"));
    }
    out
}

fn criterion_1_brackets() -> Outcome {
    let start = Instant::now();
    for n in 1..=4 {
        let bad = bracket_table_violations(n);
        ensure(bad.is_empty(), || format!("n = {n}: offending pairs {bad:?}"))?;
        let frame = PolyVectorField::standard_frame(n);
        let z2 = frame[2 * n].scale(2.0);
        for k in 0..n {
            let b = lie_bracket(&frame[k], &frame[k + n]);
            ensure(b == z2, || format!("n = {n}: [X_{}, X_{}] != 2Z", k + 1, k + n + 1))?;
        }
    }
    let took = within_time(start, Duration::from_secs(1))?;
    Ok(format!("n = 1..4 exact, {took:.2?}"))
}

fn criterion_2_paraboloid() -> Outcome {
    let start = Instant::now();
    let s = ParamSurface::parse(1, &["u1", "u2", "(u1^2 + u2^2)/2"], BoxDomain::unit(2)).map_err(e)?;
    let r = spherical_measure(&s, &DistanceSpec::Koranyi, &IntegrationConfig::default()).map_err(e)?;
    let oracle = 2f64.sqrt() * (2f64.sqrt() + 1f64.asinh()) / 3.0;
    let rel = (r.value - oracle).abs() / oracle;
    ensure(rel < 1e-6, || format!("got {}, want {oracle}, rel {rel:e}", r.value))?;
    let took = within_time(start, Duration::from_secs(5))?;
    Ok(format!("{:.9} vs {oracle:.9}, rel {rel:.1e}, {took:.2?}", r.value))
}

fn criterion_3_lines() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cfg = IntegrationConfig::default();
    let mut worst = 0f64;
    for _ in 0..20 {
        let a: f64 = rng.random_range(-3.0..3.0);
        let b: f64 = rng.random_range(-3.0..3.0);
        let alpha: f64 = rng.random_range(-2.0..1.0);
        let beta = alpha + rng.random_range(0.1..3.0);
        let s = ParamSurface::parse(
            1,
            &[&format!("({a})*u1"), "0", &format!("({b})*u1")],
            BoxDomain::new(vec![alpha], vec![beta]).map_err(e)?,
        )
        .map_err(e)?;
        let m = spherical_measure(&s, &DistanceSpec::MaxDist, &cfg).map_err(e)?;
        let want = b.abs() * (beta - alpha);
        let gap = (m.value - want).abs();
        worst = worst.max(gap);
        ensure(gap < 1e-10, || format!("a={a} b={b} [{alpha}, {beta}]: {} vs {want}", m.value))?;
    }
    Ok(format!("20 lines, worst gap {worst:.1e}"))
}

fn criterion_4_integrands() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0f64;
    let dom2 = BoxDomain::new(vec![-2.0; 2], vec![2.0; 2]).map_err(e)?;
    for _ in 0..10 {
        let a1: f64 = rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let a2: f64 = rng.random_range(0.5..2.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let b: f64 = rng.random_range(-2.0..2.0);
        let c: f64 = rng.random_range(-2.0..2.0);
        let s = ParamSurface::parse(
            1,
            &[&format!("({a1})*u1"), &format!("({a2})*u2"), &format!("({b})*u1 + ({c})*u2")],
            dom2.clone(),
        )
        .map_err(e)?;
        for _ in 0..100 {
            let u = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
            let want = (a1 * a1 * (c - a1 * a2 * u[0]).powi(2)
                + a2 * a2 * (a1 * a2 * u[1] + b).powi(2))
            .sqrt();
            let got = s.vertical_density(&u).map_err(e)?;
            worst = worst.max((got - want).abs());
        }
    }
    let p3 = ParamSurface::parse(
        2,
        &["u1", "u2", "u3", "0", "(u1^2 + u2^2 + u3^2)/2"],
        BoxDomain::new(vec![-2.0; 3], vec![2.0; 3]).map_err(e)?,
    )
    .map_err(e)?;
    for _ in 0..1000 {
        let u: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let want = (u[1] * u[1] + 2.0 * (u[2] * u[2] + u[0] * u[0])).sqrt();
        let got = p3.vertical_density(&u).map_err(e)?;
        worst = worst.max((got - want).abs());
    }
    ensure(worst < 1e-10, || format!("worst pointwise gap {worst:e}"))?;
    Ok(format!("2000 points, worst gap {worst:.1e}"))
}

fn criterion_5_ratio_identity() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0f64;
    let mut points = 0;
    for family in 0..25 {
        let (n, map, chart, p) = random_level_set(&mut rng, family % 5);
        let k = map.len();
        let t: Vec<f64> = (0..k).map(|_| rng.random_range(-0.5..0.5)).collect();
        let map_refs: Vec<&str> = map.iter().map(String::as_str).collect();
        let chart_refs: Vec<&str> = chart.iter().map(String::as_str).collect();
        let f = ScalarMap::parse(n, &map_refs).map_err(e)?;
        let dom = BoxDomain::new(vec![-1.0; p], vec![1.0; p]).map_err(e)?;
        let s = ParamSurface::parse_family(n, &chart_refs, dom, &t).map_err(e)?;
        for _ in 0..4 {
            let u: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (tv, ratio) = ratio_identity_check(&f, &s, &u).map_err(e)?;
            worst = worst.max((tv - ratio).abs());
            points += 1;
        }
    }
    ensure(worst < 1e-8, || format!("worst gap {worst:e}"))?;
    let took = within_time(start, Duration::from_secs(10))?;
    Ok(format!("{points} points on 25 level sets, worst gap {worst:.1e}, {took:.2?}"))
}

fn criterion_6_normals() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0f64;
    for family in 0..20 {
        let kind = [0, 1, 2, 3][family % 4];
        let (n, _, chart, p) = random_level_set(&mut rng, kind);
        let chart: Vec<String> = chart.iter().map(|c| c.replace("t1", "0")).collect();
        let refs: Vec<&str> = chart.iter().map(String::as_str).collect();
        let s = ParamSurface::parse(n, &refs, BoxDomain::new(vec![-1.0; p], vec![1.0; p]).map_err(e)?)
            .map_err(e)?;
        let dim = 2 * n + 1;
        for _ in 0..5 {
            let u: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let nu = horizontal_normal(&s, &u).map_err(e)?;
            let tv = s.vertical_tangent(&u).map_err(e)?;
            let nu_len = nu.coeffs().iter().map(|c| c * c).sum::<f64>().sqrt();
            let tv_len = tv.coeffs().iter().map(|c| c * c).sum::<f64>().sqrt();
            worst = worst.max((nu_len - tv_len).abs());
            for j in 1..=2 * n {
                let omit: Vec<usize> = (1..=dim).filter(|&i| i != j).collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                worst = worst.max((nu.coeffs()[j - 1] - sign * tv.coeff(&omit)).abs());
            }
            ensure(nu.coeffs()[dim - 1] == 0.0, || "normal has a Z component".into())?;
            // tangent vectors with no Z component span T∩H; the normal must be orthogonal
            let (_, vs) = s.frame_partials(&u).map_err(e)?;
            let zs: Vec<f64> = vs.iter().map(|v| v[dim - 1]).collect();
            let pivot = (0..p)
                .max_by(|&a, &b| zs[a].abs().total_cmp(&zs[b].abs()))
                .expect("p > 0");
            for i in (0..p).filter(|&i| i != pivot) {
                let w: Vec<f64> = if zs[pivot] == 0.0 {
                    vs[i].clone()
                } else {
                    (0..dim).map(|c| vs[i][c] - zs[i] / zs[pivot] * vs[pivot][c]).collect()
                };
                let wl = w.iter().map(|c| c * c).sum::<f64>().sqrt();
                let dot: f64 = w.iter().zip(nu.coeffs()).map(|(a, b)| a * b).sum();
                worst = worst.max(dot.abs() / wl.max(1.0));
            }
        }
    }
    ensure(worst < 1e-10, || format!("worst gap {worst:e}"))?;
    Ok(format!("100 points on 20 surfaces in H^1 and H^2, worst gap {worst:.1e}"))
}

fn criterion_7_metric_factor() -> Outcome {
    let cfg = IntegrationConfig::default();
    let x1z = PVector::blade(1, &[1, 3]).map_err(e)?;
    let max = metric_factor(&DistanceSpec::MaxDist, &x1z, &cfg).map_err(e)?;
    ensure((max.value - 4.0).abs() < 3.0 * max.error_estimate, || {
        format!("max distance: {} ± {}", max.value, max.error_estimate)
    })?;
    let oracle = koranyi_slice_area();
    let kor = metric_factor(&DistanceSpec::Koranyi, &x1z, &cfg).map_err(e)?;
    ensure((kor.value - oracle).abs() < 3.0 * kor.error_estimate, || {
        format!("koranyi: {} ± {} vs {oracle}", kor.value, kor.error_estimate)
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut spreads = Vec::new();
    for spec in [DistanceSpec::Koranyi, DistanceSpec::MaxDist] {
        let mut values = Vec::new();
        let mut errors = Vec::new();
        for i in 0..20u64 {
            let w: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let tau = PVector::wedge_all(1, &[w, vec![0.0, 0.0, 1.0]]).map_err(e)?;
            let r = metric_factor(&spec, &tau, &cfg.with_seed(1000 + i)).map_err(e)?;
            values.push(r.value);
            errors.push(r.error_estimate);
        }
        let mean = values.iter().sum::<f64>() / 20.0;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 19.0).sqrt();
        let se = errors.iter().sum::<f64>() / 20.0;
        ensure(sd < 3.0 * se, || format!("{spec:?}: spread {sd:e} vs standard error {se:e}"))?;
        spreads.push(format!("{spec:?} spread {sd:.1e} (se {se:.1e})"));
    }
    Ok(format!(
        "max {:.5} ± {:.1e}, koranyi {:.5} vs {oracle:.5}; {}",
        max.value,
        max.error_estimate,
        kor.value,
        spreads.join(", ")
    ))
}

fn criterion_8_blowup() -> Outcome {
    let start = Instant::now();
    let cfg = IntegrationConfig::default();
    let vertical = ParamSurface::parse(1, &["0", "0", "u1"], BoxDomain::new(vec![-1.0], vec![1.0]).map_err(e)?)
        .map_err(e)?;
    for r in [0.9, 0.5, 0.25, 0.1, 0.01] {
        let q = blowup_quotient(&vertical, &[0.0], r, &DistanceSpec::MaxDist, &cfg).map_err(e)?;
        ensure((q.value - 2.0).abs() < 1e-9, || format!("vertical line r={r}: {}", q.value))?;
    }

    // At u0 = (1, 0) the frame partials are X1 + Z and X2 - Z, so the unit tangent
    // has |τ_V| = sqrt(2/3) and the limit is θ(X1∧Z) · sqrt(3/2).
    let s = ParamSurface::parse(
        1,
        &["u1", "u2", "(u1^2 + u2^2)/2"],
        BoxDomain::new(vec![-1.0, -2.0], vec![3.0, 2.0]).map_err(e)?,
    )
    .map_err(e)?;
    let u0 = [1.0, 0.0];
    let mut lines = Vec::new();
    for (spec, theta) in [
        (DistanceSpec::MaxDist, 4.0),
        (DistanceSpec::Koranyi, koranyi_slice_area()),
    ] {
        let want = theta * 1.5f64.sqrt();
        let predicted = blowup_limit(&s, &u0, &spec, &cfg).map_err(e)?;
        ensure((predicted.value - want).abs() < 3.0 * predicted.error_estimate, || {
            format!("{spec:?}: predicted limit {} vs {want}", predicted.value)
        })?;
        let mut gaps = Vec::new();
        for k in 2..=6 {
            let r = 0.5f64.powi(k);
            let q = blowup_quotient(&s, &u0, r, &spec, &cfg).map_err(e)?;
            gaps.push(((q.value - want).abs(), q.error_estimate));
        }
        let (last, _) = *gaps.last().expect("five radii");
        ensure(last / want < 0.02, || format!("{spec:?}: gap {last} at r = 2^-6"))?;
        for w in gaps.windows(2) {
            ensure(w[1].0 <= w[0].0 + 3.0 * (w[0].1 + w[1].1) + 1e-9, || {
                format!("{spec:?}: gap grew {gaps:?}")
            })?;
        }
        lines.push(format!("{spec:?} rel gap {:.1e}", last / want));
    }
    let took = within_time(start, Duration::from_secs(60))?;
    Ok(format!("vertical line exact; {}; {took:.2?}", lines.join(", ")))
}

fn family(map: &str, chart: &[&str], weight: &str) -> Result<(LevelSetFamily, Expr), String> {
    let f = ScalarMap::parse(1, &[map]).map_err(e)?;
    let chart = ParamSurface::parse_family(1, chart, BoxDomain::unit(2), &[0.5]).map_err(e)?;
    let fam = LevelSetFamily::new(f, chart, BoxDomain::unit(1), BoxDomain::unit(3)).map_err(e)?;
    let w = heisenmeasure_core::parse(weight, &heisenmeasure_core::Var::coords(3)).map_err(e)?;
    Ok((fam, w))
}

fn close(label: &str, got: f64, want: f64) -> Result<(), String> {
    let rel = (got - want).abs() / want.abs();
    ensure(rel < 5e-3, || format!("{label}: {got} vs {want} (rel {rel:e})"))
}

fn criterion_9_coarea() -> Outcome {
    let cfg = IntegrationConfig {
        rel_tol: 1e-7,
        ..IntegrationConfig::default()
    };
    let plane_oracle = (2f64.sqrt() + 1f64.asinh()) / 3.0;

    let (fam, one) = family("x3", &["u1", "u2", "t1"], "1")?;
    let (l, r) = coarea_check(&fam, &one, &cfg).map_err(e)?;
    close("f = x3 left", l.value, plane_oracle)?;
    close("f = x3 right", r.value, plane_oracle)?;

    let (fam1, _) = family("x1", &["t1", "u1", "u2"], "1")?;
    let (l1, r1) = coarea_check(&fam1, &one, &cfg).map_err(e)?;
    close("f = x1 left", l1.value, 1.0)?;
    close("f = x1 right", r1.value, 1.0)?;

    // Riemannian sanity: J_g x3 = sqrt(1 + x1² + x2²), independent of x3.
    let g = |w: fn(f64) -> f64| {
        simpson(|x| w(x) * simpson(|y| (1.0 + x * x + y * y).sqrt(), 0.0, 1.0, 400), 0.0, 1.0, 400)
    };
    let (lg, rg) = riemannian_coarea_check(&fam, &one, &cfg).map_err(e)?;
    let want = g(|_| 1.0);
    close("riemannian f = x3 left", lg.value, want)?;
    close("riemannian f = x3 right", rg.value, want)?;
    let (fx, x1) = family("x3", &["u1", "u2", "t1"], "x1")?;
    let (lw, rw) = riemannian_coarea_check(&fx, &x1, &cfg).map_err(e)?;
    let want_w = g(|x| x);
    close("riemannian weighted left", lw.value, want_w)?;
    close("riemannian weighted right", rw.value, want_w)?;
    Ok(format!(
        "x3: {:.6}/{:.6} vs {plane_oracle:.6}; x1: {:.6}/{:.6}; riemannian {:.6}/{:.6} vs {want:.6}",
        l.value, r.value, l1.value, r1.value, lg.value, rg.value
    ))
}

fn criterion_10_rescaling() -> Outcome {
    let cfg = IntegrationConfig::default();
    let s = ParamSurface::parse(1, &["u1", "u2", "(u1^2 + u2^2)/2"], BoxDomain::unit(2)).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut out = Vec::new();
    for lambda in [0.5, 2.0] {
        for _ in 0..2 {
            let a = vec![rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)];
            let m = MetricSpec::new(lambda, a.clone()).map_err(e)?;
            let (rescaled, standard) =
                rescaled_measure_invariance(&s, &m, &DistanceSpec::Koranyi, &cfg).map_err(e)?;
            let bar = 3.0 * rescaled.error_estimate.hypot(standard.error_estimate);
            let gap = (rescaled.value - standard.value).abs();
            ensure(gap < bar, || {
                format!("λ={lambda} a={a:?}: {} vs {} (bar {bar:e})", rescaled.value, standard.value)
            })?;
            out.push(gap / bar);
        }
    }
    Ok(format!(
        "4 metrics, worst gap {:.2} of the 3σ bar",
        out.iter().copied().fold(0.0, f64::max)
    ))
}

fn strip_runtime(report: &[u8]) -> String {
    String::from_utf8_lossy(report)
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"runtime_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn criterion_11_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let config = dir.path().join("job.toml");
    std::fs::write(
        &config,
        r#"
task = "volume"
n = 1
seed = 77

[surface]
components = ["u1", "u2", "(u1^2 + u2^2)/2"]
lo = [0.0, 0.0]
hi = [1.0, 1.0]

[metric]
lambda = 2.0
a = [0.3, -0.2]

[integration]
mc_samples = 200000
"#,
    )
    .map_err(e)?;
    let run = |threads: &str| -> Result<String, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_heisenmeasure"))
            .args(["--config", config.to_str().expect("utf-8 path"), "--threads", threads])
            .output()
            .map_err(e)?;
        ensure(out.status.code() == Some(0), || {
            format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
        })?;
        Ok(strip_runtime(&out.stdout))
    };
    let first = run("1")?;
    for threads in ["1", "4", "2"] {
        ensure(run(threads)? == first, || format!("report differs with --threads {threads}"))?;
    }
    let tau = PVector::blade(1, &[1, 3]).map_err(e)?;
    let cfg = IntegrationConfig::default();
    let a = metric_factor(&DistanceSpec::Koranyi, &tau, &cfg).map_err(e)?;
    let b = metric_factor(&DistanceSpec::Koranyi, &tau, &cfg).map_err(e)?;
    ensure(a.value.to_bits() == b.value.to_bits(), || "metric factor not bit-reproducible".into())?;
    Ok(format!("4 CLI runs identical ({} bytes), library rerun bit-identical", first.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("bracket relations", criterion_1_brackets),
        ("paraboloid measure", criterion_2_paraboloid),
        ("line measure", criterion_3_lines),
        ("hyperplane and 3-paraboloid integrands", criterion_4_integrands),
        ("ratio identity", criterion_5_ratio_identity),
        ("codimension-one horizontal normal", criterion_6_normals),
        ("metric factor values and constancy", criterion_7_metric_factor),
        ("blow-up quotients", criterion_8_blowup),
        ("coarea formula", criterion_9_coarea),
        ("rescaling invariance", criterion_10_rescaling),
        ("determinism", criterion_11_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
