//! Reproducible Monte Carlo on boxes.
//!
//! Every stratum (or replicate) draws from its own ChaCha stream, selected by index
//! from the root seed, so results do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::quadrature::compensated_sum;
use crate::surface::BoxDomain;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McResult {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// RNG for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Strata per axis so that the total stays near `target` cells.
pub fn strata_per_axis(target: usize, d: usize) -> usize {
    let mut s = ((target as f64).powf(1.0 / d as f64)).floor() as usize;
    while (s + 1).pow(d as u32) <= target {
        s += 1;
    }
    s.max(1)
}

/// Stratified estimate of `∫_domain f`, with `samples` points spread evenly over
/// `strata^d` equal cells.
pub fn stratified<F>(f: F, domain: &BoxDomain, samples: u64, strata: usize, seed: u64) -> McResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = domain.dim();
    let strata = strata.max(1);
    let cells = strata.pow(d as u32);
    let per = (samples / cells as u64).max(2);
    let side: Vec<f64> = domain
        .lo()
        .iter()
        .zip(domain.hi())
        .map(|(a, b)| (b - a) / strata as f64)
        .collect();
    let vol: f64 = side.iter().product();
    let parts: Vec<(f64, f64)> = (0..cells)
        .into_par_iter()
        .map(|cell| {
            let mut rng = stream_rng(seed, cell as u64);
            let mut lo = vec![0.0; d];
            let mut idx = cell;
            for k in 0..d {
                lo[k] = domain.lo()[k] + side[k] * (idx % strata) as f64;
                idx /= strata;
            }
            let mut x = vec![0.0; d];
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..per {
                for k in 0..d {
                    x[k] = lo[k] + side[k] * rng.random::<f64>();
                }
                let y = f(&x);
                let delta = y - mean;
                mean += delta / (i + 1) as f64;
                m2 += delta * (y - mean);
            }
            let var = m2 / (per - 1) as f64;
            (vol * mean, vol * vol * var / per as f64)
        })
        .collect();
    McResult {
        value: compensated_sum(parts.iter().map(|p| p.0)),
        std_error: compensated_sum(parts.iter().map(|p| p.1)).sqrt(),
        samples: per * cells as u64,
    }
}

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % b) as f64;
        i /= b;
        f *= inv;
    }
    r
}

/// Halton sequence with independent random shifts (Cranley–Patterson rotation);
/// the standard error comes from the spread of the `replicates` estimates.
pub fn randomized_halton<F>(
    f: F,
    domain: &BoxDomain,
    samples: u64,
    replicates: usize,
    seed: u64,
) -> McResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let d = domain.dim();
    assert!(d <= PRIMES.len(), "dimension {d} exceeds Halton bases");
    let replicates = replicates.max(2);
    let per = (samples / replicates as u64).max(1);
    let vol = domain.volume();
    let estimates: Vec<f64> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r as u64);
            let shift: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
            let mut x = vec![0.0; d];
            let mut s = crate::quadrature::NeumaierSum::default();
            for i in 1..=per {
                for k in 0..d {
                    let h = (radical_inverse(i, PRIMES[k]) + shift[k]).fract();
                    x[k] = domain.lo()[k] + h * (domain.hi()[k] - domain.lo()[k]);
                }
                s.add(f(&x));
            }
            vol * s.value() / per as f64
        })
        .collect();
    let mean = compensated_sum(estimates.iter().copied()) / replicates as f64;
    let var = compensated_sum(estimates.iter().map(|e| (e - mean).powi(2))) / (replicates - 1) as f64;
    McResult {
        value: mean,
        std_error: (var / replicates as f64).sqrt(),
        samples: per * replicates as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(x: &[f64]) -> f64 {
        if x[0] * x[0] + x[1] * x[1] < 1.0 {
            1.0
        } else {
            0.0
        }
    }

    #[test]
    fn stratified_disc_within_three_sigma() {
        let dom = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let r = stratified(disc, &dom, 200_000, 32, 7);
        assert!((r.value - std::f64::consts::PI).abs() < 3.0 * r.std_error, "{r:?}");
        assert!(r.std_error > 0.0 && r.std_error < 2e-3);
    }

    #[test]
    fn halton_disc_within_three_sigma() {
        let dom = BoxDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let r = randomized_halton(disc, &dom, 160_000, 16, 11);
        assert!((r.value - std::f64::consts::PI).abs() < 3.0 * r.std_error.max(1e-4), "{r:?}");
    }

    #[test]
    fn reproducible_across_thread_pools() {
        let dom = BoxDomain::unit(3);
        let f = |x: &[f64]| (x[0] * x[1] + x[2]).sin();
        let a = stratified(f, &dom, 50_000, 8, 99);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| stratified(f, &dom, 50_000, 8, 99));
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        let c = stratified(f, &dom, 50_000, 8, 100);
        assert_ne!(a.value.to_bits(), c.value.to_bits());
    }

    #[test]
    fn strata_counts() {
        assert_eq!(strata_per_axis(1024, 2), 32);
        assert_eq!(strata_per_axis(1024, 3), 10);
        assert_eq!(strata_per_axis(1024, 1), 1024);
    }
}
