//! Reference implementations used as oracles. None of these call into the
//! library's numerical code.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tsls_core::{HeapSet, ReportedDuration, Unit};

pub const DAYS: usize = 730;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plain recursive Cox-de Boor, right-open intervals.
fn bspline(knots: &[f64], i: usize, p: usize, t: f64) -> f64 {
    if p == 0 {
        return if knots[i] <= t && t < knots[i + 1] { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    let left = knots[i + p] - knots[i];
    if left > 0.0 {
        v += (t - knots[i]) / left * bspline(knots, i, p - 1, t);
    }
    let right = knots[i + p + 1] - knots[i + 1];
    if right > 0.0 {
        v += (knots[i + p + 1] - t) / right * bspline(knots, i + 1, p - 1, t);
    }
    v
}

const GAUSS_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GAUSS_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    GAUSS_NODES.iter().zip(GAUSS_WEIGHTS).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// `BI_k(d) = 1 - ∫_0^d B_k / ∫_0^L B_k` by Gauss-Legendre quadrature on each
/// knot span (exact for polynomials of the degrees used here). Rows are days.
pub fn reflected_integrated_basis(support: usize, segments: usize, degree: usize) -> Vec<Vec<f64>> {
    let width = support as f64 / segments as f64;
    let mut knots = vec![0.0; degree];
    knots.extend((0..=segments).map(|i| i as f64 * width));
    knots.extend(std::iter::repeat_n(support as f64, degree));
    let k_count = segments + degree;
    let breaks: Vec<f64> = (0..=segments).map(|i| i as f64 * width).collect();

    let partial = |k: usize, upto: f64| -> f64 {
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1].min(upto));
            if b > a {
                total += integrate(|t| bspline(&knots, k, degree, t), a, b);
            }
        }
        total
    };
    let totals: Vec<f64> = (0..k_count).map(|k| partial(k, support as f64)).collect();
    (0..=support)
        .map(|d| (0..k_count).map(|k| 1.0 - partial(k, d as f64) / totals[k]).collect())
        .collect()
}

/// `φ_d = Σ_k α_k BI_k(d) / Σ_{d < L} Σ_k α_k BI_k(d)`.
pub fn phi_from_rows(rows: &[Vec<f64>], alpha: &[f64]) -> Vec<f64> {
    let gamma: Vec<f64> = rows[..rows.len() - 1]
        .iter()
        .map(|row| row.iter().zip(alpha).map(|(b, a)| a * b).sum())
        .collect();
    let total: f64 = gamma.iter().sum();
    gamma.iter().map(|g| g / total).collect()
}

/// `α_k = exp(Σ_{j >= k} δ_j)`, written out directly.
pub fn alpha(delta: &[f64]) -> Vec<f64> {
    (0..delta.len()).map(|k| delta[k..].iter().sum::<f64>().exp()).collect()
}

/// Whether exact day `d` is consistent with a report, tested directly from
/// the reporting rules.
pub fn consistent(d: usize, r: &ReportedDuration, heap: &HeapSet) -> bool {
    let z = r.z as usize;
    match r.unit {
        Unit::Day => {
            if heap.contains(r.z) {
                d.abs_diff(z) <= heap.halfwidth() as usize
            } else {
                d == z
            }
        }
        Unit::Week => d / 7 == z,
        Unit::Month => z <= 23 && d >= 1 && (d - 1) / 30 == z,
        Unit::Year => z == 1 && d >= 334,
    }
}

/// Probability of a report by scanning every day.
pub fn enumerated_prob(phi: &[f64], r: &ReportedDuration, heap: &HeapSet) -> f64 {
    (0..DAYS).filter(|&d| consistent(d, r, heap)).map(|d| phi[d]).sum()
}

/// Every report whose interval touches the window.
pub fn reachable_records() -> Vec<ReportedDuration> {
    let mut out: Vec<ReportedDuration> = (0..730).map(ReportedDuration::days).collect();
    out.extend((0..=104).map(ReportedDuration::weeks));
    out.extend((0..=23).map(ReportedDuration::months));
    out.push(ReportedDuration::year());
    out
}

/// `Σ ln N(δ_j; 0, σ) + ln N⁺(σ; 0, 1) + ln σ`.
pub fn log_prior(delta: &[f64], log_sigma: f64) -> f64 {
    let sigma = log_sigma.exp();
    let normal = |x: f64, s: f64| {
        -(x * x) / (2.0 * s * s) - s.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
    };
    delta.iter().map(|&d| normal(d, sigma)).sum::<f64>()
        + normal(sigma, 1.0)
        + 2f64.ln()
        + log_sigma
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Normalized `S(y) = Σ_{x >= y} f(x)`, the current-duration pmf.
pub fn current_duration_pmf(f_x: &[f64]) -> Vec<f64> {
    let s: Vec<f64> = (0..f_x.len()).map(|y| f_x[y..].iter().sum()).collect();
    let total: f64 = s.iter().sum();
    s.iter().map(|v| v / total).collect()
}

pub fn empirical_pmf(ys: &[usize], len: usize) -> Vec<f64> {
    let mut counts = vec![0.0; len];
    for &y in ys {
        counts[y] += 1.0;
    }
    counts.iter().map(|c| c / ys.len() as f64).collect()
}

/// Random non-increasing probability vector of length `len` with a zero
/// appended conceptually after the end.
pub fn random_monotone_simplex(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut steps: Vec<f64> = (0..len)
        .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>().powi(3) })
        .collect();
    steps[len - 1] += 1e-3;
    let mut tail = 0.0;
    let mut v = vec![0.0; len];
    for d in (0..len).rev() {
        tail += steps[d];
        v[d] = tail;
    }
    let total: f64 = v.iter().sum();
    v.iter().map(|x| x / total).collect()
}

pub fn standard_normal(rng: &mut impl Rng) -> f64 {
    // Box-Muller keeps this independent of the library's samplers.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `chains` independent AR(1) series with unit marginal variance.
pub fn ar1_chains(rng: &mut impl Rng, chains: usize, len: usize, rho: f64) -> Vec<Vec<f64>> {
    (0..chains)
        .map(|_| {
            let mut x = standard_normal(rng);
            (0..len)
                .map(|_| {
                    let out = x;
                    x = rho * x + (1.0 - rho * rho).sqrt() * standard_normal(rng);
                    out
                })
                .collect()
        })
        .collect()
}

/// Central difference of `f` along coordinate `i`.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut up = x.to_vec();
    let mut down = x.to_vec();
    up[i] += h;
    down[i] -= h;
    (f(&up) - f(&down)) / (2.0 * h)
}

/// Random records covering all four units, heaped days included.
pub fn random_records(rng: &mut impl Rng, n: usize) -> Vec<ReportedDuration> {
    (0..n)
        .map(|i| match i % 5 {
            0 => ReportedDuration::days(rng.random_range(0..730)),
            1 => ReportedDuration::days([7, 14, 21, 28, 30, 60, 90][rng.random_range(0..7)]),
            2 => ReportedDuration::weeks(rng.random_range(0..=104)),
            3 => ReportedDuration::months(rng.random_range(0..=23)),
            _ => ReportedDuration::year(),
        })
        .collect()
}
