//! Convergence diagnostics on multi-chain draws of a scalar quantity.
//!
//! * [`split_rank_rhat`]: chains are split in half, the pooled draws are
//!   replaced by normal scores of their (tie-averaged) ranks, and the classic
//!   between/within-chain potential scale reduction is computed.
//! * [`ess_bulk`]: effective sample size of the same rank-normalized split
//!   chains, from autocorrelations truncated with Geyer's initial monotone
//!   sequence.
//! * [`ess_tail`]: the smaller ESS of the indicators `x <= q05` and
//!   `x >= q95`, with pooled quantiles.
//!
//! Cross-chain aggregates are summed in sorted order, so relabelling chains
//! leaves every result bit-identical.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::estimates::quantile_sorted;
use crate::sampler::PosteriorDraws;
use crate::scalar::{order_free_sum, Scalar};

pub const RHAT_THRESHOLD: f64 = 1.01;
pub const ESS_THRESHOLD: f64 = 400.0;

/// A diagnostic value; `degenerate` marks inputs without variation, where the
/// value is a convention (R-hat 1, ESS 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub value: f64,
    pub degenerate: bool,
}

impl Diagnostic {
    fn ok(value: f64) -> Self {
        Self { value, degenerate: false }
    }

    fn degenerate(value: f64) -> Self {
        Self { value, degenerate: true }
    }
}

fn to_f64<T: Scalar>(chains: &[Vec<T>]) -> Vec<Vec<f64>> {
    chains.iter().map(|c| c.iter().map(|x| x.as_f64()).collect()).collect()
}

fn check_shape(chains: &[Vec<f64>]) -> Result<usize> {
    if chains.len() < 2 {
        return Err(Error::Config(format!(
            "diagnostics need at least 2 chains, got {}",
            chains.len()
        )));
    }
    let n = chains[0].len();
    if chains.iter().any(|c| c.len() != n) {
        return Err(Error::Config("all chains must have the same length".into()));
    }
    if n < 4 {
        return Err(Error::Config(format!("diagnostics need at least 4 draws per chain, got {n}")));
    }
    if chains.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Config("draws must be finite".into()));
    }
    Ok(n)
}

fn is_constant(chains: &[Vec<f64>]) -> bool {
    let first = chains[0][0];
    chains.iter().flatten().all(|&x| x == first)
}

/// Halves of every chain; the middle draw of an odd-length chain is dropped.
fn split_chains(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let half = chains[0].len() / 2;
    let offset = chains[0].len() - half;
    chains.iter().flat_map(|c| [c[..half].to_vec(), c[offset..].to_vec()]).collect()
}

/// Normal scores `Φ⁻¹((r - 3/8) / (S + 1/4))` of pooled tie-averaged ranks.
fn rank_normalize(chains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pooled: Vec<(f64, usize, usize)> = chains
        .iter()
        .enumerate()
        .flat_map(|(c, xs)| xs.iter().enumerate().map(move |(i, &x)| (x, c, i)))
        .collect();
    pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = pooled.len() as f64;
    let normal = Normal::standard();
    let mut out: Vec<Vec<f64>> = chains.iter().map(|c| vec![0.0; c.len()]).collect();
    let mut start = 0;
    while start < pooled.len() {
        let mut end = start + 1;
        while end < pooled.len() && pooled[end].0 == pooled[start].0 {
            end += 1;
        }
        // Ranks are 1-based; ties share the mean of their positions.
        let rank = (start + 1 + end) as f64 / 2.0;
        let z = normal.inverse_cdf((rank - 0.375) / (total + 0.25));
        for &(_, c, i) in &pooled[start..end] {
            out[c][i] = z;
        }
        start = end;
    }
    out
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Classic potential scale reduction of already-split chains.
fn rhat_of_split(split: &[Vec<f64>]) -> f64 {
    let m = split.len() as f64;
    let n = split[0].len() as f64;
    let means: Vec<f64> = split.iter().map(|c| mean(c)).collect();
    let grand = order_free_sum(&means) / m;
    let between = n / (m - 1.0)
        * order_free_sum(&means.iter().map(|x| (x - grand) * (x - grand)).collect::<Vec<_>>());
    let within = order_free_sum(&split.iter().map(|c| variance(c)).collect::<Vec<_>>()) / m;
    let var_plus = (n - 1.0) / n * within + between / n;
    (var_plus / within).sqrt()
}

/// Autocovariance at `lag` with the biased `1/n` normalization.
fn autocovariance(centered: &[f64], lag: usize) -> f64 {
    let n = centered.len();
    centered[..n - lag].iter().zip(&centered[lag..]).map(|(a, b)| a * b).sum::<f64>() / n as f64
}

/// Multi-chain ESS of the given (already split) chains.
///
/// Returns `None` when the pooled variance is zero.
fn ess_of_split(split: &[Vec<f64>]) -> Option<f64> {
    let m = split.len();
    let n = split[0].len();
    let centered: Vec<Vec<f64>> = split
        .iter()
        .map(|c| {
            let mu = mean(c);
            c.iter().map(|x| x - mu).collect()
        })
        .collect();
    let means: Vec<f64> = split.iter().map(|c| mean(c)).collect();
    let nf = n as f64;
    let acov_mean = |lag: usize| -> f64 {
        order_free_sum(&centered.iter().map(|c| autocovariance(c, lag)).collect::<Vec<_>>())
            / m as f64
    };

    let mean_var = acov_mean(0) * nf / (nf - 1.0);
    let between = if m > 1 {
        let grand = order_free_sum(&means) / m as f64;
        order_free_sum(&means.iter().map(|x| (x - grand) * (x - grand)).collect::<Vec<_>>())
            / (m as f64 - 1.0)
    } else {
        0.0
    };
    let var_plus = mean_var * (nf - 1.0) / nf + between;
    if !(var_plus > 0.0) {
        return None;
    }
    let rho = |lag: usize| 1.0 - (mean_var - acov_mean(lag)) / var_plus;

    // Indexed by lag. Pairs (even, odd) are accumulated while their sum stays
    // positive, then forced to be monotone non-increasing.
    let mut rho_hat = vec![0.0; n];
    let mut t = 0usize;
    let mut rho_even = 1.0;
    let mut rho_odd = rho(1);
    rho_hat[0] = rho_even;
    rho_hat[1] = rho_odd;
    while t + 5 < n && rho_even + rho_odd > 0.0 {
        t += 2;
        rho_even = rho(t);
        rho_odd = rho(t + 1);
        if rho_even + rho_odd >= 0.0 {
            rho_hat[t] = rho_even;
            rho_hat[t + 1] = rho_odd;
        }
    }
    let max_t = t;
    if rho_even > 0.0 {
        rho_hat[max_t] = rho_even;
    }

    let mut t = 0usize;
    while t + 4 <= max_t {
        t += 2;
        let prev = rho_hat[t - 2] + rho_hat[t - 1];
        if rho_hat[t] + rho_hat[t + 1] > prev {
            rho_hat[t] = prev / 2.0;
            rho_hat[t + 1] = prev / 2.0;
        }
    }

    let total = (m * n) as f64;
    let tau = -1.0 + 2.0 * rho_hat[..max_t].iter().sum::<f64>() + rho_hat[max_t];
    let tau = tau.max(1.0 / total.log10());
    Some(total / tau)
}

pub fn split_rank_rhat<T: Scalar>(chains: &[Vec<T>]) -> Result<Diagnostic> {
    let chains = to_f64(chains);
    check_shape(&chains)?;
    if is_constant(&chains) {
        return Ok(Diagnostic::degenerate(1.0));
    }
    let split = split_chains(&chains);
    let ranked = rank_normalize(&split);
    Ok(Diagnostic::ok(rhat_of_split(&ranked)))
}

pub fn ess_bulk<T: Scalar>(chains: &[Vec<T>]) -> Result<Diagnostic> {
    let chains = to_f64(chains);
    check_shape(&chains)?;
    if is_constant(&chains) {
        return Ok(Diagnostic::degenerate(0.0));
    }
    let ranked = rank_normalize(&split_chains(&chains));
    Ok(ess_of_split(&ranked).map_or(Diagnostic::degenerate(0.0), Diagnostic::ok))
}

/// ESS of the lower (`x <= q05`) and upper (`x >= q95`) tail indicators.
pub fn tail_indicator_ess<T: Scalar>(chains: &[Vec<T>]) -> Result<(Diagnostic, Diagnostic)> {
    let chains = to_f64(chains);
    check_shape(&chains)?;
    let mut pooled: Vec<f64> = chains.iter().flatten().copied().collect();
    pooled.sort_by(f64::total_cmp);
    let q05 = quantile_sorted(&pooled, 0.05);
    let q95 = quantile_sorted(&pooled, 0.95);
    let split = split_chains(&chains);
    let indicator_ess = |pred: &dyn Fn(f64) -> bool| {
        let ind: Vec<Vec<f64>> = split
            .iter()
            .map(|c| c.iter().map(|&x| if pred(x) { 1.0 } else { 0.0 }).collect())
            .collect();
        if is_constant(&ind) {
            return Diagnostic::degenerate(0.0);
        }
        ess_of_split(&ind).map_or(Diagnostic::degenerate(0.0), Diagnostic::ok)
    };
    Ok((indicator_ess(&|x| x <= q05), indicator_ess(&|x| x >= q95)))
}

pub fn ess_tail<T: Scalar>(chains: &[Vec<T>]) -> Result<Diagnostic> {
    let (lower, upper) = tail_indicator_ess(chains)?;
    Ok(Diagnostic {
        value: lower.value.min(upper.value),
        degenerate: lower.degenerate || upper.degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterDiagnostics {
    pub name: String,
    pub rhat: f64,
    pub ess_bulk: f64,
    pub ess_tail: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub num_chains: usize,
    pub draws_per_chain: usize,
    pub rhat_threshold: f64,
    pub ess_threshold: f64,
    pub parameters: Vec<ParameterDiagnostics>,
    /// Names of parameters with R-hat above or ESS below threshold.
    pub flags: Vec<String>,
    pub divergences: usize,
}

impl DiagnosticsReport {
    /// Diagnostics for every column of `[chain][iteration][parameter]` draws.
    pub fn from_chains<T: Scalar>(draws: &[Vec<Vec<T>>], names: &[String]) -> Result<Self> {
        let num_chains = draws.len();
        let draws_per_chain = draws.first().map_or(0, Vec::len);
        let mut parameters = Vec::with_capacity(names.len());
        for (p, name) in names.iter().enumerate() {
            let series: Vec<Vec<T>> =
                draws.iter().map(|chain| chain.iter().map(|d| d[p]).collect()).collect();
            let rhat = split_rank_rhat(&series)?;
            let bulk = ess_bulk(&series)?;
            let tail = ess_tail(&series)?;
            parameters.push(ParameterDiagnostics {
                name: name.clone(),
                rhat: rhat.value,
                ess_bulk: bulk.value,
                ess_tail: tail.value,
                degenerate: rhat.degenerate || bulk.degenerate || tail.degenerate,
            });
        }
        let flags = parameters
            .iter()
            .filter(|p| {
                !(p.rhat <= RHAT_THRESHOLD)
                    || !(p.ess_bulk >= ESS_THRESHOLD)
                    || !(p.ess_tail >= ESS_THRESHOLD)
            })
            .map(|p| p.name.clone())
            .collect();
        Ok(Self {
            num_chains,
            draws_per_chain,
            rhat_threshold: RHAT_THRESHOLD,
            ess_threshold: ESS_THRESHOLD,
            parameters,
            flags,
            divergences: 0,
        })
    }

    pub fn from_draws<T: Scalar>(draws: &PosteriorDraws<T>) -> Result<Self> {
        let mut report = Self::from_chains(&draws.draws, &draws.parameter_names)?;
        report.divergences = draws.total_divergences();
        Ok(report)
    }

    pub fn is_flagged(&self) -> bool {
        !self.flags.is_empty()
    }

    pub fn max_rhat(&self) -> f64 {
        self.parameters.iter().map(|p| p.rhat).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_ess_bulk(&self) -> f64 {
        self.parameters.iter().map(|p| p.ess_bulk).fold(f64::INFINITY, f64::min)
    }

    pub fn min_ess_tail(&self) -> f64 {
        self.parameters.iter().map(|p| p.ess_tail).fold(f64::INFINITY, f64::min)
    }
}
