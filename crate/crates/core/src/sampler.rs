//! Hamiltonian Monte Carlo with a fixed integration time per trajectory.
//!
//! Warm-up tunes the step size by dual averaging towards a target acceptance
//! rate and estimates a diagonal inverse metric from the draws of a sequence
//! of doubling windows (an initial fast buffer, slow windows, a terminal fast
//! buffer). After warm-up the step size and metric are frozen. Each
//! trajectory runs for `ceil(t / step_size)` leapfrog steps, capped at
//! `max_leapfrog_steps`, with `t` drawn uniformly within `jitter` of
//! `integration_time`. The jitter breaks the periodic orbits a fixed length
//! can fall into; the defaults (time 2, jitter 0.9, acceptance 0.95) keep the
//! hierarchical scale parameter mixing and free of divergences.
//!
//! The model posterior is explored in non-centered coordinates
//! `(δ / σ, log σ)` by default and reported in `(δ, log σ)`.
//!
//! Each chain owns a ChaCha stream selected by `(seed, chain index)`, so
//! results do not depend on whether chains run in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::SplineBasis;
use crate::error::{Error, Result};
use crate::model::{
    parameter_names, phi_from_params, ModelParams, NonCentered, Posterior, TslsDistribution,
};
use crate::reporting::ReportedDataset;
use crate::scalar::Scalar;

/// Energy error beyond which a trajectory is declared divergent.
const MAX_ENERGY_ERROR: f64 = 1000.0;

/// A differentiable log density on `R^dim`.
pub trait LogDensity<T>: Sync {
    fn dim(&self) -> usize;

    /// Writes the gradient into `gradient` and returns the log density.
    fn log_density_and_gradient(&self, position: &[T], gradient: &mut [T]) -> T;

    /// Count of numerical warnings raised at `position` (for example clamped
    /// transforms). Defaults to none.
    fn warnings(&self, _position: &[T]) -> usize {
        0
    }

    /// Maps a sampler position to the reported draw. Defaults to the identity.
    fn output(&self, position: &[T]) -> Vec<T>
    where
        T: Clone,
    {
        position.to_vec()
    }
}

/// Coordinates the HMC trajectories move in.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parameterization {
    /// `(δ, log σ)` directly.
    Centered,
    /// `(δ / σ, log σ)`, which removes the funnel between `δ` and `σ`.
    #[default]
    NonCentered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub chains: usize,
    /// Total iterations per chain, warm-up included.
    pub iterations_per_chain: usize,
    pub warmup: usize,
    pub seed: u64,
    pub target_accept: f64,
    pub max_leapfrog_steps: usize,
    /// Trajectory length in metric-scaled units; steps × step size ≈ this.
    pub integration_time: f64,
    /// Each trajectory length is drawn uniformly from
    /// `integration_time × [1 - jitter, 1 + jitter]`.
    pub jitter: f64,
    /// Run chains on the rayon thread pool.
    pub parallel: bool,
    /// Ignore the data and sample the prior.
    pub prior_only: bool,
    pub parameterization: Parameterization,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            iterations_per_chain: 2000,
            warmup: 1000,
            seed: 1,
            target_accept: 0.95,
            max_leapfrog_steps: 1024,
            integration_time: 2.0,
            jitter: 0.9,
            parallel: true,
            prior_only: false,
            parameterization: Parameterization::NonCentered,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(Error::Config("at least two chains are required".into()));
        }
        if self.warmup >= self.iterations_per_chain {
            return Err(Error::Config(format!(
                "warmup ({}) must be smaller than iterations per chain ({})",
                self.warmup, self.iterations_per_chain
            )));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::Config("target_accept must lie in (0, 1)".into()));
        }
        if self.max_leapfrog_steps == 0 {
            return Err(Error::Config("max_leapfrog_steps must be positive".into()));
        }
        if !(self.integration_time > 0.0 && self.integration_time.is_finite()) {
            return Err(Error::Config("integration_time must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::Config("jitter must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn draws_per_chain(&self) -> usize {
        self.iterations_per_chain - self.warmup
    }
}

/// Post-warm-up draws and per-chain sampler statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws<T> {
    /// `[chain][iteration][parameter]`.
    pub draws: Vec<Vec<Vec<T>>>,
    pub parameter_names: Vec<String>,
    pub accept_stats: Vec<f64>,
    pub divergence_count: Vec<usize>,
    pub step_sizes: Vec<f64>,
    pub leapfrog_steps: Vec<usize>,
    pub inv_metric: Vec<Vec<f64>>,
    /// Post-warm-up draws that triggered a numerical warning in the target.
    pub warning_count: Vec<usize>,
}

impl<T: Scalar> PosteriorDraws<T> {
    pub fn num_chains(&self) -> usize {
        self.draws.len()
    }

    pub fn draws_per_chain(&self) -> usize {
        self.draws.first().map_or(0, Vec::len)
    }

    pub fn dim(&self) -> usize {
        self.parameter_names.len()
    }

    pub fn total_draws(&self) -> usize {
        self.draws.iter().map(Vec::len).sum()
    }

    pub fn total_divergences(&self) -> usize {
        self.divergence_count.iter().sum()
    }

    /// Per-chain series of one parameter.
    pub fn parameter_series(&self, index: usize) -> Vec<Vec<T>> {
        self.draws.iter().map(|chain| chain.iter().map(|d| d[index]).collect()).collect()
    }

    /// All draws, chain by chain.
    pub fn iter(&self) -> impl Iterator<Item = &[T]> {
        self.draws.iter().flatten().map(Vec::as_slice)
    }

    /// TSLS distribution implied by every draw, in chain-major order.
    pub fn phi_draws(&self, basis: &SplineBasis<T>) -> Result<Vec<TslsDistribution<T>>> {
        let flat: Vec<&[T]> = self.iter().collect();
        flat.par_iter()
            .map(|theta| phi_from_params(&ModelParams::from_slice(theta)?, basis))
            .collect()
    }
}

/// Position, momentum, and the log density with its gradient at the position.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint<T> {
    pub position: Vec<T>,
    pub momentum: Vec<T>,
    pub gradient: Vec<T>,
    pub log_density: T,
}

impl<T: Scalar> PhasePoint<T> {
    pub fn new<F>(position: Vec<T>, momentum: Vec<T>, mut grad_fn: F) -> Self
    where
        F: FnMut(&[T], &mut [T]) -> T,
    {
        let mut gradient = vec![T::zero(); position.len()];
        let log_density = grad_fn(&position, &mut gradient);
        Self { position, momentum, gradient, log_density }
    }

    pub fn kinetic_energy(&self, inv_metric: &[T]) -> T {
        let half = T::lit(0.5);
        self.momentum.iter().zip(inv_metric).fold(T::zero(), |acc, (&m, &w)| acc + half * m * m * w)
    }

    /// Hamiltonian `-log p(q) + ½ mᵀ M⁻¹ m`.
    pub fn energy(&self, inv_metric: &[T]) -> T {
        self.kinetic_energy(inv_metric) - self.log_density
    }
}

/// Runs `num_steps` leapfrog steps from `start`.
///
/// Stops early if the log density becomes non-finite; the caller sees that
/// through the returned point's energy.
pub fn leapfrog<T, F>(
    start: &PhasePoint<T>,
    step_size: T,
    num_steps: usize,
    inv_metric: &[T],
    mut grad_fn: F,
) -> PhasePoint<T>
where
    T: Scalar,
    F: FnMut(&[T], &mut [T]) -> T,
{
    let mut pt = start.clone();
    let half = step_size * T::lit(0.5);
    for _ in 0..num_steps {
        for (m, &g) in pt.momentum.iter_mut().zip(&pt.gradient) {
            *m = *m + half * g;
        }
        for ((q, &m), &w) in pt.position.iter_mut().zip(&pt.momentum).zip(inv_metric) {
            *q = *q + step_size * w * m;
        }
        pt.log_density = grad_fn(&pt.position, &mut pt.gradient);
        if !pt.log_density.is_finite() {
            break;
        }
        for (m, &g) in pt.momentum.iter_mut().zip(&pt.gradient) {
            *m = *m + half * g;
        }
    }
    pt
}

/// Dual averaging of `log step_size` towards a target acceptance statistic.
#[derive(Debug, Clone)]
struct DualAveraging {
    target: f64,
    mu: f64,
    log_step: f64,
    log_step_avg: f64,
    error_avg: f64,
    count: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(step_size: f64, target: f64) -> Self {
        let mut da =
            Self { target, mu: 0.0, log_step: 0.0, log_step_avg: 0.0, error_avg: 0.0, count: 0.0 };
        da.restart(step_size);
        da
    }

    fn restart(&mut self, step_size: f64) {
        self.mu = (10.0 * step_size).ln();
        self.log_step = step_size.ln();
        self.log_step_avg = 0.0;
        self.error_avg = 0.0;
        self.count = 0.0;
    }

    fn update(&mut self, accept_stat: f64) {
        self.count += 1.0;
        let eta = 1.0 / (self.count + Self::T0);
        self.error_avg = (1.0 - eta) * self.error_avg + eta * (self.target - accept_stat);
        self.log_step = self.mu - self.count.sqrt() / Self::GAMMA * self.error_avg;
        let w = self.count.powf(-Self::KAPPA);
        self.log_step_avg = w * self.log_step + (1.0 - w) * self.log_step_avg;
    }

    fn step_size(&self) -> f64 {
        self.log_step.exp()
    }

    fn final_step_size(&self) -> f64 {
        self.log_step_avg.exp()
    }
}

/// Slow-window boundaries for metric adaptation: `(start, ends)`, where each
/// end is the exclusive iteration index closing a window.
fn adaptation_windows(warmup: usize) -> Option<(usize, Vec<usize>)> {
    if warmup < 20 {
        return None;
    }
    let (mut init, mut term, mut base) = (75usize, 50usize, 25usize);
    if init + term + base > warmup {
        init = (0.15 * warmup as f64) as usize;
        term = (0.1 * warmup as f64) as usize;
        base = warmup - init - term;
    }
    let end_slow = warmup - term;
    let mut ends = Vec::new();
    let mut start = init;
    let mut size = base;
    while start < end_slow {
        let mut end = start + size;
        if end + 2 * size > end_slow {
            end = end_slow;
        }
        ends.push(end);
        start = end;
        size *= 2;
    }
    Some((init, ends))
}

/// Streaming mean/variance per coordinate.
#[derive(Debug, Clone)]
struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(dim: usize) -> Self {
        Self { n: 0, mean: vec![0.0; dim], m2: vec![0.0; dim] }
    }

    fn add<T: Scalar>(&mut self, x: &[T]) {
        self.n += 1;
        let n = self.n as f64;
        for ((mean, m2), &xi) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let xi = xi.as_f64();
            let d = xi - *mean;
            *mean += d / n;
            *m2 += d * (xi - *mean);
        }
    }

    /// Sample variances shrunk towards `1e-3`.
    fn regularized_variance(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.m2
            .iter()
            .map(|&m2| {
                let var = m2 / (n - 1.0);
                (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
            })
            .collect()
    }
}

/// Progress notification sent every so often from each chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainProgress {
    pub chain: usize,
    pub iteration: usize,
    pub total: usize,
    pub warmup: bool,
}

struct ChainOutput<T> {
    draws: Vec<Vec<T>>,
    accept_mean: f64,
    divergences: usize,
    step_size: f64,
    steps: usize,
    inv_metric: Vec<f64>,
    warnings: usize,
}

struct Chain<'a, T, D> {
    target: &'a D,
    config: &'a SamplerConfig,
    rng: ChaCha8Rng,
    inv_metric: Vec<T>,
    current: PhasePoint<T>,
}

impl<'a, T, D> Chain<'a, T, D>
where
    T: Scalar,
    D: LogDensity<T>,
    StandardNormal: Distribution<T>,
{
    fn new(target: &'a D, config: &'a SamplerConfig, chain_index: usize) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(chain_index as u64);
        let dim = target.dim();
        let mut current = None;
        for _ in 0..100 {
            let position: Vec<T> = (0..dim).map(|_| T::lit(rng.random_range(-1.0..=1.0))).collect();
            let pt = PhasePoint::new(position, vec![T::zero(); dim], |q, g| {
                target.log_density_and_gradient(q, g)
            });
            if pt.log_density.is_finite() {
                current = Some(pt);
                break;
            }
        }
        let current = current.ok_or_else(|| {
            Error::Sampler(format!(
                "chain {chain_index}: no finite log density found in 100 initial draws"
            ))
        })?;
        Ok(Self { target, config, rng, inv_metric: vec![T::one(); dim], current })
    }

    fn resample_momentum(&mut self) {
        for (m, &w) in self.current.momentum.iter_mut().zip(&self.inv_metric) {
            let z: T = self.rng.sample(StandardNormal);
            *m = z / w.sqrt();
        }
    }

    fn integrate(&self, step_size: f64, steps: usize) -> PhasePoint<T> {
        leapfrog(&self.current, T::lit(step_size), steps, &self.inv_metric, |q, g| {
            self.target.log_density_and_gradient(q, g)
        })
    }

    /// One HMC transition. Returns `(acceptance statistic, divergent)`.
    fn transition(&mut self, step_size: f64, steps: usize) -> (f64, bool) {
        self.resample_momentum();
        let h0 = self.current.energy(&self.inv_metric).as_f64();
        let proposal = self.integrate(step_size, steps);
        let h1 = proposal.energy(&self.inv_metric).as_f64();
        let error = h1 - h0;
        if !error.is_finite() || error > MAX_ENERGY_ERROR {
            return (0.0, true);
        }
        let accept_stat = (-error).exp().min(1.0);
        if self.rng.random::<f64>() < accept_stat {
            self.current = proposal;
        }
        (accept_stat, false)
    }

    /// Doubles or halves the step size until a single leapfrog step crosses
    /// an acceptance probability of 0.8.
    fn initial_step_size(&mut self, start: f64) -> f64 {
        let mut step = start;
        let mut direction = 0.0;
        for _ in 0..60 {
            self.resample_momentum();
            let h0 = self.current.energy(&self.inv_metric).as_f64();
            let h1 = self.integrate(step, 1).energy(&self.inv_metric).as_f64();
            let delta = h0 - h1;
            let up = delta.is_finite() && delta > 0.8f64.ln();
            let dir = if up { 1.0 } else { -1.0 };
            if direction == 0.0 {
                direction = dir;
            } else if dir != direction {
                break;
            }
            let next = if direction > 0.0 { step * 2.0 } else { step * 0.5 };
            if !(1e-10..=1e3).contains(&next) {
                break;
            }
            step = next;
        }
        step
    }

    fn steps_for(&self, step_size: f64) -> usize {
        self.steps_over(self.config.integration_time, step_size)
    }

    fn jittered_steps(&mut self, step_size: f64) -> usize {
        let jitter = self.config.jitter;
        let scale =
            if jitter > 0.0 { self.rng.random_range(1.0 - jitter..=1.0 + jitter) } else { 1.0 };
        self.steps_over(self.config.integration_time * scale, step_size)
    }

    fn steps_over(&self, time: f64, step_size: f64) -> usize {
        let steps = (time / step_size).ceil();
        if steps.is_finite() {
            (steps as usize).clamp(1, self.config.max_leapfrog_steps)
        } else {
            self.config.max_leapfrog_steps
        }
    }

    fn run(
        mut self,
        chain_index: usize,
        progress: &(dyn Fn(ChainProgress) + Sync),
    ) -> Result<ChainOutput<T>> {
        let cfg = self.config;
        let total = cfg.iterations_per_chain;
        let windows = adaptation_windows(cfg.warmup);
        let mut welford = Welford::new(self.target.dim());
        let mut window = 0usize;

        let mut step_size = self.initial_step_size(1.0);
        let mut da = DualAveraging::new(step_size, cfg.target_accept);

        let mut draws = Vec::with_capacity(cfg.draws_per_chain());
        let mut accept_sum = 0.0;
        let mut divergences = 0usize;
        let mut warnings = 0usize;

        for it in 0..total {
            let warm = it < cfg.warmup;
            let steps = self.jittered_steps(step_size);
            let (accept, divergent) = self.transition(step_size, steps);

            if warm {
                da.update(accept);
                step_size = da.step_size();
                if let Some((start, ends)) = &windows {
                    if window < ends.len() && it >= *start && it < ends[window] {
                        welford.add(&self.current.position);
                        if it + 1 == ends[window] {
                            let var = welford.regularized_variance();
                            self.inv_metric = var.iter().map(|&v| T::lit(v)).collect();
                            welford = Welford::new(self.target.dim());
                            window += 1;
                            step_size = self.initial_step_size(step_size);
                            da.restart(step_size);
                        }
                    }
                }
                if it + 1 == cfg.warmup {
                    step_size = da.final_step_size();
                }
            } else {
                accept_sum += accept;
                if divergent {
                    divergences += 1;
                }
                warnings += self.target.warnings(&self.current.position);
                draws.push(self.target.output(&self.current.position));
            }

            if (it + 1) % 100 == 0 || it + 1 == total {
                progress(ChainProgress {
                    chain: chain_index,
                    iteration: it + 1,
                    total,
                    warmup: warm,
                });
            }
        }

        let kept = draws.len();
        if kept > 0 && divergences == kept {
            return Err(Error::Sampler(format!(
                "chain {chain_index}: all {kept} post-warm-up transitions diverged \
                 (step size {step_size:.3e}, {} leapfrog steps)",
                self.steps_for(step_size)
            )));
        }
        log::debug!(
            "chain {chain_index}: step size {step_size:.4}, {} steps, accept {:.3}, {divergences} divergences",
            self.steps_for(step_size),
            accept_sum / kept.max(1) as f64
        );
        Ok(ChainOutput {
            draws,
            accept_mean: accept_sum / kept.max(1) as f64,
            divergences,
            step_size,
            steps: self.steps_for(step_size),
            inv_metric: self.inv_metric.iter().map(|w| w.as_f64()).collect(),
            warnings,
        })
    }
}

/// Samples an arbitrary target with the configured protocol.
pub fn sample_target<T, D>(
    config: &SamplerConfig,
    target: &D,
    parameter_names: Vec<String>,
    progress: &(dyn Fn(ChainProgress) + Sync),
) -> Result<PosteriorDraws<T>>
where
    T: Scalar,
    D: LogDensity<T>,
    StandardNormal: Distribution<T>,
{
    config.validate()?;
    if parameter_names.len() != target.dim() {
        return Err(Error::Dimension { expected: target.dim(), got: parameter_names.len() });
    }
    let run = |c: usize| Chain::new(target, config, c)?.run(c, progress);
    let outputs: Vec<ChainOutput<T>> = if config.parallel {
        (0..config.chains).into_par_iter().map(run).collect::<Result<_>>()?
    } else {
        (0..config.chains).map(run).collect::<Result<_>>()?
    };

    let mut draws = PosteriorDraws {
        draws: Vec::with_capacity(outputs.len()),
        parameter_names,
        accept_stats: Vec::new(),
        divergence_count: Vec::new(),
        step_sizes: Vec::new(),
        leapfrog_steps: Vec::new(),
        inv_metric: Vec::new(),
        warning_count: Vec::new(),
    };
    for out in outputs {
        draws.draws.push(out.draws);
        draws.accept_stats.push(out.accept_mean);
        draws.divergence_count.push(out.divergences);
        draws.step_sizes.push(out.step_size);
        draws.leapfrog_steps.push(out.steps);
        draws.inv_metric.push(out.inv_metric);
        draws.warning_count.push(out.warnings);
    }
    Ok(draws)
}

/// Samples the TSLS model posterior for `data`.
pub fn sample<T>(
    config: &SamplerConfig,
    data: &ReportedDataset,
    basis: &SplineBasis<T>,
) -> Result<PosteriorDraws<T>>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    sample_with_progress(config, data, basis, &|_| {})
}

pub fn sample_with_progress<T>(
    config: &SamplerConfig,
    data: &ReportedDataset,
    basis: &SplineBasis<T>,
    progress: &(dyn Fn(ChainProgress) + Sync),
) -> Result<PosteriorDraws<T>>
where
    T: Scalar,
    StandardNormal: Distribution<T>,
{
    let posterior = if config.prior_only {
        Posterior::prior_only(basis)
    } else {
        if data.is_empty() {
            return Err(Error::EmptyData);
        }
        Posterior::new(data, basis)?
    };
    let names = parameter_names(basis.num_functions());
    match config.parameterization {
        Parameterization::NonCentered => {
            sample_target(config, &NonCentered(posterior), names, progress)
        }
        Parameterization::Centered => sample_target(config, &posterior, names, progress),
    }
}
