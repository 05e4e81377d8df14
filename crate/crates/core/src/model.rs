//! Parameter transforms, prior, and posterior density of the TSLS model.
//!
//! Unconstrained parameters are `θ = (δ_1, …, δ_K, log σ)`. The spline
//! coefficients are `α_k = exp(Σ_{j ≥ k} δ_j)`, the unnormalized TSLS curve is
//! `γ_d = Σ_k α_k BI_k(d)`, and `φ = γ / Σ_{d < 730} γ_d`. The prior is
//! `δ_j | σ ~ N(0, σ²)`, `σ ~ N⁺(0, 1)`, written on the `log σ` scale with its
//! Jacobian.

use serde::{Deserialize, Serialize};

use crate::basis::SplineBasis;
use crate::error::{Error, Result};
use crate::reporting::ReportedDataset;
use crate::sampler::LogDensity;
use crate::scalar::{log_sum_exp, Scalar};
use crate::SUPPORT_DAYS;

/// Bound applied to `log α_k` before exponentiation.
pub const LOG_ALPHA_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub delta: Vec<T>,
    pub log_sigma: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(delta: Vec<T>, log_sigma: T) -> Self {
        Self { delta, log_sigma }
    }

    /// `δ = 0`, `σ = 1`.
    pub fn zeros(num_functions: usize) -> Self {
        Self::new(vec![T::zero(); num_functions], T::zero())
    }

    /// Splits a flat `[δ_1..δ_K, log σ]` vector.
    pub fn from_slice(theta: &[T]) -> Result<Self> {
        match theta.split_last() {
            Some((&log_sigma, delta)) if !delta.is_empty() => {
                Ok(Self::new(delta.to_vec(), log_sigma))
            }
            _ => Err(Error::Dimension { expected: 2, got: theta.len() }),
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        let mut v = self.delta.clone();
        v.push(self.log_sigma);
        v
    }

    pub fn dim(&self) -> usize {
        self.delta.len() + 1
    }

    pub fn sigma(&self) -> T {
        self.log_sigma.exp()
    }

    pub fn is_finite(&self) -> bool {
        self.log_sigma.is_finite() && self.delta.iter().all(|d| d.is_finite())
    }
}

/// Names of the flat parameter vector entries: `delta_1 .. delta_K, log_sigma`.
pub fn parameter_names(num_functions: usize) -> Vec<String> {
    (1..=num_functions)
        .map(|j| format!("delta_{j}"))
        .chain(std::iter::once("log_sigma".to_string()))
        .collect()
}

/// Monotone non-increasing probability vector over days `0..support`.
///
/// The day just past the support carries probability zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TslsDistribution<T> {
    phi: Vec<T>,
}

impl<T: Scalar> TslsDistribution<T> {
    /// Validates non-negativity, normalization and monotonicity up to
    /// rounding.
    pub fn new(phi: Vec<T>) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::InvalidDistribution("empty probability vector".into()));
        }
        if phi.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(Error::InvalidDistribution(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let total: T = phi.iter().copied().sum();
        let slack = T::epsilon() * T::lit(64.0);
        if (total - T::one()).abs() > T::epsilon().sqrt() {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        if let Some(d) =
            phi.windows(2).position(|w| w[1] > w[0] + slack * w[0] + T::min_positive_value())
        {
            return Err(Error::InvalidDistribution(format!(
                "probabilities increase between day {d} and day {}",
                d + 1
            )));
        }
        Ok(Self { phi })
    }

    pub fn uniform(support: usize) -> Self {
        Self { phi: vec![T::one() / T::from_count(support); support] }
    }

    /// Normalizes a non-negative, non-increasing curve over the support.
    pub(crate) fn from_gamma(gamma: &[T]) -> Self {
        let total: T = gamma.iter().copied().sum();
        Self { phi: gamma.iter().map(|&g| g / total).collect() }
    }

    pub fn probabilities(&self) -> &[T] {
        &self.phi
    }

    pub fn into_probabilities(self) -> Vec<T> {
        self.phi
    }

    /// `φ_d`, zero at and beyond the boundary.
    pub fn get(&self, day: usize) -> T {
        self.phi.get(day).copied().unwrap_or_else(T::zero)
    }

    pub fn phi_at_boundary(&self) -> T {
        T::zero()
    }

    pub fn support(&self) -> usize {
        self.phi.len()
    }
}

/// Reverse cumulative sums `s_k = Σ_{j ≥ k} δ_j`, clamped to `±700`.
///
/// Returns the clamped sums and a flag per entry marking clamped ones.
pub fn log_alpha_from_delta<T: Scalar>(delta: &[T]) -> (Vec<T>, Vec<bool>) {
    let bound = T::lit(LOG_ALPHA_CLAMP);
    let mut log_alpha = vec![T::zero(); delta.len()];
    let mut clamped = vec![false; delta.len()];
    let mut acc = T::zero();
    for k in (0..delta.len()).rev() {
        acc = acc + delta[k];
        let c = acc.max(-bound).min(bound);
        clamped[k] = c != acc;
        log_alpha[k] = c;
    }
    (log_alpha, clamped)
}

/// `α_k = exp(Σ_{j ≥ k} δ_j)`, with the exponent clamped to `±700`.
pub fn alpha_from_delta<T: Scalar>(delta: &[T]) -> Vec<T> {
    let (log_alpha, clamped) = log_alpha_from_delta(delta);
    let hits = clamped.iter().filter(|&&c| c).count();
    if hits > 0 {
        log::warn!("{hits} spline coefficient exponent(s) clamped to ±{LOG_ALPHA_CLAMP}");
    }
    log_alpha.into_iter().map(T::exp).collect()
}

/// Number of clamped coefficient exponents at `params`.
pub fn clamp_count<T: Scalar>(delta: &[T]) -> usize {
    log_alpha_from_delta(delta).1.iter().filter(|&&c| c).count()
}

/// Unclamped reverse cumulative sums.
fn reverse_sums<T: Scalar>(delta: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); delta.len()];
    let mut acc = T::zero();
    for k in (0..delta.len()).rev() {
        acc = acc + delta[k];
        out[k] = acc;
    }
    out
}

/// `α / max α`. `φ` does not depend on the overall scale of `α`, so this
/// never overflows and needs no clamp.
fn relative_alpha<T: Scalar>(log_alpha: &[T]) -> (Vec<T>, T) {
    let shift = log_alpha.iter().copied().fold(T::neg_infinity(), T::max);
    (log_alpha.iter().map(|&s| (s - shift).exp()).collect(), shift)
}

pub fn phi_from_params<T: Scalar>(
    params: &ModelParams<T>,
    basis: &SplineBasis<T>,
) -> Result<TslsDistribution<T>> {
    if !params.is_finite() {
        return Err(Error::InvalidDistribution("parameters must be finite".into()));
    }
    let (alpha, _) = relative_alpha(&reverse_sums(&params.delta));
    let gamma = basis.evaluate_gamma(&alpha)?;
    Ok(TslsDistribution::from_gamma(&gamma[..basis.support_days()]))
}

fn half_ln_2pi<T: Scalar>() -> T {
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln())
}

pub fn log_prior<T: Scalar>(params: &ModelParams<T>) -> T {
    let ls = params.log_sigma;
    let sigma = ls.exp();
    let inv_var = (T::lit(-2.0) * ls).exp();
    let half = T::lit(0.5);
    let c = half_ln_2pi::<T>();
    let deltas =
        params.delta.iter().fold(T::zero(), |acc, &d| acc - c - ls - half * d * d * inv_var);
    let sigma_term = T::lit(std::f64::consts::LN_2) - c - half * sigma * sigma;
    deltas + sigma_term + ls
}

/// Gradient of [`log_prior`] with respect to `(δ, log σ)`, written into `grad`.
fn grad_log_prior_into<T: Scalar>(delta: &[T], log_sigma: T, grad: &mut [T]) {
    let inv_var = (T::lit(-2.0) * log_sigma).exp();
    let sigma2 = (T::lit(2.0) * log_sigma).exp();
    let mut d_ls = T::one() - sigma2;
    for (g, &d) in grad.iter_mut().zip(delta) {
        *g = -d * inv_var;
        d_ls = d_ls - T::one() + d * d * inv_var;
    }
    grad[delta.len()] = d_ls;
}

/// One distinct interval of the data, with per-basis-function mass.
#[derive(Debug, Clone)]
struct IntervalTerm<T> {
    count: T,
    /// `Σ_{y ∈ interval} BI_k(y)` for each k.
    mass: Vec<T>,
    log_mass: Vec<T>,
}

/// Log posterior over `θ = (δ, log σ)` for a fixed dataset and basis.
///
/// Distinct day intervals are grouped with their multiplicities, so each
/// evaluation costs `O(#intervals × K)` regardless of the sample size.
#[derive(Debug, Clone)]
pub struct Posterior<'a, T> {
    basis: &'a SplineBasis<T>,
    terms: Vec<IntervalTerm<T>>,
    total_mass: Vec<T>,
    log_total_mass: Vec<T>,
    n_records: T,
}

impl<'a, T: Scalar> Posterior<'a, T> {
    pub fn new(data: &ReportedDataset, basis: &'a SplineBasis<T>) -> Result<Self> {
        let mut posterior = Self::prior_only(basis);
        if data.is_empty() {
            return Ok(posterior);
        }
        if basis.support_days() != SUPPORT_DAYS {
            return Err(Error::Dimension { expected: SUPPORT_DAYS, got: basis.support_days() });
        }
        let k = basis.num_functions();
        for (iv, m) in data.interval_counts() {
            let mut mass = vec![T::zero(); k];
            for d in iv.days() {
                for (acc, &b) in mass.iter_mut().zip(basis.row(d)) {
                    *acc = *acc + b;
                }
            }
            let log_mass = mass.iter().map(|m| m.ln()).collect();
            posterior.terms.push(IntervalTerm { count: T::from_count(m), mass, log_mass });
        }
        posterior.n_records = T::from_count(data.len());
        Ok(posterior)
    }

    /// Posterior with no likelihood terms: the prior alone.
    pub fn prior_only(basis: &'a SplineBasis<T>) -> Self {
        let k = basis.num_functions();
        let mut total_mass = vec![T::zero(); k];
        for d in 0..basis.support_days() {
            for (acc, &b) in total_mass.iter_mut().zip(basis.row(d)) {
                *acc = *acc + b;
            }
        }
        let log_total_mass = total_mass.iter().map(|m| m.ln()).collect();
        Self { basis, terms: Vec::new(), total_mass, log_total_mass, n_records: T::zero() }
    }

    pub fn basis(&self) -> &SplineBasis<T> {
        self.basis
    }

    /// Number of parameters, `K + 1`.
    pub fn dim(&self) -> usize {
        self.basis.num_functions() + 1
    }

    pub fn log_posterior(&self, params: &ModelParams<T>) -> Result<T> {
        self.check_dim(params.dim())?;
        let mut scratch = vec![T::zero(); self.dim()];
        Ok(self.eval(&params.delta, params.log_sigma, &mut scratch, false))
    }

    pub fn grad_log_posterior(&self, params: &ModelParams<T>) -> Result<Vec<T>> {
        self.check_dim(params.dim())?;
        let mut grad = vec![T::zero(); self.dim()];
        self.eval(&params.delta, params.log_sigma, &mut grad, true);
        Ok(grad)
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got });
        }
        Ok(())
    }

    fn eval(&self, delta: &[T], log_sigma: T, grad: &mut [T], with_grad: bool) -> T {
        let params = ModelParams::new(delta.to_vec(), log_sigma);
        let mut lp = log_prior(&params);
        if with_grad {
            grad_log_prior_into(delta, log_sigma, grad);
        }
        if self.terms.is_empty() {
            return lp;
        }

        let k = delta.len();
        let log_alpha = reverse_sums(delta);
        let (alpha, shift) = relative_alpha(&log_alpha);

        // d(log-likelihood)/d(log α_k)
        let mut d_log_alpha = vec![T::zero(); k];

        let norm =
            weighted_log_sum(&alpha, &log_alpha, shift, &self.total_mass, &self.log_total_mass);
        lp = lp - self.n_records * norm.log_sum;
        if with_grad {
            norm.accumulate_weights(
                &alpha,
                &log_alpha,
                shift,
                &self.total_mass,
                &self.log_total_mass,
                -self.n_records,
                &mut d_log_alpha,
            );
        }

        for term in &self.terms {
            let t = weighted_log_sum(&alpha, &log_alpha, shift, &term.mass, &term.log_mass);
            lp = lp + term.count * t.log_sum;
            if with_grad {
                t.accumulate_weights(
                    &alpha,
                    &log_alpha,
                    shift,
                    &term.mass,
                    &term.log_mass,
                    term.count,
                    &mut d_log_alpha,
                );
            }
        }

        if with_grad {
            // log α_k depends on δ_j for every j >= k.
            let mut acc = T::zero();
            for j in 0..k {
                acc = acc + d_log_alpha[j];
                grad[j] = grad[j] + acc;
            }
        }
        lp
    }
}

/// `ln Σ_k α_k m_k`, computed from shifted coefficients with a log-space
/// fallback when the linear sum underflows.
struct LogSum<T> {
    log_sum: T,
    log_space: bool,
}

fn weighted_log_sum<T: Scalar>(
    alpha: &[T],
    log_alpha: &[T],
    shift: T,
    mass: &[T],
    log_mass: &[T],
) -> LogSum<T> {
    let linear: T = alpha.iter().zip(mass).map(|(&a, &m)| a * m).sum();
    if linear > T::min_positive_value() * T::lit(1e20) {
        LogSum { log_sum: linear.ln() + shift, log_space: false }
    } else {
        let log_sum = log_sum_exp(log_alpha.iter().zip(log_mass).map(|(&a, &m)| a + m));
        LogSum { log_sum, log_space: true }
    }
}

impl<T: Scalar> LogSum<T> {
    /// Adds `scale · α_k m_k / Σ_j α_j m_j` into `out[k]`.
    #[allow(clippy::too_many_arguments)]
    fn accumulate_weights(
        &self,
        alpha: &[T],
        log_alpha: &[T],
        shift: T,
        mass: &[T],
        log_mass: &[T],
        scale: T,
        out: &mut [T],
    ) {
        if self.log_space {
            for k in 0..out.len() {
                let w = (log_alpha[k] + log_mass[k] - self.log_sum).exp();
                out[k] = out[k] + scale * w;
            }
        } else {
            let inv = (shift - self.log_sum).exp();
            for k in 0..out.len() {
                out[k] = out[k] + scale * alpha[k] * mass[k] * inv;
            }
        }
    }
}

impl<T: Scalar> LogDensity<T> for Posterior<'_, T> {
    fn dim(&self) -> usize {
        Posterior::dim(self)
    }

    fn log_density_and_gradient(&self, position: &[T], gradient: &mut [T]) -> T {
        let (log_sigma, delta) = position.split_last().expect("non-empty position");
        self.eval(delta, *log_sigma, gradient, true)
    }

    fn warnings(&self, position: &[T]) -> usize {
        clamp_count(&position[..position.len() - 1])
    }
}

/// The posterior in coordinates `(η, log σ)` with `δ = σ η`. Draws are
/// reported back in `(δ, log σ)`.
#[derive(Debug, Clone)]
pub struct NonCentered<'a, T>(pub Posterior<'a, T>);

impl<T: Scalar> NonCentered<'_, T> {
    fn centered(&self, position: &[T]) -> Vec<T> {
        let (&log_sigma, eta) = position.split_last().expect("non-empty position");
        let sigma = log_sigma.exp();
        let mut theta: Vec<T> = eta.iter().map(|&e| sigma * e).collect();
        theta.push(log_sigma);
        theta
    }
}

impl<T: Scalar> LogDensity<T> for NonCentered<'_, T> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn log_density_and_gradient(&self, position: &[T], gradient: &mut [T]) -> T {
        let theta = self.centered(position);
        let lp = self.0.log_density_and_gradient(&theta, gradient);
        let (&log_sigma, eta) = position.split_last().expect("non-empty position");
        let k = eta.len();
        let sigma = log_sigma.exp();
        // d/dℓ picks up Σ g_δ δ from δ = e^ℓ η, plus K from the Jacobian.
        let chain: T =
            gradient[..k].iter().zip(&theta[..k]).fold(T::zero(), |acc, (&g, &d)| acc + g * d);
        for g in &mut gradient[..k] {
            *g = *g * sigma;
        }
        gradient[k] = gradient[k] + chain + T::from_count(k);
        lp + T::from_count(k) * log_sigma
    }

    fn warnings(&self, position: &[T]) -> usize {
        self.0.warnings(&self.centered(position))
    }

    fn output(&self, position: &[T]) -> Vec<T>
    where
        T: Clone,
    {
        self.centered(position)
    }
}

pub fn log_posterior<T: Scalar>(
    params: &ModelParams<T>,
    data: &ReportedDataset,
    basis: &SplineBasis<T>,
) -> Result<T> {
    Posterior::new(data, basis)?.log_posterior(params)
}

pub fn grad_log_posterior<T: Scalar>(
    params: &ModelParams<T>,
    data: &ReportedDataset,
    basis: &SplineBasis<T>,
) -> Result<Vec<T>> {
    Posterior::new(data, basis)?.grad_log_posterior(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisConfig;
    use crate::reporting::{HeapSet, ReportedDuration, Unit};

    fn basis() -> SplineBasis<f64> {
        SplineBasis::build(&BasisConfig::new(10, 3)).unwrap()
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_from_delta(&[0.0_f64; 5]), vec![1.0; 5]);
        let ln2 = 2f64.ln();
        let a = alpha_from_delta(&[0.0, 0.0, 0.0, ln2]);
        assert!(a.iter().all(|&v| (v - 2.0).abs() < 1e-15));
        let a = alpha_from_delta(&[1.0_f64, -1.0, 0.0]);
        assert_eq!(a[0], 1.0);
        assert!((a[1] - (-1f64).exp()).abs() < 1e-16);
        assert!((a[1] - 0.3679).abs() < 1e-4);
        assert_eq!(a[2], 1.0);
    }

    #[test]
    fn alpha_clamps_large_sums() {
        let (s, clamped) = log_alpha_from_delta(&[500.0_f64, 500.0]);
        assert_eq!(s, vec![700.0, 500.0]);
        assert_eq!(clamped, vec![true, false]);
        assert!(alpha_from_delta(&[500.0_f64, 500.0]).iter().all(|a| a.is_finite()));
        assert_eq!(clamp_count(&[-400.0_f64, -400.0]), 1);
    }

    #[test]
    fn phi_is_monotone_simplex_at_zero() {
        let b = basis();
        let phi = phi_from_params(&ModelParams::zeros(13), &b).unwrap();
        let p = phi.probabilities();
        assert_eq!(p.len(), 730);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[1] <= w[0]));
        assert!(p[729] < 0.01 * p[0]);
        assert_eq!(phi.phi_at_boundary(), 0.0);
    }

    #[test]
    fn log_prior_closed_form() {
        let k = 13;
        let c = 0.5 * (2.0 * std::f64::consts::PI).ln();
        let expect = k as f64 * -c + (2f64.ln() - c - 0.5);
        let lp = log_prior(&ModelParams::<f64>::zeros(k));
        assert!((lp - expect).abs() < 1e-12);
    }

    #[test]
    fn log_prior_sigma_scaling() {
        // With δ = 0 only the -K ln σ part of the Gaussian terms moves.
        let k = 7;
        let base = ModelParams::<f64>::zeros(k);
        let doubled = ModelParams::new(vec![0.0; k], 2f64.ln());
        let delta_part = |p: &ModelParams<f64>| {
            let s = p.sigma();
            log_prior(p)
                - (2f64.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * s * s)
                - p.log_sigma
        };
        let diff = delta_part(&doubled) - delta_part(&base);
        assert!((diff + k as f64 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn empty_dataset_is_prior() {
        let b = basis();
        let data = ReportedDataset::empty(HeapSet::default());
        let params = ModelParams::new(vec![0.3; 13], -0.2);
        assert_eq!(log_posterior(&params, &data, &b).unwrap(), log_prior(&params));
    }

    #[test]
    fn single_day_zero_record() {
        let b = basis();
        let data =
            ReportedDataset::new(vec![ReportedDuration::days(0)], HeapSet::default()).unwrap();
        let params = ModelParams::new((0..13).map(|i| 0.1 * i as f64 - 0.4).collect(), 0.3);
        let phi = phi_from_params(&params, &b).unwrap();
        let lp = log_posterior(&params, &data, &b).unwrap();
        assert!((lp - (log_prior(&params) + phi.get(0).ln())).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let b = basis();
        let recs = vec![
            ReportedDuration::days(0),
            ReportedDuration::days(7),
            ReportedDuration::days(3),
            ReportedDuration::weeks(2),
            ReportedDuration::months(4),
            ReportedDuration::new(1, Unit::Year),
        ];
        let data = ReportedDataset::new(recs, HeapSet::default()).unwrap();
        let post = Posterior::new(&data, &b).unwrap();
        let params =
            ModelParams::new((0..13).map(|i| ((i * 7) % 5) as f64 * 0.3 - 0.5).collect(), 0.2);
        let grad = post.grad_log_posterior(&params).unwrap();
        let theta = params.to_vec();
        let h = 1e-5;
        for i in 0..theta.len() {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[i] += h;
            dn[i] -= h;
            let f = |t: &[f64]| post.log_posterior(&ModelParams::from_slice(t).unwrap()).unwrap();
            let fd = (f(&up) - f(&dn)) / (2.0 * h);
            let scale = fd.abs().max(grad[i].abs()).max(1e-3);
            assert!((fd - grad[i]).abs() / scale < 1e-6, "coordinate {i}: fd {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn log_space_fallback_keeps_likelihood_finite() {
        // Push every coefficient with support in the tail to e^-690 relative to
        // the first so the year interval mass underflows in linear arithmetic.
        let b = basis();
        let data =
            ReportedDataset::new(vec![ReportedDuration::year()], HeapSet::default()).unwrap();
        let mut delta = vec![0.0; 13];
        delta[0] = 690.0;
        delta[12] = -5.0;
        let params = ModelParams::new(delta, 0.0);
        let lp = log_posterior(&params, &data, &b).unwrap();
        assert!(lp.is_finite());
        let grad = grad_log_posterior(&params, &data, &b).unwrap();
        assert!(grad.iter().all(|g| g.is_finite()));
    }

    #[test]
    fn rejects_basis_with_wrong_support() {
        let b: SplineBasis<f64> =
            SplineBasis::build(&BasisConfig { support_days: 100, num_segments: 4, degree: 3 })
                .unwrap();
        let data =
            ReportedDataset::new(vec![ReportedDuration::days(3)], HeapSet::default()).unwrap();
        assert!(matches!(Posterior::new(&data, &b), Err(Error::Dimension { .. })));
    }

    #[test]
    fn distribution_validation() {
        assert!(TslsDistribution::new(vec![0.5_f64, 0.5]).is_ok());
        assert!(TslsDistribution::new(vec![0.4_f64, 0.6]).is_err());
        assert!(TslsDistribution::new(vec![0.5_f64, 0.4]).is_err());
        assert!(TslsDistribution::new(vec![1.2_f64, -0.2]).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let b: SplineBasis<f32> = SplineBasis::build(&BasisConfig::new(10, 3)).unwrap();
        let phi = phi_from_params(&ModelParams::<f32>::zeros(13), &b).unwrap();
        assert!((phi.probabilities().iter().sum::<f32>() - 1.0).abs() < 1e-4);
    }
}
