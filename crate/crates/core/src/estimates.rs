//! From TSLS distributions to TBS distributions and posterior summaries.
//!
//! With `φ_d = P(Y = d)` non-increasing and `φ_{730} = 0`, the gap-time
//! survival function is `S_X(y) = φ_y / φ_0`, the gap-time pmf is
//! `f_X(x) = (φ_x - φ_{x+1}) / φ_0`, and the mean gap in the discrete
//! convention (class `d` covers `(d, d+1]`) is `1 / φ_0 = Σ_y S_X(y)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::SplineBasis;
use crate::error::{Error, Result};
use crate::model::TslsDistribution;
use crate::sampler::PosteriorDraws;
use crate::scalar::Scalar;

pub const MEAN_TBS_LABEL: &str = "mean TBS (discrete convention)";

/// Gap-time pmf over `x = 0..support`.
#[derive(Debug, Clone, PartialEq)]
pub struct TbsDistribution<T> {
    f_x: Vec<T>,
}

impl<T: Scalar> TbsDistribution<T> {
    pub fn probabilities(&self) -> &[T] {
        &self.f_x
    }

    pub fn into_probabilities(self) -> Vec<T> {
        self.f_x
    }
}

fn day_zero<T: Scalar>(phi: &TslsDistribution<T>) -> Result<T> {
    let p0 = phi.get(0);
    if p0 > T::zero() {
        Ok(p0)
    } else {
        Err(Error::DegenerateDistribution)
    }
}

pub fn tbs_from_tsls<T: Scalar>(phi: &TslsDistribution<T>) -> Result<TbsDistribution<T>> {
    let p0 = day_zero(phi)?;
    let f_x = (0..phi.support()).map(|x| (phi.get(x) - phi.get(x + 1)) / p0).collect();
    Ok(TbsDistribution { f_x })
}

/// `S_X(y)` for `y = 0..=support`; the last entry is the pinned zero.
pub fn survival_from_tsls<T: Scalar>(phi: &TslsDistribution<T>) -> Result<Vec<T>> {
    let p0 = day_zero(phi)?;
    Ok((0..=phi.support()).map(|y| phi.get(y) / p0).collect())
}

/// Mean gap time `1 / φ_0`, in days on the discrete convention.
pub fn expected_tbs<T: Scalar>(phi: &TslsDistribution<T>) -> Result<T> {
    Ok(day_zero(phi)?.recip())
}

/// The forward current-duration map: `φ_y = S_X(y) / Σ_{y'} S_X(y')`.
pub fn tsls_from_tbs<T: Scalar>(f_x: &[T]) -> Result<TslsDistribution<T>> {
    if f_x.is_empty() || f_x.iter().any(|p| !p.is_finite() || *p < T::zero()) {
        return Err(Error::InvalidDistribution(
            "gap-time probabilities must be finite and non-negative".into(),
        ));
    }
    let mut survival = vec![T::zero(); f_x.len()];
    let mut acc = T::zero();
    for (s, &f) in survival.iter_mut().zip(f_x).rev() {
        acc = acc + f;
        *s = acc;
    }
    if !(acc > T::zero()) {
        return Err(Error::InvalidDistribution("gap-time probabilities sum to zero".into()));
    }
    Ok(TslsDistribution::from_gamma(&survival))
}

/// Linear interpolation between order statistics (`h = (n - 1) q`).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleInterval {
    pub level: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantitySummary {
    pub median: f64,
    pub intervals: Vec<CredibleInterval>,
}

impl QuantitySummary {
    pub fn interval(&self, level: f64) -> Option<&CredibleInterval> {
        self.intervals.iter().find(|i| (i.level - level).abs() < 1e-12)
    }
}

/// Median and central credible intervals of a sample; sorts `values`.
pub fn summarize_values(values: &mut [f64], levels: &[f64]) -> QuantitySummary {
    values.sort_by(f64::total_cmp);
    QuantitySummary {
        median: quantile_sorted(values, 0.5),
        intervals: levels
            .iter()
            .map(|&level| CredibleInterval {
                level,
                lower: quantile_sorted(values, (1.0 - level) / 2.0),
                upper: quantile_sorted(values, (1.0 + level) / 2.0),
            })
            .collect(),
    }
}

pub fn validate_levels(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::Config("at least one credible level is required".into()));
    }
    if let Some(bad) = levels.iter().find(|l| !(**l > 0.0 && **l < 1.0)) {
        return Err(Error::Config(format!("credible level {bad} is not in (0, 1)")));
    }
    Ok(())
}

/// Pointwise posterior summaries of the TSLS and TBS curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub levels: Vec<f64>,
    pub num_draws: usize,
    /// `φ_d`, `d = 0..730`.
    pub tsls: Vec<QuantitySummary>,
    /// `f_X(x)`, `x = 0..730`.
    pub tbs: Vec<QuantitySummary>,
    /// `S_X(y)`, `y = 0..=730`.
    pub survival: Vec<QuantitySummary>,
    pub mean_tbs: QuantitySummary,
    pub mean_tbs_label: String,
}

/// Summaries over a set of TSLS draws; every draw is transformed before
/// quantiles are taken.
pub fn summarize_distributions<T: Scalar>(
    phis: &[TslsDistribution<T>],
    levels: &[f64],
) -> Result<EstimateSummary> {
    validate_levels(levels)?;
    let first = phis.first().ok_or(Error::EmptyData)?;
    let support = first.support();
    if let Some(bad) = phis.iter().find(|p| p.support() != support) {
        return Err(Error::Dimension { expected: support, got: bad.support() });
    }
    let p0: Vec<f64> =
        phis.iter().map(|p| day_zero(p).map(|v| v.as_f64())).collect::<Result<_>>()?;

    let column = |f: &(dyn Fn(usize, &TslsDistribution<T>) -> f64 + Sync), len: usize| {
        (0..len)
            .into_par_iter()
            .map(|d| {
                let mut values: Vec<f64> = phis.iter().map(|p| f(d, p)).collect();
                summarize_values(&mut values, levels)
            })
            .collect::<Vec<_>>()
    };

    let tsls = column(&|d, p| p.get(d).as_f64(), support);
    let tbs = column(&|x, p| ((p.get(x) - p.get(x + 1)) / p.get(0)).as_f64(), support);
    let survival = column(&|y, p| (p.get(y) / p.get(0)).as_f64(), support + 1);
    let mut means: Vec<f64> = p0.iter().map(|p| 1.0 / p).collect();
    let mean_tbs = summarize_values(&mut means, levels);

    Ok(EstimateSummary {
        levels: levels.to_vec(),
        num_draws: phis.len(),
        tsls,
        tbs,
        survival,
        mean_tbs,
        mean_tbs_label: MEAN_TBS_LABEL.to_string(),
    })
}

pub fn summarize<T: Scalar>(
    draws: &PosteriorDraws<T>,
    basis: &SplineBasis<T>,
    levels: &[f64],
) -> Result<EstimateSummary> {
    summarize_distributions(&draws.phi_draws(basis)?, levels)
}
