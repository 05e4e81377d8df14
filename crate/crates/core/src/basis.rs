//! Decreasing integrated-B-spline basis on the integer day grid.
//!
//! Each basis function is `BI_k(d) = 1 - I_k(d)`, where `I_k` is the integral
//! of the k-th degree-`p` B-spline from 0 to `d`, normalized to reach 1 at the
//! right end of the support. It starts at 1 on day 0, ends at 0 on day
//! `support_days`, and never increases in between.
//!
//! The normalized integral of a degree-`p` B-spline is a tail sum of
//! degree-`p + 1` B-splines on the same knots with one extra repetition at
//! each clamped end, so `BI_k` is the matching head sum
//! `Σ_{j <= k} B^{(p+1)}_j(d)`. Those are evaluated with the Cox-de Boor
//! recurrence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::SUPPORT_DAYS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisConfig {
    /// Number of support points; the basis is tabulated on `0..=support_days`
    /// and vanishes on the last row.
    pub support_days: usize,
    /// Number of equal-width knot segments spanning `[0, support_days]`.
    pub num_segments: usize,
    /// Polynomial degree of the B-splines before integration.
    pub degree: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { support_days: SUPPORT_DAYS, num_segments: 30, degree: 3 }
    }
}

impl BasisConfig {
    pub fn new(num_segments: usize, degree: usize) -> Self {
        Self { num_segments, degree, ..Self::default() }
    }

    /// Number of basis functions, `K = num_segments + degree`.
    pub fn num_functions(&self) -> usize {
        self.num_segments + self.degree
    }

    pub fn validate(&self) -> Result<()> {
        if self.support_days < 2 {
            return Err(Error::Config(format!(
                "support_days must be at least 2, got {}",
                self.support_days
            )));
        }
        if self.num_segments == 0 {
            return Err(Error::Config("num_segments must be at least 1".into()));
        }
        if self.degree == 0 {
            return Err(Error::Config("degree must be at least 1".into()));
        }
        Ok(())
    }
}

/// Tabulated basis: `(support_days + 1) × K` matrix of `BI_k(d)` values.
#[derive(Debug, Clone, PartialEq)]
pub struct SplineBasis<T> {
    config: BasisConfig,
    knots: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> SplineBasis<T> {
    pub fn build(config: &BasisConfig) -> Result<Self> {
        config.validate()?;
        let p = config.degree;
        let k_count = config.num_functions();
        let rows = config.support_days + 1;
        let right = T::from_count(config.support_days);

        let breakpoints: Vec<T> = (0..=config.num_segments)
            .map(|i| T::from_count(i) * right / T::from_count(config.num_segments))
            .collect();
        let knots = clamped_knots(&breakpoints, p);
        // Degree p + 1 on the knot vector with one more repetition at each end.
        let lifted = clamped_knots(&breakpoints, p + 1);
        let q = p + 1;
        let lifted_count = k_count + 1;

        let mut values = vec![T::zero(); rows * k_count];
        let mut scratch = CoxDeBoor::new(q);
        for d in 0..config.support_days {
            let x = T::from_count(d);
            let span = find_span(&lifted, lifted_count, q, x);
            let local = scratch.eval(&lifted, span, x);
            let first = span - q;
            let row = &mut values[d * k_count..(d + 1) * k_count];
            let mut head = T::zero();
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = if k < first {
                    T::zero()
                } else if k >= span {
                    T::one()
                } else {
                    head = head + local[k - first];
                    head
                };
            }
        }
        // Row `support_days` stays all zeros. Row 0 is exactly one in theory
        // but `x / x` rounding in the recurrence can leave it an ulp short.
        values[..k_count].fill(T::one());

        // Partial sums of a partition of unity can overshoot by an ulp; clamp
        // into [0, 1] and remove rounding-level upticks down each column.
        for k in 0..k_count {
            let mut running = T::one();
            for d in 0..rows {
                let v = &mut values[d * k_count + k];
                let clamped = v.max(T::zero()).min(T::one()).min(running);
                *v = clamped;
                running = clamped;
            }
        }

        Ok(Self { config: *config, knots, values })
    }

    pub fn config(&self) -> &BasisConfig {
        &self.config
    }

    pub fn num_functions(&self) -> usize {
        self.config.num_functions()
    }

    pub fn support_days(&self) -> usize {
        self.config.support_days
    }

    /// Number of tabulated rows, `support_days + 1`.
    pub fn rows(&self) -> usize {
        self.config.support_days + 1
    }

    /// Clamped knot vector of the degree-`p` B-splines, in days.
    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    #[inline]
    pub fn value(&self, day: usize, k: usize) -> T {
        self.values[day * self.num_functions() + k]
    }

    #[inline]
    pub fn row(&self, day: usize) -> &[T] {
        let k = self.num_functions();
        &self.values[day * k..(day + 1) * k]
    }

    pub fn column(&self, k: usize) -> Vec<T> {
        (0..self.rows()).map(|d| self.value(d, k)).collect()
    }

    /// `γ_d = Σ_k α_k BI_k(d)` for every tabulated day.
    pub fn evaluate_gamma(&self, alpha: &[T]) -> Result<Vec<T>> {
        if alpha.len() != self.num_functions() {
            return Err(Error::Dimension { expected: self.num_functions(), got: alpha.len() });
        }
        Ok((0..self.rows())
            .map(|d| self.row(d).iter().zip(alpha).fold(T::zero(), |acc, (&b, &a)| acc + a * b))
            .collect())
    }
}

pub fn build_basis<T: Scalar>(config: &BasisConfig) -> Result<SplineBasis<T>> {
    SplineBasis::build(config)
}

pub fn evaluate_gamma<T: Scalar>(basis: &SplineBasis<T>, alpha: &[T]) -> Result<Vec<T>> {
    basis.evaluate_gamma(alpha)
}

fn clamped_knots<T: Scalar>(breakpoints: &[T], degree: usize) -> Vec<T> {
    let first = breakpoints[0];
    let last = *breakpoints.last().expect("at least two breakpoints");
    let mut knots = Vec::with_capacity(breakpoints.len() + 2 * degree);
    knots.extend(std::iter::repeat_n(first, degree + 1));
    knots.extend_from_slice(&breakpoints[1..breakpoints.len() - 1]);
    knots.extend(std::iter::repeat_n(last, degree + 1));
    knots
}

/// Largest `i` in `[degree, count - 1]` with `knots[i] <= x`, for `x` left of
/// the final knot.
fn find_span<T: Scalar>(knots: &[T], count: usize, degree: usize, x: T) -> usize {
    let (mut lo, mut hi) = (degree, count);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if knots[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Scratch buffers for evaluating the `degree + 1` non-zero B-splines at a point.
struct CoxDeBoor<T> {
    degree: usize,
    left: Vec<T>,
    right: Vec<T>,
    out: Vec<T>,
}

impl<T: Scalar> CoxDeBoor<T> {
    fn new(degree: usize) -> Self {
        Self {
            degree,
            left: vec![T::zero(); degree + 1],
            right: vec![T::zero(); degree + 1],
            out: vec![T::zero(); degree + 1],
        }
    }

    /// Values of B-splines `span - degree ..= span` at `x`.
    fn eval(&mut self, knots: &[T], span: usize, x: T) -> &[T] {
        let n = &mut self.out;
        n[0] = T::one();
        for j in 1..=self.degree {
            self.left[j] = x - knots[span + 1 - j];
            self.right[j] = knots[span + j] - x;
            let mut saved = T::zero();
            for r in 0..j {
                let temp = n[r] / (self.right[r + 1] + self.left[j - r]);
                n[r] = saved + self.right[r + 1] * temp;
                saved = self.left[j - r] * temp;
            }
            n[j] = saved;
        }
        &self.out
    }
}
