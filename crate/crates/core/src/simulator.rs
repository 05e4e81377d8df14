//! Synthetic surveys from a known gap-time distribution.
//!
//! A respondent interviewed at a uniformly random moment falls inside a gap
//! with probability proportional to its length. Under the day convention a
//! gap of class `g` spans `g + 1` days, so the class is drawn with weight
//! `(g + 1) f_X(g)` and the elapsed time `y` is uniform on `0..=g`. This gives
//! `P(Y = y) = S_X(y) / Σ S_X` exactly.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimates::tsls_from_tbs;
use crate::model::TslsDistribution;
use crate::reporting::{HeapSet, ReportedDataset, ReportedDuration, Unit};
use crate::scalar::Scalar;
use crate::{LAST_DAY, SUPPORT_DAYS};

/// Gap-time pmf over classes `0..730`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueTbs<T> {
    f_x: Vec<T>,
}

impl<T: Scalar> TrueTbs<T> {
    /// Shorter vectors are padded with zeros up to the support.
    pub fn new(mut f_x: Vec<T>) -> Result<Self> {
        if f_x.is_empty() || f_x.len() > SUPPORT_DAYS {
            return Err(Error::Dimension { expected: SUPPORT_DAYS, got: f_x.len() });
        }
        if f_x.iter().any(|p| !p.is_finite() || *p < T::zero()) {
            return Err(Error::InvalidDistribution(
                "gap-time probabilities must be finite and non-negative".into(),
            ));
        }
        let total: T = f_x.iter().copied().sum();
        if (total - T::one()).abs() > T::epsilon().sqrt() {
            return Err(Error::InvalidDistribution(format!(
                "gap-time probabilities sum to {total}, not 1"
            )));
        }
        f_x.resize(SUPPORT_DAYS, T::zero());
        Ok(Self { f_x })
    }

    /// Geometric `P(X = x) = p (1 - p)^x`, renormalized to `0..730`.
    pub fn geometric(p: T) -> Result<Self> {
        if !(p > T::zero() && p <= T::one()) {
            return Err(Error::Config(format!("geometric p = {p} is not in (0, 1]")));
        }
        let q = T::one() - p;
        let raw: Vec<T> = (0..SUPPORT_DAYS).map(|x| p * q.powi(x as i32)).collect();
        let total: T = raw.iter().copied().sum();
        Self::new(raw.into_iter().map(|v| v / total).collect())
    }

    /// Every gap has class `g`.
    pub fn point_mass(g: usize) -> Result<Self> {
        if g > LAST_DAY {
            return Err(Error::Config(format!("point mass at {g} is beyond day {LAST_DAY}")));
        }
        let mut f_x = vec![T::zero(); SUPPORT_DAYS];
        f_x[g] = T::one();
        Ok(Self { f_x })
    }

    pub fn uniform() -> Self {
        Self { f_x: vec![T::from_count(SUPPORT_DAYS).recip(); SUPPORT_DAYS] }
    }

    /// Weighted mixture; weights are normalized.
    pub fn mixture(components: &[(T, TrueTbs<T>)]) -> Result<Self> {
        let total: T = components.iter().map(|(w, _)| *w).sum();
        if components.is_empty()
            || components.iter().any(|(w, _)| !(w.is_finite() && *w >= T::zero()))
            || !(total > T::zero())
        {
            return Err(Error::Config(
                "mixture weights must be non-negative with a positive sum".into(),
            ));
        }
        let mut f_x = vec![T::zero(); SUPPORT_DAYS];
        for (w, c) in components {
            for (acc, &v) in f_x.iter_mut().zip(&c.f_x) {
                *acc = *acc + *w / total * v;
            }
        }
        Ok(Self { f_x })
    }

    pub fn probabilities(&self) -> &[T] {
        &self.f_x
    }

    /// The TSLS distribution this truth induces.
    pub fn tsls(&self) -> TslsDistribution<T> {
        tsls_from_tbs(&self.f_x).expect("validated gap-time distribution")
    }

    /// Mean gap in the day convention, `Σ (x + 1) f_X(x)`.
    pub fn mean(&self) -> T {
        self.f_x.iter().enumerate().map(|(x, &p)| T::from_count(x + 1) * p).sum()
    }
}

impl<T: Scalar> FromStr for TrueTbs<T> {
    type Err = Error;

    /// `geometric:p=0.1`, `point:g=1`, `uniform`, or
    /// `bimodal:p=0.2,g=60,w=0.3` (weight `w` on the point mass).
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (kind, args) = text.split_once(':').unwrap_or((text, ""));
        let mut pairs = Vec::new();
        for part in args.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                Error::Config(format!("expected key=value in truth description, got `{part}`"))
            })?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("truth parameter `{k}` is not a number")))?;
            pairs.push((k.trim().to_ascii_lowercase(), v));
        }
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            pairs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .or(default)
                .ok_or_else(|| Error::Config(format!("truth `{kind}` needs parameter `{key}`")))
        };
        let known: &[&str] = match kind.to_ascii_lowercase().as_str() {
            "geometric" => &["p"],
            "point" => &["g"],
            "uniform" => &[],
            "bimodal" => &["p", "g", "w"],
            other => return Err(Error::Config(format!("unknown truth `{other}`"))),
        };
        if let Some((k, _)) = pairs.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::Config(format!("truth `{kind}` has no parameter `{k}`")));
        }
        let class = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("gap class {v} is not a non-negative integer")))
            }
        };
        match kind.to_ascii_lowercase().as_str() {
            "geometric" => Self::geometric(T::lit(get("p", None)?)),
            "point" => Self::point_mass(class(get("g", None)?)?),
            "uniform" => Ok(Self::uniform()),
            _ => {
                let w = get("w", Some(0.3))?;
                if !(0.0..=1.0).contains(&w) {
                    return Err(Error::Config(format!("mixture weight {w} is not in [0, 1]")));
                }
                Self::mixture(&[
                    (T::lit(1.0 - w), Self::geometric(T::lit(get("p", Some(0.2))?))?),
                    (T::lit(w), Self::point_mass(class(get("g", Some(60.0))?)?)?),
                ])
            }
        }
    }
}

fn class_sampler<T: Scalar>(truth: &TrueTbs<T>) -> Result<WeightedIndex<f64>> {
    let weights = truth.f_x.iter().enumerate().map(|(g, p)| (g + 1) as f64 * p.as_f64());
    WeightedIndex::new(weights).map_err(|e| Error::InvalidDistribution(e.to_string()))
}

fn draw_exact<T: Scalar, R: Rng + ?Sized>(
    truth: &TrueTbs<T>,
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Config("sample size must be at least 1".into()));
    }
    let classes = class_sampler(truth)?;
    Ok((0..n)
        .map(|_| {
            let g = classes.sample(rng);
            rng.random_range(0..=g)
        })
        .collect())
}

/// Exact elapsed days for `n` respondents.
pub fn sample_tsls_exact<T: Scalar>(truth: &TrueTbs<T>, n: usize, seed: u64) -> Result<Vec<usize>> {
    draw_exact(truth, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// How a respondent phrases an exact elapsed time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    DayExact,
    /// Day report rounded to the closest heap value.
    DayHeaped,
    Week,
    Month,
    Year,
}

impl Channel {
    pub fn eligible(self, y: usize, heap: &HeapSet) -> bool {
        match self {
            Channel::DayExact | Channel::Week => y <= LAST_DAY,
            Channel::DayHeaped => y <= LAST_DAY && heap.nearest_covering(y as u32).is_some(),
            Channel::Month => (1..=720).contains(&y),
            Channel::Year => (334..=LAST_DAY).contains(&y),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Channel::DayExact => "day",
            Channel::DayHeaped => "heaped day",
            Channel::Week => "week",
            Channel::Month => "month",
            Channel::Year => "year",
        };
        f.write_str(name)
    }
}

/// Encodes `y` through one channel.
pub fn encode(y: usize, channel: Channel, heap: &HeapSet) -> Result<ReportedDuration> {
    if !channel.eligible(y, heap) {
        return Err(Error::Config(format!("a {channel} report cannot describe day {y}")));
    }
    let z = y as u32;
    Ok(match channel {
        Channel::DayExact => ReportedDuration::days(z),
        Channel::DayHeaped => ReportedDuration::days(heap.nearest_covering(z).expect("eligible")),
        Channel::Week => ReportedDuration::weeks(z / 7),
        Channel::Month => ReportedDuration::months((z - 1) / 30),
        Channel::Year => ReportedDuration::new(1, Unit::Year),
    })
}

/// One weighted choice: the first eligible channel in `channels` is used.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelOption {
    pub weight: f64,
    pub channels: Vec<Channel>,
}

impl ChannelOption {
    pub fn new(weight: f64, channels: impl Into<Vec<Channel>>) -> Self {
        Self { weight, channels: channels.into() }
    }
}

/// Options applying to elapsed days up to and including `upto`.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    pub upto: usize,
    pub options: Vec<ChannelOption>,
}

/// Rule mapping an exact elapsed time to a reported unit.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportingBehavior {
    bands: Vec<Band>,
    heap: HeapSet,
}

impl Default for ReportingBehavior {
    fn default() -> Self {
        use Channel::*;
        let band = |upto, options| Band { upto, options };
        Self::new(
            vec![
                band(6, vec![ChannelOption::new(1.0, [DayExact])]),
                band(
                    27,
                    vec![
                        ChannelOption::new(0.5, [DayHeaped, DayExact]),
                        ChannelOption::new(0.5, [Week]),
                    ],
                ),
                band(
                    182,
                    vec![
                        ChannelOption::new(0.4, [Week]),
                        ChannelOption::new(0.4, [Month]),
                        ChannelOption::new(0.2, [DayHeaped, DayExact]),
                    ],
                ),
                band(
                    LAST_DAY,
                    vec![
                        ChannelOption::new(0.7, [Month, Year]),
                        ChannelOption::new(0.3, [Year, Month]),
                    ],
                ),
            ],
            HeapSet::default(),
        )
        .expect("default reporting behavior is valid")
    }
}

impl ReportingBehavior {
    /// Checks that bands cover every day in increasing order and that every
    /// option can describe every day of its band.
    pub fn new(bands: Vec<Band>, heap: HeapSet) -> Result<Self> {
        if bands.last().map(|b| b.upto) < Some(LAST_DAY) {
            return Err(Error::Config(format!("reporting bands must reach day {LAST_DAY}")));
        }
        let mut start = 0;
        for band in &bands {
            if band.upto < start {
                return Err(Error::Config("reporting bands must be strictly increasing".into()));
            }
            if band.options.is_empty()
                || band.options.iter().any(|o| !(o.weight.is_finite() && o.weight >= 0.0))
                || !(band.options.iter().map(|o| o.weight).sum::<f64>() > 0.0)
            {
                return Err(Error::Config(format!(
                    "band ending at day {} needs non-negative weights with a positive sum",
                    band.upto
                )));
            }
            for y in start..=band.upto.min(LAST_DAY) {
                for option in band.options.iter().filter(|o| o.weight > 0.0) {
                    if !option.channels.iter().any(|c| c.eligible(y, &heap)) {
                        return Err(Error::Config(format!(
                            "no channel in {:?} can describe day {y}",
                            option.channels
                        )));
                    }
                }
            }
            start = band.upto + 1;
        }
        Ok(Self { bands, heap })
    }

    /// Every report is an exact day count, with no heaping.
    pub fn day_exact() -> Self {
        Self::new(
            vec![Band {
                upto: LAST_DAY,
                options: vec![ChannelOption::new(1.0, [Channel::DayExact])],
            }],
            HeapSet::none(),
        )
        .expect("valid")
    }

    pub fn bands(&self) -> &[Band] {
        &self.bands
    }

    pub fn heap(&self) -> &HeapSet {
        &self.heap
    }

    /// Probability of each option for day `y`, in band order.
    pub fn option_probabilities(&self, y: usize) -> Option<(&Band, Vec<f64>)> {
        let band = self.bands.iter().find(|b| y <= b.upto)?;
        let total: f64 = band.options.iter().map(|o| o.weight).sum();
        Some((band, band.options.iter().map(|o| o.weight / total).collect()))
    }
}

/// Draws the report a respondent with exact elapsed time `y` gives.
pub fn apply_reporting<R: Rng + ?Sized>(
    y: usize,
    behavior: &ReportingBehavior,
    rng: &mut R,
) -> Result<ReportedDuration> {
    if y > LAST_DAY {
        return Err(Error::Config(format!("day {y} is beyond the support")));
    }
    let (band, probs) = behavior.option_probabilities(y).expect("bands cover the support");
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut chosen = band.options.last().expect("non-empty");
    for (option, p) in band.options.iter().zip(probs) {
        acc += p;
        if u < acc && p > 0.0 {
            chosen = option;
            break;
        }
    }
    let channel =
        chosen.channels.iter().copied().find(|c| c.eligible(y, &behavior.heap)).ok_or_else(
            || Error::Config(format!("no channel in {:?} can describe day {y}", chosen.channels)),
        )?;
    encode(y, channel, &behavior.heap)
}

/// Exact elapsed times alongside the reports they produced.
pub fn simulate_records<T: Scalar>(
    truth: &TrueTbs<T>,
    behavior: &ReportingBehavior,
    n: usize,
    seed: u64,
) -> Result<Vec<(usize, ReportedDuration)>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exact = draw_exact(truth, n, &mut rng)?;
    exact.into_iter().map(|y| Ok((y, apply_reporting(y, behavior, &mut rng)?))).collect()
}

pub fn simulate_survey<T: Scalar>(
    truth: &TrueTbs<T>,
    behavior: &ReportingBehavior,
    n: usize,
    seed: u64,
) -> Result<ReportedDataset> {
    let records = simulate_records(truth, behavior, n, seed)?;
    ReportedDataset::new(records.into_iter().map(|(_, r)| r).collect(), behavior.heap.clone())
}
