//! Observation model linking reported `(value, unit)` pairs to exact days.
//!
//! A report is interval-censored: it says the exact TSLS lies in a set of
//! consecutive days determined by the unit and, for day reports, by whether
//! the value is one that respondents tend to heap on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TslsDistribution;
use crate::scalar::Scalar;
use crate::{LAST_DAY, SUPPORT_DAYS};

/// Reporting unit, with the survey coding 1 = day .. 4 = year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Day = 1,
    Week = 2,
    Month = 3,
    Year = 4,
}

impl Unit {
    pub const ALL: [Unit; 4] = [Unit::Day, Unit::Week, Unit::Month, Unit::Year];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Unit> {
        match code {
            1 => Some(Unit::Day),
            2 => Some(Unit::Week),
            3 => Some(Unit::Month),
            4 => Some(Unit::Year),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Unit::Day => "day",
            Unit::Week => "week",
            Unit::Month => "month",
            Unit::Year => "year",
        }
    }

    /// Largest reported value whose interval still reaches into the window.
    pub fn max_in_window(self) -> u32 {
        match self {
            Unit::Day => LAST_DAY as u32,
            Unit::Week => (LAST_DAY / 7) as u32,
            Unit::Month => 23,
            Unit::Year => 1,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Unit {
    type Err = String;

    /// Accepts unit names (any case, optional plural `s`) or codes `1..=4`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let token = s.trim().to_ascii_lowercase();
        if let Ok(code) = token.parse::<u8>() {
            return Unit::from_code(code).ok_or_else(|| format!("unknown unit code `{s}`"));
        }
        let stem = token.strip_suffix('s').unwrap_or(&token);
        match stem {
            "day" => Ok(Unit::Day),
            "week" => Ok(Unit::Week),
            "month" => Ok(Unit::Month),
            "year" => Ok(Unit::Year),
            _ => Err(format!("unknown unit `{}`", s.trim())),
        }
    }
}

/// One survey response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ReportedDuration {
    pub z: u32,
    pub unit: Unit,
}

impl ReportedDuration {
    pub fn new(z: u32, unit: Unit) -> Self {
        Self { z, unit }
    }

    pub fn days(z: u32) -> Self {
        Self::new(z, Unit::Day)
    }

    pub fn weeks(z: u32) -> Self {
        Self::new(z, Unit::Week)
    }

    pub fn months(z: u32) -> Self {
        Self::new(z, Unit::Month)
    }

    pub fn year() -> Self {
        Self::new(1, Unit::Year)
    }
}

impl fmt::Display for ReportedDuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.z, self.unit)
    }
}

/// Day values respondents heap on, and the half-width of the window a heaped
/// day report stands for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeapSet {
    days: BTreeSet<u32>,
    halfwidth: u32,
}

impl Default for HeapSet {
    fn default() -> Self {
        Self { days: [7, 14, 21, 28, 30, 60, 90].into_iter().collect(), halfwidth: 2 }
    }
}

impl HeapSet {
    pub fn new(days: impl IntoIterator<Item = u32>, halfwidth: u32) -> Result<Self> {
        let days: BTreeSet<u32> = days.into_iter().collect();
        if let Some(&bad) = days.iter().find(|&&d| d < halfwidth) {
            return Err(Error::Config(format!(
                "heap day {bad} is smaller than the half-width {halfwidth}"
            )));
        }
        Ok(Self { days, halfwidth })
    }

    /// No heaping: every day report is taken as exact.
    pub fn none() -> Self {
        Self { days: BTreeSet::new(), halfwidth: 0 }
    }

    pub fn days(&self) -> impl Iterator<Item = u32> + '_ {
        self.days.iter().copied()
    }

    pub fn halfwidth(&self) -> u32 {
        self.halfwidth
    }

    pub fn contains(&self, day: u32) -> bool {
        self.days.contains(&day)
    }

    /// Heap value whose window covers `day`, preferring the closest and then
    /// the smaller one.
    pub fn nearest_covering(&self, day: u32) -> Option<u32> {
        self.days
            .iter()
            .copied()
            .filter(|&h| h.abs_diff(day) <= self.halfwidth)
            .min_by_key(|&h| (h.abs_diff(day), h))
    }
}

/// Inclusive range of exact days `lo..=hi` consistent with a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DayInterval {
    pub lo: usize,
    pub hi: usize,
}

impl DayInterval {
    pub fn width(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn contains(&self, day: usize) -> bool {
        (self.lo..=self.hi).contains(&day)
    }

    pub fn days(&self) -> std::ops::RangeInclusive<usize> {
        self.lo..=self.hi
    }
}

/// Exact-day interval implied by a report, truncated at the last support day.
///
/// Year reports other than `1` and month reports of 24 or more are outside the
/// two-year window, as is anything whose interval starts after day 729.
pub fn day_interval(record: &ReportedDuration, heap: &HeapSet) -> Result<DayInterval> {
    let z = record.z as usize;
    let (lo, hi) = match record.unit {
        Unit::Day if heap.contains(record.z) => {
            let w = heap.halfwidth as usize;
            (z - w, z + w)
        }
        Unit::Day => (z, z),
        Unit::Week => (7 * z, 7 * z + 6),
        Unit::Month => {
            if record.z > Unit::Month.max_in_window() {
                return Err(Error::OutOfWindow { z: record.z, unit: record.unit });
            }
            (30 * z + 1, 30 * z + 30)
        }
        Unit::Year => match record.z {
            0 => {
                return Err(Error::InvalidRecord(
                    "year reports must have value 1 (0 years is not a valid report)".into(),
                ))
            }
            1 => (365 - 31, LAST_DAY),
            _ => return Err(Error::OutOfWindow { z: record.z, unit: record.unit }),
        },
    };
    if lo > LAST_DAY {
        return Err(Error::OutOfWindow { z: record.z, unit: record.unit });
    }
    Ok(DayInterval { lo, hi: hi.min(LAST_DAY) })
}

/// Probability of observing `record` when the exact TSLS follows `phi`.
pub fn reported_prob<T: Scalar>(
    phi: &TslsDistribution<T>,
    record: &ReportedDuration,
    heap: &HeapSet,
) -> Result<T> {
    let interval = day_interval(record, heap)?;
    let probs = phi.probabilities();
    if interval.hi >= probs.len() {
        return Err(Error::Dimension { expected: SUPPORT_DAYS, got: probs.len() });
    }
    Ok(probs[interval.lo..=interval.hi].iter().copied().sum())
}

/// Validated collection of reports plus the heaping rules that interpret them.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportedDataset {
    records: Vec<ReportedDuration>,
    counts: BTreeMap<ReportedDuration, usize>,
    heap: HeapSet,
}

impl ReportedDataset {
    /// Fails on the first record whose interval is invalid under `heap`.
    pub fn new(records: Vec<ReportedDuration>, heap: HeapSet) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for r in &records {
            day_interval(r, &heap)?;
            *counts.entry(*r).or_insert(0) += 1;
        }
        Ok(Self { records, counts, heap })
    }

    pub fn empty(heap: HeapSet) -> Self {
        Self { records: Vec::new(), counts: BTreeMap::new(), heap }
    }

    pub fn records(&self) -> &[ReportedDuration] {
        &self.records
    }

    /// Distinct records with multiplicities, in a fixed order.
    pub fn counts(&self) -> &BTreeMap<ReportedDuration, usize> {
        &self.counts
    }

    pub fn heap(&self) -> &HeapSet {
        &self.heap
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Distinct day intervals with total multiplicity, ordered by interval.
    ///
    /// Different records can share an interval (for example a heaped day
    /// report and nothing else), so this is the coarsest grouping the
    /// likelihood needs.
    pub fn interval_counts(&self) -> Vec<(DayInterval, usize)> {
        let mut merged: BTreeMap<DayInterval, usize> = BTreeMap::new();
        for (r, &m) in &self.counts {
            let iv = day_interval(r, &self.heap).expect("validated at construction");
            *merged.entry(iv).or_insert(0) += m;
        }
        merged.into_iter().collect()
    }
}

/// Histogram weights: every record spreads one unit of mass evenly over its
/// interval.
pub fn spread_mass<T: Scalar>(dataset: &ReportedDataset) -> Vec<T> {
    let mut weights = vec![T::zero(); SUPPORT_DAYS];
    for (iv, m) in dataset.interval_counts() {
        let share = T::from_count(m) / T::from_count(iv.width());
        for w in &mut weights[iv.lo..=iv.hi] {
            *w = *w + share;
        }
    }
    weights
}
