use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One observed subject: time on study and whether the event was observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record<T> {
    pub time: T,
    pub event: bool,
}

impl<T> Record<T> {
    pub fn new(time: T, event: bool) -> Self {
        Self { time, event }
    }
}

/// Right-censored sample in canonical order: ascending time, events ahead
/// of censorings at tied times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSample<T> {
    records: Vec<Record<T>>,
    time_unit: String,
    n_events: usize,
}

fn canonical_order<T: Real>(a: &Record<T>, b: &Record<T>) -> Ordering {
    a.time
        .partial_cmp(&b.time)
        .unwrap_or(Ordering::Equal)
        // `true` sorts first
        .then_with(|| b.event.cmp(&a.event))
}

/// Checks every record and returns the sample in canonical order.
pub fn validate_sample<T: Real>(
    raw: impl IntoIterator<Item = (T, bool)>,
    time_unit: impl Into<String>,
) -> Result<SurvivalSample<T>> {
    let mut records = Vec::new();
    for (row, (time, event)) in raw.into_iter().enumerate() {
        if !time.is_finite() {
            return Err(Error::InvalidRecord {
                row,
                reason: "non-finite time",
            });
        }
        if time < T::zero() {
            return Err(Error::InvalidRecord {
                row,
                reason: "negative time",
            });
        }
        records.push(Record { time, event });
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(SurvivalSample::from_checked(records, time_unit.into()))
}

impl<T: Real> SurvivalSample<T> {
    /// Records are assumed valid; only the ordering is (re)established.
    pub(crate) fn from_checked(mut records: Vec<Record<T>>, time_unit: String) -> Self {
        records.sort_by(canonical_order);
        let n_events = records.iter().filter(|r| r.event).count();
        Self {
            records,
            time_unit,
            n_events,
        }
    }

    pub fn records(&self) -> &[Record<T>] {
        &self.records
    }

    pub fn time_unit(&self) -> &str {
        &self.time_unit
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_events(&self) -> usize {
        self.n_events
    }

    pub fn n_censored(&self) -> usize {
        self.records.len() - self.n_events
    }

    /// Largest observed time Y₍ₙ₎.
    pub fn max_time(&self) -> T {
        self.records[self.records.len() - 1].time
    }

    /// Largest event time Y*₍ₙ₎, if any event was observed.
    pub fn max_event_time(&self) -> Option<T> {
        self.records.iter().rev().find(|r| r.event).map(|r| r.time)
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.records.iter().map(|r| r.time)
    }

    pub fn event_times(&self) -> impl Iterator<Item = T> + '_ {
        self.records.iter().filter(|r| r.event).map(|r| r.time)
    }

    /// Applies `f` to every time. `f` must be strictly increasing and map
    /// nonnegative finite values to nonnegative finite values.
    pub fn map_times(&self, f: impl Fn(T) -> T) -> Result<Self> {
        validate_sample(
            self.records.iter().map(|r| (f(r.time), r.event)),
            self.time_unit.clone(),
        )
    }

    pub fn with_time_unit(mut self, unit: impl Into<String>) -> Self {
        self.time_unit = unit.into();
        self
    }
}
