use serde::{Deserialize, Serialize};

use super::km::{kaplan_meier, km_survival_at};
use super::sample::SurvivalSample;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Per-cohort follow-up summary and the visual-evidence metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowUpSummary<T> {
    pub n: usize,
    pub n_events: usize,
    /// Median of all observed times, events and censorings pooled.
    pub median_followup: T,
    pub max_followup: T,
    pub max_event_time: Option<T>,
    pub km_at_max: T,
    /// Length of the terminal flat stretch after the last event.
    pub plateau_length: T,
    pub late_window: T,
    /// Events per unit time in `(max_followup - late_window, max_followup]`.
    pub late_event_rate: T,
}

/// 20% of the largest observed time.
pub fn default_late_window<T: Real>(sample: &SurvivalSample<T>) -> T {
    sample.max_time() * T::lit(0.2)
}

pub fn median<T: Real>(sorted: &[T]) -> T {
    let n = sorted.len();
    if n == 0 {
        return T::nan();
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) * T::lit(0.5)
    }
}

pub fn followup_summary<T: Real>(
    sample: &SurvivalSample<T>,
    late_window: T,
) -> Result<FollowUpSummary<T>> {
    if !(late_window > T::zero()) || !late_window.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "late window must be positive, got {late_window}"
        )));
    }
    let times: Vec<T> = sample.times().collect();
    let max_followup = sample.max_time();
    let max_event_time = sample.max_event_time();
    let curve = kaplan_meier(sample);
    let window_start = max_followup - late_window;
    let late_events = sample
        .event_times()
        .filter(|&t| t > window_start && t <= max_followup)
        .count();
    Ok(FollowUpSummary {
        n: sample.len(),
        n_events: sample.n_events(),
        median_followup: median(&times),
        max_followup,
        max_event_time,
        km_at_max: km_survival_at(&curve, max_followup),
        plateau_length: max_followup - max_event_time.unwrap_or(T::zero()),
        late_window,
        late_event_rate: T::count(late_events) / late_window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::validate_sample;

    #[test]
    fn all_events_has_no_plateau() {
        let s = validate_sample(vec![(1.0f64, true), (2.0, true), (4.0, true)], "").unwrap();
        let f = followup_summary(&s, 1.0).unwrap();
        assert_eq!(f.plateau_length, 0.0);
        assert_eq!(f.km_at_max, 0.0);
        assert_eq!(f.median_followup, 2.0);
        assert_eq!(f.late_event_rate, 1.0);
    }

    #[test]
    fn plateau_after_last_event() {
        let s = validate_sample(
            vec![(1.0f64, true), (6.0, true), (7.3, false), (3.0, false)],
            "years",
        )
        .unwrap();
        let f = followup_summary(&s, default_late_window(&s)).unwrap();
        assert!((f.plateau_length - 1.3).abs() < 1e-12);
        assert_eq!(f.max_event_time, Some(6.0));
        assert_eq!(f.median_followup, 4.5);
        // window (5.84, 7.3] holds the event at 6.0
        assert!((f.late_event_rate - 1.0 / 1.46).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_window() {
        let s = validate_sample(vec![(1.0f64, true)], "").unwrap();
        assert!(followup_summary(&s, 0.0).is_err());
        assert!(followup_summary(&s, -2.0).is_err());
    }
}
