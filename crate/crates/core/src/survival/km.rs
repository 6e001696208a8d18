use serde::{Deserialize, Serialize};

use super::sample::SurvivalSample;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmStep<T> {
    pub time: T,
    pub n_at_risk: usize,
    pub n_events: usize,
    pub survival: T,
}

/// Product-limit estimate of S(t). One step per distinct event time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaplanMeierCurve<T> {
    pub steps: Vec<KmStep<T>>,
    pub n_total: usize,
    /// Times of censored records, kept for plotting tick marks.
    pub censored_times: Vec<T>,
}

impl<T: Real> KaplanMeierCurve<T> {
    /// Survival after the last step, 1 for a curve with no events.
    pub fn terminal_survival(&self) -> T {
        self.steps.last().map_or(T::one(), |s| s.survival)
    }
}

pub fn kaplan_meier<T: Real>(sample: &SurvivalSample<T>) -> KaplanMeierCurve<T> {
    let records = sample.records();
    let mut steps = Vec::new();
    let mut censored_times = Vec::new();
    let mut survival = T::one();
    let mut at_risk = records.len();
    let mut i = 0;
    while i < records.len() {
        let t = records[i].time;
        let mut events = 0;
        let mut censored = 0;
        while i < records.len() && records[i].time == t {
            if records[i].event {
                events += 1;
            } else {
                censored += 1;
                censored_times.push(t);
            }
            i += 1;
        }
        if events > 0 {
            survival = survival * (T::one() - T::count(events) / T::count(at_risk));
            steps.push(KmStep {
                time: t,
                n_at_risk: at_risk,
                n_events: events,
                survival,
            });
        }
        at_risk -= events + censored;
    }
    KaplanMeierCurve {
        steps,
        n_total: records.len(),
        censored_times,
    }
}

/// Right-continuous evaluation of the step function at `t`.
pub fn km_survival_at<T: Real>(curve: &KaplanMeierCurve<T>, t: T) -> T {
    let idx = curve.steps.partition_point(|s| s.time <= t);
    if idx == 0 {
        T::one()
    } else {
        curve.steps[idx - 1].survival
    }
}
