//! Simulation of right-censored mixture-cure data with known ground truth,
//! and artificial truncation of follow-up.
//!
//! Draws come from ChaCha8 seeded with a `u64`, so a given configuration
//! produces the same sample on every platform. Each subject consumes, in
//! order: one uniform for cure status, one for the latency time (uncured
//! subjects only), then the censoring draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Latency;
use crate::scalar::Real;
use crate::survival::{Record, SurvivalSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Dropout<T> {
    Uniform { max: T },
    Exponential { rate: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Censoring<T> {
    /// Fixed study end; may be `+∞` when nothing is cured.
    Administrative { time: T },
    Uniform { max: T },
    Exponential { rate: T },
    /// Study end combined with random dropout.
    Composite { time: T, dropout: Dropout<T> },
}

impl<T: Real> Dropout<T> {
    fn draw(&self, rng: &mut ChaCha8Rng) -> T {
        let u = T::lit(open_unit(rng));
        match *self {
            Dropout::Uniform { max } => u * max,
            Dropout::Exponential { rate } => -u.ln() / rate,
        }
    }

    /// `P(U > t)`.
    fn survival(&self, t: T) -> T {
        match *self {
            Dropout::Uniform { max } => (T::one() - t / max).max(T::zero()),
            Dropout::Exponential { rate } => (-rate * t).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            Dropout::Uniform { max } => max,
            Dropout::Exponential { rate } => rate,
        };
        if v > T::zero() && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("dropout parameter must be positive, got {v}")))
        }
    }
}

impl<T: Real> Censoring<T> {
    fn draw(&self, rng: &mut ChaCha8Rng) -> T {
        match *self {
            Censoring::Administrative { time } => time,
            Censoring::Uniform { max } => Dropout::Uniform { max }.draw(rng),
            Censoring::Exponential { rate } => Dropout::Exponential { rate }.draw(rng),
            Censoring::Composite { time, dropout } => dropout.draw(rng).min(time),
        }
    }

    /// `1 − G(t)`, the probability that censoring happens after `t`.
    pub fn survival(&self, t: T) -> T {
        match *self {
            Censoring::Administrative { time } => {
                if t < time {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Censoring::Uniform { max } => Dropout::Uniform { max }.survival(t),
            Censoring::Exponential { rate } => Dropout::Exponential { rate }.survival(t),
            Censoring::Composite { time, dropout } => {
                if t < time {
                    dropout.survival(t)
                } else {
                    T::zero()
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Censoring::Administrative { time } => {
                if time > T::zero() {
                    Ok(())
                } else {
                    Err(Error::InvalidConfig(format!(
                        "administrative censoring time must be positive, got {time}"
                    )))
                }
            }
            Censoring::Uniform { max } => Dropout::Uniform { max }.validate(),
            Censoring::Exponential { rate } => Dropout::Exponential { rate }.validate(),
            Censoring::Composite { time, dropout } => {
                Censoring::Administrative { time }.validate()?;
                dropout.validate()
            }
        }
    }

    fn can_be_infinite(&self) -> bool {
        matches!(self, Censoring::Administrative { time } if time.is_infinite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig<T> {
    pub n: usize,
    /// Probability of never experiencing the event, in `[0, 1)`.
    pub cure_fraction: T,
    pub latency: Latency<T>,
    pub censoring: Censoring<T>,
    pub seed: u64,
    #[serde(default)]
    pub time_unit: String,
}

impl<T: Real> SimulationConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".to_string()));
        }
        if !(self.cure_fraction >= T::zero() && self.cure_fraction < T::one()) {
            return Err(Error::InvalidConfig(format!(
                "cure fraction must lie in [0, 1), got {}",
                self.cure_fraction
            )));
        }
        self.latency
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        self.censoring.validate()?;
        if self.cure_fraction > T::zero() && self.censoring.can_be_infinite() {
            return Err(Error::InvalidConfig(
                "cured subjects need a finite censoring time".to_string(),
            ));
        }
        Ok(())
    }
}

/// Latent and observed values for one simulated subject, in generation
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubjectTruth<T> {
    pub cured: bool,
    /// Latent event time; absent for cured subjects.
    pub event_time: Option<T>,
    pub censor_time: T,
    pub observed_time: T,
    pub event: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth<T> {
    pub config: SimulationConfig<T>,
    pub subjects: Vec<SubjectTruth<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulated<T> {
    pub sample: SurvivalSample<T>,
    pub truth: GroundTruth<T>,
}

/// Uniform on the open interval (0, 1) with 53 random bits.
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

pub fn simulate_mixture<T: Real>(config: &SimulationConfig<T>) -> Result<Simulated<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut subjects = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let cured = T::lit(open_unit(&mut rng)) < config.cure_fraction;
        let event_time = if cured {
            None
        } else {
            Some(config.latency.quantile(T::lit(open_unit(&mut rng))))
        };
        let censor_time = config.censoring.draw(&mut rng);
        let (observed_time, event) = match event_time {
            Some(t) if t <= censor_time => (t, true),
            _ => (censor_time, false),
        };
        subjects.push(SubjectTruth {
            cured,
            event_time,
            censor_time,
            observed_time,
            event,
        });
    }
    let records = subjects
        .iter()
        .map(|s| Record::new(s.observed_time, s.event))
        .collect();
    Ok(Simulated {
        sample: SurvivalSample::from_checked(records, config.time_unit.clone()),
        truth: GroundTruth {
            config: config.clone(),
            subjects,
        },
    })
}

/// Ends follow-up at `cutoff`: later records become censored at `cutoff`.
pub fn restrict_followup<T: Real>(sample: &SurvivalSample<T>, cutoff: T) -> Result<SurvivalSample<T>> {
    if !(cutoff > T::zero()) {
        return Err(Error::InvalidConfig(format!(
            "follow-up cutoff must be positive, got {cutoff}"
        )));
    }
    let records = sample
        .records()
        .iter()
        .map(|r| {
            if r.time > cutoff {
                Record::new(cutoff, false)
            } else {
                *r
            }
        })
        .collect();
    Ok(SurvivalSample::from_checked(records, sample.time_unit().to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::validate_sample;

    fn base() -> SimulationConfig<f64> {
        SimulationConfig {
            n: 500,
            cure_fraction: 0.4,
            latency: Latency::Weibull {
                shape: 0.8,
                scale: 0.8,
            },
            censoring: Censoring::Administrative { time: 7.3 },
            seed: 42,
            time_unit: "years".into(),
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = simulate_mixture(&base()).unwrap();
        let b = simulate_mixture(&base()).unwrap();
        assert_eq!(a.sample, b.sample);
        let c = simulate_mixture(&SimulationConfig { seed: 43, ..base() }).unwrap();
        assert_ne!(a.sample, c.sample);
    }

    #[test]
    fn full_cure_gives_only_censorings() {
        // cure_fraction must stay below 1; use the largest value below it
        let cfg = SimulationConfig {
            cure_fraction: 1.0 - f64::EPSILON,
            censoring: Censoring::Uniform { max: 3.0 },
            ..base()
        };
        let sim = simulate_mixture(&cfg).unwrap();
        assert_eq!(sim.sample.n_events(), 0);
        for s in &sim.truth.subjects {
            assert!(s.cured);
            assert_eq!(s.observed_time, s.censor_time);
        }
    }

    #[test]
    fn cured_subjects_never_have_events() {
        let sim = simulate_mixture(&base()).unwrap();
        for s in &sim.truth.subjects {
            if s.cured {
                assert!(!s.event);
                assert!(s.event_time.is_none());
            }
            assert!(s.observed_time <= s.censor_time);
        }
        assert_eq!(sim.sample.len(), 500);
    }

    #[test]
    fn invalid_configs() {
        assert!(simulate_mixture(&SimulationConfig { n: 0, ..base() }).is_err());
        assert!(simulate_mixture(&SimulationConfig {
            cure_fraction: 1.0,
            ..base()
        })
        .is_err());
        assert!(simulate_mixture(&SimulationConfig {
            censoring: Censoring::Administrative {
                time: f64::INFINITY
            },
            ..base()
        })
        .is_err());
        assert!(simulate_mixture(&SimulationConfig {
            latency: Latency::Weibull {
                shape: 0.0,
                scale: 1.0
            },
            ..base()
        })
        .is_err());
    }

    #[test]
    fn restrict_rules() {
        let s = validate_sample(vec![(5.0f64, true), (0.5, true), (2.0, false)], "").unwrap();
        let r = restrict_followup(&s, 1.0).unwrap();
        assert_eq!(
            r.records(),
            &[
                Record::new(0.5, true),
                Record::new(1.0, false),
                Record::new(1.0, false)
            ]
        );
        assert_eq!(restrict_followup(&s, 5.0).unwrap(), s);
        assert_eq!(restrict_followup(&s, 10.0).unwrap(), s);
        assert!(restrict_followup(&s, 0.0).is_err());
    }
}
