//! Quantitative follow-up diagnostics: the Kaplan-Meier cure-fraction
//! estimate, the parametric deviance test for a cured fraction, and the
//! `α̂ₙ` test of sufficient follow-up.
//!
//! `Nₙ` counts events in `(2Y*₍ₙ₎ − Y₍ₙ₎, Y*₍ₙ₎]`: open on the left and
//! closed on the right, so the largest event time itself is counted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{fit_model, Family, FamilySpec, FitOptions, ModelFit};
use crate::scalar::Real;
use crate::special::chi_square_1_sf;
use crate::survival::{kaplan_meier, km_survival_at, SurvivalSample};

pub const DEFAULT_ALPHA_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FollowUpTest<T> {
    /// Largest observed time Y₍ₙ₎.
    pub y_max: T,
    /// Largest event time Y*₍ₙ₎.
    pub y_max_event: T,
    /// Open left end of the counting interval, `2Y*₍ₙ₎ − Y₍ₙ₎`.
    pub interval_lower: T,
    /// Closed right end, `Y*₍ₙ₎`.
    pub interval_upper: T,
    pub n: usize,
    /// Number of events inside the interval.
    pub n_n: usize,
    /// `(1 − Nₙ/n)ⁿ`.
    pub alpha_n: T,
    pub threshold: T,
    pub sufficient_followup: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CureFractionEvidence<T> {
    /// Estimated uncured probability `F̂ₙ(Y₍ₙ₎)`.
    pub p_hat_n: T,
    /// `1 − p̂ₙ`, the Kaplan-Meier value at the largest observed time.
    pub cure_fraction_hat: T,
    pub family: Option<Family>,
    /// `2(ℓ_cure − ℓ_noncure)`, clamped at zero.
    pub deviance: Option<T>,
    /// Tail probability under the `½χ²₀ + ½χ²₁` boundary mixture.
    pub deviance_p_value: Option<T>,
    pub diagnostic: Option<String>,
}

/// `(1 − Nₙ/n)ⁿ`.
pub fn alpha_n_statistic<T: Real>(n_n: usize, n: usize) -> T {
    (T::one() - T::count(n_n) / T::count(n)).powf(T::count(n))
}

/// Boundary-mixture p-value `½·P(χ²₁ ≥ d)`; equals ½ at `d = 0`.
pub fn deviance_p_value<T: Real>(deviance: T) -> T {
    T::lit(0.5) * chi_square_1_sf(deviance)
}

pub fn nonparametric_cure_evidence<T: Real>(sample: &SurvivalSample<T>) -> CureFractionEvidence<T> {
    let curve = kaplan_meier(sample);
    let cure_fraction_hat = km_survival_at(&curve, sample.max_time());
    CureFractionEvidence {
        p_hat_n: T::one() - cure_fraction_hat,
        cure_fraction_hat,
        family: None,
        deviance: None,
        deviance_p_value: None,
        diagnostic: None,
    }
}

/// Deviance between the cure and non-cure fits of one family. When either
/// fit fails or does not converge, the test fields are left empty and the
/// reason is recorded in `diagnostic`.
pub fn deviance_cure_test<T: Real>(
    sample: &SurvivalSample<T>,
    family: Family,
    options: &FitOptions<T>,
) -> CureFractionEvidence<T> {
    let mut evidence = nonparametric_cure_evidence(sample);
    evidence.family = Some(family);
    let fits = fit_model(sample, &FamilySpec::new(family, true), options).and_then(|cure| {
        fit_model(sample, &FamilySpec::new(family, false), options).map(|plain| (cure, plain))
    });
    match fits {
        Ok((cure, plain)) => apply_deviance(&mut evidence, &cure, &plain),
        Err(e) => evidence.diagnostic = Some(e.to_string()),
    }
    evidence
}

/// Fills the deviance fields from an already-fitted cure/non-cure pair.
pub fn apply_deviance<T: Real>(
    evidence: &mut CureFractionEvidence<T>,
    cure: &ModelFit<T>,
    plain: &ModelFit<T>,
) {
    let mut problems = Vec::new();
    for fit in [cure, plain] {
        if !fit.converged {
            problems.push(format!("`{}` fit did not converge", fit.spec));
        }
    }
    if !problems.is_empty() {
        evidence.diagnostic = Some(problems.join("; "));
        return;
    }
    let d = (T::lit(2.0) * (cure.log_likelihood - plain.log_likelihood)).max(T::zero());
    evidence.deviance = Some(d);
    evidence.deviance_p_value = Some(deviance_p_value(d));
}

pub fn alpha_n_test<T: Real>(sample: &SurvivalSample<T>, threshold: T) -> Result<FollowUpTest<T>> {
    if !(threshold > T::zero() && threshold < T::one()) {
        return Err(Error::InvalidConfig(format!(
            "alpha threshold must lie in (0, 1), got {threshold}"
        )));
    }
    let y_max_event = sample
        .max_event_time()
        .ok_or_else(|| Error::Contract("α̂ₙ test needs at least one event".to_string()))?;
    let y_max = sample.max_time();
    let lower = T::lit(2.0) * y_max_event - y_max;
    let n_n = sample
        .event_times()
        .filter(|&t| t > lower && t <= y_max_event)
        .count();
    let n = sample.len();
    let alpha_n = alpha_n_statistic(n_n, n);
    Ok(FollowUpTest {
        y_max,
        y_max_event,
        interval_lower: lower,
        interval_upper: y_max_event,
        n,
        n_n,
        alpha_n,
        threshold,
        sufficient_followup: alpha_n < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survival::validate_sample;

    #[test]
    fn last_observation_event_is_degenerate() {
        let s = validate_sample(vec![(1.0f64, true), (2.0, false), (3.0, true)], "").unwrap();
        let t = alpha_n_test(&s, 0.05).unwrap();
        assert_eq!(t.n_n, 0);
        assert_eq!(t.alpha_n, 1.0);
        assert!(!t.sufficient_followup);
    }

    #[test]
    fn alpha_arithmetic() {
        let a: f64 = alpha_n_statistic(5, 10);
        assert!((a - 0.5f64.powi(10)).abs() < 1e-18);
        assert!(a < 0.05);
        assert_eq!(alpha_n_statistic::<f64>(0, 10), 1.0);
        assert_eq!(alpha_n_statistic::<f64>(10, 10), 0.0);
    }

    #[test]
    fn counts_events_in_half_open_interval() {
        // Y = 10, Y* = 6 → interval (2, 6]
        let s = validate_sample(
            vec![
                (1.0f64, true),
                (2.0, true),
                (3.0, true),
                (4.0, false),
                (6.0, true),
                (10.0, false),
            ],
            "",
        )
        .unwrap();
        let t = alpha_n_test(&s, 0.05).unwrap();
        assert_eq!(t.interval_lower, 2.0);
        assert_eq!(t.n_n, 2);
        assert!((t.alpha_n - (1.0 - 2.0f64 / 6.0).powi(6)).abs() < 1e-15);
    }

    #[test]
    fn alpha_needs_events() {
        let s = validate_sample(vec![(1.0f64, false)], "").unwrap();
        assert!(alpha_n_test(&s, 0.05).is_err());
    }

    #[test]
    fn km_based_evidence() {
        let s = validate_sample(vec![(1.0f64, true), (2.0, true)], "").unwrap();
        let e = nonparametric_cure_evidence(&s);
        assert_eq!(e.p_hat_n, 1.0);
        assert_eq!(e.cure_fraction_hat, 0.0);
        let s = validate_sample(vec![(1.0f64, false), (2.0, false)], "").unwrap();
        let e = nonparametric_cure_evidence(&s);
        assert_eq!(e.p_hat_n, 0.0);
        assert_eq!(e.cure_fraction_hat, 1.0);
    }

    #[test]
    fn p_value_at_zero_deviance() {
        assert_eq!(deviance_p_value(0.0f64), 0.5);
        assert!((deviance_p_value(2.705_543_454_095_404f64) - 0.05).abs() < 1e-12);
    }
}
