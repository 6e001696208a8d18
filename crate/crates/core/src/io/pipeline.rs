use super::report::{ConfigEcho, ReportDocument};
use crate::error::Result;
use crate::receus::{receus_assess, AssessmentConfig};
use crate::simulate::restrict_followup;
use crate::survival::SurvivalSample;

pub const EXIT_APPROPRIATE: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_APPROPRIATE: i32 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct AssessOptions {
    pub dataset: String,
    pub config: AssessmentConfig<f64>,
    /// Follow-up cutoff applied before the assessment.
    pub restrict: Option<f64>,
    /// Echoed in the report; the sample is expected to be scaled already.
    pub time_scale: f64,
}

impl Default for AssessOptions {
    fn default() -> Self {
        Self {
            dataset: String::new(),
            config: AssessmentConfig::default(),
            restrict: None,
            time_scale: 1.0,
        }
    }
}

/// Summary, Kaplan-Meier, diagnostics and RECeUS on one sample.
pub fn run_assess(sample: &SurvivalSample<f64>, opts: &AssessOptions) -> Result<ReportDocument> {
    let restricted;
    let sample = match opts.restrict {
        Some(cutoff) => {
            restricted = restrict_followup(sample, cutoff)?;
            &restricted
        }
        None => sample,
    };
    let assessment = receus_assess(sample, &opts.config)?;
    let c = &opts.config;
    let echo = ConfigEcho {
        families: c.families.clone(),
        time_scale: opts.time_scale,
        restrict: opts.restrict,
        tau: c.tau,
        cure_fraction_threshold: c.cure_fraction_threshold,
        r_threshold: c.r_threshold,
        alpha_threshold: c.alpha_threshold,
        late_window: c.late_window,
    };
    Ok(ReportDocument::new(
        opts.dataset.clone(),
        sample.time_unit(),
        echo,
        &assessment,
    ))
}

/// 0 when appropriate, 2 when not, 1 on any error.
pub fn exit_code(outcome: &Result<ReportDocument>) -> i32 {
    match outcome {
        Ok(r) if r.verdict.is_appropriate() => EXIT_APPROPRIATE,
        Ok(_) => EXIT_NOT_APPROPRIATE,
        Err(_) => EXIT_ERROR,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::survival::validate_sample;

    #[test]
    fn all_censored_is_an_error() {
        let s = validate_sample(vec![(1.0, false), (2.0, false)], "").unwrap();
        let out = run_assess(&s, &AssessOptions::default());
        assert!(matches!(out, Err(Error::NoEvents)));
        assert_eq!(out.unwrap_err().to_string(), "no events: fitting undefined");
        assert_eq!(exit_code(&Err(Error::NoEvents)), EXIT_ERROR);
    }

    #[test]
    fn invalid_restrict_is_an_error() {
        let s = validate_sample(vec![(1.0, true), (2.0, false)], "").unwrap();
        let opts = AssessOptions {
            restrict: Some(-1.0),
            ..Default::default()
        };
        assert_eq!(exit_code(&run_assess(&s, &opts)), EXIT_ERROR);
    }
}
