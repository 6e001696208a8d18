//! RECeUS assessment: AIC selection over cure and non-cure models, then a
//! cure-fraction floor and a ceiling on the uncured share of survivors at
//! the end of follow-up.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    alpha_n_test, apply_deviance, nonparametric_cure_evidence, CureFractionEvidence, FollowUpTest,
    DEFAULT_ALPHA_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::models::{fit_model, Family, FamilySpec, FitOptions, ModelFit};
use crate::scalar::Real;
use crate::survival::{default_late_window, followup_summary, FollowUpSummary, SurvivalSample};

pub const DEFAULT_CURE_FRACTION_THRESHOLD: f64 = 0.025;
pub const DEFAULT_R_THRESHOLD: f64 = 0.05;

/// AIC values closer than this are treated as tied.
pub const AIC_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Appropriate,
    NotAppropriateNoncureSelected,
    NotAppropriateSmallCureFraction,
    NotAppropriateInsufficientFollowup,
}

impl Verdict {
    pub fn is_appropriate(self) -> bool {
        self == Verdict::Appropriate
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Appropriate => "appropriate",
            Verdict::NotAppropriateNoncureSelected => "not_appropriate_noncure_selected",
            Verdict::NotAppropriateSmallCureFraction => "not_appropriate_small_cure_fraction",
            Verdict::NotAppropriateInsufficientFollowup => "not_appropriate_insufficient_followup",
        }
    }
}

/// Decision rule: a non-cure selection rules the cure model out; otherwise
/// the cure-fraction floor is checked before the survivor-ratio ceiling.
pub fn decide(cure_model_selected: bool, cure_fraction_pass: bool, r_pass: bool) -> Verdict {
    match (cure_model_selected, cure_fraction_pass, r_pass) {
        (false, _, _) => Verdict::NotAppropriateNoncureSelected,
        (true, false, _) => Verdict::NotAppropriateSmallCureFraction,
        (true, true, false) => Verdict::NotAppropriateInsufficientFollowup,
        (true, true, true) => Verdict::Appropriate,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentConfig<T> {
    pub families: Vec<Family>,
    pub cure_fraction_threshold: T,
    pub r_threshold: T,
    /// Evaluation time for the survivor ratio; the largest observed time
    /// when absent.
    pub tau: Option<T>,
    pub alpha_threshold: T,
    /// Window for the late event rate; 20% of maximum follow-up when absent.
    pub late_window: Option<T>,
    pub fit_options: FitOptions<T>,
    /// Fit the model specifications on separate threads.
    pub parallel: bool,
}

impl<T: Real> Default for AssessmentConfig<T> {
    fn default() -> Self {
        Self {
            families: Family::ALL.to_vec(),
            cure_fraction_threshold: T::lit(DEFAULT_CURE_FRACTION_THRESHOLD),
            r_threshold: T::lit(DEFAULT_R_THRESHOLD),
            tau: None,
            alpha_threshold: T::lit(DEFAULT_ALPHA_THRESHOLD),
            late_window: None,
            fit_options: FitOptions::default(),
            parallel: true,
        }
    }
}

impl<T: Real> AssessmentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: T| {
            if v > T::zero() && v < T::one() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must lie in (0, 1), got {v}")))
            }
        };
        unit("cure fraction threshold", self.cure_fraction_threshold)?;
        unit("r threshold", self.r_threshold)?;
        unit("alpha threshold", self.alpha_threshold)?;
        if let Some(tau) = self.tau {
            if !(tau > T::zero() && tau.is_finite()) {
                return Err(Error::InvalidConfig(format!("tau must be positive, got {tau}")));
            }
        }
        if self.families.is_empty() {
            return Err(Error::InvalidConfig("no model families requested".to_string()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTableRow<T> {
    pub spec: FamilySpec,
    pub k: usize,
    pub log_likelihood: Option<T>,
    pub aic: Option<T>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSelection<T> {
    pub table: Vec<ModelTableRow<T>>,
    /// Fit behind each table row, absent when fitting raised an error.
    pub fits: Vec<Option<ModelFit<T>>>,
    pub selected_index: usize,
    /// The lowest-AIC fit had not converged and was passed over.
    pub substituted: bool,
}

impl<T: Real> ModelSelection<T> {
    pub fn selected(&self) -> &ModelFit<T> {
        self.fits[self.selected_index]
            .as_ref()
            .expect("selected row always has a fit")
    }

    /// Lowest-AIC cure fit, preferring converged ones.
    pub fn best_cure_fit(&self) -> Option<&ModelFit<T>> {
        let cure_rows = |require_converged: bool| {
            let rows: Vec<(usize, &ModelTableRow<T>)> = self
                .table
                .iter()
                .enumerate()
                .filter(|(i, r)| {
                    r.spec.cure && self.fits[*i].is_some() && (!require_converged || r.converged)
                })
                .collect();
            best_row(rows.into_iter())
        };
        cure_rows(true)
            .or_else(|| cure_rows(false))
            .and_then(|i| self.fits[i].as_ref())
    }

    /// The fit of `spec`, if it produced one.
    pub fn fit_for(&self, spec: &FamilySpec) -> Option<&ModelFit<T>> {
        self.table
            .iter()
            .position(|r| r.spec == *spec)
            .and_then(|i| self.fits[i].as_ref())
    }
}

/// Order on candidate rows: AIC, then fewer parameters, then family order,
/// then non-cure before cure.
fn compare_rows<T: Real>(a: &ModelTableRow<T>, b: &ModelTableRow<T>) -> Ordering {
    let (aa, ab) = (a.aic.unwrap_or(T::infinity()), b.aic.unwrap_or(T::infinity()));
    let by_aic = if (aa - ab).abs() < T::lit(AIC_TIE_TOLERANCE) || aa == ab {
        Ordering::Equal
    } else if aa < ab {
        Ordering::Less
    } else {
        Ordering::Greater
    };
    by_aic
        .then(a.k.cmp(&b.k))
        .then(a.spec.family.order().cmp(&b.spec.family.order()))
        .then(a.spec.cure.cmp(&b.spec.cure))
}

fn best_row<'a, T: Real + 'a>(
    rows: impl Iterator<Item = (usize, &'a ModelTableRow<T>)>,
) -> Option<usize> {
    rows.filter(|(_, r)| r.aic.is_some_and(|a| a.is_finite()))
        .min_by(|(_, a), (_, b)| compare_rows(a, b))
        .map(|(i, _)| i)
}

/// Picks the row used for the assessment: the best converged row, and
/// whether that passed over a better non-converged one.
pub fn rank_rows<T: Real>(table: &[ModelTableRow<T>]) -> Option<(usize, bool)> {
    let chosen = best_row(table.iter().enumerate().filter(|(_, r)| r.converged))?;
    let overall = best_row(table.iter().enumerate());
    Some((chosen, overall != Some(chosen)))
}

fn row_from<T: Real>(spec: FamilySpec, fit: &Result<ModelFit<T>>) -> ModelTableRow<T> {
    match fit {
        Ok(f) => ModelTableRow {
            spec,
            k: spec.k(),
            log_likelihood: Some(f.log_likelihood),
            aic: Some(f.aic),
            converged: f.converged,
            error: None,
        },
        Err(e) => ModelTableRow {
            spec,
            k: spec.k(),
            log_likelihood: None,
            aic: None,
            converged: false,
            error: Some(e.to_string()),
        },
    }
}

fn fit_all<T: Real>(
    sample: &SurvivalSample<T>,
    specs: &[FamilySpec],
    options: &FitOptions<T>,
    parallel: bool,
) -> Vec<Result<ModelFit<T>>> {
    if !parallel {
        return specs.iter().map(|s| fit_model(sample, s, options)).collect();
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .map(|s| scope.spawn(move || fit_model(sample, s, options)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fit thread panicked"))
            .collect()
    })
}

/// Fits every family with and without a cure fraction and selects the
/// lowest AIC among converged fits.
pub fn select_model_by_aic<T: Real>(
    sample: &SurvivalSample<T>,
    families: &[Family],
    options: &FitOptions<T>,
) -> Result<ModelSelection<T>> {
    select_with(sample, families, options, false)
}

fn select_with<T: Real>(
    sample: &SurvivalSample<T>,
    families: &[Family],
    options: &FitOptions<T>,
    parallel: bool,
) -> Result<ModelSelection<T>> {
    if sample.n_events() == 0 {
        return Err(Error::NoEvents);
    }
    let specs: Vec<FamilySpec> = families
        .iter()
        .flat_map(|&f| [FamilySpec::new(f, false), FamilySpec::new(f, true)])
        .collect();
    let results = fit_all(sample, &specs, options, parallel);
    let table: Vec<ModelTableRow<T>> = specs
        .iter()
        .zip(&results)
        .map(|(&s, r)| row_from(s, r))
        .collect();
    let (selected_index, substituted) = rank_rows(&table).ok_or_else(|| {
        let reasons: Vec<String> = table
            .iter()
            .map(|r| {
                format!(
                    "{}: {}",
                    r.spec,
                    r.error.as_deref().unwrap_or("did not converge")
                )
            })
            .collect();
        Error::Assessment(format!("no model converged ({})", reasons.join("; ")))
    })?;
    Ok(ModelSelection {
        table,
        fits: results.into_iter().map(Result::ok).collect(),
        selected_index,
        substituted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReceusRatio<T> {
    pub s0_at_tau: T,
    pub s_at_tau: T,
    /// Share of uncured subjects among survivors at `tau`.
    pub r_hat: T,
}

/// `S₀(τ)`, `S(τ) = c + (1 − c)·S₀(τ)` and `r̂ = S₀(τ)/S(τ)` for a cure fit
/// with cure fraction `c`.
pub fn receus_ratio<T: Real>(fit: &ModelFit<T>, tau: T) -> Result<ReceusRatio<T>> {
    let c = fit.params.cure_fraction.ok_or_else(|| {
        Error::Contract(format!("survivor ratio needs a cure model, got `{}`", fit.spec))
    })?;
    if !(tau >= T::zero()) {
        return Err(Error::Contract(format!("tau must be nonnegative, got {tau}")));
    }
    let s0 = fit.params.latency.survival(tau);
    let s = c + (T::one() - c) * s0;
    Ok(ReceusRatio {
        s0_at_tau: s0,
        s_at_tau: s,
        r_hat: s0 / s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CureAssessment<T> {
    pub model_table: Vec<ModelTableRow<T>>,
    pub selected: ModelFit<T>,
    pub cure_model_selected: bool,
    /// Lowest-AIC non-converged fit was passed over.
    pub substituted: bool,
    /// Cure fit behind the ratio: the selected fit, or the best cure fit
    /// when a non-cure model won.
    pub cure_fit: ModelFit<T>,
    pub cure_fraction: T,
    pub tau: T,
    pub s0_at_tau: T,
    pub s_at_tau: T,
    pub r_hat: T,
    pub cure_fraction_threshold: T,
    pub r_threshold: T,
    pub cure_fraction_pass: bool,
    pub r_pass: bool,
    pub verdict: Verdict,
    pub summary: FollowUpSummary<T>,
    pub followup_test: FollowUpTest<T>,
    /// Kaplan-Meier estimate plus the deviance test for the cure fit's
    /// family.
    pub cure_evidence: CureFractionEvidence<T>,
}

pub fn receus_assess<T: Real>(
    sample: &SurvivalSample<T>,
    config: &AssessmentConfig<T>,
) -> Result<CureAssessment<T>> {
    config.validate()?;
    if sample.n_events() == 0 {
        return Err(Error::NoEvents);
    }
    let selection = select_with(sample, &config.families, &config.fit_options, config.parallel)?;
    let selected = selection.selected().clone();
    let cure_model_selected = selected.spec.cure;
    let cure_fit = if cure_model_selected {
        selected.clone()
    } else {
        selection
            .best_cure_fit()
            .cloned()
            .ok_or_else(|| Error::Assessment("no cure model could be fitted".to_string()))?
    };

    let tau = config.tau.unwrap_or_else(|| sample.max_time());
    let ratio = receus_ratio(&cure_fit, tau)?;
    let cure_fraction = cure_fit
        .params
        .cure_fraction
        .expect("cure fit carries a cure fraction");
    let cure_fraction_pass = cure_fraction > config.cure_fraction_threshold;
    let r_pass = ratio.r_hat < config.r_threshold;

    let late_window = config.late_window.unwrap_or_else(|| default_late_window(sample));
    let summary = followup_summary(sample, late_window)?;
    let followup_test = alpha_n_test(sample, config.alpha_threshold)?;

    let mut cure_evidence = nonparametric_cure_evidence(sample);
    cure_evidence.family = Some(cure_fit.spec.family);
    match selection.fit_for(&FamilySpec::new(cure_fit.spec.family, false)) {
        Some(plain) => apply_deviance(&mut cure_evidence, &cure_fit, plain),
        None => {
            cure_evidence.diagnostic = Some(format!(
                "`{} non-cure` fit unavailable",
                cure_fit.spec.family
            ))
        }
    }

    Ok(CureAssessment {
        model_table: selection.table.clone(),
        verdict: decide(cure_model_selected, cure_fraction_pass, r_pass),
        selected,
        cure_model_selected,
        substituted: selection.substituted,
        cure_fit,
        cure_fraction,
        tau,
        s0_at_tau: ratio.s0_at_tau,
        s_at_tau: ratio.s_at_tau,
        r_hat: ratio.r_hat,
        cure_fraction_threshold: config.cure_fraction_threshold,
        r_threshold: config.r_threshold,
        cure_fraction_pass,
        r_pass,
        summary,
        followup_test,
        cure_evidence,
    })
}
