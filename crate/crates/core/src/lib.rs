//! Tools for deciding whether right-censored survival data can be analysed
//! with a mixture cure model.
//!
//! The pipeline has three quantitative layers:
//!
//! * visual evidence: Kaplan-Meier curve, plateau length, late event rate;
//! * follow-up diagnostics: the Kaplan-Meier cure-fraction estimate, the
//!   parametric deviance test, and the `α̂ₙ` follow-up statistic;
//! * RECeUS: AIC selection over cure and non-cure parametric models, a
//!   cure-fraction floor, and a ceiling on the share of uncured subjects
//!   among survivors at the end of follow-up.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`.

pub mod diagnostics;
pub mod error;
pub mod io;
pub mod models;
pub mod receus;
pub mod scalar;
pub mod simulate;
pub mod special;
pub mod survival;

pub use error::{Error, Result};
pub use scalar::Real;
pub use diagnostics::{alpha_n_test, deviance_cure_test, CureFractionEvidence, FollowUpTest};
pub use models::{fit_model, log_likelihood, Family, FamilySpec, FitOptions, Latency, Params};
pub use receus::{receus_assess, AssessmentConfig, CureAssessment, Verdict};
pub use simulate::{restrict_followup, simulate_mixture, Censoring, Dropout, SimulationConfig};
pub use survival::{kaplan_meier, km_survival_at, validate_sample, followup_summary};

pub type Sample = survival::SurvivalSample<f64>;
pub type Curve = survival::KaplanMeierCurve<f64>;
pub type Fit = models::ModelFit<f64>;
pub type Assessment = CureAssessment<f64>;
pub type Summary = survival::FollowUpSummary<f64>;
pub type Config = AssessmentConfig<f64>;
