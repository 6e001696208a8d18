//! Censored-data representation, Kaplan-Meier estimation and follow-up
//! summaries.

mod km;
mod sample;
mod summary;

pub use km::{kaplan_meier, km_survival_at, KaplanMeierCurve, KmStep};
pub use sample::{validate_sample, Record, SurvivalSample};
pub use summary::{default_late_window, followup_summary, median, FollowUpSummary};
