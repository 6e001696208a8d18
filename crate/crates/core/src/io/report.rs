use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{CureFractionEvidence, FollowUpTest};
use crate::error::Result;
use crate::models::{wald_intervals, Family, ModelFit};
use crate::receus::{CureAssessment, Verdict};
use crate::survival::FollowUpSummary;

/// JSON Schema for [`ReportDocument`].
pub const REPORT_SCHEMA: &str = include_str!("../../schema/report.schema.json");

pub const CLINICAL_JUDGMENT_PROMPT: &str = "Before relying on the quantitative evidence below, \
obtain clinical judgment: is it plausible that a fraction of these patients will never \
experience the event, and does the follow-up cover the period in which events are \
expected? This step cannot be automated.";

const WALD_LEVEL: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub label: String,
    pub time_unit: String,
    pub n: usize,
    pub n_events: usize,
    pub n_censored: usize,
}

/// Settings the assessment ran with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub families: Vec<Family>,
    pub time_scale: f64,
    /// Follow-up cutoff applied before the assessment.
    pub restrict: Option<f64>,
    /// Requested evaluation time; the largest observed time when absent.
    pub tau: Option<f64>,
    pub cure_fraction_threshold: f64,
    pub r_threshold: f64,
    pub alpha_threshold: f64,
    /// Requested late window; 20% of maximum follow-up when absent.
    pub late_window: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualEvidence {
    pub km_at_max: f64,
    pub plateau_length: f64,
    pub plateau_present: bool,
    pub late_window: f64,
    pub late_event_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRow {
    pub family: Family,
    pub cure: bool,
    pub k: usize,
    pub log_likelihood: Option<f64>,
    pub aic: Option<f64>,
    /// AIC minus the smallest AIC in the table.
    pub delta_aic: Option<f64>,
    pub converged: bool,
    pub selected: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterEstimate {
    pub name: String,
    pub estimate: f64,
    /// Standard error on the unconstrained scale.
    pub se: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub family: Family,
    pub cure: bool,
    pub log_likelihood: f64,
    pub aic: f64,
    pub converged: bool,
    pub interval_level: f64,
    pub parameters: Vec<ParameterEstimate>,
    pub hessian_diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceusReport {
    pub cure_model_selected: bool,
    pub substituted: bool,
    /// Cure fit behind the ratio.
    pub cure_fit: FittedModel,
    pub cure_fraction: f64,
    pub tau: f64,
    pub s0_at_tau: f64,
    pub s_at_tau: f64,
    pub r_hat: f64,
    pub cure_fraction_threshold: f64,
    pub r_threshold: f64,
    pub cure_fraction_pass: bool,
    pub r_pass: bool,
}

/// Complete assessment report; the JSON form follows [`REPORT_SCHEMA`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: ToolInfo,
    pub dataset: DatasetInfo,
    pub clinical_judgment: String,
    pub config: ConfigEcho,
    pub summary: FollowUpSummary<f64>,
    pub visual_evidence: VisualEvidence,
    pub model_table: Vec<ModelRow>,
    pub selected_model: FittedModel,
    pub receus: ReceusReport,
    pub followup_test: FollowUpTest<f64>,
    pub cure_evidence: CureFractionEvidence<f64>,
    pub verdict: Verdict,
    pub appropriate: bool,
    pub notes: Vec<String>,
}

impl From<&ModelFit<f64>> for FittedModel {
    /// Estimates with 95% Wald intervals when the Hessian allows them.
    fn from(fit: &ModelFit<f64>) -> Self {
        fitted_model(fit)
    }
}

fn fitted_model(fit: &ModelFit<f64>) -> FittedModel {
    let intervals = wald_intervals(fit, WALD_LEVEL).ok();
    let values = fit.params.values();
    let parameters = fit
        .parameter_names()
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let w = intervals.as_ref().map(|v| &v[i]);
            ParameterEstimate {
                name: name.to_string(),
                estimate: values[i],
                se: w.map(|w| w.se),
                lower: w.map(|w| w.lower),
                upper: w.map(|w| w.upper),
            }
        })
        .collect();
    FittedModel {
        family: fit.spec.family,
        cure: fit.spec.cure,
        log_likelihood: fit.log_likelihood,
        aic: fit.aic,
        converged: fit.converged,
        interval_level: WALD_LEVEL,
        parameters,
        hessian_diagnostic: fit.hessian_diagnostic.clone(),
    }
}

impl ReportDocument {
    pub fn new(
        label: impl Into<String>,
        time_unit: impl Into<String>,
        config: ConfigEcho,
        assessment: &CureAssessment<f64>,
    ) -> Self {
        let a = assessment;
        let s = &a.summary;
        let min_aic = a
            .model_table
            .iter()
            .filter_map(|r| r.aic)
            .filter(|x| x.is_finite())
            .fold(f64::INFINITY, f64::min);
        let model_table = a
            .model_table
            .iter()
            .map(|r| ModelRow {
                family: r.spec.family,
                cure: r.spec.cure,
                k: r.k,
                log_likelihood: r.log_likelihood.filter(|x| x.is_finite()),
                aic: r.aic.filter(|x| x.is_finite()),
                delta_aic: r.aic.filter(|x| x.is_finite()).map(|x| x - min_aic),
                converged: r.converged,
                selected: r.spec == a.selected.spec,
                error: r.error.clone(),
            })
            .collect();

        let mut notes = Vec::new();
        if a.substituted {
            notes.push(
                "the lowest-AIC model did not converge; the best converged model was used instead"
                    .to_string(),
            );
        }
        if !a.cure_model_selected {
            notes.push(format!(
                "a non-cure model was selected; cure quantities come from the best cure fit ({})",
                a.cure_fit.spec
            ));
        }
        if a.verdict == Verdict::NotAppropriateSmallCureFraction {
            notes.push(
                "small estimated cure fraction: either a cure model is likely not valid or \
                 follow-up is likely insufficient"
                    .to_string(),
            );
        }
        if a.followup_test.sufficient_followup != a.verdict.is_appropriate() {
            notes.push(format!(
                "the alpha_n test ({}) and the RECeUS verdict disagree",
                if a.followup_test.sufficient_followup {
                    "sufficient follow-up"
                } else {
                    "follow-up not shown sufficient"
                }
            ));
        }
        if let Some(d) = &a.cure_evidence.diagnostic {
            notes.push(format!("deviance test unavailable: {d}"));
        }
        if let Some(d) = &a.selected.hessian_diagnostic {
            notes.push(format!("selected model intervals unavailable: {d}"));
        }

        ReportDocument {
            tool: ToolInfo {
                name: env!("CARGO_PKG_NAME").to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            dataset: DatasetInfo {
                label: label.into(),
                time_unit: time_unit.into(),
                n: s.n,
                n_events: s.n_events,
                n_censored: s.n - s.n_events,
            },
            clinical_judgment: CLINICAL_JUDGMENT_PROMPT.to_string(),
            config,
            summary: s.clone(),
            visual_evidence: VisualEvidence {
                km_at_max: s.km_at_max,
                plateau_length: s.plateau_length,
                plateau_present: s.plateau_length > 0.0,
                late_window: s.late_window,
                late_event_rate: s.late_event_rate,
            },
            model_table,
            selected_model: fitted_model(&a.selected),
            receus: ReceusReport {
                cure_model_selected: a.cure_model_selected,
                substituted: a.substituted,
                cure_fit: fitted_model(&a.cure_fit),
                cure_fraction: a.cure_fraction,
                tau: a.tau,
                s0_at_tau: a.s0_at_tau,
                s_at_tau: a.s_at_tau,
                r_hat: a.r_hat,
                cure_fraction_threshold: a.cure_fraction_threshold,
                r_threshold: a.r_threshold,
                cure_fraction_pass: a.cure_fraction_pass,
                r_pass: a.r_pass,
            },
            followup_test: a.followup_test.clone(),
            cure_evidence: a.cure_evidence.clone(),
            verdict: a.verdict,
            appropriate: a.verdict.is_appropriate(),
            notes,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_text(&self) -> String {
        let f = |x: f64| format_sig(x, 6);
        let opt = |x: Option<f64>| x.map_or_else(|| "NA".to_string(), f);
        let unit = if self.dataset.time_unit.is_empty() {
            String::new()
        } else {
            format!(" {}", self.dataset.time_unit)
        };
        let mut o = String::new();
        let _ = writeln!(o, "{} {}", self.tool.name, self.tool.version);
        let _ = writeln!(
            o,
            "Dataset: {} (n = {}, events = {}, censored = {})",
            self.dataset.label, self.dataset.n, self.dataset.n_events, self.dataset.n_censored
        );
        if let Some(c) = self.config.restrict {
            let _ = writeln!(o, "Follow-up restricted at {}{unit}", f(c));
        }

        let _ = writeln!(o, "\nStep 1: Clinical judgment");
        let _ = writeln!(o, "  {}", self.clinical_judgment);

        let s = &self.summary;
        let v = &self.visual_evidence;
        let _ = writeln!(o, "\nStep 2: Visual evidence");
        let _ = writeln!(o, "  Median follow-up:        {}{unit}", f(s.median_followup));
        let _ = writeln!(o, "  Maximum follow-up:       {}{unit}", f(s.max_followup));
        let _ = writeln!(o, "  Last event time:         {}{unit}", opt(s.max_event_time));
        let _ = writeln!(o, "  KM at maximum follow-up: {}", f(v.km_at_max));
        let _ = writeln!(
            o,
            "  Plateau length:          {}{unit} ({})",
            f(v.plateau_length),
            if v.plateau_present { "plateau present" } else { "no plateau" }
        );
        let _ = writeln!(
            o,
            "  Late event rate:         {} per unit time over the last {}{unit}",
            f(v.late_event_rate),
            f(v.late_window)
        );

        let _ = writeln!(o, "\nStep 3: Quantitative evidence");
        let _ = writeln!(o, "  Model comparison (AIC):");
        let _ = writeln!(
            o,
            "    {:<13} {:<8} {:>2} {:>14} {:>14} {:>12}  {}",
            "family", "cure", "k", "loglik", "AIC", "dAIC", "status"
        );
        for r in &self.model_table {
            let status = match (&r.error, r.converged, r.selected) {
                (Some(e), _, _) => format!("error: {e}"),
                (None, false, _) => "not converged".to_string(),
                (None, true, true) => "converged, selected".to_string(),
                (None, true, false) => "converged".to_string(),
            };
            let _ = writeln!(
                o,
                "    {:<13} {:<8} {:>2} {:>14} {:>14} {:>12}  {status}",
                r.family.name(),
                if r.cure { "yes" } else { "no" },
                r.k,
                opt(r.log_likelihood),
                opt(r.aic),
                opt(r.delta_aic),
            );
        }
        write_fit(&mut o, "Selected model", &self.selected_model);
        let rc = &self.receus;
        if !rc.cure_model_selected {
            write_fit(&mut o, "Best cure model", &rc.cure_fit);
        }

        let _ = writeln!(o, "  RECeUS:");
        let _ = writeln!(
            o,
            "    cure model selected by AIC: {}",
            if rc.cure_model_selected { "yes" } else { "no" }
        );
        let _ = writeln!(
            o,
            "    cure fraction: {} (threshold > {}: {})",
            f(rc.cure_fraction),
            f(rc.cure_fraction_threshold),
            pass(rc.cure_fraction_pass)
        );
        let _ = writeln!(o, "    tau: {}{unit}", f(rc.tau));
        let _ = writeln!(o, "    S0(tau): {}", f(rc.s0_at_tau));
        let _ = writeln!(o, "    S(tau): {}", f(rc.s_at_tau));
        let _ = writeln!(
            o,
            "    r: {} (threshold < {}: {})",
            f(rc.r_hat),
            f(rc.r_threshold),
            pass(rc.r_pass)
        );

        let t = &self.followup_test;
        let _ = writeln!(o, "  Sufficient follow-up test:");
        let _ = writeln!(
            o,
            "    events in ({}, {}]: {} of n = {}",
            f(t.interval_lower),
            f(t.interval_upper),
            t.n_n,
            t.n
        );
        let _ = writeln!(
            o,
            "    alpha_n: {} (threshold < {}: {})",
            f(t.alpha_n),
            f(t.threshold),
            if t.sufficient_followup { "sufficient" } else { "not shown sufficient" }
        );

        let e = &self.cure_evidence;
        let _ = writeln!(o, "  Cure fraction evidence:");
        let _ = writeln!(o, "    KM cure fraction estimate: {}", f(e.cure_fraction_hat));
        match (e.deviance, e.deviance_p_value) {
            (Some(d), Some(p)) => {
                let fam = e.family.map_or("", |x| x.name());
                let _ = writeln!(o, "    deviance ({fam}): {} (p = {})", f(d), f(p));
            }
            _ => {
                let _ = writeln!(
                    o,
                    "    deviance: unavailable ({})",
                    e.diagnostic.as_deref().unwrap_or("unknown reason")
                );
            }
        }

        let _ = writeln!(o, "\nVerdict: {}", self.verdict.as_str());
        let _ = writeln!(
            o,
            "Cure model appropriate by RECeUS: {}",
            if self.appropriate { "yes" } else { "no" }
        );
        for n in &self.notes {
            let _ = writeln!(o, "Note: {n}");
        }
        o
    }
}

fn pass(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

impl FittedModel {
    pub fn to_text(&self, title: &str) -> String {
        let mut o = String::new();
        write_fit(&mut o, title, self);
        o
    }
}

fn write_fit(o: &mut String, title: &str, m: &FittedModel) {
    let f = |x: f64| format_sig(x, 6);
    let _ = writeln!(
        o,
        "  {title}: {} {} (loglik {}, AIC {}{})",
        m.family.name(),
        if m.cure { "cure" } else { "non-cure" },
        f(m.log_likelihood),
        f(m.aic),
        if m.converged { "" } else { ", not converged" }
    );
    for p in &m.parameters {
        match (p.lower, p.upper) {
            (Some(lo), Some(hi)) => {
                let _ = writeln!(
                    o,
                    "    {:<14} {:>12}  {}% CI [{}, {}]",
                    p.name,
                    f(p.estimate),
                    format_sig(m.interval_level * 100.0, 3),
                    f(lo),
                    f(hi)
                );
            }
            _ => {
                let _ = writeln!(o, "    {:<14} {:>12}  CI NA", p.name, f(p.estimate));
            }
        }
    }
}

/// Formats `x` with `digits` significant digits, dropping trailing zeros.
/// Uses scientific notation for very small or very large magnitudes.
pub fn format_sig(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if x.is_nan() {
        return "NaN".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
