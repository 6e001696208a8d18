use super::family::{FamilySpec, Params};
use crate::error::{Error, Result};
use crate::scalar::{ln_add_exp, Real};
use crate::survival::{Record, SurvivalSample};

/// Censored-data log-likelihood `Σ δ·ln f(y) + (1-δ)·ln S(y)`, where for
/// cure specs `f = (1-c)·f₀` and `S = c + (1-c)·S₀`.
pub fn log_likelihood<T: Real>(
    spec: &FamilySpec,
    params: &Params<T>,
    sample: &SurvivalSample<T>,
) -> Result<T> {
    params.validate(spec)?;
    check_support(spec, sample)?;
    Ok(log_likelihood_unchecked(params, sample.records()))
}

/// Rejects events at time zero for families whose density is unbounded or
/// undefined there.
pub(crate) fn check_support<T: Real>(spec: &FamilySpec, sample: &SurvivalSample<T>) -> Result<()> {
    if spec.family.admits_event_at_zero() {
        return Ok(());
    }
    match sample.records().iter().position(|r| r.event && r.time == T::zero()) {
        Some(row) => Err(Error::Domain(format!(
            "event at time 0 (sorted row {row}) has no finite {} density",
            spec.family
        ))),
        None => Ok(()),
    }
}

pub(crate) fn log_likelihood_unchecked<T: Real>(params: &Params<T>, records: &[Record<T>]) -> T {
    let latency = &params.latency;
    match params.cure_fraction {
        None => records
            .iter()
            .map(|r| {
                if r.event {
                    latency.ln_density(r.time)
                } else {
                    latency.ln_survival(r.time)
                }
            })
            .sum(),
        Some(c) => {
            let ln_cured = c.ln();
            let ln_uncured = (-c).ln_1p();
            records
                .iter()
                .map(|r| {
                    if r.event {
                        ln_uncured + latency.ln_density(r.time)
                    } else {
                        ln_add_exp(ln_cured, ln_uncured + latency.ln_survival(r.time))
                    }
                })
                .sum()
        }
    }
}
