use serde::{Deserialize, Serialize};

use super::fit::ModelFit;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::normal_quantile;

/// Confidence interval built on the unconstrained scale and mapped back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaldInterval<T> {
    pub name: String,
    pub estimate: T,
    pub lower: T,
    pub upper: T,
    /// Standard error on the unconstrained scale.
    pub se: T,
}

pub fn wald_intervals<T: Real>(fit: &ModelFit<T>, level: T) -> Result<Vec<WaldInterval<T>>> {
    if !(level > T::zero() && level < T::one()) {
        return Err(Error::InvalidConfig(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let se = fit.standard_errors.as_ref().ok_or_else(|| {
        Error::Hessian(
            fit.hessian_diagnostic
                .clone()
                .unwrap_or_else(|| "no standard errors available".to_string()),
        )
    })?;
    let z = normal_quantile(T::lit(0.5) + level * T::lit(0.5));
    let estimates = fit.params.values();
    let centres = fit.params.to_unconstrained();
    let out = fit
        .spec
        .parameter_names()
        .into_iter()
        .zip(fit.spec.transforms())
        .enumerate()
        .map(|(i, (name, tr))| WaldInterval {
            name: name.to_string(),
            estimate: estimates[i],
            lower: tr.inverse(centres[i] - z * se[i]),
            upper: tr.inverse(centres[i] + z * se[i]),
            se: se[i],
        })
        .collect();
    Ok(out)
}
