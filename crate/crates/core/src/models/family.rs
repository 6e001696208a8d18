use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{
    gamma_density, ln_gamma, ln_normal_sf, ln_regularized_gamma_q, normal_cdf, normal_quantile,
    regularized_gamma_p,
};

/// Latency distribution families, in model-table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Exponential,
    Weibull,
    Gamma,
    LogLogistic,
    LogNormal,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Exponential,
        Family::Weibull,
        Family::Gamma,
        Family::LogLogistic,
        Family::LogNormal,
    ];

    pub fn latency_parameter_count(self) -> usize {
        match self {
            Family::Exponential => 1,
            _ => 2,
        }
    }

    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Family::Exponential => &["rate"],
            Family::Weibull | Family::LogLogistic => &["shape", "scale"],
            Family::Gamma => &["shape", "rate"],
            Family::LogNormal => &["meanlog", "sdlog"],
        }
    }

    /// Position in `ALL`, used for tie-breaking.
    pub fn order(self) -> usize {
        Family::ALL.iter().position(|&f| f == self).unwrap_or(usize::MAX)
    }

    /// Whether an event at time exactly zero has a finite log-density for
    /// every parameter value.
    pub fn admits_event_at_zero(self) -> bool {
        matches!(self, Family::Exponential)
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::Weibull => "weibull",
            Family::Gamma => "gamma",
            Family::LogLogistic => "loglogistic",
            Family::LogNormal => "lognormal",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "exponential" | "exp" => Ok(Family::Exponential),
            "weibull" => Ok(Family::Weibull),
            "gamma" => Ok(Family::Gamma),
            "loglogistic" | "llogis" => Ok(Family::LogLogistic),
            "lognormal" | "lnorm" => Ok(Family::LogNormal),
            other => Err(Error::InvalidConfig(format!("unknown family `{other}`"))),
        }
    }
}

/// A model specification: latency family plus whether a cured fraction is
/// included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FamilySpec {
    pub family: Family,
    pub cure: bool,
}

impl FamilySpec {
    pub fn new(family: Family, cure: bool) -> Self {
        Self { family, cure }
    }

    /// Number of free parameters.
    pub fn k(&self) -> usize {
        self.family.latency_parameter_count() + usize::from(self.cure)
    }

    /// Parameter names in the order of the unconstrained vector.
    pub fn parameter_names(&self) -> Vec<&'static str> {
        let mut names = Vec::with_capacity(self.k());
        if self.cure {
            names.push("cure_fraction");
        }
        names.extend_from_slice(self.family.parameter_names());
        names
    }

    pub fn transforms(&self) -> Vec<Transform> {
        let mut out = Vec::with_capacity(self.k());
        if self.cure {
            out.push(Transform::Logit);
        }
        match self.family {
            Family::LogNormal => out.extend([Transform::Identity, Transform::Log]),
            f => out.extend(std::iter::repeat_n(Transform::Log, f.latency_parameter_count())),
        }
        out
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.family, if self.cure { "cure" } else { "non-cure" })
    }
}

/// Map from a constrained parameter to the real line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Identity,
    Log,
    Logit,
}

impl Transform {
    pub fn forward<T: Real>(self, x: T) -> T {
        match self {
            Transform::Identity => x,
            Transform::Log => x.ln(),
            Transform::Logit => (x / (T::one() - x)).ln(),
        }
    }

    pub fn inverse<T: Real>(self, y: T) -> T {
        match self {
            Transform::Identity => y,
            Transform::Log => y.exp(),
            Transform::Logit => T::one() / (T::one() + (-y).exp()),
        }
    }
}

/// Latency (susceptible) distribution with its parameters.
///
/// * exponential: `S₀(t) = exp(-rate·t)`
/// * weibull: `S₀(t) = exp(-(t/scale)^shape)`
/// * gamma: `S₀(t) = 1 - P(shape, rate·t)`
/// * log-logistic: `S₀(t) = 1 / (1 + (t/scale)^shape)`
/// * log-normal: `S₀(t) = 1 - Φ((ln t - meanlog)/sdlog)`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Latency<T> {
    Exponential { rate: T },
    Weibull { shape: T, scale: T },
    Gamma { shape: T, rate: T },
    LogLogistic { shape: T, scale: T },
    LogNormal { meanlog: T, sdlog: T },
}

impl<T: Real> Latency<T> {
    pub fn family(&self) -> Family {
        match self {
            Latency::Exponential { .. } => Family::Exponential,
            Latency::Weibull { .. } => Family::Weibull,
            Latency::Gamma { .. } => Family::Gamma,
            Latency::LogLogistic { .. } => Family::LogLogistic,
            Latency::LogNormal { .. } => Family::LogNormal,
        }
    }

    /// Parameter values in `Family::parameter_names` order.
    pub fn values(&self) -> Vec<T> {
        match *self {
            Latency::Exponential { rate } => vec![rate],
            Latency::Weibull { shape, scale } | Latency::LogLogistic { shape, scale } => {
                vec![shape, scale]
            }
            Latency::Gamma { shape, rate } => vec![shape, rate],
            Latency::LogNormal { meanlog, sdlog } => vec![meanlog, sdlog],
        }
    }

    pub fn from_values(family: Family, v: &[T]) -> Result<Self> {
        if v.len() != family.latency_parameter_count() {
            return Err(Error::Domain(format!(
                "{family} takes {} parameters, got {}",
                family.latency_parameter_count(),
                v.len()
            )));
        }
        let latency = match family {
            Family::Exponential => Latency::Exponential { rate: v[0] },
            Family::Weibull => Latency::Weibull {
                shape: v[0],
                scale: v[1],
            },
            Family::Gamma => Latency::Gamma {
                shape: v[0],
                rate: v[1],
            },
            Family::LogLogistic => Latency::LogLogistic {
                shape: v[0],
                scale: v[1],
            },
            Family::LogNormal => Latency::LogNormal {
                meanlog: v[0],
                sdlog: v[1],
            },
        };
        Ok(latency)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Latency::LogNormal { meanlog, sdlog } => {
                meanlog.is_finite() && sdlog.is_finite() && sdlog > T::zero()
            }
            _ => self
                .values()
                .iter()
                .all(|&v| v.is_finite() && v > T::zero()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "{} parameters out of domain: {:?}",
                self.family(),
                self.values()
            )))
        }
    }

    /// `ln S₀(t)`; zero at `t = 0`.
    pub fn ln_survival(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        match *self {
            Latency::Exponential { rate } => -rate * t,
            Latency::Weibull { shape, scale } => -(t / scale).powf(shape),
            Latency::Gamma { shape, rate } => ln_regularized_gamma_q(shape, rate * t),
            Latency::LogLogistic { shape, scale } => -(t / scale).powf(shape).ln_1p(),
            Latency::LogNormal { meanlog, sdlog } => ln_normal_sf((t.ln() - meanlog) / sdlog),
        }
    }

    pub fn survival(&self, t: T) -> T {
        self.ln_survival(t).exp()
    }

    /// `F₀(t)`, computed without cancellation where the family allows it.
    pub fn cdf(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        match *self {
            Latency::Gamma { shape, rate } => regularized_gamma_p(shape, rate * t),
            Latency::LogNormal { meanlog, sdlog } => normal_cdf((t.ln() - meanlog) / sdlog),
            _ => -self.ln_survival(t).exp_m1(),
        }
    }

    /// `ln f₀(t)`. For `t = 0` only the exponential family gives a finite
    /// value; other families return NaN and callers reject such records.
    pub fn ln_density(&self, t: T) -> T {
        if t < T::zero() {
            return T::nan();
        }
        if t == T::zero() {
            return match *self {
                Latency::Exponential { rate } => rate.ln(),
                _ => T::nan(),
            };
        }
        let ln_t = t.ln();
        match *self {
            Latency::Exponential { rate } => rate.ln() - rate * t,
            Latency::Weibull { shape, scale } => {
                let ln_z = ln_t - scale.ln();
                shape.ln() - scale.ln() + (shape - T::one()) * ln_z - (shape * ln_z).exp()
            }
            Latency::Gamma { shape, rate } => {
                shape * rate.ln() + (shape - T::one()) * ln_t - rate * t - ln_gamma(shape)
            }
            Latency::LogLogistic { shape, scale } => {
                let ln_z = ln_t - scale.ln();
                shape.ln() - scale.ln() + (shape - T::one()) * ln_z
                    - T::lit(2.0) * (shape * ln_z).exp().ln_1p()
            }
            Latency::LogNormal { meanlog, sdlog } => {
                let z = (ln_t - meanlog) / sdlog;
                -ln_t - sdlog.ln() - T::lit(0.5) * T::TAU().ln() - T::lit(0.5) * z * z
            }
        }
    }

    pub fn density(&self, t: T) -> T {
        self.ln_density(t).exp()
    }

    /// Inverse CDF for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: T) -> T {
        if !(u > T::zero()) {
            return T::zero();
        }
        if !(u < T::one()) {
            return T::infinity();
        }
        // -ln(1-u) without cancellation for small u
        let cum_hazard = -(-u).ln_1p();
        match *self {
            Latency::Exponential { rate } => cum_hazard / rate,
            Latency::Weibull { shape, scale } => scale * cum_hazard.powf(T::one() / shape),
            Latency::LogLogistic { shape, scale } => {
                scale * (u / (T::one() - u)).powf(T::one() / shape)
            }
            Latency::LogNormal { meanlog, sdlog } => (meanlog + sdlog * normal_quantile(u)).exp(),
            Latency::Gamma { shape, rate } => gamma_quantile(shape, u) / rate,
        }
    }
}

/// Solves `P(shape, x) = u` by safeguarded Newton iteration inside a
/// bisection bracket.
fn gamma_quantile<T: Real>(shape: T, u: T) -> T {
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(4.0));
    let mut lo = T::zero();
    let mut hi = shape.max(T::one());
    while regularized_gamma_p(shape, hi) < u {
        lo = hi;
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return T::infinity();
        }
    }
    let mut x = (lo + hi) * T::lit(0.5);
    for _ in 0..200 {
        let f = regularized_gamma_p(shape, x) - u;
        if f > T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        let dens = gamma_density(shape, x);
        let mut next = if dens > T::zero() { x - f / dens } else { T::nan() };
        if !(next > lo && next < hi) {
            next = (lo + hi) * T::lit(0.5);
        }
        let step = (next - x).abs();
        x = next;
        if step <= tol * x.max(T::min_positive_value()) || hi - lo <= tol * x {
            break;
        }
    }
    x
}

/// Fitted or generating parameters: optional cure fraction plus latency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params<T> {
    /// Long-run fraction never experiencing the event (`1 - p`).
    pub cure_fraction: Option<T>,
    pub latency: Latency<T>,
}

impl<T: Real> Params<T> {
    pub fn non_cure(latency: Latency<T>) -> Self {
        Self {
            cure_fraction: None,
            latency,
        }
    }

    pub fn cure(cure_fraction: T, latency: Latency<T>) -> Self {
        Self {
            cure_fraction: Some(cure_fraction),
            latency,
        }
    }

    pub fn spec(&self) -> FamilySpec {
        FamilySpec::new(self.latency.family(), self.cure_fraction.is_some())
    }

    /// Checks that the parameters belong to `spec` and lie in its domain.
    pub fn validate(&self, spec: &FamilySpec) -> Result<()> {
        if self.spec() != *spec {
            return Err(Error::Domain(format!(
                "parameters describe `{}`, expected `{spec}`",
                self.spec()
            )));
        }
        if let Some(c) = self.cure_fraction {
            if !(c > T::zero() && c < T::one()) {
                return Err(Error::Domain(format!(
                    "cure fraction must lie in (0, 1), got {c}"
                )));
            }
        }
        self.latency.validate()
    }

    /// Values in `FamilySpec::parameter_names` order.
    pub fn values(&self) -> Vec<T> {
        self.cure_fraction
            .into_iter()
            .chain(self.latency.values())
            .collect()
    }

    pub fn to_unconstrained(&self) -> Vec<T> {
        self.values()
            .into_iter()
            .zip(self.spec().transforms())
            .map(|(v, tr)| tr.forward(v))
            .collect()
    }

    pub fn from_unconstrained(spec: &FamilySpec, x: &[T]) -> Result<Self> {
        let transforms = spec.transforms();
        if x.len() != transforms.len() {
            return Err(Error::Domain(format!(
                "`{spec}` has {} parameters, got {}",
                transforms.len(),
                x.len()
            )));
        }
        let values: Vec<T> = x
            .iter()
            .zip(&transforms)
            .map(|(&y, tr)| tr.inverse(y))
            .collect();
        let (cure_fraction, rest) = if spec.cure {
            (Some(values[0]), &values[1..])
        } else {
            (None, &values[..])
        };
        Ok(Self {
            cure_fraction,
            latency: Latency::from_values(spec.family, rest)?,
        })
    }
}

/// `S₀(t)` for the latency component.
pub fn latency_survival<T: Real>(spec: &FamilySpec, params: &Params<T>, t: T) -> Result<T> {
    params.validate(spec)?;
    check_time(t)?;
    Ok(params.latency.survival(t))
}

/// Population survival `S(t) = c + (1 - c)·S₀(t)` for cure specs, `S₀(t)`
/// otherwise, where `c` is the cure fraction.
pub fn population_survival<T: Real>(spec: &FamilySpec, params: &Params<T>, t: T) -> Result<T> {
    params.validate(spec)?;
    check_time(t)?;
    let s0 = params.latency.survival(t);
    Ok(match params.cure_fraction {
        Some(c) => c + (T::one() - c) * s0,
        None => s0,
    })
}

fn check_time<T: Real>(t: T) -> Result<()> {
    if t >= T::zero() {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be nonnegative, got {t}")))
    }
}
