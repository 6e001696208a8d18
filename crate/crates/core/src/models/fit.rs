use serde::{Deserialize, Serialize};

use super::family::{Family, FamilySpec, Latency, Params};
use super::likelihood::{check_support, log_likelihood_unchecked};
use super::optim::NelderMead;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::survival::{kaplan_meier, km_survival_at, Record, SurvivalSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions<T> {
    /// Objective tolerance on the negative log-likelihood.
    pub ftol: T,
    pub max_iterations: usize,
    pub restarts: usize,
    /// Initial simplex edge on the unconstrained scale.
    pub initial_step: T,
    /// Central-difference step for the Hessian on the unconstrained scale.
    pub hessian_step: T,
    pub compute_hessian: bool,
    /// Safeguarded Newton steps after the simplex search; each is kept
    /// only if it raises the log-likelihood.
    pub polish_steps: usize,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            ftol: T::lit(1e-9),
            max_iterations: 5000,
            restarts: 3,
            initial_step: T::lit(0.25),
            hessian_step: T::lit(1e-4),
            compute_hessian: true,
            polish_steps: 5,
        }
    }
}

/// Result of a maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit<T> {
    pub spec: FamilySpec,
    pub params: Params<T>,
    pub log_likelihood: T,
    pub aic: T,
    pub k: usize,
    pub n: usize,
    pub n_events: usize,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
    /// Standard errors on the unconstrained scale, in parameter-name order.
    pub standard_errors: Option<Vec<T>>,
    /// Inverse observed information on the unconstrained scale.
    pub covariance: Option<Vec<Vec<T>>>,
    /// Why the standard errors are missing, when they are.
    pub hessian_diagnostic: Option<String>,
}

impl<T: Real> ModelFit<T> {
    pub fn parameter_names(&self) -> Vec<&'static str> {
        self.spec.parameter_names()
    }
}

/// `2k - 2ℓ`.
pub fn aic_value<T: Real>(k: usize, log_likelihood: T) -> T {
    T::lit(2.0) * T::count(k) - T::lit(2.0) * log_likelihood
}

pub fn aic<T: Real>(fit: &ModelFit<T>) -> T {
    aic_value(fit.k, fit.log_likelihood)
}

/// Deterministic starting point: the cure fraction from the Kaplan-Meier
/// value at the largest observed time, the latency from moments of the
/// event times.
pub fn initial_params<T: Real>(sample: &SurvivalSample<T>, spec: &FamilySpec) -> Result<Params<T>> {
    let events: Vec<T> = sample.event_times().collect();
    if events.is_empty() {
        return Err(Error::NoEvents);
    }
    let n_ev = T::count(events.len());
    let mut mean = events.iter().copied().sum::<T>() / n_ev;
    if !(mean > T::zero()) {
        mean = if sample.max_time() > T::zero() {
            sample.max_time()
        } else {
            T::one()
        };
    }
    let latency = match spec.family {
        Family::Exponential => Latency::Exponential {
            rate: T::one() / mean,
        },
        Family::Weibull => Latency::Weibull {
            shape: T::one(),
            scale: mean,
        },
        Family::Gamma => Latency::Gamma {
            shape: T::one(),
            rate: T::one() / mean,
        },
        Family::LogLogistic => Latency::LogLogistic {
            shape: T::one(),
            scale: mean,
        },
        Family::LogNormal => {
            let logs: Vec<T> = events.iter().filter(|&&t| t > T::zero()).map(|t| t.ln()).collect();
            if logs.is_empty() {
                Latency::LogNormal {
                    meanlog: mean.ln(),
                    sdlog: T::one(),
                }
            } else {
                let m = T::count(logs.len());
                let mu = logs.iter().copied().sum::<T>() / m;
                let var = logs.iter().map(|&l| (l - mu) * (l - mu)).sum::<T>() / m;
                let sd = var.sqrt();
                Latency::LogNormal {
                    meanlog: mu,
                    sdlog: if sd > T::lit(1e-3) { sd } else { T::one() },
                }
            }
        }
    };
    let cure_fraction = if spec.cure {
        let curve = kaplan_meier(sample);
        let plateau = km_survival_at(&curve, sample.max_time());
        Some(plateau.max(T::lit(0.01)).min(T::lit(0.99)))
    } else {
        None
    };
    Ok(Params {
        cure_fraction,
        latency,
    })
}

/// Log-likelihood as a function of the unconstrained parameter vector;
/// `-∞` outside the parameter domain.
pub(crate) fn unconstrained_log_likelihood<T: Real>(
    spec: &FamilySpec,
    records: &[Record<T>],
    x: &[T],
) -> T {
    match Params::from_unconstrained(spec, x) {
        Ok(p) if p.validate(spec).is_ok() => {
            let ll = log_likelihood_unchecked(&p, records);
            if ll.is_nan() {
                T::neg_infinity()
            } else {
                ll
            }
        }
        _ => T::neg_infinity(),
    }
}

/// Maximum-likelihood fit of `spec` by Nelder-Mead on the unconstrained
/// scale (logit cure fraction, log positive parameters).
pub fn fit_model<T: Real>(
    sample: &SurvivalSample<T>,
    spec: &FamilySpec,
    options: &FitOptions<T>,
) -> Result<ModelFit<T>> {
    if sample.n_events() == 0 {
        return Err(Error::NoEvents);
    }
    if sample.len() < spec.k() + 1 {
        return Err(Error::Contract(format!(
            "`{spec}` needs at least {} records, got {}",
            spec.k() + 1,
            sample.len()
        )));
    }
    check_support(spec, sample)?;
    let start = initial_params(sample, spec)?;
    let records = sample.records();
    let x0 = start.to_unconstrained();
    let optimizer = NelderMead {
        ftol: options.ftol,
        max_iterations: options.max_iterations,
        restarts: options.restarts,
        initial_step: options.initial_step,
    };
    let minimum = optimizer.minimize(|x| -unconstrained_log_likelihood(spec, records, x), &x0);
    if !minimum.value.is_finite() {
        return Err(Error::Domain(format!(
            "`{spec}` log-likelihood is not finite at the initializer"
        )));
    }
    let objective = |x: &[T]| unconstrained_log_likelihood(spec, records, x);
    let (x_hat, log_likelihood) = newton_polish(
        objective,
        minimum.x.clone(),
        -minimum.value,
        options.hessian_step,
        options.polish_steps,
    );
    let params = Params::from_unconstrained(spec, &x_hat)?;

    let (standard_errors, covariance, hessian_diagnostic) = if options.compute_hessian {
        let h = hessian(objective, &x_hat, options.hessian_step);
        match invert_negative_definite(&h) {
            Ok(cov) => {
                let se = (0..cov.len()).map(|i| cov[i][i].sqrt()).collect();
                (Some(se), Some(cov), None)
            }
            Err(msg) => (None, None, Some(msg)),
        }
    } else {
        (None, None, Some("hessian not requested".to_string()))
    };

    let k = spec.k();
    Ok(ModelFit {
        spec: *spec,
        params,
        log_likelihood,
        aic: aic_value(k, log_likelihood),
        k,
        n: sample.len(),
        n_events: sample.n_events(),
        converged: minimum.converged,
        iterations: minimum.iterations,
        evaluations: minimum.evaluations,
        standard_errors,
        covariance,
        hessian_diagnostic,
    })
}

/// Central-difference gradient of the log-likelihood on the unconstrained
/// scale.
pub fn log_likelihood_gradient<T: Real>(
    sample: &SurvivalSample<T>,
    params: &Params<T>,
    step: T,
) -> Result<Vec<T>> {
    let spec = params.spec();
    params.validate(&spec)?;
    check_support(&spec, sample)?;
    let x = params.to_unconstrained();
    let records = sample.records();
    Ok(central_gradient(
        |x: &[T]| unconstrained_log_likelihood(&spec, records, x),
        &x,
        step,
    ))
}

fn central_gradient<T: Real>(f: impl Fn(&[T]) -> T, x: &[T], h: T) -> Vec<T> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (T::lit(2.0) * h)
        })
        .collect()
}

/// Newton steps on `f` (to be maximized) with finite-difference derivatives
/// and step halving. Stops at the first step that fails to improve `f`.
fn newton_polish<T: Real>(
    f: impl Fn(&[T]) -> T,
    mut x: Vec<T>,
    mut value: T,
    h: T,
    steps: usize,
) -> (Vec<T>, T) {
    for _ in 0..steps {
        let g = central_gradient(&f, &x, h * T::lit(0.1));
        if g.iter().any(|v| !v.is_finite()) {
            break;
        }
        let Ok(cov) = invert_negative_definite(&hessian(&f, &x, h)) else {
            break;
        };
        let delta: Vec<T> = cov
            .iter()
            .map(|row| row.iter().zip(&g).map(|(&c, &gi)| c * gi).sum())
            .collect();
        let mut scale = T::one();
        let mut improved = false;
        for _ in 0..20 {
            let trial: Vec<T> = x.iter().zip(&delta).map(|(&xi, &d)| xi + scale * d).collect();
            let v = f(&trial);
            if v > value {
                x = trial;
                value = v;
                improved = true;
                break;
            }
            scale = scale * T::lit(0.5);
        }
        if !improved {
            break;
        }
    }
    (x, value)
}

/// Central-difference Hessian.
pub(crate) fn hessian<T: Real>(f: impl Fn(&[T]) -> T, x: &[T], h: T) -> Vec<Vec<T>> {
    let dim = x.len();
    let f0 = f(x);
    let mut out = vec![vec![T::zero(); dim]; dim];
    let mut probe = x.to_vec();
    let two = T::lit(2.0);
    for i in 0..dim {
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        out[i][i] = (up - two * f0 + down) / (h * h);
        for j in 0..i {
            let mut eval = |di: T, dj: T| {
                probe[i] = x[i] + di;
                probe[j] = x[j] + dj;
                let v = f(&probe);
                probe[i] = x[i];
                probe[j] = x[j];
                v
            };
            let v = (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (T::lit(4.0) * h * h);
            out[i][j] = v;
            out[j][i] = v;
        }
    }
    out
}

/// Inverts `-H` via Cholesky, failing unless `H` is negative definite.
pub(crate) fn invert_negative_definite<T: Real>(h: &[Vec<T>]) -> Result<Vec<Vec<T>>, String> {
    let dim = h.len();
    if h.iter().flatten().any(|v| !v.is_finite()) {
        return Err("hessian has non-finite entries".to_string());
    }
    // lower-triangular L with L Lᵀ = -H
    let mut l = vec![vec![T::zero(); dim]; dim];
    for i in 0..dim {
        for j in 0..=i {
            let mut s = -h[i][j];
            for m in 0..j {
                s = s - l[i][m] * l[j][m];
            }
            if i == j {
                if !(s > T::zero()) {
                    return Err(format!(
                        "hessian is not negative definite (pivot {i} = {s})"
                    ));
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // L⁻¹ by forward substitution, then (-H)⁻¹ = L⁻ᵀ L⁻¹
    let mut inv_l = vec![vec![T::zero(); dim]; dim];
    for col in 0..dim {
        for i in col..dim {
            let mut s = if i == col { T::one() } else { T::zero() };
            for m in col..i {
                s = s - l[i][m] * inv_l[m][col];
            }
            inv_l[i][col] = s / l[i][i];
        }
    }
    let mut cov = vec![vec![T::zero(); dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            let mut s = T::zero();
            for m in i.max(j)..dim {
                s = s + inv_l[m][i] * inv_l[m][j];
            }
            cov[i][j] = s;
        }
    }
    if cov.iter().flatten().any(|v| !v.is_finite()) {
        return Err("covariance has non-finite entries".to_string());
    }
    Ok(cov)
}
