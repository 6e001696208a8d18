//! Parametric latency families, censored-data likelihoods, and maximum
//! likelihood fitting for cure and non-cure models.

mod family;
mod fit;
mod likelihood;
mod optim;
mod wald;

pub use family::{
    latency_survival, population_survival, Family, FamilySpec, Latency, Params, Transform,
};
pub use fit::{
    aic, aic_value, fit_model, initial_params, log_likelihood_gradient, FitOptions, ModelFit,
};
pub use likelihood::log_likelihood;
pub use optim::{Minimum, NelderMead};
pub use wald::{wald_intervals, WaldInterval};
