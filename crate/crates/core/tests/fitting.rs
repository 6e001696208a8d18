mod common;

use cureassess::diagnostics::deviance_cure_test;
use cureassess::models::{
    initial_params, log_likelihood, log_likelihood_gradient, Family, FamilySpec, FitOptions,
    Latency, Params,
};
use cureassess::receus::select_model_by_aic;
use cureassess::{
    fit_model, receus_assess, restrict_followup, simulate_mixture, validate_sample, Censoring,
    Config, Dropout, SimulationConfig,
};
use rand::Rng;

fn sample(seed: u64, n: usize) -> cureassess::Sample {
    let mut cfg = common::recovery_config(seed);
    cfg.n = n;
    simulate_mixture(&cfg).unwrap().sample
}

fn all_specs() -> Vec<FamilySpec> {
    Family::ALL
        .iter()
        .flat_map(|&f| [FamilySpec::new(f, false), FamilySpec::new(f, true)])
        .collect()
}

#[test]
fn exponential_mle_is_analytic() {
    let data: Vec<(f64, bool)> = (1..=40).map(|i| (0.1 * i as f64 + 0.013 * (i * i % 7) as f64, true)).collect();
    let total: f64 = data.iter().map(|d| d.0).sum();
    let s = validate_sample(data, "").unwrap();
    let fit = fit_model(&s, &FamilySpec::new(Family::Exponential, false), &FitOptions::default()).unwrap();
    let Latency::Exponential { rate } = fit.params.latency else {
        panic!("wrong family")
    };
    assert!(fit.converged);
    assert!((rate - 40.0 / total).abs() < 1e-8, "{rate} vs {}", 40.0 / total);
}

#[test]
fn fits_improve_on_initializer_and_are_local_maxima() {
    let mut r = common::rng(99);
    for seed in 0..3 {
        let s = sample(seed, 300);
        for spec in all_specs() {
            let fit = fit_model(&s, &spec, &FitOptions::default()).unwrap();
            let start = initial_params(&s, &spec).unwrap();
            assert!(fit.log_likelihood >= log_likelihood(&spec, &start, &s).unwrap());
            let x = fit.params.to_unconstrained();
            for _ in 0..100 {
                let y: Vec<f64> = x.iter().map(|&v| v + r.random_range(-0.01..0.01)).collect();
                let p = Params::from_unconstrained(&spec, &y).unwrap();
                let ll = log_likelihood(&spec, &p, &s).unwrap();
                assert!(fit.log_likelihood >= ll, "{spec}: perturbed {ll} > {}", fit.log_likelihood);
            }
        }
    }
}

#[test]
fn gradient_vanishes_at_optimum() {
    let mut worst = 0.0f64;
    for seed in 0..6 {
        let s = sample(seed, if seed % 2 == 0 { 1000 } else { 261 });
        for spec in all_specs() {
            let fit = fit_model(&s, &spec, &FitOptions::default()).unwrap();
            assert!(fit.converged, "{spec} seed {seed}");
            let g = log_likelihood_gradient(&s, &fit.params, 1e-5).unwrap();
            worst = g.iter().fold(worst, |m, v| m.max(v.abs()));
        }
    }
    assert!(worst < 1e-3, "max gradient component {worst}");
}

#[test]
fn fits_are_scale_equivariant() {
    let s = sample(3, 500);
    for &c in &[365.25, 0.1, 12.0] {
        let scaled = s.map_times(|t| t * c).unwrap();
        let mut aic_a = Vec::new();
        let mut aic_b = Vec::new();
        for spec in all_specs() {
            let a = fit_model(&s, &spec, &FitOptions::default()).unwrap();
            let b = fit_model(&scaled, &spec, &FitOptions::default()).unwrap();
            let shift = -(s.n_events() as f64) * c.ln();
            assert!(
                (b.log_likelihood - (a.log_likelihood + shift)).abs() < 1e-6,
                "{spec} c={c}: {} vs {}",
                b.log_likelihood,
                a.log_likelihood + shift
            );
            // expected transformed parameters after rescaling
            let mut expect = a.params.to_unconstrained();
            let off = usize::from(spec.cure);
            match spec.family {
                Family::Exponential => expect[off] -= c.ln(),
                Family::Weibull | Family::LogLogistic => expect[off + 1] += c.ln(),
                Family::Gamma => expect[off + 1] -= c.ln(),
                Family::LogNormal => expect[off] += c.ln(),
            }
            for (e, g) in expect.iter().zip(b.params.to_unconstrained()) {
                assert!((e - g).abs() < 1e-4, "{spec} c={c}: {e} vs {g}");
            }
            aic_a.push(a.aic);
            aic_b.push(b.aic);
        }
        for i in 0..aic_a.len() {
            for j in 0..i {
                let d = (aic_a[i] - aic_a[j]) - (aic_b[i] - aic_b[j]);
                assert!(d.abs() < 1e-3);
            }
        }
    }
}

#[test]
fn deviance_detects_a_cured_fraction() {
    let mut hits = 0;
    let reps = 200;
    for seed in 0..reps {
        let cfg = SimulationConfig {
            n: 200,
            censoring: Censoring::Administrative { time: 30.0 },
            ..common::recovery_config(5000 + seed)
        };
        let s = simulate_mixture(&cfg).unwrap().sample;
        let e = deviance_cure_test(&s, Family::Weibull, &FitOptions::default());
        let d = e.deviance.expect("both fits converge");
        assert!(d >= 0.0);
        if e.deviance_p_value.unwrap() < 0.05 {
            hits += 1;
        }
    }
    println!("deviance alternative: p < 0.05 in {hits}/{reps}");
    assert!(hits as f64 >= 0.9 * reps as f64);
}

#[test]
fn exponential_null_prefers_non_cure() {
    let reps = 100;
    let mut non_cure = 0;
    for seed in 0..reps {
        let cfg = SimulationConfig {
            n: 500,
            cure_fraction: 0.0,
            latency: Latency::Exponential { rate: 1.0 },
            censoring: Censoring::Exponential { rate: 2.0 },
            seed: 7000 + seed,
            time_unit: String::new(),
        };
        let s = simulate_mixture(&cfg).unwrap().sample;
        let sel = select_model_by_aic(&s, &Family::ALL, &FitOptions::default()).unwrap();
        assert_eq!(sel.table.len(), 10);
        if !sel.selected().spec.cure {
            non_cure += 1;
        }
    }
    println!("exponential null: non-cure selected in {non_cure}/{reps}");
    assert!(non_cure as f64 >= 0.8 * reps as f64);
}

#[test]
fn verdict_is_scale_invariant() {
    let s = sample(21, 1000);
    let base = receus_assess(&s, &Config::default()).unwrap();
    let mut r = common::rng(5);
    for _ in 0..20 {
        let c: f64 = 10f64.powf(r.random_range(-3.0..3.0));
        let scaled = s.map_times(|t| t * c).unwrap();
        let cfg = Config {
            tau: Some(s.max_time() * c),
            ..Config::default()
        };
        let a = receus_assess(&scaled, &cfg).unwrap();
        assert_eq!(a.verdict, base.verdict, "c = {c}");
        assert_eq!(a.followup_test.alpha_n, base.followup_test.alpha_n);
        assert!((a.r_hat - base.r_hat).abs() < 1e-4);
    }
}

#[test]
fn truncation_to_a_tenth_of_support_is_not_appropriate() {
    let latency = Latency::Weibull {
        shape: 0.8,
        scale: 0.8,
    };
    // 99.9th percentile standing in for the end of the latency support
    let cutoff = 0.1 * latency.quantile(0.999);
    let reps = 100;
    let mut not_ok = 0;
    for seed in 0..reps {
        let cfg = SimulationConfig {
            censoring: Censoring::Composite {
                time: 30.0,
                dropout: Dropout::Uniform { max: 100.0 },
            },
            ..common::recovery_config(9000 + seed)
        };
        let s = restrict_followup(&simulate_mixture(&cfg).unwrap().sample, cutoff).unwrap();
        let a = receus_assess(&s, &Config::default()).unwrap();
        if !a.verdict.is_appropriate() {
            not_ok += 1;
        }
    }
    println!("truncated at {cutoff:.4}: not appropriate in {not_ok}/{reps}");
    assert!(not_ok as f64 >= 0.8 * reps as f64);
}
