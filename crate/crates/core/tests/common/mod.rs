//! Reference computations written independently of the library: adaptive
//! Gauss-Kronrod quadrature, a Stirling-series log-gamma, direct
//! per-record likelihood sums, and a brute-force product-limit estimator.
#![allow(dead_code)]

use cureassess::models::{Family, FamilySpec, Latency, Params};
use cureassess::simulate::{Censoring, Dropout, SimulationConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (v, err) = gk15(f, a, b);
    // below this the Kronrod-Gauss gap is rounding noise
    let floor = 50.0 * f64::EPSILON * v.abs();
    if err <= tol.max(floor) || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1)
}

/// `∫ₐᵇ f`, adaptive to roughly `1e-15` relative.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    integrate_to(f, a, b, 1e-15)
}

pub fn integrate_to(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let rough = gk15(&f, a, b).0.abs();
    adapt(&f, a, b, rel_tol * rough.max(1e-300), 30)
}

/// Stirling series after shifting the argument above 15.
pub fn ln_gamma(z: f64) -> f64 {
    let mut shift = 0.0;
    let mut w = z;
    while w < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let w2 = w * w;
    let series = 1.0 / (12.0 * w) - 1.0 / (360.0 * w * w2) + 1.0 / (1260.0 * w * w2 * w2)
        - 1.0 / (1680.0 * w * w2 * w2 * w2)
        + 1.0 / (1188.0 * w * w2 * w2 * w2 * w2);
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn normal_sf(z: f64) -> f64 {
    if z < 0.0 {
        0.5 + integrate(normal_pdf, z, 0.0)
    } else {
        integrate(normal_pdf, z, z + 40.0)
    }
}

fn gamma_pdf(shape: f64, rate: f64, t: f64) -> f64 {
    (shape * rate.ln() + (shape - 1.0) * t.ln() - rate * t - ln_gamma(shape)).exp()
}

pub fn gamma_sf(shape: f64, rate: f64, t: f64) -> f64 {
    // in units of 1/rate
    let x = rate * t;
    let upper = x + 80.0 + 4.0 * shape;
    integrate(|y| gamma_pdf(shape, 1.0, y), x, upper)
}

/// `(S₀(t), f₀(t))` from textbook formulas.
pub fn latency_sf_pdf(lat: &Latency<f64>, t: f64) -> (f64, f64) {
    match *lat {
        Latency::Exponential { rate } => ((-rate * t).exp(), rate * (-rate * t).exp()),
        Latency::Weibull { shape, scale } => {
            let s = (-(t / scale).powf(shape)).exp();
            (s, shape / scale * (t / scale).powf(shape - 1.0) * s)
        }
        Latency::Gamma { shape, rate } => (gamma_sf(shape, rate, t), gamma_pdf(shape, rate, t)),
        Latency::LogLogistic { shape, scale } => {
            let u = (t / scale).powf(shape);
            let f = shape / scale * (t / scale).powf(shape - 1.0) / ((1.0 + u) * (1.0 + u));
            (1.0 / (1.0 + u), f)
        }
        Latency::LogNormal { meanlog, sdlog } => {
            let z = (t.ln() - meanlog) / sdlog;
            (normal_sf(z), normal_pdf(z) / (sdlog * t))
        }
    }
}

/// Direct `Σ δ ln f + (1−δ) ln S` without log-space tricks.
pub fn naive_log_likelihood(params: &Params<f64>, data: &[(f64, bool)]) -> f64 {
    let c = params.cure_fraction.unwrap_or(0.0);
    data.iter()
        .map(|&(t, event)| {
            let (s0, f0) = latency_sf_pdf(&params.latency, t);
            if event {
                ((1.0 - c) * f0).ln()
            } else {
                (c + (1.0 - c) * s0).ln()
            }
        })
        .sum()
}

/// Product-limit value at `t`, recomputed from scratch.
pub fn brute_force_km(data: &[(f64, bool)], t: f64) -> f64 {
    let mut event_times: Vec<f64> = data.iter().filter(|r| r.1).map(|r| r.0).collect();
    event_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    event_times.dedup();
    let mut s = 1.0;
    for u in event_times.into_iter().filter(|&u| u <= t) {
        let at_risk = data.iter().filter(|r| r.0 >= u).count();
        let deaths = data.iter().filter(|r| r.0 == u && r.1).count();
        s *= 1.0 - deaths as f64 / at_risk as f64;
    }
    s
}

pub fn random_latency(rng: &mut ChaCha8Rng, family: Family) -> Latency<f64> {
    match family {
        Family::Exponential => Latency::Exponential {
            rate: rng.random_range(0.1..2.0),
        },
        Family::Weibull => Latency::Weibull {
            shape: rng.random_range(0.5..2.5),
            scale: rng.random_range(0.8..3.0),
        },
        Family::Gamma => Latency::Gamma {
            shape: rng.random_range(0.5..3.0),
            rate: rng.random_range(0.3..2.0),
        },
        Family::LogLogistic => Latency::LogLogistic {
            shape: rng.random_range(0.5..3.0),
            scale: rng.random_range(0.5..3.0),
        },
        Family::LogNormal => Latency::LogNormal {
            meanlog: rng.random_range(-0.5..1.5),
            sdlog: rng.random_range(0.4..1.5),
        },
    }
}

pub fn random_params(rng: &mut ChaCha8Rng) -> (FamilySpec, Params<f64>) {
    let family = Family::ALL[rng.random_range(0..Family::ALL.len())];
    let cure = rng.random_bool(0.5);
    let latency = random_latency(rng, family);
    let params = if cure {
        Params::cure(rng.random_range(0.05..0.9), latency)
    } else {
        Params::non_cure(latency)
    };
    (FamilySpec::new(family, cure), params)
}

/// Up to `max_n` records; half the samples use a coarse grid to force ties.
pub fn random_records(rng: &mut ChaCha8Rng, max_n: usize) -> Vec<(f64, bool)> {
    let n = rng.random_range(1..=max_n);
    let coarse = rng.random_bool(0.5);
    (0..n)
        .map(|_| {
            let t = if coarse {
                rng.random_range(1..=8) as f64 * 0.5
            } else {
                rng.random_range(0.05..4.0)
            };
            (t, rng.random_bool(0.6))
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The recovery setting: 40% cured, Weibull(0.8, 0.8) latency, study end
/// at 7.3 with uniform dropout over (0, 25).
pub fn recovery_config(seed: u64) -> SimulationConfig<f64> {
    SimulationConfig {
        n: 1000,
        cure_fraction: 0.40,
        latency: Latency::Weibull {
            shape: 0.8,
            scale: 0.8,
        },
        censoring: Censoring::Composite {
            time: 7.3,
            dropout: Dropout::Uniform { max: 25.0 },
        },
        seed,
        time_unit: "years".into(),
    }
}

/// Maps `f` over `items` on all available cores, keeping order.
pub fn par_map<I: Sync, O: Send>(items: &[I], f: impl Fn(&I) -> O + Sync) -> Vec<O> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = items.len().div_ceil(threads).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| s.spawn(|| c.iter().map(&f).collect::<Vec<O>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    })
}
