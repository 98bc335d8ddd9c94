//! Independent oracles shared by the integration tests.
//!
//! Densities come from `statrs` (or are written out by hand for the lattice
//! families), and integrals use a double-exponential rule built here, so none
//! of the library's own quadrature or closed forms are involved.
#![allow(dead_code)]

use ksample_evalues::{Alternative, FamilySpec};
use rand::Rng;
use statrs::distribution::{Beta, Continuous, Discrete, Exp, Gamma, Normal, Poisson};

/// `log p_mu(x)` relative to counting or Lebesgue measure.
pub fn ln_pdf(spec: &FamilySpec, mu: f64, x: f64) -> f64 {
    match *spec {
        FamilySpec::Bernoulli => {
            if x == 1.0 {
                mu.ln()
            } else if x == 0.0 {
                (1.0 - mu).ln()
            } else {
                f64::NEG_INFINITY
            }
        }
        FamilySpec::GaussianFreeMean { variance } => Normal::new(mu, variance.sqrt()).unwrap().ln_pdf(x),
        FamilySpec::GaussianFreeVariance { .. } => {
            if x <= 0.0 {
                return f64::NEG_INFINITY;
            }
            Gamma::new(0.5, 1.0 / (2.0 * mu)).unwrap().ln_pdf(x)
        }
        FamilySpec::Poisson => {
            if x < 0.0 {
                return f64::NEG_INFINITY;
            }
            Poisson::new(mu).unwrap().ln_pmf(x as u64)
        }
        FamilySpec::Exponential => {
            if x < 0.0 {
                return f64::NEG_INFINITY;
            }
            Exp::new(1.0 / mu).unwrap().ln_pdf(x)
        }
        FamilySpec::Geometric => {
            if x < 0.0 {
                return f64::NEG_INFINITY;
            }
            let p = 1.0 / (1.0 + mu);
            p.ln() + x * (1.0 - p).ln()
        }
        FamilySpec::BetaFixedAlpha { alpha } => {
            if x >= 0.0 {
                return f64::NEG_INFINITY;
            }
            // X = log V with V = 1 - U ~ Beta(beta, alpha).
            let b = spec.lambda(mu);
            Beta::new(b, alpha).unwrap().ln_pdf(x.exp()) + x
        }
    }
}

/// Nodes and weights of a double-exponential rule for `f(t)` on `t in R`.
fn de_nodes(h: f64, t_max: f64) -> impl Iterator<Item = f64> {
    let n = (t_max / h).ceil() as i64;
    (-n..=n).map(move |i| i as f64 * h)
}

/// One-dimensional rule for integrating against the base measure of the
/// statistic, centred at `centre` with length scale `scale`.
pub fn rule(spec: &FamilySpec, centre: f64, scale: f64) -> Vec<(f64, f64)> {
    use std::f64::consts::FRAC_PI_2;
    let h = 1.0 / 24.0;
    match spec {
        FamilySpec::Bernoulli => vec![(0.0, 1.0), (1.0, 1.0)],
        FamilySpec::Poisson | FamilySpec::Geometric => {
            let n = (60.0 * (1.0 + centre.abs()) + 200.0) as usize;
            (0..=n).map(|x| (x as f64, 1.0)).collect()
        }
        FamilySpec::GaussianFreeMean { .. } => de_nodes(h, 3.2)
            .map(|t| {
                let u = FRAC_PI_2 * t.sinh();
                (centre + scale * u.sinh(), scale * h * FRAC_PI_2 * t.cosh() * u.cosh())
            })
            .collect(),
        FamilySpec::GaussianFreeVariance { .. } | FamilySpec::Exponential => de_nodes(h, 3.6)
            .map(|t| {
                let x = scale * (FRAC_PI_2 * t.sinh()).exp();
                (x, h * FRAC_PI_2 * t.cosh() * x)
            })
            .filter(|&(x, _)| x > 0.0 && x.is_finite())
            .collect(),
        FamilySpec::BetaFixedAlpha { .. } => de_nodes(h, 3.6)
            .map(|t| {
                let x = scale * (FRAC_PI_2 * t.sinh()).exp();
                (-x, h * FRAC_PI_2 * t.cosh() * x)
            })
            .filter(|&(x, _)| x < 0.0 && x.is_finite())
            .collect(),
    }
}

fn default_scale(spec: &FamilySpec, mu0: f64) -> f64 {
    match spec {
        FamilySpec::GaussianFreeMean { variance } => variance.sqrt(),
        _ => mu0.abs().max(1e-3),
    }
}

/// `E_<mu0>[exp(log_s(x1, x2))]` for `X1, X2` i.i.d. `P_mu0`.
pub fn null_expectation_2d(spec: &FamilySpec, mu0: f64, log_s: impl Fn(f64, f64) -> f64) -> f64 {
    let r = rule(spec, mu0, default_scale(spec, mu0));
    let lp: Vec<f64> = r.iter().map(|&(x, _)| ln_pdf(spec, mu0, x)).collect();
    let mut total = 0.0;
    for (a, &(x1, w1)) in r.iter().enumerate() {
        if lp[a] == f64::NEG_INFINITY {
            continue;
        }
        for (b, &(x2, w2)) in r.iter().enumerate() {
            if lp[b] == f64::NEG_INFINITY {
                continue;
            }
            let v = lp[a] + lp[b] + log_s(x1, x2);
            if v > -745.0 {
                total += w1 * w2 * v.exp();
            }
        }
    }
    total
}

/// Log density of `X1 + X2` with `X_i ~ P_<m_i>`, by direct convolution.
pub fn ln_sum_density2(spec: &FamilySpec, m1: f64, m2: f64, z: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let terms: Vec<(f64, f64)> = match spec {
        FamilySpec::Bernoulli | FamilySpec::Poisson | FamilySpec::Geometric => {
            (0..=(z as i64)).map(|x| (x as f64, 1.0)).collect()
        }
        FamilySpec::GaussianFreeMean { .. } => rule(spec, 0.5 * (z + m1 - m2), default_scale(spec, m1)),
        _ => {
            // x in (0, z) or (z, 0): tanh-sinh on the finite interval.
            let h = 1.0 / 64.0;
            de_nodes(h, 3.5)
                .filter_map(|t| {
                    let u = FRAC_PI_2 * t.sinh();
                    let s = u.tanh();
                    let w = h * FRAC_PI_2 * t.cosh() / (u.cosh() * u.cosh());
                    let x = 0.5 * z * (1.0 + s);
                    let inside = if z > 0.0 { x > 0.0 && x < z } else { x < 0.0 && x > z };
                    inside.then_some((x, 0.5 * z.abs() * w))
                })
                .collect()
        }
    };
    let mut acc: f64 = 0.0;
    let mut logs = Vec::with_capacity(terms.len());
    for (x, w) in terms {
        let v = ln_pdf(spec, m1, x) + ln_pdf(spec, m2, z - x);
        if v > f64::NEG_INFINITY && w > 0.0 {
            logs.push(v + w.ln());
        }
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    for v in &logs {
        acc += (v - top).exp();
    }
    top + acc.ln()
}

pub fn oracle_log_pseudo(spec: &FamilySpec, mu: &[f64], x: &[f64]) -> f64 {
    let star = mu.iter().sum::<f64>() / mu.len() as f64;
    mu.iter().zip(x).map(|(&m, &xi)| ln_pdf(spec, m, xi) - ln_pdf(spec, star, xi)).sum()
}

pub fn oracle_log_iid(spec: &FamilySpec, mu: &[f64], x: &[f64]) -> f64 {
    let k = mu.len() as f64;
    let mut out = 0.0;
    for (&m, &xi) in mu.iter().zip(x) {
        out += ln_pdf(spec, m, xi);
    }
    for &xj in x {
        let avg: f64 = mu.iter().map(|&m| ln_pdf(spec, m, xj).exp()).sum::<f64>() / k;
        out -= avg.ln();
    }
    out
}

/// Conditional likelihood ratio given `Z = x1 + x2` for `k = 2`, with the
/// null represented by `mu0`.
pub fn oracle_log_cond(spec: &FamilySpec, mu: &[f64], x: &[f64], mu0: f64) -> f64 {
    let z = x[0] + x[1];
    let alt = ln_pdf(spec, mu[0], x[0]) + ln_pdf(spec, mu[1], x[1]) - ln_sum_density2(spec, mu[0], mu[1], z);
    let null = ln_pdf(spec, mu0, x[0]) + ln_pdf(spec, mu0, x[1]) - ln_sum_density2(spec, mu0, mu0, z);
    alt - null
}

/// Families with their fixed parameters as exercised by the tests.
pub fn families() -> Vec<FamilySpec> {
    vec![
        FamilySpec::Bernoulli,
        FamilySpec::GaussianFreeMean { variance: 1.0 },
        FamilySpec::GaussianFreeVariance { mean: 0.0 },
        FamilySpec::Poisson,
        FamilySpec::Exponential,
        FamilySpec::Geometric,
        FamilySpec::BetaFixedAlpha { alpha: 1.0 },
    ]
}

/// Window of means from which random alternatives are drawn.
pub fn mean_window(spec: &FamilySpec) -> (f64, f64) {
    match spec {
        FamilySpec::Bernoulli => (0.1, 0.9),
        FamilySpec::GaussianFreeMean { .. } => (-2.0, 2.0),
        FamilySpec::GaussianFreeVariance { .. } => (0.25, 4.0),
        FamilySpec::Poisson => (0.5, 8.0),
        FamilySpec::Exponential => (0.2, 3.0),
        FamilySpec::Geometric => (0.2, 5.0),
        FamilySpec::BetaFixedAlpha { .. } => (-4.0, -0.2),
    }
}

pub fn random_alternative<R: Rng>(spec: &FamilySpec, k: usize, rng: &mut R) -> Alternative {
    let (lo, hi) = mean_window(spec);
    let mu = (0..k).map(|_| rng.random_range(lo..hi)).collect();
    Alternative::new(spec, mu).unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}
