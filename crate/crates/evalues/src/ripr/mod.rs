//! Approximations of the reverse information projection of `P_mu` onto the
//! convex hull of the i.i.d. null, with worst-case expectation certificates.
//!
//! A mixture `W` of null points enters every computation through
//! `r_W(z) = sum_w w exp(lambda(mu_w) z - k A(mu_w))`, so KL divergences and
//! null expectations are one-dimensional integrals over the law of `Z`.

mod brute;
mod li;
pub mod mixture;

pub use brute::{brute_force_two_component, BruteForceConfig};
pub use li::{li_approximate, LiConfig, LiOutput, TraceRow};
pub use mixture::{Certificate, Component, Method, MixtureNull};

use crate::error::{Error, Result};
use crate::expfam::{Alternative, FamilySpec};
use crate::marginal::Marginal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Equally spaced grid `lo, ..., hi` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Grid {
    pub fn new(count: usize, lo: f64, hi: f64) -> Self {
        Grid { count, lo, hi }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }

    pub fn step(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.hi - self.lo) / (self.count - 1) as f64
        }
    }

    pub fn validate(&self, spec: &FamilySpec, what: &str) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidParameter(format!("{what}: grid must be nonempty")));
        }
        if !(self.lo <= self.hi) {
            return Err(Error::InvalidParameter(format!(
                "{what}: grid lower end {} exceeds upper end {}",
                self.lo, self.hi
            )));
        }
        spec.check_mean(self.lo)?;
        spec.check_mean(self.hi)?;
        Ok(())
    }
}

/// Default component window: a neighbourhood of the alternative's means.
pub fn default_component_grid(spec: &FamilySpec, alt: &Alternative, count: usize) -> Grid {
    let (lo, hi) = minmax(alt.mu());
    let (a, b) = match spec {
        FamilySpec::Bernoulli => (0.5 * lo, 1.0 - 0.5 * (1.0 - hi)),
        FamilySpec::GaussianFreeMean { variance } => {
            let w = (hi - lo).max(variance.sqrt());
            (lo - w, hi + w)
        }
        FamilySpec::BetaFixedAlpha { .. } => (1.6 * lo, 0.4 * hi),
        _ => (0.4 * lo, 1.6 * hi),
    };
    Grid::new(count, a, b)
}

/// Default certification window for the worst-case `mu0`.
pub fn default_mu0_grid(spec: &FamilySpec, alt: &Alternative, count: usize) -> Grid {
    let (lo, hi) = minmax(alt.mu());
    let (a, b) = match spec {
        FamilySpec::Bernoulli => (1e-3f64.min(0.5 * lo), 1.0 - 1e-3f64.min(0.5 * (1.0 - hi))),
        FamilySpec::GaussianFreeMean { variance } => {
            let w = 5.0 * (hi - lo).max(variance.sqrt());
            (lo - w, hi + w)
        }
        FamilySpec::BetaFixedAlpha { .. } => (6.0 * lo, hi / 25.0),
        _ => (lo / 25.0, 6.0 * hi),
    };
    Grid::new(count, a, b)
}

fn minmax(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Supremum and arg-max of `E_<mu0>[S_W]` over a grid; `+inf` entries mark divergence.
pub(crate) fn sup_over_grid(m: &Marginal, terms: &[(f64, f64, f64)], mu0s: &[f64]) -> (f64, f64) {
    let vals: Vec<f64> = mu0s.par_iter().map(|&mu0| m.expect_mixture(terms, mu0)).collect();
    let mut best = (f64::NEG_INFINITY, mu0s[0]);
    for (&v, &mu0) in vals.iter().zip(mu0s) {
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v > best.0 {
            best = (v, mu0);
        }
    }
    best
}

/// Worst case and arg-max of the null expectation of `p_mu / p_W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub sup_expectation: f64,
    pub argmax_mu0: f64,
}

pub fn worst_case(spec: &FamilySpec, alt: &Alternative, mixture: &MixtureNull, mu0_grid: &Grid) -> Result<WorstCase> {
    mu0_grid.validate(spec, "mu0 grid")?;
    let m = Marginal::new(spec, alt)?;
    let (sup, arg) = sup_over_grid(&m, &mixture.terms(spec, alt.k()), &mu0_grid.points());
    if !sup.is_finite() {
        return Err(Error::Quadrature(format!(
            "null expectation does not converge at mu0 = {arg}"
        )));
    }
    Ok(WorstCase {
        sup_expectation: sup,
        argmax_mu0: arg,
    })
}

/// `max_{mu0 in grid} E_<mu0>[p_mu / p_W]`.
pub fn worst_case_expectation(
    spec: &FamilySpec,
    alt: &Alternative,
    mixture: &MixtureNull,
    mu0_grid: &Grid,
) -> Result<f64> {
    Ok(worst_case(spec, alt, mixture, mu0_grid)?.sup_expectation)
}

/// Attaches a certificate computed on `mu0_grid`.
pub fn certify(
    spec: &FamilySpec,
    alt: &Alternative,
    mixture: &MixtureNull,
    mu0_grid: &Grid,
    method: Method,
) -> Result<MixtureNull> {
    let wc = worst_case(spec, alt, mixture, mu0_grid)?;
    let mut out = mixture.clone();
    out.certificate = Some(Certificate {
        sup_expectation: wc.sup_expectation,
        mu0_grid_size: mu0_grid.count,
        method,
        argmax_mu0: wc.argmax_mu0,
        mu0_lo: mu0_grid.lo,
        mu0_hi: mu0_grid.hi,
    });
    Ok(out)
}

/// `D(P_mu || P_W)`.
pub fn kl_to_mixture(spec: &FamilySpec, alt: &Alternative, mixture: &MixtureNull) -> Result<f64> {
    for c in &mixture.components {
        spec.check_mean(c.mu0)?;
    }
    Marginal::new(spec, alt)?.kl_to_mixture(&mixture.terms(spec, alt.k()))
}
