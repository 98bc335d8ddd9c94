//! Growth rates `E_mu[log S]` and their gaps.
//!
//! Under quadrature every rate is the pseudo rate `sum_i D(P_mui || P_mu0*)`
//! minus a nonnegative deficit: `k D(M || P_mu0*)` for the i.i.d. projection,
//! `D(P_{mu;Z} || P_{<mu0*>;Z})` for the conditional statistic. The mixture
//! statistic grows at `D(P_mu || P_W)`.

mod coeff;
mod heatmap;

pub use coeff::{
    coeff_cond_gap, coeff_cond_minus_iid, coeff_iid_gap, density_second_derivative, CoefficientKind,
    FourthOrderCoefficient,
};
pub use heatmap::{
    default_standard_range, heatmap, mean_from_standard, signed_fourth_root, Heatmap, HeatmapCell, HeatmapConfig,
    SlicePoint,
};

use crate::error::{Error, Result};
use crate::evariables::{EValueKind, Statistic};
use crate::expfam::{Alternative, FamilySpec};
use crate::marginal::{self, Marginal};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum GrowthMethod {
    Quadrature,
    MonteCarlo { n: usize, seed: u64 },
}

impl GrowthMethod {
    /// Quadrature while the one-dimensional reductions are cheap, Monte
    /// Carlo with 10^6 blocks beyond.
    pub fn default_for(k: usize, seed: u64) -> Self {
        if k <= 3 {
            GrowthMethod::Quadrature
        } else {
            GrowthMethod::MonteCarlo { n: 1_000_000, seed }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthEntry {
    pub kind: String,
    /// Nats per block.
    pub rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
}

/// `rate(minuend) - rate(subtrahend)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEntry {
    pub minuend: String,
    pub subtrahend: String,
    pub gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub alternative: Alternative,
    pub method: GrowthMethod,
    pub rates: Vec<GrowthEntry>,
    pub gaps: Vec<GapEntry>,
}

impl GrowthReport {
    pub fn rate(&self, kind: &str) -> Option<f64> {
        self.rates.iter().find(|r| r.kind == kind).map(|r| r.rate)
    }

    pub fn gap(&self, minuend: &str, subtrahend: &str) -> Option<f64> {
        self.gaps.iter().find_map(|g| {
            if g.minuend == minuend && g.subtrahend == subtrahend {
                Some(g.gap)
            } else if g.minuend == subtrahend && g.subtrahend == minuend {
                Some(-g.gap)
            } else {
                None
            }
        })
    }
}

/// `sum_i D(P_mui || P_mu0*)`.
pub fn pseudo_rate(spec: &FamilySpec, alt: &Alternative) -> f64 {
    alt.mu().iter().map(|&m| spec.kl_unchecked(m, alt.mu0_star())).sum()
}

/// Pseudo rate minus the rate of `kind`, by quadrature.
pub(crate) fn deficit(spec: &FamilySpec, alt: &Alternative, kind: &EValueKind) -> Result<f64> {
    if alt.is_null() && !matches!(kind, EValueKind::GroM { .. }) {
        return Ok(0.0);
    }
    match kind {
        EValueKind::Pseudo => Ok(0.0),
        EValueKind::GroIid => marginal::gap_iid(spec, alt),
        EValueKind::Cond => Marginal::new(spec, alt)?.gap_cond(),
        EValueKind::GroM { mixture } => {
            mixture.require_certificate()?;
            let kl = crate::ripr::kl_to_mixture(spec, alt, mixture)?;
            Ok(pseudo_rate(spec, alt) - kl)
        }
    }
}

fn quadrature_rate(spec: &FamilySpec, alt: &Alternative, kind: &EValueKind) -> Result<f64> {
    if let EValueKind::GroM { mixture } = kind {
        mixture.require_certificate()?;
        return crate::ripr::kl_to_mixture(spec, alt, mixture);
    }
    Ok(pseudo_rate(spec, alt) - deficit(spec, alt, kind)?)
}

const CHUNK: usize = 4096;

/// Log values of every statistic on `n` blocks drawn from `P_mu`, one row per
/// statistic. Chunk `c` uses stream `c` of the seeded generator, so results
/// do not depend on the thread count.
pub(crate) fn monte_carlo_logs(
    spec: &FamilySpec,
    alt: &Alternative,
    stats: &[Statistic],
    n: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            let mut out = vec![Vec::with_capacity(len); stats.len()];
            let mut x = vec![0.0; alt.k()];
            for _ in 0..len {
                for (xi, &m) in x.iter_mut().zip(alt.mu()) {
                    *xi = spec.draw(m, &mut rng);
                }
                for (row, s) in out.iter_mut().zip(stats) {
                    row.push(s.log_value(&x));
                }
            }
            out
        })
        .collect();
    let mut rows = vec![Vec::with_capacity(n); stats.len()];
    for part in parts {
        for (row, p) in rows.iter_mut().zip(part) {
            row.extend(p);
        }
    }
    rows
}

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = v.iter().map(|x| (x - mean).powi(2)).sum();
    (mean, (ss / (n - 1.0) / n).sqrt())
}

fn check_mc(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least 2 blocks".into()));
    }
    Ok(())
}

/// `E_mu[log S]` for one statistic.
pub fn growth_rate(spec: &FamilySpec, alt: &Alternative, kind: &EValueKind, method: GrowthMethod) -> Result<GrowthEntry> {
    let report = growth_report(spec, alt, std::slice::from_ref(kind), method)?;
    Ok(report.rates.into_iter().next().expect("one rate per kind"))
}

/// Rates of several statistics with all pairwise gaps. Monte Carlo uses the
/// same blocks for every statistic, so gap standard errors are paired.
pub fn growth_report(
    spec: &FamilySpec,
    alt: &Alternative,
    kinds: &[EValueKind],
    method: GrowthMethod,
) -> Result<GrowthReport> {
    if kinds.is_empty() {
        return Err(Error::InvalidParameter("no e-variable kinds requested".into()));
    }
    let mut rates = Vec::with_capacity(kinds.len());
    let mut gaps = Vec::new();
    match method {
        GrowthMethod::Quadrature => {
            for kind in kinds {
                rates.push(GrowthEntry {
                    kind: kind.name().to_string(),
                    rate: quadrature_rate(spec, alt, kind)?,
                    se: None,
                });
            }
            for i in 0..rates.len() {
                for j in i + 1..rates.len() {
                    gaps.push(GapEntry {
                        minuend: rates[i].kind.clone(),
                        subtrahend: rates[j].kind.clone(),
                        gap: rates[i].rate - rates[j].rate,
                        se: None,
                    });
                }
            }
        }
        GrowthMethod::MonteCarlo { n, seed } => {
            check_mc(n)?;
            let stats = kinds
                .iter()
                .map(|k| Statistic::new(spec, alt, k))
                .collect::<Result<Vec<_>>>()?;
            let rows = monte_carlo_logs(spec, alt, &stats, n, seed);
            for (kind, row) in kinds.iter().zip(&rows) {
                let (rate, se) = mean_se(row);
                if !rate.is_finite() {
                    return Err(Error::Quadrature(format!(
                        "Monte Carlo growth rate of {} is not finite",
                        kind.name()
                    )));
                }
                rates.push(GrowthEntry {
                    kind: kind.name().to_string(),
                    rate,
                    se: Some(se),
                });
            }
            for i in 0..rates.len() {
                for j in i + 1..rates.len() {
                    let diff: Vec<f64> = rows[i].iter().zip(&rows[j]).map(|(a, b)| a - b).collect();
                    gaps.push(GapEntry {
                        minuend: rates[i].kind.clone(),
                        subtrahend: rates[j].kind.clone(),
                        gap: rates[i].rate - rates[j].rate,
                        se: Some(mean_se(&diff).1),
                    });
                }
            }
        }
    }
    Ok(GrowthReport {
        alternative: alt.clone(),
        method,
        rates,
        gaps,
    })
}
