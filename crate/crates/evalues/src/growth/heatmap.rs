//! Gap heatmaps over two-group alternatives on a grid that is equally
//! spaced in each family's standard parameter, and their anti-diagonal slices.

use super::{deficit, growth_report, GrowthMethod};
use crate::error::{Error, Result};
use crate::evariables::EValueKind;
use crate::expfam::{beta_mean, Alternative, FamilySpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default standard-parameter window per family:
///
/// | family | standard parameter | default range |
/// |---|---|---|
/// | Bernoulli | success probability | [0.05, 0.95] |
/// | Gaussian, free mean | mean | [-2, 2] |
/// | Gaussian, free variance | standard deviation | [0.5, 3] |
/// | Poisson | rate | [0.5, 10] |
/// | exponential | rate | [0.5, 5] |
/// | geometric | success probability | [0.1, 0.9] |
/// | beta, fixed alpha | beta | [0.5, 5] |
pub fn default_standard_range(spec: &FamilySpec) -> (f64, f64) {
    match spec {
        FamilySpec::Bernoulli => (0.05, 0.95),
        FamilySpec::GaussianFreeMean { .. } => (-2.0, 2.0),
        FamilySpec::GaussianFreeVariance { .. } => (0.5, 3.0),
        FamilySpec::Poisson => (0.5, 10.0),
        FamilySpec::Exponential => (0.5, 5.0),
        FamilySpec::Geometric => (0.1, 0.9),
        FamilySpec::BetaFixedAlpha { .. } => (0.5, 5.0),
    }
}

/// Mean of the sufficient statistic at standard parameter `t`.
pub fn mean_from_standard(spec: &FamilySpec, t: f64) -> Result<f64> {
    let bad = || Error::InvalidParameter(format!("{}: standard parameter {t} out of range", spec.id()));
    let mu = match *spec {
        FamilySpec::Bernoulli => t,
        FamilySpec::GaussianFreeMean { .. } => t,
        FamilySpec::GaussianFreeVariance { .. } => {
            if !(t > 0.0) {
                return Err(bad());
            }
            t * t
        }
        FamilySpec::Poisson => t,
        FamilySpec::Exponential => {
            if !(t > 0.0) {
                return Err(bad());
            }
            1.0 / t
        }
        FamilySpec::Geometric => {
            if !(t > 0.0 && t < 1.0) {
                return Err(bad());
            }
            (1.0 - t) / t
        }
        FamilySpec::BetaFixedAlpha { alpha } => {
            if !(t > 0.0) {
                return Err(bad());
            }
            beta_mean(alpha, t)
        }
    };
    spec.check_mean(mu)?;
    Ok(mu)
}

/// `sign(x) |x|^(1/4)`.
pub fn signed_fourth_root(x: f64) -> f64 {
    x.signum() * x.abs().powf(0.25)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapConfig {
    /// Grid points per axis.
    pub n: usize,
    /// Standard-parameter window; [`default_standard_range`] when absent.
    #[serde(default)]
    pub range: Option<(f64, f64)>,
    pub minuend: EValueKind,
    pub subtrahend: EValueKind,
    pub method: GrowthMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub i: usize,
    pub j: usize,
    pub mu1: f64,
    pub mu2: f64,
    /// `E[log S_minuend - log S_subtrahend]`; NaN when the cell failed.
    pub gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl HeatmapCell {
    pub fn gap_fourth_root(&self) -> f64 {
        signed_fourth_root(self.gap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicePoint {
    /// `(mu1 - mu2) / sqrt(2)`: the distance to the null ray, signed.
    pub delta: f64,
    pub signed_fourth_root: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    pub family: FamilySpec,
    pub n: usize,
    pub standard: Vec<f64>,
    pub means: Vec<f64>,
    /// Row-major: cell `(i, j)` has `mu1 = means[i]`, `mu2 = means[j]`.
    pub cells: Vec<HeatmapCell>,
}

impl Heatmap {
    pub fn cell(&self, i: usize, j: usize) -> &HeatmapCell {
        &self.cells[i * self.n + j]
    }

    pub fn gap_matrix(&self) -> Vec<Vec<f64>> {
        self.cells.chunks(self.n).map(|r| r.iter().map(|c| c.gap).collect()).collect()
    }

    pub fn fourth_root_matrix(&self) -> Vec<Vec<f64>> {
        self.cells
            .chunks(self.n)
            .map(|r| r.iter().map(|c| c.gap_fourth_root()).collect())
            .collect()
    }

    pub fn failures(&self) -> impl Iterator<Item = &HeatmapCell> {
        self.cells.iter().filter(|c| c.error.is_some())
    }

    /// Cells with `i + j = n - 1 - offset`, from `mu1` smallest to largest.
    /// Offset 0 is the main anti-diagonal, on which `mu0*` stays fixed when
    /// the grid is linear in the mean.
    pub fn slice(&self, offset: usize) -> Vec<SlicePoint> {
        if offset >= self.n {
            return Vec::new();
        }
        let s = self.n - 1 - offset;
        (0..=s)
            .map(|i| {
                let c = self.cell(i, s - i);
                SlicePoint {
                    delta: (c.mu1 - c.mu2) / std::f64::consts::SQRT_2,
                    signed_fourth_root: c.gap_fourth_root(),
                }
            })
            .collect()
    }
}

fn cell_gap(spec: &FamilySpec, cfg: &HeatmapConfig, mu1: f64, mu2: f64, seed_stream: u64) -> Result<(f64, Option<f64>)> {
    let alt = Alternative::new(spec, vec![mu1, mu2])?;
    match cfg.method {
        // Both rates share the pseudo rate, so the gap is a difference of deficits.
        GrowthMethod::Quadrature => {
            let a = deficit(spec, &alt, &cfg.minuend)?;
            let b = deficit(spec, &alt, &cfg.subtrahend)?;
            Ok((b - a, None))
        }
        GrowthMethod::MonteCarlo { n, seed } => {
            let method = GrowthMethod::MonteCarlo {
                n,
                seed: seed ^ seed_stream.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            };
            let r = growth_report(spec, &alt, &[cfg.minuend.clone(), cfg.subtrahend.clone()], method)?;
            let g = &r.gaps[0];
            Ok((g.gap, g.se))
        }
    }
}

/// Gap of two statistics on an `n x n` grid of alternatives `(mu1, mu2)`.
/// Cell failures are recorded in the cell; only configuration errors fail
/// the whole map.
pub fn heatmap(spec: &FamilySpec, cfg: &HeatmapConfig) -> Result<Heatmap> {
    spec.validate()?;
    if cfg.n < 2 {
        return Err(Error::InvalidParameter("heatmap needs n >= 2".into()));
    }
    for kind in [&cfg.minuend, &cfg.subtrahend] {
        if let EValueKind::GroM { .. } = kind {
            return Err(Error::InvalidParameter(
                "gro_m needs a projected mixture per cell and is not supported in heatmaps".into(),
            ));
        }
    }
    let (lo, hi) = cfg.range.unwrap_or_else(|| default_standard_range(spec));
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("standard range [{lo}, {hi}] is empty")));
    }
    let step = (hi - lo) / (cfg.n - 1) as f64;
    let standard: Vec<f64> = (0..cfg.n)
        .map(|i| if i + 1 == cfg.n { hi } else { lo + step * i as f64 })
        .collect();
    let means = standard
        .iter()
        .map(|&t| mean_from_standard(spec, t))
        .collect::<Result<Vec<_>>>()?;
    let n = cfg.n;
    let cells = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let (mu1, mu2) = (means[i], means[j]);
            match cell_gap(spec, cfg, mu1, mu2, idx as u64) {
                Ok((gap, se)) => HeatmapCell {
                    i,
                    j,
                    mu1,
                    mu2,
                    gap,
                    se,
                    error: None,
                },
                Err(e) => HeatmapCell {
                    i,
                    j,
                    mu1,
                    mu2,
                    gap: f64::NAN,
                    se: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(Heatmap {
        family: *spec,
        n,
        standard,
        means,
        cells,
    })
}
