//! Serializable run configuration. A run is reproducible from its config
//! alone; [`RunConfig::to_json`] and [`RunConfig::from_json`] round-trip
//! byte for byte.

use crate::error::{Error, Result};
use crate::evariables::EValueKind;
use crate::expfam::{beta_mean_from_u_mean, Alternative, FamilySpec, FamilyRepr};
use crate::growth::GrowthMethod;
use crate::ripr::{BruteForceConfig, LiConfig};
use crate::sequential::StoppingPolicy;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Which quantity `mean_params` refers to for the beta family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanOf {
    /// Means of the sufficient statistic.
    #[default]
    Statistic,
    /// Means of the raw beta observation `U`, converted at fixed `alpha`.
    UMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyConfig {
    pub family: String,
    #[serde(default)]
    pub fixed_params: BTreeMap<String, f64>,
    pub mean_params: Vec<f64>,
    #[serde(default)]
    pub mean_of: MeanOf,
}

impl FamilyConfig {
    pub fn spec(&self) -> Result<FamilySpec> {
        FamilySpec::try_from(FamilyRepr {
            family: self.family.clone(),
            fixed_params: self.fixed_params.clone(),
        })
    }

    /// Means of the sufficient statistic.
    pub fn statistic_means(&self) -> Result<Vec<f64>> {
        let spec = self.spec()?;
        match (self.mean_of, spec) {
            (MeanOf::Statistic, _) => Ok(self.mean_params.clone()),
            (MeanOf::UMean, FamilySpec::BetaFixedAlpha { alpha }) => self
                .mean_params
                .iter()
                .map(|&u| beta_mean_from_u_mean(alpha, u))
                .collect(),
            (MeanOf::UMean, _) => Err(Error::Config(vec![format!(
                "mean_of = u_mean applies to the beta family only, not {}",
                spec.id()
            )])),
        }
    }

    pub fn resolve(&self) -> Result<(FamilySpec, Alternative)> {
        let spec = self.spec()?;
        let alt = Alternative::new(&spec, self.statistic_means()?)?;
        Ok((spec, alt))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectMethod {
    #[default]
    Li,
    BruteForce,
    Both,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProjectSettings {
    #[serde(default)]
    pub method: ProjectMethod,
    #[serde(default)]
    pub li: LiConfig,
    #[serde(default)]
    pub brute_force: BruteForceConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthMethodName {
    #[default]
    Auto,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthSettings {
    pub method: GrowthMethodName,
    pub mc_samples: usize,
}

impl Default for GrowthSettings {
    fn default() -> Self {
        GrowthSettings {
            method: GrowthMethodName::Auto,
            mc_samples: 1_000_000,
        }
    }
}

impl GrowthSettings {
    pub fn method(&self, k: usize, seed: u64) -> GrowthMethod {
        match self.method {
            GrowthMethodName::Auto => match GrowthMethod::default_for(k, seed) {
                GrowthMethod::MonteCarlo { seed, .. } => GrowthMethod::MonteCarlo {
                    n: self.mc_samples,
                    seed,
                },
                q => q,
            },
            GrowthMethodName::Quadrature => GrowthMethod::Quadrature,
            GrowthMethodName::MonteCarlo => GrowthMethod::MonteCarlo {
                n: self.mc_samples,
                seed,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapSettings {
    pub n: usize,
    /// Standard-parameter window; the family default when absent.
    #[serde(default)]
    pub range: Option<(f64, f64)>,
}

impl Default for HeatmapSettings {
    fn default() -> Self {
        HeatmapSettings { n: 50, range: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSettings {
    pub alpha: f64,
    pub policy: StoppingPolicy,
    pub trials: usize,
    /// Common mean of a null truth; `mu0*` of the alternative when absent.
    #[serde(default)]
    pub null_mu0: Option<f64>,
    /// Draw data from the alternative instead of the null.
    #[serde(default)]
    pub under_alternative: bool,
    #[serde(default)]
    pub schedule: Vec<Vec<usize>>,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        SimulateSettings {
            alpha: 0.05,
            policy: StoppingPolicy::Threshold { max_blocks: 100 },
            trials: 10_000,
            null_mu0: None,
            under_alternative: false,
            schedule: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub family: FamilyConfig,
    /// Statistic for `evaluate` and `simulate`.
    pub kind: String,
    /// Statistics for `growth` and `heatmap`.
    pub kinds: Vec<String>,
    pub seed: u64,
    /// Mixture JSON produced by `project`, needed for `gro_m`.
    #[serde(default)]
    pub mixture_path: Option<String>,
    #[serde(default)]
    pub project: ProjectSettings,
    #[serde(default)]
    pub growth: GrowthSettings,
    #[serde(default)]
    pub heatmap: HeatmapSettings,
    #[serde(default)]
    pub simulate: SimulateSettings,
    #[serde(default)]
    pub output_dir: Option<String>,
    /// Fail when any heatmap cell or simulation trial fails.
    #[serde(default)]
    pub strict: bool,
}

impl RunConfig {
    pub fn new(family: FamilyConfig) -> Self {
        RunConfig {
            family,
            kind: "cond".into(),
            kinds: vec!["gro_iid".into(), "cond".into()],
            seed: 0,
            mixture_path: None,
            project: ProjectSettings::default(),
            growth: GrowthSettings::default(),
            heatmap: HeatmapSettings::default(),
            simulate: SimulateSettings::default(),
            output_dir: None,
            strict: false,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    /// Parses and validates.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(vec![format!("line {}, column {}: {e}", e.line(), e.column())])
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        self.validate_with(true)
    }

    /// As [`RunConfig::validate`]; commands that build their own alternatives
    /// may leave `mean_params` empty.
    pub fn validate_with(&self, require_means: bool) -> Result<()> {
        let mut errs = Vec::new();
        let mut push = |e: Error| match e {
            Error::Config(v) => errs.extend(v),
            other => errs.push(other.to_string()),
        };
        match self.family.spec() {
            Err(e) => push(e),
            Ok(spec) => {
                if (require_means || !self.family.mean_params.is_empty()) && self.family.mean_params.len() < 2 {
                    push(Error::Config(vec![format!(
                        "family.mean_params: need at least 2 means, got {}",
                        self.family.mean_params.len()
                    )]));
                }
                match self.family.statistic_means() {
                    Err(e) => push(e),
                    Ok(means) => {
                        for (i, &m) in means.iter().enumerate() {
                            if let Err(e) = spec.check_mean(m) {
                                push(Error::Config(vec![format!("family.mean_params[{i}]: {e}")]));
                            }
                        }
                    }
                }
                if let Some(mu0) = self.simulate.null_mu0 {
                    if let Err(e) = spec.check_mean(mu0) {
                        push(Error::Config(vec![format!("simulate.null_mu0: {e}")]));
                    }
                }
            }
        }
        if let Err(e) = kind_name_ok(&self.kind) {
            push(Error::Config(vec![format!("kind: {e}")]));
        }
        for (i, k) in self.kinds.iter().enumerate() {
            if let Err(e) = kind_name_ok(k) {
                push(Error::Config(vec![format!("kinds[{i}]: {e}")]));
            }
        }
        if self.heatmap.n < 2 {
            push(Error::Config(vec![format!("heatmap.n: need at least 2, got {}", self.heatmap.n)]));
        }
        if let Some((lo, hi)) = self.heatmap.range {
            if !(lo < hi) {
                push(Error::Config(vec![format!("heatmap.range: [{lo}, {hi}] is empty")]));
            }
        }
        if !(self.simulate.alpha > 0.0 && self.simulate.alpha < 1.0) {
            push(Error::Config(vec![format!(
                "simulate.alpha: {} must lie in (0, 1)",
                self.simulate.alpha
            )]));
        }
        if self.simulate.trials == 0 {
            push(Error::Config(vec!["simulate.trials: must be positive".into()]));
        }
        if self.simulate.policy.max_blocks() == 0 {
            push(Error::Config(vec!["simulate.policy: block limit must be positive".into()]));
        }
        if self.growth.mc_samples < 2 {
            push(Error::Config(vec!["growth.mc_samples: need at least 2".into()]));
        }
        if self.project.li.max_iters == 0 {
            push(Error::Config(vec!["project.li.max_iters: must be positive".into()]));
        }
        if self.project.li.alpha_grid < 2 {
            push(Error::Config(vec!["project.li.alpha_grid: need at least 2".into()]));
        }
        if self.project.brute_force.alpha_grid < 2 {
            push(Error::Config(vec!["project.brute_force.alpha_grid: need at least 2".into()]));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

fn kind_name_ok(name: &str) -> Result<()> {
    match EValueKind::from_name(name) {
        Ok(_) | Err(Error::Uncertified(_)) => Ok(()),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunConfig {
        RunConfig::new(FamilyConfig {
            family: "beta_fixed_alpha".into(),
            fixed_params: BTreeMap::from([("alpha".to_string(), 1.0)]),
            mean_params: vec![0.5, 0.25],
            mean_of: MeanOf::UMean,
        })
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let a = sample().to_json();
        let b = RunConfig::from_json(&a).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn u_means_convert() {
        let (_, alt) = sample().family.resolve().unwrap();
        assert!((alt.mu()[0] + 1.0).abs() < 1e-12);
        assert!((alt.mu()[1] + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_violations_are_listed() {
        let mut c = RunConfig::new(FamilyConfig {
            family: "poisson".into(),
            fixed_params: BTreeMap::new(),
            mean_params: vec![-1.0, 2.0],
            mean_of: MeanOf::Statistic,
        });
        c.kind = "nope".into();
        c.simulate.alpha = 2.0;
        c.heatmap.n = 1;
        match c.validate() {
            Err(Error::Config(v)) => {
                assert_eq!(v.len(), 4, "{v:?}");
                assert!(v[0].starts_with("family.mean_params[0]"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = RunConfig::from_json("{\n  \"family\": 3\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }
}
