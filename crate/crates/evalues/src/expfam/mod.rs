//! One-parameter exponential families in mean-value parameterization.
//!
//! Each family is written as
//!
//! ```text
//! p_mu(x) = exp(lambda(mu) x - A(lambda(mu))) h(x)
//! ```
//!
//! for the sufficient statistic `x`. `log_density` is taken with respect to
//! `rho = h * base`, so it omits the carrier, while `log_pdf` includes `h` and
//! is taken with respect to the base measure: counting measure for Bernoulli,
//! Poisson and geometric, Lebesgue measure otherwise. Only `log_pdf` is
//! comparable across families; ratios of either are identical.
//!
//! | family | statistic | lambda(mu) | A(lambda) | h(x) |
//! |---|---|---|---|---|
//! | Bernoulli | x in {0,1} | logit mu | log(1+e^l) | 1 |
//! | Gaussian, free mean, variance s2 | x | mu/s2 | s2 l^2/2 | N(0,s2) density |
//! | Gaussian, free variance, mean m | (u-m)^2 | -1/(2mu) | -log(-2l)/2 | (2 pi x)^(-1/2) |
//! | Poisson | x | log mu | e^l | 1/x! |
//! | exponential | x | -1/mu | -log(-l) | 1 |
//! | geometric (failures) | x | log(mu/(1+mu)) | -log(1-e^l) | 1 |
//! | beta, fixed alpha | log(1-u) | beta | log B(alpha, beta) | (1-e^x)^(alpha-1) |

mod alternative;
mod reduce;
mod sum;

pub use alternative::Alternative;
pub use reduce::{reduce_sufficient, RawSource};
pub use sum::SumDensity;

use crate::error::{Error, Result};
use crate::quad::Domain;
use crate::special::{digamma, ln_beta, ln_factorial, log1m_exp, softplus, tetragamma, trigamma};
use rand::Rng;
use rand_distr::{Distribution, Exp, Geometric, Normal, Poisson};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A one-parameter exponential family with its fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyRepr", into = "FamilyRepr")]
pub enum FamilySpec {
    Bernoulli,
    GaussianFreeMean { variance: f64 },
    GaussianFreeVariance { mean: f64 },
    Poisson,
    Exponential,
    Geometric,
    BetaFixedAlpha { alpha: f64 },
}

/// Serialized form `{family, fixed_params}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRepr {
    pub family: String,
    #[serde(default)]
    pub fixed_params: BTreeMap<String, f64>,
}

impl From<FamilySpec> for FamilyRepr {
    fn from(spec: FamilySpec) -> Self {
        let mut fixed_params = BTreeMap::new();
        match spec {
            FamilySpec::GaussianFreeMean { variance } => {
                fixed_params.insert("variance".to_string(), variance);
            }
            FamilySpec::GaussianFreeVariance { mean } => {
                fixed_params.insert("mean".to_string(), mean);
            }
            FamilySpec::BetaFixedAlpha { alpha } => {
                fixed_params.insert("alpha".to_string(), alpha);
            }
            _ => {}
        }
        FamilyRepr {
            family: spec.id().to_string(),
            fixed_params,
        }
    }
}

impl TryFrom<FamilyRepr> for FamilySpec {
    type Error = Error;

    fn try_from(repr: FamilyRepr) -> Result<Self> {
        let get = |key: &str, default: f64| repr.fixed_params.get(key).copied().unwrap_or(default);
        let allowed: &[&str] = match FamilySpec::parse_id(&repr.family)? {
            FamilySpec::GaussianFreeMean { .. } => &["variance"],
            FamilySpec::GaussianFreeVariance { .. } => &["mean"],
            FamilySpec::BetaFixedAlpha { .. } => &["alpha"],
            _ => &[],
        };
        let unknown: Vec<String> = repr
            .fixed_params
            .keys()
            .filter(|k| !allowed.contains(&k.as_str()))
            .map(|k| format!("{}: unknown fixed parameter '{k}'", repr.family))
            .collect();
        if !unknown.is_empty() {
            return Err(Error::Config(unknown));
        }
        let spec = match FamilySpec::parse_id(&repr.family)? {
            FamilySpec::GaussianFreeMean { .. } => FamilySpec::GaussianFreeMean {
                variance: get("variance", 1.0),
            },
            FamilySpec::GaussianFreeVariance { .. } => FamilySpec::GaussianFreeVariance {
                mean: get("mean", 0.0),
            },
            FamilySpec::BetaFixedAlpha { .. } => FamilySpec::BetaFixedAlpha {
                alpha: get("alpha", 1.0),
            },
            other => other,
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl FamilySpec {
    /// All families with default fixed parameters.
    pub fn all() -> [FamilySpec; 7] {
        [
            FamilySpec::Bernoulli,
            FamilySpec::GaussianFreeMean { variance: 1.0 },
            FamilySpec::GaussianFreeVariance { mean: 0.0 },
            FamilySpec::Poisson,
            FamilySpec::Exponential,
            FamilySpec::Geometric,
            FamilySpec::BetaFixedAlpha { alpha: 1.0 },
        ]
    }

    pub fn id(&self) -> &'static str {
        match self {
            FamilySpec::Bernoulli => "bernoulli",
            FamilySpec::GaussianFreeMean { .. } => "gaussian_free_mean",
            FamilySpec::GaussianFreeVariance { .. } => "gaussian_free_variance",
            FamilySpec::Poisson => "poisson",
            FamilySpec::Exponential => "exponential",
            FamilySpec::Geometric => "geometric",
            FamilySpec::BetaFixedAlpha { .. } => "beta_fixed_alpha",
        }
    }

    /// Parses a family identifier or a short alias, with default fixed parameters.
    pub fn parse_id(s: &str) -> Result<FamilySpec> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "bernoulli" | "bern" => FamilySpec::Bernoulli,
            "gaussian_free_mean" | "gfm" | "gaussian" | "normal" => FamilySpec::GaussianFreeMean { variance: 1.0 },
            "gaussian_free_variance" | "gfv" => FamilySpec::GaussianFreeVariance { mean: 0.0 },
            "poisson" => FamilySpec::Poisson,
            "exponential" | "exp" => FamilySpec::Exponential,
            "geometric" | "geo" => FamilySpec::Geometric,
            "beta_fixed_alpha" | "beta" => FamilySpec::BetaFixedAlpha { alpha: 1.0 },
            other => {
                return Err(Error::Config(vec![format!(
                    "unknown family '{other}' (expected one of bernoulli, gaussian_free_mean, \
                     gaussian_free_variance, poisson, exponential, geometric, beta_fixed_alpha)"
                )]))
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            FamilySpec::GaussianFreeMean { variance } if !(variance > 0.0 && variance.is_finite()) => Err(
                Error::InvalidParameter(format!("gaussian_free_mean: variance {variance} must be positive")),
            ),
            FamilySpec::GaussianFreeVariance { mean } if !mean.is_finite() => Err(Error::InvalidParameter(
                format!("gaussian_free_variance: mean {mean} must be finite"),
            )),
            FamilySpec::BetaFixedAlpha { alpha } if !(alpha > 0.0 && alpha.is_finite()) => Err(
                Error::InvalidParameter(format!("beta_fixed_alpha: alpha {alpha} must be positive")),
            ),
            _ => Ok(()),
        }
    }

    /// Open mean space `(lo, hi)`.
    pub fn mean_space(&self) -> (f64, f64) {
        match self {
            FamilySpec::Bernoulli => (0.0, 1.0),
            FamilySpec::GaussianFreeMean { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            FamilySpec::BetaFixedAlpha { .. } => (f64::NEG_INFINITY, 0.0),
            _ => (0.0, f64::INFINITY),
        }
    }

    fn mean_space_str(&self) -> String {
        let (lo, hi) = self.mean_space();
        format!("({lo}, {hi})")
    }

    pub fn in_mean_space(&self, mu: f64) -> bool {
        let (lo, hi) = self.mean_space();
        mu > lo && mu < hi && mu.is_finite()
    }

    pub fn check_mean(&self, mu: f64) -> Result<()> {
        if self.in_mean_space(mu) {
            Ok(())
        } else {
            Err(Error::Domain {
                family: self.id(),
                value: mu,
                space: self.mean_space_str(),
            })
        }
    }

    /// Whether the family's sufficient statistic is integer valued.
    pub fn is_discrete(&self) -> bool {
        matches!(self, FamilySpec::Bernoulli | FamilySpec::Poisson | FamilySpec::Geometric)
    }

    fn support_str(&self) -> &'static str {
        match self {
            FamilySpec::Bernoulli => "{0, 1}",
            FamilySpec::Poisson | FamilySpec::Geometric => "{0, 1, 2, ...}",
            FamilySpec::GaussianFreeMean { .. } => "(-inf, inf)",
            FamilySpec::Exponential => "[0, inf)",
            FamilySpec::GaussianFreeVariance { .. } => "(0, inf)",
            FamilySpec::BetaFixedAlpha { .. } => "(-inf, 0)",
        }
    }

    pub fn in_support(&self, x: f64) -> bool {
        if !x.is_finite() {
            return false;
        }
        match self {
            FamilySpec::Bernoulli => x == 0.0 || x == 1.0,
            FamilySpec::Poisson | FamilySpec::Geometric => x >= 0.0 && x.fract() == 0.0,
            FamilySpec::GaussianFreeMean { .. } => true,
            FamilySpec::Exponential => x >= 0.0,
            FamilySpec::GaussianFreeVariance { .. } => x > 0.0,
            FamilySpec::BetaFixedAlpha { .. } => x < 0.0,
        }
    }

    pub fn check_support(&self, x: f64) -> Result<()> {
        if self.in_support(x) {
            Ok(())
        } else {
            Err(Error::Support {
                family: self.id(),
                value: x,
                support: self.support_str().to_string(),
            })
        }
    }

    /// `lambda(mu)` without domain checks.
    #[inline]
    pub fn lambda(&self, mu: f64) -> f64 {
        match *self {
            FamilySpec::Bernoulli => (mu / (1.0 - mu)).ln(),
            FamilySpec::GaussianFreeMean { variance } => mu / variance,
            FamilySpec::GaussianFreeVariance { .. } => -0.5 / mu,
            FamilySpec::Poisson => mu.ln(),
            FamilySpec::Exponential => -1.0 / mu,
            FamilySpec::Geometric => (mu / (1.0 + mu)).ln(),
            FamilySpec::BetaFixedAlpha { alpha } => {
                if alpha == 1.0 {
                    -1.0 / mu
                } else {
                    beta_from_mean(alpha, mu)
                }
            }
        }
    }

    /// `A(lambda(mu))` computed directly from `mu`.
    #[inline]
    pub fn log_partition_at_mean(&self, mu: f64) -> f64 {
        match *self {
            FamilySpec::Bernoulli => -(-mu).ln_1p(),
            FamilySpec::GaussianFreeMean { variance } => mu * mu / (2.0 * variance),
            FamilySpec::GaussianFreeVariance { .. } => 0.5 * mu.ln(),
            FamilySpec::Poisson => mu,
            FamilySpec::Exponential => mu.ln(),
            FamilySpec::Geometric => mu.ln_1p(),
            FamilySpec::BetaFixedAlpha { alpha } => {
                if alpha == 1.0 {
                    (-mu).ln()
                } else {
                    ln_beta(alpha, beta_from_mean(alpha, mu))
                }
            }
        }
    }

    /// Natural parameter `lambda(mu)` with `A'(lambda) = mu`.
    pub fn natural_from_mean(&self, mu: f64) -> Result<f64> {
        self.check_mean(mu)?;
        Ok(self.lambda(mu))
    }

    pub fn in_natural_space(&self, lambda: f64) -> bool {
        if !lambda.is_finite() {
            return false;
        }
        match self {
            FamilySpec::Bernoulli | FamilySpec::GaussianFreeMean { .. } | FamilySpec::Poisson => true,
            FamilySpec::Exponential | FamilySpec::Geometric | FamilySpec::GaussianFreeVariance { .. } => {
                lambda < 0.0
            }
            FamilySpec::BetaFixedAlpha { .. } => lambda > 0.0,
        }
    }

    fn check_natural(&self, lambda: f64) -> Result<()> {
        if self.in_natural_space(lambda) {
            Ok(())
        } else {
            let space = match self {
                FamilySpec::Exponential | FamilySpec::Geometric | FamilySpec::GaussianFreeVariance { .. } => {
                    "(-inf, 0)"
                }
                FamilySpec::BetaFixedAlpha { .. } => "(0, inf)",
                _ => "(-inf, inf)",
            };
            Err(Error::NaturalDomain {
                family: self.id(),
                value: lambda,
                space: space.to_string(),
            })
        }
    }

    /// Mean `A'(lambda)`.
    pub fn mean_from_natural(&self, lambda: f64) -> Result<f64> {
        self.check_natural(lambda)?;
        Ok(match *self {
            FamilySpec::Bernoulli => 1.0 / (1.0 + (-lambda).exp()),
            FamilySpec::GaussianFreeMean { variance } => variance * lambda,
            FamilySpec::GaussianFreeVariance { .. } => -0.5 / lambda,
            FamilySpec::Poisson => lambda.exp(),
            FamilySpec::Exponential => -1.0 / lambda,
            FamilySpec::Geometric => 1.0 / (-lambda).exp_m1(),
            FamilySpec::BetaFixedAlpha { alpha } => beta_mean(alpha, lambda),
        })
    }

    /// Log-partition function `A(lambda)`.
    pub fn log_partition(&self, lambda: f64) -> Result<f64> {
        self.check_natural(lambda)?;
        Ok(match *self {
            FamilySpec::Bernoulli => softplus(lambda),
            FamilySpec::GaussianFreeMean { variance } => 0.5 * variance * lambda * lambda,
            FamilySpec::GaussianFreeVariance { .. } => -0.5 * (-2.0 * lambda).ln(),
            FamilySpec::Poisson => lambda.exp(),
            FamilySpec::Exponential => -(-lambda).ln(),
            FamilySpec::Geometric => -log1m_exp(lambda),
            FamilySpec::BetaFixedAlpha { alpha } => {
                if alpha == 1.0 {
                    -lambda.ln()
                } else {
                    ln_beta(alpha, lambda)
                }
            }
        })
    }

    /// `log h(x)` relative to the base measure, for `x` in the support.
    #[inline]
    pub fn log_carrier(&self, x: f64) -> f64 {
        match *self {
            FamilySpec::Bernoulli | FamilySpec::Exponential | FamilySpec::Geometric => 0.0,
            FamilySpec::Poisson => -ln_factorial(x),
            FamilySpec::GaussianFreeMean { variance } => {
                -x * x / (2.0 * variance) - 0.5 * (2.0 * std::f64::consts::PI * variance).ln()
            }
            FamilySpec::GaussianFreeVariance { .. } => -0.5 * (2.0 * std::f64::consts::PI * x).ln(),
            FamilySpec::BetaFixedAlpha { alpha } => {
                if alpha == 1.0 {
                    0.0
                } else {
                    (alpha - 1.0) * (-x.exp_m1()).ln()
                }
            }
        }
    }

    /// `lambda(mu) x - A(lambda(mu))`, the log density with respect to `rho`.
    pub fn log_density(&self, mu: f64, x: f64) -> Result<f64> {
        self.check_mean(mu)?;
        self.check_support(x)?;
        Ok(self.lambda(mu) * x - self.log_partition_at_mean(mu))
    }

    /// Log density with respect to counting or Lebesgue measure.
    pub fn log_pdf(&self, mu: f64, x: f64) -> Result<f64> {
        Ok(self.log_density(mu, x)? + self.log_carrier(x))
    }

    /// [`FamilySpec::log_pdf`] without checks, for hot loops.
    #[inline]
    pub fn log_pdf_unchecked(&self, mu: f64, x: f64) -> f64 {
        self.lambda(mu) * x - self.log_partition_at_mean(mu) + self.log_carrier(x)
    }

    /// `Var_mu[X] = A''(lambda(mu))`.
    pub fn variance(&self, mu: f64) -> Result<f64> {
        self.check_mean(mu)?;
        Ok(self.variance_unchecked(mu))
    }

    #[inline]
    pub fn variance_unchecked(&self, mu: f64) -> f64 {
        match *self {
            FamilySpec::Bernoulli => mu * (1.0 - mu),
            FamilySpec::GaussianFreeMean { variance } => variance,
            FamilySpec::GaussianFreeVariance { .. } => 2.0 * mu * mu,
            FamilySpec::Poisson => mu,
            FamilySpec::Exponential => mu * mu,
            FamilySpec::Geometric => mu * (1.0 + mu),
            FamilySpec::BetaFixedAlpha { alpha } => {
                if alpha == 1.0 {
                    mu * mu
                } else {
                    let b = beta_from_mean(alpha, mu);
                    trigamma(b) - trigamma(alpha + b)
                }
            }
        }
    }

    /// Fisher information `1 / Var_mu[X]` for the mean parameter.
    pub fn fisher_info(&self, mu: f64) -> Result<f64> {
        Ok(1.0 / self.variance(mu)?)
    }

    /// `dV/dmu`.
    pub fn variance_derivative(&self, mu: f64) -> Result<f64> {
        self.check_mean(mu)?;
        Ok(match *self {
            FamilySpec::Bernoulli => 1.0 - 2.0 * mu,
            FamilySpec::GaussianFreeMean { .. } => 0.0,
            FamilySpec::GaussianFreeVariance { .. } => 4.0 * mu,
            FamilySpec::Poisson => 1.0,
            FamilySpec::Exponential => 2.0 * mu,
            FamilySpec::Geometric => 1.0 + 2.0 * mu,
            FamilySpec::BetaFixedAlpha { alpha } => {
                if alpha == 1.0 {
                    2.0 * mu
                } else {
                    let b = beta_from_mean(alpha, mu);
                    let v = trigamma(b) - trigamma(alpha + b);
                    (tetragamma(b) - tetragamma(alpha + b)) / v
                }
            }
        })
    }

    /// `dI/dmu = -V'/V^2`.
    pub fn fisher_info_derivative(&self, mu: f64) -> Result<f64> {
        let v = self.variance(mu)?;
        Ok(-self.variance_derivative(mu)? / (v * v))
    }

    /// KL divergence `D(P_a || P_b)`.
    pub fn kl(&self, mu_a: f64, mu_b: f64) -> Result<f64> {
        self.check_mean(mu_a)?;
        self.check_mean(mu_b)?;
        Ok(self.kl_unchecked(mu_a, mu_b))
    }

    #[inline]
    pub(crate) fn kl_unchecked(&self, mu_a: f64, mu_b: f64) -> f64 {
        if mu_a == mu_b {
            return 0.0;
        }
        let d = (self.lambda(mu_a) - self.lambda(mu_b)) * mu_a
            - (self.log_partition_at_mean(mu_a) - self.log_partition_at_mean(mu_b));
        d.max(0.0)
    }

    /// `n` i.i.d. draws from `P_mu`.
    pub fn sample<R: Rng + ?Sized>(&self, mu: f64, rng: &mut R, n: usize) -> Result<Vec<f64>> {
        self.check_mean(mu)?;
        Ok((0..n).map(|_| self.draw(mu, rng)).collect())
    }

    /// One draw from `P_mu`; `mu` must lie in the mean space.
    pub fn draw<R: Rng + ?Sized>(&self, mu: f64, rng: &mut R) -> f64 {
        match *self {
            FamilySpec::Bernoulli => {
                if rng.random::<f64>() < mu {
                    1.0
                } else {
                    0.0
                }
            }
            FamilySpec::GaussianFreeMean { variance } => {
                Normal::new(mu, variance.sqrt()).expect("valid normal").sample(rng)
            }
            FamilySpec::GaussianFreeVariance { .. } => {
                let g: f64 = Normal::new(0.0, mu.sqrt()).expect("valid normal").sample(rng);
                (g * g).max(f64::MIN_POSITIVE)
            }
            FamilySpec::Poisson => Poisson::new(mu).expect("valid poisson").sample(rng),
            FamilySpec::Exponential => Exp::new(1.0 / mu).expect("valid exponential").sample(rng),
            FamilySpec::Geometric => {
                Geometric::new(1.0 / (1.0 + mu)).expect("valid geometric").sample(rng) as f64
            }
            FamilySpec::BetaFixedAlpha { alpha } => {
                let b = self.lambda(mu);
                // 1 - U ~ Beta(beta, alpha), so X = log(1 - U) avoids log1p(-U) near U = 1.
                let v: f64 = rand_distr::Beta::new(b, alpha).expect("valid beta").sample(rng);
                let x = v.ln();
                if x < 0.0 {
                    x
                } else {
                    -f64::MIN_POSITIVE
                }
            }
        }
    }

    /// Quadrature domain of the statistic `X`.
    pub fn x_domain(&self, scale: f64) -> Domain {
        match self {
            FamilySpec::Bernoulli => Domain::Lattice { lo: 0, hi: Some(1) },
            FamilySpec::Poisson | FamilySpec::Geometric => Domain::Lattice { lo: 0, hi: None },
            FamilySpec::GaussianFreeMean { .. } => Domain::Line { scale },
            FamilySpec::Exponential | FamilySpec::GaussianFreeVariance { .. } => {
                Domain::HalfLine { sign: 1.0, scale }
            }
            FamilySpec::BetaFixedAlpha { .. } => Domain::HalfLine { sign: -1.0, scale },
        }
    }

    /// Quadrature domain of `Z = X_1 + ... + X_k`.
    pub fn z_domain(&self, k: usize, scale: f64) -> Domain {
        match self {
            FamilySpec::Bernoulli => Domain::Lattice {
                lo: 0,
                hi: Some(k as i64),
            },
            _ => self.x_domain(scale),
        }
    }

    /// Length scale for quadrature around the given means. On half lines the
    /// nodes below the scale are geometrically spaced, so the largest mean is
    /// used.
    pub fn quad_scale(&self, mus: &[f64]) -> f64 {
        match *self {
            FamilySpec::GaussianFreeMean { variance } => variance.sqrt(),
            FamilySpec::Exponential
            | FamilySpec::GaussianFreeVariance { .. }
            | FamilySpec::BetaFixedAlpha { .. } => {
                mus.iter().map(|m| m.abs()).fold(0.0, f64::max)
            }
            _ => 1.0,
        }
    }
}

/// Mean of `log(1-U)` for `U ~ Beta(alpha, beta)`.
pub(crate) fn beta_mean(alpha: f64, beta: f64) -> f64 {
    if alpha == 1.0 {
        -1.0 / beta
    } else {
        digamma(beta) - digamma(alpha + beta)
    }
}

/// Inverse of [`beta_mean`] in `beta`, by safeguarded Newton steps in `log beta`.
pub(crate) fn beta_from_mean(alpha: f64, mu: f64) -> f64 {
    if alpha == 1.0 {
        return -1.0 / mu;
    }
    let f = |t: f64| beta_mean(alpha, t.exp()) - mu;
    // For small beta the mean behaves like -1/beta, for large beta like -alpha/beta.
    let mut t = (-alpha.max(1.0) / mu).ln();
    let (mut lo, mut hi) = (t - 1.0, t + 1.0);
    while f(lo) > 0.0 {
        lo -= 2.0 * (hi - lo);
        if lo < -700.0 {
            break;
        }
    }
    while f(hi) < 0.0 {
        hi += 2.0 * (hi - lo);
        if hi > 700.0 {
            break;
        }
    }
    t = t.clamp(lo, hi);
    for _ in 0..100 {
        let b = t.exp();
        let g = f(t);
        if g == 0.0 {
            break;
        }
        if g < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let slope = (trigamma(b) - trigamma(alpha + b)) * b;
        let mut next = t - g / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() < 1e-15 * t.abs().max(1.0) {
            t = next;
            break;
        }
        t = next;
    }
    t.exp()
}

/// Beta mean of `log(1-U)` from the mean of `U`: `E[U] = alpha / (alpha + beta)`.
pub fn beta_mean_from_u_mean(alpha: f64, u_mean: f64) -> Result<f64> {
    if !(u_mean > 0.0 && u_mean < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "beta_fixed_alpha: mean of U {u_mean} must lie in (0, 1)"
        )));
    }
    let b = alpha * (1.0 - u_mean) / u_mean;
    Ok(beta_mean(alpha, b))
}
