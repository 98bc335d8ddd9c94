//! The four block statistics and the local criterion for the pseudo statistic.
//!
//! All statistics are returned in log space. With `lambda_i = lambda(mu_i)`
//! and `Z = sum x_j`:
//!
//! - pseudo: `sum_i (lambda_i - lambda_*) x_i - (A_i - A_*)`
//! - i.i.d. projection: `sum_i log p_mui(x_i) - sum_j log((1/k) sum_i p_mui(x_j))`
//! - conditional: `log p_mu(x) - log p_{mu;Z}(z) - log p_<mu0>(x) + log p_{<mu0>;Z}(z)`
//! - mixture projection: `log p_mu(x) - log sum_w w prod_j p_{mu_w}(x_j)`

use crate::error::{Error, Result};
use crate::expfam::{Alternative, FamilySpec, SumDensity};
use crate::marginal::{self, Marginal};
use crate::ripr::{Certificate, MixtureNull};
use crate::special::LogSum;
use serde::{Deserialize, Serialize};

/// One observation per group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    x: Vec<f64>,
}

impl Block {
    pub fn new(spec: &FamilySpec, x: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a block needs k >= 2 observations, got {}",
                x.len()
            )));
        }
        for &v in &x {
            spec.check_support(v)?;
        }
        Ok(Block { x })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }

    pub fn z(&self) -> f64 {
        self.x.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EValueKind {
    Pseudo,
    GroM { mixture: MixtureNull },
    GroIid,
    Cond,
}

impl EValueKind {
    pub fn name(&self) -> &'static str {
        match self {
            EValueKind::Pseudo => "pseudo",
            EValueKind::GroM { .. } => "gro_m",
            EValueKind::GroIid => "gro_iid",
            EValueKind::Cond => "cond",
        }
    }

    /// Parses a kind that needs no further data; `gro_m` is refused because
    /// it needs a mixture.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "pseudo" => Ok(EValueKind::Pseudo),
            "gro_iid" | "groiid" | "iid" => Ok(EValueKind::GroIid),
            "cond" => Ok(EValueKind::Cond),
            "gro_m" | "grom" => Err(Error::Uncertified(
                "gro_m needs a certified mixture; run `project` first and pass its output".into(),
            )),
            other => Err(Error::InvalidParameter(format!(
                "unknown e-variable kind '{other}' (expected pseudo, gro_iid, cond or gro_m)"
            ))),
        }
    }
}

/// Log e-value of one block with the certificate of a mixture statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EValueResult {
    pub kind: String,
    pub log_evalue: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

impl EValueResult {
    pub fn evalue(&self) -> f64 {
        self.log_evalue.exp()
    }
}

/// A statistic prepared for repeated evaluation on blocks of one alternative.
#[derive(Debug, Clone)]
pub struct Statistic {
    spec: FamilySpec,
    null: bool,
    lam: Vec<f64>,
    a: Vec<f64>,
    form: Form,
}

#[derive(Debug, Clone)]
enum Form {
    Pseudo { lam0: f64, a0: f64 },
    Iid,
    Cond { lam0: f64, a0: f64, sd_mu: Box<SumDensity>, sd0: Box<SumDensity> },
    Mixture { terms: Vec<(f64, f64, f64)> },
}

impl Statistic {
    pub fn new(spec: &FamilySpec, alt: &Alternative, kind: &EValueKind) -> Result<Self> {
        Statistic::with_baseline(spec, alt, kind, alt.mu0_star())
    }

    /// As [`Statistic::new`], with the conditional statistic's baseline set to
    /// `mu0`; the value does not depend on it.
    pub fn with_baseline(spec: &FamilySpec, alt: &Alternative, kind: &EValueKind, mu0: f64) -> Result<Self> {
        spec.check_mean(mu0)?;
        let k = alt.k();
        let lam = alt.mu().iter().map(|&m| spec.lambda(m)).collect();
        let a = alt.mu().iter().map(|&m| spec.log_partition_at_mean(m)).collect();
        let s = alt.mu0_star();
        let form = match kind {
            EValueKind::Pseudo => Form::Pseudo {
                lam0: spec.lambda(s),
                a0: spec.log_partition_at_mean(s),
            },
            EValueKind::GroIid => Form::Iid,
            EValueKind::Cond => Form::Cond {
                lam0: spec.lambda(mu0),
                a0: spec.log_partition_at_mean(mu0),
                sd_mu: Box::new(SumDensity::new(spec, alt.mu())?),
                sd0: Box::new(SumDensity::new(spec, &vec![mu0; k])?),
            },
            EValueKind::GroM { mixture } => {
                mixture.require_certificate()?;
                for c in &mixture.components {
                    spec.check_mean(c.mu0)?;
                }
                Form::Mixture {
                    terms: mixture.terms(spec, k),
                }
            }
        };
        // A mixture statistic is trivial only when its denominator is the alternative itself.
        let null = alt.is_null()
            && match kind {
                EValueKind::GroM { mixture } => {
                    mixture.components.len() == 1 && mixture.components[0].mu0 == alt.mu0_star()
                }
                _ => true,
            };
        Ok(Statistic {
            spec: *spec,
            null,
            lam,
            a,
            form,
        })
    }

    pub fn k(&self) -> usize {
        self.lam.len()
    }

    /// `sum_i lambda_i x_i - A_i`.
    fn log_num(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(self.lam.iter().zip(&self.a))
            .map(|(xi, (l, a))| l * xi - a)
            .sum()
    }

    /// Log value on a validated block.
    pub fn log_value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.k());
        if self.null {
            return 0.0;
        }
        let num = self.log_num(x);
        match &self.form {
            Form::Mixture { terms } => {
                let z: f64 = x.iter().sum();
                num - crate::ripr::mixture::log_r(terms, z)
            }
            Form::Pseudo { lam0, a0 } => {
                let z: f64 = x.iter().sum();
                num - (lam0 * z - self.k() as f64 * a0)
            }
            Form::Iid => {
                let ln_k = (self.k() as f64).ln();
                let mut den = 0.0;
                for &xj in x {
                    let mut acc = LogSum::new();
                    for (l, a) in self.lam.iter().zip(&self.a) {
                        acc.add(l * xj - a);
                    }
                    den += acc.value() - ln_k;
                }
                num - den
            }
            Form::Cond { lam0, a0, sd_mu, sd0 } => {
                let z: f64 = x.iter().sum();
                let null = lam0 * z - self.k() as f64 * a0;
                // Carriers cancel between the block densities, and the sum
                // densities share a base measure, so raw exponents suffice.
                num - sd_mu.ln_pdf(z) - null + sd0.ln_pdf(z)
            }
        }
    }

    pub fn family(&self) -> &FamilySpec {
        &self.spec
    }
}

fn check_block(spec: &FamilySpec, alt: &Alternative, block: &Block) -> Result<()> {
    if block.k() != alt.k() {
        return Err(Error::InvalidParameter(format!(
            "block has {} observations but the alternative has {} groups",
            block.k(),
            alt.k()
        )));
    }
    for &v in block.x() {
        spec.check_support(v)?;
    }
    Ok(())
}

/// Log e-value of `kind` on `block`; the mixture statistic requires a certificate.
pub fn evaluate(spec: &FamilySpec, alt: &Alternative, kind: &EValueKind, block: &Block) -> Result<EValueResult> {
    check_block(spec, alt, block)?;
    let stat = Statistic::new(spec, alt, kind)?;
    let certificate = match kind {
        EValueKind::GroM { mixture } => mixture.certificate,
        _ => None,
    };
    Ok(EValueResult {
        kind: kind.name().to_string(),
        log_evalue: stat.log_value(block.x()),
        certificate,
    })
}

pub fn log_s_pseudo(spec: &FamilySpec, alt: &Alternative, block: &Block) -> Result<f64> {
    Ok(evaluate(spec, alt, &EValueKind::Pseudo, block)?.log_evalue)
}

pub fn log_s_gro_iid(spec: &FamilySpec, alt: &Alternative, block: &Block) -> Result<f64> {
    Ok(evaluate(spec, alt, &EValueKind::GroIid, block)?.log_evalue)
}

pub fn log_s_cond(spec: &FamilySpec, alt: &Alternative, block: &Block) -> Result<f64> {
    Ok(evaluate(spec, alt, &EValueKind::Cond, block)?.log_evalue)
}

/// Conditional statistic built with baseline `mu0` in place of `mu0*`.
pub fn log_s_cond_with_baseline(spec: &FamilySpec, alt: &Alternative, block: &Block, mu0: f64) -> Result<f64> {
    check_block(spec, alt, block)?;
    Ok(Statistic::with_baseline(spec, alt, &EValueKind::Cond, mu0)?.log_value(block.x()))
}

pub fn log_s_gro_m(spec: &FamilySpec, alt: &Alternative, block: &Block, mixture: &MixtureNull) -> Result<f64> {
    Ok(evaluate(spec, alt, &EValueKind::GroM { mixture: mixture.clone() }, block)?.log_evalue)
}

pub fn s_pseudo(spec: &FamilySpec, alt: &Alternative, block: &Block) -> Result<f64> {
    Ok(log_s_pseudo(spec, alt, block)?.exp())
}

pub fn s_gro_iid(spec: &FamilySpec, alt: &Alternative, block: &Block) -> Result<f64> {
    Ok(log_s_gro_iid(spec, alt, block)?.exp())
}

pub fn s_cond(spec: &FamilySpec, alt: &Alternative, block: &Block) -> Result<f64> {
    Ok(log_s_cond(spec, alt, block)?.exp())
}

pub fn s_gro_m(spec: &FamilySpec, alt: &Alternative, block: &Block, mixture: &MixtureNull) -> Result<f64> {
    Ok(log_s_gro_m(spec, alt, block, mixture)?.exp())
}

/// `E_<mu0>[S]` by one-dimensional reduction; `+inf` when it diverges.
/// The mixture statistic is evaluated whether or not it is certified.
pub fn null_expectation(spec: &FamilySpec, alt: &Alternative, kind: &EValueKind, mu0: f64) -> Result<f64> {
    spec.check_mean(mu0)?;
    if alt.is_null() && !matches!(kind, EValueKind::GroM { .. }) {
        return Ok(1.0);
    }
    Ok(match kind {
        EValueKind::Pseudo => marginal::expect_pseudo(spec, alt, mu0),
        EValueKind::GroIid => marginal::expect_iid(spec, alt, mu0),
        EValueKind::Cond => Marginal::new(spec, alt)?.expect_cond(mu0),
        EValueKind::GroM { mixture } => {
            Marginal::new(spec, alt)?.expect_mixture(&mixture.terms(spec, alt.k()), mu0)
        }
    })
}

/// `f(mu0) = sum_i Var_{mu_i + mu0 - mu0*}[X] - k Var_mu0[X]`.
pub fn f_criterion(spec: &FamilySpec, alt: &Alternative, mu0: f64) -> Result<f64> {
    let shift = mu0 - alt.mu0_star();
    let mut total = 0.0;
    for &m in alt.mu() {
        total += spec.variance(m + shift)?;
    }
    Ok(total - alt.k() as f64 * spec.variance(mu0)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    NotEVariable,
    LocallyEVariable,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoVerdict {
    pub verdict: Verdict,
    pub f_value: f64,
}

/// Tolerance on `|f(mu0*)|` below which no verdict is given.
pub const VERDICT_TOL: f64 = 1e-9;

/// Sign of `f(mu0*)`: positive means the pseudo statistic has null
/// expectation above one near `mu0*`.
pub fn pseudo_verdict(spec: &FamilySpec, alt: &Alternative) -> Result<PseudoVerdict> {
    let f_value = f_criterion(spec, alt, alt.mu0_star())?;
    let verdict = if f_value.abs() < VERDICT_TOL {
        Verdict::Indeterminate
    } else if f_value > 0.0 {
        Verdict::NotEVariable
    } else {
        Verdict::LocallyEVariable
    };
    Ok(PseudoVerdict { verdict, f_value })
}
