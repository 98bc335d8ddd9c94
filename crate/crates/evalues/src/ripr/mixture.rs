use crate::error::{Error, Result};
use crate::expfam::FamilySpec;
use serde::{Deserialize, Serialize};

/// One i.i.d. null component `P_<mu0>` with weight `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub w: f64,
    pub mu0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Li,
    BruteForce2,
    /// A mixture supplied by the caller and certified afterwards.
    Supplied,
}

/// Worst-case null expectation of the mixture e-variable over a `mu0` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub sup_expectation: f64,
    pub mu0_grid_size: usize,
    pub method: Method,
    pub argmax_mu0: f64,
    pub mu0_lo: f64,
    pub mu0_hi: f64,
}

impl Certificate {
    /// `c - 1`: the mixture statistic is a `(c - 1)`-approximate e-variable.
    pub fn excess(&self) -> f64 {
        (self.sup_expectation - 1.0).max(0.0)
    }
}

/// Finite convex combination of i.i.d. null product distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureNull {
    pub components: Vec<Component>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

impl MixtureNull {
    /// Checks weights and means; weights must sum to one within `1e-9` and
    /// are renormalized exactly.
    pub fn new(spec: &FamilySpec, components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("mixture needs at least one component".into()));
        }
        let mut total = 0.0;
        for c in &components {
            if !(c.w >= 0.0 && c.w <= 1.0) {
                return Err(Error::InvalidParameter(format!("mixture weight {} outside [0, 1]", c.w)));
            }
            spec.check_mean(c.mu0)?;
            total += c.w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("mixture weights sum to {total}, not 1")));
        }
        let components = components
            .into_iter()
            .filter(|c| c.w > 0.0)
            .map(|c| Component { w: c.w / total, mu0: c.mu0 })
            .collect();
        Ok(MixtureNull {
            components,
            certificate: None,
        })
    }

    pub fn point(spec: &FamilySpec, mu0: f64) -> Result<Self> {
        MixtureNull::new(spec, vec![Component { w: 1.0, mu0 }])
    }

    pub fn weight_sum(&self) -> f64 {
        self.components.iter().map(|c| c.w).sum()
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.is_some_and(|c| c.sup_expectation.is_finite())
    }

    /// Certificate or a refusal explaining how to obtain one.
    pub fn require_certificate(&self) -> Result<&Certificate> {
        match &self.certificate {
            Some(c) if c.sup_expectation.is_finite() => Ok(c),
            Some(c) => Err(Error::Uncertified(format!(
                "worst-case null expectation {} is not finite",
                c.sup_expectation
            ))),
            None => Err(Error::Uncertified(
                "mixture carries no certificate; compute one with the projection search".into(),
            )),
        }
    }

    /// `(log w, lambda, k A)` per component.
    pub(crate) fn terms(&self, spec: &FamilySpec, k: usize) -> Vec<(f64, f64, f64)> {
        self.components
            .iter()
            .map(|c| (c.w.ln(), spec.lambda(c.mu0), k as f64 * spec.log_partition_at_mean(c.mu0)))
            .collect()
    }
}

/// `log sum_w w exp(lambda(mu_w) z - k A(mu_w))` from [`MixtureNull::terms`].
#[inline]
pub(crate) fn log_r(terms: &[(f64, f64, f64)], z: f64) -> f64 {
    if let [(lw, lam, ka)] = terms {
        return lw + lam * z - ka;
    }
    let mut acc = crate::special::LogSum::new();
    for &(lw, lam, ka) in terms {
        acc.add(lw + lam * z - ka);
    }
    acc.value()
}
