use super::FamilySpec;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A simple alternative: one mean parameter per group.
///
/// `mu = <mu0_star> + delta * direction`, where `direction` is a unit vector
/// with zero sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alternative {
    mu: Vec<f64>,
    mu0_star: f64,
    delta: f64,
    direction: Option<Vec<f64>>,
}

impl Alternative {
    pub fn new(spec: &FamilySpec, mu: Vec<f64>) -> Result<Self> {
        if mu.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "an alternative needs k >= 2 groups, got {}",
                mu.len()
            )));
        }
        for &m in &mu {
            spec.check_mean(m)?;
        }
        let k = mu.len() as f64;
        if mu.iter().all(|&m| m == mu[0]) {
            return Ok(Alternative {
                mu0_star: mu[0],
                mu,
                delta: 0.0,
                direction: None,
            });
        }
        let mu0_star = mu.iter().sum::<f64>() / k;
        let dev: Vec<f64> = mu.iter().map(|m| m - mu0_star).collect();
        let delta = dev.iter().map(|d| d * d).sum::<f64>().sqrt();
        let direction = dev.iter().map(|d| d / delta).collect();
        Ok(Alternative {
            mu,
            mu0_star,
            delta,
            direction: Some(direction),
        })
    }

    /// `<mu0> + delta * direction`; the direction is centred and normalized first.
    pub fn from_direction(spec: &FamilySpec, mu0: f64, delta: f64, direction: &[f64]) -> Result<Self> {
        if direction.len() < 2 {
            return Err(Error::InvalidParameter("direction needs k >= 2 entries".into()));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("delta {delta} must be nonnegative")));
        }
        let k = direction.len() as f64;
        let c = direction.iter().sum::<f64>() / k;
        let centred: Vec<f64> = direction.iter().map(|a| a - c).collect();
        let norm = centred.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("direction must not be constant".into()));
        }
        let mu = centred.iter().map(|a| mu0 + delta * a / norm).collect();
        Alternative::new(spec, mu)
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn mu0_star(&self) -> f64 {
        self.mu0_star
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Unit direction, `None` when `delta = 0`.
    pub fn direction(&self) -> Option<&[f64]> {
        self.direction.as_deref()
    }

    pub fn is_null(&self) -> bool {
        self.delta == 0.0
    }
}
