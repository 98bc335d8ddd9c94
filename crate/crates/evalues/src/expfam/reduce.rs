use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Raw observation models that reduce to one of the supported families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum RawSource {
    /// Pareto with known scale `v`; `log(u / v)` is exponential.
    Pareto { v: f64 },
    /// Log-normal; `log u` is Gaussian.
    LogNormal,
}

/// Sufficient statistic of a raw observation.
pub fn reduce_sufficient(source: RawSource, raw: f64) -> Result<f64> {
    match source {
        RawSource::Pareto { v } => {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter(format!("pareto: scale {v} must be positive")));
            }
            if !(raw >= v) || !raw.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "pareto: observation {raw} must be at least the scale {v}"
                )));
            }
            Ok((raw / v).ln())
        }
        RawSource::LogNormal => {
            if !(raw > 0.0) || !raw.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "log_normal: observation {raw} must be positive"
                )));
            }
            Ok(raw.ln())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn reductions() {
        assert_eq!(reduce_sufficient(RawSource::Pareto { v: 1.0 }, 1.0).unwrap(), 0.0);
        assert!((reduce_sufficient(RawSource::Pareto { v: 2.0 }, 2.0 * E).unwrap() - 1.0).abs() < 1e-15);
        assert!((reduce_sufficient(RawSource::LogNormal, E * E).unwrap() - 2.0).abs() < 1e-15);
        assert!(reduce_sufficient(RawSource::Pareto { v: 2.0 }, 1.0).is_err());
        assert!(reduce_sufficient(RawSource::LogNormal, 0.0).is_err());
    }
}
