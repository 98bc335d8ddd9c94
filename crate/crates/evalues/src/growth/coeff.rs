//! Fourth-order coefficients of the growth-rate gaps near the null ray.
//!
//! With `s2(x) = I^2 (x - mu0)^2 + I' (x - mu0) - I`, so that
//! `d^2/dmu^2 p_mu(x) = p_mu0(x) s2(x)` at `mu0`, the gap of the i.i.d.
//! projection behaves like `delta^4 E[s2^2] / (8k)`. For the conditional
//! statistic the second derivative of the law of `Z` is `p_Z(z) h(z)` with
//! `h(z) = I^2 (k^2 m2(z) - z^2) / (k (k - 1)) + I' (z/k - mu0) - I`, where
//! `m2(z) = E[X_1^2 | Z = z]`, and the gap behaves like `delta^4 E[h^2] / 8`.

use crate::error::{Error, Result};
use crate::expfam::{FamilySpec, SumDensity};
use crate::quad::{log_tanh_sinh, Quad};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    IidGap,
    CondGap,
    /// Coefficient of `E[log S_cond] - E[log S_gro(iid)]`; may be negative.
    CondMinusIid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourthOrderCoefficient {
    pub value: f64,
    pub kind: CoefficientKind,
}

const DIRECTION_TOL: f64 = 1e-8;

fn check_direction(direction: &[f64]) -> Result<()> {
    if direction.len() < 2 {
        return Err(Error::InvalidParameter("direction needs k >= 2 entries".into()));
    }
    if direction.iter().any(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter("direction entries must be finite".into()));
    }
    let sum: f64 = direction.iter().sum();
    let norm = direction.iter().map(|a| a * a).sum::<f64>().sqrt();
    if sum.abs() > DIRECTION_TOL {
        return Err(Error::InvalidParameter(format!("direction entries must sum to zero, got {sum}")));
    }
    if (norm - 1.0).abs() > DIRECTION_TOL {
        return Err(Error::InvalidParameter(format!("direction must have unit norm, got {norm}")));
    }
    Ok(())
}

/// `d^2/dmu^2 p_mu(x)`, with `p_mu` the density including the carrier.
pub fn density_second_derivative(spec: &FamilySpec, mu: f64, x: f64) -> Result<f64> {
    spec.check_mean(mu)?;
    spec.check_support(x)?;
    let i = spec.fisher_info(mu)?;
    let di = spec.fisher_info_derivative(mu)?;
    Ok(spec.log_pdf_unchecked(mu, x).exp() * score2(i, di, mu, x))
}

#[inline]
fn score2(i: f64, di: f64, mu0: f64, x: f64) -> f64 {
    let y = x - mu0;
    i * i * y * y + di * y - i
}

/// Fourth-order coefficient of `E[log S_pseudo] - E[log S_gro(iid)]`.
/// Depends on the direction only through its length, which is one.
pub fn coeff_iid_gap(spec: &FamilySpec, mu0: f64, direction: &[f64]) -> Result<FourthOrderCoefficient> {
    check_direction(direction)?;
    spec.check_mean(mu0)?;
    let k = direction.len() as f64;
    let i = spec.fisher_info(mu0)?;
    let di = spec.fisher_info_derivative(mu0)?;
    let dom = spec.x_domain(spec.quad_scale(&[mu0]).max(f64::MIN_POSITIVE));
    let v = Quad::default().integrate(&dom, mu0, |x| {
        (spec.log_pdf_unchecked(mu0, x), score2(i, di, mu0, x).powi(2))
    })?;
    if !v.is_finite() {
        return Err(Error::Quadrature(format!(
            "{}: i.i.d. gap coefficient diverges at mu0 = {mu0}",
            spec.id()
        )));
    }
    Ok(FourthOrderCoefficient {
        value: v.max(0.0) / (8.0 * k),
        kind: CoefficientKind::IidGap,
    })
}

/// `E[X_1^2 | Z = z]` for i.i.d. observations, where a closed form exists.
fn closed_m2(spec: &FamilySpec, k: f64, z: f64) -> Option<f64> {
    let gamma = |a: f64| z * z * a * (a + 1.0) / (k * a * (k * a + 1.0));
    Some(match *spec {
        FamilySpec::Bernoulli => z / k,
        FamilySpec::Poisson => z / k * (1.0 - 1.0 / k) + z * z / (k * k),
        FamilySpec::GaussianFreeMean { variance } => variance * (1.0 - 1.0 / k) + z * z / (k * k),
        FamilySpec::Exponential | FamilySpec::BetaFixedAlpha { alpha: 1.0 } => gamma(1.0),
        FamilySpec::GaussianFreeVariance { .. } => gamma(0.5),
        FamilySpec::Geometric => z * (k - 1.0) * (k + z) / (k * k * (k + 1.0)) + z * z / (k * k),
        FamilySpec::BetaFixedAlpha { .. } => return None,
    })
}

/// Fourth-order coefficient of `E[log S_pseudo] - E[log S_cond]` for `k`
/// groups.
pub fn coeff_cond_gap(spec: &FamilySpec, mu0: f64, direction: &[f64], k: usize) -> Result<FourthOrderCoefficient> {
    check_direction(direction)?;
    if direction.len() != k {
        return Err(Error::InvalidParameter(format!(
            "direction has {} entries but k = {k}",
            direction.len()
        )));
    }
    spec.check_mean(mu0)?;
    let kf = k as f64;
    let i = spec.fisher_info(mu0)?;
    let di = spec.fisher_info_derivative(mu0)?;
    let sd = SumDensity::new(spec, &vec![mu0; k])?;
    let rest = SumDensity::new(spec, &vec![mu0; k - 1])?;
    let scale = match spec {
        FamilySpec::GaussianFreeMean { variance } => (variance * kf).sqrt(),
        _ => kf * spec.quad_scale(&[mu0]).max(f64::MIN_POSITIVE),
    };
    let dom = spec.z_domain(k, scale);
    // Numeric conditional moment for beta with alpha != 1: observations are
    // negative, so X_1 = -a and the others sum to -(|z| - a).
    let (lam0, a0) = (spec.lambda(mu0), spec.log_partition_at_mean(mu0));
    let numeric_m2 = |z: f64, ln_pz: f64| -> f64 {
        let ln_p = |x: f64| lam0 * x - a0 + spec.log_carrier(x);
        let lv = log_tanh_sinh(-z, |a, b| 2.0 * a.ln() + ln_p(-a) + rest.ln_pdf(-b));
        (lv - ln_pz).exp()
    };
    let v = Quad::default().integrate(&dom, kf * mu0, |z| {
        let ln_pz = sd.ln_pdf(z);
        if ln_pz == f64::NEG_INFINITY {
            return (ln_pz, 0.0);
        }
        let m2 = closed_m2(spec, kf, z).unwrap_or_else(|| numeric_m2(z, ln_pz));
        let h = i * i * (kf * kf * m2 - z * z) / (kf * (kf - 1.0)) + di * (z / kf - mu0) - i;
        (ln_pz, h * h)
    })?;
    if !v.is_finite() {
        return Err(Error::Quadrature(format!(
            "{}: conditional gap coefficient diverges at mu0 = {mu0}",
            spec.id()
        )));
    }
    Ok(FourthOrderCoefficient {
        value: v.max(0.0) / 8.0,
        kind: CoefficientKind::CondGap,
    })
}

/// Fourth-order coefficient of `E[log S_cond] - E[log S_gro(iid)]`.
pub fn coeff_cond_minus_iid(spec: &FamilySpec, mu0: f64, direction: &[f64]) -> Result<FourthOrderCoefficient> {
    let iid = coeff_iid_gap(spec, mu0, direction)?;
    let cond = coeff_cond_gap(spec, mu0, direction, direction.len())?;
    Ok(FourthOrderCoefficient {
        value: iid.value - cond.value,
        kind: CoefficientKind::CondMinusIid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> [f64; 2] {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        [a, -a]
    }

    #[test]
    fn gaussian_closed_forms() {
        // E[s2^2] = 2 / sigma^4 for the Gaussian with known variance.
        let spec = FamilySpec::GaussianFreeMean { variance: 1.0 };
        let c = coeff_iid_gap(&spec, 0.0, &unit2()).unwrap();
        assert!((c.value - 0.125).abs() < 1e-10, "{}", c.value);
        let c = coeff_cond_gap(&spec, 0.0, &unit2(), 2).unwrap();
        assert!(c.value < 1e-14, "{}", c.value);
    }

    #[test]
    fn free_variance_hand_values() {
        // With mu0 = 1: E[s2^2] = 3/2 over chi-square(1) moments and
        // E[h^2] = 1/4 over chi-square(2) moments.
        let spec = FamilySpec::GaussianFreeVariance { mean: 0.0 };
        let iid = coeff_iid_gap(&spec, 1.0, &unit2()).unwrap();
        assert!((iid.value - 1.5 / 16.0).abs() < 1e-9, "{}", iid.value);
        let cond = coeff_cond_gap(&spec, 1.0, &unit2(), 2).unwrap();
        assert!((cond.value - 0.25 / 8.0).abs() < 1e-9, "{}", cond.value);
    }

    #[test]
    fn bernoulli_iid_coefficient_vanishes() {
        let c = coeff_iid_gap(&FamilySpec::Bernoulli, 0.5, &unit2()).unwrap();
        assert_eq!(c.value, 0.0);
        let c = coeff_cond_gap(&FamilySpec::Bernoulli, 0.5, &unit2(), 2).unwrap();
        assert!(c.value > 0.0);
    }

    #[test]
    fn numeric_beta_moment_matches_closed_form_at_unit_alpha() {
        // Use a beta family close to alpha = 1 and compare with the limit.
        let near = FamilySpec::BetaFixedAlpha { alpha: 1.0 + 1e-7 };
        let unit = FamilySpec::BetaFixedAlpha { alpha: 1.0 };
        let mu0 = crate::expfam::beta_mean_from_u_mean(1.0, 0.3).unwrap();
        let a = coeff_cond_gap(&near, mu0, &unit2(), 2).unwrap().value;
        let b = coeff_cond_gap(&unit, mu0, &unit2(), 2).unwrap().value;
        assert!((a - b).abs() < 1e-5 * b, "{a} vs {b}");
    }

    #[test]
    fn second_derivative_matches_central_differences() {
        for (spec, mu, x) in [
            (FamilySpec::Exponential, 0.4f64, 0.7f64),
            (FamilySpec::Poisson, 2.0, 3.0),
            (FamilySpec::Geometric, 1.5, 2.0),
            (FamilySpec::GaussianFreeVariance { mean: 0.0 }, 1.2, 0.5),
            (FamilySpec::BetaFixedAlpha { alpha: 2.0 }, -0.6, -0.4),
        ] {
            let h = 1e-4 * mu.abs();
            let p = |m: f64| spec.log_pdf(m, x).unwrap().exp();
            let fd = (p(mu + h) - 2.0 * p(mu) + p(mu - h)) / (h * h);
            let an = density_second_derivative(&spec, mu, x).unwrap();
            assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "{}: {fd} vs {an}", spec.id());
        }
    }

    #[test]
    fn rejects_bad_directions() {
        let spec = FamilySpec::Exponential;
        assert!(coeff_iid_gap(&spec, 0.4, &[1.0, -1.0]).is_err());
        assert!(coeff_iid_gap(&spec, 0.4, &[1.0, 0.0]).is_err());
        assert!(coeff_cond_gap(&spec, 0.4, &unit2(), 3).is_err());
    }
}
