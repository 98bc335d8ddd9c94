use super::FamilySpec;
use crate::error::{Error, Result};
use crate::quad::log_tanh_sinh;
use crate::special::{ln_bessel_i0, ln_gamma, log_add_exp};

/// Density of `Z = X_1 + ... + X_k` for independent `X_i ~ P_{mu_i}`, with
/// respect to counting or Lebesgue measure.
#[derive(Debug, Clone)]
pub struct SumDensity {
    spec: FamilySpec,
    mu: Vec<f64>,
    /// `(lambda, A)` per mean.
    nat: Vec<(f64, f64)>,
    sign: f64,
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Table(Vec<f64>),
    Poisson(f64),
    Normal { mean: f64, var: f64 },
    Gamma { shape: f64, scale: f64 },
    Hypoexp { a: f64, b: f64 },
    ChiPair { c1: f64, c2: f64, lnorm: f64 },
    NegBin { k: f64, ln_p: f64, ln_q: f64 },
    GeoPair { ln_c: f64, ln_q1: f64, ln_ratio: f64 },
    GeoChain,
    Convolution { pair: Option<(f64, f64)> },
}

impl SumDensity {
    pub fn new(spec: &FamilySpec, mu: &[f64]) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidParameter("sum density needs at least one mean".into()));
        }
        for &m in mu {
            spec.check_mean(m)?;
        }
        let k = mu.len();
        let equal = mu.iter().all(|&m| m == mu[0]);
        let sign = if matches!(spec, FamilySpec::BetaFixedAlpha { .. }) { -1.0 } else { 1.0 };
        // Unit beta is a reflected exponential with means -mu.
        let pos: Vec<f64> = mu.iter().map(|m| m * sign).collect();
        let kind = match *spec {
            FamilySpec::Bernoulli => Kind::Table(poisson_binomial(mu)),
            FamilySpec::Poisson => Kind::Poisson(mu.iter().sum()),
            FamilySpec::GaussianFreeMean { variance } => Kind::Normal {
                mean: mu.iter().sum(),
                var: k as f64 * variance,
            },
            FamilySpec::Exponential | FamilySpec::BetaFixedAlpha { alpha: 1.0 } => {
                if equal {
                    Kind::Gamma {
                        shape: k as f64,
                        scale: pos[0],
                    }
                } else if k == 2 {
                    let (a, b) = (pos[0].max(pos[1]), pos[0].min(pos[1]));
                    Kind::Hypoexp { a, b }
                } else {
                    Kind::Convolution {
                        pair: Some((pos[0], pos[1])),
                    }
                }
            }
            FamilySpec::GaussianFreeVariance { .. } => {
                if equal {
                    Kind::Gamma {
                        shape: 0.5 * k as f64,
                        scale: 2.0 * mu[0],
                    }
                } else if k == 2 {
                    Kind::ChiPair {
                        c1: 0.5 / mu[0],
                        c2: 0.5 / mu[1],
                        lnorm: -std::f64::consts::LN_2 - 0.5 * (mu[0] * mu[1]).ln(),
                    }
                } else {
                    Kind::Convolution {
                        pair: Some((mu[0], mu[1])),
                    }
                }
            }
            FamilySpec::Geometric => {
                if equal {
                    Kind::NegBin {
                        k: k as f64,
                        ln_p: -mu[0].ln_1p(),
                        ln_q: (mu[0] / (1.0 + mu[0])).ln(),
                    }
                } else if k == 2 {
                    let (m1, m2) = (mu[0].max(mu[1]), mu[0].min(mu[1]));
                    let ln_q1 = (m1 / (1.0 + m1)).ln();
                    let ln_q2 = (m2 / (1.0 + m2)).ln();
                    // q1 - q2 = (m1 - m2) / ((1 + m1)(1 + m2))
                    let ln_dq = (m1 - m2).ln() - m1.ln_1p() - m2.ln_1p();
                    Kind::GeoPair {
                        ln_c: -m1.ln_1p() - m2.ln_1p() + ln_q1 - ln_dq,
                        ln_q1,
                        ln_ratio: ln_q2 - ln_q1,
                    }
                } else {
                    Kind::GeoChain
                }
            }
            FamilySpec::BetaFixedAlpha { .. } => Kind::Convolution { pair: None },
        };
        Ok(SumDensity {
            spec: *spec,
            mu: mu.to_vec(),
            nat: mu.iter().map(|&m| (spec.lambda(m), spec.log_partition_at_mean(m))).collect(),
            sign,
            kind,
        })
    }

    pub fn k(&self) -> usize {
        self.mu.len()
    }

    /// Whether evaluation involves a recursion that is worth caching.
    pub fn is_expensive(&self) -> bool {
        matches!(self.kind, Kind::GeoChain | Kind::Convolution { .. })
    }

    pub fn in_support(&self, z: f64) -> bool {
        if !z.is_finite() {
            return false;
        }
        match self.spec {
            FamilySpec::Bernoulli => z >= 0.0 && z <= self.k() as f64 && z.fract() == 0.0,
            FamilySpec::Poisson | FamilySpec::Geometric => z >= 0.0 && z.fract() == 0.0,
            FamilySpec::GaussianFreeMean { .. } => true,
            FamilySpec::Exponential => z >= 0.0,
            FamilySpec::GaussianFreeVariance { .. } => z > 0.0,
            FamilySpec::BetaFixedAlpha { .. } => z < 0.0,
        }
    }

    /// Checked log density of `Z` at `z`.
    pub fn log_pdf(&self, z: f64) -> Result<f64> {
        if !self.in_support(z) {
            return Err(Error::Support {
                family: self.spec.id(),
                value: z,
                support: format!("support of a sum of {} observations", self.k()),
            });
        }
        Ok(self.ln_pdf(z))
    }

    /// Log density of `Z` at `z`; `-inf` outside the support.
    pub fn ln_pdf(&self, z: f64) -> f64 {
        if !self.in_support(z) {
            return f64::NEG_INFINITY;
        }
        let d = z * self.sign;
        match &self.kind {
            Kind::Table(t) => t[z as usize],
            Kind::Poisson(m) => z * m.ln() - m - ln_gamma(z + 1.0),
            Kind::Normal { mean, var } => {
                -(z - mean).powi(2) / (2.0 * var) - 0.5 * (2.0 * std::f64::consts::PI * var).ln()
            }
            Kind::Gamma { shape, scale } => {
                if d == 0.0 {
                    return if *shape == 1.0 {
                        -scale.ln()
                    } else if *shape > 1.0 {
                        f64::NEG_INFINITY
                    } else {
                        f64::INFINITY
                    };
                }
                (shape - 1.0) * d.ln() - d / scale - shape * scale.ln() - ln_gamma(*shape)
            }
            Kind::Hypoexp { a, b } => {
                let diff = a - b;
                -d / a + (-(-d * diff / (a * b)).exp_m1()).ln() - diff.ln()
            }
            Kind::ChiPair { c1, c2, lnorm } => {
                lnorm - 0.5 * d * (c1 + c2) + ln_bessel_i0(0.5 * d * (c1 - c2))
            }
            Kind::NegBin { k, ln_p, ln_q } => {
                ln_gamma(z + k) - ln_gamma(z + 1.0) - ln_gamma(*k) + k * ln_p + z * ln_q
            }
            Kind::GeoPair { ln_c, ln_q1, ln_ratio } => {
                ln_c + z * ln_q1 + (-((z + 1.0) * ln_ratio).exp_m1()).ln()
            }
            Kind::GeoChain => *geo_chain(&self.mu, z as usize).last().expect("nonempty chain"),
            Kind::Convolution { pair } => self.convolve(self.k(), d, *pair),
        }
    }

    /// Log densities at many points; shares work for recursive lattice sums.
    pub fn ln_pdf_many(&self, zs: &[f64]) -> Vec<f64> {
        if let Kind::GeoChain = self.kind {
            let top = zs
                .iter()
                .filter(|z| self.in_support(**z))
                .fold(0.0f64, |m, &z| m.max(z)) as usize;
            let table = geo_chain(&self.mu, top);
            return zs
                .iter()
                .map(|&z| if self.in_support(z) { table[z as usize] } else { f64::NEG_INFINITY })
                .collect();
        }
        zs.iter().map(|&z| self.ln_pdf(z)).collect()
    }

    /// Log density of a single observation at signed distance `d` from zero.
    fn ln_single(&self, i: usize, d: f64) -> f64 {
        let x = self.sign * d;
        let (l, a) = self.nat[i];
        l * x - a + self.spec.log_carrier(x)
    }

    /// Log density of the sum of the first `m` observations at distance `d`.
    fn convolve(&self, m: usize, d: f64, pair: Option<(f64, f64)>) -> f64 {
        if !(d > 0.0) {
            return f64::NEG_INFINITY;
        }
        if m == 1 {
            return self.ln_single(0, d);
        }
        if m == 2 {
            if let Some((a, b)) = pair {
                let two = self.pair_density(a, b);
                return two.ln_pdf(self.sign * d);
            }
        }
        log_tanh_sinh(d, |left, right| self.convolve(m - 1, left, pair) + self.ln_single(m - 1, right))
    }

    fn pair_density(&self, a: f64, b: f64) -> SumDensity {
        let mu = [a * self.sign, b * self.sign];
        SumDensity::new(&self.spec, &mu).expect("pair means are valid")
    }
}

/// Poisson-binomial log pmf on `0..=k`.
fn poisson_binomial(mu: &[f64]) -> Vec<f64> {
    let mut p = vec![1.0];
    for &m in mu {
        let mut next = vec![0.0; p.len() + 1];
        for (j, &v) in p.iter().enumerate() {
            next[j] += v * (1.0 - m);
            next[j + 1] += v * m;
        }
        p = next;
    }
    p.into_iter().map(f64::ln).collect()
}

/// Log pmf on `0..=top` of a sum of geometric variables, adding one
/// variable at a time with `g(z) = p f(z) + q g(z - 1)`.
fn geo_chain(mu: &[f64], top: usize) -> Vec<f64> {
    let ln_q0 = (mu[0] / (1.0 + mu[0])).ln();
    let ln_p0 = -mu[0].ln_1p();
    let mut f: Vec<f64> = (0..=top).map(|z| ln_p0 + z as f64 * ln_q0).collect();
    for &m in &mu[1..] {
        let ln_p = -m.ln_1p();
        let ln_q = (m / (1.0 + m)).ln();
        let mut g = vec![f64::NEG_INFINITY; top + 1];
        g[0] = ln_p + f[0];
        for z in 1..=top {
            g[z] = log_add_exp(ln_p + f[z], ln_q + g[z - 1]);
        }
        f = g;
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Quad;
    use approx::assert_relative_eq;

    #[test]
    fn spec_examples() {
        let p = SumDensity::new(&FamilySpec::Poisson, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(p.log_pdf(0.0).unwrap(), -2.0, max_relative = 1e-15);
        let b = SumDensity::new(&FamilySpec::Bernoulli, &[0.5, 0.5]).unwrap();
        assert_relative_eq!(b.log_pdf(1.0).unwrap().exp(), 0.5, max_relative = 1e-15);
        assert!(b.log_pdf(3.0).is_err());
    }

    #[test]
    fn closed_pairs_match_convolution() {
        let q = Quad::default();
        let cases: Vec<(FamilySpec, [f64; 2], Vec<f64>)> = vec![
            (FamilySpec::Exponential, [0.5, 0.25], vec![0.01, 1.0, 7.0]),
            (FamilySpec::GaussianFreeVariance { mean: 0.0 }, [2.0, 6.0], vec![0.01, 1.0, 30.0]),
            (FamilySpec::BetaFixedAlpha { alpha: 1.0 }, [-1.0, -1.0 / 3.0], vec![-0.05, -2.0]),
            (FamilySpec::BetaFixedAlpha { alpha: 2.5 }, [-1.0, -1.0 / 3.0], vec![-0.05, -2.0]),
        ];
        for (spec, mu, zs) in cases {
            let sd = SumDensity::new(&spec, &mu).unwrap();
            for z in zs {
                // Direct convolution integral over x1 on (0, z) or (z, 0).
                let len = z.abs();
                let s = z.signum();
                let direct = log_tanh_sinh(len, |a, b| {
                    spec.log_pdf_unchecked(mu[0], s * a) + spec.log_pdf_unchecked(mu[1], s * b)
                });
                assert_relative_eq!(sd.ln_pdf(z), direct, max_relative = 1e-9, epsilon = 1e-10);
            }
            let dom = spec.z_domain(2, spec.quad_scale(&mu));
            let mass = q.log_integrate(&dom, mu[0] + mu[1], |z| sd.ln_pdf(z));
            assert!(mass.abs() < 1e-8, "{}: mass {mass}", spec.id());
        }
        let g = SumDensity::new(&FamilySpec::Geometric, &[10.0 / 3.0, 1.25]).unwrap();
        let chain = geo_chain(&[10.0 / 3.0, 1.25], 40);
        for z in [0usize, 3, 40] {
            let direct = (0..=z)
                .map(|x| {
                    FamilySpec::Geometric.log_pdf_unchecked(10.0 / 3.0, x as f64)
                        + FamilySpec::Geometric.log_pdf_unchecked(1.25, (z - x) as f64)
                })
                .fold(f64::NEG_INFINITY, log_add_exp);
            assert_relative_eq!(g.ln_pdf(z as f64), direct, max_relative = 1e-12);
            assert_relative_eq!(chain[z], direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn longer_sums_normalize() {
        let q = Quad::default();
        let cases: Vec<(FamilySpec, Vec<f64>)> = vec![
            (FamilySpec::Exponential, vec![0.5, 0.25, 1.0]),
            (FamilySpec::GaussianFreeVariance { mean: 0.0 }, vec![0.5, 0.25, 1.0]),
            (FamilySpec::Geometric, vec![0.5, 2.0, 1.0]),
            (FamilySpec::Bernoulli, vec![0.2, 0.5, 0.9]),
            (FamilySpec::Exponential, vec![0.5, 0.5, 0.5]),
        ];
        for (spec, mu) in cases {
            let sd = SumDensity::new(&spec, &mu).unwrap();
            let dom = spec.z_domain(mu.len(), spec.quad_scale(&mu));
            let anchor: f64 = mu.iter().sum();
            let mass = q.log_integrate(&dom, anchor, |z| sd.ln_pdf(z));
            assert!(mass.abs() < 1e-8, "{} {:?}: mass {mass}", spec.id(), mu);
            let m1 = q.integrate(&dom, anchor, |z| (sd.ln_pdf(z), z)).unwrap();
            assert_relative_eq!(m1, anchor, max_relative = 1e-7);
        }
    }
}
