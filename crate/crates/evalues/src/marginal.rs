//! One-dimensional reductions of block expectations.
//!
//! With `r_mu0(z) = exp(lambda(mu0) z - k A(mu0))`, the i.i.d. null density of
//! a block is `r_mu0(Z) prod h(x_j)`, so any statistic whose numerator is
//! `p_mu` and whose denominator depends on the block only through `Z` has
//! null expectation `E_mu[r_mu0(Z) / r_W(Z)]`, a single integral against the
//! law of `Z` under the alternative. The i.i.d. projection factorizes over
//! coordinates instead.

use crate::error::{Error, Result};
use crate::expfam::{Alternative, FamilySpec, SumDensity};
use crate::quad::{Domain, Quad};
use crate::ripr::mixture::log_r;
use crate::special::LogSum;
use std::collections::HashMap;
use std::sync::Mutex;

/// `phi(e^d)` with `phi(t) = t log t - t + 1`, accurate for small `d`.
#[inline]
pub(crate) fn phi_exp(d: f64) -> f64 {
    if d.abs() < 1e-3 {
        // d e^d - (e^d - 1) = d^2/2 + d^3/3 + d^4/8 + d^5/30 + ...
        let d2 = d * d;
        d2 * (0.5 + d * (1.0 / 3.0 + d * (0.125 + d * (1.0 / 30.0 + d / 144.0))))
    } else {
        d * d.exp() - d.exp_m1()
    }
}

/// `(log weight, value)` with `exp(log weight) * value = exp(l) phi(e^d)`;
/// for large `d` the factor `e^d` moves into the weight.
#[inline]
fn phi_term(l: f64, d: f64) -> (f64, f64) {
    if d > 1.0 {
        (l + d, d - 1.0 + (-d).exp())
    } else {
        (l, phi_exp(d))
    }
}

/// Law of `Z` under the alternative and under `<mu0*>`, on a shared node lattice.
pub struct Marginal {
    pub(crate) spec: FamilySpec,
    pub(crate) mu: Vec<f64>,
    pub(crate) mu0_star: f64,
    pub(crate) k: usize,
    pub(crate) quad: Quad,
    pub(crate) dom: Domain,
    sd_mu: SumDensity,
    sd_star: SumDensity,
    memo: Option<Mutex<HashMap<i64, (f64, f64)>>>,
}

impl Marginal {
    pub fn new(spec: &FamilySpec, alt: &Alternative) -> Result<Self> {
        Marginal::with_quad(spec, alt, Quad::default())
    }

    pub fn with_quad(spec: &FamilySpec, alt: &Alternative, quad: Quad) -> Result<Self> {
        let k = alt.k();
        let sd_mu = SumDensity::new(spec, alt.mu())?;
        let star = vec![alt.mu0_star(); k];
        let sd_star = SumDensity::new(spec, &star)?;
        let scale = k as f64 * spec.quad_scale(alt.mu()).max(f64::MIN_POSITIVE);
        let scale = if matches!(spec, FamilySpec::GaussianFreeMean { .. }) {
            spec.quad_scale(alt.mu()) * (k as f64).sqrt()
        } else {
            scale
        };
        let memo = (sd_mu.is_expensive() || sd_star.is_expensive()).then(|| Mutex::new(HashMap::new()));
        Ok(Marginal {
            spec: *spec,
            mu: alt.mu().to_vec(),
            mu0_star: alt.mu0_star(),
            k,
            quad,
            dom: spec.z_domain(k, scale),
            sd_mu,
            sd_star,
            memo,
        })
    }

    pub fn domain(&self) -> Domain {
        self.dom
    }

    /// `(log p_{mu;Z}(z), log p_{<mu0*>;Z}(z))` at node `n`.
    pub(crate) fn ln_pz(&self, n: i64, z: f64) -> (f64, f64) {
        match &self.memo {
            None => (self.sd_mu.ln_pdf(z), self.sd_star.ln_pdf(z)),
            Some(m) => {
                if let Some(v) = m.lock().expect("memo lock").get(&n) {
                    return *v;
                }
                let v = (self.sd_mu.ln_pdf(z), self.sd_star.ln_pdf(z));
                m.lock().expect("memo lock").insert(n, v);
                v
            }
        }
    }

    /// `log r_mu0(z)`.
    #[inline]
    pub(crate) fn lr(&self, mu0: f64, z: f64) -> f64 {
        self.spec.lambda(mu0) * z - self.k as f64 * self.spec.log_partition_at_mean(mu0)
    }

    fn anchor_for(&self, mu0: f64) -> f64 {
        self.k as f64 * mu0
    }

    /// `E_<mu0>[p_mu / p_W]` for a mixture given by its terms; `+inf` when
    /// the integral diverges.
    pub fn expect_mixture(&self, terms: &[(f64, f64, f64)], mu0: f64) -> f64 {
        let l0 = self.spec.lambda(mu0);
        let ka0 = self.k as f64 * self.spec.log_partition_at_mean(mu0);
        let anchor = self.anchor_for(mu0);
        let v = self.quad.log_integrate_indexed(&self.dom, anchor, |n, z| {
            let (lm, _) = self.ln_pz(n, z);
            if lm == f64::NEG_INFINITY {
                return lm;
            }
            lm + l0 * z - ka0 - log_r(terms, z)
        });
        v.exp()
    }

    /// `E_<mu0>[S_cond]`, computed as `integral p_{<mu0*>;Z} r_mu0 / r_mu0*`.
    pub fn expect_cond(&self, mu0: f64) -> f64 {
        let d_l = self.spec.lambda(mu0) - self.spec.lambda(self.mu0_star);
        let d_a = self.k as f64
            * (self.spec.log_partition_at_mean(mu0) - self.spec.log_partition_at_mean(self.mu0_star));
        let v = self.quad.log_integrate_indexed(&self.dom, self.anchor_for(mu0), |n, z| {
            let (_, ls) = self.ln_pz(n, z);
            if ls == f64::NEG_INFINITY {
                return ls;
            }
            ls + d_l * z - d_a
        });
        v.exp()
    }

    /// `D(P_mu || P_W) = sum_i D(P_mui || P_mu0*) + E_mu[log r_mu0*(Z) - log r_W(Z)]`.
    pub fn kl_to_mixture(&self, terms: &[(f64, f64, f64)]) -> Result<f64> {
        let pseudo: f64 = self.mu.iter().map(|&m| self.spec.kl_unchecked(m, self.mu0_star)).sum();
        let l_star = self.spec.lambda(self.mu0_star);
        let ka_star = self.k as f64 * self.spec.log_partition_at_mean(self.mu0_star);
        let anchor: f64 = self.mu.iter().sum();
        let corr = self.quad.integrate(&self.dom, anchor, |z| {
            let n = self.quad.index_of(&self.dom, z);
            let (lm, _) = self.ln_pz(n, z);
            if lm == f64::NEG_INFINITY {
                return (lm, 0.0);
            }
            (lm, l_star * z - ka_star - log_r(terms, z))
        })?;
        Ok((pseudo + corr).max(0.0))
    }

    /// `D(P_{mu;Z} || P_{<mu0*>;Z})`, the growth-rate gap between the
    /// pseudo and conditional statistics.
    pub fn gap_cond(&self) -> Result<f64> {
        let anchor: f64 = self.mu.iter().sum();
        let g = self.quad.integrate(&self.dom, anchor, |z| {
            let n = self.quad.index_of(&self.dom, z);
            let (lm, ls) = self.ln_pz(n, z);
            if ls == f64::NEG_INFINITY {
                return (ls, 0.0);
            }
            if lm == f64::NEG_INFINITY {
                return (ls, 1.0);
            }
            phi_term(ls, lm - ls)
        })?;
        Ok(g.max(0.0))
    }
}

/// `E_<mu0>[S_pseudo] = prod_i exp(A(lambda_i + lambda_0 - lambda_*) - A_i + A_* - A_0)`;
/// `+inf` when a tilted parameter leaves the natural space.
pub fn expect_pseudo(spec: &FamilySpec, alt: &Alternative, mu0: f64) -> f64 {
    let l0 = spec.lambda(mu0);
    let ls = spec.lambda(alt.mu0_star());
    let a0 = spec.log_partition_at_mean(mu0);
    let a_s = spec.log_partition_at_mean(alt.mu0_star());
    let mut total = 0.0;
    for &m in alt.mu() {
        let lt = spec.lambda(m) + l0 - ls;
        match spec.log_partition(lt) {
            Ok(a) => total += a - spec.log_partition_at_mean(m) + a_s - a0,
            Err(_) => return f64::INFINITY,
        }
    }
    total.exp()
}

fn x_quad_domain(spec: &FamilySpec, mus: &[f64]) -> Domain {
    spec.x_domain(spec.quad_scale(mus).max(f64::MIN_POSITIVE))
}

/// `E_<mu0>[S_gro(iid)] = prod_i integral p_mu0 p_mui / m`, with `m` the
/// average of the alternative densities.
pub fn expect_iid(spec: &FamilySpec, alt: &Alternative, mu0: f64) -> f64 {
    let mus = alt.mu();
    let k = mus.len();
    let mut scales = mus.to_vec();
    scales.push(mu0);
    let dom = x_quad_domain(spec, &scales);
    let quad = Quad::default();
    let lam: Vec<f64> = mus.iter().map(|&m| spec.lambda(m)).collect();
    let a: Vec<f64> = mus.iter().map(|&m| spec.log_partition_at_mean(m)).collect();
    let l0 = spec.lambda(mu0);
    let a0 = spec.log_partition_at_mean(mu0);
    let ln_k = (k as f64).ln();
    let mut total = 0.0;
    for i in 0..k {
        let v = quad.log_integrate(&dom, mu0, |x| {
            let mut acc = LogSum::new();
            for j in 0..k {
                acc.add(lam[j] * x - a[j]);
            }
            l0 * x - a0 + spec.log_carrier(x) + lam[i] * x - a[i] - (acc.value() - ln_k)
        });
        total += v;
    }
    total.exp()
}

/// `k D(M || P_mu0*)` with `M` the average of the alternative laws: the
/// growth-rate gap between the pseudo and i.i.d. projection statistics.
pub fn gap_iid(spec: &FamilySpec, alt: &Alternative) -> Result<f64> {
    let mus = alt.mu();
    let k = mus.len();
    let s = alt.mu0_star();
    let dom = x_quad_domain(spec, mus);
    let quad = Quad::default();
    let ls = spec.lambda(s);
    let a_s = spec.log_partition_at_mean(s);
    let dl: Vec<f64> = mus.iter().map(|&m| spec.lambda(m) - ls).collect();
    let da: Vec<f64> = mus.iter().map(|&m| spec.log_partition_at_mean(m) - a_s).collect();
    let ln_k = (k as f64).ln();
    let v = quad.integrate(&dom, s, |x| {
        let le = ls * x - a_s + spec.log_carrier(x);
        let mut acc = LogSum::new();
        for j in 0..k {
            acc.add(dl[j] * x - da[j]);
        }
        phi_term(le, acc.value() - ln_k)
    })?;
    if !v.is_finite() {
        return Err(Error::Quadrature("i.i.d. gap integral is not finite".into()));
    }
    Ok(k as f64 * v.max(0.0))
}
