use super::{default_component_grid, default_mu0_grid, sup_over_grid, Certificate, Component, Grid, Method, MixtureNull};
use crate::error::{Error, Result};
use crate::expfam::{Alternative, FamilySpec};
use crate::marginal::Marginal;
use crate::special::log_add_exp;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiConfig {
    pub max_iters: usize,
    /// Number of weights `j / (n - 1)`, `j = 0..n`, tried per step.
    pub alpha_grid: usize,
    /// Candidate new components; defaults to [`default_component_grid`] with 100 points.
    #[serde(default)]
    pub mu_grid: Option<Grid>,
    /// Certification grid; defaults to [`default_mu0_grid`] with 1000 points.
    #[serde(default)]
    pub mu0_grid: Option<Grid>,
    /// Record the worst-case expectation at every iteration rather than only at the end.
    #[serde(default = "yes")]
    pub trace_sup: bool,
}

fn yes() -> bool {
    true
}

impl Default for LiConfig {
    fn default() -> Self {
        LiConfig {
            max_iters: 15,
            alpha_grid: 100,
            mu_grid: None,
            mu0_grid: None,
            trace_sup: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub kl: f64,
    pub sup_expectation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiOutput {
    pub mixture: MixtureNull,
    pub trace: Vec<TraceRow>,
}

/// Greedy mixture construction: each step mixes the incumbent with one new
/// null point, choosing weight and point on grids to minimize `D(P_mu || P_W)`.
/// Keeping the incumbent (`alpha = 1`) is always a candidate, so the KL trace
/// is nonincreasing.
pub fn li_approximate(spec: &FamilySpec, alt: &Alternative, cfg: &LiConfig) -> Result<LiOutput> {
    if cfg.max_iters == 0 {
        return Err(Error::InvalidParameter("max_iters must be positive".into()));
    }
    if cfg.alpha_grid < 2 {
        return Err(Error::InvalidParameter("alpha grid needs at least 2 points".into()));
    }
    let mu_grid = cfg.mu_grid.unwrap_or_else(|| default_component_grid(spec, alt, 100));
    let mu0_grid = cfg.mu0_grid.unwrap_or_else(|| default_mu0_grid(spec, alt, 1000));
    mu_grid.validate(spec, "component grid")?;
    mu0_grid.validate(spec, "mu0 grid")?;
    let mu0s = mu0_grid.points();

    let m = Marginal::new(spec, alt)?;
    let k = alt.k() as f64;
    let star = alt.mu0_star();
    let anchor: f64 = alt.mu().iter().sum();
    let nodes = m.quad.nodes(&m.dom, anchor, |z| {
        let n = m.quad.index_of(&m.dom, z);
        let lm = m.ln_pz(n, z).0;
        lm + z.abs().ln_1p()
    })?;
    let w: Vec<f64> = nodes
        .index
        .iter()
        .zip(nodes.x.iter().zip(&nodes.lw))
        .map(|(&n, (&z, &lw))| (lw + m.ln_pz(n, z).0).exp())
        .collect();
    let lr_star: Vec<f64> = nodes.x.iter().map(|&z| m.lr(star, z)).collect();
    let pseudo: f64 = alt.mu().iter().map(|&mu| spec.kl_unchecked(mu, star)).sum();
    let kl_of = |l: &[f64]| -> f64 {
        let corr: f64 = w.iter().zip(lr_star.iter().zip(l)).map(|(wi, (s, li))| wi * (s - li)).sum();
        pseudo + corr
    };

    let mut cands = mu_grid.points();
    if !cands.contains(&star) {
        cands.push(star);
    }
    let cand_lr: Vec<Vec<f64>> = cands
        .iter()
        .map(|&c| {
            let lam = spec.lambda(c);
            let ka = k * spec.log_partition_at_mean(c);
            nodes.x.iter().map(|&z| lam * z - ka).collect()
        })
        .collect();

    let loss = |l: &[f64]| -> f64 { -w.iter().zip(l).map(|(wi, li)| wi * li).sum::<f64>() };
    let (mut best_c, mut best_loss) = (0usize, f64::INFINITY);
    for (c, l) in cand_lr.iter().enumerate() {
        let v = loss(l);
        if v < best_loss {
            best_loss = v;
            best_c = c;
        }
    }
    if !best_loss.is_finite() {
        return Err(Error::Iteration {
            iteration: 1,
            message: "KL divergence is not finite for any candidate".into(),
        });
    }
    let mut comps = vec![Component { w: 1.0, mu0: cands[best_c] }];
    let mut incumbent = cand_lr[best_c].clone();

    let sup_of = |comps: &[Component]| -> (f64, f64) {
        let mix = MixtureNull {
            components: comps.to_vec(),
            certificate: None,
        };
        sup_over_grid(&m, &mix.terms(spec, alt.k()), &mu0s)
    };
    let mut trace = Vec::new();
    let mut last_sup = if cfg.trace_sup { Some(sup_of(&comps)) } else { None };
    trace.push(TraceRow {
        iter: 1,
        kl: kl_of(&incumbent).max(0.0),
        sup_expectation: last_sup.map_or(f64::NAN, |s| s.0),
    });

    let alphas: Vec<(f64, f64)> = (0..cfg.alpha_grid - 1)
        .map(|j| {
            let a = j as f64 / (cfg.alpha_grid - 1) as f64;
            (a.ln(), (1.0 - a).ln())
        })
        .collect();
    for iter in 2..=cfg.max_iters {
        if alt.is_null() || trace.last().is_some_and(|r| r.kl == 0.0) {
            break;
        }
        let current = loss(&incumbent);
        let mut best: Option<(f64, usize, usize)> = None;
        let mut best_val = current;
        for (c, lc) in cand_lr.iter().enumerate() {
            for (j, &(la, lb)) in alphas.iter().enumerate() {
                let mut s = 0.0;
                for ((wi, li), lci) in w.iter().zip(&incumbent).zip(lc) {
                    s -= wi * log_add_exp(la + li, lb + lci);
                }
                if s.is_nan() {
                    return Err(Error::Iteration {
                        iteration: iter,
                        message: format!("KL divergence is NaN for candidate {}", cands[c]),
                    });
                }
                if s < best_val {
                    best_val = s;
                    best = Some((s, c, j));
                }
            }
        }
        let Some((_, c, j)) = best else { break };
        let (la, lb) = alphas[j];
        let a = la.exp();
        for comp in comps.iter_mut() {
            comp.w *= a;
        }
        match comps.iter_mut().find(|comp| comp.mu0 == cands[c]) {
            Some(comp) => comp.w += 1.0 - a,
            None => comps.push(Component { w: 1.0 - a, mu0: cands[c] }),
        }
        comps.retain(|comp| comp.w > 0.0);
        for (li, lci) in incumbent.iter_mut().zip(&cand_lr[c]) {
            *li = log_add_exp(la + *li, lb + lci);
        }
        last_sup = if cfg.trace_sup { Some(sup_of(&comps)) } else { None };
        let prev = trace.last().map_or(f64::INFINITY, |r| r.kl);
        trace.push(TraceRow {
            iter,
            kl: kl_of(&incumbent).max(0.0).min(prev),
            sup_expectation: last_sup.map_or(f64::NAN, |s| s.0),
        });
    }

    let (sup, arg) = match last_sup {
        Some(s) => s,
        None => {
            let s = sup_of(&comps);
            if let Some(row) = trace.last_mut() {
                row.sup_expectation = s.0;
            }
            s
        }
    };
    let total: f64 = comps.iter().map(|c| c.w).sum();
    for c in comps.iter_mut() {
        c.w /= total;
    }
    let mut mixture = MixtureNull::new(spec, comps)?;
    mixture.certificate = Some(Certificate {
        sup_expectation: sup,
        mu0_grid_size: mu0_grid.count,
        method: Method::Li,
        argmax_mu0: arg,
        mu0_lo: mu0_grid.lo,
        mu0_hi: mu0_grid.hi,
    });
    Ok(LiOutput { mixture, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_alternative_stops_at_first_iteration() {
        let spec = FamilySpec::Exponential;
        let alt = Alternative::new(&spec, vec![0.5, 0.5]).unwrap();
        let cfg = LiConfig {
            mu0_grid: Some(Grid::new(50, 0.05, 3.0)),
            ..LiConfig::default()
        };
        let out = li_approximate(&spec, &alt, &cfg).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.mixture.components.len(), 1);
        assert_eq!(out.mixture.components[0].mu0, 0.5);
        assert!(out.trace[0].kl.abs() < 1e-12);
    }

    #[test]
    fn analytic_families_need_one_component() {
        for (spec, mu) in [
            (FamilySpec::Poisson, vec![1.0, 3.0]),
            (FamilySpec::GaussianFreeMean { variance: 1.0 }, vec![0.0, 1.0]),
            (FamilySpec::Bernoulli, vec![0.5, 0.25]),
        ] {
            let alt = Alternative::new(&spec, mu).unwrap();
            let cfg = LiConfig {
                max_iters: 1,
                mu0_grid: Some(default_mu0_grid(&spec, &alt, 200)),
                ..LiConfig::default()
            };
            let out = li_approximate(&spec, &alt, &cfg).unwrap();
            assert_eq!(out.mixture.components[0].mu0, alt.mu0_star());
            let sup = out.trace[0].sup_expectation;
            assert!(sup <= 1.0 + 1e-6, "{}: {sup}", spec.id());
        }
    }
}
