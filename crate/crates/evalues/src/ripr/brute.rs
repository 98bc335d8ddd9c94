use super::{default_component_grid, default_mu0_grid, sup_over_grid, Certificate, Component, Grid, Method, MixtureNull};
use crate::error::{Error, Result};
use crate::expfam::{Alternative, FamilySpec};
use crate::marginal::Marginal;
use crate::special::log_add_exp;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceConfig {
    /// Number of equally spaced weights in `[0, 1]`.
    pub alpha_grid: usize,
    /// Component grid; defaults to [`default_component_grid`] with 100 points.
    #[serde(default)]
    pub component_grid: Option<Grid>,
    /// Certification grid; defaults to [`default_mu0_grid`] with 1000 points.
    #[serde(default)]
    pub mu0_grid: Option<Grid>,
    /// Rows of the certification grid used for the first screening pass.
    pub screen_rows: usize,
    /// Candidates re-ranked on the full grid with fixed nodes.
    pub rerank: usize,
    /// Candidates certified with adaptive quadrature.
    pub certify: usize,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        BruteForceConfig {
            alpha_grid: 100,
            component_grid: None,
            mu0_grid: None,
            screen_rows: 60,
            rerank: 64,
            certify: 8,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Cand {
    value: f64,
    alpha: usize,
    i: usize,
    j: usize,
}

impl Eq for Cand {}

impl PartialOrd for Cand {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cand {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value)
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let o = 4 * c;
        acc[0] += a[o] * b[o];
        acc[1] += a[o + 1] * b[o + 1];
        acc[2] += a[o + 2] * b[o + 2];
        acc[3] += a[o + 3] * b[o + 3];
    }
    let mut s = acc[0] + acc[1] + acc[2] + acc[3];
    for o in 4 * chunks..a.len() {
        s += a[o] * b[o];
    }
    s
}

/// Minimizes the worst-case null expectation over two-component mixtures
/// `alpha P_<mu01> + (1 - alpha) P_<mu02>` on grids.
///
/// All mixtures are first screened on a subset of the certification grid
/// with a fixed node set, the best are re-ranked on the full grid, and the
/// leaders are certified with adaptive quadrature. The best certified
/// mixture is returned.
pub fn brute_force_two_component(spec: &FamilySpec, alt: &Alternative, cfg: &BruteForceConfig) -> Result<MixtureNull> {
    if cfg.alpha_grid < 2 {
        return Err(Error::InvalidParameter("alpha grid needs at least 2 points".into()));
    }
    let comp_grid = cfg.component_grid.unwrap_or_else(|| default_component_grid(spec, alt, 100));
    let mu0_grid = cfg.mu0_grid.unwrap_or_else(|| default_mu0_grid(spec, alt, 1000));
    comp_grid.validate(spec, "component grid")?;
    mu0_grid.validate(spec, "mu0 grid")?;
    let comps = comp_grid.points();
    let mu0s = mu0_grid.points();
    let m = Marginal::new(spec, alt)?;
    let star = alt.mu0_star();
    let (c_lo, c_hi) = (comps[0], comps[comps.len() - 1]);
    let reference = |z: f64| log_add_exp(log_add_exp(m.lr(c_lo, z), m.lr(c_hi, z)), m.lr(star, z));
    let ln_pz = |z: f64| m.ln_pz(m.quad.index_of(&m.dom, z), z).0;

    let n_rows = mu0s.len();
    let screen: Vec<usize> = if cfg.screen_rows >= n_rows || cfg.screen_rows == 0 {
        (0..n_rows).collect()
    } else {
        (0..cfg.screen_rows)
            .map(|r| (r * (n_rows - 1)) / (cfg.screen_rows - 1).max(1))
            .collect()
    };

    // Index range covering every screened row's integrand.
    let mut lo_idx = i64::MAX;
    let mut hi_idx = i64::MIN;
    let anchor: f64 = alt.mu().iter().sum();
    let mut extend = |nodes: &crate::quad::Nodes| {
        if let (Some(&a), Some(&b)) = (nodes.index.first(), nodes.index.last()) {
            lo_idx = lo_idx.min(a);
            hi_idx = hi_idx.max(b);
        }
    };
    if let Ok(nodes) = m.quad.nodes(&m.dom, anchor, ln_pz) {
        extend(&nodes);
    }
    for &r in &screen {
        let mu0 = mu0s[r];
        let env = |z: f64| ln_pz(z) + m.lr(mu0, z) - reference(z);
        if let Ok(nodes) = m.quad.nodes(&m.dom, alt.k() as f64 * mu0, env) {
            extend(&nodes);
        }
    }
    if lo_idx > hi_idx {
        return Err(Error::Quadrature("no node range found for the mixture search".into()));
    }
    let mut zs = Vec::new();
    let mut base = Vec::new();
    for n in lo_idx..=hi_idx {
        if let Some((z, lw)) = m.quad.node(&m.dom, n) {
            let lp = m.ln_pz(n, z).0;
            if lp > f64::NEG_INFINITY {
                zs.push(z);
                base.push(lw + lp - reference(z));
            }
        }
    }
    let clamp = |v: f64| v.clamp(-745.0, 700.0).exp();
    let n0: Vec<Vec<f64>> = mu0s
        .iter()
        .map(|&mu0| zs.iter().zip(&base).map(|(&z, &b)| clamp(b + m.lr(mu0, z))).collect())
        .collect();
    let refs: Vec<f64> = zs.iter().map(|&z| reference(z)).collect();
    let rc: Vec<Vec<f64>> = comps
        .iter()
        .map(|&c| zs.iter().zip(&refs).map(|(&z, &r)| clamp(m.lr(c, z) - r)).collect())
        .collect();
    let alphas: Vec<f64> = (0..cfg.alpha_grid)
        .map(|t| t as f64 / (cfg.alpha_grid - 1) as f64)
        .collect();

    let inv = |a: f64, i: usize, j: usize, out: &mut Vec<f64>| {
        out.clear();
        out.extend(rc[i].iter().zip(&rc[j]).map(|(ri, rj)| {
            let d = a * ri + (1.0 - a) * rj;
            if d > 0.0 {
                1.0 / d
            } else {
                f64::INFINITY
            }
        }));
    };

    // Screening with early rejection against the current cut-off.
    let keep = cfg.rerank.max(cfg.certify).max(1);
    let mut heap: BinaryHeap<Cand> = BinaryHeap::new();
    let mut order = screen.clone();
    let mut v = Vec::with_capacity(zs.len());
    for i in 0..comps.len() {
        for j in i..comps.len() {
            for (t, &a) in alphas.iter().enumerate() {
                // Single-component mixtures appear once.
                if (i == j && t + 1 != alphas.len()) || (i != j && (t == 0 || t + 1 == alphas.len())) {
                    continue;
                }
                let cut = if heap.len() >= keep {
                    heap.peek().map_or(f64::INFINITY, |c| c.value)
                } else {
                    f64::INFINITY
                };
                inv(a, i, j, &mut v);
                let mut worst = f64::NEG_INFINITY;
                let mut rejected = None;
                for (pos, &r) in order.iter().enumerate() {
                    let s = dot(&n0[r], &v);
                    let s = if s.is_nan() { f64::INFINITY } else { s };
                    worst = worst.max(s);
                    if worst >= cut {
                        rejected = Some(pos);
                        break;
                    }
                }
                match rejected {
                    Some(pos) => {
                        if pos > 0 {
                            let r = order.remove(pos);
                            order.insert(0, r);
                        }
                    }
                    None => {
                        heap.push(Cand {
                            value: worst,
                            alpha: t,
                            i,
                            j,
                        });
                        if heap.len() > keep {
                            heap.pop();
                        }
                    }
                }
            }
        }
    }

    // Re-rank on every row of the grid.
    let mut ranked: Vec<Cand> = heap
        .into_vec()
        .into_iter()
        .map(|c| {
            inv(alphas[c.alpha], c.i, c.j, &mut v);
            let worst = n0
                .iter()
                .map(|row| dot(row, &v))
                .map(|s| if s.is_nan() { f64::INFINITY } else { s })
                .fold(f64::NEG_INFINITY, f64::max);
            Cand { value: worst, ..c }
        })
        .collect();
    ranked.sort();

    let build = |c: &Cand| -> Vec<Component> {
        let a = alphas[c.alpha];
        let mut out = Vec::new();
        if c.i == c.j {
            out.push(Component { w: 1.0, mu0: comps[c.i] });
        } else {
            out.push(Component { w: a, mu0: comps[c.i] });
            out.push(Component { w: 1.0 - a, mu0: comps[c.j] });
        }
        out
    };
    let mut best: Option<(f64, f64, Vec<Component>)> = None;
    for c in ranked.iter().take(cfg.certify.max(1)) {
        let components = build(c);
        let mix = MixtureNull {
            components: components.clone(),
            certificate: None,
        };
        let (sup, arg) = sup_over_grid(&m, &mix.terms(spec, alt.k()), &mu0s);
        if sup.is_finite() && best.as_ref().is_none_or(|b| sup < b.0) {
            best = Some((sup, arg, components));
        }
    }
    let Some((sup, arg, components)) = best else {
        return Err(Error::Uncertified(
            "no screened two-component mixture has a finite worst-case expectation; widen the grids".into(),
        ));
    };
    let mut mixture = MixtureNull::new(spec, components)?;
    mixture.certificate = Some(Certificate {
        sup_expectation: sup,
        mu0_grid_size: mu0_grid.count,
        method: Method::BruteForce2,
        argmax_mu0: arg,
        mu0_lo: mu0_grid.lo,
        mu0_hi: mu0_grid.hi,
    });
    Ok(mixture)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..11).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-14);
    }

    #[test]
    fn small_exponential_search_beats_point() {
        let spec = FamilySpec::Exponential;
        let alt = Alternative::new(&spec, vec![0.5, 0.25]).unwrap();
        let cfg = BruteForceConfig {
            alpha_grid: 21,
            component_grid: Some(Grid::new(21, 0.1, 0.8)),
            mu0_grid: Some(Grid::new(100, 0.02, 3.0)),
            screen_rows: 20,
            rerank: 16,
            certify: 4,
        };
        let mix = brute_force_two_component(&spec, &alt, &cfg).unwrap();
        let cert = mix.certificate.unwrap();
        assert!(cert.sup_expectation >= 1.0 - 1e-6);
        assert!(cert.sup_expectation < 1.01, "{}", cert.sup_expectation);
        assert!((mix.weight_sum() - 1.0).abs() < 1e-12);
    }
}
