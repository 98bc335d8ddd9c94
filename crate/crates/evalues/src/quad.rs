//! Adaptive quadrature on the supports of the families.
//!
//! Every domain carries a fixed, globally indexed node lattice:
//!
//! - `Lattice`: the integers with counting measure.
//! - `HalfLine`: `x = sign * scale * softplus(n h)`. Near zero the nodes are
//!   geometrically spaced, which resolves power-law endpoint behaviour; far out
//!   they are equally spaced with step `scale * h`. The trapezoid rule in the
//!   `u = n h` coordinate converges geometrically for integrands analytic in a
//!   strip around the real axis.
//! - `Line`: equally spaced nodes with step `scale * h`.
//!
//! Integration starts from the largest term found by a coarse multiscale scan
//! around an anchor and walks outwards until terms fall `drop` nats below the
//! running maximum. A walk that exhausts its node budget extrapolates the
//! remaining tail geometrically, or reports divergence when terms stop
//! decreasing. Because nodes are indexed globally, tabulated integrand values
//! can be shared between integrals on the same domain.

use crate::error::{Error, Result};
use crate::special::{log1m_exp, softplus, softplus_inv, LogSum};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Integers in `lo..=hi` (unbounded above when `hi` is `None`).
    Lattice { lo: i64, hi: Option<i64> },
    /// `(0, inf)` for `sign = 1`, `(-inf, 0)` for `sign = -1`.
    HalfLine { sign: f64, scale: f64 },
    /// The real line.
    Line { scale: f64 },
}

/// Lowest admissible `u = n h` on a half line; below it nodes underflow.
const U_MIN: f64 = -700.0;

#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub h: f64,
    pub drop: f64,
    pub patience: usize,
    pub max_nodes: usize,
}

impl Default for Quad {
    fn default() -> Self {
        Quad {
            h: 0.1,
            drop: 46.0,
            patience: 4,
            max_nodes: 1 << 17,
        }
    }
}

/// A set of quadrature nodes with log weights, in increasing index order.
#[derive(Debug, Clone, Default)]
pub struct Nodes {
    pub index: Vec<i64>,
    pub x: Vec<f64>,
    pub lw: Vec<f64>,
}

impl Nodes {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

enum Walk {
    Stopped,
    Boundary,
    Exhausted { last: f64, slope: f64 },
}

impl Quad {
    pub fn with_step(h: f64) -> Self {
        Quad {
            h,
            ..Quad::default()
        }
    }

    /// Node position and log weight at index `n`, or `None` outside the domain.
    #[inline]
    pub fn node(&self, dom: &Domain, n: i64) -> Option<(f64, f64)> {
        match *dom {
            Domain::Lattice { lo, hi } => {
                if n < lo || hi.is_some_and(|h| n > h) {
                    None
                } else {
                    Some((n as f64, 0.0))
                }
            }
            Domain::HalfLine { sign, scale } => {
                let u = n as f64 * self.h;
                if u < U_MIN {
                    return None;
                }
                let x = sign * scale * softplus(u);
                Some((x, (scale * self.h).ln() - softplus(-u)))
            }
            Domain::Line { scale } => {
                let step = scale * self.h;
                Some((n as f64 * step, step.ln()))
            }
        }
    }

    /// Index of the node nearest to `x`, clamped into the domain.
    pub fn index_of(&self, dom: &Domain, x: f64) -> i64 {
        match *dom {
            Domain::Lattice { lo, hi } => {
                let mut n = if x.is_finite() { x.round() as i64 } else { lo };
                n = n.max(lo);
                if let Some(h) = hi {
                    n = n.min(h);
                }
                n
            }
            Domain::HalfLine { scale, .. } => {
                let y = (x.abs() / scale).max(1e-300);
                let u = softplus_inv(y).max(U_MIN);
                (u / self.h).round() as i64
            }
            Domain::Line { scale } => (x / (scale * self.h)).round() as i64,
        }
    }

    fn lowest_index(&self, dom: &Domain) -> Option<i64> {
        match *dom {
            Domain::Lattice { lo, .. } => Some(lo),
            Domain::HalfLine { .. } => Some((U_MIN / self.h).ceil() as i64),
            Domain::Line { .. } => None,
        }
    }

    fn highest_index(&self, dom: &Domain) -> Option<i64> {
        match *dom {
            Domain::Lattice { hi, .. } => hi,
            _ => None,
        }
    }

    /// Index of the largest term among a coarse multiscale scan around `anchor`.
    fn scan(&self, dom: &Domain, anchor: f64, term: &mut impl FnMut(i64) -> f64) -> (i64, f64) {
        let mut cands: Vec<i64> = Vec::with_capacity(120);
        cands.push(self.index_of(dom, anchor));
        match *dom {
            Domain::Lattice { lo, hi } => {
                let a = anchor.abs().max(1.0);
                for j in -30..=30 {
                    cands.push(self.index_of(dom, a * 2f64.powf(j as f64 * 0.5)));
                }
                cands.push(lo);
                if let Some(h) = hi {
                    for n in lo..=h.min(lo + 64) {
                        cands.push(n);
                    }
                }
            }
            Domain::HalfLine { sign, scale } => {
                let a = if anchor * sign > 0.0 { anchor.abs() } else { scale };
                for j in -60..=60 {
                    cands.push(self.index_of(dom, a * 2f64.powf(j as f64 * 0.5)));
                }
            }
            Domain::Line { scale } => {
                cands.push(self.index_of(dom, anchor));
                for j in 0..=40 {
                    let d = scale * 2f64.powf(j as f64 * 0.5 - 4.0);
                    cands.push(self.index_of(dom, anchor + d));
                    cands.push(self.index_of(dom, anchor - d));
                }
            }
        }
        let mut best = (cands[0], f64::NEG_INFINITY);
        for n in cands {
            let t = term(n);
            if t > best.1 || t.is_nan() {
                best = (n, t);
                if t.is_nan() {
                    break;
                }
            }
        }
        best
    }

    /// Walk from `start` in direction `dir` (±1) feeding terms to `sink`.
    fn walk(
        &self,
        dom: &Domain,
        start: i64,
        dir: i64,
        peak: &mut f64,
        term: &mut impl FnMut(i64) -> f64,
        sink: &mut impl FnMut(i64, f64),
    ) -> Walk {
        let lo = self.lowest_index(dom);
        let hi = self.highest_index(dom);
        let mut below = 0usize;
        let mut prev = f64::NAN;
        let mut prev2 = f64::NAN;
        let mut n = start;
        for _ in 0..self.max_nodes {
            n += dir;
            if (dir < 0 && lo.is_some_and(|l| n < l)) || (dir > 0 && hi.is_some_and(|h| n > h)) {
                return Walk::Boundary;
            }
            let t = term(n);
            if t.is_nan() {
                sink(n, t);
                return Walk::Stopped;
            }
            sink(n, t);
            if t > *peak {
                *peak = t;
            }
            if t < *peak - self.drop {
                below += 1;
                if below >= self.patience {
                    return Walk::Stopped;
                }
            } else {
                below = 0;
            }
            prev2 = prev;
            prev = t;
        }
        Walk::Exhausted {
            last: prev,
            slope: prev - prev2,
        }
    }

    /// `log ∫ exp(f) dx` over `dom`, with `f` the log integrand with respect to
    /// counting or Lebesgue measure. Returns `+inf` for divergent integrals.
    pub fn log_integrate(&self, dom: &Domain, anchor: f64, f: impl Fn(f64) -> f64) -> f64 {
        self.log_integrate_indexed(dom, anchor, |_, x| f(x))
    }

    /// As [`Quad::log_integrate`], with the integrand also receiving the node index.
    pub fn log_integrate_indexed(&self, dom: &Domain, anchor: f64, f: impl Fn(i64, f64) -> f64) -> f64 {
        let mut term = |n: i64| match self.node(dom, n) {
            Some((x, lw)) => lw + f(n, x),
            None => f64::NEG_INFINITY,
        };
        let (n0, t0) = self.scan(dom, anchor, &mut term);
        if t0.is_nan() || t0 == f64::INFINITY {
            return f64::INFINITY;
        }
        let mut acc = LogSum::new();
        acc.add(t0);
        let mut peak = t0;
        for dir in [1i64, -1] {
            let mut diverged = false;
            let outcome = self.walk(dom, n0, dir, &mut peak, &mut term, &mut |_, t| {
                if t.is_nan() {
                    diverged = true;
                } else {
                    acc.add(t)
                }
            });
            if diverged {
                return f64::INFINITY;
            }
            if let Walk::Exhausted { last, slope } = outcome {
                if slope < -1e-12 && last.is_finite() {
                    acc.add(last + slope - log1m_exp(slope));
                } else if last > peak - self.drop {
                    return f64::INFINITY;
                }
            }
        }
        acc.value()
    }

    /// `∫ exp(le(x)) g(x) dx` where `f(x) = (le, g)`. Node selection uses the
    /// envelope `le + ln(1 + |g|)`.
    pub fn integrate(&self, dom: &Domain, anchor: f64, f: impl Fn(f64) -> (f64, f64)) -> Result<f64> {
        let cell = std::cell::RefCell::new(Vec::<(f64, f64)>::new());
        let mut term = |n: i64| match self.node(dom, n) {
            Some((x, lw)) => {
                let (le, g) = f(x);
                let t = lw + le;
                if t.is_finite() && g != 0.0 {
                    cell.borrow_mut().push((t, g));
                }
                if g.is_nan() {
                    f64::NAN
                } else {
                    t + g.abs().ln_1p()
                }
            }
            None => f64::NEG_INFINITY,
        };
        let (n0, t0) = self.scan(dom, anchor, &mut term);
        cell.borrow_mut().clear();
        if t0.is_nan() {
            return Err(Error::Quadrature("integrand is NaN".into()));
        }
        // Re-evaluate the start node so that every node is recorded once.
        let _ = term(n0);
        let mut peak = t0;
        for dir in [1i64, -1] {
            let mut bad = false;
            let outcome = self.walk(dom, n0, dir, &mut peak, &mut term, &mut |_, t| {
                if t.is_nan() {
                    bad = true;
                }
            });
            if bad {
                return Err(Error::Quadrature("integrand is NaN".into()));
            }
            if let Walk::Exhausted { last, .. } = outcome {
                if last > peak - self.drop {
                    return Err(Error::Quadrature("integrand tail does not decay".into()));
                }
            }
        }
        let terms = cell.into_inner();
        let m = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let mut s = crate::special::KahanSum::default();
        for (t, g) in terms {
            s.add((t - m).exp() * g);
        }
        Ok(s.value() * m.exp())
    }

    /// Nodes covering the region where the log envelope `env` lies within
    /// `drop` nats of its maximum.
    pub fn nodes(&self, dom: &Domain, anchor: f64, env: impl Fn(f64) -> f64) -> Result<Nodes> {
        let mut term = |n: i64| match self.node(dom, n) {
            Some((x, lw)) => lw + env(x),
            None => f64::NEG_INFINITY,
        };
        let (n0, t0) = self.scan(dom, anchor, &mut term);
        if !t0.is_finite() {
            return Err(Error::Quadrature(format!("envelope not finite near anchor {anchor}")));
        }
        let mut idx = vec![n0];
        let mut peak = t0;
        for dir in [1i64, -1] {
            let outcome = self.walk(dom, n0, dir, &mut peak, &mut term, &mut |n, _| idx.push(n));
            if let Walk::Exhausted { last, .. } = outcome {
                if last > peak - self.drop {
                    return Err(Error::Quadrature("envelope tail does not decay".into()));
                }
            }
        }
        idx.sort_unstable();
        let mut out = Nodes::default();
        for n in idx {
            let (x, lw) = self.node(dom, n).expect("walked nodes lie in the domain");
            out.index.push(n);
            out.x.push(x);
            out.lw.push(lw);
        }
        Ok(out)
    }
}

/// Tanh-sinh rule on `(0, len)`: returns `log ∫ exp(f(a, len - a)) da`, where
/// `f` receives both the distance from the left and from the right endpoint,
/// computed without cancellation.
pub fn log_tanh_sinh(len: f64, f: impl Fn(f64, f64) -> f64) -> f64 {
    const H: f64 = 1.0 / 20.0;
    const T_MAX: f64 = 6.5;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let ln_len = len.ln();
    let eval = |t: f64| {
        let s = half_pi * t.sinh();
        let left = len / (1.0 + (-2.0 * s).exp());
        let right = len / (1.0 + (2.0 * s).exp());
        if left <= 0.0 || right <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let ln_cosh_s = s.abs() + (-2.0 * s.abs()).exp().ln_1p() - std::f64::consts::LN_2;
        let lw = ln_len - std::f64::consts::LN_2 + half_pi.ln() + ln_cosh(t) - 2.0 * ln_cosh_s;
        lw + H.ln() + f(left, right)
    };
    let mut acc = LogSum::new();
    let t0 = eval(0.0);
    acc.add(t0);
    let mut peak = t0;
    for dir in [1.0, -1.0] {
        let mut below = 0;
        let mut j = 1;
        loop {
            let t = dir * j as f64 * H;
            if t.abs() > T_MAX {
                break;
            }
            let v = eval(t);
            acc.add(v);
            if v > peak {
                peak = v;
            }
            if v < peak - 46.0 {
                below += 1;
                if below >= 3 {
                    break;
                }
            } else {
                below = 0;
            }
            j += 1;
        }
    }
    acc.value()
}

#[inline]
fn ln_cosh(t: f64) -> f64 {
    t.abs() + (-2.0 * t.abs()).exp().ln_1p() - std::f64::consts::LN_2
}
