//! Anytime-valid e-processes over k asynchronous streams.
//!
//! Observations arrive one group at a time. With multiplicities `m_1..m_k`,
//! a block completes once every group `j` has `m_j` unconsumed observations;
//! it is evaluated as a block of `k' = sum m_j` groups whose means repeat
//! `mu_j` `m_j` times. The running e-process is the product of completed
//! block e-values, and by Ville's inequality rejecting once it reaches
//! `1/alpha` is valid under any stopping rule.

use crate::error::{Error, Result};
use crate::evariables::{EValueKind, Statistic};
use crate::expfam::{Alternative, FamilySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    ContinueOrStopFreely,
    RejectNull,
}

/// Rejects iff `log_value >= log(1/alpha)`.
pub fn decide_log(log_value: f64, alpha: f64) -> Decision {
    if log_value >= -alpha.ln() {
        Decision::RejectNull
    } else {
        Decision::ContinueOrStopFreely
    }
}

/// Validity caveat of a mixture statistic certified at `c = 1 + excess`:
/// after `B` blocks the null expectation of the e-process is at most `c^B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidityCaveat {
    pub per_block_excess: f64,
    pub cumulative_bound: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} must lie in (0, 1)")));
    }
    Ok(())
}

fn check_multiplicities(m: &[usize], k: usize) -> Result<()> {
    if m.len() != k {
        return Err(Error::InvalidParameter(format!(
            "{} multiplicities given for {k} groups",
            m.len()
        )));
    }
    if m.contains(&0) {
        return Err(Error::InvalidParameter("multiplicities must be positive".into()));
    }
    Ok(())
}

/// Running e-process of one test.
#[derive(Debug, Clone)]
pub struct StreamState {
    spec: FamilySpec,
    alt: Alternative,
    kind: EValueKind,
    alpha: f64,
    multiplicities: Vec<usize>,
    buffers: Vec<VecDeque<f64>>,
    blocks: usize,
    log_value: f64,
    block_logs: Vec<f64>,
    stats: HashMap<Vec<usize>, Statistic>,
    excess: Option<f64>,
}

impl StreamState {
    /// Unit multiplicities. The mixture statistic requires a certificate,
    /// whose excess is carried as a validity caveat.
    pub fn new(spec: &FamilySpec, alt: &Alternative, kind: &EValueKind, alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        let excess = match kind {
            EValueKind::GroM { mixture } => Some(mixture.require_certificate()?.excess()),
            _ => None,
        };
        let k = alt.k();
        let mut state = StreamState {
            spec: *spec,
            alt: alt.clone(),
            kind: kind.clone(),
            alpha,
            multiplicities: vec![1; k],
            buffers: vec![VecDeque::new(); k],
            blocks: 0,
            log_value: 0.0,
            block_logs: Vec::new(),
            stats: HashMap::new(),
            excess,
        };
        state.prepare(&vec![1; k])?;
        Ok(state)
    }

    fn prepare(&mut self, m: &[usize]) -> Result<()> {
        if self.stats.contains_key(m) {
            return Ok(());
        }
        let flat: Vec<f64> = self
            .alt
            .mu()
            .iter()
            .zip(m)
            .flat_map(|(&mu, &c)| std::iter::repeat_n(mu, c))
            .collect();
        let flat_alt = Alternative::new(&self.spec, flat)?;
        let stat = Statistic::new(&self.spec, &flat_alt, &self.kind)?;
        self.stats.insert(m.to_vec(), stat);
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.alt.k()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Completed blocks `B`.
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// Log of the product of the first `B` block e-values.
    pub fn log_value(&self) -> f64 {
        self.log_value
    }

    /// Log e-value of each completed block, in order.
    pub fn block_logs(&self) -> &[f64] {
        &self.block_logs
    }

    /// Unconsumed observations of group `j` (zero-based).
    pub fn pending(&self, j: usize) -> usize {
        self.buffers.get(j).map_or(0, VecDeque::len)
    }

    pub fn at_block_boundary(&self) -> bool {
        self.buffers.iter().all(VecDeque::is_empty)
    }

    pub fn decide(&self) -> Decision {
        decide_log(self.log_value, self.alpha)
    }

    pub fn validity_caveat(&self) -> Option<ValidityCaveat> {
        self.excess.map(|e| ValidityCaveat {
            per_block_excess: e,
            cumulative_bound: (1.0 + e).powi(self.blocks as i32),
        })
    }

    /// Adds observation `x` to group `j` (zero-based) and returns the number
    /// of blocks it completed. A rejected observation leaves the state unchanged.
    pub fn ingest(&mut self, j: usize, x: f64) -> Result<usize> {
        if j >= self.k() {
            return Err(Error::Stream(format!("group {} does not exist (k = {})", j + 1, self.k())));
        }
        self.spec.check_support(x)?;
        self.buffers[j].push_back(x);
        let mut done = 0;
        while self
            .buffers
            .iter()
            .zip(&self.multiplicities)
            .all(|(b, &m)| b.len() >= m)
        {
            let mut block = Vec::with_capacity(self.multiplicities.iter().sum());
            for (b, &m) in self.buffers.iter_mut().zip(&self.multiplicities) {
                block.extend(b.drain(..m));
            }
            let stat = &self.stats[&self.multiplicities];
            let l = stat.log_value(&block);
            self.log_value += l;
            self.block_logs.push(l);
            self.blocks += 1;
            done += 1;
        }
        Ok(done)
    }

    /// Ingests a block laid out group by group, `m_j` values per group.
    pub fn ingest_block(&mut self, x: &[f64]) -> Result<usize> {
        let need: usize = self.multiplicities.iter().sum();
        if x.len() != need {
            return Err(Error::Stream(format!("block has {} values, expected {need}", x.len())));
        }
        for &v in x {
            self.spec.check_support(v)?;
        }
        let mut done = 0;
        let mut pos = 0;
        let m = self.multiplicities.clone();
        for (j, &c) in m.iter().enumerate() {
            for &v in &x[pos..pos + c] {
                done += self.ingest(j, v)?;
            }
            pos += c;
        }
        Ok(done)
    }

    /// Changes multiplicities for future blocks; refused while a block is
    /// partially filled.
    pub fn set_multiplicities(&mut self, m: &[usize]) -> Result<()> {
        check_multiplicities(m, self.k())?;
        if !self.at_block_boundary() {
            return Err(Error::Stream(
                "multiplicities can only change at a block boundary".into(),
            ));
        }
        if self.excess.is_some() && m.iter().any(|&c| c != 1) {
            return Err(Error::Stream(
                "the mixture certificate covers unit multiplicities only".into(),
            ));
        }
        self.prepare(m)?;
        self.multiplicities = m.to_vec();
        Ok(())
    }
}

/// Stopping rules. Each is a function of the public trace only: the number
/// of completed blocks, the running log value, and a budget drawn before any
/// data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum StoppingPolicy {
    /// Look only after exactly `blocks` blocks.
    FixedHorizon { blocks: usize },
    /// Stop at the first crossing of `1/alpha`, or after `max_blocks`.
    Threshold { max_blocks: usize },
    /// Stop at a crossing or when a budget drawn uniformly from
    /// `1..=max_blocks` runs out.
    RandomBudget { max_blocks: usize },
}

impl StoppingPolicy {
    pub fn max_blocks(&self) -> usize {
        match *self {
            StoppingPolicy::FixedHorizon { blocks } => blocks,
            StoppingPolicy::Threshold { max_blocks } | StoppingPolicy::RandomBudget { max_blocks } => max_blocks,
        }
    }

    fn budget<R: Rng>(&self, rng: &mut R) -> usize {
        match *self {
            StoppingPolicy::RandomBudget { max_blocks } => rng.random_range(1..=max_blocks),
            _ => self.max_blocks(),
        }
    }

    /// Whether to stop after `blocks` blocks with running value `log_value`.
    pub fn stops(&self, blocks: usize, log_value: f64, alpha: f64, budget: usize) -> bool {
        match self {
            StoppingPolicy::FixedHorizon { .. } => blocks >= budget,
            _ => blocks >= budget || decide_log(log_value, alpha) == Decision::RejectNull,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StoppingPolicy::FixedHorizon { .. } => "fixed_horizon",
            StoppingPolicy::Threshold { .. } => "threshold",
            StoppingPolicy::RandomBudget { .. } => "random_budget",
        }
    }
}

/// Distribution the simulated data are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "truth", rename_all = "snake_case")]
pub enum Truth {
    /// Every group at `mu0`.
    Null { mu0: f64 },
    /// Group `j` at `mu[j]`.
    Means { mu: Vec<f64> },
}

impl Truth {
    fn means(&self, k: usize) -> Vec<f64> {
        match self {
            Truth::Null { mu0 } => vec![*mu0; k],
            Truth::Means { mu } => mu.clone(),
        }
    }

    pub fn is_null(&self) -> bool {
        match self {
            Truth::Null { .. } => true,
            Truth::Means { mu } => mu.iter().all(|&m| m == mu[0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    /// Alternative the statistic is designed for.
    pub alternative: Alternative,
    pub kind: EValueKind,
    pub truth: Truth,
    pub alpha: f64,
    pub policy: StoppingPolicy,
    pub trials: usize,
    pub seed: u64,
    /// Multiplicities cycled block by block; unit multiplicities when empty.
    #[serde(default)]
    pub schedule: Vec<Vec<usize>>,
}

/// Fraction of trials that rejected by each block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub block: usize,
    pub rejected_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub trials: usize,
    pub rejections: usize,
    /// Type-I error under a null truth, power otherwise.
    pub rejection_rate: f64,
    pub se: f64,
    pub null_truth: bool,
    pub mean_stopping_time: f64,
    pub trace: Vec<TracePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caveat: Option<ValidityCaveat>,
}

fn run_trial(
    spec: &FamilySpec,
    sim: &Simulation,
    template: &StreamState,
    truth: &[f64],
    trial: usize,
) -> Result<(usize, Option<usize>)> {
    let mut rng = ChaCha20Rng::seed_from_u64(sim.seed);
    rng.set_stream(trial as u64);
    let budget = sim.policy.budget(&mut rng);
    let mut state = template.clone();
    loop {
        if sim.policy.stops(state.blocks(), state.log_value(), sim.alpha, budget) {
            break;
        }
        if !sim.schedule.is_empty() {
            let m = &sim.schedule[state.blocks() % sim.schedule.len()];
            state.set_multiplicities(m)?;
        }
        // Interleave groups one observation at a time until the block completes.
        let m = state.multiplicities().to_vec();
        let mut left = m.clone();
        let mut done = 0;
        while done == 0 {
            for j in 0..m.len() {
                if left[j] > 0 {
                    left[j] -= 1;
                    done += state.ingest(j, spec.draw(truth[j], &mut rng))?;
                }
            }
        }
    }
    let reject = state.decide() == Decision::RejectNull;
    Ok((state.blocks(), reject.then_some(state.blocks())))
}

/// Seeded rejection campaign. Trial `t` uses stream `t` of the generator,
/// so results are independent of the thread count.
pub fn simulate(spec: &FamilySpec, sim: &Simulation) -> Result<SimulationSummary> {
    check_alpha(sim.alpha)?;
    if sim.trials == 0 {
        return Err(Error::InvalidParameter("trials must be positive".into()));
    }
    if sim.policy.max_blocks() == 0 {
        return Err(Error::InvalidParameter("the stopping policy allows no blocks".into()));
    }
    let k = sim.alternative.k();
    let truth = sim.truth.means(k);
    if truth.len() != k {
        return Err(Error::InvalidParameter(format!(
            "truth has {} groups but the alternative has {k}",
            truth.len()
        )));
    }
    for &m in &truth {
        spec.check_mean(m)?;
    }
    let mut template = StreamState::new(spec, &sim.alternative, &sim.kind, sim.alpha)?;
    for m in &sim.schedule {
        check_multiplicities(m, k)?;
        if template.excess.is_some() && m.iter().any(|&c| c != 1) {
            return Err(Error::Stream("the mixture certificate covers unit multiplicities only".into()));
        }
        template.prepare(m)?;
    }
    let outcomes = (0..sim.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, sim, &template, &truth, t))
        .collect::<Result<Vec<_>>>()?;
    let n = sim.trials as f64;
    let rejections = outcomes.iter().filter(|o| o.1.is_some()).count();
    let rate = rejections as f64 / n;
    let mean_stop = outcomes.iter().map(|o| o.0 as f64).sum::<f64>() / n;
    let horizon = sim.policy.max_blocks();
    let mut by_block = vec![0usize; horizon + 1];
    for o in &outcomes {
        if let Some(b) = o.1 {
            by_block[b.min(horizon)] += 1;
        }
    }
    let mut acc = 0;
    let trace = (1..=horizon)
        .map(|b| {
            acc += by_block[b];
            TracePoint {
                block: b,
                rejected_fraction: acc as f64 / n,
            }
        })
        .collect();
    let caveat = template.excess.map(|e| ValidityCaveat {
        per_block_excess: e,
        cumulative_bound: (1.0 + e).powi(horizon as i32),
    });
    Ok(SimulationSummary {
        trials: sim.trials,
        rejections,
        rejection_rate: rate,
        se: (rate * (1.0 - rate) / n).sqrt(),
        null_truth: sim.truth.is_null(),
        mean_stopping_time: mean_stop,
        trace,
        caveat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ripr::{certify, Grid, Method, MixtureNull};

    fn state(m: &[f64], kind: EValueKind) -> StreamState {
        let spec = FamilySpec::Exponential;
        let alt = Alternative::new(&spec, m.to_vec()).unwrap();
        StreamState::new(&spec, &alt, &kind, 0.05).unwrap()
    }

    #[test]
    fn alternating_ingests_complete_blocks() {
        let mut s = state(&[0.5, 0.25], EValueKind::Cond);
        assert_eq!(s.decide(), Decision::ContinueOrStopFreely);
        assert_eq!(s.ingest(0, 0.3).unwrap(), 0);
        assert_eq!(s.ingest(1, 0.1).unwrap(), 1);
        assert_eq!(s.ingest(1, 0.2).unwrap(), 0);
        assert_eq!(s.blocks(), 1);
        assert!(!s.at_block_boundary());
        assert!(s.set_multiplicities(&[2, 1]).is_err());
        assert_eq!(s.ingest(0, 0.4).unwrap(), 1);
        s.set_multiplicities(&[2, 1]).unwrap();
        assert_eq!(s.ingest(0, 0.4).unwrap(), 0);
        assert_eq!(s.ingest(1, 0.4).unwrap(), 0);
        assert_eq!(s.ingest(0, 0.4).unwrap(), 1);
        assert_eq!(s.blocks(), 3);
    }

    #[test]
    fn rejected_observation_leaves_state_unchanged() {
        let mut s = state(&[0.5, 0.25], EValueKind::GroIid);
        s.ingest(0, 0.3).unwrap();
        assert!(s.ingest(1, -1.0).is_err());
        assert!(s.ingest(5, 1.0).is_err());
        assert_eq!(s.pending(0), 1);
        assert_eq!(s.pending(1), 0);
        assert_eq!(s.blocks(), 0);
    }

    #[test]
    fn boundary_rejects_at_equality() {
        let alpha: f64 = 0.05;
        assert_eq!(decide_log(-alpha.ln(), alpha), Decision::RejectNull);
        assert_eq!(decide_log(-alpha.ln() - 1e-12, alpha), Decision::ContinueOrStopFreely);
    }

    #[test]
    fn mixture_needs_certificate_and_reports_caveat() {
        let spec = FamilySpec::Exponential;
        let alt = Alternative::new(&spec, vec![0.5, 0.25]).unwrap();
        let mix = MixtureNull::point(&spec, alt.mu0_star()).unwrap();
        let bare = EValueKind::GroM { mixture: mix.clone() };
        assert!(StreamState::new(&spec, &alt, &bare, 0.05).is_err());
        let cert = certify(&spec, &alt, &mix, &Grid::new(20, 0.3, 0.45), Method::Supplied).unwrap();
        let c = cert.certificate.unwrap().sup_expectation;
        let mut s = StreamState::new(&spec, &alt, &EValueKind::GroM { mixture: cert }, 0.05).unwrap();
        s.ingest_block(&[0.1, 0.2]).unwrap();
        s.ingest_block(&[0.3, 0.2]).unwrap();
        let cav = s.validity_caveat().unwrap();
        assert!((cav.cumulative_bound - c.max(1.0).powi(2)).abs() < 1e-12);
        assert!(s.set_multiplicities(&[2, 1]).is_err());
    }

    #[test]
    fn fixed_seed_reproduces() {
        let spec = FamilySpec::Bernoulli;
        let sim = Simulation {
            alternative: Alternative::new(&spec, vec![0.7, 0.3]).unwrap(),
            kind: EValueKind::Cond,
            truth: Truth::Null { mu0: 0.5 },
            alpha: 0.05,
            policy: StoppingPolicy::RandomBudget { max_blocks: 30 },
            trials: 200,
            seed: 9,
            schedule: vec![],
        };
        let a = simulate(&spec, &sim).unwrap();
        let b = simulate(&spec, &sim).unwrap();
        assert_eq!(a, b);
        assert!(a.mean_stopping_time <= 30.0);
    }
}
