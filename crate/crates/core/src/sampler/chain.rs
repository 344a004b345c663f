//! Single chains, chain ensembles and their posterior summaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::alloc::{gibbs_allocations, AllocationState, Condition};
use super::collapsed::{collapsed_block_update_c, collapsed_sweep, collapsed_update_c, random_pair, CollapsedState};
use super::conditional::sample_uv_conditional;
use super::rj::{rj_step, weights_from, BetaMixture, RjState};
use crate::cluster::ClusterModel;
use crate::dist;
use crate::error::{Error, Result};
use crate::model::{
    dead_alive_sets, map_unchecked, sample_free_prior, sample_pi_conditional, DePrior, PriorConfig,
    StateVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerKind {
    Collapsed,
    RjMcmc,
}

/// Number of random-pair updates of `c` per collapsed iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockUpdates {
    /// `ceil(K / 2)` for a model with `K` components.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_chains: usize,
    pub iterations: u64,
    pub burnin: u64,
    pub thin: u64,
    pub sampler: SamplerKind,
    pub de_prior: DePrior,
    pub proposal_betas: Vec<f64>,
    pub seed: u64,
    pub block_updates: BlockUpdates,
    /// Recompute the count tables every this many iterations; `None` never.
    pub audit_every: Option<u64>,
    /// Keep every retained draw (for draw dumps and autocorrelations).
    pub keep_trace: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_chains: 6,
            iterations: 5000,
            burnin: 1000,
            thin: 5,
            sampler: SamplerKind::Collapsed,
            de_prior: DePrior::Jeffreys,
            proposal_betas: vec![1.0, 10.0, 100.0, 250.0, 500.0],
            seed: 0,
            block_updates: BlockUpdates::Auto,
            audit_every: Some(if cfg!(debug_assertions) { 1 } else { 1000 }),
            keep_trace: false,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_chains == 0 {
            return Err(Error::Config("at least one chain is required".into()));
        }
        if self.burnin >= self.iterations {
            return Err(Error::Config(format!(
                "burn-in {} must be smaller than the iteration count {}",
                self.burnin, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::Config("thinning interval must be at least 1".into()));
        }
        if self.audit_every == Some(0) {
            return Err(Error::Config("audit interval must be at least 1".into()));
        }
        self.de_prior.validate()?;
        BetaMixture::new(self.proposal_betas.clone())?;
        Ok(())
    }

    /// Retained draws per chain.
    pub fn kept_per_chain(&self) -> u64 {
        (self.iterations - self.burnin).div_ceil(self.thin)
    }

    /// Chains with id below this start with every component EE.
    pub fn n_ee_chains(&self) -> usize {
        self.n_chains.div_ceil(2)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one chain as a function of the master seed, the cluster label and
/// the chain id only.
pub fn derive_seed(master: u64, cluster_label: usize, chain_id: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ cluster_label as u64) ^ chain_id as u64)
}

/// One retained draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub iteration: u64,
    pub c: Vec<bool>,
    pub theta: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutput {
    pub chain_id: usize,
    pub ee_start: bool,
    pub sum_c: Vec<f64>,
    pub sum_theta: Vec<f64>,
    pub sum_w: Vec<f64>,
    pub n_kept: u64,
    pub rj_accepted: u64,
    pub rj_proposed: u64,
    /// `(iteration, running mean of c)` at evenly spaced retained draws.
    pub checkpoints: Vec<(u64, Vec<f64>)>,
    pub trace: Option<Vec<Draw>>,
}

const N_CHECKPOINTS: u64 = 50;

struct Recorder {
    out: ChainOutput,
    stride: u64,
    keep_trace: bool,
}

impl Recorder {
    fn new(n: usize, chain_id: usize, ee_start: bool, cfg: &ChainConfig) -> Self {
        Recorder {
            out: ChainOutput {
                chain_id,
                ee_start,
                sum_c: vec![0.0; n],
                sum_theta: vec![0.0; n],
                sum_w: vec![0.0; n],
                n_kept: 0,
                rj_accepted: 0,
                rj_proposed: 0,
                checkpoints: Vec::new(),
                trace: cfg.keep_trace.then(Vec::new),
            },
            stride: (cfg.kept_per_chain() / N_CHECKPOINTS).max(1),
            keep_trace: cfg.keep_trace,
        }
    }

    fn record(&mut self, iteration: u64, c: &[bool], theta: &[f64], w: &[f64]) {
        let o = &mut self.out;
        for k in 0..c.len() {
            o.sum_c[k] += c[k] as u8 as f64;
            o.sum_theta[k] += theta[k];
            o.sum_w[k] += w[k];
        }
        o.n_kept += 1;
        if o.n_kept.is_multiple_of(self.stride) {
            let n = o.n_kept as f64;
            o.checkpoints.push((iteration, o.sum_c.iter().map(|s| s / n).collect()));
        }
        if self.keep_trace {
            if let Some(t) = o.trace.as_mut() {
                t.push(Draw {
                    iteration,
                    c: c.to_vec(),
                    theta: theta.to_vec(),
                    w: w.to_vec(),
                });
            }
        }
    }
}

fn initial_state(k: usize, ee_start: bool) -> StateVector {
    if ee_start {
        StateVector::all_dead(k)
    } else {
        StateVector::all_alive(k).expect("K >= 2")
    }
}

/// Draws `pi | c`. With a tied pseudo-transcript the real transcripts are
/// independent Bernoulli(pi) draws with no `c_+ != 1` truncation, so the
/// conditional is a plain Beta.
fn update_pi<R: Rng + ?Sized>(model: &ClusterModel, de_prior: DePrior, c: &[bool], rng: &mut R) -> Result<f64> {
    if let DePrior::Fixed(p) = de_prior {
        return Ok(p);
    }
    let c_plus = c.iter().filter(|&&f| f).count();
    match model.pseudo {
        None => sample_pi_conditional(c_plus, c.len(), rng),
        Some(p) => {
            let m = c_plus - c[p] as usize;
            let n = c.len() - 1;
            dist::sample_beta(m as f64 + 0.5, (n - m) as f64 + 0.5, rng)
        }
    }
}

fn is_kept(cfg: &ChainConfig, t: u64) -> bool {
    t >= cfg.burnin && (t - cfg.burnin).is_multiple_of(cfg.thin)
}

fn is_audit(cfg: &ChainConfig, t: u64) -> bool {
    cfg.audit_every.is_some_and(|e| (t + 1).is_multiple_of(e))
}

/// Runs one chain. Chains with `chain_id < cfg.n_ee_chains()` start with
/// every component EE, the rest with every component DE; the free
/// parameters start from their prior.
pub fn run_chain(model: &ClusterModel, cfg: &ChainConfig, cluster_label: usize, chain_id: usize) -> Result<ChainOutput> {
    cfg.validate()?;
    let k = model.n_components;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, cluster_label, chain_id));
    let ee_start = chain_id < cfg.n_ee_chains();
    let c0 = initial_state(k, ee_start);
    let prior = PriorConfig {
        alpha: model.alpha.clone(),
        gamma: model.gamma.clone(),
        de_prior: cfg.de_prior,
    };
    let sets = dead_alive_sets(&c0);
    let fp = sample_free_prior(&prior, &sets, &mut rng)?;
    let expr = map_unchecked(&sets, &fp.u, &fp.v);
    let pi = update_pi(model, cfg.de_prior, c0.flags(), &mut rng)?;
    let mut rec = Recorder::new(k, chain_id, ee_start, cfg);
    match cfg.sampler {
        SamplerKind::Collapsed => {
            let alloc = gibbs_allocations(&expr.theta, &expr.w, model, &mut rng)?;
            run_collapsed(model, cfg, CollapsedState::new(model, alloc, &c0)?, pi, &mut rec, &mut rng)?;
        }
        SamplerKind::RjMcmc => {
            let state = RjState {
                c: c0,
                theta: expr.theta,
                w: expr.w,
                v: fp.v,
            };
            run_rj(model, cfg, state, pi, &mut rec, &mut rng)?;
        }
    }
    Ok(rec.out)
}

fn run_collapsed(
    model: &ClusterModel,
    cfg: &ChainConfig,
    mut state: CollapsedState,
    mut pi: f64,
    rec: &mut Recorder,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let free: Vec<usize> = (0..model.n_components).filter(|&j| Some(j) != model.pseudo).collect();
    let n_blocks = match cfg.block_updates {
        BlockUpdates::Auto => free.len().div_ceil(2),
        BlockUpdates::Fixed(n) => n,
    };
    let mut buf = Vec::new();
    for t in 0..cfg.iterations {
        collapsed_sweep(model, &mut state, Condition::A, &mut buf, rng);
        collapsed_sweep(model, &mut state, Condition::B, &mut buf, rng);
        for _ in 0..n_blocks {
            if free.len() == 1 {
                collapsed_update_c(model, &mut state, &free, pi, rng);
            } else {
                let (j1, j2) = random_pair(free.len(), rng);
                collapsed_block_update_c(model, &mut state, free[j1], free[j2], pi, rng);
            }
        }
        pi = update_pi(model, cfg.de_prior, state.flags(), rng)?;
        if is_audit(cfg, t) {
            state.alloc.audit(model)?;
        }
        if is_kept(cfg, t) {
            let c = state.state_vector();
            let sets = dead_alive_sets(&c);
            let fp = sample_uv_conditional(
                &model.alpha,
                &model.gamma,
                &state.alloc.counts_a,
                &state.alloc.counts_b,
                &sets,
                rng,
            )?;
            let expr = map_unchecked(&sets, &fp.u, &fp.v);
            rec.record(t, c.flags(), &expr.theta, &expr.w);
        }
    }
    Ok(())
}

fn run_rj(
    model: &ClusterModel,
    cfg: &ChainConfig,
    mut state: RjState,
    mut pi: f64,
    rec: &mut Recorder,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let proposal = BetaMixture::new(cfg.proposal_betas.clone())?;
    let mut alloc: AllocationState;
    for t in 0..cfg.iterations {
        alloc = gibbs_allocations(&state.theta, &state.w, model, rng)?;
        if is_audit(cfg, t) {
            alloc.audit(model)?;
        }
        let sets = dead_alive_sets(&state.c);
        let fp = sample_uv_conditional(&model.alpha, &model.gamma, &alloc.counts_a, &alloc.counts_b, &sets, rng)?;
        let expr = map_unchecked(&sets, &fp.u, &fp.v);
        state.theta = expr.theta;
        state.w = expr.w;
        state.v = fp.v;
        rec.out.rj_proposed += 1;
        if rj_step(model, &mut state, pi, &proposal, rng)? {
            rec.out.rj_accepted += 1;
        }
        pi = update_pi(model, cfg.de_prior, state.c.flags(), rng)?;
        if is_kept(cfg, t) {
            debug_assert_eq!(weights_from(&state.c, &state.theta, &state.v), state.w);
            rec.record(t, state.c.flags(), &state.theta, &state.w);
        }
    }
    Ok(())
}

/// Posterior summaries over the components of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub p_de: Vec<f64>,
    pub theta_mean: Vec<f64>,
    pub w_mean: Vec<f64>,
    /// `log2(w_mean / theta_mean)`.
    pub log2fc: Vec<f64>,
    /// Accepted over proposed rj moves; `None` for the collapsed sampler.
    pub acceptance_rate: Option<f64>,
    pub n_kept: u64,
    /// `(iteration, MAE)` between the running DE probabilities of the
    /// EE-started and DE-started chain groups.
    pub ergodic_mae: Vec<(u64, f64)>,
}

pub fn summarize(outputs: &[ChainOutput], sampler: SamplerKind) -> Result<PosteriorSummary> {
    let first = outputs
        .first()
        .ok_or_else(|| Error::Config("no chain outputs to summarize".into()))?;
    let n = first.sum_c.len();
    let n_kept: u64 = outputs.iter().map(|o| o.n_kept).sum();
    if n_kept == 0 {
        return Err(Error::Config("no retained draws".into()));
    }
    let mean = |f: fn(&ChainOutput) -> &Vec<f64>| -> Vec<f64> {
        (0..n)
            .map(|k| outputs.iter().map(|o| f(o)[k]).sum::<f64>() / n_kept as f64)
            .collect()
    };
    let p_de = mean(|o| &o.sum_c);
    let theta_mean = mean(|o| &o.sum_theta);
    let w_mean = mean(|o| &o.sum_w);
    let log2fc = theta_mean
        .iter()
        .zip(&w_mean)
        .map(|(t, w)| (w / t).log2())
        .collect();
    let acceptance_rate = match sampler {
        SamplerKind::Collapsed => None,
        SamplerKind::RjMcmc => {
            let acc: u64 = outputs.iter().map(|o| o.rj_accepted).sum();
            let prop: u64 = outputs.iter().map(|o| o.rj_proposed).sum();
            Some(if prop == 0 { 0.0 } else { acc as f64 / prop as f64 })
        }
    };
    Ok(PosteriorSummary {
        p_de,
        theta_mean,
        w_mean,
        log2fc,
        acceptance_rate,
        n_kept,
        ergodic_mae: ergodic_mae(outputs),
    })
}

fn ergodic_mae(outputs: &[ChainOutput]) -> Vec<(u64, f64)> {
    let (ee, de): (Vec<&ChainOutput>, Vec<&ChainOutput>) = outputs.iter().partition(|o| o.ee_start);
    if ee.is_empty() || de.is_empty() {
        return Vec::new();
    }
    let n_points = outputs.iter().map(|o| o.checkpoints.len()).min().unwrap_or(0);
    let group_mean = |g: &[&ChainOutput], i: usize, k: usize| {
        g.iter().map(|o| o.checkpoints[i].1[k]).sum::<f64>() / g.len() as f64
    };
    (0..n_points)
        .map(|i| {
            let n = ee[0].checkpoints[i].1.len();
            let mae = (0..n)
                .map(|k| (group_mean(&ee, i, k) - group_mean(&de, i, k)).abs())
                .sum::<f64>()
                / n as f64;
            (ee[0].checkpoints[i].0, mae)
        })
        .collect()
}

/// Runs `cfg.n_chains` chains sequentially and summarizes them.
pub fn run_ensemble(model: &ClusterModel, cfg: &ChainConfig, cluster_label: usize) -> Result<(PosteriorSummary, Vec<ChainOutput>)> {
    let outputs = (0..cfg.n_chains)
        .map(|id| run_chain(model, cfg, cluster_label, id))
        .collect::<Result<Vec<_>>>()?;
    Ok((summarize(&outputs, cfg.sampler)?, outputs))
}
