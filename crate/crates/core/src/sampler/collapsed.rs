//! Collapsed Gibbs kernel on `(xi, z, c)` with the expression parameters
//! integrated out.
//!
//! The marginal of the allocations given `c`, up to factors free of both, is
//!
//! ```text
//! prod_dead  G(alpha_k + a_k + b_k)
//! prod_alive G(alpha_k + a_k) G(gamma_k + b_k) / G(gamma_k)
//! * G(A + SA + SB) G(G1) / ( G(A + SA) G(G1 + SB) )      (only when c_+ > 0)
//! ```
//!
//! where `G` is the Gamma function, `a`, `b` the per-component counts of the
//! two conditions and `A`, `SA`, `SB`, `G1` the alive sums of `alpha`, `a`,
//! `b` and `gamma`. The `G(G1) / prod G(gamma_k)` part is the normalizing
//! constant of the `v` prior, which depends on `c`.

use rand::Rng;

use super::alloc::{sample_index, AllocationState, Condition};
use crate::cluster::{ClusterModel, ConditionData};
use crate::dist::ln_gamma;
use crate::error::{Error, Result};
use crate::model::StateVector;

/// Mutable state of one collapsed chain.
#[derive(Debug, Clone)]
pub struct CollapsedState {
    pub alloc: AllocationState,
    c: Vec<bool>,
    n_alive: usize,
    alive_alpha: f64,
    alive_gamma: f64,
    alive_a: u64,
    alive_b: u64,
}

impl CollapsedState {
    pub fn new(model: &ClusterModel, alloc: AllocationState, c: &StateVector) -> Result<Self> {
        let n = model.n_components;
        if c.len() != n || alloc.counts_a.len() != n || alloc.counts_b.len() != n {
            return Err(Error::Dimension("state does not match the model".into()));
        }
        let mut st = CollapsedState {
            alloc,
            c: c.flags().to_vec(),
            n_alive: 0,
            alive_alpha: 0.0,
            alive_gamma: 0.0,
            alive_a: 0,
            alive_b: 0,
        };
        st.refresh_alive(model);
        Ok(st)
    }

    fn refresh_alive(&mut self, model: &ClusterModel) {
        self.n_alive = 0;
        self.alive_alpha = 0.0;
        self.alive_gamma = 0.0;
        self.alive_a = 0;
        self.alive_b = 0;
        for k in 0..self.c.len() {
            if self.c[k] {
                self.n_alive += 1;
                self.alive_alpha += model.alpha[k];
                self.alive_gamma += model.gamma[k];
                self.alive_a += self.alloc.counts_a[k];
                self.alive_b += self.alloc.counts_b[k];
            }
        }
    }

    pub fn flags(&self) -> &[bool] {
        &self.c
    }

    pub fn n_alive(&self) -> usize {
        self.n_alive
    }

    pub fn state_vector(&self) -> StateVector {
        StateVector::new(self.c.clone()).expect("the kernel never produces c_+ = 1")
    }

    fn adjust(&mut self, cond: Condition, k: usize, up: bool) {
        let (counts, alive_sum) = match cond {
            Condition::A => (&mut self.alloc.counts_a, &mut self.alive_a),
            Condition::B => (&mut self.alloc.counts_b, &mut self.alive_b),
        };
        if up {
            counts[k] += 1;
            if self.c[k] {
                *alive_sum += 1;
            }
        } else {
            counts[k] -= 1;
            if self.c[k] {
                *alive_sum -= 1;
            }
        }
    }

    /// Unnormalized collapsed allocation weights of a read whose own
    /// allocation has already been removed from the counts.
    fn weights_excluding(
        &self,
        model: &ClusterModel,
        cond: Condition,
        targets: &[u32],
        probs: &[f64],
        out: &mut Vec<f64>,
    ) {
        out.clear();
        let (a, b) = (&self.alloc.counts_a, &self.alloc.counts_b);
        let alive_total = self.alive_alpha + (self.alive_a + self.alive_b) as f64;
        let ratio = match cond {
            Condition::A => alive_total / (self.alive_alpha + self.alive_a as f64),
            Condition::B => alive_total / (self.alive_gamma + self.alive_b as f64),
        };
        for (&t, &p) in targets.iter().zip(probs) {
            let k = t as usize;
            let w = if !self.c[k] {
                model.alpha[k] + (a[k] + b[k]) as f64
            } else {
                match cond {
                    Condition::A => ratio * (model.alpha[k] + a[k] as f64),
                    Condition::B => ratio * (model.gamma[k] + b[k] as f64),
                }
            };
            out.push(w * p);
        }
    }
}

fn data(model: &ClusterModel, cond: Condition) -> &ConditionData {
    match cond {
        Condition::A => &model.a,
        Condition::B => &model.b,
    }
}

/// Normalized collapsed conditional of one multi-target read over its
/// alignment targets.
pub fn collapsed_allocation_probs(
    model: &ClusterModel,
    state: &CollapsedState,
    cond: Condition,
    read: usize,
) -> Vec<f64> {
    let (targets, probs) = data(model, cond).multi.read(read);
    let current = match cond {
        Condition::A => state.alloc.xi[read],
        Condition::B => state.alloc.z[read],
    } as usize;
    let mut tmp = state.clone();
    tmp.adjust(cond, current, false);
    let mut w = Vec::new();
    tmp.weights_excluding(model, cond, targets, probs, &mut w);
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Resamples one read's allocation from its collapsed conditional.
pub fn collapsed_allocation_update<R: Rng + ?Sized>(
    model: &ClusterModel,
    state: &mut CollapsedState,
    cond: Condition,
    read: usize,
    buf: &mut Vec<f64>,
    rng: &mut R,
) {
    let (targets, probs) = data(model, cond).multi.read(read);
    let current = match cond {
        Condition::A => state.alloc.xi[read],
        Condition::B => state.alloc.z[read],
    } as usize;
    state.adjust(cond, current, false);
    state.weights_excluding(model, cond, targets, probs, buf);
    let total: f64 = buf.iter().sum();
    let next = targets[sample_index(buf, total, rng)];
    state.adjust(cond, next as usize, true);
    match cond {
        Condition::A => state.alloc.xi[read] = next,
        Condition::B => state.alloc.z[read] = next,
    }
}

/// One systematic-scan sweep over the multi-target reads of a condition.
pub fn collapsed_sweep<R: Rng + ?Sized>(
    model: &ClusterModel,
    state: &mut CollapsedState,
    cond: Condition,
    buf: &mut Vec<f64>,
    rng: &mut R,
) {
    for i in 0..data(model, cond).multi.len() {
        collapsed_allocation_update(model, state, cond, i, buf, rng);
    }
}

/// The four joint values of `(c_j1, c_j2)` in the order used by the block
/// update.
pub const BLOCK_CONFIGS: [(bool, bool); 4] = [(false, false), (true, false), (false, true), (true, true)];

fn component_term(model: &ClusterModel, a: u64, b: u64, k: usize, alive: bool) -> f64 {
    if alive {
        ln_gamma(model.alpha[k] + a as f64) + ln_gamma(model.gamma[k] + b as f64) - ln_gamma(model.gamma[k])
    } else {
        ln_gamma(model.alpha[k] + (a + b) as f64)
    }
}

fn alive_block_term(n_alive: usize, alpha: f64, gamma: f64, sa: u64, sb: u64) -> f64 {
    if n_alive == 0 {
        return 0.0;
    }
    let (sa, sb) = (sa as f64, sb as f64);
    ln_gamma(alpha + sa + sb) - ln_gamma(alpha + sa) - ln_gamma(gamma + sb) + ln_gamma(gamma)
}

/// Log-weights of the four configurations of `(c_j1, c_j2)` given the rest
/// of the state; forbidden configurations (those giving `c_+ = 1`) are
/// `-inf`. The DE prior enters as `log(pi / (1 - pi))` per alive real
/// transcript.
pub fn block_log_weights(
    model: &ClusterModel,
    state: &CollapsedState,
    j1: usize,
    j2: usize,
    pi: f64,
) -> [f64; 4] {
    let lw = config_log_weights(model, state, &[j1, j2], pi);
    [lw[0], lw[1], lw[2], lw[3]]
}

/// Log-weights of every joint value of `c` over `free` (bit `i` of the
/// configuration index is `c[free[i]]`). With a pseudo-transcript its state
/// is tied to the members: alive exactly when some member is alive.
pub fn config_log_weights(model: &ClusterModel, state: &CollapsedState, free: &[usize], pi: f64) -> Vec<f64> {
    let (a, b) = (&state.alloc.counts_a, &state.alloc.counts_b);
    let mut touched = free.to_vec();
    touched.extend(model.pseudo);
    let mut d = state.n_alive;
    let mut members_alive = 0;
    let (mut alpha0, mut gamma0, mut sa0, mut sb0) =
        (state.alive_alpha, state.alive_gamma, state.alive_a, state.alive_b);
    for (k, &f) in state.c.iter().enumerate() {
        if f && Some(k) != model.pseudo && !free.contains(&k) {
            members_alive += 1;
        }
    }
    for &j in &touched {
        if state.c[j] {
            d -= 1;
            alpha0 -= model.alpha[j];
            gamma0 -= model.gamma[j];
            sa0 -= a[j];
            sb0 -= b[j];
        }
    }
    if d == 0 {
        // avoid carrying rounding residue from the subtraction
        alpha0 = 0.0;
        gamma0 = 0.0;
    }
    let logit = pi.ln() - (-pi).ln_1p();
    let mut out = vec![f64::NEG_INFINITY; 1 << free.len()];
    for (cfg, slot) in out.iter_mut().enumerate() {
        let flags: Vec<bool> = (0..free.len()).map(|i| cfg >> i & 1 == 1).collect();
        let n_real = members_alive + flags.iter().filter(|&&f| f).count();
        let mut states: Vec<(usize, bool)> = free.iter().copied().zip(flags).collect();
        states.extend(model.pseudo.map(|p| (p, n_real > 0)));
        let n_alive = d + states.iter().filter(|s| s.1).count();
        if n_alive == 1 {
            continue;
        }
        let (mut alpha, mut gamma, mut sa, mut sb) = (alpha0, gamma0, sa0, sb0);
        let mut lw = 0.0;
        for &(j, f) in &states {
            lw += component_term(model, a[j], b[j], j, f);
            if f {
                alpha += model.alpha[j];
                gamma += model.gamma[j];
                sa += a[j];
                sb += b[j];
            }
        }
        *slot = lw + alive_block_term(n_alive, alpha, gamma, sa, sb) + n_real as f64 * logit;
    }
    out
}

/// Normalized probabilities of the configurations.
pub fn block_probs<const N: usize>(log_weights: &[f64; N]) -> [f64; N] {
    let m = log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; N];
    for (pi, &lw) in p.iter_mut().zip(log_weights) {
        *pi = if lw == f64::NEG_INFINITY { 0.0 } else { (lw - m).exp() };
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// Draws `(c_j1, c_j2)` exactly from its conditional.
pub fn collapsed_block_update_c<R: Rng + ?Sized>(
    model: &ClusterModel,
    state: &mut CollapsedState,
    j1: usize,
    j2: usize,
    pi: f64,
    rng: &mut R,
) {
    collapsed_update_c(model, state, &[j1, j2], pi, rng);
}

/// Draws `c` over `free` (one or two indices) exactly from its conditional,
/// moving a tied pseudo-transcript along with it.
pub fn collapsed_update_c<R: Rng + ?Sized>(
    model: &ClusterModel,
    state: &mut CollapsedState,
    free: &[usize],
    pi: f64,
    rng: &mut R,
) {
    let lw = config_log_weights(model, state, free, pi);
    let m = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let p: Vec<f64> = lw.iter().map(|&x| if x == f64::NEG_INFINITY { 0.0 } else { (x - m).exp() }).collect();
    let cfg = sample_index(&p, p.iter().sum(), rng);
    for (i, &j) in free.iter().enumerate() {
        state.c[j] = cfg >> i & 1 == 1;
    }
    if let Some(p) = model.pseudo {
        state.c[p] = (0..state.c.len()).any(|k| k != p && state.c[k]);
    }
    state.refresh_alive(model);
}

/// Draws an unordered pair of distinct indices uniformly.
pub fn random_pair<R: Rng + ?Sized>(k: usize, rng: &mut R) -> (usize, usize) {
    let j1 = rng.random_range(0..k);
    let mut j2 = rng.random_range(0..k - 1);
    if j2 >= j1 {
        j2 += 1;
    }
    (j1, j2)
}

/// Log of the collapsed marginal of `(xi, z)` given `c`, including the `v`
/// prior normalizer, from count tables; alignment probabilities excluded.
pub fn log_collapsed_marginal(model: &ClusterModel, counts_a: &[u64], counts_b: &[u64], c: &[bool]) -> f64 {
    let mut total = 0.0;
    let (mut n, mut alpha, mut gamma, mut sa, mut sb) = (0, 0.0, 0.0, 0, 0);
    for k in 0..c.len() {
        total += component_term(model, counts_a[k], counts_b[k], k, c[k]);
        if c[k] {
            n += 1;
            alpha += model.alpha[k];
            gamma += model.gamma[k];
            sa += counts_a[k];
            sb += counts_b[k];
        }
    }
    total + alive_block_term(n, alpha, gamma, sa, sb)
}
