//! Domain types of the two-condition mixture model and the deterministic
//! mapping from free parameters `(u, v)` to expression vectors `(theta, w)`.
//!
//! Transcript indices are 0-based here. `u` lives in the permuted order
//! `tau = dead ++ alive`, `theta` and `w` in transcript order.

use rand::Rng;

use crate::dist;
use crate::error::{Error, Result};

pub(crate) const SIMPLEX_TOL: f64 = 1e-12;

/// Binary differential-expression indicators with `c_+ != 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateVector {
    flags: Vec<bool>,
}

impl StateVector {
    pub fn new(flags: Vec<bool>) -> Result<Self> {
        let n_alive = flags.iter().filter(|&&f| f).count();
        if n_alive == 1 {
            return Err(Error::InvalidState(
                "exactly one differentially expressed transcript".into(),
            ));
        }
        Ok(StateVector { flags })
    }

    /// Builds from 0/1 integers; anything else is rejected.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let flags = bits
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidState(format!("element {other} is not binary"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(flags)
    }

    pub fn all_dead(k: usize) -> Self {
        StateVector {
            flags: vec![false; k],
        }
    }

    pub fn all_alive(k: usize) -> Result<Self> {
        Self::new(vec![true; k])
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn n_alive(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn is_alive(&self, k: usize) -> bool {
        self.flags[k]
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn bitstring(&self) -> String {
        self.flags.iter().map(|&f| if f { '1' } else { '0' }).collect()
    }
}

/// Dead (`c_k = 0`) and alive (`c_k = 1`) index sets and the permutation
/// `tau = dead ++ alive`. `tau_inv[k]` is the position of transcript `k` in `tau`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadAliveSets {
    pub dead: Vec<usize>,
    pub alive: Vec<usize>,
    pub tau: Vec<usize>,
    pub tau_inv: Vec<usize>,
}

impl DeadAliveSets {
    /// `k* = K - c_+`, the number of dead transcripts.
    pub fn k_star(&self) -> usize {
        self.dead.len()
    }
}

pub fn dead_alive_sets(c: &StateVector) -> DeadAliveSets {
    let k = c.len();
    let mut dead = Vec::with_capacity(k);
    let mut alive = Vec::new();
    for (i, &f) in c.flags().iter().enumerate() {
        if f {
            alive.push(i);
        } else {
            dead.push(i);
        }
    }
    let tau: Vec<usize> = dead.iter().chain(alive.iter()).copied().collect();
    let mut tau_inv = vec![0; k];
    for (pos, &t) in tau.iter().enumerate() {
        tau_inv[t] = pos;
    }
    DeadAliveSets {
        dead,
        alive,
        tau,
        tau_inv,
    }
}

/// Free parameters: `u` on the (K-1)-simplex, `v` on the (c_+ - 1)-simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeParams {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FreeParams {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        check_simplex("u", &u)?;
        if !v.is_empty() {
            check_simplex("v", &v)?;
        }
        Ok(FreeParams { u, v })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpressionPair {
    pub theta: Vec<f64>,
    pub w: Vec<f64>,
}

pub(crate) fn check_simplex(name: &str, x: &[f64]) -> Result<()> {
    if x.is_empty() {
        return Err(Error::Dimension(format!("{name} is empty")));
    }
    if x.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::Domain(format!("{name} has a negative or non-finite component")));
    }
    let total: f64 = x.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::Domain(format!("{name} sums to {total}, not 1")));
    }
    Ok(())
}

/// `theta = tau^-1 u`, `w = tau^-1 (u_dead, v * S)` with `S` the alive mass.
/// Dead transcripts get the same stored `u` value in both vectors.
pub fn map_free_to_expression(
    c: &StateVector,
    sets: &DeadAliveSets,
    fp: &FreeParams,
) -> Result<ExpressionPair> {
    let k = c.len();
    if fp.u.len() != k {
        return Err(Error::Dimension(format!(
            "u has length {}, expected {k}",
            fp.u.len()
        )));
    }
    if fp.v.len() != c.n_alive() {
        return Err(Error::Dimension(format!(
            "v has length {}, expected c_+ = {}",
            fp.v.len(),
            c.n_alive()
        )));
    }
    Ok(map_unchecked(sets, &fp.u, &fp.v))
}

pub(crate) fn map_unchecked(sets: &DeadAliveSets, u: &[f64], v: &[f64]) -> ExpressionPair {
    let k_star = sets.k_star();
    let alive_mass: f64 = u[k_star..].iter().sum();
    let mut theta = vec![0.0; u.len()];
    let mut w = vec![0.0; u.len()];
    for (pos, &t) in sets.tau.iter().enumerate() {
        theta[t] = u[pos];
        w[t] = if pos < k_star {
            u[pos]
        } else {
            v[pos - k_star] * alive_mass
        };
    }
    ExpressionPair { theta, w }
}

/// Inverse of [`map_free_to_expression`].
pub fn extract_free_params(sets: &DeadAliveSets, expr: &ExpressionPair) -> FreeParams {
    let u: Vec<f64> = sets.tau.iter().map(|&t| expr.theta[t]).collect();
    let alive_mass: f64 = sets.alive.iter().map(|&t| expr.theta[t]).sum();
    let v = sets.alive.iter().map(|&t| expr.w[t] / alive_mass).collect();
    FreeParams { u, v }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DePrior {
    /// `pi ~ Beta(1/2, 1/2)`.
    Jeffreys,
    Fixed(f64),
}

impl DePrior {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DePrior::Jeffreys => Ok(()),
            DePrior::Fixed(p) if p > 0.0 && p < 1.0 => Ok(()),
            DePrior::Fixed(p) => Err(Error::Parameter(format!(
                "fixed DE probability {p} must lie strictly inside (0, 1)"
            ))),
        }
    }
}

/// Hyperparameters. `alpha[k]` and `gamma[k]` are attached to transcript `k`
/// and follow it through every permutation `tau`.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorConfig {
    pub alpha: Vec<f64>,
    pub gamma: Vec<f64>,
    pub de_prior: DePrior,
}

impl PriorConfig {
    pub fn uniform(k: usize, de_prior: DePrior) -> Self {
        PriorConfig {
            alpha: vec![1.0; k],
            gamma: vec![1.0; k],
            de_prior,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.len() != self.gamma.len() {
            return Err(Error::Dimension("alpha and gamma lengths differ".into()));
        }
        if self
            .alpha
            .iter()
            .chain(self.gamma.iter())
            .any(|&a| !(a > 0.0) || !a.is_finite())
        {
            return Err(Error::Parameter("hyperparameters must be positive".into()));
        }
        self.de_prior.validate()
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// `log( 1 - K pi (1-pi)^(K-1) )`, the normalizer removing `c_+ = 1`.
pub fn log_state_normalizer(k: usize, pi: f64) -> f64 {
    let kf = k as f64;
    let single = kf.ln() + pi.ln() + (kf - 1.0) * (-pi).ln_1p();
    (-single.exp()).ln_1p()
}

pub fn state_prior_logprob(c: &StateVector, pi: f64) -> Result<f64> {
    if !(pi > 0.0 && pi < 1.0) {
        return Err(Error::Parameter(format!("pi = {pi} outside (0, 1)")));
    }
    let k = c.len();
    let n = c.n_alive();
    if n == 1 {
        return Err(Error::InvalidState("c_+ = 1 has zero prior mass".into()));
    }
    Ok(n as f64 * pi.ln() + (k - n) as f64 * (-pi).ln_1p() - log_state_normalizer(k, pi))
}

/// Shapes of the Beta envelope for `pi | c`.
pub fn pi_posterior_params(c_plus: usize, k: usize) -> Result<(f64, f64)> {
    if c_plus > k || c_plus == 1 {
        return Err(Error::InvalidState(format!("c_+ = {c_plus} with K = {k}")));
    }
    Ok((c_plus as f64 + 0.5, (k - c_plus) as f64 + 0.5))
}

/// Exact draw of `pi | c` under the Jeffreys prior.
///
/// The conditional is `Beta(c_+ + 1/2, K - c_+ + 1/2)` divided by the
/// truncation normalizer `Z(pi) = 1 - K pi (1-pi)^(K-1)`. Proposals from the
/// Beta envelope are accepted with probability `Z_min / Z(pi)`, where
/// `Z_min = 1 - (1 - 1/K)^(K-1)` is attained at `pi = 1/K`.
pub fn sample_pi_conditional<R: Rng + ?Sized>(c_plus: usize, k: usize, rng: &mut R) -> Result<f64> {
    let (a, b) = pi_posterior_params(c_plus, k)?;
    let kf = k as f64;
    let log_z_min = if k < 2 {
        0.0
    } else {
        (-((kf - 1.0) * (-1.0 / kf).ln_1p()).exp()).ln_1p()
    };
    loop {
        let pi = dist::sample_beta(a, b, rng)?;
        if !(pi > 0.0 && pi < 1.0) {
            continue;
        }
        let log_accept = log_z_min - log_state_normalizer(k, pi);
        if rng.random::<f64>().ln() < log_accept {
            return Ok(pi);
        }
    }
}

/// Draws `(c, theta, w)` from the joint prior: `pi`, then `c | pi`
/// conditioned on `c_+ != 1`, then `u, v` from their Dirichlet priors.
pub fn sample_joint_prior<R: Rng + ?Sized>(
    prior: &PriorConfig,
    rng: &mut R,
) -> Result<(StateVector, ExpressionPair)> {
    prior.validate()?;
    let k = prior.len();
    let pi = match prior.de_prior {
        DePrior::Jeffreys => dist::sample_beta(0.5, 0.5, rng)?,
        DePrior::Fixed(p) => p,
    };
    let c = loop {
        let flags: Vec<bool> = (0..k).map(|_| rng.random::<f64>() < pi).collect();
        if let Ok(c) = StateVector::new(flags) {
            break c;
        }
    };
    let sets = dead_alive_sets(&c);
    let fp = sample_free_prior(prior, &sets, rng)?;
    Ok((c.clone(), map_unchecked(&sets, &fp.u, &fp.v)))
}

/// `u ~ D(alpha_tau)`, `v ~ D(gamma_alive)`.
pub fn sample_free_prior<R: Rng + ?Sized>(
    prior: &PriorConfig,
    sets: &DeadAliveSets,
    rng: &mut R,
) -> Result<FreeParams> {
    let alpha_tau: Vec<f64> = sets.tau.iter().map(|&t| prior.alpha[t]).collect();
    let u = dist::sample_dirichlet(&alpha_tau, rng)?;
    let v = if sets.alive.is_empty() {
        Vec::new()
    } else {
        let gamma_alive: Vec<f64> = sets.alive.iter().map(|&t| prior.gamma[t]).collect();
        dist::sample_dirichlet(&gamma_alive, rng)?
    };
    Ok(FreeParams { u, v })
}
