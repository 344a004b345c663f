//! Exact posterior of tiny instances by exhaustive enumeration of every
//! allocation and state vector.
//!
//! Written independently of the samplers: each configuration's weight is the
//! closed-form marginal of the allocations given `c` (expression parameters
//! integrated out), times the alignment probabilities, times the prior of
//! `c`. Under the Jeffreys prior the `pi` integral is done numerically.

use crate::dist::ln_gamma;
use crate::error::{Error, Result};
use crate::ingest::AlignmentSet;
use crate::model::{DePrior, PriorConfig, StateVector};

pub const MAX_TRANSCRIPTS: usize = 4;
pub const MAX_READS: usize = 10;
/// Grid points of the `pi` quadrature.
pub const QUADRATURE_POINTS: usize = 2001;

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePosterior {
    /// Every admissible state with its posterior probability.
    pub states: Vec<(StateVector, f64)>,
    pub p_de: Vec<f64>,
    pub theta_mean: Vec<f64>,
    pub w_mean: Vec<f64>,
}

/// Probability of one specific state with `c_+ = n` under
/// `P(c | pi) P(pi)`, for every `n` in `0..=k` (entry 1 is 0).
///
/// With `pi = sin^2(phi)` the Beta(1/2, 1/2) density and the Jacobian
/// combine into the constant `2 / PI` on `phi in [0, PI/2]`, leaving a smooth
/// integrand for the trapezoid rule.
pub fn state_prior_probs(k: usize, de_prior: DePrior, n_grid: usize) -> Result<Vec<f64>> {
    de_prior.validate()?;
    if k < 2 {
        return Err(Error::Dimension("at least 2 transcripts required".into()));
    }
    let given_pi = |pi: f64, n: usize| -> f64 {
        if n == 1 {
            return 0.0;
        }
        let kf = k as f64;
        let num = pi.powi(n as i32) * (1.0 - pi).powi((k - n) as i32);
        num / (1.0 - kf * pi * (1.0 - pi).powi(k as i32 - 1))
    };
    match de_prior {
        DePrior::Fixed(pi) => Ok((0..=k).map(|n| given_pi(pi, n)).collect()),
        DePrior::Jeffreys => {
            if n_grid < 3 {
                return Err(Error::Parameter("quadrature needs at least 3 points".into()));
            }
            let h = std::f64::consts::FRAC_PI_2 / (n_grid - 1) as f64;
            let mut out = vec![0.0; k + 1];
            for g in 0..n_grid {
                let phi = g as f64 * h;
                let pi = phi.sin().powi(2);
                let weight = if g == 0 || g == n_grid - 1 { 0.5 } else { 1.0 };
                for (n, slot) in out.iter_mut().enumerate() {
                    *slot += weight * given_pi(pi, n);
                }
            }
            let scale = h * 2.0 / std::f64::consts::PI;
            out.iter_mut().for_each(|x| *x *= scale);
            Ok(out)
        }
    }
}

fn admissible_states(k: usize) -> Vec<Vec<bool>> {
    (0u32..1 << k)
        .map(|bits| (0..k).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
        .filter(|c| c.iter().filter(|&&f| f).count() != 1)
        .collect()
}

/// Log of the allocation marginal given `c` (expression integrated out),
/// alignment probabilities excluded.
fn log_allocation_marginal(alpha: &[f64], gamma: &[f64], a: &[u64], b: &[u64], c: &[bool]) -> f64 {
    let mut lp = 0.0;
    let (mut al, mut ga, mut sa, mut sb, mut any) = (0.0, 0.0, 0.0, 0.0, false);
    for k in 0..c.len() {
        let (ak, bk) = (a[k] as f64, b[k] as f64);
        if c[k] {
            lp += ln_gamma(alpha[k] + ak) + ln_gamma(gamma[k] + bk) - ln_gamma(gamma[k]);
            al += alpha[k];
            ga += gamma[k];
            sa += ak;
            sb += bk;
            any = true;
        } else {
            lp += ln_gamma(alpha[k] + ak + bk);
        }
    }
    if any {
        lp += ln_gamma(al + sa + sb) - ln_gamma(al + sa) - ln_gamma(ga + sb) + ln_gamma(ga);
    }
    lp
}

/// Log joint of `(xi, z, c)` up to a constant, for fixed `pi`; reads given as
/// sparse alignment lists, `xi[i]` / `z[j]` transcript indices.
#[allow(clippy::too_many_arguments)]
pub fn log_joint(
    reads_a: &[Vec<(usize, f64)>],
    reads_b: &[Vec<(usize, f64)>],
    alpha: &[f64],
    gamma: &[f64],
    xi: &[usize],
    z: &[usize],
    c: &[bool],
    pi: f64,
) -> f64 {
    let k = alpha.len();
    let mut a = vec![0u64; k];
    let mut b = vec![0u64; k];
    let mut lf = 0.0;
    for (r, &t) in reads_a.iter().zip(xi) {
        a[t] += 1;
        lf += r.iter().find(|(u, _)| *u == t).map_or(f64::NEG_INFINITY, |&(_, p)| p.ln());
    }
    for (r, &t) in reads_b.iter().zip(z) {
        b[t] += 1;
        lf += r.iter().find(|(u, _)| *u == t).map_or(f64::NEG_INFINITY, |&(_, p)| p.ln());
    }
    let n = c.iter().filter(|&&f| f).count() as f64;
    lf + log_allocation_marginal(alpha, gamma, &a, &b, c) + n * pi.ln() + (k as f64 - n) * (-pi).ln_1p()
}

/// Conditional means of `(theta, w)` given the counts and `c`: each stick
/// fraction of `u` (dead transcripts first, then alive, ascending) is an
/// independent Beta, and `v` is Dirichlet independent of `u`.
fn conditional_means(alpha: &[f64], gamma: &[f64], a: &[u64], b: &[u64], c: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let k = c.len();
    let order: Vec<usize> = (0..k).filter(|&t| !c[t]).chain((0..k).filter(|&t| c[t])).collect();
    let n_dead = order.iter().filter(|&&t| !c[t]).count();
    let shape: Vec<f64> = order
        .iter()
        .map(|&t| alpha[t] + a[t] as f64 + if c[t] { 0.0 } else { b[t] as f64 })
        .collect();
    let alive_b: f64 = (0..k).filter(|&t| c[t]).map(|t| b[t] as f64).sum();
    let mut theta = vec![0.0; k];
    let mut rest = 1.0;
    for pos in 0..k {
        let t = order[pos];
        if pos + 1 == k {
            theta[t] = rest;
            break;
        }
        let mut tail: f64 = shape[pos + 1..].iter().sum();
        if pos < n_dead {
            tail += alive_b;
        }
        let m = shape[pos] / (shape[pos] + tail);
        theta[t] = rest * m;
        rest *= 1.0 - m;
    }
    let mut w = theta.clone();
    let alive: Vec<usize> = (0..k).filter(|&t| c[t]).collect();
    if !alive.is_empty() {
        let mass: f64 = alive.iter().map(|&t| theta[t]).sum();
        let total: f64 = alive.iter().map(|&t| gamma[t] + b[t] as f64).sum();
        for &t in &alive {
            w[t] = mass * (gamma[t] + b[t] as f64) / total;
        }
    }
    (theta, w)
}

/// Exact posterior on an [`AlignmentSet`] with at most
/// [`MAX_TRANSCRIPTS`] transcripts and [`MAX_READS`] reads.
pub fn brute_force_posterior(aset: &AlignmentSet, prior: &PriorConfig) -> Result<OraclePosterior> {
    let conv = |reads: &[crate::ingest::ReadRecord]| reads.iter().map(|r| r.aligns.clone()).collect::<Vec<_>>();
    brute_force_reads(&conv(&aset.reads_a), &conv(&aset.reads_b), prior)
}

pub fn brute_force_reads(
    reads_a: &[Vec<(usize, f64)>],
    reads_b: &[Vec<(usize, f64)>],
    prior: &PriorConfig,
) -> Result<OraclePosterior> {
    prior.validate()?;
    let k = prior.len();
    if k > MAX_TRANSCRIPTS || reads_a.len() + reads_b.len() > MAX_READS {
        return Err(Error::Budget(format!(
            "{k} transcripts and {} reads exceed the limits of {MAX_TRANSCRIPTS} and {MAX_READS}",
            reads_a.len() + reads_b.len()
        )));
    }
    if k < 2 {
        return Err(Error::Dimension("at least 2 transcripts required".into()));
    }
    let state_prior = state_prior_probs(k, prior.de_prior, QUADRATURE_POINTS)?;
    let states = admissible_states(k);
    let log_weight = |a: &[u64], b: &[u64], lf: f64, c: &[bool]| {
        let n = c.iter().filter(|&&f| f).count();
        lf + log_allocation_marginal(&prior.alpha, &prior.gamma, a, b, c) + state_prior[n].ln()
    };

    // first pass: largest log weight, used as a shift in the second
    let mut shift = f64::NEG_INFINITY;
    enumerate_counts(k, reads_a, reads_b, |a, b, lf| {
        for c in &states {
            shift = shift.max(log_weight(a, b, lf, c));
        }
    });

    let mut total = 0.0;
    let mut state_mass = vec![0.0; states.len()];
    let mut theta = vec![0.0; k];
    let mut w = vec![0.0; k];
    enumerate_counts(k, reads_a, reads_b, |a, b, lf| {
        for (s, c) in states.iter().enumerate() {
            let x = (log_weight(a, b, lf, c) - shift).exp();
            if x == 0.0 {
                continue;
            }
            let (th, ww) = conditional_means(&prior.alpha, &prior.gamma, a, b, c);
            state_mass[s] += x;
            total += x;
            for t in 0..k {
                theta[t] += x * th[t];
                w[t] += x * ww[t];
            }
        }
    });

    let mut p_de = vec![0.0; k];
    let mut out_states = Vec::with_capacity(states.len());
    for (c, mass) in states.iter().zip(&state_mass) {
        let p = mass / total;
        for t in 0..k {
            if c[t] {
                p_de[t] += p;
            }
        }
        out_states.push((StateVector::new(c.clone()).expect("admissible"), p));
    }
    theta.iter_mut().for_each(|x| *x /= total);
    w.iter_mut().for_each(|x| *x /= total);
    Ok(OraclePosterior {
        states: out_states,
        p_de,
        theta_mean: theta,
        w_mean: w,
    })
}

/// Calls `f(counts_a, counts_b, log_alignment_prob)` for every joint
/// allocation of the reads.
fn enumerate_counts(
    k: usize,
    reads_a: &[Vec<(usize, f64)>],
    reads_b: &[Vec<(usize, f64)>],
    mut f: impl FnMut(&[u64], &[u64], f64),
) {
    let reads: Vec<&Vec<(usize, f64)>> = reads_a.iter().chain(reads_b).collect();
    let n_a = reads_a.len();
    let mut choice = vec![0usize; reads.len()];
    let mut a = vec![0u64; k];
    let mut b = vec![0u64; k];
    loop {
        a.iter_mut().for_each(|x| *x = 0);
        b.iter_mut().for_each(|x| *x = 0);
        let mut lf = 0.0;
        for (i, r) in reads.iter().enumerate() {
            let (t, p) = r[choice[i]];
            if i < n_a {
                a[t] += 1;
            } else {
                b[t] += 1;
            }
            lf += p.ln();
        }
        f(&a, &b, lf);
        // odometer over every read's alignment list
        let mut i = 0;
        loop {
            if i == reads.len() {
                return;
            }
            choice[i] += 1;
            if choice[i] < reads[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
