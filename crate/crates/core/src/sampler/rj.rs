//! Reversible-jump birth/death moves on the DE state.
//!
//! A birth turns a dead transcript alive (or, from `c_+ = 0`, a pair of
//! them), a death does the reverse. `theta` never changes; the alive weights
//! of condition B are rebuilt from the new `v` and the enlarged (or reduced)
//! alive mass.

use rand::Rng;

use crate::cluster::ClusterModel;
use crate::dist::{dirichlet_logpdf, ln_beta};
use crate::error::{Error, Result};
use crate::model::StateVector;

/// Probability of proposing one specific birth and one specific death from
/// a state with `c_plus` alive transcripts out of `k`.
pub fn rj_move_probabilities(c_plus: usize, k: usize) -> Result<(f64, f64)> {
    if k < 2 || c_plus > k || c_plus == 1 {
        return Err(Error::InvalidState(format!("c_+ = {c_plus} with K = {k}")));
    }
    let kf = k as f64;
    let birth = match c_plus {
        0 => 2.0 / (kf * (kf - 1.0)),
        c if c < k => 1.0 / kf,
        _ => 0.0,
    };
    let death = match c_plus {
        0 => 0.0,
        2 => 2.0 / kf,
        _ => 1.0 / kf,
    };
    Ok((birth, death))
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta = {delta} not in (0, 1)")))
    }
}

/// Inserts `delta` at 0-based `slot` and scales the other components by
/// `1 - delta`. From an empty `v` the result is `(delta, 1 - delta)`.
/// Returns the new vector and `log |J| = (len(v) - 1) log(1 - delta)`.
pub fn rj_birth_transform(v: &[f64], delta: f64, slot: usize) -> Result<(Vec<f64>, f64)> {
    check_delta(delta)?;
    if v.is_empty() {
        return Ok((vec![delta, 1.0 - delta], 0.0));
    }
    if v.len() < 2 {
        return Err(Error::Dimension("v must be empty or have at least 2 components".into()));
    }
    if slot > v.len() {
        return Err(Error::Dimension(format!("slot {slot} out of range for {} components", v.len())));
    }
    let scale = 1.0 - delta;
    let mut out = Vec::with_capacity(v.len() + 1);
    out.extend(v[..slot].iter().map(|x| x * scale));
    out.push(delta);
    out.extend(v[slot..].iter().map(|x| x * scale));
    Ok((out, (v.len() - 1) as f64 * (-delta).ln_1p()))
}

/// Inverse of [`rj_birth_transform`]: removes the component at `slot` and
/// renormalizes. From two components the result is empty and `delta` is the
/// first component whichever slot is named.
pub fn rj_death_transform(v: &[f64], slot: usize) -> Result<(Vec<f64>, f64)> {
    if v.len() < 2 {
        return Err(Error::Dimension("death needs at least 2 alive components".into()));
    }
    if slot >= v.len() {
        return Err(Error::Dimension(format!("slot {slot} out of range for {} components", v.len())));
    }
    if v.len() == 2 {
        return Ok((Vec::new(), v[0]));
    }
    let delta = v[slot];
    let scale = 1.0 - delta;
    let out = v
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != slot)
        .map(|(_, x)| x / scale)
        .collect();
    Ok((out, delta))
}

/// Equally weighted mixture of `Beta(1, b)` densities for `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMixture {
    betas: Vec<f64>,
}

impl BetaMixture {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() || betas.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(Error::Parameter("proposal shapes must be positive".into()));
        }
        Ok(BetaMixture { betas })
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn log_pdf(&self, delta: f64) -> f64 {
        if !(delta > 0.0 && delta < 1.0) {
            return f64::NEG_INFINITY;
        }
        let l1m = (-delta).ln_1p();
        let terms: Vec<f64> = self
            .betas
            .iter()
            .map(|&b| (b - 1.0) * l1m - ln_beta(1.0, b))
            .collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln() - (self.betas.len() as f64).ln()
    }

    /// Inverse-CDF draw from a uniformly chosen component, redrawn until it
    /// lies strictly inside `(0, 1)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let b = self.betas[rng.random_range(0..self.betas.len())];
            let u: f64 = rng.random();
            let delta = -(u.ln() / b).exp_m1();
            if delta > 0.0 && delta < 1.0 {
                return delta;
            }
        }
    }
}

/// Log-likelihood of the condition-B reads under weights `w`, allocations
/// summed out. Alignment probabilities of single-target reads are omitted;
/// they cancel in every ratio.
pub fn condition_b_loglik(model: &ClusterModel, w: &[f64]) -> f64 {
    let data = &model.b;
    let mut ll = 0.0;
    for (k, &n) in data.fixed_counts.iter().enumerate() {
        if n > 0 {
            ll += n as f64 * w[k].ln();
        }
    }
    for i in 0..data.multi.len() {
        let (targets, probs) = data.multi.read(i);
        let mass: f64 = targets.iter().zip(probs).map(|(&t, &p)| w[t as usize] * p).sum();
        ll += mass.ln();
    }
    ll
}

/// Parameters of one side of a birth/death pair.
#[derive(Debug, Clone, Copy)]
pub struct RjSide<'a> {
    pub c: &'a StateVector,
    /// Condition-B weights in transcript order.
    pub w: &'a [f64],
    /// Alive-order weights; empty when `c_+ = 0`.
    pub v: &'a [f64],
}

/// Log acceptance ratio of the birth `small -> big`, made with `delta`.
///
/// Sum of: likelihood ratio (condition A cancels because `theta` is shared),
/// DE prior ratio `(pi / (1 - pi))^(c'_+ - c_+)`, ratio of the `v` prior
/// densities, reverse-over-forward move probabilities, `log |J|` and minus the
/// proposal log-density of `delta`. The `u` prior is the same on both sides
/// since each transcript keeps its own value and hyperparameter.
/// The matched death has the negated ratio.
pub fn rj_acceptance_log_ratio(
    model: &ClusterModel,
    small: RjSide<'_>,
    big: RjSide<'_>,
    delta: f64,
    pi: f64,
    proposal: &BetaMixture,
) -> Result<f64> {
    let k = model.n_components;
    let (c_small, c_big) = (small.c.n_alive(), big.c.n_alive());
    let jump = match (c_small, c_big) {
        (0, 2) => 2.0,
        (a, b) if a >= 2 && b == a + 1 => 1.0,
        _ => {
            return Err(Error::InvalidState(format!(
                "no birth move from c_+ = {c_small} to c_+ = {c_big}"
            )))
        }
    };
    // a tied pseudo-transcript carries no prior weight and every move picks
    // one of the real transcripts uniformly, so the move probabilities cancel
    let (jump, log_moves) = match model.pseudo {
        Some(_) => (1.0, 0.0),
        None => {
            let (p_birth, _) = rj_move_probabilities(c_small, k)?;
            let (_, p_death) = rj_move_probabilities(c_big, k)?;
            (jump, p_death.ln() - p_birth.ln())
        }
    };
    let log_jac = if c_small == 0 {
        0.0
    } else {
        (c_small - 1) as f64 * (-delta).ln_1p()
    };
    let v_prior = |side: RjSide<'_>| -> Result<f64> {
        if side.v.is_empty() {
            return Ok(0.0);
        }
        let g: Vec<f64> = (0..k).filter(|&t| side.c.is_alive(t)).map(|t| model.gamma[t]).collect();
        dirichlet_logpdf(side.v, &g)
    };
    let log_lik = condition_b_loglik(model, big.w) - condition_b_loglik(model, small.w);
    let log_prior = jump * (pi.ln() - (-pi).ln_1p());
    Ok(log_lik + log_prior + v_prior(big)? - v_prior(small)? + log_moves + log_jac
        - proposal.log_pdf(delta))
}

/// Expression state of one rj chain: `theta` and `w` in transcript order,
/// `v` in alive order.
#[derive(Debug, Clone, PartialEq)]
pub struct RjState {
    pub c: StateVector,
    pub theta: Vec<f64>,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
}

/// Condition-B weights: dead transcripts copy `theta`, alive ones get their
/// `v` share of the alive mass.
pub fn weights_from(c: &StateVector, theta: &[f64], v: &[f64]) -> Vec<f64> {
    let alive_mass: f64 = (0..theta.len()).filter(|&k| c.is_alive(k)).map(|k| theta[k]).sum();
    let mut w = theta.to_vec();
    let mut l = 0;
    for k in 0..theta.len() {
        if c.is_alive(k) {
            w[k] = v[l] * alive_mass;
            l += 1;
        }
    }
    w
}

/// Proposes a birth or death for a uniformly chosen transcript and accepts
/// or rejects it. Returns whether the move was accepted. A pseudo-transcript
/// is never chosen; it is born with the first alive member and dies with
/// the last.
pub fn rj_step<R: Rng + ?Sized>(
    model: &ClusterModel,
    state: &mut RjState,
    pi: f64,
    proposal: &BetaMixture,
    rng: &mut R,
) -> Result<bool> {
    let k = model.n_components;
    let k0 = match model.pseudo {
        Some(p) => {
            let j = rng.random_range(0..k - 1);
            j + (j >= p) as usize
        }
        None => rng.random_range(0..k),
    };
    let flags = state.c.flags();
    if !flags[k0] {
        let mut new_flags = flags.to_vec();
        new_flags[k0] = true;
        let delta = proposal.sample(rng);
        let v_new = if state.c.n_alive() == 0 {
            let k1 = match model.pseudo {
                Some(p) => p,
                None => {
                    let j = rng.random_range(0..k - 1);
                    j + (j >= k0) as usize
                }
            };
            new_flags[k1] = true;
            rj_birth_transform(&[], delta, 0)?.0
        } else {
            let slot = flags[..k0].iter().filter(|&&f| f).count();
            rj_birth_transform(&state.v, delta, slot)?.0
        };
        let c_new = StateVector::new(new_flags)?;
        let w_new = weights_from(&c_new, &state.theta, &v_new);
        let small = RjSide {
            c: &state.c,
            w: &state.w,
            v: &state.v,
        };
        let big = RjSide {
            c: &c_new,
            w: &w_new,
            v: &v_new,
        };
        let log_a = rj_acceptance_log_ratio(model, small, big, delta, pi, proposal)?;
        if accept(log_a, rng) {
            *state = RjState {
                c: c_new,
                theta: std::mem::take(&mut state.theta),
                w: w_new,
                v: v_new,
            };
            return Ok(true);
        }
    } else {
        let mut new_flags = flags.to_vec();
        let (v_new, delta) = if state.c.n_alive() == 2 {
            new_flags.iter_mut().for_each(|f| *f = false);
            rj_death_transform(&state.v, 0)?
        } else {
            new_flags[k0] = false;
            let slot = flags[..k0].iter().filter(|&&f| f).count();
            rj_death_transform(&state.v, slot)?
        };
        if !(delta > 0.0 && delta < 1.0) {
            return Ok(false);
        }
        let c_new = StateVector::new(new_flags)?;
        let w_new = weights_from(&c_new, &state.theta, &v_new);
        let small = RjSide {
            c: &c_new,
            w: &w_new,
            v: &v_new,
        };
        let big = RjSide {
            c: &state.c,
            w: &state.w,
            v: &state.v,
        };
        let log_a = -rj_acceptance_log_ratio(model, small, big, delta, pi, proposal)?;
        if accept(log_a, rng) {
            *state = RjState {
                c: c_new,
                theta: std::mem::take(&mut state.theta),
                w: w_new,
                v: v_new,
            };
            return Ok(true);
        }
    }
    Ok(false)
}

fn accept<R: Rng + ?Sized>(log_a: f64, rng: &mut R) -> bool {
    if log_a.is_nan() {
        return false;
    }
    log_a >= 0.0 || rng.random::<f64>().ln() < log_a
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn move_probabilities() {
        assert_eq!(rj_move_probabilities(0, 6).unwrap(), (1.0 / 15.0, 0.0));
        assert_eq!(rj_move_probabilities(3, 6).unwrap(), (1.0 / 6.0, 1.0 / 6.0));
        assert_eq!(rj_move_probabilities(2, 6).unwrap().1, 1.0 / 3.0);
        assert_eq!(rj_move_probabilities(6, 6).unwrap(), (0.0, 1.0 / 6.0));
        assert!(rj_move_probabilities(1, 6).is_err());
    }

    #[test]
    fn birth_transform_examples() {
        let (v, lj) = rj_birth_transform(&[0.25; 4], 0.5, 2).unwrap();
        assert!((lj.exp() - 0.125).abs() < 1e-15);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let (v, lj) = rj_birth_transform(&[], 0.3, 0).unwrap();
        assert_eq!(v, vec![0.3, 0.7]);
        assert_eq!(lj, 0.0);
        let (v, lj) = rj_birth_transform(&[0.2, 0.3, 0.5], 0.4, 0).unwrap();
        let want = [0.4, 0.12, 0.18, 0.3];
        for (a, b) in v.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((lj.exp() - 0.36).abs() < 1e-15);
        let (back, delta) = rj_death_transform(&v, 0).unwrap();
        assert_eq!(delta, 0.4);
        for (a, b) in back.iter().zip([0.2, 0.3, 0.5]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_delta_rejected() {
        assert!(rj_birth_transform(&[0.5, 0.5], 0.0, 0).is_err());
        assert!(rj_birth_transform(&[0.5, 0.5], 1.0, 0).is_err());
    }

    #[test]
    fn death_transform_examples() {
        let (v, d) = rj_death_transform(&[0.4, 0.6], 0).unwrap();
        assert!(v.is_empty());
        assert_eq!(d, 0.4);
        let (v, d) = rj_death_transform(&[0.5, 0.25, 0.25], 0).unwrap();
        assert_eq!(d, 0.5);
        assert_eq!(v, vec![0.5, 0.5]);
    }

    #[test]
    fn mixture_density_integrates_to_one() {
        let m = BetaMixture::new(vec![1.0, 10.0, 100.0, 250.0, 500.0]).unwrap();
        // substitution delta = 1 - t^4 concentrates grid points near 0
        let n = 200_000;
        let mut total = 0.0;
        for i in 0..n {
            let t = (i as f64 + 0.5) / n as f64;
            let delta = 1.0 - t.powi(4);
            total += m.log_pdf(delta).exp() * 4.0 * t.powi(3) / n as f64;
        }
        assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn mixture_sample_mean() {
        let betas = vec![1.0, 10.0, 100.0, 250.0, 500.0];
        let m = BetaMixture::new(betas.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| m.sample(&mut rng)).sum::<f64>() / n as f64;
        let want: f64 = betas.iter().map(|b| 1.0 / (1.0 + b)).sum::<f64>() / 5.0;
        assert!((mean - want).abs() < 0.003);
    }

    #[test]
    fn weights_keep_dead_bits() {
        let c = StateVector::from_bits(&[1, 0, 1]).unwrap();
        let theta = [0.2, 0.3, 0.5];
        let w = weights_from(&c, &theta, &[0.25, 0.75]);
        assert_eq!(w[1].to_bits(), theta[1].to_bits());
        assert!((w[0] - 0.175).abs() < 1e-15);
        assert!((w[2] - 0.525).abs() < 1e-15);
    }
}
