//! Full conditional of the free parameters given the allocation counts.

use rand::Rng;

use crate::dist::{self, GDParams};
use crate::error::{Error, Result};
use crate::model::{DeadAliveSets, FreeParams};

/// Shapes of the conditional of `u` (Generalized Dirichlet over the `tau`
/// order) and of `v` (Dirichlet over the alive transcripts).
///
/// Dead positions carry the counts of both conditions, alive positions only
/// condition A; each `beta` is the total mass of the later positions, with the
/// condition-B counts of the alive block entering the dead positions' tails.
pub fn uv_conditional_params(
    alpha: &[f64],
    gamma: &[f64],
    counts_a: &[u64],
    counts_b: &[u64],
    sets: &DeadAliveSets,
) -> Result<(GDParams, Vec<f64>)> {
    let k = alpha.len();
    if gamma.len() != k || counts_a.len() != k || counts_b.len() != k || sets.tau.len() != k {
        return Err(Error::Dimension("conditional inputs differ in length".into()));
    }
    let k_star = sets.k_star();
    let shape: Vec<f64> = sets
        .tau
        .iter()
        .enumerate()
        .map(|(pos, &t)| {
            let base = alpha[t] + counts_a[t] as f64;
            if pos < k_star {
                base + counts_b[t] as f64
            } else {
                base
            }
        })
        .collect();
    let alive_b: f64 = sets.alive.iter().map(|&t| counts_b[t] as f64).sum();
    // tail[pos] = sum of shape[pos+1..]
    let mut tail = vec![0.0; k];
    for pos in (0..k.saturating_sub(1)).rev() {
        tail[pos] = tail[pos + 1] + shape[pos + 1];
    }
    let lambda = shape[..k - 1].to_vec();
    let beta = (0..k - 1)
        .map(|pos| if pos < k_star { tail[pos] + alive_b } else { tail[pos] })
        .collect();
    let v_shape = sets
        .alive
        .iter()
        .map(|&t| gamma[t] + counts_b[t] as f64)
        .collect();
    Ok((GDParams::new(lambda, beta)?, v_shape))
}

/// Draws `(u, v)` from their full conditional.
pub fn sample_uv_conditional<R: Rng + ?Sized>(
    alpha: &[f64],
    gamma: &[f64],
    counts_a: &[u64],
    counts_b: &[u64],
    sets: &DeadAliveSets,
    rng: &mut R,
) -> Result<FreeParams> {
    let (gd, v_shape) = uv_conditional_params(alpha, gamma, counts_a, counts_b, sets)?;
    let u = if sets.alive.is_empty() {
        let shape: Vec<f64> = (0..alpha.len())
            .map(|t| alpha[t] + (counts_a[t] + counts_b[t]) as f64)
            .collect();
        dist::sample_dirichlet(&shape, rng)?
    } else {
        dist::sample_gd(&gd, rng)?
    };
    let v = if v_shape.is_empty() {
        Vec::new()
    } else {
        dist::sample_dirichlet(&v_shape, rng)?
    };
    Ok(FreeParams { u, v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dead_alive_sets, StateVector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_of(draws: &[Vec<f64>]) -> Vec<f64> {
        let n = draws.len() as f64;
        (0..draws[0].len())
            .map(|i| draws.iter().map(|d| d[i]).sum::<f64>() / n)
            .collect()
    }

    #[test]
    fn all_dead_reduces_to_pooled_dirichlet() {
        let sets = dead_alive_sets(&StateVector::all_dead(2));
        let (gd, v) = uv_conditional_params(&[1.0, 1.0], &[1.0, 1.0], &[3, 1], &[2, 2], &sets).unwrap();
        // GD(6; 4) is Dirichlet(6, 4)
        assert_eq!(gd.a(), &[6.0]);
        assert_eq!(gd.b(), &[4.0]);
        assert!(v.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws: Vec<_> = (0..40_000)
            .map(|_| sample_uv_conditional(&[1.0, 1.0], &[1.0, 1.0], &[3, 1], &[2, 2], &sets, &mut rng).unwrap().u)
            .collect();
        assert!((mean_of(&draws)[0] - 0.6).abs() < 0.005);
    }

    #[test]
    fn all_alive_gives_independent_dirichlets() {
        let sets = dead_alive_sets(&StateVector::all_alive(2).unwrap());
        let (gd, v) = uv_conditional_params(&[1.0, 1.0], &[1.0, 1.0], &[3, 1], &[2, 2], &sets).unwrap();
        assert_eq!(gd.a(), &[4.0]);
        assert_eq!(gd.b(), &[2.0]);
        assert_eq!(v, vec![3.0, 3.0]);
    }

    #[test]
    fn mixed_state_shapes() {
        // c = (1, 0, 1): tau = (1, 0, 2), k* = 1
        let c = StateVector::from_bits(&[1, 0, 1]).unwrap();
        let sets = dead_alive_sets(&c);
        let (gd, v) =
            uv_conditional_params(&[1.0, 2.0, 3.0], &[0.5, 0.5, 0.5], &[4, 5, 6], &[7, 8, 9], &sets).unwrap();
        // dead position: 2 + 5 + 8 = 15; alive positions: 1 + 4 = 5, 3 + 6 = 9
        assert_eq!(gd.a(), &[15.0, 5.0]);
        // tail of dead position: 5 + 9 + (7 + 9); tail of first alive: 9
        assert_eq!(gd.b(), &[30.0, 9.0]);
        assert_eq!(v, vec![7.5, 9.5]);
    }

    #[test]
    fn no_reads_returns_prior() {
        let c = StateVector::from_bits(&[1, 0, 1]).unwrap();
        let sets = dead_alive_sets(&c);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let draws: Vec<_> = (0..40_000)
            .map(|_| sample_uv_conditional(&[1.0; 3], &[1.0; 3], &[0; 3], &[0; 3], &sets, &mut rng).unwrap())
            .collect();
        let u: Vec<_> = draws.iter().map(|d| d.u.clone()).collect();
        let v: Vec<_> = draws.iter().map(|d| d.v.clone()).collect();
        for m in mean_of(&u) {
            assert!((m - 1.0 / 3.0).abs() < 0.005);
        }
        for m in mean_of(&v) {
            assert!((m - 0.5).abs() < 0.005);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let sets = dead_alive_sets(&StateVector::all_dead(2));
        assert!(uv_conditional_params(&[1.0; 3], &[1.0; 3], &[0; 3], &[0; 3], &sets).is_err());
    }
}
