//! Read-to-component allocations and their count tables.

use rand::Rng;

use crate::cluster::{ClusterModel, ConditionData};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    A,
    B,
}

/// Allocations of the multi-target reads of both conditions. The count
/// tables include the fixed counts of single-target and pinned reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllocationState {
    pub xi: Vec<u32>,
    pub z: Vec<u32>,
    pub counts_a: Vec<u64>,
    pub counts_b: Vec<u64>,
}

impl AllocationState {
    pub fn counts(&self, cond: Condition) -> &[u64] {
        match cond {
            Condition::A => &self.counts_a,
            Condition::B => &self.counts_b,
        }
    }

    /// Recomputes both count tables from scratch and compares them with the
    /// incremental ones.
    pub fn audit(&self, model: &ClusterModel) -> Result<()> {
        for (name, alloc, counts, data) in [
            ("condition A", &self.xi, &self.counts_a, &model.a),
            ("condition B", &self.z, &self.counts_b, &model.b),
        ] {
            let fresh = tally(alloc, data);
            if &fresh != counts {
                return Err(Error::InvalidState(format!(
                    "{name} counts drifted: incremental {counts:?}, recomputed {fresh:?}"
                )));
            }
        }
        Ok(())
    }
}

pub(crate) fn tally(alloc: &[u32], data: &ConditionData) -> Vec<u64> {
    let mut counts = data.fixed_counts.clone();
    for &k in alloc {
        counts[k as usize] += 1;
    }
    counts
}

/// Draws an index proportional to `weights`; `total` is their sum.
#[inline]
pub(crate) fn sample_index<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let mut x = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if x < w {
            return i;
        }
        x -= w;
    }
    // rounding left a sliver past the end; take the last positive weight
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Draws every multi-target read's allocation independently given the
/// expression vectors: condition A with `theta`, condition B with `w`.
pub fn gibbs_allocations<R: Rng + ?Sized>(
    theta: &[f64],
    w: &[f64],
    model: &ClusterModel,
    rng: &mut R,
) -> Result<AllocationState> {
    let n = model.n_components;
    if theta.len() != n || w.len() != n {
        return Err(Error::Dimension(format!(
            "expression vectors must have {n} components"
        )));
    }
    let xi = allocate(theta, &model.a, rng)?;
    let z = allocate(w, &model.b, rng)?;
    Ok(AllocationState {
        counts_a: tally(&xi, &model.a),
        counts_b: tally(&z, &model.b),
        xi,
        z,
    })
}

fn allocate<R: Rng + ?Sized>(weights: &[f64], data: &ConditionData, rng: &mut R) -> Result<Vec<u32>> {
    let mut out = Vec::with_capacity(data.multi.len());
    let mut buf = Vec::new();
    for i in 0..data.multi.len() {
        let (targets, probs) = data.multi.read(i);
        buf.clear();
        buf.extend(targets.iter().zip(probs).map(|(&t, &p)| weights[t as usize] * p));
        let total: f64 = buf.iter().sum();
        if !(total > 0.0) {
            return Err(Error::ZeroMass { read: i });
        }
        out.push(targets[sample_index(&buf, total, rng)]);
    }
    Ok(out)
}

/// Allocation probabilities of one read given expression weights.
pub fn allocation_probs(weights: &[f64], targets: &[u32], probs: &[f64]) -> Result<Vec<f64>> {
    let raw: Vec<f64> = targets
        .iter()
        .zip(probs)
        .map(|(&t, &p)| weights[t as usize] * p)
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::ZeroMass { read: 0 });
    }
    Ok(raw.into_iter().map(|x| x / total).collect())
}
