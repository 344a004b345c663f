//! Synthetic two-condition datasets with known DE labels.
//!
//! Per-replicate reads-per-kilobase values are drawn around transcript means
//! (Poisson or Negative Binomial), DE transcripts get their means scaled in
//! opposite directions between the conditions, and reads are sampled from
//! the implied abundances with uniform start positions. Alignment ambiguity
//! comes from a shared-block map: transcripts are grouped into genes whose
//! isoforms share a leading block, and a read falling entirely in that block
//! aligns to every isoform of the gene.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Gamma, Poisson};

use crate::error::{Error, Result};
use crate::ingest::{
    uniform_alignment_prob, write_alignment_file, write_catalog, AlignmentSet, ReadRecord, TranscriptCatalog,
    TranscriptEntry,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeanModel {
    Constant(f64),
    /// `mu_k ~ U(lo, hi)`.
    Uniform(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dispersion {
    /// Every replicate uses the mean itself: no replicate variation.
    Exact,
    Poisson,
    /// Mean `mu`, variance `mu + mu^2 / phi`.
    NegativeBinomial { phi: f64 },
}

/// How DE means are scaled. The first half of the DE transcripts uses the
/// factors as given, the second half has them swapped between conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FoldChange {
    Fixed { a_factor: f64, b_factor: f64 },
    /// `delta ~ U(lo, hi)`, factors `(delta, 1 / delta)`.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub n_transcripts: usize,
    pub n_de: usize,
    pub replicates_a: usize,
    pub replicates_b: usize,
    pub mean: MeanModel,
    pub dispersion: Dispersion,
    pub fold_change: FoldChange,
    pub reads_per_replicate_a: usize,
    pub reads_per_replicate_b: usize,
    pub read_length: u64,
    pub length_range: (u64, u64),
    /// Consecutive transcripts grouped into one gene.
    pub isoforms_per_gene: usize,
    /// Fraction of the shortest isoform's length forming the shared block.
    pub shared_fraction: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    /// Two Poisson replicates per condition, mean 65, DE means 100 vs 20.
    pub fn poisson_two_replicates(n_transcripts: usize, n_de: usize, reads_per_replicate: usize, seed: u64) -> Self {
        ScenarioSpec {
            n_transcripts,
            n_de,
            replicates_a: 2,
            replicates_b: 2,
            mean: MeanModel::Constant(65.0),
            dispersion: Dispersion::Poisson,
            fold_change: FoldChange::Fixed {
                a_factor: 1.0 / 0.65,
                b_factor: 1.0 / 3.25,
            },
            reads_per_replicate_a: reads_per_replicate,
            reads_per_replicate_b: reads_per_replicate,
            read_length: 100,
            length_range: (600, 3000),
            isoforms_per_gene: 3,
            shared_fraction: 0.3,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_transcripts < 2 {
            return bad("at least 2 transcripts required");
        }
        if !self.n_de.is_multiple_of(2) || self.n_de > self.n_transcripts {
            return bad("the number of DE transcripts must be even and at most K");
        }
        if self.replicates_a == 0 || self.replicates_b == 0 {
            return bad("each condition needs at least one replicate");
        }
        match self.mean {
            MeanModel::Constant(m) if m > 0.0 => {}
            MeanModel::Uniform(lo, hi) if lo >= 0.0 && hi > lo => {}
            _ => return bad("invalid mean model"),
        }
        if let Dispersion::NegativeBinomial { phi } = self.dispersion {
            if !(phi > 0.0) {
                return bad("NB dispersion must be positive");
            }
        }
        match self.fold_change {
            FoldChange::Fixed { a_factor, b_factor } if a_factor > 0.0 && b_factor > 0.0 => {}
            FoldChange::Uniform { lo, hi } if lo > 0.0 && hi >= lo => {}
            _ => return bad("invalid fold-change model"),
        }
        let (lo, hi) = self.length_range;
        if lo == 0 || hi < lo {
            return bad("invalid transcript length range");
        }
        if self.read_length == 0 || self.read_length > hi {
            return bad("read length exceeds every transcript length");
        }
        if self.isoforms_per_gene == 0 || !(0.0..=1.0).contains(&self.shared_fraction) {
            return bad("invalid overlap structure");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub de: Vec<bool>,
    /// Expected read proportions per condition, averaged over replicates.
    pub theta: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Replicates pooled per condition, in replicate order.
    pub aset: AlignmentSet,
    pub replicate_sizes_a: Vec<usize>,
    pub replicate_sizes_b: Vec<usize>,
    /// Transcript each read was sampled from.
    pub origins_a: Vec<usize>,
    pub origins_b: Vec<usize>,
    pub truth: Truth,
}

struct Layout {
    lengths: Vec<u64>,
    /// `(first transcript, end, shared block length)` per gene.
    genes: Vec<(usize, usize, u64)>,
    gene_of: Vec<usize>,
}

pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let k = spec.n_transcripts;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = spec.length_range;
    let lengths: Vec<u64> = (0..k).map(|_| rng.random_range(lo..=hi)).collect();
    let layout = gene_layout(lengths, spec);
    let catalog = TranscriptCatalog::new(
        layout
            .lengths
            .iter()
            .enumerate()
            .map(|(i, &length)| TranscriptEntry {
                id: format!("T{:05}", i + 1),
                length,
            })
            .collect(),
    )?;

    let mut de = vec![false; k];
    let mut factors = vec![(1.0, 1.0); k];
    let picked = sample(&mut rng, k, spec.n_de).into_vec();
    for (pos, &t) in picked.iter().enumerate() {
        de[t] = true;
        let (fa, fb) = match spec.fold_change {
            FoldChange::Fixed { a_factor, b_factor } => (a_factor, b_factor),
            FoldChange::Uniform { lo, hi } => {
                let d = if hi > lo { rng.random_range(lo..hi) } else { lo };
                (d, 1.0 / d)
            }
        };
        factors[t] = if pos < spec.n_de / 2 { (fa, fb) } else { (fb, fa) };
    }
    let mu: Vec<f64> = (0..k)
        .map(|_| match spec.mean {
            MeanModel::Constant(m) => m,
            MeanModel::Uniform(lo, hi) => rng.random_range(lo..hi),
        })
        .collect();

    let mut sim = |n_rep: usize, n_reads: usize, factor: fn(&(f64, f64)) -> f64, tag: char| -> Result<_> {
        let mut reads = Vec::new();
        let mut origins = Vec::new();
        let mut sizes = Vec::new();
        let mut truth = vec![0.0; k];
        for rep in 0..n_rep {
            let means: Vec<f64> = (0..k).map(|t| mu[t] * factor(&factors[t])).collect();
            let weights = replicate_weights(&means, spec, &layout, &mut rng)?;
            let total: f64 = weights.iter().sum();
            for t in 0..k {
                truth[t] += weights[t] / total / n_rep as f64;
            }
            let index = WeightedIndex::new(&weights)
                .map_err(|e| Error::Config(format!("replicate weights: {e}")))?;
            for i in 0..n_reads {
                let t = index.sample(&mut rng);
                reads.push(simulate_read(format!("{tag}{}_{}", rep + 1, i + 1), t, spec, &layout, &mut rng));
                origins.push(t);
            }
            sizes.push(n_reads);
        }
        Ok((reads, origins, sizes, truth))
    };
    let (reads_a, origins_a, sizes_a, theta) = sim(spec.replicates_a, spec.reads_per_replicate_a, |f| f.0, 'a')?;
    let (reads_b, origins_b, sizes_b, w) = sim(spec.replicates_b, spec.reads_per_replicate_b, |f| f.1, 'b')?;
    Ok(Scenario {
        aset: AlignmentSet::new(catalog, reads_a, reads_b)?,
        replicate_sizes_a: sizes_a,
        replicate_sizes_b: sizes_b,
        origins_a,
        origins_b,
        truth: Truth { de, theta, w },
    })
}

fn gene_layout(lengths: Vec<u64>, spec: &ScenarioSpec) -> Layout {
    let k = lengths.len();
    let mut genes = Vec::new();
    let mut gene_of = vec![0; k];
    let mut start = 0;
    while start < k {
        let end = (start + spec.isoforms_per_gene).min(k);
        let shortest = lengths[start..end].iter().copied().min().unwrap_or(0);
        let block = if end - start > 1 {
            (spec.shared_fraction * shortest as f64).floor() as u64
        } else {
            0
        };
        for g in gene_of.iter_mut().take(end).skip(start) {
            *g = genes.len();
        }
        genes.push((start, end, block));
        start = end;
    }
    Layout { lengths, genes, gene_of }
}

/// Per-transcript sampling weights of one replicate: drawn reads per
/// kilobase times length; transcripts shorter than a read get weight 0.
fn replicate_weights<R: Rng + ?Sized>(means: &[f64], spec: &ScenarioSpec, layout: &Layout, rng: &mut R) -> Result<Vec<f64>> {
    let mut weights = Vec::with_capacity(means.len());
    for (t, &m) in means.iter().enumerate() {
        let rate = match spec.dispersion {
            Dispersion::Exact => {
                let len = layout.lengths[t];
                weights.push(if len >= spec.read_length { m * len as f64 } else { 0.0 });
                continue;
            }
            Dispersion::Poisson => m,
            Dispersion::NegativeBinomial { phi } => {
                let g = Gamma::new(phi, m / phi).map_err(|e| Error::Config(format!("NB mean {m}: {e}")))?;
                g.sample(rng)
            }
        };
        let rpk = if rate > 0.0 {
            Poisson::new(rate)
                .map_err(|e| Error::Config(format!("Poisson rate {rate}: {e}")))?
                .sample(rng)
        } else {
            0.0
        };
        let len = layout.lengths[t];
        weights.push(if len >= spec.read_length { rpk * len as f64 } else { 0.0 });
    }
    if !weights.iter().any(|&w| w > 0.0) {
        return Err(Error::Config("a replicate drew zero expression for every transcript".into()));
    }
    Ok(weights)
}

fn simulate_read<R: Rng + ?Sized>(id: String, t: usize, spec: &ScenarioSpec, layout: &Layout, rng: &mut R) -> ReadRecord {
    let l = spec.read_length;
    let len = layout.lengths[t];
    let start = rng.random_range(0..=len - l);
    let (g0, g1, block) = layout.genes[layout.gene_of[t]];
    let aligns = if start + l <= block {
        (g0..g1)
            .map(|u| (u, uniform_alignment_prob(layout.lengths[u], l).expect("block fits every isoform")))
            .collect()
    } else {
        vec![(t, uniform_alignment_prob(len, l).expect("read fits"))]
    };
    ReadRecord { id, aligns }
}

/// `transcript_id <TAB> true_label <TAB> theta_true <TAB> w_true`.
pub fn write_truth<W: Write>(out: &mut W, catalog: &TranscriptCatalog, truth: &Truth) -> std::io::Result<()> {
    writeln!(out, "transcript_id\ttrue_label\ttheta_true\tw_true")?;
    for k in 0..catalog.len() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            catalog.id(k),
            truth.de[k] as u8,
            truth.theta[k],
            truth.w[k]
        )?;
    }
    Ok(())
}

/// Files written by [`write_scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFiles {
    pub catalog: PathBuf,
    pub cond_a: Vec<PathBuf>,
    pub cond_b: Vec<PathBuf>,
    pub truth: PathBuf,
}

/// Writes `catalog.tsv`, one alignment file per replicate and `truth.tsv`.
pub fn write_scenario(dir: &Path, scenario: &Scenario) -> Result<ScenarioFiles> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let catalog = dir.join("catalog.tsv");
    write_catalog(&catalog, &scenario.aset.catalog)?;
    let write_reps = |reads: &[ReadRecord], sizes: &[usize], tag: &str| -> Result<Vec<PathBuf>> {
        let mut paths = Vec::new();
        let mut start = 0;
        for (j, &n) in sizes.iter().enumerate() {
            let path = dir.join(format!("cond_{tag}_rep{}.tsv", j + 1));
            write_alignment_file(&path, &scenario.aset.catalog, &reads[start..start + n])?;
            start += n;
            paths.push(path);
        }
        Ok(paths)
    };
    let cond_a = write_reps(&scenario.aset.reads_a, &scenario.replicate_sizes_a, "a")?;
    let cond_b = write_reps(&scenario.aset.reads_b, &scenario.replicate_sizes_b, "b")?;
    let truth = dir.join("truth.tsv");
    let file = std::fs::File::create(&truth).map_err(|e| Error::io(&truth, e))?;
    let mut out = std::io::BufWriter::new(file);
    write_truth(&mut out, &scenario.aset.catalog, &scenario.truth)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&truth, e))?;
    Ok(ScenarioFiles {
        catalog,
        cond_a,
        cond_b,
        truth,
    })
}
