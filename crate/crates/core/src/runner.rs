//! End-to-end orchestration: ingest, cluster, run chain ensembles on a
//! worker pool, merge per-cluster summaries and write reports.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use crate::cluster::{augment_cluster, build_clusters_with, write_cluster_dump_file, AugmentedCluster, ClusterOptions, ClusterPartition};
use crate::decision::{apply_rule, fold_change_mask, DecisionReport, DecisionRule};
use crate::diag::acf;
use crate::error::{Error, Result};
use crate::ingest::{AlignmentSet, ProbMode};
use crate::model::PriorConfig;
use crate::sampler::{run_chain, summarize, ChainConfig, ChainOutput, PosteriorSummary};

/// Lags reported for the log-expression autocorrelation.
pub const ACF_MAX_LAG: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub catalog: PathBuf,
    pub cond_a: Vec<PathBuf>,
    pub cond_b: Vec<PathBuf>,
    pub prob_mode: ProbMode,
    /// Sampler kind, chain counts, DE prior and master seed.
    pub chain: ChainConfig,
    pub fdr_alpha: f64,
    pub rule: DecisionRule,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub dump_draws: bool,
    pub cluster_dump: bool,
    /// Minimum `|log2 FC|` for a transcript to be eligible for discovery.
    pub fc_filter: Option<f64>,
    pub max_cluster_reads_break: Option<usize>,
}

impl RunConfig {
    pub fn new(catalog: PathBuf, cond_a: Vec<PathBuf>, cond_b: Vec<PathBuf>, out_dir: PathBuf) -> Self {
        RunConfig {
            catalog,
            cond_a,
            cond_b,
            prob_mode: ProbMode::Precomputed,
            chain: ChainConfig::default(),
            fdr_alpha: 0.05,
            rule: DecisionRule::Threshold,
            threads: 1,
            out_dir,
            dump_draws: false,
            cluster_dump: false,
            fc_filter: None,
            max_cluster_reads_break: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.threads == 0 {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        if !(self.fdr_alpha > 0.0 && self.fdr_alpha < 1.0) {
            return Err(Error::Config(format!("FDR level {} not in (0, 1)", self.fdr_alpha)));
        }
        if self.fc_filter.is_some_and(|t| !(t >= 0.0)) {
            return Err(Error::Config("fold-change filter must be non-negative".into()));
        }
        self.chain.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flag {
    Ok,
    NoReads,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Ok => "ok",
            Flag::NoReads => "no_reads",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TranscriptEstimate {
    /// 0-based cluster label, `None` for transcripts without reads.
    pub cluster: Option<usize>,
    pub p_de: f64,
    pub theta: f64,
    pub w: f64,
    pub log2fc: f64,
    pub flag: Flag,
}

#[derive(Debug, Clone)]
pub struct ClusterResult {
    pub label: usize,
    pub members: Vec<usize>,
    pub n_reads_a: usize,
    pub n_reads_b: usize,
    /// Over the augmented model: members first, then the pseudo-transcript.
    pub summary: PosteriorSummary,
    pub has_pseudo: bool,
    /// Summed chain wall-clock time.
    pub runtime_s: f64,
    pub outputs: Vec<ChainOutput>,
}

impl ClusterResult {
    /// Estimated share of all reads that belong to this cluster.
    pub fn mass(&self) -> (f64, f64) {
        if self.has_pseudo {
            let p = self.members.len();
            (1.0 - self.summary.theta_mean[p], 1.0 - self.summary.w_mean[p])
        } else {
            (1.0, 1.0)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub partition: ClusterPartition,
    /// Indexed by cluster label.
    pub clusters: Vec<ClusterResult>,
    pub estimates: Vec<TranscriptEstimate>,
    pub decisions: DecisionReport,
    /// Autocorrelation of log theta of the most expressed transcript of the
    /// largest cluster, chain 0; empty when there are no clusters.
    pub acf: Vec<f64>,
}

/// A chain's output and its wall time in seconds.
type JobOutcome = (Result<ChainOutput>, f64);

/// Cluster indices by descending read count, ties by label.
pub fn dispatch_order(partition: &ClusterPartition) -> Vec<usize> {
    let mut order: Vec<usize> = (0..partition.clusters.len()).collect();
    order.sort_by(|&x, &y| {
        partition.clusters[y]
            .n_reads()
            .cmp(&partition.clusters[x].n_reads())
            .then(x.cmp(&y))
    });
    order
}

/// Runs every `(cluster, chain)` job on `threads` workers. Jobs are taken
/// from a shared queue in dispatch order, so an idle worker picks up the
/// next pending chain immediately. Results are returned in job order.
fn run_jobs(
    models: &[AugmentedCluster],
    order: &[usize],
    cfg: &ChainConfig,
    trace_for: &[bool],
    threads: usize,
) -> Vec<(Result<ChainOutput>, f64)> {
    let jobs: Vec<(usize, usize)> = order
        .iter()
        .flat_map(|&j| (0..cfg.n_chains).map(move |c| (j, c)))
        .collect();
    let next = AtomicUsize::new(0);
    let run = |(j, chain): (usize, usize)| {
        let job_cfg = ChainConfig {
            keep_trace: cfg.keep_trace || trace_for[j],
            ..cfg.clone()
        };
        let start = Instant::now();
        let out = run_chain(&models[j].model, &job_cfg, models[j].label, chain);
        (out, start.elapsed().as_secs_f64())
    };
    let mut results: Vec<Option<JobOutcome>> = (0..jobs.len()).map(|_| None).collect();
    let workers = threads.min(jobs.len()).max(1);
    let collected: Vec<Vec<(usize, JobOutcome)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                s.spawn(|| {
                    let mut mine = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= jobs.len() {
                            break;
                        }
                        mine.push((i, run(jobs[i])));
                    }
                    mine
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    for (i, r) in collected.into_iter().flatten() {
        results[i] = Some(r);
    }
    results.into_iter().map(|r| r.expect("every job ran")).collect()
}

/// Clusters, samples and merges an in-memory alignment set. Input paths and
/// the output directory of `cfg` are not used.
pub fn analyze(aset: &AlignmentSet, cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    let k = aset.n_transcripts();
    let partition = build_clusters_with(
        aset,
        ClusterOptions {
            max_cluster_reads_break: cfg.max_cluster_reads_break,
        },
    );
    let prior = PriorConfig::uniform(k, cfg.chain.de_prior);
    let models = (0..partition.clusters.len())
        .map(|j| {
            augment_cluster(aset, &partition, j, &prior).map_err(|e| Error::Cluster {
                label: partition.clusters[j].label + 1,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let order = dispatch_order(&partition);
    let mut trace_for = vec![cfg.dump_draws; models.len()];
    if let Some(&largest) = order.first() {
        trace_for[largest] = true;
    }
    log::info!(
        "{} transcripts, {} clusters, {} without reads; running {} chains each on {} threads",
        k,
        partition.clusters.len(),
        partition.orphans.len(),
        cfg.chain.n_chains,
        cfg.threads
    );
    let mut job_results = run_jobs(&models, &order, &cfg.chain, &trace_for, cfg.threads).into_iter();

    let mut by_label: Vec<Option<ClusterResult>> = (0..models.len()).map(|_| None).collect();
    for &j in &order {
        let m = &models[j];
        let mut outputs = Vec::with_capacity(cfg.chain.n_chains);
        let mut runtime_s = 0.0;
        for _ in 0..cfg.chain.n_chains {
            let (out, secs) = job_results.next().expect("one result per job");
            let out = out.map_err(|e| Error::Cluster {
                label: m.label + 1,
                source: Box::new(e),
            })?;
            runtime_s += secs;
            outputs.push(out);
        }
        let summary = summarize(&outputs, cfg.chain.sampler).map_err(|e| Error::Cluster {
            label: m.label + 1,
            source: Box::new(e),
        })?;
        by_label[j] = Some(ClusterResult {
            label: m.label,
            members: m.members.clone(),
            n_reads_a: m.n_reads_a,
            n_reads_b: m.n_reads_b,
            has_pseudo: m.model.pseudo.is_some(),
            summary,
            runtime_s,
            outputs,
        });
    }
    let clusters: Vec<ClusterResult> = by_label.into_iter().map(|c| c.expect("cluster ran")).collect();
    let estimates = merge(k, &clusters);
    let p: Vec<f64> = estimates.iter().map(|e| e.p_de).collect();
    let mask = cfg.fc_filter.map(|t| {
        let fc: Vec<f64> = estimates.iter().map(|e| e.log2fc).collect();
        let mut m = fold_change_mask(&fc, t);
        for (keep, e) in m.iter_mut().zip(&estimates) {
            *keep &= e.flag == Flag::Ok;
        }
        m
    });
    let decisions = apply_rule(&p, cfg.rule, cfg.fdr_alpha, mask.as_deref())?;
    let acf = order.first().map_or_else(Vec::new, |&j| log_theta_acf(&clusters[j]));
    Ok(RunResult {
        partition,
        clusters,
        estimates,
        decisions,
        acf,
    })
}

/// Rescales each cluster's member expressions, conditional on the cluster,
/// by its estimated read mass so the global vectors each sum to 1.
fn merge(k: usize, clusters: &[ClusterResult]) -> Vec<TranscriptEstimate> {
    let mut est = vec![
        TranscriptEstimate {
            cluster: None,
            p_de: 0.0,
            theta: 0.0,
            w: 0.0,
            log2fc: 0.0,
            flag: Flag::NoReads,
        };
        k
    ];
    let (mass_a, mass_b) = clusters.iter().fold((0.0, 0.0), |(a, b), c| {
        let (ma, mb) = c.mass();
        (a + ma, b + mb)
    });
    for c in clusters {
        let (ma, mb) = c.mass();
        let n = c.members.len();
        let inner_a: f64 = c.summary.theta_mean[..n].iter().sum();
        let inner_b: f64 = c.summary.w_mean[..n].iter().sum();
        for (i, &g) in c.members.iter().enumerate() {
            let theta = c.summary.theta_mean[i] / inner_a * ma / mass_a;
            let w = c.summary.w_mean[i] / inner_b * mb / mass_b;
            est[g] = TranscriptEstimate {
                cluster: Some(c.label),
                p_de: c.summary.p_de[i],
                theta,
                w,
                log2fc: (w / theta).log2(),
                flag: Flag::Ok,
            };
        }
    }
    est
}

fn log_theta_acf(c: &ClusterResult) -> Vec<f64> {
    let Some(trace) = c.outputs.first().and_then(|o| o.trace.as_ref()) else {
        return Vec::new();
    };
    let n = c.members.len();
    let top = (0..n)
        .max_by(|&x, &y| c.summary.theta_mean[x].total_cmp(&c.summary.theta_mean[y]).then(y.cmp(&x)))
        .unwrap_or(0);
    let series: Vec<f64> = trace.iter().map(|d| d.theta[top].ln()).collect();
    acf(&series, ACF_MAX_LAG)
}

/// Loads the inputs, analyzes them and writes every report into
/// `cfg.out_dir`.
pub fn orchestrate(cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let aset = AlignmentSet::load(&cfg.catalog, &cfg.cond_a, &cfg.cond_b, cfg.prob_mode)?;
    let result = analyze(&aset, cfg)?;
    write_reports(&cfg.out_dir, &aset, &result, cfg)?;
    Ok(result)
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

fn fmt_label(label: Option<usize>) -> String {
    label.map_or_else(|| "NA".to_string(), |l| (l + 1).to_string())
}

/// Writes `estimates.tsv`, `decisions.tsv`, `diagnostics.csv` and, when
/// requested, the cluster dump and per-chain draw files.
pub fn write_reports(dir: &Path, aset: &AlignmentSet, result: &RunResult, cfg: &RunConfig) -> Result<()> {
    let cat = &aset.catalog;
    let mut s = String::from("transcript_id\tcluster\tp_de\ttheta_mean\tw_mean\tlog2fc\tdecision\tflag\n");
    for (k, e) in result.estimates.iter().enumerate() {
        let fc = if e.flag == Flag::Ok { e.log2fc.to_string() } else { "NA".to_string() };
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            cat.id(k),
            fmt_label(e.cluster),
            e.p_de,
            e.theta,
            e.w,
            fc,
            result.decisions.decisions[k] as u8,
            e.flag.as_str()
        )
        .unwrap();
    }
    write_file(&dir.join("estimates.tsv"), &s)?;

    let d = &result.decisions;
    let mut order: Vec<(usize, usize)> = d.rank.iter().enumerate().filter_map(|(k, r)| r.map(|r| (r, k))).collect();
    order.sort_unstable();
    let mut s = String::from("rank\ttranscript_id\tp_de\tcumulative_expected_fdr\tdecision\n");
    let mut sum = 0.0;
    for (r, k) in order {
        sum += 1.0 - d.p_de[k];
        writeln!(s, "{}\t{}\t{}\t{}\t{}", r, cat.id(k), d.p_de[k], sum / r as f64, d.decisions[k] as u8).unwrap();
    }
    write_file(&dir.join("decisions.tsv"), &s)?;

    // long format: one metric value per row
    let mut s = String::from("kind,cluster,index,value\n");
    for c in &result.clusters {
        let l = c.label + 1;
        writeln!(s, "n_transcripts,{l},0,{}", c.members.len()).unwrap();
        writeln!(s, "n_reads_a,{l},0,{}", c.n_reads_a).unwrap();
        writeln!(s, "n_reads_b,{l},0,{}", c.n_reads_b).unwrap();
        writeln!(s, "runtime_s,{l},0,{}", c.runtime_s).unwrap();
        writeln!(s, "n_kept,{l},0,{}", c.summary.n_kept).unwrap();
        if let Some(a) = c.summary.acceptance_rate {
            writeln!(s, "acceptance_rate,{l},0,{a}").unwrap();
        }
        for &(it, mae) in &c.summary.ergodic_mae {
            writeln!(s, "ergodic_mae,{l},{it},{mae}").unwrap();
        }
    }
    if let Some(&j) = dispatch_order(&result.partition).first() {
        for (lag, v) in result.acf.iter().enumerate() {
            writeln!(s, "acf,{},{lag},{v}", result.clusters[j].label + 1).unwrap();
        }
    }
    write_file(&dir.join("diagnostics.csv"), &s)?;

    if cfg.cluster_dump {
        write_cluster_dump_file(&dir.join("clusters.tsv"), aset, &result.partition)?;
    }
    if cfg.dump_draws {
        let draws = dir.join("draws");
        std::fs::create_dir_all(&draws).map_err(|e| Error::io(&draws, e))?;
        for c in &result.clusters {
            for o in &c.outputs {
                let Some(trace) = &o.trace else { continue };
                let mut s = String::from("iteration\tc");
                for &m in &c.members {
                    write!(s, "\ttheta_{}", cat.id(m)).unwrap();
                }
                if c.has_pseudo {
                    s.push_str("\ttheta_rest");
                }
                s.push('\n');
                for draw in trace {
                    let bits: String = draw.c.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    write!(s, "{}\t{}", draw.iteration, bits).unwrap();
                    for t in &draw.theta {
                        write!(s, "\t{t}").unwrap();
                    }
                    s.push('\n');
                }
                write_file(&draws.join(format!("cluster{}_chain{}.tsv", c.label + 1, o.chain_id)), &s)?;
            }
        }
    }
    Ok(())
}
