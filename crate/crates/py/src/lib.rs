//! Python bindings: load alignments, cluster, run the samplers and apply the
//! FDR rules from Python.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use dexmix_core::cluster::build_clusters;
use dexmix_core::decision::{apply_rule, DecisionRule};
use dexmix_core::ingest::{AlignmentSet as CoreAlignmentSet, ProbMode};
use dexmix_core::model::{DePrior, PriorConfig};
use dexmix_core::oracle::brute_force_posterior;
use dexmix_core::runner::{analyze as core_analyze, orchestrate, Flag, RunConfig, RunResult as CoreRunResult};
use dexmix_core::sampler::{ChainConfig, SamplerKind};
use dexmix_core::synth::{generate_scenario, write_scenario, ScenarioSpec};

fn err(e: dexmix_core::error::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_prior(prior: Option<f64>) -> DePrior {
    prior.map_or(DePrior::Jeffreys, DePrior::Fixed)
}

fn parse_sampler(s: &str) -> PyResult<SamplerKind> {
    match s {
        "collapsed" => Ok(SamplerKind::Collapsed),
        "rjmcmc" => Ok(SamplerKind::RjMcmc),
        _ => Err(PyValueError::new_err(format!("unknown sampler `{s}`, expected collapsed or rjmcmc"))),
    }
}

fn parse_rule(s: &str) -> PyResult<DecisionRule> {
    s.parse::<DecisionRule>().map_err(err)
}

/// Catalog plus the alignment lists of both conditions.
#[pyclass(frozen)]
struct AlignmentSet {
    inner: CoreAlignmentSet,
}

#[pymethods]
impl AlignmentSet {
    /// Loads a catalog and replicate files. With `uniform` the alignment
    /// values are read lengths instead of probabilities.
    #[staticmethod]
    #[pyo3(signature = (catalog, cond_a, cond_b, uniform = false))]
    fn load(catalog: PathBuf, cond_a: Vec<PathBuf>, cond_b: Vec<PathBuf>, uniform: bool) -> PyResult<Self> {
        let mode = if uniform { ProbMode::Uniform } else { ProbMode::Precomputed };
        let inner = CoreAlignmentSet::load(&catalog, &cond_a, &cond_b, mode).map_err(err)?;
        Ok(AlignmentSet { inner })
    }

    #[getter]
    fn n_transcripts(&self) -> usize {
        self.inner.n_transcripts()
    }

    #[getter]
    fn n_reads_a(&self) -> usize {
        self.inner.reads_a.len()
    }

    #[getter]
    fn n_reads_b(&self) -> usize {
        self.inner.reads_b.len()
    }

    #[getter]
    fn transcript_ids(&self) -> Vec<String> {
        self.inner.catalog.entries().iter().map(|e| e.id.clone()).collect()
    }

    /// Read-sharing clusters as `(label, member ids, reads A, reads B)`;
    /// labels are 1-based.
    fn clusters(&self) -> Vec<(usize, Vec<String>, usize, usize)> {
        let p = build_clusters(&self.inner);
        p.clusters
            .iter()
            .map(|c| {
                let ids = c.members.iter().map(|&k| self.inner.catalog.id(k).to_string()).collect();
                (c.label + 1, ids, c.reads_a.len(), c.reads_b.len())
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "AlignmentSet(transcripts={}, reads_a={}, reads_b={})",
            self.inner.n_transcripts(),
            self.inner.reads_a.len(),
            self.inner.reads_b.len()
        )
    }
}

/// Per-transcript estimates and decisions of one run, in catalog order.
#[pyclass(frozen, get_all)]
struct RunResult {
    transcript_ids: Vec<String>,
    /// 1-based cluster label, `None` for transcripts without reads.
    cluster: Vec<Option<usize>>,
    p_de: Vec<f64>,
    theta: Vec<f64>,
    w: Vec<f64>,
    log2fc: Vec<f64>,
    no_reads: Vec<bool>,
    decisions: Vec<bool>,
    n_discoveries: usize,
    expected_fdr: f64,
    n_clusters: usize,
}

impl RunResult {
    fn from_core(aset: &CoreAlignmentSet, r: &CoreRunResult) -> Self {
        let e = &r.estimates;
        RunResult {
            transcript_ids: aset.catalog.entries().iter().map(|t| t.id.clone()).collect(),
            cluster: e.iter().map(|x| x.cluster.map(|c| c + 1)).collect(),
            p_de: e.iter().map(|x| x.p_de).collect(),
            theta: e.iter().map(|x| x.theta).collect(),
            w: e.iter().map(|x| x.w).collect(),
            log2fc: e.iter().map(|x| x.log2fc).collect(),
            no_reads: e.iter().map(|x| x.flag == Flag::NoReads).collect(),
            decisions: r.decisions.decisions.clone(),
            n_discoveries: r.decisions.n_discoveries,
            expected_fdr: r.decisions.expected_fdr,
            n_clusters: r.partition.clusters.len(),
        }
    }
}

#[pymethods]
impl RunResult {
    fn __repr__(&self) -> String {
        format!(
            "RunResult(transcripts={}, clusters={}, discoveries={}, expected_fdr={:.4})",
            self.transcript_ids.len(),
            self.n_clusters,
            self.n_discoveries,
            self.expected_fdr
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn run_config(
    sampler: &str,
    chains: usize,
    iters: u64,
    burnin: u64,
    thin: u64,
    prior: Option<f64>,
    fdr: f64,
    rule: &str,
    threads: usize,
    seed: u64,
) -> PyResult<RunConfig> {
    let mut cfg = RunConfig::new(PathBuf::new(), vec![], vec![], PathBuf::new());
    cfg.chain = ChainConfig {
        n_chains: chains,
        iterations: iters,
        burnin,
        thin,
        sampler: parse_sampler(sampler)?,
        de_prior: parse_prior(prior),
        seed,
        ..ChainConfig::default()
    };
    cfg.fdr_alpha = fdr;
    cfg.rule = parse_rule(rule)?;
    cfg.threads = threads;
    Ok(cfg)
}

/// Clusters the transcripts, runs the chain ensemble on every cluster,
/// merges the estimates and applies the decision rule. `prior=None` puts a
/// Jeffreys prior on the DE proportion; a float fixes it.
#[pyfunction]
#[pyo3(signature = (
    aset, sampler = "collapsed", chains = 6, iters = 5000, burnin = 1000, thin = 5,
    prior = None, fdr = 0.05, rule = "threshold", threads = 1, seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn analyze(
    py: Python<'_>,
    aset: &AlignmentSet,
    sampler: &str,
    chains: usize,
    iters: u64,
    burnin: u64,
    thin: u64,
    prior: Option<f64>,
    fdr: f64,
    rule: &str,
    threads: usize,
    seed: u64,
) -> PyResult<RunResult> {
    let cfg = run_config(sampler, chains, iters, burnin, thin, prior, fdr, rule, threads, seed)?;
    let r = py.detach(|| core_analyze(&aset.inner, &cfg)).map_err(err)?;
    Ok(RunResult::from_core(&aset.inner, &r))
}

/// Same as [`analyze`] on files, writing the report files into `out`.
#[pyfunction]
#[pyo3(signature = (
    catalog, cond_a, cond_b, out, uniform = false, sampler = "collapsed", chains = 6, iters = 5000,
    burnin = 1000, thin = 5, prior = None, fdr = 0.05, rule = "threshold", threads = 1, seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    catalog: PathBuf,
    cond_a: Vec<PathBuf>,
    cond_b: Vec<PathBuf>,
    out: PathBuf,
    uniform: bool,
    sampler: &str,
    chains: usize,
    iters: u64,
    burnin: u64,
    thin: u64,
    prior: Option<f64>,
    fdr: f64,
    rule: &str,
    threads: usize,
    seed: u64,
) -> PyResult<RunResult> {
    let mut cfg = run_config(sampler, chains, iters, burnin, thin, prior, fdr, rule, threads, seed)?;
    cfg.catalog = catalog;
    cfg.cond_a = cond_a;
    cfg.cond_b = cond_b;
    cfg.out_dir = out;
    cfg.prob_mode = if uniform { ProbMode::Uniform } else { ProbMode::Precomputed };
    let aset = CoreAlignmentSet::load(&cfg.catalog, &cfg.cond_a, &cfg.cond_b, cfg.prob_mode).map_err(err)?;
    let r = py.detach(|| orchestrate(&cfg)).map_err(err)?;
    Ok(RunResult::from_core(&aset, &r))
}

/// Writes a two-condition Poisson scenario with two replicates per
/// condition into `out` and returns the file paths by role.
#[pyfunction]
#[pyo3(signature = (out, transcripts = 500, de = 50, reads = 25_000, seed = 0))]
fn simulate(out: PathBuf, transcripts: usize, de: usize, reads: usize, seed: u64) -> PyResult<Vec<(String, Vec<String>)>> {
    let spec = ScenarioSpec::poisson_two_replicates(transcripts, de, reads, seed);
    let scenario = generate_scenario(&spec).map_err(err)?;
    let files = write_scenario(&out, &scenario).map_err(err)?;
    let s = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect();
    Ok(vec![
        ("catalog".into(), s(std::slice::from_ref(&files.catalog))),
        ("cond_a".into(), s(&files.cond_a)),
        ("cond_b".into(), s(&files.cond_b)),
        ("truth".into(), s(std::slice::from_ref(&files.truth))),
    ])
}

/// Exact posterior `(p_de, theta_mean, w_mean)` by enumeration; only for
/// tiny inputs.
#[pyfunction]
#[pyo3(signature = (aset, prior = None))]
fn oracle(aset: &AlignmentSet, prior: Option<f64>) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let cfg = PriorConfig::uniform(aset.inner.n_transcripts(), parse_prior(prior));
    let post = brute_force_posterior(&aset.inner, &cfg).map_err(err)?;
    Ok((post.p_de, post.theta_mean, post.w_mean))
}

/// Applies a decision rule (`threshold`, `naive` or `loss:C`) to posterior
/// DE probabilities.
#[pyfunction]
#[pyo3(signature = (p_de, alpha = 0.05, rule = "threshold"))]
fn decide(p_de: Vec<f64>, alpha: f64, rule: &str) -> PyResult<(Vec<bool>, f64)> {
    let report = apply_rule(&p_de, parse_rule(rule)?, alpha, None).map_err(err)?;
    Ok((report.decisions, report.expected_fdr))
}

#[pymodule]
fn dexmix(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<AlignmentSet>()?;
    m.add_class::<RunResult>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    Ok(())
}
