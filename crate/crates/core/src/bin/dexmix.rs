use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use dexmix_core::cluster::{build_clusters_with, write_cluster_dump, ClusterOptions};
use dexmix_core::decision::DecisionRule;
use dexmix_core::ingest::{AlignmentSet, ProbMode};
use dexmix_core::model::{DePrior, PriorConfig};
use dexmix_core::oracle::brute_force_posterior;
use dexmix_core::runner::{orchestrate, RunConfig};
use dexmix_core::sampler::{BlockUpdates, ChainConfig, SamplerKind};
use dexmix_core::synth::{generate_scenario, write_scenario, Dispersion, FoldChange, MeanModel, ScenarioSpec};

#[derive(Parser)]
#[command(name = "dexmix", version, about = "Transcript expression and differential expression by MCMC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis: cluster, sample, merge and decide.
    Run(RunArgs),
    /// Generate a synthetic two-condition dataset with known DE labels.
    Simulate(SimulateArgs),
    /// Write the read-sharing cluster partition only.
    Cluster(ClusterArgs),
    /// Exact posterior of a tiny dataset by enumeration.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct Inputs {
    /// Transcript catalog: `transcript_id <TAB> length` per line.
    #[arg(long)]
    catalog: PathBuf,
    /// Alignment files of condition A, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    cond_a: Vec<PathBuf>,
    /// Alignment files of condition B, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    cond_b: Vec<PathBuf>,
    /// Ignore the given alignment probabilities and use the uniform
    /// read-start model.
    #[arg(long)]
    uniform: bool,
}

impl Inputs {
    fn mode(&self) -> ProbMode {
        if self.uniform {
            ProbMode::Uniform
        } else {
            ProbMode::Precomputed
        }
    }

    fn load(&self) -> Result<AlignmentSet> {
        Ok(AlignmentSet::load(&self.catalog, &self.cond_a, &self.cond_b, self.mode())?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Collapsed,
    Rjmcmc,
}

fn parse_prior(s: &str) -> Result<DePrior> {
    let prior = match s {
        "jeffreys" => DePrior::Jeffreys,
        _ => match s.strip_prefix("fixed:").map(str::parse::<f64>) {
            Some(Ok(p)) => DePrior::Fixed(p),
            _ => bail!("expected 'jeffreys' or 'fixed:P', got '{s}'"),
        },
    };
    prior.validate()?;
    Ok(prior)
}

fn parse_blocks(s: &str) -> Result<BlockUpdates> {
    if s == "auto" {
        return Ok(BlockUpdates::Auto);
    }
    let n: usize = s.parse().with_context(|| format!("expected 'auto' or a count, got '{s}'"))?;
    Ok(BlockUpdates::Fixed(n))
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, value_enum, default_value = "collapsed")]
    sampler: SamplerArg,
    #[arg(long, default_value_t = 6)]
    chains: usize,
    #[arg(long, default_value_t = 5000)]
    iters: u64,
    #[arg(long, default_value_t = 1000)]
    burnin: u64,
    #[arg(long, default_value_t = 5)]
    thin: u64,
    /// `jeffreys` or `fixed:P`.
    #[arg(long, default_value = "jeffreys")]
    prior: String,
    /// Target expected FDR.
    #[arg(long, default_value_t = 0.05)]
    fdr: f64,
    /// `threshold`, `naive` or `loss:C`.
    #[arg(long, default_value = "threshold")]
    rule: String,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Random-pair updates of the DE indicators per collapsed iteration:
    /// `auto` or a count.
    #[arg(long, default_value = "auto")]
    block_updates: String,
    /// Beta parameters of the rj proposal mixture, comma-separated.
    #[arg(long, value_delimiter = ',')]
    proposal_betas: Option<Vec<f64>>,
    /// Write every retained draw per cluster and chain.
    #[arg(long)]
    dump_draws: bool,
    /// Write the cluster partition to clusters.tsv.
    #[arg(long)]
    cluster_dump: bool,
    /// Only transcripts with |log2 FC| at least this are eligible.
    #[arg(long, num_args = 0..=1, default_missing_value = "1")]
    fc_filter: Option<f64>,
    /// Drop bridging reads of clusters with more than N transcripts.
    #[arg(long)]
    max_cluster_reads_break: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 500)]
    transcripts: usize,
    /// Number of DE transcripts (even).
    #[arg(long, default_value_t = 50)]
    de: usize,
    #[arg(long, default_value_t = 2)]
    reps_a: usize,
    #[arg(long, default_value_t = 2)]
    reps_b: usize,
    /// Reads per replicate.
    #[arg(long, default_value_t = 25_000)]
    reads: usize,
    /// Constant mean reads per kilobase.
    #[arg(long, default_value_t = 65.0)]
    mean: f64,
    /// Uniform range of the means, `LO,HI`; overrides --mean.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    mean_range: Option<Vec<f64>>,
    /// Negative Binomial dispersion; Poisson when absent.
    #[arg(long)]
    nb_phi: Option<f64>,
    /// Use the means as RPK values in every replicate (no replicate variation).
    #[arg(long, conflicts_with = "nb_phi")]
    exact_rpk: bool,
    /// Mean multipliers of the up-regulated DE half, `A,B`.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    fold: Option<Vec<f64>>,
    /// Uniform range of the fold factor delta, `LO,HI`; overrides --fold.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    fold_range: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100)]
    read_length: u64,
    #[arg(long, default_value_t = 600)]
    min_length: u64,
    #[arg(long, default_value_t = 3000)]
    max_length: u64,
    /// Consecutive transcripts grouped into one gene.
    #[arg(long, default_value_t = 3)]
    isoforms: usize,
    /// Fraction of the shortest isoform shared by every isoform of a gene.
    #[arg(long, default_value_t = 0.3)]
    shared_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    max_cluster_reads_break: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value = "jeffreys")]
    prior: String,
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = RunConfig::new(
        args.inputs.catalog.clone(),
        args.inputs.cond_a.clone(),
        args.inputs.cond_b.clone(),
        args.out,
    );
    cfg.prob_mode = args.inputs.mode();
    let defaults = ChainConfig::default();
    cfg.chain = ChainConfig {
        n_chains: args.chains,
        iterations: args.iters,
        burnin: args.burnin,
        thin: args.thin,
        sampler: match args.sampler {
            SamplerArg::Collapsed => SamplerKind::Collapsed,
            SamplerArg::Rjmcmc => SamplerKind::RjMcmc,
        },
        de_prior: parse_prior(&args.prior)?,
        proposal_betas: args.proposal_betas.unwrap_or(defaults.proposal_betas),
        seed: args.seed,
        block_updates: parse_blocks(&args.block_updates)?,
        ..defaults
    };
    cfg.fdr_alpha = args.fdr;
    cfg.rule = args.rule.parse::<DecisionRule>()?;
    cfg.threads = args.threads;
    cfg.dump_draws = args.dump_draws;
    cfg.cluster_dump = args.cluster_dump;
    cfg.fc_filter = args.fc_filter;
    cfg.max_cluster_reads_break = args.max_cluster_reads_break;
    let result = orchestrate(&cfg)?;
    log::info!(
        "{} discoveries at expected FDR {:.4}; reports in {}",
        result.decisions.n_discoveries,
        result.decisions.expected_fdr,
        cfg.out_dir.display()
    );
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let pair = |v: &Option<Vec<f64>>| v.as_ref().map(|v| (v[0], v[1]));
    let base = ScenarioSpec::poisson_two_replicates(args.transcripts, args.de, args.reads, args.seed);
    let spec = ScenarioSpec {
        replicates_a: args.reps_a,
        replicates_b: args.reps_b,
        mean: match pair(&args.mean_range) {
            Some((lo, hi)) => MeanModel::Uniform(lo, hi),
            None => MeanModel::Constant(args.mean),
        },
        dispersion: match (args.nb_phi, args.exact_rpk) {
            (Some(phi), _) => Dispersion::NegativeBinomial { phi },
            (None, true) => Dispersion::Exact,
            (None, false) => Dispersion::Poisson,
        },
        fold_change: match (pair(&args.fold_range), pair(&args.fold)) {
            (Some((lo, hi)), _) => FoldChange::Uniform { lo, hi },
            (None, Some((a_factor, b_factor))) => FoldChange::Fixed { a_factor, b_factor },
            (None, None) => base.fold_change,
        },
        read_length: args.read_length,
        length_range: (args.min_length, args.max_length),
        isoforms_per_gene: args.isoforms,
        shared_fraction: args.shared_fraction,
        ..base
    };
    let scenario = generate_scenario(&spec)?;
    let files = write_scenario(&args.out, &scenario)?;
    let join = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",");
    println!("catalog\t{}", files.catalog.display());
    println!("cond_a\t{}", join(&files.cond_a));
    println!("cond_b\t{}", join(&files.cond_b));
    println!("truth\t{}", files.truth.display());
    Ok(())
}

fn cluster(args: ClusterArgs) -> Result<()> {
    let aset = args.inputs.load()?;
    let partition = build_clusters_with(
        &aset,
        ClusterOptions {
            max_cluster_reads_break: args.max_cluster_reads_break,
        },
    );
    match args.out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(
                std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?,
            );
            write_cluster_dump(&mut f, &aset, &partition)?;
            f.flush()?;
        }
        None => write_cluster_dump(&mut std::io::stdout().lock(), &aset, &partition)?,
    }
    Ok(())
}

fn oracle(args: OracleArgs) -> Result<()> {
    let aset = args.inputs.load()?;
    let prior = PriorConfig::uniform(aset.n_transcripts(), parse_prior(&args.prior)?);
    let post = brute_force_posterior(&aset, &prior)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "transcript_id\tp_de\ttheta_mean\tw_mean")?;
    for k in 0..aset.n_transcripts() {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            aset.catalog.id(k),
            post.p_de[k],
            post.theta_mean[k],
            post.w_mean[k]
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Simulate(a) => simulate(a),
        Command::Cluster(a) => cluster(a),
        Command::Oracle(a) => oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
