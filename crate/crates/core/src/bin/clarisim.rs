use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use clarisim::catalog::Catalog;
use clarisim::corpus::{builtin_domain, load_domain_file, Corpus, IntentDomain};
use clarisim::dialogue::EpisodeConfig;
use clarisim::harness::{
    eval_meta_files, report_from_files, run_experiment, simulate, write_jsonl, ExperimentConfig, PolicySpec,
    SimulationSetup,
};
use clarisim::metapolicy::{
    build_training_set, load_qstar, save_qstar, HashingFeaturizer, MetaPolicy, QStarConfig, DEFAULT_K, DEFAULT_N_MC,
};
use clarisim::strategies::{ConversationalPrior, StrategyConfig};
use clarisim::Error;

#[derive(Parser)]
#[command(name = "clarisim", version, about = "Under-specified conversational recommendation simulator")]
struct Cli {
    /// Base seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// TOML experiment config (used by `run`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a masked query corpus.
    GenCorpus {
        /// Builtin intent (movie_rec, gift_rec, plant_rec) or a domain file.
        #[arg(long, default_value = "movie_rec")]
        domain: String,
        #[arg(long)]
        intent: Option<String>,
        #[arg(long, default_value_t = 600)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate an item catalog, optionally with exact matches for corpus goals.
    GenCatalog {
        #[arg(long, default_value = "movie_rec")]
        domain: String,
        #[arg(long)]
        intent: Option<String>,
        #[arg(long, default_value_t = 1000)]
        size: usize,
        #[arg(long, num_args = 1..)]
        inject: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one episode per corpus query under a policy and write JSONL logs.
    Simulate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        /// baseline, <strategy>, <strategy>+<strategy>, or meta.
        #[arg(long, default_value = "baseline")]
        policy: String,
        /// Round budget before a forced recommendation.
        #[arg(long = "rounds", default_value_t = 2)]
        max_rounds: usize,
        #[arg(long)]
        prior: Option<PathBuf>,
        /// Q* training file for the meta policy.
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate Q* for every corpus query by seeded rollouts.
    Qstar {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long, default_value_t = DEFAULT_N_MC)]
        nmc: usize,
        #[arg(long = "rounds", default_value_t = 2)]
        max_rounds: usize,
        #[arg(long)]
        prior: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the k-NN meta-policy on one Q* file and evaluate it on another.
    EvalMeta {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build CSV tables and a manifest from episode logs.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        episodes: Vec<PathBuf>,
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline from `--config` into an output directory.
    Run {
        #[arg(long)]
        out: PathBuf,
    },
}

fn domain(name: &str, intent: Option<&str>) -> clarisim::Result<IntentDomain> {
    match builtin_domain(name) {
        Ok(d) => Ok(d),
        Err(_) => load_domain_file(Path::new(name), intent),
    }
}

fn prior(path: Option<&Path>) -> clarisim::Result<ConversationalPrior> {
    path.map_or_else(|| Ok(ConversationalPrior::default()), ConversationalPrior::load)
}

fn run(cli: Cli) -> clarisim::Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::GenCorpus { domain: d, intent, n, out } => {
            let d = domain(&d, intent.as_deref())?;
            let corpus = Corpus::generate(&d, n, seed);
            corpus.save(&out)?;
            log::info!("wrote {} records to {}", corpus.records.len(), out.display());
        }
        Command::GenCatalog {
            domain: d,
            intent,
            size,
            inject,
            out,
        } => {
            let d = domain(&d, intent.as_deref())?;
            let mut catalog = Catalog::generate(&d, size, seed)?;
            for path in inject {
                let corpus = Corpus::load(&path)?;
                let added = catalog.inject_exact_matches(corpus.goals())?;
                log::info!("injected {added} exact matches from {}", path.display());
            }
            catalog.save(&out)?;
        }
        Command::Simulate {
            corpus,
            catalog,
            policy,
            max_rounds,
            prior: prior_path,
            meta,
            k,
            out,
        } => {
            let spec: PolicySpec = policy.parse()?;
            let corpus = Corpus::load(&corpus)?;
            let catalog = Catalog::load(&corpus.domain, &catalog)?;
            let prior = prior(prior_path.as_deref())?;
            let episode = EpisodeConfig {
                max_rounds,
                strategy: StrategyConfig::default(),
            };
            let meta = match meta {
                Some(p) => Some(MetaPolicy::fit(HashingFeaturizer::default(), &load_qstar(&p)?, k)?),
                None => None,
            };
            let setup = SimulationSetup {
                catalog: &catalog,
                episode: &episode,
                prior: &prior,
                meta: meta.as_ref(),
                seed,
                corpus_hash: corpus.hash(),
            };
            let logs = simulate(&corpus.queries(), spec, &setup)?;
            write_jsonl(&out, &logs)?;
        }
        Command::Qstar {
            corpus,
            catalog,
            nmc,
            max_rounds,
            prior: prior_path,
            out,
        } => {
            let corpus = Corpus::load(&corpus)?;
            let catalog = Catalog::load(&corpus.domain, &catalog)?;
            let config = QStarConfig {
                n_mc: nmc,
                seed,
                episode: EpisodeConfig {
                    max_rounds,
                    strategy: StrategyConfig::default(),
                },
                prior: prior(prior_path.as_deref())?,
            };
            let records = build_training_set(&corpus.queries(), &catalog, &HashingFeaturizer::default(), &config)?;
            save_qstar(&records, &out)?;
        }
        Command::EvalMeta {
            train,
            test,
            k,
            lambda,
            out,
        } => {
            let eval = eval_meta_files(&train, &test, k, lambda, seed)?;
            std::fs::write(&out, serde_json::to_string_pretty(&eval)? + "\n")?;
            for b in &eval.buckets {
                println!(
                    "{}: n={} meta={:.4} baseline={:.4} diff={:+.4} ci_lower={:+.4}",
                    b.bucket, b.n, b.meta_reward, b.baseline_reward, b.difference, b.ci_lower
                );
            }
        }
        Command::Report { episodes, meta, out } => {
            report_from_files(&episodes, meta.as_deref(), &out)?;
        }
        Command::Run { out } => {
            let mut config = match &cli.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => return Err(Error::Config("run needs --config <file>".into())),
            };
            if seed != 0 {
                config.seed = seed;
            }
            let report = run_experiment(&config, &out)?;
            if let Some(m) = &report.meta {
                for b in &m.buckets {
                    println!("{}: reward(meta) - reward(baseline) = {:+.4}", b.bucket, b.difference);
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
