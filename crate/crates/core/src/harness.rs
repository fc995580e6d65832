//! Experiment orchestration: policy specs, episode logs, per-bucket reports,
//! manifests, and the end-to-end pipeline driven by a TOML config.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::corpus::{builtin_domain, load_domain_file, Corpus, IntentDomain, QueryRef, UnderspecLabel};
use crate::dialogue::{run_episode, EpisodeConfig, EpisodeResult};
use crate::error::{Error, Result};
use crate::hash::{json_hash, sha256_hex};
use crate::metapolicy::{
    build_training_set, default_stratification, evaluate_meta, load_qstar, rollout_rng, save_qstar, stratify_sample,
    HashingFeaturizer, MetaEvaluation, MetaPolicy, MetaThenBaseline, QStarConfig, QStarRecord,
    StratificationWeights, DEFAULT_K, DEFAULT_N_MC,
};
use crate::rng::{derive_seed, seeded};
use crate::strategies::{baseline_policy, classify_tau, ConversationalPrior, FixedPolicy, ResponseStrategy, StrategyConfig};

/// Which policy acts at t0 and which acts afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolicySpec {
    Baseline,
    /// A fixed strategy at t0, then `rest` (or the baseline).
    Fixed {
        t0: ResponseStrategy,
        rest: Option<ResponseStrategy>,
    },
    /// The k-NN meta-policy at t0, then the baseline.
    Meta,
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fixed = |t: &str| -> Result<ResponseStrategy> {
            let tau: ResponseStrategy = t.parse().map_err(|_| Error::Config(format!("unknown policy {s:?}")))?;
            if !ResponseStrategy::PRIOR_SUPPORT.contains(&tau) {
                return Err(Error::Config(format!("{tau} cannot be played as a policy")));
            }
            Ok(tau)
        };
        match s {
            "baseline" => Ok(PolicySpec::Baseline),
            "meta" => Ok(PolicySpec::Meta),
            _ => match s.split_once('+') {
                Some((a, b)) => Ok(PolicySpec::Fixed {
                    t0: fixed(a)?,
                    rest: Some(fixed(b)?),
                }),
                None => Ok(PolicySpec::Fixed { t0: fixed(s)?, rest: None }),
            },
        }
    }
}

impl std::fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicySpec::Baseline => f.write_str("baseline"),
            PolicySpec::Meta => f.write_str("meta"),
            PolicySpec::Fixed { t0, rest: None } => write!(f, "{t0}"),
            PolicySpec::Fixed { t0, rest: Some(r) } => write!(f, "{t0}+{r}"),
        }
    }
}

/// One episode, as persisted in a JSONL log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub query_id: String,
    pub label: UnderspecLabel,
    pub policy: String,
    pub seed: u64,
    pub corpus_hash: String,
    pub catalog_hash: String,
    /// Strategy read back from the t0 response text.
    pub t0_annotation: ResponseStrategy,
    pub result: EpisodeResult,
}

pub struct SimulationSetup<'a> {
    pub catalog: &'a Catalog,
    pub episode: &'a EpisodeConfig,
    pub prior: &'a ConversationalPrior,
    pub meta: Option<&'a MetaPolicy>,
    pub seed: u64,
    pub corpus_hash: String,
}

/// Runs one episode per query, in parallel; logs come back in query order.
/// Each query's episode uses the same stream as rollout 0 of its Q\*.
pub fn simulate(queries: &[QueryRef<'_>], policy: PolicySpec, setup: &SimulationSetup<'_>) -> Result<Vec<EpisodeLog>> {
    if policy == PolicySpec::Meta && setup.meta.is_none() {
        return Err(Error::Config("policy meta needs a trained meta-policy".into()));
    }
    let catalog_hash = setup.catalog.hash();
    queries
        .par_iter()
        .map(|qr| {
            let mut rng = rollout_rng(setup.seed, &qr.query.id, 0);
            let base = baseline_policy(setup.prior.clone());
            let (q, g, c, e) = (qr.query, qr.goal, setup.catalog, setup.episode);
            let result = match policy {
                PolicySpec::Baseline => run_episode(q, g, base.clone(), base, c, e, &mut rng)?,
                PolicySpec::Fixed { t0, rest: None } => run_episode(q, g, FixedPolicy(t0), base, c, e, &mut rng)?,
                PolicySpec::Fixed { t0, rest: Some(r) } => {
                    run_episode(q, g, FixedPolicy(t0), FixedPolicy(r), c, e, &mut rng)?
                }
                PolicySpec::Meta => {
                    let t0 = MetaThenBaseline {
                        meta: setup.meta.expect("checked above"),
                        baseline: base.clone(),
                    };
                    run_episode(q, g, t0, base, c, e, &mut rng)?
                }
            };
            Ok(EpisodeLog {
                query_id: q.id.clone(),
                label: q.label,
                policy: policy.to_string(),
                seed: setup.seed,
                corpus_hash: setup.corpus_hash.clone(),
                catalog_hash: catalog_hash.clone(),
                t0_annotation: classify_tau(&result.history.turns[0].action.text),
                result,
            })
        })
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_episode_logs(path: &Path) -> Result<Vec<EpisodeLog>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Partitions logs by label; every bucket is present, possibly empty.
pub fn bucketize(logs: &[EpisodeLog]) -> BTreeMap<UnderspecLabel, Vec<&EpisodeLog>> {
    let mut out: BTreeMap<UnderspecLabel, Vec<&EpisodeLog>> =
        UnderspecLabel::ALL.into_iter().map(|b| (b, Vec::new())).collect();
    for l in logs {
        out.get_mut(&l.label).expect("all buckets present").push(l);
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Mean and linearly interpolated quartiles; all zero when empty.
pub fn summarize(values: &[f64]) -> Summary {
    if values.is_empty() {
        return Summary::default();
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    Summary {
        n: v.len(),
        mean: v.iter().sum::<f64>() / v.len() as f64,
        median: quantile(&v, 0.5),
        q1: quantile(&v, 0.25),
        q3: quantile(&v, 0.75),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketReport {
    pub episodes: usize,
    pub strategy_distribution: BTreeMap<ResponseStrategy, usize>,
    /// Indexed by step.
    pub step_utility: Vec<Summary>,
    pub t0_cost: Summary,
    pub total_cost: Summary,
    pub reward: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub policy: String,
    pub buckets: BTreeMap<UnderspecLabel, BucketReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub policies: Vec<PolicyReport>,
    pub meta: Option<MetaEvaluation>,
}

fn bucket_report(logs: &[&EpisodeLog]) -> BucketReport {
    let mut strategy_distribution: BTreeMap<ResponseStrategy, usize> =
        ResponseStrategy::ALL.into_iter().map(|t| (t, 0)).collect();
    let steps = logs.iter().map(|l| l.result.per_step_utility.len()).max().unwrap_or(0);
    let mut per_step = vec![Vec::new(); steps];
    for l in logs {
        *strategy_distribution.get_mut(&l.t0_annotation).unwrap() += 1;
        for (t, u) in l.result.per_step_utility.iter().enumerate() {
            per_step[t].push(*u);
        }
    }
    let col = |f: &dyn Fn(&EpisodeLog) -> f64| summarize(&logs.iter().map(|l| f(l)).collect::<Vec<_>>());
    BucketReport {
        episodes: logs.len(),
        strategy_distribution,
        step_utility: per_step.iter().map(|v| summarize(v)).collect(),
        t0_cost: col(&|l| l.result.per_step_cost[0] as f64),
        total_cost: col(&|l| l.result.total_cost() as f64),
        reward: col(&|l| l.result.reward),
    }
}

/// Aggregates logs grouped by policy name, in first-appearance order.
pub fn build_report(logs: &[EpisodeLog], meta: Option<MetaEvaluation>) -> Report {
    let mut order: Vec<&str> = Vec::new();
    for l in logs {
        if !order.contains(&l.policy.as_str()) {
            order.push(&l.policy);
        }
    }
    let policies = order
        .into_iter()
        .map(|p| {
            let mine: Vec<EpisodeLog> = logs.iter().filter(|l| l.policy == p).cloned().collect();
            PolicyReport {
                policy: p.to_owned(),
                buckets: bucketize(&mine).into_iter().map(|(b, v)| (b, bucket_report(&v))).collect(),
            }
        })
        .collect();
    Report { policies, meta }
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

impl Report {
    pub fn strategy_csv(&self) -> String {
        let mut s = String::from("policy,bucket,strategy,count,fraction\n");
        for p in &self.policies {
            for (b, r) in &p.buckets {
                for (t, c) in &r.strategy_distribution {
                    let frac = if r.episodes == 0 { 0.0 } else { *c as f64 / r.episodes as f64 };
                    writeln!(s, "{},{b},{t},{c},{}", p.policy, f6(frac)).unwrap();
                }
            }
        }
        s
    }

    pub fn utility_csv(&self) -> String {
        let mut s = String::from("policy,bucket,step,n,mean,median,q1,q3\n");
        for p in &self.policies {
            for (b, r) in &p.buckets {
                for (t, u) in r.step_utility.iter().enumerate() {
                    writeln!(s, "{},{b},{t},{},{},{},{},{}", p.policy, u.n, f6(u.mean), f6(u.median), f6(u.q1), f6(u.q3))
                        .unwrap();
                }
            }
        }
        s
    }

    pub fn cost_csv(&self) -> String {
        let mut s = String::from("policy,bucket,measure,n,mean,median,q1,q3\n");
        for p in &self.policies {
            for (b, r) in &p.buckets {
                for (name, c) in [("t0", &r.t0_cost), ("total", &r.total_cost)] {
                    writeln!(s, "{},{b},{name},{},{},{},{},{}", p.policy, c.n, f6(c.mean), f6(c.median), f6(c.q1), f6(c.q3))
                        .unwrap();
                }
            }
        }
        s
    }

    /// Mean reward per policy and bucket, with the difference from the
    /// baseline policy when it was simulated, followed by the held-out β
    /// evaluation when present.
    pub fn reward_csv(&self) -> String {
        let mut s = String::from("source,policy,bucket,n,mean_reward,baseline_reward,difference,ci_lower\n");
        let base = self.policies.iter().find(|p| p.policy == "baseline");
        for p in &self.policies {
            for (b, r) in &p.buckets {
                let (br, diff) = match base {
                    Some(bp) => {
                        let m = bp.buckets[b].reward.mean;
                        (f6(m), f6(r.reward.mean - m))
                    }
                    None => (String::new(), String::new()),
                };
                writeln!(s, "episodes,{},{b},{},{},{br},{diff},", p.policy, r.episodes, f6(r.reward.mean)).unwrap();
            }
        }
        if let Some(m) = &self.meta {
            for c in &m.buckets {
                writeln!(
                    s,
                    "heldout,meta,{},{},{},{},{},{}",
                    c.bucket,
                    c.n,
                    f6(c.meta_reward),
                    f6(c.baseline_reward),
                    f6(c.difference),
                    f6(c.ci_lower)
                )
                .unwrap();
            }
        }
        s
    }

    /// Writes the four CSVs and `summary.json`; returns (file name, sha256) pairs.
    pub fn write(&self, dir: &Path) -> Result<Vec<(String, String)>> {
        fs::create_dir_all(dir)?;
        let files = [
            ("strategy_distribution.csv", self.strategy_csv()),
            ("utility.csv", self.utility_csv()),
            ("cost.csv", self.cost_csv()),
            ("reward_comparison.csv", self.reward_csv()),
            ("summary.json", serde_json::to_string_pretty(self)? + "\n"),
        ];
        let mut hashes = Vec::new();
        for (name, body) in files {
            fs::write(dir.join(name), &body)?;
            hashes.push((name.to_owned(), sha256_hex(body.as_bytes())));
        }
        Ok(hashes)
    }
}

/// Hashes and seeds behind a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seeds: BTreeMap<String, u64>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub config_hash: Option<String>,
    pub manifest_hash: String,
}

impl Manifest {
    pub fn seal(mut self) -> Self {
        self.manifest_hash.clear();
        self.manifest_hash = json_hash(&self);
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

pub fn file_hash(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Builds a report from persisted logs and writes it with its manifest.
pub fn report_from_files(episodes: &[PathBuf], meta: Option<&Path>, out: &Path) -> Result<Report> {
    let mut logs = Vec::new();
    let mut manifest = Manifest::default();
    for p in episodes {
        logs.extend(read_episode_logs(p)?);
        manifest.inputs.insert(p.display().to_string(), file_hash(p)?);
    }
    let meta_eval = match meta {
        Some(p) => {
            manifest.inputs.insert(p.display().to_string(), file_hash(p)?);
            Some(serde_json::from_slice(&fs::read(p)?)?)
        }
        None => None,
    };
    let report = build_report(&logs, meta_eval);
    manifest.outputs.extend(report.write(out)?);
    manifest.seal().write(&out.join("manifest.json"))?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Builtin intent name or a path to a domain file.
    pub domain: String,
    pub intent: Option<String>,
    pub seed: u64,
    pub queries: usize,
    pub catalog_size: usize,
    /// Existing artifacts to use instead of generating them.
    pub corpus: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub prior: Option<PathBuf>,
    pub policies: Vec<String>,
    pub max_rounds: usize,
    pub n_mc: usize,
    pub k: usize,
    pub lambda: f64,
    /// Held-out meta-policy evaluation; skipped when zero.
    pub train_queries: usize,
    pub test_queries: usize,
    /// Goals generated per split before stratified sampling.
    pub pool_size: usize,
    pub stratification: StratificationWeights,
    pub strategy: StrategyConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: "movie_rec".into(),
            intent: None,
            seed: 0,
            queries: 600,
            catalog_size: 1000,
            corpus: None,
            catalog: None,
            prior: None,
            policies: ["baseline", "direct_response", "hedge", "clarify", "interrogate", "meta"]
                .map(String::from)
                .to_vec(),
            max_rounds: 2,
            n_mc: DEFAULT_N_MC,
            k: DEFAULT_K,
            lambda: 0.0,
            train_queries: 600,
            test_queries: 300,
            pool_size: 1000,
            stratification: default_stratification(),
            strategy: StrategyConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn domain(&self) -> Result<IntentDomain> {
        match builtin_domain(&self.domain) {
            Ok(d) => Ok(d),
            Err(_) => load_domain_file(Path::new(&self.domain), self.intent.as_deref()),
        }
    }

    pub fn policy_specs(&self) -> Result<Vec<PolicySpec>> {
        self.policies.iter().map(|p| p.parse()).collect()
    }
}

/// Seed streams derived from the experiment seed.
pub mod streams {
    pub const CORPUS: u64 = 1;
    pub const CATALOG: u64 = 2;
    pub const EPISODES: u64 = 3;
    pub const TRAIN: u64 = 4;
    pub const TEST: u64 = 5;
    pub const QSTAR: u64 = 6;
    pub const BOOTSTRAP: u64 = 7;
}

/// End-to-end pipeline: corpus, catalog, episodes per policy, optional Q\*
/// and held-out β evaluation, then the report and manifest under `out`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<Report> {
    fs::create_dir_all(out)?;
    let domain = config.domain()?;
    let specs = config.policy_specs()?;
    let seed_of = |stream: u64| derive_seed(config.seed, &[stream]);
    let prior = match &config.prior {
        Some(p) => ConversationalPrior::load(p)?,
        None => ConversationalPrior::default(),
    };
    let episode = EpisodeConfig {
        max_rounds: config.max_rounds,
        strategy: config.strategy.clone(),
    };
    let mut manifest = Manifest {
        config_hash: Some(json_hash(config)),
        ..Manifest::default()
    };

    let corpus = match &config.corpus {
        Some(p) => {
            manifest.inputs.insert("corpus".into(), file_hash(p)?);
            Corpus::load(p)?
        }
        None => Corpus::generate(&domain, config.queries, seed_of(streams::CORPUS)),
    };
    if corpus.domain_hash != domain.hash() {
        return Err(Error::HashMismatch {
            artifact: "corpus domain".into(),
            expected: domain.hash(),
            found: corpus.domain_hash.clone(),
        });
    }
    let wants_meta = config.train_queries > 0 && config.test_queries > 0;
    let train_pool = Corpus::generate(&domain, if wants_meta { config.pool_size } else { 0 }, seed_of(streams::TRAIN));
    let test_pool = Corpus::generate(&domain, if wants_meta { config.pool_size } else { 0 }, seed_of(streams::TEST));

    let catalog = match &config.catalog {
        Some(p) => {
            manifest.inputs.insert("catalog".into(), file_hash(p)?);
            Catalog::load(&domain, p)?
        }
        None => {
            let mut c = Catalog::generate(&domain, config.catalog_size, seed_of(streams::CATALOG))?;
            c.inject_exact_matches(corpus.goals().chain(train_pool.goals()).chain(test_pool.goals()))?;
            c
        }
    };
    corpus.save(&out.join("corpus.json"))?;
    catalog.save(&out.join("catalog.json"))?;
    manifest.outputs.insert("corpus.json".into(), file_hash(&out.join("corpus.json"))?);
    manifest.outputs.insert("catalog.json".into(), file_hash(&out.join("catalog.json"))?);
    if let Some(p) = &config.prior {
        manifest.inputs.insert("prior".into(), file_hash(p)?);
    }
    manifest.seeds.insert("experiment".into(), config.seed);

    let mut meta = None;
    let mut meta_eval = None;
    if wants_meta {
        let qcfg = QStarConfig {
            n_mc: config.n_mc,
            seed: seed_of(streams::QSTAR),
            episode: episode.clone(),
            prior: prior.clone(),
        };
        let featurizer = HashingFeaturizer::default();
        let split = |pool: &Corpus, n: usize, stream: u64, name: &str| -> Result<Vec<QStarRecord>> {
            let qs = pool.queries();
            let picked = stratify_sample(&qs, &config.stratification, n, &mut seeded(seed_of(stream) ^ 0x5eed))?;
            let records = build_training_set(&picked, &catalog, &featurizer, &qcfg)?;
            save_qstar(&records, &out.join(name))?;
            Ok(records)
        };
        let train = split(&train_pool, config.train_queries, streams::TRAIN, "qstar_train.json")?;
        let test = split(&test_pool, config.test_queries, streams::TEST, "qstar_test.json")?;
        for name in ["qstar_train.json", "qstar_test.json"] {
            manifest.outputs.insert(name.into(), file_hash(&out.join(name))?);
        }
        let m = MetaPolicy::fit(featurizer, &train, config.k)?.with_lambda(config.lambda);
        let eval = evaluate_meta(&m, &test, seed_of(streams::BOOTSTRAP));
        fs::write(out.join("meta_eval.json"), serde_json::to_string_pretty(&eval)? + "\n")?;
        manifest.outputs.insert("meta_eval.json".into(), file_hash(&out.join("meta_eval.json"))?);
        meta = Some(m);
        meta_eval = Some(eval);
    }

    let setup = SimulationSetup {
        catalog: &catalog,
        episode: &episode,
        prior: &prior,
        meta: meta.as_ref(),
        seed: seed_of(streams::EPISODES),
        corpus_hash: corpus.hash(),
    };
    let queries = corpus.queries();
    let mut all_logs = Vec::new();
    for spec in specs {
        if spec == PolicySpec::Meta && meta.is_none() {
            return Err(Error::Config("policy meta requires train_queries and test_queries".into()));
        }
        let logs = simulate(&queries, spec, &setup)?;
        let name = format!("episodes_{}.jsonl", spec.to_string().replace('+', "_then_"));
        write_jsonl(&out.join(&name), &logs)?;
        manifest.outputs.insert(name.clone(), file_hash(&out.join(&name))?);
        all_logs.extend(logs);
    }
    manifest.seeds.insert("episodes".into(), setup.seed);

    let report = build_report(&all_logs, meta_eval);
    manifest.outputs.extend(report.write(out)?);
    manifest.seal().write(&out.join("manifest.json"))?;
    Ok(report)
}

/// Loads Q\* files and evaluates a meta-policy fitted on `train` against `test`.
pub fn eval_meta_files(train: &Path, test: &Path, k: usize, lambda: f64, seed: u64) -> Result<MetaEvaluation> {
    let train = load_qstar(train)?;
    let test = load_qstar(test)?;
    let meta = MetaPolicy::fit(HashingFeaturizer::default(), &train, k)?.with_lambda(lambda);
    Ok(evaluate_meta(&meta, &test, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn policy_names_round_trip() {
        for name in ["baseline", "meta", "clarify", "hedge", "clarify+direct_response", "refuse"] {
            let spec: PolicySpec = name.parse().unwrap();
            assert_eq!(spec.to_string(), name);
        }
        assert_eq!("direct".parse::<PolicySpec>().unwrap().to_string(), "direct_response");
        assert!("misc".parse::<PolicySpec>().is_err());
        assert!("clarify+".parse::<PolicySpec>().is_err());
        assert!("nope".parse::<PolicySpec>().unwrap_err().is_config());
    }

    #[test]
    fn summary_quartiles() {
        let s = summarize(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(s.n, 4);
        assert_eq!(s.mean, 2.5);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.q3, 3.25);
        assert_eq!(summarize(&[]), Summary::default());
        assert_eq!(summarize(&[7.0]).q3, 7.0);
    }

    #[test]
    fn config_defaults_and_unknown_keys() {
        let c: ExperimentConfig = toml::from_str("seed = 3\nqueries = 10").unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.catalog_size, 1000);
        assert_eq!(c.k, 5);
        assert!(toml::from_str::<ExperimentConfig>("colour = 1").is_err());
    }
}
