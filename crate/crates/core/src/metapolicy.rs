//! Offline meta-policy learning: Q\* by seeded simulation, k-NN estimation
//! of Q̂ over a pluggable featurizer, and argmax selection.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog::Catalog;
use crate::corpus::{Goal, MaskedQuery, QueryRef, UnderspecLabel};
use crate::dialogue::{run_episode, Action, ConversationHistory, EpisodeConfig, EpisodeResult, Policy, TurnContext};
use crate::error::{Error, Result};
use crate::rng::{derive, key_hash, seeded, SimRng};
use crate::strategies::{
    act_strategy, baseline_policy, classify_tau, BaselinePolicy, ConversationalPrior, FixedPolicy, ResponseStrategy,
};

pub const DEFAULT_K: usize = 5;
pub const DEFAULT_N_MC: usize = 8;
pub const FEATURE_BUCKETS: usize = 256;
/// Tokens per unit of cost penalty when λ > 0.
pub const COST_SCALE: f64 = 100.0;

/// Values for the four actionable strategies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QTable {
    pub clarify: f64,
    pub direct_response: f64,
    pub hedge: f64,
    pub interrogate: f64,
}

impl QTable {
    pub fn from_fn(mut f: impl FnMut(ResponseStrategy) -> f64) -> Self {
        QTable {
            clarify: f(ResponseStrategy::Clarify),
            direct_response: f(ResponseStrategy::DirectResponse),
            hedge: f(ResponseStrategy::Hedge),
            interrogate: f(ResponseStrategy::Interrogate),
        }
    }

    pub fn get(&self, tau: ResponseStrategy) -> Option<f64> {
        match tau {
            ResponseStrategy::Clarify => Some(self.clarify),
            ResponseStrategy::DirectResponse => Some(self.direct_response),
            ResponseStrategy::Hedge => Some(self.hedge),
            ResponseStrategy::Interrogate => Some(self.interrogate),
            _ => None,
        }
    }

    /// Entries in tie-break order.
    pub fn iter(&self) -> impl Iterator<Item = (ResponseStrategy, f64)> + '_ {
        ResponseStrategy::ACTIONABLE.into_iter().map(|t| (t, self.get(t).unwrap()))
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        QTable::from_fn(|t| f(self.get(t).unwrap()))
    }

    /// First maximum in clarify > direct_response > hedge > interrogate order.
    pub fn argmax(&self) -> ResponseStrategy {
        let mut best = (ResponseStrategy::Clarify, self.clarify);
        for (t, v) in self.iter().skip(1) {
            if v > best.1 {
                best = (t, v);
            }
        }
        best.0
    }

    pub fn validate(&self) -> Result<()> {
        match self.iter().find(|(_, v)| !v.is_finite() || *v < 0.0 || *v > 1.0) {
            Some((t, v)) => Err(Error::OutOfRange(format!("Q({t}) = {v} outside [0, 1]"))),
            None => Ok(()),
        }
    }
}

/// Maps a conversation prefix to a fixed-dimension unit vector.
pub trait Featurizer: Send + Sync {
    fn dim(&self) -> usize;
    fn featurize(&self, history: &ConversationHistory) -> Result<Vec<f64>>;
}

/// Hashes the intent and each disclosed `category=option` pair into
/// `buckets` slots, then appends query length and masked fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashingFeaturizer {
    pub buckets: usize,
}

impl Default for HashingFeaturizer {
    fn default() -> Self {
        HashingFeaturizer { buckets: FEATURE_BUCKETS }
    }
}

impl Featurizer for HashingFeaturizer {
    fn dim(&self) -> usize {
        self.buckets + 2
    }

    fn featurize(&self, history: &ConversationHistory) -> Result<Vec<f64>> {
        if self.buckets == 0 {
            return Err(Error::Featurizer("zero hash buckets".into()));
        }
        let query = &history.query;
        let mut v = vec![0.0; self.dim()];
        let slot = |key: &str| (key_hash(key) % self.buckets as u64) as usize;
        v[slot(&format!("intent:{}", query.intent))] += 1.0;
        let disclosed = history.disclosed();
        for (cat, opts) in &disclosed {
            for o in opts {
                v[slot(&format!("{cat}={o}"))] += 1.0;
            }
        }
        let total = query.total_attributes().max(1);
        v[self.buckets] = query.text.split_whitespace().count() as f64 / 32.0;
        v[self.buckets + 1] = total.saturating_sub(disclosed.len()) as f64 / total as f64;
        normalize(&mut v)?;
        Ok(v)
    }
}

fn normalize(v: &mut [f64]) -> Result<()> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::Featurizer("cannot normalize a zero or non-finite vector".into()));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Simulation settings for Q\* estimation.
#[derive(Debug, Clone, PartialEq)]
pub struct QStarConfig {
    pub n_mc: usize,
    pub seed: u64,
    pub episode: EpisodeConfig,
    pub prior: ConversationalPrior,
}

impl Default for QStarConfig {
    fn default() -> Self {
        QStarConfig {
            n_mc: DEFAULT_N_MC,
            seed: 0,
            episode: EpisodeConfig::default(),
            prior: ConversationalPrior::default(),
        }
    }
}

/// Rollout stream shared by every strategy for the same query and rollout
/// index, so Q\* differences are not swamped by sampling noise.
pub fn rollout_rng(seed: u64, query_id: &str, rollout: usize) -> SimRng {
    derive(seed, &[key_hash(query_id), rollout as u64])
}

#[derive(Debug, Clone, PartialEq)]
pub struct QStar {
    pub qstar: QTable,
    /// Mean total episode cost per strategy.
    pub cost: QTable,
    /// Mean reward of the baseline policy from t0 on the same rollout streams.
    pub baseline: f64,
}

pub fn compute_qstar(query: &MaskedQuery, goal: &Goal, catalog: &Catalog, config: &QStarConfig) -> Result<QStar> {
    if config.n_mc == 0 {
        return Err(Error::Config("n_mc must be at least 1".into()));
    }
    let n = config.n_mc as f64;
    let base = baseline_policy(config.prior.clone());
    let rollouts = |t0: Option<ResponseStrategy>| -> Result<(f64, f64)> {
        let (mut reward, mut cost) = (0.0, 0.0);
        for r in 0..config.n_mc {
            let mut rng = rollout_rng(config.seed, &query.id, r);
            let res = match t0 {
                Some(tau) => run_episode(query, goal, FixedPolicy(tau), base.clone(), catalog, &config.episode, &mut rng)?,
                None => run_episode(query, goal, base.clone(), base.clone(), catalog, &config.episode, &mut rng)?,
            };
            reward += res.reward;
            cost += res.total_cost() as f64;
        }
        Ok((reward / n, cost / n))
    };
    let mut q = QTable::default();
    let mut c = QTable::default();
    for tau in ResponseStrategy::ACTIONABLE {
        let (rw, cs) = rollouts(Some(tau))?;
        set(&mut q, tau, rw);
        set(&mut c, tau, cs);
    }
    let (baseline, _) = rollouts(None)?;
    Ok(QStar { qstar: q, cost: c, baseline })
}

fn set(table: &mut QTable, tau: ResponseStrategy, v: f64) {
    match tau {
        ResponseStrategy::Clarify => table.clarify = v,
        ResponseStrategy::DirectResponse => table.direct_response = v,
        ResponseStrategy::Hedge => table.hedge = v,
        ResponseStrategy::Interrogate => table.interrogate = v,
        _ => {}
    }
}

/// One row of a Q\* table file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QStarRecord {
    pub query_id: String,
    pub label: UnderspecLabel,
    pub qstar: QTable,
    pub cost: QTable,
    pub baseline: f64,
    pub feature: Vec<f64>,
}

impl QStarRecord {
    pub fn exhaustive_argmax(&self) -> ResponseStrategy {
        self.qstar.argmax()
    }
}

/// Q\* for every query, in input order.
pub fn build_training_set(
    queries: &[QueryRef<'_>],
    catalog: &Catalog,
    featurizer: &dyn Featurizer,
    config: &QStarConfig,
) -> Result<Vec<QStarRecord>> {
    queries
        .par_iter()
        .map(|qr| {
            let q = compute_qstar(qr.query, qr.goal, catalog, config)?;
            let feature = featurizer.featurize(&ConversationHistory::new(qr.query.clone()))?;
            Ok(QStarRecord {
                query_id: qr.query.id.clone(),
                label: qr.query.label,
                qstar: q.qstar,
                cost: q.cost,
                baseline: q.baseline,
                feature,
            })
        })
        .collect()
}

pub fn save_qstar(records: &[QStarRecord], path: &std::path::Path) -> Result<()> {
    std::fs::write(path, serde_json::to_vec_pretty(records)?)?;
    Ok(())
}

pub fn load_qstar(path: &std::path::Path) -> Result<Vec<QStarRecord>> {
    let records: Vec<QStarRecord> = serde_json::from_slice(&std::fs::read(path)?)?;
    for r in &records {
        r.qstar.validate()?;
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
struct TrainingPoint {
    query_id: String,
    feature: Vec<f64>,
    qstar: QTable,
    cost: QTable,
}

/// k-NN meta-policy. Immutable after construction.
pub struct MetaPolicy<F: Featurizer = HashingFeaturizer> {
    featurizer: F,
    training: Vec<TrainingPoint>,
    k: usize,
    lambda: f64,
}

impl<F: Featurizer> MetaPolicy<F> {
    /// Clamps `k` to the training-set size with a warning.
    pub fn fit(featurizer: F, records: &[QStarRecord], k: usize) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        let k = if k > records.len() {
            log::warn!("k = {k} exceeds training size {}; clamping", records.len());
            records.len()
        } else {
            k
        };
        let training = records
            .iter()
            .map(|r| {
                if r.feature.len() != featurizer.dim() {
                    return Err(Error::Featurizer(format!(
                        "{}: feature dimension {} != {}",
                        r.query_id,
                        r.feature.len(),
                        featurizer.dim()
                    )));
                }
                r.qstar.validate()?;
                Ok(TrainingPoint {
                    query_id: r.query_id.clone(),
                    feature: r.feature.clone(),
                    qstar: r.qstar,
                    cost: r.cost,
                })
            })
            .collect::<Result<_>>()?;
        Ok(MetaPolicy {
            featurizer,
            training,
            k,
            lambda: 0.0,
        })
    }

    /// Cost penalty weight, clamped to [0, 1].
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = if lambda.is_finite() { lambda.clamp(0.0, 1.0) } else { 0.0 };
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn featurizer(&self) -> &F {
        &self.featurizer
    }

    /// Neighbor indices ordered by similarity, then exact query-id match, then
    /// training order.
    fn neighbors(&self, feature: &[f64], query_id: Option<&str>) -> Vec<usize> {
        let mut scored: Vec<(f64, bool, usize)> = self
            .training
            .iter()
            .enumerate()
            .map(|(i, p)| (dot(feature, &p.feature), Some(p.query_id.as_str()) == query_id, i))
            .collect();
        let k = self.k;
        let cmp = |a: &(f64, bool, usize), b: &(f64, bool, usize)| {
            b.0.partial_cmp(&a.0)
                .unwrap_or(Ordering::Equal)
                .then(b.1.cmp(&a.1))
                .then(a.2.cmp(&b.2))
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, cmp);
            scored.truncate(k);
        }
        scored.sort_by(cmp);
        scored.into_iter().map(|s| s.2).collect()
    }

    fn average(&self, idx: &[usize], pick: impl Fn(&TrainingPoint) -> QTable) -> QTable {
        let n = idx.len() as f64;
        QTable::from_fn(|t| idx.iter().map(|&i| pick(&self.training[i]).get(t).unwrap()).sum::<f64>() / n)
    }

    pub fn predict_features(&self, feature: &[f64], query_id: Option<&str>) -> QTable {
        self.average(&self.neighbors(feature, query_id), |p| p.qstar)
    }

    pub fn predict_q(&self, history: &ConversationHistory) -> Result<QTable> {
        let f = self.featurizer.featurize(history)?;
        Ok(self.predict_features(&f, Some(&history.query.id)))
    }

    pub fn select_features(&self, feature: &[f64], query_id: Option<&str>) -> ResponseStrategy {
        let idx = self.neighbors(feature, query_id);
        let q = self.average(&idx, |p| p.qstar);
        if self.lambda == 0.0 {
            return q.argmax();
        }
        let c = self.average(&idx, |p| p.cost);
        QTable::from_fn(|t| q.get(t).unwrap() - self.lambda * c.get(t).unwrap() / COST_SCALE).argmax()
    }

    pub fn select(&self, history: &ConversationHistory) -> Result<ResponseStrategy> {
        let f = self.featurizer.featurize(history)?;
        Ok(self.select_features(&f, Some(&history.query.id)))
    }
}

/// β at t0, the baseline afterwards.
pub struct MetaThenBaseline<'a, F: Featurizer> {
    pub meta: &'a MetaPolicy<F>,
    pub baseline: BaselinePolicy,
}

impl<F: Featurizer> Policy for MetaThenBaseline<'_, F> {
    fn act(&mut self, ctx: &TurnContext<'_>, rng: &mut SimRng) -> Result<Action> {
        if ctx.turn == 0 {
            let tau = self.meta.select(ctx.history)?;
            act_strategy(tau, ctx, rng)
        } else {
            self.baseline.act(ctx, rng)
        }
    }
}

/// An episode annotated with per-action strategy labels read back from text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoggedConversation {
    pub history: ConversationHistory,
    pub utility: f64,
    pub tau_annotations: Vec<ResponseStrategy>,
}

pub fn annotate_log(result: &EpisodeResult) -> LoggedConversation {
    LoggedConversation {
        history: result.history.clone(),
        utility: result.reward,
        tau_annotations: result.history.actions().map(|a| classify_tau(&a.text)).collect(),
    }
}

pub type StratificationWeights = BTreeMap<UnderspecLabel, f64>;

pub fn default_stratification() -> StratificationWeights {
    BTreeMap::from([
        (UnderspecLabel::CriticalUnder, 0.23),
        (UnderspecLabel::MinorUnder, 0.47),
        (UnderspecLabel::Sufficient, 0.30),
    ])
}

/// Per-bucket counts by largest remainder; ties go to the earlier bucket.
pub fn stratum_counts(weights: &StratificationWeights, n: usize) -> Result<BTreeMap<UnderspecLabel, usize>> {
    if weights.values().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::Config("stratification weights must be non-negative".into()));
    }
    let sum: f64 = weights.values().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("stratification weights sum to {sum}")));
    }
    let mut counts: BTreeMap<UnderspecLabel, usize> = BTreeMap::new();
    let mut rema = Vec::new();
    for (&b, &w) in weights {
        let exact = w * n as f64;
        let floor = exact.floor() as usize;
        counts.insert(b, floor);
        rema.push((exact - floor as f64, b));
    }
    let assigned: usize = counts.values().sum();
    rema.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    for (_, b) in rema.into_iter().take(n.saturating_sub(assigned)) {
        *counts.get_mut(&b).unwrap() += 1;
    }
    Ok(counts)
}

/// Subsample whose bucket counts match `weights`, preserving source order.
pub fn stratify_sample<'a>(
    queries: &[QueryRef<'a>],
    weights: &StratificationWeights,
    n: usize,
    rng: &mut SimRng,
) -> Result<Vec<QueryRef<'a>>> {
    let counts = stratum_counts(weights, n)?;
    let mut chosen = Vec::with_capacity(n);
    for (&bucket, &want) in &counts {
        let pool: Vec<usize> = (0..queries.len()).filter(|&i| queries[i].query.label == bucket).collect();
        if pool.len() < want {
            return Err(Error::BucketExhausted {
                bucket,
                requested: want,
                available: pool.len(),
            });
        }
        chosen.extend(index::sample(rng, pool.len(), want).into_iter().map(|j| pool[j]));
    }
    chosen.sort_unstable();
    Ok(chosen.into_iter().map(|i| queries[i]).collect())
}

/// Paired comparison of β-then-baseline against baseline in one bucket.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketComparison {
    pub bucket: UnderspecLabel,
    pub n: usize,
    pub meta_reward: f64,
    pub baseline_reward: f64,
    pub difference: f64,
    /// One-sided 95% bootstrap lower bound on the mean difference.
    pub ci_lower: f64,
    pub selected: BTreeMap<ResponseStrategy, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaEvaluation {
    pub k: usize,
    pub lambda: f64,
    pub buckets: Vec<BucketComparison>,
}

impl MetaEvaluation {
    pub fn bucket(&self, label: UnderspecLabel) -> Option<&BucketComparison> {
        self.buckets.iter().find(|b| b.bucket == label)
    }
}

pub const BOOTSTRAP_RESAMPLES: usize = 2000;

/// Lower `alpha` quantile of the bootstrap distribution of the mean.
pub fn bootstrap_lower(diffs: &[f64], alpha: f64, resamples: usize, seed: u64) -> f64 {
    if diffs.is_empty() {
        return f64::NAN;
    }
    let mut rng = seeded(seed);
    let n = diffs.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| diffs[rng.gen_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((alpha * resamples as f64).floor() as usize).min(resamples - 1);
    means[idx]
}

/// Scores β on held-out Q\* records: β's reward on a query is the Q\* of the
/// strategy it selects, the baseline's is the recorded baseline value.
pub fn evaluate_meta<F: Featurizer>(meta: &MetaPolicy<F>, test: &[QStarRecord], seed: u64) -> MetaEvaluation {
    let buckets = UnderspecLabel::ALL
        .into_iter()
        .map(|bucket| {
            let rows: Vec<&QStarRecord> = test.iter().filter(|r| r.label == bucket).collect();
            let mut selected = BTreeMap::new();
            let mut diffs = Vec::with_capacity(rows.len());
            let (mut meta_sum, mut base_sum) = (0.0, 0.0);
            for r in &rows {
                let tau = meta.select_features(&r.feature, None);
                *selected.entry(tau).or_insert(0) += 1;
                let q = r.qstar.get(tau).unwrap();
                meta_sum += q;
                base_sum += r.baseline;
                diffs.push(q - r.baseline);
            }
            let n = rows.len();
            let mean = |s: f64| if n == 0 { 0.0 } else { s / n as f64 };
            BucketComparison {
                bucket,
                n,
                meta_reward: mean(meta_sum),
                baseline_reward: mean(base_sum),
                difference: mean(meta_sum) - mean(base_sum),
                ci_lower: bootstrap_lower(&diffs, 0.05, BOOTSTRAP_RESAMPLES, seed ^ key_hash(bucket.as_str())),
                selected,
            }
        })
        .collect();
    MetaEvaluation {
        k: meta.k(),
        lambda: meta.lambda(),
        buckets,
    }
}
