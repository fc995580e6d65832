//! Episode engine for the partially observed recommendation dialogue.
//!
//! The chatbot acts on what has been revealed so far; the simulated user
//! answers exactly the questions bound to an attribute and nothing else.
//! An episode ends on the first recommendation-bearing action, or is forced
//! to recommend once `max_rounds` actions have gone by without one.

use serde::{Deserialize, Serialize};

use crate::catalog::{item_utility, Catalog, ItemId};
use crate::corpus::{label_underspec, quote_options, Assignment, Goal, IntentDomain, MaskedQuery, UnderspecLabel};
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::strategies::{act_direct, ResponseStrategy, StrategyConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    pub bound_attribute: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub strategy: ResponseStrategy,
    pub questions: Vec<Question>,
    pub recommendations: Vec<ItemId>,
    pub text: String,
}

impl Action {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidAction(format!("{}: {msg}", self.strategy)));
        if !self.recommendations.is_empty()
            && !matches!(self.strategy, ResponseStrategy::DirectResponse | ResponseStrategy::Hedge)
        {
            return bad("only direct responses and hedges carry recommendations");
        }
        match self.strategy {
            ResponseStrategy::Clarify
                if self.questions.is_empty() || self.questions.len() > 3 || !self.recommendations.is_empty() =>
            {
                return bad("clarify asks 1..=3 questions and recommends nothing");
            }
            ResponseStrategy::Interrogate if self.questions.len() <= 3 || !self.recommendations.is_empty() => {
                return bad("interrogate asks more than 3 questions and recommends nothing");
            }
            _ => {}
        }
        if self.text.trim().is_empty() && self.strategy != ResponseStrategy::MissingResponse {
            return bad("empty text");
        }
        Ok(())
    }

    pub fn recommends(&self) -> bool {
        !self.recommendations.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub revealed_answers: Assignment,
    /// Indices of questions the user declined because they map to no attribute.
    pub declined: Vec<usize>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Observation(Observation),
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub action: Action,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationHistory {
    pub query: MaskedQuery,
    pub turns: Vec<Turn>,
}

impl ConversationHistory {
    pub fn new(query: MaskedQuery) -> Self {
        ConversationHistory { query, turns: Vec::new() }
    }

    pub fn push(&mut self, turn: Turn) -> Result<()> {
        if self.is_terminated() {
            return Err(Error::InvalidAction("conversation already terminated".into()));
        }
        self.turns.push(turn);
        Ok(())
    }

    pub fn is_terminated(&self) -> bool {
        matches!(self.turns.last(), Some(Turn { outcome: Outcome::Terminal, .. }))
    }

    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.turns.iter().map(|t| &t.action)
    }

    /// Everything the user has disclosed: query constraints first, then
    /// answers in the order they were given.
    pub fn disclosed(&self) -> Assignment {
        let mut out = self.query.revealed.clone();
        for turn in &self.turns {
            if let Outcome::Observation(obs) = &turn.outcome {
                for (k, v) in &obs.revealed_answers {
                    out.insert(k.clone(), v.clone());
                }
            }
        }
        out
    }

    pub fn view(&self, domain: &IntentDomain) -> ConstraintView {
        ConstraintView::new(domain, &self.disclosed())
    }

    /// Query text followed by the text of every turn.
    pub fn transcript(&self) -> String {
        let mut parts = vec![self.query.text.clone()];
        for turn in &self.turns {
            parts.push(turn.action.text.clone());
            if let Outcome::Observation(obs) = &turn.outcome {
                parts.push(obs.text.clone());
            }
        }
        parts.join("\n")
    }
}

/// The chatbot's view of the constraint state at a turn.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintView {
    /// All categories in domain order.
    pub categories: Vec<String>,
    /// Disclosed constraints in domain order.
    pub revealed: Assignment,
    /// Undisclosed categories in domain order.
    pub unknown: Vec<String>,
}

impl ConstraintView {
    pub fn new(domain: &IntentDomain, disclosed: &Assignment) -> Self {
        let mut revealed = Assignment::new();
        let mut unknown = Vec::new();
        for attr in &domain.attributes {
            match disclosed.get(&attr.category) {
                Some(v) => {
                    revealed.insert(attr.category.clone(), v.clone());
                }
                None => unknown.push(attr.category.clone()),
            }
        }
        ConstraintView {
            categories: domain.attributes.iter().map(|a| a.category.clone()).collect(),
            revealed,
            unknown,
        }
    }

    pub fn from_query(domain: &IntentDomain, query: &MaskedQuery) -> Self {
        ConstraintView::new(domain, &query.revealed)
    }

    pub fn label(&self) -> UnderspecLabel {
        label_underspec(self.revealed.len(), self.categories.len()).unwrap_or(UnderspecLabel::Sufficient)
    }
}

/// Answers each bound question with the goal's true assignment for that
/// attribute; unbound (or unknown-category) questions are declined.
pub fn simulate_user(goal: &Goal, questions: &[Question]) -> Observation {
    let mut obs = Observation::default();
    let mut sentences = Vec::new();
    for (i, q) in questions.iter().enumerate() {
        match q.bound_attribute.as_ref().and_then(|c| goal.assignments.get_key_value(c)) {
            Some((cat, opts)) => {
                if obs.revealed_answers.insert(cat.clone(), opts.clone()).is_none() {
                    sentences.push(format!("My preference for {cat} is {}.", quote_options(opts)));
                }
            }
            None => obs.declined.push(i),
        }
    }
    obs.text = sentences.join(" ");
    obs
}

/// Cognitive cost: whitespace-delimited token count of the action text.
pub fn cost(action: &Action) -> usize {
    action.text.split_whitespace().count()
}

pub struct TurnContext<'a> {
    pub view: &'a ConstraintView,
    pub catalog: &'a Catalog,
    pub config: &'a StrategyConfig,
    pub history: &'a ConversationHistory,
    pub turn: usize,
}

/// A chatbot policy. `recommend` is called when the round budget is spent and
/// must return a recommendation-bearing action.
pub trait Policy {
    fn act(&mut self, ctx: &TurnContext<'_>, rng: &mut SimRng) -> Result<Action>;

    fn recommend(&mut self, ctx: &TurnContext<'_>, rng: &mut SimRng) -> Result<Action> {
        act_direct(ctx.view, ctx.catalog, ctx.config.direct_items, rng)
    }
}

impl<P: Policy + ?Sized> Policy for &mut P {
    fn act(&mut self, ctx: &TurnContext<'_>, rng: &mut SimRng) -> Result<Action> {
        (**self).act(ctx, rng)
    }

    fn recommend(&mut self, ctx: &TurnContext<'_>, rng: &mut SimRng) -> Result<Action> {
        (**self).recommend(ctx, rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub max_rounds: usize,
    pub strategy: StrategyConfig,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        EpisodeConfig {
            max_rounds: 2,
            strategy: StrategyConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub history: ConversationHistory,
    pub per_step_utility: Vec<f64>,
    pub per_step_cost: Vec<usize>,
    pub reward: f64,
    pub t0_strategy: ResponseStrategy,
}

impl EpisodeResult {
    pub fn total_cost(&self) -> usize {
        self.per_step_cost.iter().sum()
    }
}

fn mean_utility(catalog: &Catalog, goal: &Goal, ids: &[ItemId]) -> Result<f64> {
    let mut sum = 0.0;
    for &id in ids {
        let item = catalog
            .item(id)
            .ok_or_else(|| Error::InvalidAction(format!("recommended unknown item {id}")))?;
        sum += item_utility(item, goal)?;
    }
    Ok(sum / ids.len() as f64)
}

pub fn run_episode(
    query: &MaskedQuery,
    goal: &Goal,
    mut policy_t0: impl Policy,
    mut policy_rest: impl Policy,
    catalog: &Catalog,
    config: &EpisodeConfig,
    rng: &mut SimRng,
) -> Result<EpisodeResult> {
    if config.max_rounds == 0 {
        return Err(Error::Config("max_rounds must be at least 1".into()));
    }
    let domain = catalog.domain();
    if goal.intent != domain.intent || query.intent != domain.intent {
        return Err(Error::DomainMismatch {
            expected: domain.intent.clone(),
            found: format!("goal {} / query {}", goal.intent, query.intent),
        });
    }

    let mut history = ConversationHistory::new(query.clone());
    let mut per_step_utility = Vec::new();
    let mut per_step_cost = Vec::new();
    let mut reward = 0.0;

    for t in 0..=config.max_rounds {
        let view = history.view(domain);
        let ctx = TurnContext {
            view: &view,
            catalog,
            config: &config.strategy,
            history: &history,
            turn: t,
        };
        let action = if t == config.max_rounds {
            let forced = policy_rest.recommend(&ctx, rng)?;
            if !forced.recommends() {
                return Err(Error::InvalidAction("forced turn produced no recommendations".into()));
            }
            forced
        } else if t == 0 {
            policy_t0.act(&ctx, rng)?
        } else {
            policy_rest.act(&ctx, rng)?
        };
        action.validate()?;
        per_step_cost.push(cost(&action));

        if action.recommends() {
            reward = mean_utility(catalog, goal, &action.recommendations)?;
            per_step_utility.push(reward);
            history.push(Turn { action, outcome: Outcome::Terminal })?;
            break;
        }
        per_step_utility.push(0.0);
        let obs = simulate_user(goal, &action.questions);
        history.push(Turn { action, outcome: Outcome::Observation(obs) })?;
    }

    let t0_strategy = history.turns[0].action.strategy;
    Ok(EpisodeResult {
        history,
        per_step_utility,
        per_step_cost,
        reward,
        t0_strategy,
    })
}
