//! Intent domains, latent user goals and synthetic queries with known
//! under-specification labels.
//!
//! A domain is loaded from the parameter-category/option listing format
//! (`cat`, `opts`, `max_sel_allowed`, `pref_constraint_type`) together with a
//! newline-separated sentence template. Goals assign every attribute; masked
//! queries reveal a uniformly drawn strict subset of them.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use indexmap::IndexMap;
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hash::json_hash;
use crate::rng::{derive, SimRng};

/// Attribute category -> selected options, in domain attribute order.
pub type Assignment = IndexMap<String, Vec<String>>;

pub mod builtin {
    pub const MOVIE_REC: &str = include_str!("../assets/domains/movie_rec.json");
    pub const GIFT_REC: &str = include_str!("../assets/domains/gift_rec.json");
    pub const PLANT_REC: &str = include_str!("../assets/domains/plant_rec.json");
}

pub fn builtin_domain(intent: &str) -> Result<IntentDomain> {
    let doc = match intent {
        "movie_rec" => builtin::MOVIE_REC,
        "gift_rec" => builtin::GIFT_REC,
        "plant_rec" => builtin::PLANT_REC,
        other => return Err(Error::Config(format!("no built-in domain for intent {other:?}"))),
    };
    load_domain_spec(doc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintType {
    SetValued,
    NumericRange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    /// Template slot name, e.g. `param_0`.
    pub param: String,
    pub category: String,
    pub options: Vec<String>,
    pub max_sel_allowed: usize,
    pub constraint_type: ConstraintType,
}

impl AttributeSpec {
    fn validate(&self) -> Result<()> {
        if self.options.is_empty() {
            return Err(Error::Schema(format!("{}: empty option list", self.category)));
        }
        let distinct: HashSet<&str> = self.options.iter().map(String::as_str).collect();
        if distinct.len() != self.options.len() {
            return Err(Error::Schema(format!("{}: duplicate options", self.category)));
        }
        if self.options.len() > 64 {
            return Err(Error::Schema(format!(
                "{}: at most 64 options are supported",
                self.category
            )));
        }
        if self.max_sel_allowed == 0 || self.max_sel_allowed > self.options.len() {
            return Err(Error::Schema(format!(
                "{}: max_sel_allowed {} outside 1..={}",
                self.category,
                self.max_sel_allowed,
                self.options.len()
            )));
        }
        Ok(())
    }

    pub fn option_index(&self, option: &str) -> Option<usize> {
        self.options.iter().position(|o| o == option)
    }

    fn slot(&self) -> String {
        format!("{{{}}}", self.param)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentDomain {
    pub intent: String,
    /// Ordered by the position of their slot in the template.
    pub attributes: Vec<AttributeSpec>,
    /// Opener, one sentence per attribute (same order as `attributes`), closer.
    pub template: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainDocument {
    templates: BTreeMap<String, TemplateEntry>,
    params: BTreeMap<String, IndexMap<String, ParamEntry>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TemplateEntry {
    value: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamEntry {
    cat: String,
    opts: Vec<String>,
    max_sel_allowed: usize,
    pref_constraint_type: ConstraintType,
}

/// Parses a document holding exactly one intent.
pub fn load_domain_spec(document: &str) -> Result<IntentDomain> {
    let mut domains = load_domain_library(document)?;
    if domains.len() != 1 {
        return Err(Error::Schema(format!(
            "document defines {} intents, expected exactly one",
            domains.len()
        )));
    }
    Ok(domains.remove(0))
}

/// Parses every intent in a document, sorted by intent name.
pub fn load_domain_library(document: &str) -> Result<Vec<IntentDomain>> {
    let doc: DomainDocument =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    let template_keys: HashSet<&String> = doc.templates.keys().collect();
    let param_keys: HashSet<&String> = doc.params.keys().collect();
    if template_keys != param_keys {
        return Err(Error::Schema(
            "templates and params must list the same intents".into(),
        ));
    }
    doc.templates
        .iter()
        .map(|(intent, t)| build_domain(intent, &t.value, &doc.params[intent]))
        .collect()
}

pub fn load_domain_file(path: &Path, intent: Option<&str>) -> Result<IntentDomain> {
    let text = std::fs::read_to_string(path)?;
    match intent {
        None => load_domain_spec(&text),
        Some(name) => load_domain_library(&text)?
            .into_iter()
            .find(|d| d.intent == name)
            .ok_or_else(|| Error::Schema(format!("intent {name:?} not defined"))),
    }
}

fn slots_in(sentence: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut rest = sentence;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else {
            break;
        };
        out.push(&rest[open + 1..open + close]);
        rest = &rest[open + close + 1..];
    }
    out
}

fn build_domain(
    intent: &str,
    template: &str,
    params: &IndexMap<String, ParamEntry>,
) -> Result<IntentDomain> {
    let sentences: Vec<String> = template
        .split('\n')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect();
    if sentences.len() < 3 {
        return Err(Error::Schema(format!(
            "{intent}: template needs an opener, attribute sentences and a closer"
        )));
    }
    let n_slots = sentences.len() - 2;
    if n_slots != params.len() {
        return Err(Error::Schema(format!(
            "{intent}: {n_slots} template slots but {} attributes",
            params.len()
        )));
    }
    let (opener, closer) = (&sentences[0], &sentences[sentences.len() - 1]);
    if !slots_in(opener).is_empty() || !slots_in(closer).is_empty() {
        return Err(Error::Schema(format!(
            "{intent}: opener and closer must not contain slots"
        )));
    }
    if !closer.contains("all of my requirements") {
        return Err(Error::Schema(format!(
            "{intent}: closer must request recommendations satisfying all of my requirements"
        )));
    }

    let mut used = HashSet::new();
    let mut attributes = Vec::with_capacity(n_slots);
    for sentence in &sentences[1..sentences.len() - 1] {
        let slots = slots_in(sentence);
        let [slot] = slots.as_slice() else {
            return Err(Error::Schema(format!(
                "{intent}: sentence {sentence:?} must contain exactly one slot"
            )));
        };
        let entry = params
            .get(*slot)
            .ok_or_else(|| Error::Schema(format!("{intent}: slot {{{slot}}} has no parameter")))?;
        if !used.insert(slot.to_string()) {
            return Err(Error::Schema(format!("{intent}: slot {{{slot}}} used twice")));
        }
        let attr = AttributeSpec {
            param: slot.to_string(),
            category: entry.cat.clone(),
            options: entry.opts.clone(),
            max_sel_allowed: entry.max_sel_allowed,
            constraint_type: entry.pref_constraint_type,
        };
        attr.validate()?;
        attributes.push(attr);
    }
    let categories: HashSet<&str> = attributes.iter().map(|a| a.category.as_str()).collect();
    if categories.len() != attributes.len() {
        return Err(Error::Schema(format!("{intent}: duplicate categories")));
    }

    Ok(IntentDomain {
        intent: intent.to_owned(),
        attributes,
        template: sentences,
    })
}

/// Renders options for insertion into a quoted template slot:
/// `Comedy" or "Drama` so that the slot reads `"Comedy" or "Drama"`.
fn slot_fill(options: &[String]) -> String {
    options.join("\" or \"")
}

pub fn quote_options(options: &[String]) -> String {
    format!("\"{}\"", slot_fill(options))
}

impl IntentDomain {
    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn hash(&self) -> String {
        json_hash(self)
    }

    pub fn attribute_index(&self, category: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.category == category)
    }

    pub fn attribute(&self, category: &str) -> Result<&AttributeSpec> {
        self.attribute_index(category)
            .map(|i| &self.attributes[i])
            .ok_or_else(|| Error::UnknownCategory(category.to_owned()))
    }

    pub fn opener(&self) -> &str {
        &self.template[0]
    }

    pub fn closer(&self) -> &str {
        &self.template[self.template.len() - 1]
    }

    fn attribute_sentence(&self, idx: usize, options: &[String]) -> String {
        self.template[idx + 1].replace(&self.attributes[idx].slot(), &slot_fill(options))
    }

    /// Draws a selection size uniformly from `1..=max_sel_allowed` and then a
    /// uniform subset of that size for every attribute.
    pub fn sample_assignment(&self, rng: &mut SimRng) -> Assignment {
        self.attributes
            .iter()
            .map(|attr| {
                let size = rng.gen_range(1..=attr.max_sel_allowed);
                let mut picked = index::sample(rng, attr.options.len(), size).into_vec();
                picked.sort_unstable();
                let opts = picked.into_iter().map(|i| attr.options[i].clone()).collect();
                (attr.category.clone(), opts)
            })
            .collect()
    }

    pub fn sample_goal(&self, id: impl Into<String>, rng: &mut SimRng) -> Goal {
        Goal {
            id: id.into(),
            intent: self.intent.clone(),
            assignments: self.sample_assignment(rng),
        }
    }

    pub fn validate_assignment(&self, assignment: &Assignment, complete: bool) -> Result<()> {
        for (category, opts) in assignment {
            let attr = self.attribute(category)?;
            if opts.is_empty() || opts.len() > attr.max_sel_allowed {
                return Err(Error::OutOfRange(format!(
                    "{category}: {} selected options, allowed 1..={}",
                    opts.len(),
                    attr.max_sel_allowed
                )));
            }
            if let Some(bad) = opts.iter().find(|o| attr.option_index(o).is_none()) {
                return Err(Error::OutOfRange(format!("{category}: unknown option {bad:?}")));
            }
        }
        if complete && assignment.len() != self.len() {
            return Err(Error::OutOfRange(format!(
                "assignment covers {} of {} attributes",
                assignment.len(),
                self.len()
            )));
        }
        Ok(())
    }

    pub fn validate_goal(&self, goal: &Goal) -> Result<()> {
        if goal.intent != self.intent {
            return Err(Error::DomainMismatch {
                expected: self.intent.clone(),
                found: goal.intent.clone(),
            });
        }
        self.validate_assignment(&goal.assignments, true)
    }

    /// The fully specified query: every template sentence in template order.
    pub fn render_sufficient(&self, goal: &Goal) -> String {
        let mut sentences = Vec::with_capacity(self.template.len());
        sentences.push(self.opener().to_owned());
        for (idx, attr) in self.attributes.iter().enumerate() {
            sentences.push(self.attribute_sentence(idx, &goal.assignments[&attr.category]));
        }
        sentences.push(self.closer().to_owned());
        sentences.join("\n")
    }

    pub fn sufficient_query(&self, goal: &Goal) -> MaskedQuery {
        MaskedQuery {
            id: format!("{}:s", goal.id),
            goal_id: goal.id.clone(),
            intent: self.intent.clone(),
            revealed: goal.assignments.clone(),
            masked: Vec::new(),
            text: self.render_sufficient(goal),
            label: UnderspecLabel::Sufficient,
        }
    }

    /// Draws `n ~ U{1..|attrs|}`, masks a uniform size-`n` subset of
    /// attributes, and shuffles the surviving attribute sentences between the
    /// opener and the closer. All draws come from `rng`, in that order.
    pub fn mask(&self, goal: &Goal, rng: &mut SimRng) -> MaskedQuery {
        let total = self.len();
        let n = rng.gen_range(1..=total);
        let masked_idx: HashSet<usize> = index::sample(rng, total, n).into_iter().collect();
        let mut revealed_idx: Vec<usize> = (0..total).filter(|i| !masked_idx.contains(i)).collect();
        revealed_idx.shuffle(rng);

        let mut sentences = vec![self.opener().to_owned()];
        for &idx in &revealed_idx {
            let cat = &self.attributes[idx].category;
            sentences.push(self.attribute_sentence(idx, &goal.assignments[cat]));
        }
        sentences.push(self.closer().to_owned());

        let revealed: Assignment = self
            .attributes
            .iter()
            .enumerate()
            .filter(|(i, _)| !masked_idx.contains(i))
            .map(|(_, a)| (a.category.clone(), goal.assignments[&a.category].clone()))
            .collect();
        let masked: Vec<String> = self
            .attributes
            .iter()
            .enumerate()
            .filter(|(i, _)| masked_idx.contains(i))
            .map(|(_, a)| a.category.clone())
            .collect();
        let label = label_underspec(revealed.len(), total)
            .expect("revealed count is always within range for a validated domain");

        MaskedQuery {
            id: format!("{}:m", goal.id),
            goal_id: goal.id.clone(),
            intent: self.intent.clone(),
            revealed,
            masked,
            text: sentences.join("\n"),
            label,
        }
    }
}

/// Free-function form of [`IntentDomain::sample_goal`].
pub fn sample_goal(domain: &IntentDomain, rng: &mut SimRng) -> Goal {
    domain.sample_goal("goal", rng)
}

/// The user's latent goal: every attribute assigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Goal {
    pub id: String,
    pub intent: String,
    pub assignments: Assignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskedQuery {
    pub id: String,
    pub goal_id: String,
    pub intent: String,
    pub revealed: Assignment,
    /// Masked categories in domain order. Empty only for sufficient queries.
    pub masked: Vec<String>,
    pub text: String,
    pub label: UnderspecLabel,
}

impl MaskedQuery {
    pub fn total_attributes(&self) -> usize {
        self.revealed.len() + self.masked.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnderspecLabel {
    CriticalUnder,
    MinorUnder,
    Sufficient,
}

impl UnderspecLabel {
    pub const ALL: [UnderspecLabel; 3] = [
        UnderspecLabel::CriticalUnder,
        UnderspecLabel::MinorUnder,
        UnderspecLabel::Sufficient,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            UnderspecLabel::CriticalUnder => "critical_under",
            UnderspecLabel::MinorUnder => "minor_under",
            UnderspecLabel::Sufficient => "sufficient",
        }
    }
}

impl fmt::Display for UnderspecLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UnderspecLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        UnderspecLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown under-specification label {s:?}")))
    }
}

/// critical when at most one attribute is revealed, sufficient when all are,
/// minor otherwise.
pub fn label_underspec(revealed_count: usize, total_count: usize) -> Result<UnderspecLabel> {
    if total_count < 2 || revealed_count > total_count {
        return Err(Error::OutOfRange(format!(
            "label_underspec({revealed_count}, {total_count})"
        )));
    }
    Ok(if revealed_count <= 1 {
        UnderspecLabel::CriticalUnder
    } else if revealed_count == total_count {
        UnderspecLabel::Sufficient
    } else {
        UnderspecLabel::MinorUnder
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub goal: Goal,
    pub sufficient: MaskedQuery,
    pub masked: MaskedQuery,
}

/// A generated corpus. Each record yields one sufficient and one masked query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub domain_hash: String,
    pub seed: u64,
    pub domain: IntentDomain,
    pub records: Vec<CorpusRecord>,
}

/// A query paired with the goal that produced it.
#[derive(Debug, Clone, Copy)]
pub struct QueryRef<'a> {
    pub goal: &'a Goal,
    pub query: &'a MaskedQuery,
}

impl Corpus {
    pub fn generate(domain: &IntentDomain, n: usize, seed: u64) -> Corpus {
        let records = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = derive(seed, &[i as u64]);
                let goal = domain.sample_goal(format!("{seed:016x}-{i:06}"), &mut rng);
                let sufficient = domain.sufficient_query(&goal);
                let masked = domain.mask(&goal, &mut rng);
                CorpusRecord {
                    goal,
                    sufficient,
                    masked,
                }
            })
            .collect();
        Corpus {
            domain_hash: domain.hash(),
            seed,
            domain: domain.clone(),
            records,
        }
    }

    /// Sufficient and masked queries, interleaved per record.
    pub fn queries(&self) -> Vec<QueryRef<'_>> {
        self.records
            .iter()
            .flat_map(|r| {
                [
                    QueryRef { goal: &r.goal, query: &r.sufficient },
                    QueryRef { goal: &r.goal, query: &r.masked },
                ]
            })
            .collect()
    }

    pub fn masked_queries(&self) -> Vec<QueryRef<'_>> {
        self.records
            .iter()
            .map(|r| QueryRef { goal: &r.goal, query: &r.masked })
            .collect()
    }

    pub fn goals(&self) -> impl Iterator<Item = &Goal> {
        self.records.iter().map(|r| &r.goal)
    }

    pub fn hash(&self) -> String {
        json_hash(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.domain.hash() != self.domain_hash {
            return Err(Error::HashMismatch {
                artifact: "corpus domain".into(),
                expected: self.domain_hash.clone(),
                found: self.domain.hash(),
            });
        }
        for r in &self.records {
            self.domain.validate_goal(&r.goal)?;
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_vec(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Corpus> {
        let corpus: Corpus = serde_json::from_slice(&std::fs::read(path)?)?;
        corpus.validate()?;
        Ok(corpus)
    }
}
