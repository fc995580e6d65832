//! Synthetic item universe and the oracle recommender.
//!
//! The oracle is greedy on the number of revealed constraints an item
//! satisfies and uniform among ties; it never sees masked attributes.

use std::path::Path;

use indexmap::IndexMap;
use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::corpus::{Assignment, Goal, IntentDomain};
use crate::error::{Error, Result};
use crate::hash::json_hash;
use crate::rng::{seeded, SimRng};

pub type ItemId = u32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    pub values: Assignment,
}

impl Item {
    pub fn title(&self) -> String {
        format!("Item #{:04}", self.id)
    }
}

/// `true` iff the item's value set for `category` intersects `selected`.
pub fn satisfies(item: &Item, category: &str, selected: &[String]) -> Result<bool> {
    let values = item
        .values
        .get(category)
        .ok_or_else(|| Error::UnknownCategory(category.to_owned()))?;
    Ok(values.iter().any(|v| selected.contains(v)))
}

/// Fraction of the goal's constraints the item satisfies.
pub fn item_utility(item: &Item, goal: &Goal) -> Result<f64> {
    if item.values.len() != goal.assignments.len() {
        return Err(Error::DomainMismatch {
            expected: format!("{} attributes", goal.assignments.len()),
            found: format!("{} attributes", item.values.len()),
        });
    }
    let mut hit = 0usize;
    for (category, selected) in &goal.assignments {
        if satisfies(item, category, selected).map_err(|_| Error::DomainMismatch {
            expected: goal.intent.clone(),
            found: format!("item {} without {category:?}", item.id),
        })? {
            hit += 1;
        }
    }
    Ok(hit as f64 / goal.assignments.len() as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CatalogFile {
    domain_hash: String,
    seed: u64,
    items: Vec<Item>,
}

#[derive(Debug, Clone)]
pub struct Catalog {
    domain: IntentDomain,
    domain_hash: String,
    seed: u64,
    items: Vec<Item>,
    /// `postings[attr][option]` lists positions in `items` carrying that option.
    postings: Vec<Vec<Vec<u32>>>,
}

impl Catalog {
    /// Samples `size` items independently, each attribute drawn the same way
    /// as a goal's.
    pub fn generate(domain: &IntentDomain, size: usize, seed: u64) -> Result<Catalog> {
        if size == 0 {
            return Err(Error::OutOfRange("catalog size must be at least 1".into()));
        }
        let mut rng = seeded(seed);
        let items = (0..size)
            .map(|i| Item {
                id: i as ItemId,
                values: domain.sample_assignment(&mut rng),
            })
            .collect();
        Catalog::from_items(domain, seed, items)
    }

    pub fn from_items(domain: &IntentDomain, seed: u64, items: Vec<Item>) -> Result<Catalog> {
        let mut ids = std::collections::HashSet::new();
        for item in &items {
            if !ids.insert(item.id) {
                return Err(Error::OutOfRange(format!("duplicate item id {}", item.id)));
            }
            domain.validate_assignment(&item.values, true)?;
        }
        let mut catalog = Catalog {
            domain: domain.clone(),
            domain_hash: domain.hash(),
            seed,
            items,
            postings: Vec::new(),
        };
        catalog.reindex();
        Ok(catalog)
    }

    fn reindex(&mut self) {
        let mut postings: Vec<Vec<Vec<u32>>> = self
            .domain
            .attributes
            .iter()
            .map(|a| vec![Vec::new(); a.options.len()])
            .collect();
        for (pos, item) in self.items.iter().enumerate() {
            for (a, attr) in self.domain.attributes.iter().enumerate() {
                for v in &item.values[&attr.category] {
                    let o = attr.option_index(v).expect("validated on insert");
                    postings[a][o].push(pos as u32);
                }
            }
        }
        self.postings = postings;
    }

    /// Appends a copy of every goal that no existing item satisfies in full,
    /// so the utility ceiling of 1.0 is reachable for each goal.
    pub fn inject_exact_matches<'a>(&mut self, goals: impl IntoIterator<Item = &'a Goal>) -> Result<usize> {
        let mut added = 0;
        for goal in goals {
            self.domain.validate_goal(goal)?;
            let full = self.constraint_masks(&goal.assignments)?;
            let scores = self.scores(&full);
            if scores.iter().any(|&s| s as usize == self.domain.len()) {
                continue;
            }
            let id = self.items.iter().map(|i| i.id).max().map_or(0, |m| m + 1);
            let pos = self.items.len() as u32;
            for (a, attr) in self.domain.attributes.iter().enumerate() {
                for v in &goal.assignments[&attr.category] {
                    let o = attr.option_index(v).expect("goal validated");
                    self.postings[a][o].push(pos);
                }
            }
            self.items.push(Item {
                id,
                values: goal.assignments.clone(),
            });
            added += 1;
        }
        Ok(added)
    }

    pub fn domain(&self) -> &IntentDomain {
        &self.domain
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn item(&self, id: ItemId) -> Option<&Item> {
        // Ids are dense positions unless the catalog was built from custom items.
        match self.items.get(id as usize) {
            Some(item) if item.id == id => Some(item),
            _ => self.items.iter().find(|i| i.id == id),
        }
    }

    pub fn posting(&self, category: &str, option: &str) -> Result<&[u32]> {
        let a = self
            .domain
            .attribute_index(category)
            .ok_or_else(|| Error::UnknownCategory(category.to_owned()))?;
        let o = self.domain.attributes[a]
            .option_index(option)
            .ok_or_else(|| Error::OutOfRange(format!("{category}: unknown option {option:?}")))?;
        Ok(&self.postings[a][o])
    }

    fn constraint_masks(&self, constraints: &Assignment) -> Result<Vec<(usize, Vec<usize>)>> {
        constraints
            .iter()
            .map(|(category, selected)| {
                let a = self
                    .domain
                    .attribute_index(category)
                    .ok_or_else(|| Error::UnknownCategory(category.clone()))?;
                let attr = &self.domain.attributes[a];
                let opts = selected
                    .iter()
                    .map(|s| {
                        attr.option_index(s).ok_or_else(|| {
                            Error::OutOfRange(format!("{category}: unknown option {s:?}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((a, opts))
            })
            .collect()
    }

    /// Number of constraints each item satisfies, via the postings index.
    fn scores(&self, constraints: &[(usize, Vec<usize>)]) -> Vec<u8> {
        let mut scores = vec![0u8; self.items.len()];
        let mut seen = vec![u32::MAX; self.items.len()];
        for (round, (a, opts)) in constraints.iter().enumerate() {
            for &o in opts {
                for &pos in &self.postings[*a][o] {
                    let p = pos as usize;
                    if seen[p] != round as u32 {
                        seen[p] = round as u32;
                        scores[p] += 1;
                    }
                }
            }
        }
        scores
    }

    pub fn hash(&self) -> String {
        json_hash(&self.file_view())
    }

    fn file_view(&self) -> CatalogFile {
        CatalogFile {
            domain_hash: self.domain_hash.clone(),
            seed: self.seed,
            items: self.items.clone(),
        }
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(&self.file_view())?)
    }

    pub fn from_json(domain: &IntentDomain, bytes: &[u8]) -> Result<Catalog> {
        let file: CatalogFile = serde_json::from_slice(bytes)?;
        if file.domain_hash != domain.hash() {
            return Err(Error::HashMismatch {
                artifact: "catalog domain".into(),
                expected: domain.hash(),
                found: file.domain_hash,
            });
        }
        Catalog::from_items(domain, file.seed, file.items)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(domain: &IntentDomain, path: &Path) -> Result<Catalog> {
        Catalog::from_json(domain, &std::fs::read(path)?)
    }
}

/// Returns up to `m` items ranked by how many revealed constraints they
/// satisfy. Within a score level the order is a seeded uniform shuffle.
pub fn oracle_recommend<'c>(
    catalog: &'c Catalog,
    revealed: &Assignment,
    m: usize,
    rng: &mut SimRng,
) -> Result<Vec<&'c Item>> {
    if catalog.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let m = m.min(catalog.len());
    let constraints = catalog.constraint_masks(revealed)?;
    let scores = catalog.scores(&constraints);

    let mut levels: IndexMap<u8, Vec<usize>> = IndexMap::new();
    for s in (0..=constraints.len() as u8).rev() {
        levels.insert(s, Vec::new());
    }
    for (pos, &s) in scores.iter().enumerate() {
        levels[&s].push(pos);
    }

    let mut out = Vec::with_capacity(m);
    for (_, mut positions) in levels {
        let need = m - out.len();
        if need == 0 {
            break;
        }
        if positions.len() <= need {
            positions.shuffle(rng);
            out.extend(positions);
        } else {
            out.extend(index::sample(rng, positions.len(), need).into_iter().map(|i| positions[i]));
        }
    }
    Ok(out.into_iter().map(|p| &catalog.items[p]).collect())
}
