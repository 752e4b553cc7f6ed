//! Apriori-based completion scored with `Score`.
//!
//! Frequent itemsets are mined with missing cells contributing no item. Rules
//! have a single-item conclusion. Each missing cell scans every rule that
//! concludes on its attribute, computing
//!
//! ```text
//! appl(R)  = I(R) · Σ_{premise items} (0.5 if the attribute is missing in t, else 1)
//! Score(R) = appl(R) / w · lift(R)^(w / n)
//! ```
//!
//! with `w` the premise size, `n` the number of attributes, and `I(R) = 0` when
//! a premise item contradicts a known value. A rule replaces the cell's value
//! whenever it beats the best score so far; filled values are visible to the
//! row's later attributes.

use std::time::Instant;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::basis::{ratio_to_f64, Ratio};
use crate::bitset::BitSet;
use crate::completion::{apply_decisions, Completion, FillDecision};
use crate::context::{IncompleteContext, ItemId, Itemset};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoredRule {
    pub premise: Itemset,
    pub conclusion: ItemId,
    pub attribute: usize,
    pub support: u64,
    pub confidence: Ratio,
    pub lift: Ratio,
}

/// Frequent itemsets by level, with an exact-support lookup.
#[derive(Debug, Default)]
pub struct FrequentItemsets {
    pub levels: Vec<Vec<(Itemset, u64)>>,
    supports: FxHashMap<Itemset, u64>,
}

impl FrequentItemsets {
    pub fn support(&self, x: &Itemset) -> Option<u64> {
        self.supports.get(x).copied()
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Itemset, u64)> {
        self.levels.iter().flatten()
    }
}

/// Every itemset with support `>= minsup`, no two items on one attribute.
pub fn apriori(ctx: &IncompleteContext, minsup: u64) -> Result<FrequentItemsets> {
    if minsup < 1 {
        return Err(Error::InvalidMinsup(minsup));
    }
    let mut result = FrequentItemsets::default();
    let mut level: Vec<(Itemset, BitSet)> = (0..ctx.n_items() as ItemId)
        .filter(|&id| ctx.item_tidset(id).count() as u64 >= minsup)
        .map(|id| (Itemset::from_sorted(vec![id]), ctx.item_tidset(id).clone()))
        .collect();

    while !level.is_empty() {
        let supports: Vec<(Itemset, u64)> = level
            .iter()
            .map(|(x, tids)| (x.clone(), tids.count() as u64))
            .collect();
        result.supports.extend(supports.iter().cloned());
        result.levels.push(supports);

        let mut pairs = Vec::new();
        let mut run_start = 0;
        while run_start < level.len() {
            let items = level[run_start].0.items();
            let prefix = &items[..items.len() - 1];
            let mut run_end = run_start + 1;
            while run_end < level.len() && level[run_end].0.items().starts_with(prefix) {
                run_end += 1;
            }
            for a in run_start..run_end {
                for b in a + 1..run_end {
                    pairs.push((a, b));
                }
            }
            run_start = run_end;
        }
        let current = &result.supports;
        level = pairs
            .into_par_iter()
            .filter_map(|(a, b)| {
                let last = *level[b].0.items().last().unwrap();
                let last_a = *level[a].0.items().last().unwrap();
                if ctx.attribute_of(last) == ctx.attribute_of(last_a) {
                    return None;
                }
                let candidate = level[a].0.with(last);
                let k = candidate.len();
                if k > 2 && !(0..k - 2).all(|skip| current.contains_key(&candidate.without(candidate.items()[skip]))) {
                    return None;
                }
                let tids = level[a].1.intersection(ctx.item_tidset(last));
                (tids.count() as u64 >= minsup).then_some((candidate, tids))
            })
            .collect();
    }
    Ok(result)
}

/// Rules `Z − {i} ⇒ i` with confidence `>= minconf`; empty premises are skipped.
pub fn derive_rules(frequents: &FrequentItemsets, ctx: &IncompleteContext, minconf: f64) -> Vec<ScoredRule> {
    let n = ctx.n_transactions() as u64;
    let levels: Vec<&Vec<(Itemset, u64)>> = frequents.levels.iter().skip(1).collect();
    levels
        .into_par_iter()
        .flat_map_iter(|level| level.iter())
        .flat_map_iter(|(z, support)| {
            z.iter()
                .filter_map(|item| {
                    let premise = z.without(item);
                    let premise_support = frequents
                        .support(&premise)
                        .expect("subsets of frequent itemsets are frequent");
                    let confidence = *support as f64 / premise_support as f64;
                    if confidence < minconf - 1e-12 {
                        return None;
                    }
                    let item_support = ctx.item_tidset(item).count() as u64;
                    Some(ScoredRule {
                        attribute: ctx.attribute_of(item),
                        conclusion: item,
                        support: *support,
                        confidence: Ratio::new(*support, premise_support),
                        lift: Ratio::new(support * n, premise_support * item_support),
                        premise,
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `Score` of a rule against a row; zero when a premise item contradicts it.
pub fn score(ctx: &IncompleteContext, rule: &ScoredRule, row: &[Option<ItemId>], n_attributes: usize) -> f64 {
    let w = rule.premise.len();
    if w == 0 {
        return 0.0;
    }
    let mut appl = 0.0;
    for id in rule.premise.iter() {
        match row[ctx.attribute_of(id)] {
            None => appl += 0.5,
            Some(known) if known == id => appl += 1.0,
            Some(_) => return 0.0,
        }
    }
    appl / w as f64 * ratio_to_f64(rule.lift).powf(w as f64 / n_attributes as f64)
}

fn complete_row(ctx: &IncompleteContext, rules: &[ScoredRule], by_attr: &[Vec<usize>], t: usize) -> Vec<FillDecision> {
    let mut row = ctx.row(t).to_vec();
    let n = ctx.n_attributes();
    let mut out = Vec::new();
    for attr in ctx.missing_attributes(t).iter() {
        let mut best = 0.0;
        let mut winner: Option<usize> = None;
        let mut proposed: Vec<ItemId> = Vec::new();
        for &k in &by_attr[attr] {
            let s = score(ctx, &rules[k], &row, n);
            if s > 0.0 {
                proposed.push(rules[k].conclusion);
            }
            if s > best {
                best = s;
                winner = Some(k);
            }
        }
        proposed.sort_unstable();
        proposed.dedup();
        let decision = match winner {
            None => FillDecision::silence(t, attr),
            Some(k) => FillDecision {
                transaction: t,
                attribute: attr,
                value: Some(rules[k].conclusion),
                conflict: proposed.len() >= 2,
                distinct_values: proposed.len(),
                rule: Some(k),
                premise: Some(rules[k].premise.clone()),
                score: Some(best),
            },
        };
        row[attr] = decision.value;
        out.push(decision);
    }
    out
}

pub fn complete_armvc(ctx: &IncompleteContext, rules: &[ScoredRule]) -> Completion {
    let start = Instant::now();
    let mut by_attr = vec![Vec::new(); ctx.n_attributes()];
    for (k, r) in rules.iter().enumerate() {
        by_attr[r.attribute].push(k);
    }
    let decisions: Vec<FillDecision> = (0..ctx.n_transactions())
        .into_par_iter()
        .filter(|&t| !ctx.missing_attributes(t).is_empty())
        .flat_map_iter(|t| complete_row(ctx, rules, &by_attr, t))
        .collect();
    let elapsed = start.elapsed();
    Completion {
        table: apply_decisions(ctx, &decisions),
        decisions,
        elapsed,
    }
}

/// Converts generic rules (as read from a rules file) to single-conclusion
/// scored rules, recomputing metrics on `ctx`.
pub fn scored_from_parts(ctx: &IncompleteContext, premise: Itemset, conclusion: ItemId) -> Result<ScoredRule> {
    let premise_support = ctx.support(&premise);
    if premise_support == 0 {
        return Err(Error::ZeroSupport(ctx.itemset_label(&premise)));
    }
    let item_support = ctx.item_tidset(conclusion).count() as u64;
    let support = ctx.support(&premise.with(conclusion));
    Ok(ScoredRule {
        attribute: ctx.attribute_of(conclusion),
        conclusion,
        support,
        confidence: Ratio::new(support, premise_support),
        lift: Ratio::new(support * ctx.n_transactions() as u64, premise_support * item_support),
        premise,
    })
}
