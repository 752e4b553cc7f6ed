//! Rule-based completion of missing cells.
//!
//! For a transaction `t` missing attribute `X`, the candidates are the
//! projected rules concluding on `X` whose premise contradicts no known value
//! of `t`. A single proposed value is used as is. When candidates disagree,
//! the value of the rule with the highest robustness wins:
//!
//! ```text
//! correspondance(R, t) = |premise items known in t| / n_attributes
//! robustesse(R, t)     = correspondance(R, t) × lift(R)
//! ```
//!
//! Ties fall back to higher lift, then higher correspondance, then the
//! lexicographically smallest premise.

use std::cmp::Ordering;
use std::io::Write;
use std::time::{Duration, Instant};

use num_traits::Zero;
use rayon::prelude::*;

use crate::basis::{format_decimal, ratio_to_f64, ProjectedRule, Ratio};
use crate::context::{IncompleteContext, ItemId, Itemset, RelationalTable, MISSING};
use crate::error::Result;

/// A transaction's cells as item ids, `None` where the value is missing.
pub type RowView<'a> = &'a [Option<ItemId>];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CompletionOptions {
    /// Let values filled earlier in a row count as known for the row's later
    /// attributes. Off by default: every attribute sees the original row.
    pub cascade: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    /// Index into the projected rule list.
    pub rule: usize,
    pub value: ItemId,
    pub correspondance: Ratio,
    pub lift: Ratio,
    pub robustesse: Ratio,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateSet {
    pub transaction: usize,
    pub attribute: usize,
    pub candidates: Vec<Candidate>,
    pub distinct_values: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FillDecision {
    pub transaction: usize,
    pub attribute: usize,
    /// `None` is silence: no candidate, the cell stays missing.
    pub value: Option<ItemId>,
    pub conflict: bool,
    pub distinct_values: usize,
    /// Index of the winning rule in the rule list handed to the engine.
    pub rule: Option<usize>,
    pub premise: Option<Itemset>,
    pub score: Option<f64>,
}

impl FillDecision {
    pub(crate) fn silence(transaction: usize, attribute: usize) -> Self {
        FillDecision {
            transaction,
            attribute,
            value: None,
            conflict: false,
            distinct_values: 0,
            rule: None,
            premise: None,
            score: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Completion {
    pub table: RelationalTable,
    /// One decision per originally missing cell, in (row, attribute) order.
    pub decisions: Vec<FillDecision>,
    pub elapsed: Duration,
}

impl Completion {
    pub fn conflicts(&self) -> usize {
        self.decisions.iter().filter(|d| d.conflict).count()
    }

    pub fn filled(&self) -> usize {
        self.decisions.iter().filter(|d| d.value.is_some()).count()
    }
}

/// No premise item names a value that differs from a known value of `row`.
pub fn is_consistent(ctx: &IncompleteContext, rule: &ProjectedRule, row: RowView, target: usize) -> bool {
    debug_assert_eq!(rule.attribute, target);
    rule.premise.iter().all(|id| match row[ctx.attribute_of(id)] {
        Some(known) => known == id,
        None => true,
    })
}

pub fn correspondance(ctx: &IncompleteContext, rule: &ProjectedRule, row: RowView, target: usize) -> Ratio {
    if !is_consistent(ctx, rule, row, target) {
        return Ratio::zero();
    }
    let known = rule
        .premise
        .iter()
        .filter(|&id| row[ctx.attribute_of(id)].is_some())
        .count() as u64;
    Ratio::new(known, ctx.n_attributes() as u64)
}

pub fn robustesse(ctx: &IncompleteContext, rule: &ProjectedRule, row: RowView, target: usize) -> Ratio {
    correspondance(ctx, rule, row, target) * rule.lift
}

/// Projected rule indices grouped by conclusion attribute.
pub fn rules_by_attribute(n_attributes: usize, rules: &[ProjectedRule]) -> Vec<Vec<usize>> {
    let mut by_attr = vec![Vec::new(); n_attributes];
    for (k, r) in rules.iter().enumerate() {
        by_attr[r.attribute].push(k);
    }
    by_attr
}

/// Consistent rules concluding on `target` for the given row.
pub fn candidate_set(
    ctx: &IncompleteContext,
    rules: &[ProjectedRule],
    concluding: &[usize],
    transaction: usize,
    row: RowView,
    target: usize,
) -> CandidateSet {
    let candidates: Vec<Candidate> = concluding
        .iter()
        .filter(|&&k| is_consistent(ctx, &rules[k], row, target))
        .map(|&k| {
            let rule = &rules[k];
            let correspondance = correspondance(ctx, rule, row, target);
            Candidate {
                rule: k,
                value: rule.conclusion,
                robustesse: correspondance * rule.lift,
                correspondance,
                lift: rule.lift,
            }
        })
        .collect();
    let mut values: Vec<ItemId> = candidates.iter().map(|c| c.value).collect();
    values.sort_unstable();
    values.dedup();
    CandidateSet {
        transaction,
        attribute: target,
        distinct_values: values.len(),
        candidates,
    }
}

/// Total order on candidates, best first.
fn rank(rules: &[ProjectedRule], a: &Candidate, b: &Candidate) -> Ordering {
    b.robustesse
        .cmp(&a.robustesse)
        .then_with(|| b.lift.cmp(&a.lift))
        .then_with(|| b.correspondance.cmp(&a.correspondance))
        .then_with(|| rules[a.rule].premise.cmp(&rules[b.rule].premise))
        .then_with(|| a.value.cmp(&b.value))
}

/// Picks the fill value for one candidate set.
pub fn decide(rules: &[ProjectedRule], set: &CandidateSet) -> FillDecision {
    let Some(best) = set.candidates.iter().min_by(|a, b| rank(rules, a, b)) else {
        return FillDecision::silence(set.transaction, set.attribute);
    };
    FillDecision {
        transaction: set.transaction,
        attribute: set.attribute,
        value: Some(best.value),
        conflict: set.distinct_values >= 2,
        distinct_values: set.distinct_values,
        rule: Some(best.rule),
        premise: Some(rules[best.rule].premise.clone()),
        score: Some(ratio_to_f64(best.robustesse)),
    }
}

fn complete_row(
    ctx: &IncompleteContext,
    rules: &[ProjectedRule],
    by_attr: &[Vec<usize>],
    t: usize,
    options: CompletionOptions,
) -> Vec<FillDecision> {
    let mut row = ctx.row(t).to_vec();
    let snapshot = row.clone();
    let mut out = Vec::new();
    for attr in ctx.missing_attributes(t).iter() {
        let view: RowView = if options.cascade { &row } else { &snapshot };
        let set = candidate_set(ctx, rules, &by_attr[attr], t, view, attr);
        let decision = decide(rules, &set);
        if options.cascade {
            row[attr] = decision.value;
        }
        out.push(decision);
    }
    out
}

/// Fills every missing cell of `ctx` it can; the rest stay missing.
pub fn complete(ctx: &IncompleteContext, rules: &[ProjectedRule], options: CompletionOptions) -> Completion {
    let start = Instant::now();
    let by_attr = rules_by_attribute(ctx.n_attributes(), rules);
    let decisions: Vec<FillDecision> = (0..ctx.n_transactions())
        .into_par_iter()
        .filter(|&t| !ctx.missing_attributes(t).is_empty())
        .flat_map_iter(|t| complete_row(ctx, rules, &by_attr, t, options))
        .collect();
    let elapsed = start.elapsed();
    Completion {
        table: apply_decisions(ctx, &decisions),
        decisions,
        elapsed,
    }
}

pub(crate) fn apply_decisions(ctx: &IncompleteContext, decisions: &[FillDecision]) -> RelationalTable {
    let mut table = ctx.decode();
    for d in decisions {
        if let Some(id) = d.value {
            debug_assert!(table.cell(d.transaction, d.attribute).is_none());
            table.set_cell(d.transaction, d.attribute, Some(ctx.item(id).value));
        }
    }
    table
}

/// Writes `row;attribute;value;conflict;rule;robustesse`, rows numbered from 1.
pub fn write_decisions_csv<W: Write>(
    ctx: &IncompleteContext,
    decisions: &[FillDecision],
    mut out: W,
) -> Result<()> {
    writeln!(out, "row;attribute;value;conflict;rule;robustesse")?;
    for d in decisions {
        let attr = &ctx.schema()[d.attribute];
        let value = d
            .value
            .map_or(MISSING, |id| attr.domain[ctx.item(id).value as usize].as_str());
        let rule = match (&d.premise, d.value) {
            (Some(p), Some(v)) => format!("{}->{}", ctx.itemset_label(p), ctx.item_label(v)),
            _ => String::new(),
        };
        let score = d.score.map(format_decimal).unwrap_or_default();
        writeln!(
            out,
            "{};{};{};{};{};{}",
            d.transaction + 1,
            attr.name,
            value,
            d.conflict,
            rule,
            score
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Number of conflicting decisions recorded in a decisions file.
pub fn count_conflicts_in_csv(text: &str) -> Result<usize> {
    let mut conflicts = 0;
    for (n, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        match line.split(';').nth(3) {
            Some("true") => conflicts += 1,
            Some("false") => {}
            _ => {
                return Err(crate::Error::Parse {
                    line: n as u64 + 1,
                    message: "conflict column must be `true` or `false`".into(),
                })
            }
        }
    }
    Ok(conflicts)
}
