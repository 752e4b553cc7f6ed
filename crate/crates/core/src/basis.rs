//! Generic basis of pseudo-exact rules and its single-item projection.
//!
//! Every mined generator `g` with closure `c ≠ g` yields `g ⇒ c − g`. Supports
//! are pessimistic, so a pseudo-exact rule may have confidence below one.
//! Completion works on projected rules `premise ⇒ item`, one per conclusion
//! item, each with its own lift.

use std::io::{BufRead, Write};

use num_traits::{ToPrimitive, Zero};
use rustc_hash::FxHashMap;

use crate::context::{IncompleteContext, ItemId, Itemset};
use crate::error::{Error, Result};
use crate::miner::GeneratorEntry;

pub type Ratio = num_rational::Ratio<u64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub premise: Itemset,
    pub conclusion: Itemset,
    /// Support of `premise ∪ conclusion`.
    pub support: u64,
    pub premise_support: u64,
    pub confidence: Ratio,
    pub lift: Ratio,
}

impl Rule {
    /// Builds a rule and computes its metrics on `ctx`.
    pub fn new(ctx: &IncompleteContext, premise: Itemset, conclusion: Itemset) -> Result<Rule> {
        if conclusion.is_empty() {
            return Err(Error::InvalidThreshold("rule conclusion must not be empty".into()));
        }
        if conclusion.iter().any(|i| premise.contains(i)) {
            return Err(Error::InvalidThreshold(format!(
                "premise {} and conclusion {} overlap",
                ctx.itemset_label(&premise),
                ctx.itemset_label(&conclusion)
            )));
        }
        let premise_support = ctx.support(&premise);
        if premise_support == 0 {
            return Err(Error::ZeroSupport(ctx.itemset_label(&premise)));
        }
        let support = ctx.support(&premise.union(&conclusion));
        let lift = if support == 0 {
            Ratio::zero()
        } else {
            lift(ctx, &premise, &conclusion)?
        };
        Ok(Rule {
            confidence: Ratio::new(support, premise_support),
            premise,
            conclusion,
            support,
            premise_support,
            lift,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectedRule {
    pub premise: Itemset,
    pub conclusion: ItemId,
    /// Attribute of `conclusion`.
    pub attribute: usize,
    /// Lift of `premise ⇒ conclusion` alone.
    pub lift: Ratio,
    /// Indices of the basis rules this projection came from.
    pub sources: Vec<usize>,
}

/// `supp(XY)·N / (supp(X)·supp(Y))`, i.e. lift over relative supports.
pub fn lift(ctx: &IncompleteContext, premise: &Itemset, conclusion: &Itemset) -> Result<Ratio> {
    let sx = ctx.support(premise);
    if sx == 0 {
        return Err(Error::ZeroSupport(ctx.itemset_label(premise)));
    }
    let sy = ctx.support(conclusion);
    if sy == 0 {
        return Err(Error::ZeroSupport(ctx.itemset_label(conclusion)));
    }
    let sxy = ctx.support(&premise.union(conclusion));
    Ok(Ratio::new(sxy * ctx.n_transactions() as u64, sx * sy))
}

/// One rule `g ⇒ c − g` per entry whose closure strictly extends its generator.
pub fn build_basis(entries: &[GeneratorEntry], ctx: &IncompleteContext) -> Vec<Rule> {
    entries
        .iter()
        .filter(|e| e.closure != e.generator)
        .map(|e| {
            Rule::new(ctx, e.generator.clone(), e.closure.difference(&e.generator))
                .expect("mined generators have positive support")
        })
        .collect()
}

/// Splits each rule into single-item conclusions, merging duplicates.
pub fn project(rules: &[Rule], ctx: &IncompleteContext) -> Vec<ProjectedRule> {
    let mut out: Vec<ProjectedRule> = Vec::new();
    let mut seen: FxHashMap<(Itemset, ItemId), usize> = FxHashMap::default();
    for (source, rule) in rules.iter().enumerate() {
        for item in rule.conclusion.iter() {
            if let Some(&pos) = seen.get(&(rule.premise.clone(), item)) {
                out[pos].sources.push(source);
                continue;
            }
            let single = Itemset::from_sorted(vec![item]);
            // A projected rule always has support >= 1 when it comes from a mined
            // closure; rules read from files may not, and then their lift is 0.
            let lift = lift(ctx, &rule.premise, &single).unwrap_or_else(|_| Ratio::zero());
            seen.insert((rule.premise.clone(), item), out.len());
            out.push(ProjectedRule {
                premise: rule.premise.clone(),
                conclusion: item,
                attribute: ctx.attribute_of(item),
                lift,
                sources: vec![source],
            });
        }
    }
    out
}

/// Largest premise among the rules.
pub fn max_premise_len<'a>(premises: impl IntoIterator<Item = &'a Itemset>) -> usize {
    premises.into_iter().map(Itemset::len).max().unwrap_or(0)
}

pub fn ratio_to_f64(r: Ratio) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Four-decimal rendering used by every text output.
pub fn format_decimal(value: f64) -> String {
    format!("{value:.4}")
}

/// Writes `premise;conclusion;support;confidence;lift`.
pub fn write_rules_csv<W: Write>(ctx: &IncompleteContext, rules: &[Rule], mut out: W) -> Result<()> {
    writeln!(out, "premise;conclusion;support;confidence;lift")?;
    for r in rules {
        writeln!(
            out,
            "{};{};{};{};{}",
            ctx.itemset_label(&r.premise),
            ctx.itemset_label(&r.conclusion),
            r.support,
            format_decimal(ratio_to_f64(r.confidence)),
            format_decimal(ratio_to_f64(r.lift)),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads rules written by [`write_rules_csv`]. Only the premise and conclusion
/// columns are used; metrics are recomputed exactly on `ctx`.
pub fn read_rules_csv<R: BufRead>(ctx: &IncompleteContext, input: R) -> Result<Vec<Rule>> {
    let mut rules = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let lineno = n as u64 + 1;
        if n == 0 {
            if !line.starts_with("premise;conclusion") {
                return Err(Error::Parse {
                    line: 1,
                    message: "expected header `premise;conclusion;support;confidence;lift`".into(),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(';').collect();
        if fields.len() < 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected at least 2 fields, got {}", fields.len()),
            });
        }
        let parse = |text: &str| {
            ctx.parse_itemset(text).map_err(|e| Error::Parse {
                line: lineno,
                message: e.to_string(),
            })
        };
        let premise = parse(fields[0])?;
        let conclusion = parse(fields[1])?;
        rules.push(Rule::new(ctx, premise, conclusion).map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?);
    }
    Ok(rules)
}
