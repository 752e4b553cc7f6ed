//! Levelwise extraction of frequent minimal generators and their pseudo-closures.
//!
//! A candidate `g` of size `k` is a minimal generator iff no item `x ∈ g` lies
//! in the pseudo-closure of `g − {x}`. Generators are anti-monotone, so level
//! `k + 1` candidates are joins of level-`k` generators whose every `k`-subset
//! was itself retained.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::bitset::BitSet;
use crate::closure::pseudo_close_tids;
use crate::context::{IncompleteContext, ItemId, Itemset};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneratorEntry {
    pub generator: Itemset,
    pub support: u64,
    pub closure: Itemset,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MiningStats {
    /// Candidates evaluated per level (after the join and subset checks).
    pub candidates_per_level: Vec<usize>,
    pub retained_per_level: Vec<usize>,
    pub generators_found: usize,
    pub max_level: usize,
    pub elapsed: Duration,
}

/// A support threshold, either absolute or a percentage of the transactions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Minsup {
    Absolute(u64),
    Percent(f64),
}

impl Minsup {
    /// Absolute count; percentages round up so the threshold is never undercut.
    pub fn to_absolute(self, n_transactions: usize) -> Result<u64> {
        match self {
            Minsup::Absolute(0) => Err(Error::InvalidMinsup(0)),
            Minsup::Absolute(n) => Ok(n),
            Minsup::Percent(p) if !(p > 0.0 && p <= 100.0) => Err(Error::InvalidThreshold(format!(
                "minsup percentage must be in (0, 100], got {p}"
            ))),
            Minsup::Percent(p) => {
                let exact = p * n_transactions as f64 / 100.0;
                Ok(((exact - 1e-9).ceil() as u64).max(1))
            }
        }
    }
}

impl std::str::FromStr for Minsup {
    type Err = Error;

    /// `12` is absolute, `10%` is relative.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(p) = s.strip_suffix('%') {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidThreshold(format!("bad minsup `{s}`")))?;
            if !(p > 0.0 && p <= 100.0) {
                return Err(Error::InvalidThreshold(format!(
                    "minsup percentage must be in (0, 100], got `{s}`"
                )));
            }
            Ok(Minsup::Percent(p))
        } else {
            let n: u64 = s
                .parse()
                .map_err(|_| Error::InvalidThreshold(format!("bad minsup `{s}`")))?;
            if n == 0 {
                return Err(Error::InvalidMinsup(0));
            }
            Ok(Minsup::Absolute(n))
        }
    }
}

struct Node {
    itemset: Itemset,
    tids: BitSet,
    support: u64,
    closure: Itemset,
    closure_bits: BitSet,
}

impl Node {
    fn entry(&self) -> GeneratorEntry {
        GeneratorEntry {
            generator: self.itemset.clone(),
            support: self.support,
            closure: self.closure.clone(),
        }
    }
}

fn close_node(ctx: &IncompleteContext, itemset: Itemset, tids: BitSet) -> Node {
    let closure = pseudo_close_tids(ctx, &itemset, &tids);
    let mut closure_bits = BitSet::new(ctx.n_items());
    for id in closure.iter() {
        closure_bits.insert(id as usize);
    }
    Node {
        support: tids.count() as u64,
        itemset,
        tids,
        closure,
        closure_bits,
    }
}

pub fn mine_generators(ctx: &IncompleteContext, minsup: u64) -> Result<Vec<GeneratorEntry>> {
    mine_generators_with_stats(ctx, minsup).map(|(entries, _)| entries)
}

/// Mines every frequent minimal generator, ordered by size then item ids.
pub fn mine_generators_with_stats(
    ctx: &IncompleteContext,
    minsup: u64,
) -> Result<(Vec<GeneratorEntry>, MiningStats)> {
    if minsup < 1 {
        return Err(Error::InvalidMinsup(minsup));
    }
    let start = Instant::now();
    let mut stats = MiningStats::default();
    let mut entries = Vec::new();

    // The empty set seeds level 1; it is never emitted.
    let root = close_node(ctx, Itemset::empty(), BitSet::full(ctx.n_transactions()));
    let singles: Vec<ItemId> = (0..ctx.n_items() as ItemId).collect();
    stats.candidates_per_level.push(singles.len());
    let mut level: Vec<Node> = singles
        .into_par_iter()
        .filter_map(|id| {
            let tids = ctx.item_tidset(id).clone();
            if (tids.count() as u64) < minsup || root.closure_bits.contains(id as usize) {
                return None;
            }
            Some(close_node(ctx, Itemset::from_sorted(vec![id]), tids))
        })
        .collect();

    while !level.is_empty() {
        stats.retained_per_level.push(level.len());
        stats.max_level += 1;
        entries.extend(level.iter().map(Node::entry));

        let index: FxHashMap<&[ItemId], usize> = level
            .iter()
            .enumerate()
            .map(|(pos, node)| (node.itemset.items(), pos))
            .collect();
        let pairs = join_candidates(ctx, &level, &index);
        stats.candidates_per_level.push(pairs.len());

        let next: Vec<Node> = pairs
            .into_par_iter()
            .filter_map(|(a, b)| {
                let left = &level[a];
                let last = *level[b].itemset.items().last().expect("non-empty");
                let tids = left.tids.intersection(ctx.item_tidset(last));
                if (tids.count() as u64) < minsup {
                    return None;
                }
                let candidate = left.itemset.with(last);
                let minimal = candidate.iter().all(|x| {
                    let subset = candidate.without(x);
                    let parent = &level[index[subset.items()]];
                    !parent.closure_bits.contains(x as usize)
                });
                minimal.then(|| close_node(ctx, candidate, tids))
            })
            .collect();
        level = next;
    }
    if stats.candidates_per_level.last() == Some(&0) {
        stats.candidates_per_level.pop();
    }
    stats.generators_found = entries.len();
    stats.elapsed = start.elapsed();
    Ok((entries, stats))
}

/// Prefix join over a sorted level: pairs `(a, b)` sharing all but their last
/// item, on distinct attributes, whose union has every sub-itemset retained.
fn join_candidates(
    ctx: &IncompleteContext,
    level: &[Node],
    index: &FxHashMap<&[ItemId], usize>,
) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut run_start = 0;
    while run_start < level.len() {
        let items = level[run_start].itemset.items();
        let prefix = &items[..items.len() - 1];
        let mut run_end = run_start + 1;
        while run_end < level.len() && level[run_end].itemset.items().starts_with(prefix) {
            run_end += 1;
        }
        for a in run_start..run_end {
            let last_a = *level[a].itemset.items().last().unwrap();
            for b in a + 1..run_end {
                let last_b = *level[b].itemset.items().last().unwrap();
                if ctx.attribute_of(last_a) == ctx.attribute_of(last_b) {
                    continue;
                }
                let mut candidate = level[a].itemset.items().to_vec();
                candidate.push(last_b);
                let all_subsets_retained = (0..prefix.len()).all(|skip| {
                    let subset: Vec<ItemId> = candidate
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != skip)
                        .map(|(_, &id)| id)
                        .collect();
                    index.contains_key(subset.as_slice())
                });
                if all_subsets_retained {
                    pairs.push((a, b));
                }
            }
        }
        run_start = run_end;
    }
    pairs
}

/// Writes `generator;support;closure` rows with `attr=value` items.
pub fn write_generators_csv<W: Write>(
    ctx: &IncompleteContext,
    entries: &[GeneratorEntry],
    mut out: W,
) -> Result<()> {
    writeln!(out, "generator;support;closure")?;
    for e in entries {
        writeln!(
            out,
            "{};{};{}",
            ctx.itemset_label(&e.generator),
            e.support,
            ctx.itemset_label(&e.closure)
        )?;
    }
    out.flush()?;
    Ok(())
}
