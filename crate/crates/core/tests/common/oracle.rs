//! Brute-force reference implementations working on raw table rows.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use mvc_core::{GeneratorEntry, IncompleteContext, RelationalTable};

/// Sorted `(attribute, value index)` pairs, at most one per attribute.
pub type Pattern = Vec<(usize, u32)>;

pub struct Oracle {
    rows: Vec<Vec<Option<u32>>>,
    domains: Vec<u32>,
}

/// Exact non-negative fraction.
#[derive(Clone, Copy, Debug)]
pub struct Frac(pub u128, pub u128);

impl PartialEq for Frac {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Frac {}
impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Frac {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.0 * other.1).cmp(&(other.0 * self.1))
    }
}

impl Frac {
    fn mul(self, o: Frac) -> Frac {
        Frac(self.0 * o.0, self.1 * o.1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleDecision {
    pub row: usize,
    pub attribute: usize,
    pub value: Option<u32>,
    pub conflict: bool,
}

impl Oracle {
    pub fn new(table: &RelationalTable) -> Self {
        Oracle {
            rows: table.rows().to_vec(),
            domains: table.schema().iter().map(|a| a.domain.len() as u32).collect(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn contains(row: &[Option<u32>], p: &Pattern) -> bool {
        p.iter().all(|&(a, v)| row[a] == Some(v))
    }

    pub fn support(&self, p: &Pattern) -> u64 {
        self.rows.iter().filter(|r| Self::contains(r, p)).count() as u64
    }

    fn with(p: &Pattern, item: (usize, u32)) -> Pattern {
        let mut q = p.clone();
        q.push(item);
        q.sort_unstable();
        q
    }

    /// Every pattern, the empty one included.
    pub fn all_patterns(&self) -> Vec<Pattern> {
        let mut out: Vec<Pattern> = vec![Vec::new()];
        for (a, &n) in self.domains.iter().enumerate() {
            let mut next = out.clone();
            for p in &out {
                for v in 0..n {
                    next.push(Self::with(p, (a, v)));
                }
            }
            out = next;
        }
        out.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
        out
    }

    fn items(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.domains
            .iter()
            .enumerate()
            .flat_map(|(a, &n)| (0..n).map(move |v| (a, v)))
    }

    /// Items common to all rows containing `p`; `None` when `p` has support 0.
    pub fn galois(&self, p: &Pattern) -> Option<Pattern> {
        let rows: Vec<&Vec<Option<u32>>> = self.rows.iter().filter(|r| Self::contains(r, p)).collect();
        if rows.is_empty() {
            return None;
        }
        Some(
            self.items()
                .filter(|&(a, v)| rows.iter().all(|r| r[a] == Some(v)))
                .collect(),
        )
    }

    /// Adds `(a, v)` for unbound `a` when every certain row of `p` either holds
    /// `v` or is missing `a`, and at least one holds `v`.
    pub fn pseudo(&self, p: &Pattern) -> Pattern {
        let rows: Vec<&Vec<Option<u32>>> = self.rows.iter().filter(|r| Self::contains(r, p)).collect();
        let mut out = p.clone();
        for (a, v) in self.items() {
            if p.iter().any(|&(b, _)| b == a) {
                continue;
            }
            let holds = rows.iter().filter(|r| r[a] == Some(v)).count();
            let missing = rows.iter().filter(|r| r[a].is_none()).count();
            if holds >= 1 && holds + missing == rows.len() {
                out.push((a, v));
            }
        }
        out.sort_unstable();
        out
    }

    fn proper_subsets(p: &Pattern) -> impl Iterator<Item = Pattern> + '_ {
        let n = p.len();
        (0u32..(1 << n) - 1).map(move |mask| {
            (0..n)
                .filter(|&k| mask & (1 << k) != 0)
                .map(|k| p[k])
                .collect()
        })
    }

    /// Frequent minimal generators of a complete context: non-empty itemsets
    /// whose closure differs from that of each proper subset.
    pub fn generators_by_closure(&self, minsup: u64) -> BTreeSet<(Pattern, Pattern)> {
        let mut out = BTreeSet::new();
        for g in self.all_patterns() {
            if g.is_empty() || self.support(&g) < minsup {
                continue;
            }
            let closure = self.galois(&g).unwrap();
            if Self::proper_subsets(&g).all(|s| self.galois(&s).as_ref() != Some(&closure)) {
                out.insert((g, closure));
            }
        }
        out
    }

    /// Frequent generators of an incomplete context: no item of `g` lies in the
    /// pseudo-closure of `g` without it.
    pub fn generators_by_pseudo_closure(&self, minsup: u64) -> BTreeSet<(Pattern, u64, Pattern)> {
        let mut out = BTreeSet::new();
        for g in self.all_patterns() {
            let support = self.support(&g);
            if g.is_empty() || support < minsup {
                continue;
            }
            let minimal = g.iter().all(|&x| {
                let rest: Pattern = g.iter().copied().filter(|&y| y != x).collect();
                !self.pseudo(&rest).contains(&x)
            });
            if minimal {
                out.insert((g.clone(), support, self.pseudo(&g)));
            }
        }
        out
    }

    pub fn lift(&self, premise: &Pattern, conclusion: &Pattern) -> Frac {
        let joint: Pattern = {
            let mut j = premise.clone();
            j.extend(conclusion);
            j.sort_unstable();
            j
        };
        Frac(
            self.support(&joint) as u128 * self.n_rows() as u128,
            self.support(premise) as u128 * self.support(conclusion) as u128,
        )
    }

    /// Snapshot completion with projected rules of the generators, ranked by
    /// robustesse, lift, correspondance, premise, then value.
    pub fn complete(&self, minsup: u64) -> Vec<OracleDecision> {
        let n_attrs = self.domains.len() as u128;
        let rules: Vec<(Pattern, (usize, u32), Frac)> = self
            .generators_by_pseudo_closure(minsup)
            .into_iter()
            .flat_map(|(g, _, closure)| {
                closure
                    .iter()
                    .filter(|x| !g.contains(x))
                    .map(|&x| (g.clone(), x))
                    .collect::<Vec<_>>()
            })
            .map(|(g, x)| {
                let lift = self.lift(&g, &vec![x]);
                (g, x, lift)
            })
            .collect();
        let mut out = Vec::new();
        for (t, row) in self.rows.iter().enumerate() {
            for target in 0..self.domains.len() {
                if row[target].is_some() {
                    continue;
                }
                let mut candidates: Vec<(Frac, Frac, Frac, &Pattern, u32)> = Vec::new();
                for (premise, (a, v), lift) in &rules {
                    if *a != target || premise.iter().any(|&(b, w)| row[b].is_some_and(|known| known != w)) {
                        continue;
                    }
                    let known = premise.iter().filter(|&&(b, _)| row[b].is_some()).count() as u128;
                    let corr = Frac(known, n_attrs);
                    candidates.push((corr.mul(*lift), *lift, corr, premise, *v));
                }
                let distinct: BTreeSet<u32> = candidates.iter().map(|c| c.4).collect();
                let best = candidates.iter().min_by(|x, y| {
                    y.0.cmp(&x.0)
                        .then_with(|| y.1.cmp(&x.1))
                        .then_with(|| y.2.cmp(&x.2))
                        .then_with(|| x.3.cmp(y.3))
                        .then_with(|| x.4.cmp(&y.4))
                });
                out.push(OracleDecision {
                    row: t,
                    attribute: target,
                    value: best.map(|b| b.4),
                    conflict: distinct.len() >= 2,
                });
            }
        }
        out
    }
}

pub fn pattern_of(ctx: &IncompleteContext, items: &mvc_core::Itemset) -> Pattern {
    items
        .iter()
        .map(|id| {
            let item = ctx.item(id);
            (item.attribute as usize, item.value)
        })
        .collect()
}

pub fn mined_pairs(ctx: &IncompleteContext, entries: &[GeneratorEntry]) -> BTreeSet<(Pattern, Pattern)> {
    entries
        .iter()
        .map(|e| (pattern_of(ctx, &e.generator), pattern_of(ctx, &e.closure)))
        .collect()
}

pub fn mined_triples(ctx: &IncompleteContext, entries: &[GeneratorEntry]) -> BTreeSet<(Pattern, u64, Pattern)> {
    entries
        .iter()
        .map(|e| (pattern_of(ctx, &e.generator), e.support, pattern_of(ctx, &e.closure)))
        .collect()
}
