//! Property bodies shared by the property tests and the acceptance run.

use std::collections::BTreeSet;

use mvc_core::baseline::{apriori, derive_rules};
use mvc_core::basis::{build_basis, lift, project, ProjectedRule};
use mvc_core::closure::{galois_close, pseudo_close};
use mvc_core::completion::{candidate_set, complete, decide, rules_by_attribute, CompletionOptions};
use mvc_core::evaluation::{cells_per_attribute, inject, AttributeSelection, InjectionSpec};
use mvc_core::{mine_generators, IncompleteContext, Itemset, RelationalTable};
use proptest::prelude::*;

use super::oracle::{mined_pairs, mined_triples, pattern_of, Oracle, Pattern};

pub fn itemset(ctx: &IncompleteContext, p: &Pattern) -> Option<Itemset> {
    p.iter().map(|&(a, v)| ctx.item_id(a, v)).collect()
}

/// Every itemset whose items all occur in the table.
fn itemsets(ctx: &IncompleteContext, oracle: &Oracle) -> Vec<Itemset> {
    oracle.all_patterns().iter().filter_map(|p| itemset(ctx, p)).collect()
}

fn projected(ctx: &IncompleteContext, minsup: u64) -> Vec<ProjectedRule> {
    let entries = mine_generators(ctx, minsup).unwrap();
    project(&build_basis(&entries, ctx), ctx)
}

pub fn support_and_certaine(table: &RelationalTable) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let oracle = Oracle::new(table);
    for x in itemsets(&ctx, &oracle) {
        let s = ctx.support(&x);
        prop_assert_eq!(ctx.certaine(&x).count() as u64, s);
        prop_assert_eq!(s, oracle.support(&pattern_of(&ctx, &x)));
        for i in 0..ctx.n_items() as u32 {
            if x.contains(i) {
                continue;
            }
            let y = x.with(i);
            prop_assert!(ctx.support(&y) <= s);
            let pb = ctx.probablement(&x, i);
            prop_assert!(pb.is_subset(&ctx.probable(i)));
            prop_assert!(pb.is_disjoint(&ctx.certaine(&y)));
        }
    }
    Ok(())
}

pub fn round_trip(table: &RelationalTable) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    prop_assert_eq!(&ctx.decode(), table);
    if table.is_complete() {
        for i in 0..ctx.n_items() as u32 {
            prop_assert!(ctx.probable(i).is_empty());
        }
    }
    Ok(())
}

pub fn galois_axioms(table: &RelationalTable) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let sets: Vec<Itemset> = itemsets(&ctx, &Oracle::new(table))
        .into_iter()
        .filter(|x| ctx.support(x) > 0)
        .collect();
    for x in &sets {
        let cx = galois_close(&ctx, x).unwrap();
        prop_assert!(x.is_subset(&cx));
        prop_assert_eq!(&galois_close(&ctx, &cx).unwrap(), &cx);
        prop_assert_eq!(&pseudo_close(&ctx, x).unwrap(), &cx);
        for y in &sets {
            if x.is_subset(y) {
                prop_assert!(cx.is_subset(&galois_close(&ctx, y).unwrap()));
            }
        }
    }
    Ok(())
}

pub fn pseudo_close_extensive(table: &RelationalTable) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let oracle = Oracle::new(table);
    for x in itemsets(&ctx, &oracle) {
        if ctx.support(&x) == 0 {
            prop_assert!(pseudo_close(&ctx, &x).is_err());
            continue;
        }
        let c = pseudo_close(&ctx, &x).unwrap();
        prop_assert!(x.is_subset(&c));
        prop_assert_eq!(pattern_of(&ctx, &c), oracle.pseudo(&pattern_of(&ctx, &x)));
    }
    Ok(())
}

/// Mined pairs equal the closure-based enumeration on a complete table.
pub fn miner_matches_closure_oracle(table: &RelationalTable, minsup: u64) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let entries = mine_generators(&ctx, minsup).unwrap();
    prop_assert_eq!(mined_pairs(&ctx, &entries), Oracle::new(table).generators_by_closure(minsup));
    Ok(())
}

pub fn miner_matches_pseudo_oracle(table: &RelationalTable, minsup: u64) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let entries = mine_generators(&ctx, minsup).unwrap();
    prop_assert_eq!(
        mined_triples(&ctx, &entries),
        Oracle::new(table).generators_by_pseudo_closure(minsup)
    );
    for e in &entries {
        prop_assert_eq!(&pseudo_close(&ctx, &e.generator).unwrap(), &e.closure);
    }
    Ok(())
}

/// Every frequent non-empty subset of a returned generator is returned.
pub fn generator_anti_monotone(table: &RelationalTable, minsup: u64) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let entries = mine_generators(&ctx, minsup).unwrap();
    let found: BTreeSet<&Itemset> = entries.iter().map(|e| &e.generator).collect();
    for g in &found {
        for x in g.iter() {
            let s = g.without(x);
            if !s.is_empty() && ctx.support(&s) >= minsup {
                prop_assert!(found.contains(&s), "{} missing", ctx.itemset_label(&s));
            }
        }
    }
    Ok(())
}

pub fn lift_symmetric(table: &RelationalTable) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    for r in build_basis(&mine_generators(&ctx, 1).unwrap(), &ctx) {
        if r.support > 0 {
            prop_assert_eq!(lift(&ctx, &r.premise, &r.conclusion).unwrap(), lift(&ctx, &r.conclusion, &r.premise).unwrap());
            prop_assert_eq!(r.lift, lift(&ctx, &r.premise, &r.conclusion).unwrap());
        }
    }
    Ok(())
}

pub fn completion_matches_oracle(table: &RelationalTable, minsup: u64) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let completion = complete(&ctx, &projected(&ctx, minsup), CompletionOptions::default());
    let got: Vec<(usize, usize, Option<u32>, bool)> = completion
        .decisions
        .iter()
        .map(|d| (d.transaction, d.attribute, d.value.map(|id| ctx.item(id).value), d.conflict))
        .collect();
    let expected: Vec<(usize, usize, Option<u32>, bool)> = Oracle::new(table)
        .complete(minsup)
        .into_iter()
        .map(|d| (d.row, d.attribute, d.value, d.conflict))
        .collect();
    prop_assert_eq!(got, expected);
    for row in 0..table.n_rows() {
        for attr in 0..table.n_attributes() {
            if let Some(known) = table.cell(row, attr) {
                prop_assert_eq!(completion.table.cell(row, attr), Some(known));
            }
        }
    }
    let conflicts = completion.decisions.iter().filter(|d| d.conflict).count();
    prop_assert_eq!(completion.conflicts(), conflicts);
    prop_assert!(completion.decisions.iter().all(|d| !d.conflict || d.distinct_values >= 2));
    Ok(())
}

/// Scaling every lift by the same positive factor scales every robustesse
/// by it and leaves every decision unchanged.
pub fn argmax_invariant_under_scaling(table: &RelationalTable, factor: u64) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let rules = projected(&ctx, 1);
    let scaled: Vec<ProjectedRule> = rules
        .iter()
        .cloned()
        .map(|mut r| {
            r.lift *= factor;
            r
        })
        .collect();
    let a = complete(&ctx, &rules, CompletionOptions::default());
    let b = complete(&ctx, &scaled, CompletionOptions::default());
    prop_assert_eq!(a.decisions.len(), b.decisions.len());
    for (x, y) in a.decisions.iter().zip(&b.decisions) {
        prop_assert_eq!((x.value, x.conflict, x.rule), (y.value, y.conflict, y.rule));
    }
    prop_assert_eq!(a.table, b.table);
    Ok(())
}

/// Processing the missing attributes of a row in any order gives the same decisions.
pub fn snapshot_order_independent(table: &RelationalTable, rotation: usize) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let rules = projected(&ctx, 1);
    let by_attr = rules_by_attribute(ctx.n_attributes(), &rules);
    let completion = complete(&ctx, &rules, CompletionOptions::default());
    for t in 0..ctx.n_transactions() {
        let mut attrs: Vec<usize> = ctx.missing_attributes(t).iter().collect();
        if attrs.is_empty() {
            continue;
        }
        let k = rotation % attrs.len();
        attrs.rotate_left(k);
        attrs.reverse();
        for attr in attrs {
            let set = candidate_set(&ctx, &rules, &by_attr[attr], t, ctx.row(t), attr);
            let d = decide(&rules, &set);
            let reference = completion
                .decisions
                .iter()
                .find(|r| r.transaction == t && r.attribute == attr)
                .unwrap();
            prop_assert_eq!((d.value, d.conflict), (reference.value, reference.conflict));
        }
    }
    Ok(())
}

pub fn injection_deterministic(table: &RelationalTable, rate: f64, seed: u64) -> Result<(), TestCaseError> {
    let spec = InjectionSpec {
        targets: AttributeSelection::All,
        rate,
        seed,
    };
    let count = cells_per_attribute(rate, table.n_rows());
    if count == 0 {
        prop_assert!(inject(table, &spec).is_err());
        return Ok(());
    }
    let a = inject(table, &spec).unwrap();
    prop_assert_eq!(&a, &inject(table, &spec).unwrap());
    prop_assert_eq!(a.missing_count(), count * table.n_attributes());
    for row in 0..table.n_rows() {
        for attr in 0..table.n_attributes() {
            if let Some(v) = a.cell(row, attr) {
                prop_assert_eq!(table.cell(row, attr), Some(v));
            }
        }
    }
    Ok(())
}

/// At minsup 1 every projected rule is also an Apriori rule at minconf 0.
pub fn projected_rules_are_apriori_rules(table: &RelationalTable) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let frequents = apriori(&ctx, 1).unwrap();
    for (x, s) in frequents.iter() {
        prop_assert_eq!(*s, ctx.support(x));
    }
    let ar: BTreeSet<(Itemset, u32)> = derive_rules(&frequents, &ctx, 0.0)
        .into_iter()
        .map(|r| (r.premise, r.conclusion))
        .collect();
    let basis = projected(&ctx, 1);
    prop_assert!(ar.len() >= basis.len());
    for r in &basis {
        prop_assert!(ar.contains(&(r.premise.clone(), r.conclusion)));
    }
    Ok(())
}

/// On a complete table, exact Apriori rules whose premise is a generator and
/// whose conclusion lies in its closure are projected basis rules.
pub fn exact_rules_cross_check(table: &RelationalTable) -> Result<(), TestCaseError> {
    let ctx = IncompleteContext::encode(table);
    let entries = mine_generators(&ctx, 1).unwrap();
    let basis: BTreeSet<(Itemset, u32)> = project(&build_basis(&entries, &ctx), &ctx)
        .into_iter()
        .map(|r| (r.premise, r.conclusion))
        .collect();
    for r in derive_rules(&apriori(&ctx, 1).unwrap(), &ctx, 1.0) {
        if let Some(e) = entries.iter().find(|e| e.generator == r.premise) {
            if e.closure.contains(r.conclusion) {
                prop_assert!(basis.contains(&(r.premise.clone(), r.conclusion)));
            }
        }
    }
    Ok(())
}
