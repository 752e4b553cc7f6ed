//! Closure operators over a context.
//!
//! [`galois_close`] is the classic `f∘g` closure and only accepts complete
//! contexts. [`pseudo_close`] works on incomplete contexts: an item joins the
//! closure when every transaction containing `X` either contains it or is
//! missing its attribute. Unlike the Galois closure it is not a closure
//! operator (the closure can have lower support than its input).

use crate::bitset::BitSet;
use crate::context::{IncompleteContext, ItemId, Itemset};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureResult {
    pub input: Itemset,
    pub closed: Itemset,
    /// Support of `input`.
    pub support: u64,
}

/// `f(g(X))`: the items shared by every transaction that contains `x`.
pub fn galois_close(ctx: &IncompleteContext, x: &Itemset) -> Result<Itemset> {
    if !ctx.is_complete() {
        return Err(Error::IncompleteContext);
    }
    let tids = ctx.certaine(x);
    if tids.is_empty() {
        return Err(Error::ZeroSupport(ctx.itemset_label(x)));
    }
    Ok((0..ctx.n_items() as ItemId)
        .filter(|&i| tids.is_subset(ctx.item_tidset(i)))
        .collect())
}

/// Pseudo-closure of `x` on an incomplete context.
pub fn pseudo_close(ctx: &IncompleteContext, x: &Itemset) -> Result<Itemset> {
    let tids = ctx.certaine(x);
    if tids.is_empty() {
        return Err(Error::ZeroSupport(ctx.itemset_label(x)));
    }
    Ok(pseudo_close_tids(ctx, x, &tids))
}

pub fn pseudo_closure_result(ctx: &IncompleteContext, x: &Itemset) -> Result<ClosureResult> {
    let closed = pseudo_close(ctx, x)?;
    Ok(ClosureResult {
        input: x.clone(),
        closed,
        support: ctx.support(x),
    })
}

/// Pseudo-closure given the (non-empty) tidset of `x`.
///
/// Item `i` on an attribute not bound by `x` is added iff
/// `supp(X) - supp(Xi) == |Probablement(X, i)|` and `supp(Xi) >= 1`. The second
/// condition drops attributes that are missing in every transaction of `X`,
/// where every value of the attribute would otherwise qualify at once.
pub(crate) fn pseudo_close_tids(ctx: &IncompleteContext, x: &Itemset, tids: &BitSet) -> Itemset {
    let support = tids.count();
    let mut bound = vec![false; ctx.n_attributes()];
    for id in x.iter() {
        bound[ctx.attribute_of(id)] = true;
    }
    let mut out: Vec<ItemId> = x.items().to_vec();
    for attr in (0..ctx.n_attributes()).filter(|&a| !bound[a]) {
        let probable = tids.intersection_count(ctx.missing_tidset(attr));
        for id in ctx.items_of_attribute(attr) {
            let with_item = tids.intersection_count(ctx.item_tidset(id));
            if with_item >= 1 && support - with_item == probable {
                out.push(id);
                // At most one value of an attribute can satisfy the test.
                break;
            }
        }
    }
    out.into_iter().collect()
}
