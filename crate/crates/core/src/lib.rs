//! Missing-value completion for relational tables.
//!
//! The pipeline binarizes a table with `?` cells into an incomplete context,
//! mines frequent minimal generators together with their pseudo-closures,
//! turns them into a generic basis of pseudo-exact rules, and fills each
//! missing cell with the consistent rule of highest robustness. An
//! Apriori-based completion with the `Score` metric is included for
//! comparison, along with the injection and scoring protocol used to
//! evaluate both.

pub mod baseline;
pub mod basis;
pub mod bitset;
pub mod closure;
pub mod completion;
pub mod context;
pub mod error;
pub mod evaluation;
pub mod miner;

#[cfg(test)]
mod testutil;

pub use context::{AttributeSchema, Cell, IncompleteContext, Item, ItemId, Itemset, RelationalTable, MISSING};
pub use error::{Error, Result};
pub use miner::{mine_generators, mine_generators_with_stats, GeneratorEntry, MiningStats, Minsup};
