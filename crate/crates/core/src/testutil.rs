//! Shared fixtures for unit tests.

use crate::context::{IncompleteContext, Itemset, RelationalTable};

pub(crate) const TOY_COMPLETE: &str = include_str!("../tests/data/toy_complete.csv");
pub(crate) const TOY_INCOMPLETE: &str = include_str!("../tests/data/toy_incomplete.csv");

pub(crate) fn table(text: &str) -> RelationalTable {
    RelationalTable::read_csv(text.as_bytes(), b',').unwrap()
}

pub(crate) fn toy_complete() -> IncompleteContext {
    IncompleteContext::encode(&table(TOY_COMPLETE))
}

pub(crate) fn toy_incomplete() -> IncompleteContext {
    IncompleteContext::encode(&table(TOY_INCOMPLETE))
}

/// Attribute of a toy item letter: A,B on X1; C,D on X2; E,F,G on X3; K,L on X4.
pub(crate) fn toy_attribute(letter: char) -> &'static str {
    match letter {
        'A' | 'B' => "X1",
        'C' | 'D' => "X2",
        'E' | 'F' | 'G' => "X3",
        'K' | 'L' => "X4",
        _ => panic!("no toy item {letter}"),
    }
}

/// Toy itemset written as item letters, e.g. `"ACEK"`.
pub(crate) fn letters(ctx: &IncompleteContext, text: &str) -> Itemset {
    text.chars()
        .map(|c| ctx.lookup(toy_attribute(c), &c.to_string()).unwrap())
        .collect()
}
