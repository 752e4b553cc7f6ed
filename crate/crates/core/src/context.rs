//! Relational tables with missing cells and their binarized transactional view.
//!
//! A table with `n` attributes becomes a context whose items are the observed
//! `(attribute, value)` pairs. Each transaction records the items it certainly
//! contains and the attributes whose value is missing. Supports are pessimistic:
//! a missing cell contains no item.

use std::fmt;
use std::io::{Read, Write};

use crate::bitset::BitSet;
use crate::error::{Error, Result};

/// Token used for a missing cell in text formats.
pub const MISSING: &str = "?";

pub type ItemId = u32;

/// Index into an attribute's domain, or `None` for a missing cell.
pub type Cell = Option<u32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeSchema {
    pub name: String,
    /// Distinct value labels, sorted.
    pub domain: Vec<String>,
}

impl AttributeSchema {
    pub fn value_index(&self, label: &str) -> Option<u32> {
        self.domain
            .binary_search_by(|v| v.as_str().cmp(label))
            .ok()
            .map(|i| i as u32)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationalTable {
    schema: Vec<AttributeSchema>,
    rows: Vec<Vec<Cell>>,
}

impl RelationalTable {
    pub fn new(schema: Vec<AttributeSchema>, rows: Vec<Vec<Cell>>) -> Result<Self> {
        let mut names: Vec<&str> = schema.iter().map(|a| a.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Table(format!("duplicate attribute name `{}`", w[0])));
        }
        for attr in &schema {
            if attr.domain.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Table(format!(
                    "domain of `{}` must be sorted and duplicate-free",
                    attr.name
                )));
            }
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::Table(format!(
                    "row {} has {} cells, expected {}",
                    r + 1,
                    row.len(),
                    schema.len()
                )));
            }
            for (cell, attr) in row.iter().zip(&schema) {
                if let Some(v) = cell {
                    if *v as usize >= attr.domain.len() {
                        return Err(Error::Table(format!(
                            "row {}: value index {v} outside domain of `{}`",
                            r + 1,
                            attr.name
                        )));
                    }
                }
            }
        }
        Ok(RelationalTable { schema, rows })
    }

    /// Builds a table from string cells, deriving each domain from the observed values.
    pub fn from_records<S: AsRef<str>>(header: &[S], records: &[Vec<S>]) -> Result<Self> {
        let mut domains: Vec<Vec<String>> = vec![Vec::new(); header.len()];
        for (r, record) in records.iter().enumerate() {
            if record.len() != header.len() {
                return Err(Error::Table(format!(
                    "row {} has {} cells, expected {}",
                    r + 1,
                    record.len(),
                    header.len()
                )));
            }
            for (a, cell) in record.iter().enumerate() {
                let cell = cell.as_ref();
                if cell != MISSING {
                    domains[a].push(cell.to_string());
                }
            }
        }
        let schema: Vec<AttributeSchema> = header
            .iter()
            .zip(domains)
            .map(|(name, mut domain)| {
                domain.sort_unstable();
                domain.dedup();
                AttributeSchema {
                    name: name.as_ref().to_string(),
                    domain,
                }
            })
            .collect();
        let rows = records
            .iter()
            .map(|record| {
                record
                    .iter()
                    .zip(&schema)
                    .map(|(cell, attr)| attr.value_index(cell.as_ref()))
                    .collect()
            })
            .collect();
        RelationalTable::new(schema, rows)
    }

    /// Reads a CSV table: header row of attribute names, `?` for missing cells,
    /// surrounding whitespace trimmed.
    pub fn read_csv<R: Read>(reader: R, delimiter: u8) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(delimiter)
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header.is_empty() || header.iter().all(String::is_empty) {
            return Err(Error::Parse {
                line: 1,
                message: "missing header row".into(),
            });
        }
        if let Some(name) = header.iter().find(|h| h.is_empty()) {
            return Err(Error::Parse {
                line: 1,
                message: format!("empty attribute name `{name}`"),
            });
        }
        let mut records = Vec::new();
        for result in rdr.records() {
            let record = result?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != header.len() {
                return Err(Error::Parse {
                    line,
                    message: format!("{} fields, expected {}", record.len(), header.len()),
                });
            }
            if let Some(pos) = record.iter().position(str::is_empty) {
                return Err(Error::Parse {
                    line,
                    message: format!("empty cell for attribute `{}`", header[pos]),
                });
            }
            records.push(record.iter().map(str::to_string).collect::<Vec<_>>());
        }
        RelationalTable::from_records(&header, &records)
    }

    pub fn write_csv<W: Write>(&self, writer: W, delimiter: u8) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new()
            .delimiter(delimiter)
            .from_writer(writer);
        wtr.write_record(self.schema.iter().map(|a| a.name.as_str()))?;
        for r in 0..self.rows.len() {
            wtr.write_record((0..self.schema.len()).map(|a| self.label(r, a).unwrap_or(MISSING)))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn schema(&self) -> &[AttributeSchema] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.schema.len()
    }

    pub fn cell(&self, row: usize, attr: usize) -> Cell {
        self.rows[row][attr]
    }

    /// Label of a cell, `None` if missing.
    pub fn label(&self, row: usize, attr: usize) -> Option<&str> {
        self.rows[row][attr].map(|v| self.schema[attr].domain[v as usize].as_str())
    }

    pub fn set_cell(&mut self, row: usize, attr: usize, cell: Cell) {
        if let Some(v) = cell {
            assert!((v as usize) < self.schema[attr].domain.len());
        }
        self.rows[row][attr] = cell;
    }

    pub fn missing_count(&self) -> usize {
        self.rows.iter().flatten().filter(|c| c.is_none()).count()
    }

    pub fn is_complete(&self) -> bool {
        self.missing_count() == 0
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|a| a.name == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Item {
    pub attribute: u32,
    pub value: u32,
}

/// A sorted, duplicate-free set of item ids.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Itemset(Vec<ItemId>);

impl Itemset {
    pub fn empty() -> Self {
        Itemset(Vec::new())
    }

    /// Wraps a vector already known to be sorted and duplicate-free.
    pub fn from_sorted(items: Vec<ItemId>) -> Self {
        debug_assert!(items.windows(2).all(|w| w[0] < w[1]));
        Itemset(items)
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    pub fn is_subset(&self, other: &Itemset) -> bool {
        self.0.iter().all(|i| other.contains(*i))
    }

    pub fn with(&self, item: ItemId) -> Itemset {
        let mut items = self.0.clone();
        if let Err(pos) = items.binary_search(&item) {
            items.insert(pos, item);
        }
        Itemset(items)
    }

    pub fn without(&self, item: ItemId) -> Itemset {
        Itemset(self.0.iter().copied().filter(|&i| i != item).collect())
    }

    pub fn union(&self, other: &Itemset) -> Itemset {
        self.0.iter().chain(&other.0).copied().collect()
    }

    pub fn difference(&self, other: &Itemset) -> Itemset {
        Itemset(
            self.0
                .iter()
                .copied()
                .filter(|i| !other.contains(*i))
                .collect(),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.0.iter().copied()
    }
}

impl FromIterator<ItemId> for Itemset {
    fn from_iter<T: IntoIterator<Item = ItemId>>(iter: T) -> Self {
        let mut items: Vec<ItemId> = iter.into_iter().collect();
        items.sort_unstable();
        items.dedup();
        Itemset(items)
    }
}

impl<const N: usize> From<[ItemId; N]> for Itemset {
    fn from(items: [ItemId; N]) -> Self {
        items.into_iter().collect()
    }
}

/// Binarized view of a [`RelationalTable`].
#[derive(Clone, Debug)]
pub struct IncompleteContext {
    schema: Vec<AttributeSchema>,
    items: Vec<Item>,
    /// `item_ids[attr][value]`, `None` for domain values never observed.
    item_ids: Vec<Vec<Option<ItemId>>>,
    /// Row-major cells as item ids.
    cells: Vec<Vec<Option<ItemId>>>,
    present: Vec<BitSet>,
    missing: Vec<BitSet>,
    item_tids: Vec<BitSet>,
    missing_tids: Vec<BitSet>,
}

impl IncompleteContext {
    /// Binarizes a table. Items are numbered in `(attribute, value)` order and
    /// only values that actually occur in the table get an item.
    pub fn encode(table: &RelationalTable) -> Self {
        let n_attrs = table.n_attributes();
        let n_rows = table.n_rows();
        let mut observed: Vec<Vec<bool>> = table
            .schema()
            .iter()
            .map(|a| vec![false; a.domain.len()])
            .collect();
        for row in table.rows() {
            for (a, cell) in row.iter().enumerate() {
                if let Some(v) = cell {
                    observed[a][*v as usize] = true;
                }
            }
        }
        let mut items = Vec::new();
        let item_ids: Vec<Vec<Option<ItemId>>> = observed
            .iter()
            .enumerate()
            .map(|(a, values)| {
                values
                    .iter()
                    .enumerate()
                    .map(|(v, &seen)| {
                        seen.then(|| {
                            items.push(Item {
                                attribute: a as u32,
                                value: v as u32,
                            });
                            (items.len() - 1) as ItemId
                        })
                    })
                    .collect()
            })
            .collect();

        let mut present = Vec::with_capacity(n_rows);
        let mut missing = Vec::with_capacity(n_rows);
        let mut item_tids = vec![BitSet::new(n_rows); items.len()];
        let mut missing_tids = vec![BitSet::new(n_rows); n_attrs];
        let mut cells = Vec::with_capacity(n_rows);
        for (t, row) in table.rows().iter().enumerate() {
            let mut p = BitSet::new(items.len());
            let mut m = BitSet::new(n_attrs);
            let mut row_items = Vec::with_capacity(n_attrs);
            for (a, cell) in row.iter().enumerate() {
                match cell {
                    Some(v) => {
                        let id = item_ids[a][*v as usize].expect("observed value has an item");
                        p.insert(id as usize);
                        item_tids[id as usize].insert(t);
                        row_items.push(Some(id));
                    }
                    None => {
                        m.insert(a);
                        missing_tids[a].insert(t);
                        row_items.push(None);
                    }
                }
            }
            present.push(p);
            missing.push(m);
            cells.push(row_items);
        }

        IncompleteContext {
            schema: table.schema().to_vec(),
            items,
            item_ids,
            cells,
            present,
            missing,
            item_tids,
            missing_tids,
        }
    }

    /// Rebuilds the source table.
    pub fn decode(&self) -> RelationalTable {
        let rows = self
            .cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|cell| cell.map(|id| self.items[id as usize].value))
                    .collect()
            })
            .collect();
        RelationalTable::new(self.schema.clone(), rows).expect("context mirrors a valid table")
    }

    pub fn schema(&self) -> &[AttributeSchema] {
        &self.schema
    }

    pub fn n_transactions(&self) -> usize {
        self.cells.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.schema.len()
    }

    pub fn n_items(&self) -> usize {
        self.items.len()
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn item(&self, id: ItemId) -> Item {
        self.items[id as usize]
    }

    pub fn attribute_of(&self, id: ItemId) -> usize {
        self.items[id as usize].attribute as usize
    }

    pub fn item_id(&self, attribute: usize, value: u32) -> Option<ItemId> {
        self.item_ids
            .get(attribute)?
            .get(value as usize)
            .copied()
            .flatten()
    }

    /// Item ids of one attribute, in value order.
    pub fn items_of_attribute(&self, attribute: usize) -> impl Iterator<Item = ItemId> + '_ {
        self.item_ids[attribute].iter().flatten().copied()
    }

    /// Known item of `attribute` in transaction `t`, `None` if the cell is missing.
    pub fn cell(&self, t: usize, attribute: usize) -> Option<ItemId> {
        self.cells[t][attribute]
    }

    pub fn row(&self, t: usize) -> &[Option<ItemId>] {
        &self.cells[t]
    }

    pub fn present_items(&self, t: usize) -> &BitSet {
        &self.present[t]
    }

    pub fn missing_attributes(&self, t: usize) -> &BitSet {
        &self.missing[t]
    }

    pub fn is_missing(&self, t: usize, attribute: usize) -> bool {
        self.missing[t].contains(attribute)
    }

    /// Transactions containing the item.
    pub fn item_tidset(&self, id: ItemId) -> &BitSet {
        &self.item_tids[id as usize]
    }

    /// Transactions missing the attribute.
    pub fn missing_tidset(&self, attribute: usize) -> &BitSet {
        &self.missing_tids[attribute]
    }

    pub fn is_complete(&self) -> bool {
        self.missing_tids.iter().all(BitSet::is_empty)
    }

    /// Transactions certainly containing every item of `x`.
    pub fn certaine(&self, x: &Itemset) -> BitSet {
        let mut tids = BitSet::full(self.n_transactions());
        for id in x.iter() {
            tids.intersect_with(&self.item_tids[id as usize]);
        }
        tids
    }

    /// Pessimistic absolute support.
    pub fn support(&self, x: &Itemset) -> u64 {
        match x.items() {
            [] => self.n_transactions() as u64,
            [i] => self.item_tids[*i as usize].count() as u64,
            [i, j] => self.item_tids[*i as usize].intersection_count(&self.item_tids[*j as usize])
                as u64,
            _ => self.certaine(x).count() as u64,
        }
    }

    /// Transactions whose cell for the item's attribute is missing.
    pub fn probable(&self, item: ItemId) -> BitSet {
        self.missing_tids[self.attribute_of(item)].clone()
    }

    /// Transactions certainly containing `x` while missing the attribute of `item`.
    pub fn probablement(&self, x: &Itemset, item: ItemId) -> BitSet {
        let mut tids = self.certaine(x);
        tids.intersect_with(&self.missing_tids[self.attribute_of(item)]);
        tids
    }

    /// Renders an item as `attribute=value`.
    pub fn item_label(&self, id: ItemId) -> String {
        let item = self.items[id as usize];
        let attr = &self.schema[item.attribute as usize];
        format!("{}={}", attr.name, attr.domain[item.value as usize])
    }

    /// Renders an itemset as comma-joined `attribute=value` pairs.
    pub fn itemset_label(&self, x: &Itemset) -> String {
        x.iter()
            .map(|id| self.item_label(id))
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parses `attribute=value`.
    pub fn parse_item(&self, text: &str) -> Result<ItemId> {
        let (name, value) = text
            .split_once('=')
            .ok_or_else(|| Error::UnknownItem(text.to_string()))?;
        let (name, value) = (name.trim(), value.trim());
        let attr = self
            .schema
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownItem(text.to_string()))?;
        self.schema[attr]
            .value_index(value)
            .and_then(|v| self.item_id(attr, v))
            .ok_or_else(|| Error::UnknownItem(text.to_string()))
    }

    /// Parses a comma-joined itemset; the empty string is the empty itemset.
    pub fn parse_itemset(&self, text: &str) -> Result<Itemset> {
        if text.trim().is_empty() {
            return Ok(Itemset::empty());
        }
        text.split(',').map(|part| self.parse_item(part)).collect()
    }

    /// Looks up an item by attribute name and value label.
    pub fn lookup(&self, attribute: &str, value: &str) -> Option<ItemId> {
        let attr = self.schema.iter().position(|a| a.name == attribute)?;
        self.item_id(attr, self.schema[attr].value_index(value)?)
    }

    /// Itemset from `(attribute, value)` label pairs; panics on unknown labels.
    pub fn itemset_of(&self, pairs: &[(&str, &str)]) -> Itemset {
        pairs
            .iter()
            .map(|(a, v)| {
                self.lookup(a, v)
                    .unwrap_or_else(|| panic!("unknown item {a}={v}"))
            })
            .collect()
    }
}

impl fmt::Display for Itemset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, id) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{id}")?;
        }
        write!(f, "}}")
    }
}
