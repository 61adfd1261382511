//! The tabular form results take between the endpoint and the serializer.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::config::ValueType;

/// A result cell. Cells are text straight out of the endpoint; lists and
/// records only appear through `json=array(...)` and `json=dict(...)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cell {
    Text(String),
    List(Vec<Cell>),
    Record(Vec<(String, Cell)>),
}

impl Cell {
    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Cell::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_empty_text(&self) -> bool {
        matches!(self, Cell::Text(s) if s.is_empty())
    }
}

impl Default for Cell {
    fn default() -> Self {
        Cell::Text(String::new())
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Cell::Text(s) => serializer.serialize_str(s),
            Cell::List(items) => {
                let mut seq = serializer.serialize_seq(Some(items.len()))?;
                for item in items {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
            Cell::Record(fields) => {
                let mut map = serializer.serialize_map(Some(fields.len()))?;
                for (k, v) in fields {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("row has {got} cells but the header has {expected}")]
    RowWidth { expected: usize, got: usize },
    #[error("column `{0}` already exists")]
    DuplicateColumn(String),
}

/// Header plus rows. Every row holds exactly one cell per header variable,
/// in header order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultTable {
    header: Vec<String>,
    types: BTreeMap<String, ValueType>,
    rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(header: Vec<String>) -> Self {
        ResultTable { header, types: BTreeMap::new(), rows: Vec::new() }
    }

    /// Builds a table of text cells, checking row widths.
    pub fn from_text_rows<R, C>(header: &[&str], rows: R) -> Result<Self, TableError>
    where
        R: IntoIterator<Item = C>,
        C: IntoIterator,
        C::Item: Into<String>,
    {
        let mut table = ResultTable::new(header.iter().map(|h| String::from(*h)).collect());
        for row in rows {
            table.push_row(row.into_iter().map(|c| Cell::Text(c.into())).collect())?;
        }
        Ok(table)
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Declared type of a variable; `str` unless set.
    pub fn value_type(&self, name: &str) -> ValueType {
        self.types.get(name).copied().unwrap_or_default()
    }

    pub fn set_type(&mut self, name: impl Into<String>, value_type: ValueType) {
        self.types.insert(name.into(), value_type);
    }

    pub fn with_types<'a>(mut self, types: impl IntoIterator<Item = &'a (String, ValueType)>) -> Self {
        for (name, ty) in types {
            self.types.insert(name.clone(), *ty);
        }
        self
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<(), TableError> {
        if row.len() != self.header.len() {
            return Err(TableError::RowWidth { expected: self.header.len(), got: row.len() });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn cell(&self, row: usize, name: &str) -> Option<&Cell> {
        let col = self.column(name)?;
        self.rows.get(row).map(|r| &r[col])
    }

    pub fn retain_rows(&mut self, mut keep: impl FnMut(&[Cell]) -> bool) {
        self.rows.retain(|r| keep(r));
    }

    /// Stable sort of the rows.
    pub fn sort_rows_by(&mut self, compare: impl FnMut(&Vec<Cell>, &Vec<Cell>) -> core::cmp::Ordering) {
        self.rows.sort_by(compare);
    }

    /// Replaces every cell of column `col` with `f(cell)`.
    pub fn map_column<E>(&mut self, col: usize, mut f: impl FnMut(Cell) -> Result<Cell, E>) -> Result<(), E> {
        for row in &mut self.rows {
            let cell = core::mem::take(&mut row[col]);
            row[col] = f(cell)?;
        }
        Ok(())
    }

    /// Appends a column whose cells are computed from each row.
    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        value_type: ValueType,
        mut f: impl FnMut(&[Cell]) -> Cell,
    ) -> Result<(), TableError> {
        let name = name.into();
        if self.column(&name).is_some() {
            return Err(TableError::DuplicateColumn(name));
        }
        for row in &mut self.rows {
            let cell = f(row);
            row.push(cell);
        }
        self.types.insert(name.clone(), value_type);
        self.header.push(name);
        Ok(())
    }

    pub fn remove_column(&mut self, name: &str) -> bool {
        let Some(col) = self.column(name) else {
            return false;
        };
        self.header.remove(col);
        self.types.remove(name);
        for row in &mut self.rows {
            row.remove(col);
        }
        true
    }

    pub(crate) fn json_rows(&self) -> JsonRows<'_> {
        JsonRows(self)
    }
}

/// Serializes as an array of objects with keys in header order.
pub(crate) struct JsonRows<'a>(&'a ResultTable);

struct JsonRow<'a> {
    header: &'a [String],
    cells: &'a [Cell],
}

impl Serialize for JsonRows<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let table = self.0;
        let mut seq = serializer.serialize_seq(Some(table.rows.len()))?;
        for cells in &table.rows {
            seq.serialize_element(&JsonRow { header: &table.header, cells })?;
        }
        seq.end()
    }
}

impl Serialize for JsonRow<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.header.len()))?;
        for (name, cell) in self.header.iter().zip(self.cells) {
            map.serialize_entry(name, cell)?;
        }
        map.end()
    }
}
