//! Filters and refinements given as query parameters of a call URL.
//!
//! Whatever their order in the URL, parameters run by kind: every `require`,
//! then every `filter`, then every `sort`, then the output format is chosen
//! and, for JSON output, every `json` transform runs. Parameters of the same
//! kind run in URL order.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::pattern;
use crate::table::{Cell, ResultTable};
use crate::value::{TypedValue, ValueParseError};

/// Query keys that carry refinements.
pub const REFINEMENT_KEYS: [&str; 5] = ["require", "filter", "sort", "format", "json"];

pub const CSV_CONTENT_TYPE: &str = "text/csv";
pub const JSON_CONTENT_TYPE: &str = "application/json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn content_type(self) -> &'static str {
        match self {
            Format::Csv => CSV_CONTENT_TYPE,
            Format::Json => JSON_CONTENT_TYPE,
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }

    /// Picks the preferred format an `Accept` header names, honouring
    /// q-values. Wildcards name no format.
    pub fn from_accept(header: &str) -> Option<Self> {
        let mut best: Option<(Format, u32)> = None;
        for range in header.split(',') {
            let mut parts = range.split(';');
            let media = parts.next().unwrap_or("").trim();
            let format = if media.eq_ignore_ascii_case(CSV_CONTENT_TYPE) {
                Format::Csv
            } else if media.eq_ignore_ascii_case(JSON_CONTENT_TYPE) {
                Format::Json
            } else {
                continue;
            };
            let q = parts
                .filter_map(|p| p.trim().strip_prefix("q="))
                .next()
                .map(parse_qvalue)
                .unwrap_or(1000);
            if q > 0 && best.is_none_or(|(_, bq)| q > bq) {
                best = Some((format, q));
            }
        }
        best.map(|(f, _)| f)
    }
}

/// q-value in thousandths; malformed values count as 0.
fn parse_qvalue(q: &str) -> u32 {
    let (int, frac) = q.split_once('.').unwrap_or((q, ""));
    let whole = match int {
        "0" => 0,
        "1" => 1000,
        _ => return 0,
    };
    if frac.len() > 3 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return 0;
    }
    let mut thousandths = 0;
    for (i, d) in frac.bytes().enumerate() {
        thousandths += u32::from(d - b'0') * [100, 10, 1][i];
    }
    (whole + thousandths).min(1000)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Eq,
    Lt,
    Gt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterSpec {
    pub field: String,
    /// With no operator, `value` is a regular expression searched in the cell.
    pub operator: Option<Comparison>,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SortOrder {
    Asc,
    Desc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortSpec {
    pub order: SortOrder,
    pub field: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JsonOp {
    Array,
    Dict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonOpSpec {
    pub op: JsonOp,
    pub separator: String,
    pub field: String,
    /// Empty for `array`, at least one name for `dict`.
    pub new_fields: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RefinementPlan {
    pub requires: Vec<String>,
    pub filters: Vec<FilterSpec>,
    pub sorts: Vec<SortSpec>,
    pub format: Option<Format>,
    pub json_ops: Vec<JsonOpSpec>,
}

impl RefinementPlan {
    pub fn is_empty(&self) -> bool {
        self == &RefinementPlan::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefineError {
    #[error("malformed `{key}={value}`: {reason}")]
    Syntax { key: String, value: String, reason: String },
    #[error("invalid regular expression `{pattern}`: {reason}")]
    BadRegex { pattern: String, reason: String },
    #[error("filter value {0}")]
    BadFilterValue(#[from] ValueParseError),
    #[error("`json` transforms need JSON output, but CSV was requested")]
    JsonWithCsv,
    #[error("field `{0}` does not hold plain text")]
    NotText(String),
}

/// Routes `require`, `filter`, `sort`, `format` and `json` parameters into a
/// plan, keeping URL order within each kind. Other keys are ignored; the
/// last `format` wins.
pub fn parse_refinements<'a, I>(params: I) -> Result<RefinementPlan, RefineError>
where
    I: IntoIterator<Item = (&'a str, &'a str)>,
{
    let mut plan = RefinementPlan::default();
    for (key, value) in params {
        let syntax = |reason: &str| RefineError::Syntax {
            key: String::from(key),
            value: String::from(value),
            reason: String::from(reason),
        };
        match key {
            "require" => {
                let field = value.trim();
                if field.is_empty() {
                    return Err(syntax("expected a field name"));
                }
                plan.requires.push(String::from(field));
            }
            "filter" => plan.filters.push(parse_filter(value).map_err(|e| match e {
                FilterParse::Syntax(reason) => syntax(reason),
                FilterParse::Regex(err) => err,
            })?),
            "sort" => plan.sorts.push(parse_sort(value).ok_or_else(|| syntax("expected `asc(<field>)` or `desc(<field>)`"))?),
            "format" => {
                plan.format = Some(Format::from_token(value).ok_or_else(|| syntax("expected `csv` or `json`"))?)
            }
            "json" => plan.json_ops.push(parse_json_op(value).map_err(syntax)?),
            _ => {}
        }
    }
    Ok(plan)
}

enum FilterParse {
    Syntax(&'static str),
    Regex(RefineError),
}

fn parse_filter(value: &str) -> Result<FilterSpec, FilterParse> {
    let (field, rest) = value
        .split_once(':')
        .ok_or(FilterParse::Syntax("expected `<field>:<operator><value>`"))?;
    if field.is_empty() {
        return Err(FilterParse::Syntax("empty field name"));
    }
    let operator = match rest.chars().next() {
        Some('=') => Some(Comparison::Eq),
        Some('<') => Some(Comparison::Lt),
        Some('>') => Some(Comparison::Gt),
        _ => None,
    };
    let value = if operator.is_some() { &rest[1..] } else { rest };
    if operator.is_none() {
        pattern::compile(value).map_err(|reason| {
            FilterParse::Regex(RefineError::BadRegex { pattern: String::from(value), reason })
        })?;
    }
    Ok(FilterSpec { field: String::from(field), operator, value: String::from(value) })
}

fn parse_sort(value: &str) -> Option<SortSpec> {
    let (order, rest) = value.split_once('(')?;
    let order = match order {
        "asc" => SortOrder::Asc,
        "desc" => SortOrder::Desc,
        _ => return None,
    };
    let field = rest.strip_suffix(')')?.trim();
    if field.is_empty() || field.contains(['(', ')']) {
        return None;
    }
    Some(SortSpec { order, field: String::from(field) })
}

fn parse_json_op(value: &str) -> Result<JsonOpSpec, &'static str> {
    let (op, rest) = value.split_once('(').ok_or("expected `<op>(\"<sep>\", <field>, ...)`")?;
    let op = match op.trim() {
        "array" => JsonOp::Array,
        "dict" => JsonOp::Dict,
        _ => return Err("operation must be `array` or `dict`"),
    };
    let inner = rest.trim_end().strip_suffix(')').ok_or("missing closing `)`")?;
    let quoted = inner.trim_start().strip_prefix('"').ok_or("separator must be quoted")?;
    let close = quoted.find('"').ok_or("separator quote is not closed")?;
    let separator = &quoted[..close];
    if separator.is_empty() {
        return Err("separator is empty");
    }
    let names = quoted[close + 1..]
        .trim_start()
        .strip_prefix(',')
        .ok_or("expected `,` and a field after the separator")?;
    let names = names
        .split(',')
        .map(str::trim)
        .map(|n| {
            if n.is_empty() || n.contains(['"', '(', ')']) || n.contains(char::is_whitespace) {
                Err("invalid field name")
            } else {
                Ok(String::from(n))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (field, new_fields) = names.split_first().ok_or("missing field")?;
    match (op, new_fields.len()) {
        (JsonOp::Array, 0) => {}
        (JsonOp::Array, _) => return Err("`array` takes no new field names"),
        (JsonOp::Dict, 0) => return Err("`dict` needs at least one new field name"),
        (JsonOp::Dict, _) => {}
    }
    Ok(JsonOpSpec {
        op,
        separator: String::from(separator),
        field: field.clone(),
        new_fields: new_fields.to_vec(),
    })
}

fn column_or_warn(table: &ResultTable, field: &str, what: &str) -> Option<usize> {
    let col = table.column(field);
    if col.is_none() {
        log::warn!("{what}: no field `{field}` in the result, ignoring");
    }
    col
}

/// Drops rows whose `field` is empty.
pub fn apply_require(mut table: ResultTable, field: &str) -> ResultTable {
    if let Some(col) = column_or_warn(&table, field, "require") {
        table.retain_rows(|row| !row[col].is_empty_text());
    }
    table
}

/// Keeps rows that satisfy the filter. A regex filter searches anywhere in
/// the cell; an operator filter compares typed values strictly.
pub fn apply_filter(mut table: ResultTable, spec: &FilterSpec) -> Result<ResultTable, RefineError> {
    let Some(col) = column_or_warn(&table, &spec.field, "filter") else {
        return Ok(table);
    };
    match spec.operator {
        None => {
            let re = pattern::compile(&spec.value).map_err(|reason| RefineError::BadRegex {
                pattern: spec.value.clone(),
                reason,
            })?;
            table.retain_rows(|row| row[col].as_text().is_some_and(|t| re.is_match(t)));
        }
        Some(op) => {
            let ty = table.value_type(&spec.field);
            let pivot = TypedValue::parse(ty, &spec.value)?;
            table.retain_rows(|row| {
                let Some(Ok(v)) = row[col].as_text().map(|t| TypedValue::parse(ty, t)) else {
                    return false;
                };
                let ord = v.compare(&pivot);
                match op {
                    Comparison::Eq => ord == Ordering::Equal,
                    Comparison::Lt => ord == Ordering::Less,
                    Comparison::Gt => ord == Ordering::Greater,
                }
            });
        }
    }
    Ok(table)
}

#[derive(Debug)]
enum SortKey {
    Value(TypedValue),
    Unparsed(String),
}

impl SortKey {
    fn compare(&self, other: &Self) -> Ordering {
        match (self, other) {
            (SortKey::Value(a), SortKey::Value(b)) => a.compare(b),
            (SortKey::Value(_), SortKey::Unparsed(_)) => Ordering::Less,
            (SortKey::Unparsed(_), SortKey::Value(_)) => Ordering::Greater,
            (SortKey::Unparsed(a), SortKey::Unparsed(b)) => a.cmp(b),
        }
    }
}

/// Stable sort on the typed value of `field`. Empty cells come first in
/// ascending order, text that does not parse under the type comes last.
pub fn apply_sort(mut table: ResultTable, spec: &SortSpec) -> ResultTable {
    let Some(col) = column_or_warn(&table, &spec.field, "sort") else {
        return table;
    };
    let ty = table.value_type(&spec.field);
    let key = |row: &[Cell]| match &row[col] {
        Cell::Text(t) => match TypedValue::parse(ty, t) {
            Ok(v) => SortKey::Value(v),
            Err(_) => SortKey::Unparsed(t.clone()),
        },
        _ => SortKey::Unparsed(String::new()),
    };

    let mut keyed: Vec<(SortKey, Vec<Cell>)> = table.rows().iter().map(|r| (key(r), r.clone())).collect();
    match spec.order {
        SortOrder::Asc => keyed.sort_by(|a, b| a.0.compare(&b.0)),
        SortOrder::Desc => keyed.sort_by(|a, b| b.0.compare(&a.0)),
    }

    table.retain_rows(|_| false);
    for (_, row) in keyed {
        table.push_row(row).expect("same header");
    }
    table
}

/// Splits every text cell of `field` on each `separator` into a list.
pub fn apply_json_array(mut table: ResultTable, separator: &str, field: &str) -> Result<ResultTable, RefineError> {
    let Some(col) = column_or_warn(&table, field, "json array") else {
        return Ok(table);
    };
    table.map_column(col, |cell| match cell {
        Cell::Text(t) => Ok(Cell::List(t.split(separator).map(Cell::text).collect())),
        _ => Err(RefineError::NotText(String::from(field))),
    })?;
    Ok(table)
}

/// Splits every text cell of `field` into at most `new_fields.len()` pieces
/// (leftmost separators first) and binds them to `new_fields`. Missing
/// pieces bind to empty text. List cells are transformed element-wise.
pub fn apply_json_dict(
    mut table: ResultTable,
    separator: &str,
    field: &str,
    new_fields: &[String],
) -> Result<ResultTable, RefineError> {
    let Some(col) = column_or_warn(&table, field, "json dict") else {
        return Ok(table);
    };
    let not_text = || RefineError::NotText(String::from(field));
    table.map_column(col, |cell| match cell {
        Cell::Text(t) => Ok(split_into_record(&t, separator, new_fields)),
        Cell::List(items) => items
            .into_iter()
            .map(|item| match item {
                Cell::Text(t) => Ok(split_into_record(&t, separator, new_fields)),
                _ => Err(not_text()),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Cell::List),
        Cell::Record(_) => Err(not_text()),
    })?;
    Ok(table)
}

fn split_into_record(text: &str, separator: &str, keys: &[String]) -> Cell {
    let mut pieces = text.splitn(keys.len(), separator);
    Cell::Record(
        keys.iter()
            .map(|k| (k.clone(), Cell::text(pieces.next().unwrap_or(""))))
            .collect(),
    )
}

/// RFC 4180 CSV with `\n` line ends.
pub fn serialize_csv(table: &ResultTable) -> Result<String, RefineError> {
    let mut out = String::new();
    write_csv_line(&mut out, table.header().iter().map(String::as_str));
    for row in table.rows() {
        let mut texts = Vec::with_capacity(row.len());
        for (cell, name) in row.iter().zip(table.header()) {
            texts.push(cell.as_text().ok_or_else(|| RefineError::NotText(name.clone()))?);
        }
        write_csv_line(&mut out, texts.into_iter());
    }
    Ok(out)
}

fn write_csv_line<'a>(out: &mut String, fields: impl Iterator<Item = &'a str>) {
    for (i, field) in fields.enumerate() {
        if i > 0 {
            out.push(',');
        }
        if field.contains([',', '"', '\n', '\r']) {
            out.push('"');
            out.push_str(&field.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(field);
        }
    }
    out.push('\n');
}

/// A JSON array with one object per row, keys in header order.
pub fn serialize_json(table: &ResultTable) -> String {
    serde_json::to_string_pretty(&table.json_rows()).expect("cells always serialize")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub format: Format,
    pub content_type: &'static str,
    pub body: String,
}

/// Runs a plan over a table and serializes the result.
///
/// The output format is the plan's `format` if given, else whatever the
/// `Accept` header prefers, else JSON.
pub fn apply_plan(table: ResultTable, plan: &RefinementPlan, accept: Option<&str>) -> Result<Rendered, RefineError> {
    let mut table = table;
    for field in &plan.requires {
        table = apply_require(table, field);
    }
    for filter in &plan.filters {
        table = apply_filter(table, filter)?;
    }
    for sort in &plan.sorts {
        table = apply_sort(table, sort);
    }

    let format = plan
        .format
        .or_else(|| accept.and_then(Format::from_accept))
        .unwrap_or(Format::Json);

    let body = match format {
        Format::Csv if !plan.json_ops.is_empty() => return Err(RefineError::JsonWithCsv),
        Format::Csv => serialize_csv(&table)?,
        Format::Json => {
            for op in &plan.json_ops {
                table = match op.op {
                    JsonOp::Array => apply_json_array(table, &op.separator, &op.field)?,
                    JsonOp::Dict => apply_json_dict(table, &op.separator, &op.field, &op.new_fields)?,
                };
            }
            serialize_json(&table)
        }
    };
    Ok(Rendered { format, content_type: format.content_type(), body })
}
