//! Hash-format configuration documents.
//!
//! A document is a sequence of blocks, each introduced by a `#url` line at
//! column 0. The first block typed `api` describes the service; every block
//! typed `operation` declares one REST operation.

mod blocks;
mod document;
mod shape;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub use blocks::{serialize_blocks, split_blocks};
pub use document::{parse_document, ConfigDocument};
pub use shape::{parse_field_types, parse_param_shape, parse_process_chain, DEFAULT_PATTERN};

/// One `#name value` pair. `value` keeps interior newlines verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldEntry {
    pub name: String,
    pub value: String,
}

pub type Block = Vec<FieldEntry>;

/// The five value types shared by parameter shapes and `#field_type`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum ValueType {
    #[default]
    Str,
    Int,
    Float,
    Duration,
    DateTime,
}

impl ValueType {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueType::Str => "str",
            ValueType::Int => "int",
            ValueType::Float => "float",
            ValueType::Duration => "duration",
            ValueType::DateTime => "datetime",
        }
    }
}

impl FromStr for ValueType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "str" => ValueType::Str,
            "int" => ValueType::Int,
            "float" => ValueType::Float,
            "duration" => ValueType::Duration,
            "datetime" => ValueType::DateTime,
            _ => return Err(()),
        })
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HttpMethod {
    Get,
    Post,
}

impl HttpMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            HttpMethod::Get => "get",
            HttpMethod::Post => "post",
        }
    }
}

impl FromStr for HttpMethod {
    type Err = ();

    /// Case-insensitive, so HTTP verbs (`GET`) and config tokens (`get`) both parse.
    fn from_str(s: &str) -> Result<Self, ()> {
        if s.eq_ignore_ascii_case("get") {
            Ok(HttpMethod::Get)
        } else if s.eq_ignore_ascii_case("post") {
            Ok(HttpMethod::Post)
        } else {
            Err(())
        }
    }
}

impl fmt::Display for HttpMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// General information about the API (the `#type api` block).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiSpec {
    /// Path prefix every operation is mounted under, e.g. `/api/v1`.
    pub url: String,
    pub base: String,
    pub methods: Vec<HttpMethod>,
    pub title: String,
    pub description: String,
    pub version: String,
    pub license: String,
    pub contacts: String,
    pub endpoint: String,
    pub addon: Option<String>,
    /// Recognized fields that do not belong in an api block.
    pub extra: Vec<FieldEntry>,
}

/// Type and textual form a path parameter must have.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamShape {
    pub name: String,
    pub value_type: ValueType,
    pub pattern: String,
}

impl ParamShape {
    pub fn new(name: impl Into<String>) -> Self {
        ParamShape {
            name: name.into(),
            value_type: ValueType::Str,
            pattern: String::from(DEFAULT_PATTERN),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessStep {
    pub function: String,
    pub args: Vec<String>,
}

/// Functions separated by `-->`, applied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProcessChain {
    pub steps: Vec<ProcessStep>,
}

impl ProcessChain {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationSpec {
    pub url_template: String,
    /// One shape per `{name}` placeholder, in template order.
    pub params: Vec<ParamShape>,
    pub preprocess: Option<ProcessChain>,
    pub postprocess: Option<ProcessChain>,
    pub method: HttpMethod,
    pub description: String,
    pub field_types: Vec<(String, ValueType)>,
    pub call_example: String,
    pub output_json_example: String,
    /// Query text with `[[name]]` placeholders.
    pub sparql_template: String,
    pub extra: Vec<FieldEntry>,
}

impl OperationSpec {
    pub fn param(&self, name: &str) -> Option<&ParamShape> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn field_type(&self, name: &str) -> ValueType {
        self.field_types
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| *t)
            .unwrap_or_default()
    }
}

/// A configuration error, located by block index (0-based, document order)
/// and field name where that makes sense.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}{kind}", location(*.block, .field.as_deref()))]
pub struct ConfigError {
    pub block: Option<usize>,
    pub field: Option<String>,
    pub kind: ConfigErrorKind,
}

fn location(block: Option<usize>, field: Option<&str>) -> String {
    match (block, field) {
        (Some(b), Some(f)) => alloc::format!("block {b}, field `#{f}`: "),
        (Some(b), None) => alloc::format!("block {b}: "),
        (None, Some(f)) => alloc::format!("field `#{f}`: "),
        (None, None) => String::new(),
    }
}

impl ConfigError {
    pub(crate) fn new(kind: ConfigErrorKind) -> Self {
        ConfigError { block: None, field: None, kind }
    }

    pub(crate) fn at(block: usize, field: &str, kind: ConfigErrorKind) -> Self {
        ConfigError {
            block: Some(block),
            field: Some(String::from(field)),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigErrorKind {
    #[error("document is empty")]
    EmptyDocument,
    #[error("no block has `#type api`")]
    MissingApiBlock,
    #[error("`#url` must be the first field of every block")]
    UrlNotFirst,
    #[error("unexpected content before the first `#url` line: {0:?}")]
    StrayContent(String),
    #[error("unknown block type `{0}`")]
    UnknownType(String),
    #[error("field appears more than once in the block")]
    DuplicateField,
    #[error("required field is missing")]
    MissingField,
    #[error("invalid parameter shape: {0}")]
    BadParamShape(String),
    #[error("invalid process chain: {0}")]
    BadProcessChain(String),
    #[error("invalid field type list: {0}")]
    BadFieldType(String),
    #[error("invalid method `{0}`")]
    BadMethod(String),
    #[error("method `{0}` is not among the api block's methods")]
    MethodNotDeclared(String),
    #[error("invalid url: {0}")]
    BadUrl(String),
    #[error("placeholder `[[{0}]]` names no path parameter")]
    UndeclaredPlaceholder(String),
    #[error("`{0}` is not a path parameter of the operation")]
    UnknownParameter(String),
    #[error("`{0}` is not listed in `#field_type`")]
    UnknownVariable(String),
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
