//! Query templating and SPARQL-results JSON decoding.
//!
//! Substitution is a raw text splice without SPARQL escaping. The parameter
//! shape regex is the only guard against injection, so config authors must
//! write shapes that exclude quotes and braces where that matters.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::Deserialize;

use crate::config::{is_identifier, HttpMethod, ValueType};
use crate::table::{Cell, ResultTable};

/// Media type asked of the endpoint.
pub const RESULTS_JSON: &str = "application/sparql-results+json";

/// Replaces each `[[name]]` whose name is bound with the bound value.
/// Single pass: text coming from a value is never re-expanded.
pub fn substitute<'a, B>(template: &str, bindings: B) -> String
where
    B: IntoIterator<Item = (&'a str, &'a str)> + Clone,
{
    let lookup = |name: &str| bindings.clone().into_iter().find(|(n, _)| *n == name).map(|(_, v)| v);
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(pos) = rest.find("[[") {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 2..];
        let hit = after
            .find("]]")
            .map(|end| &after[..end])
            .filter(|name| is_identifier(name))
            .and_then(|name| lookup(name).map(|v| (name, v)));
        match hit {
            Some((name, value)) => {
                out.push_str(value);
                rest = &after[name.len() + 2..];
            }
            None => {
                out.push('[');
                rest = &rest[pos + 1..];
            }
        }
    }
    out.push_str(rest);
    out
}

/// What came back from the endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawResponse {
    pub status: u16,
    pub media_type: String,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClientError {
    #[error("SPARQL endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("SPARQL endpoint answered {status}: {body}")]
    Upstream { status: u16, body: String },
    #[error("malformed SPARQL results: {0}")]
    Parse(String),
}

/// Sends a query to a SPARQL endpoint.
///
/// Implementations send GET requests with a `query` URL parameter and POST
/// requests with a form-encoded `query`, asking for [`RESULTS_JSON`]. They
/// must not alter the query text and must be safe to call concurrently.
pub trait Endpoint {
    fn dispatch(&self, endpoint: &str, query: &str, method: HttpMethod) -> Result<RawResponse, ClientError>;
}

impl<E: Endpoint + ?Sized> Endpoint for &E {
    fn dispatch(&self, endpoint: &str, query: &str, method: HttpMethod) -> Result<RawResponse, ClientError> {
        (**self).dispatch(endpoint, query, method)
    }
}

#[derive(Deserialize)]
struct ResultsDocument {
    #[serde(default)]
    head: Head,
    results: Option<Solutions>,
    boolean: Option<bool>,
}

#[derive(Deserialize, Default)]
struct Head {
    #[serde(default)]
    vars: Vec<String>,
}

#[derive(Deserialize)]
struct Solutions {
    bindings: Vec<BTreeMap<String, Term>>,
}

#[derive(Deserialize)]
struct Term {
    value: String,
}

/// Decodes a SPARQL-results JSON document into a table.
///
/// Header order is the reported variable order; unbound variables become
/// empty text. An ASK result becomes a single `boolean` column.
pub fn parse_results(
    body: &str,
    media_type: &str,
    field_types: &[(String, ValueType)],
) -> Result<ResultTable, ClientError> {
    let essence = media_type.split(';').next().unwrap_or("").trim();
    if !essence.is_empty() && !essence.contains("json") {
        return Err(ClientError::Parse(alloc::format!(
            "expected SPARQL-results JSON, got `{essence}`"
        )));
    }
    let doc: ResultsDocument =
        serde_json::from_str(body).map_err(|e| ClientError::Parse(e.to_string()))?;

    let mut header: Vec<String> = Vec::with_capacity(doc.head.vars.len());
    for var in doc.head.vars {
        if !header.contains(&var) {
            header.push(var);
        }
    }

    let mut table = match (doc.results, doc.boolean) {
        (Some(solutions), _) => {
            let mut table = ResultTable::new(header);
            for mut solution in solutions.bindings {
                let row = table
                    .header()
                    .iter()
                    .map(|var| Cell::Text(solution.remove(var).map(|t| t.value).unwrap_or_default()))
                    .collect();
                table.push_row(row).expect("row built from header");
            }
            table
        }
        (None, Some(answer)) => {
            let mut table = ResultTable::new(alloc::vec![String::from("boolean")]);
            table
                .push_row(alloc::vec![Cell::text(if answer { "true" } else { "false" })])
                .expect("one column");
            table
        }
        (None, None) => {
            return Err(ClientError::Parse(String::from(
                "document has neither `results` nor `boolean`",
            )))
        }
    };
    for (name, ty) in field_types {
        table.set_type(name.clone(), *ty);
    }
    Ok(table)
}
