//! A local mock SPARQL endpoint and the citations fixture, for hermetic
//! end-to-end tests.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use axum::extract::{Form, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use serde_json::{json, Map, Value};
use sparqlrest_core::sparql::RESULTS_JSON;
use sparqlrest_core::{substitute, HttpMethod};

use crate::server::RunningServer;

#[derive(Debug, Clone)]
pub enum QueryMatcher {
    Exact(String),
    Pattern(regex::Regex),
}

impl QueryMatcher {
    pub fn matches(&self, query: &str) -> bool {
        match self {
            QueryMatcher::Exact(text) => text == query,
            QueryMatcher::Pattern(re) => re.is_match(query),
        }
    }
}

/// A canned answer for queries that satisfy the matcher.
#[derive(Debug, Clone)]
pub struct MockRule {
    pub matcher: QueryMatcher,
    pub status: u16,
    pub body: String,
}

impl MockRule {
    pub fn exact(query: impl Into<String>, body: impl Into<String>) -> Self {
        MockRule { matcher: QueryMatcher::Exact(query.into()), status: 200, body: body.into() }
    }

    /// Panics on an invalid pattern; rules are written by tests.
    pub fn pattern(pattern: &str, body: impl Into<String>) -> Self {
        let re = regex::Regex::new(pattern).unwrap_or_else(|e| panic!("bad rule pattern `{pattern}`: {e}"));
        MockRule { matcher: QueryMatcher::Pattern(re), status: 200, body: body.into() }
    }

    pub fn with_status(mut self, status: u16) -> Self {
        self.status = status;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReceivedQuery {
    pub method: HttpMethod,
    pub query: String,
}

struct MockState {
    rules: Vec<MockRule>,
    received: Mutex<Vec<ReceivedQuery>>,
}

/// SPARQL protocol endpoint on a loopback port. The first matching rule
/// answers; a query no rule matches gets a 400.
pub struct MockEndpoint {
    state: Arc<MockState>,
    server: RunningServer,
}

const SPARQL_PATH: &str = "/sparql";

impl MockEndpoint {
    pub fn start(rules: Vec<MockRule>) -> std::io::Result<Self> {
        let state = Arc::new(MockState { rules, received: Mutex::new(Vec::new()) });
        let router = Router::new()
            .route(SPARQL_PATH, get(query_by_get).post(query_by_post))
            .with_state(Arc::clone(&state));
        let server = RunningServer::spawn(router, "127.0.0.1:0")?;
        Ok(MockEndpoint { state, server })
    }

    /// The endpoint URL to put in `#endpoint`.
    pub fn url(&self) -> String {
        format!("{}{SPARQL_PATH}", self.server.base_url())
    }

    /// Queries seen so far, in arrival order.
    pub fn received(&self) -> Vec<ReceivedQuery> {
        self.state.received.lock().expect("mock state poisoned").clone()
    }
}

async fn query_by_get(State(state): State<Arc<MockState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    answer(&state, HttpMethod::Get, params.get("query"))
}

async fn query_by_post(State(state): State<Arc<MockState>>, Form(params): Form<HashMap<String, String>>) -> Response {
    answer(&state, HttpMethod::Post, params.get("query"))
}

fn answer(state: &MockState, method: HttpMethod, query: Option<&String>) -> Response {
    let Some(query) = query else {
        return (StatusCode::BAD_REQUEST, "missing `query` parameter").into_response();
    };
    state
        .received
        .lock()
        .expect("mock state poisoned")
        .push(ReceivedQuery { method, query: query.clone() });
    match state.rules.iter().find(|r| r.matcher.matches(query)) {
        Some(rule) => {
            let status = StatusCode::from_u16(rule.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            let content_type = if status.is_success() { RESULTS_JSON } else { "text/plain" };
            (status, [(header::CONTENT_TYPE, content_type)], rule.body.clone()).into_response()
        }
        None => (StatusCode::BAD_REQUEST, format!("no rule matches query:\n{query}")).into_response(),
    }
}

/// A SPARQL-results JSON document. `None` leaves a variable unbound.
pub fn results_json(vars: &[&str], rows: &[&[Option<&str>]]) -> String {
    let bindings: Vec<Value> = rows
        .iter()
        .map(|row| {
            let solution: Map<String, Value> = vars
                .iter()
                .zip(row.iter())
                .filter_map(|(var, value)| value.map(|v| ((*var).to_owned(), json!({"type": "literal", "value": v}))))
                .collect();
            Value::Object(solution)
        })
        .collect();
    json!({"head": {"vars": vars}, "results": {"bindings": bindings}}).to_string()
}

/// Stands in for the endpoint URL in [`Fixture::config`].
pub const ENDPOINT_PLACEHOLDER: &str = "http://127.0.0.1:9/sparql";

pub const CITED_DOI: &str = "10.1108/jd-12-2013-0166";
pub const CITING_DOI: &str = "10.3233/ds-190019";

/// Config text plus the mock rules that answer its queries.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub config: String,
    pub rules: Vec<MockRule>,
}

impl Fixture {
    pub fn config_for(&self, endpoint: &str) -> String {
        self.config.replace(ENDPOINT_PLACEHOLDER, endpoint)
    }
}

const CITATIONS_SPARQL: &str = r#"PREFIX cito: <http://purl.org/spar/cito/>
PREFIX prism: <http://prismstandard.org/namespaces/basic/2.0/>
# DOIs are stored in lower case
SELECT ?citing ?cited WHERE {
  ?citation cito:hasCitingEntity ?citing_work ;
            cito:hasCitedEntity ?cited_work .
  ?cited_work prism:doi "[[doi]]" .
  ?citing_work prism:doi ?citing .
  BIND("[[doi]]" AS ?cited)
}"#;

const DATED_SPARQL: &str = r#"PREFIX cito: <http://purl.org/spar/cito/>
PREFIX prism: <http://prismstandard.org/namespaces/basic/2.0/>
SELECT ?citing ?cited ?creation WHERE {
  ?citation cito:hasCitingEntity ?citing_work ;
            cito:hasCitedEntity ?cited_work .
  ?cited_work prism:doi "[[doi]]" .
  ?citing_work prism:doi ?citing .
  OPTIONAL { ?citation cito:hasCitationCreationDate ?creation }
  BIND("[[doi]]" AS ?cited)
}"#;

const REFERENCES_SPARQL: &str = r#"PREFIX cito: <http://purl.org/spar/cito/>
PREFIX prism: <http://prismstandard.org/namespaces/basic/2.0/>
SELECT ?citing ?cited WHERE {
  ?citing_work prism:doi "[{doi}]" ;
               cito:cites ?cited_work .
  ?cited_work prism:doi ?cited .
  BIND("[{doi}]" AS ?citing)
}"#;

/// The running example: citations of a DOI, served at `/api/v1`.
///
/// * `/citations/{doi}` lower-cases the DOI and returns `citing`, `cited`.
/// * `/citations-dated/{doi}` adds a datetime `creation` column.
/// * `/references/{doi}` is POST only.
pub fn fixture_citations() -> Fixture {
    let config = format!(
        r#"#url /api/v1
#type api
#base https://example.org/index
#method get post
#title Citation index REST API
#description Citation data between works identified by **DOI**. Every operation
returns one row per citation.
#version 1.0.0
#license Data under [CC0](https://creativecommons.org/publicdomain/zero/1.0/).
#contacts mailto:index@example.org
#endpoint {ENDPOINT_PLACEHOLDER}

#url /citations/{{doi}}
#type operation
#doi str(10\..+)
#preprocess lower(doi)
#method get
#description Works citing the given DOI. The DOI is matched in lower case.
#field_type str(citing) str(cited)
#call /api/v1/citations/{CITED_DOI}
#output_json [{{"citing": "10.3233/ds-190019", "cited": "10.1108/jd-12-2013-0166"}}, {{"citing": "10.3233/sw-160224", "cited": "10.1108/jd-12-2013-0166"}}]
#sparql {CITATIONS_SPARQL}

#url /citations-dated/{{doi}}
#type operation
#doi str(10\..+)
#description Like `/citations`, plus the creation date of each citation.
#field_type str(citing) str(cited) datetime(creation)
#call /api/v1/citations-dated/{CITED_DOI}
#sparql {DATED_SPARQL}

#url /references/{{doi}}
#type operation
#doi str(10\.[0-9]+/[^\s]+)
#method post
#description Works cited by the given DOI.
#field_type str(citing) str(cited)
#call /api/v1/references/{CITING_DOI}
#sparql {REFERENCES_SPARQL}
"#
    );

    let citations_query = substitute(CITATIONS_SPARQL, [("doi", CITED_DOI)]);
    let citing_rows = results_json(
        &["citing", "cited"],
        &[&[Some("10.3233/ds-190019"), Some(CITED_DOI)], &[Some("10.3233/sw-160224"), Some(CITED_DOI)]],
    );
    let dated = results_json(
        &["citing", "cited", "creation"],
        &[
            &[Some("10.3233/ds-190019"), Some(CITED_DOI), Some("2019-08-08")],
            &[Some("10.3233/sw-160224"), Some(CITED_DOI), Some("2016-04-30")],
            &[Some("10.1007/s11192-019-03217-6"), Some(CITED_DOI), None],
            &[Some("10.1162/qss_a_00023"), Some(CITED_DOI), Some("2016-05-01")],
            &[Some("10.7717/peerj-cs.421"), Some(CITED_DOI), Some("2016-06-01")],
        ],
    );
    let references = results_json(
        &["citing", "cited"],
        &[&[Some(CITING_DOI), Some(CITED_DOI)], &[Some(CITING_DOI), Some("10.1016/j.websem.2012.08.001")]],
    );
    let rules = vec![
        MockRule::exact(citations_query, citing_rows),
        MockRule::pattern(r#"\?creation[\s\S]*prism:doi "10\.1108/jd-12-2013-0166""#, dated),
        MockRule::pattern(r"SELECT \?citing \?cited \?creation", results_json(&["citing", "cited", "creation"], &[])),
        MockRule::pattern(r#"prism:doi "10\.3233/ds-190019" ;"#, references),
        MockRule::pattern(r"SELECT \?citing \?cited WHERE", results_json(&["citing", "cited"], &[])),
    ];
    Fixture { config, rules }
}
