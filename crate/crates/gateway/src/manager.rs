//! Embeddable entry point: load configuration files, resolve call URLs and
//! run them.

use std::path::{Path, PathBuf};

use sparqlrest_core::pipeline::OperationHandle;
use sparqlrest_core::refine::{CSV_CONTENT_TYPE, JSON_CONTENT_TYPE};
use sparqlrest_core::{
    parse_document, AddonCatalog, CallError, CallOutcome, CallRequest, ConfigDocument, ConfigError, Endpoint,
    Gateway, HttpMethod, LoadError, ProcessRegistry, RefineError, RefinementPlan, RouteError,
};

use crate::client::HttpEndpoint;
use crate::stats::CallStats;

#[derive(Debug, thiserror::Error)]
pub enum ManagerError {
    #[error("cannot read `{}`: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{origin}: {source}")]
    Config { origin: String, source: ConfigError },
    #[error(transparent)]
    Load(#[from] LoadError),
}

/// Loaded APIs, the endpoint client they share, and call counters.
pub struct ApiManager {
    gateway: Gateway,
    endpoint: Box<dyn Endpoint + Send + Sync>,
    stats: CallStats,
}

impl std::fmt::Debug for ApiManager {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ApiManager").field("gateway", &self.gateway).finish_non_exhaustive()
    }
}

impl ApiManager {
    pub fn new(
        docs: Vec<ConfigDocument>,
        catalog: &AddonCatalog,
        endpoint: impl Endpoint + Send + Sync + 'static,
    ) -> Result<Self, ManagerError> {
        let gateway = Gateway::new(docs, ProcessRegistry::with_builtins(), catalog)?;
        let stats = CallStats::new(gateway.router().documents().map(|d| d.operations.len()));
        Ok(ApiManager { gateway, endpoint: Box::new(endpoint), stats })
    }

    /// Parses each text as a configuration document. Fails on the first
    /// invalid one.
    pub fn from_sources<S: AsRef<str>>(
        sources: &[S],
        catalog: &AddonCatalog,
        endpoint: impl Endpoint + Send + Sync + 'static,
    ) -> Result<Self, ManagerError> {
        let docs = sources
            .iter()
            .enumerate()
            .map(|(i, s)| {
                parse_document(s.as_ref()).map_err(|source| ManagerError::Config { origin: format!("document {}", i + 1), source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        ApiManager::new(docs, catalog, endpoint)
    }

    /// Reads configuration files and talks to their endpoints over HTTP,
    /// with no addons.
    pub fn from_paths<P: AsRef<Path>>(paths: &[P]) -> Result<Self, ManagerError> {
        ApiManager::from_paths_with(paths, &AddonCatalog::new(), HttpEndpoint::default())
    }

    pub fn from_paths_with<P: AsRef<Path>>(
        paths: &[P],
        catalog: &AddonCatalog,
        endpoint: impl Endpoint + Send + Sync + 'static,
    ) -> Result<Self, ManagerError> {
        let docs = paths
            .iter()
            .map(|p| {
                let path = p.as_ref();
                let text = std::fs::read_to_string(path).map_err(|source| ManagerError::Io { path: path.into(), source })?;
                parse_document(&text).map_err(|source| ManagerError::Config { origin: path.display().to_string(), source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        ApiManager::new(docs, catalog, endpoint)
    }

    pub fn gateway(&self) -> &Gateway {
        &self.gateway
    }

    pub fn documents(&self) -> impl ExactSizeIterator<Item = &ConfigDocument> {
        self.gateway.router().documents()
    }

    pub fn stats(&self) -> &CallStats {
        &self.stats
    }

    /// Resolves `<api base><operation path>[?refinements]`.
    pub fn get_op(&self, url: &str) -> Result<Operation<'_>, RouteError> {
        match self.gateway.get_op(url) {
            Ok(handle) => Ok(Operation { manager: self, handle }),
            Err(CallError::Route(e)) => Err(e),
            Err(other) => unreachable!("resolution only fails with routing errors: {other}"),
        }
    }

    /// Runs a call and counts it on the dashboard.
    pub fn call(&self, request: &CallRequest) -> CallOutcome {
        let outcome = self.gateway.exec_call(&*self.endpoint, request);
        let operation = self.gateway.router().resolve_path(&request.full_path).ok().map(|m| (m.api, m.operation));
        self.stats.record_call(operation, outcome.status);
        outcome
    }
}

/// One resolved call. Can be run any number of times.
#[derive(Debug, Clone)]
pub struct Operation<'m> {
    manager: &'m ApiManager,
    handle: OperationHandle,
}

/// `csv` and `json` stand for their media types; anything else is taken as
/// an `Accept` header value.
fn accept_for(content_type: &str) -> &str {
    match content_type.trim().to_ascii_lowercase().as_str() {
        "csv" => CSV_CONTENT_TYPE,
        "json" => JSON_CONTENT_TYPE,
        _ => content_type,
    }
}

impl Operation<'_> {
    pub fn handle(&self) -> &OperationHandle {
        &self.handle
    }

    /// The refinements carried by the call URL.
    pub fn refinements(&self) -> Result<RefinementPlan, RefineError> {
        sparqlrest_core::parse_refinements(sparqlrest_core::router::refinement_params(&self.handle.query_params))
    }

    /// Runs the call. `content_type` (`csv` or `json`) is the preferred
    /// format unless the URL carries `format=`.
    pub fn exec(&self, method: &str, content_type: &str) -> (u16, String) {
        let outcome = match method.parse::<HttpMethod>() {
            Ok(method) => self.exec_outcome(method, Some(accept_for(content_type))),
            Err(_) => CallOutcome::error(405, &format!("unsupported method `{method}`")),
        };
        (outcome.status, outcome.body)
    }

    pub fn exec_outcome(&self, method: HttpMethod, accept: Option<&str>) -> CallOutcome {
        let m = self.manager;
        m.gateway.exec(&*m.endpoint, &self.handle, method, accept)
    }
}
