//! One call end to end: resolve, preprocess, substitute, dispatch, parse,
//! postprocess, refine.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use percent_encoding::{percent_decode_str, utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use serde::Serialize;

use crate::config::{ConfigDocument, HttpMethod, OperationSpec, ProcessChain};
use crate::refine::{apply_plan, parse_refinements, RefineError, JSON_CONTENT_TYPE};
use crate::router::{refinement_params, CallRequest, RouteError, RouteMatch, Router, RouterBuildError};
use crate::sparql::{parse_results, substitute, ClientError, Endpoint};
use crate::table::ResultTable;

/// Transforms the values of the named parameters; must return as many
/// values as it receives.
pub type ParamFn = Box<dyn Fn(&[String]) -> Result<Vec<String>, String> + Send + Sync>;
/// Transforms a result table given the variable names listed in the chain.
pub type TableFn = Box<dyn Fn(ResultTable, &[String]) -> Result<ResultTable, String> + Send + Sync>;

/// Named functions callable from `#preprocess` and `#postprocess`.
#[derive(Default)]
pub struct ProcessRegistry {
    param_fns: BTreeMap<String, ParamFn>,
    table_fns: BTreeMap<String, TableFn>,
}

impl fmt::Debug for ProcessRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProcessRegistry")
            .field("param_fns", &self.param_fns.keys().collect::<Vec<_>>())
            .field("table_fns", &self.table_fns.keys().collect::<Vec<_>>())
            .finish()
    }
}

/// Everything but RFC 3986 unreserved characters gets encoded.
const COMPONENT: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

pub fn percent_encode_component(s: &str) -> String {
    utf8_percent_encode(s, COMPONENT).to_string()
}

fn map_each(values: &[String], f: impl Fn(&str) -> Result<String, String>) -> Result<Vec<String>, String> {
    values.iter().map(|v| f(v)).collect()
}

impl ProcessRegistry {
    /// Registry holding the built-in parameter functions.
    pub fn with_builtins() -> Self {
        let mut registry = ProcessRegistry::default();
        register_builtins(&mut registry);
        registry
    }

    pub fn register_param(
        &mut self,
        name: impl Into<String>,
        f: impl Fn(&[String]) -> Result<Vec<String>, String> + Send + Sync + 'static,
    ) {
        self.param_fns.insert(name.into(), Box::new(f));
    }

    pub fn register_table(
        &mut self,
        name: impl Into<String>,
        f: impl Fn(ResultTable, &[String]) -> Result<ResultTable, String> + Send + Sync + 'static,
    ) {
        self.table_fns.insert(name.into(), Box::new(f));
    }

    pub fn has_param_fn(&self, name: &str) -> bool {
        self.param_fns.contains_key(name)
    }

    pub fn has_table_fn(&self, name: &str) -> bool {
        self.table_fns.contains_key(name)
    }

    /// Applies the chain left to right. Each step reads the current values
    /// of its arguments and writes the results back in place.
    pub fn run_preprocess(&self, chain: &ProcessChain, bindings: &mut [(String, String)]) -> Result<(), CallError> {
        for step in &chain.steps {
            let fail = |reason: String| CallError::Process { function: step.function.clone(), reason };
            let f = self
                .param_fns
                .get(&step.function)
                .ok_or_else(|| fail(String::from("not registered")))?;
            let slots = step
                .args
                .iter()
                .map(|arg| {
                    bindings
                        .iter()
                        .position(|(n, _)| n == arg)
                        .ok_or_else(|| fail(alloc::format!("parameter `{arg}` is not bound")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let inputs: Vec<String> = slots.iter().map(|&i| bindings[i].1.clone()).collect();
            let outputs = f(&inputs).map_err(fail)?;
            if outputs.len() != inputs.len() {
                return Err(fail(alloc::format!(
                    "returned {} values for {} arguments",
                    outputs.len(),
                    inputs.len()
                )));
            }
            for (slot, value) in slots.into_iter().zip(outputs) {
                bindings[slot].1 = value;
            }
        }
        Ok(())
    }

    pub fn run_postprocess(&self, chain: &ProcessChain, mut table: ResultTable) -> Result<ResultTable, CallError> {
        for step in &chain.steps {
            let fail = |reason: String| CallError::Process { function: step.function.clone(), reason };
            let f = self
                .table_fns
                .get(&step.function)
                .ok_or_else(|| fail(String::from("not registered")))?;
            table = f(table, &step.args).map_err(fail)?;
        }
        Ok(table)
    }
}

/// Adds `lower`, `upper`, `encode` and `decode`. Each maps its arguments
/// independently. There are no built-in table functions.
pub fn register_builtins(registry: &mut ProcessRegistry) {
    registry.register_param("lower", |v| map_each(v, |s| Ok(s.to_lowercase())));
    registry.register_param("upper", |v| map_each(v, |s| Ok(s.to_uppercase())));
    registry.register_param("encode", |v| map_each(v, |s| Ok(percent_encode_component(s))));
    registry.register_param("decode", |v| {
        map_each(v, |s| {
            percent_decode_str(s)
                .decode_utf8()
                .map(|c| c.into_owned())
                .map_err(|_| alloc::format!("`{s}` does not decode to UTF-8"))
        })
    });
}

/// Installs the functions of an addon into a registry.
pub type AddonRegistration = fn(&mut ProcessRegistry);

/// Addons an embedder makes available to `#addon`, by name.
#[derive(Debug, Clone, Default)]
pub struct AddonCatalog {
    entries: BTreeMap<String, AddonRegistration>,
}

impl AddonCatalog {
    pub fn new() -> Self {
        AddonCatalog::default()
    }

    pub fn with(mut self, name: impl Into<String>, register: AddonRegistration) -> Self {
        self.entries.insert(name.into(), register);
        self
    }

    pub fn get(&self, name: &str) -> Option<AddonRegistration> {
        self.entries.get(name).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Router(#[from] RouterBuildError),
    #[error("api `{api}` names addon `{addon}`, which is not available")]
    UnknownAddon { api: String, addon: String },
    #[error("operation `{template}` uses unknown {stage} function `{function}`")]
    UnknownFunction { template: String, stage: &'static str, function: String },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CallError {
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error("function `{function}` failed: {reason}")]
    Process { function: String, reason: String },
    #[error(transparent)]
    Client(#[from] ClientError),
}

impl CallError {
    pub fn status(&self) -> u16 {
        match self {
            CallError::Route(e) => e.status(),
            CallError::Refine(_) => 400,
            CallError::Process { .. } | CallError::Client(_) => 500,
        }
    }
}

/// Status, body and media type of a finished call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallOutcome {
    pub status: u16,
    pub body: String,
    pub content_type: String,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
    status: u16,
}

impl CallOutcome {
    pub fn ok(body: String, content_type: impl Into<String>) -> Self {
        CallOutcome { status: 200, body, content_type: content_type.into() }
    }

    /// A JSON error body, whatever format was asked for.
    pub fn error(status: u16, message: &str) -> Self {
        let body = serde_json::to_string(&ErrorBody { error: message, status }).expect("plain strings serialize");
        CallOutcome { status, body, content_type: String::from(JSON_CONTENT_TYPE) }
    }
}

impl From<CallError> for CallOutcome {
    fn from(e: CallError) -> Self {
        CallOutcome::error(e.status(), &e.to_string())
    }
}

/// A resolved call, ready to run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperationHandle {
    /// The call path, still percent-encoded.
    pub path: String,
    pub route: RouteMatch,
    pub query_params: Vec<(String, String)>,
}

/// Loaded configuration documents plus the functions they may call.
/// Immutable after construction, so calls can run concurrently.
#[derive(Debug)]
pub struct Gateway {
    router: Router,
    registry: ProcessRegistry,
}

impl Gateway {
    /// Runs every requested addon against `registry`, then checks that each
    /// function named in a process chain exists.
    pub fn new(docs: Vec<ConfigDocument>, mut registry: ProcessRegistry, catalog: &AddonCatalog) -> Result<Self, LoadError> {
        for doc in &docs {
            if let Some(addon) = &doc.api.addon {
                let register = catalog.get(addon).ok_or_else(|| LoadError::UnknownAddon {
                    api: doc.api.url.clone(),
                    addon: addon.clone(),
                })?;
                register(&mut registry);
            }
        }
        for op in docs.iter().flat_map(|d| &d.operations) {
            check_chain(op, op.preprocess.as_ref(), "preprocess", |f| registry.has_param_fn(f))?;
            check_chain(op, op.postprocess.as_ref(), "postprocess", |f| registry.has_table_fn(f))?;
        }
        Ok(Gateway { router: Router::new(docs)?, registry })
    }

    pub fn router(&self) -> &Router {
        &self.router
    }

    pub fn registry(&self) -> &ProcessRegistry {
        &self.registry
    }

    pub fn operation(&self, handle: &OperationHandle) -> &OperationSpec {
        self.router.operation(&handle.route)
    }

    /// Resolves a full call URL (path plus optional query) without regard to
    /// the method.
    pub fn get_op(&self, url: &str) -> Result<OperationHandle, CallError> {
        let request = CallRequest::from_url(url, HttpMethod::Get, None);
        let route = self.router.resolve_path(&request.full_path)?;
        Ok(OperationHandle { path: request.full_path, route, query_params: request.query_params })
    }

    /// Runs a resolved operation; 405 if `method` is not the one it accepts.
    pub fn exec<E: Endpoint + ?Sized>(
        &self,
        endpoint: &E,
        handle: &OperationHandle,
        method: HttpMethod,
        accept: Option<&str>,
    ) -> CallOutcome {
        let op = self.operation(handle);
        if op.method != method {
            let err = RouteError::MethodNotAllowed {
                path: handle.path.clone(),
                allowed: op.method,
            };
            return CallError::from(err).into();
        }
        self.run(endpoint, &handle.route, &handle.query_params, method, accept)
            .unwrap_or_else(CallOutcome::from)
    }

    pub fn exec_call<E: Endpoint + ?Sized>(&self, endpoint: &E, request: &CallRequest) -> CallOutcome {
        match self.router.resolve(request) {
            Ok(route) => self
                .run(endpoint, &route, &request.query_params, request.method, request.accept.as_deref())
                .unwrap_or_else(CallOutcome::from),
            Err(e) => CallError::from(e).into(),
        }
    }

    fn run<E: Endpoint + ?Sized>(
        &self,
        endpoint: &E,
        route: &RouteMatch,
        query_params: &[(String, String)],
        method: HttpMethod,
        accept: Option<&str>,
    ) -> Result<CallOutcome, CallError> {
        let doc = self.router.document(route.api);
        let op = self.router.operation(route);

        let plan = parse_refinements(refinement_params(query_params))?;

        let mut bindings = route.bindings.clone();
        if let Some(chain) = &op.preprocess {
            self.registry.run_preprocess(chain, &mut bindings)?;
        }
        let query = substitute(
            &op.sparql_template,
            bindings.iter().map(|(n, v)| (n.as_str(), v.as_str())),
        );
        log::debug!("dispatching to {}: {query}", doc.api.endpoint);
        let raw = endpoint.dispatch(&doc.api.endpoint, &query, method)?;
        if !(200..300).contains(&raw.status) {
            return Err(ClientError::Upstream { status: raw.status, body: raw.body }.into());
        }
        let mut table = parse_results(&raw.body, &raw.media_type, &op.field_types)?;
        if let Some(chain) = &op.postprocess {
            table = self.registry.run_postprocess(chain, table)?;
        }
        let rendered = apply_plan(table, &plan, accept)?;
        Ok(CallOutcome::ok(rendered.body, rendered.content_type))
    }
}

fn check_chain(
    op: &OperationSpec,
    chain: Option<&ProcessChain>,
    stage: &'static str,
    known: impl Fn(&str) -> bool,
) -> Result<(), LoadError> {
    let Some(chain) = chain else { return Ok(()) };
    match chain.steps.iter().find(|s| !known(&s.function)) {
        Some(step) => Err(LoadError::UnknownFunction {
            template: op.url_template.clone(),
            stage,
            function: step.function.clone(),
        }),
        None => Ok(()),
    }
}
