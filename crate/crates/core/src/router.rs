//! Maps call URLs onto operations.

use alloc::borrow::Cow;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use percent_encoding::percent_decode_str;
use regex_automata::meta::Regex;

use crate::config::{ConfigDocument, HttpMethod, OperationSpec, ParamShape, ValueType};
use crate::pattern;
use crate::refine::REFINEMENT_KEYS;
use crate::value::TypedValue;

/// One incoming call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallRequest {
    /// API base plus operation path, still percent-encoded.
    pub full_path: String,
    /// Query parameters in URL order, duplicates kept.
    pub query_params: Vec<(String, String)>,
    pub method: HttpMethod,
    pub accept: Option<String>,
}

impl CallRequest {
    /// Splits `path?query` into a request.
    pub fn from_url(url: &str, method: HttpMethod, accept: Option<&str>) -> Self {
        let (path, query) = url.split_once('?').unwrap_or((url, ""));
        CallRequest {
            full_path: String::from(path),
            query_params: parse_query(query),
            method,
            accept: accept.map(String::from),
        }
    }

    pub fn refinement_params(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        refinement_params(&self.query_params)
    }
}

/// The refinement parameters, in URL order. Other keys are logged and dropped.
pub fn refinement_params(params: &[(String, String)]) -> impl Iterator<Item = (&str, &str)> + '_ {
    params.iter().filter_map(|(k, v)| {
        if REFINEMENT_KEYS.contains(&k.as_str()) {
            Some((k.as_str(), v.as_str()))
        } else {
            log::warn!("ignoring query parameter `{k}`");
            None
        }
    })
}

/// Splits a query string into percent-decoded pairs. `+` is kept literally
/// so regular expressions such as `^20.+` survive unencoded.
pub fn parse_query(query: &str) -> Vec<(String, String)> {
    query
        .split('&')
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
            (decode_lossy(k), decode_lossy(v))
        })
        .collect()
}

fn decode_lossy(s: &str) -> String {
    percent_decode_str(s).decode_utf8_lossy().into_owned()
}

/// Anchored regex for one operation path: the API base and the template's
/// literal text matched verbatim, each `{name}` replaced by a capture of the
/// parameter's pattern. Captures may span `/`.
#[derive(Debug, Clone)]
pub struct PathMatcher {
    regex: Regex,
    names: Vec<String>,
}

pub fn compile_matcher(api_base: &str, template: &str, params: &[ParamShape]) -> Result<PathMatcher, String> {
    let mut source = String::from("^");
    source.push_str(&pattern::escape(api_base));
    let mut names = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        source.push_str(&pattern::escape(&rest[..open]));
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or_else(|| alloc::format!("unclosed `{{` in `{template}`"))?;
        let name = &after[..close];
        let shape = params
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| alloc::format!("no shape for parameter `{name}`"))?;
        source.push_str(&alloc::format!(
            "(?P<__param_{}>(?:{}))",
            names.len(),
            pattern::strip_anchors(&shape.pattern)
        ));
        names.push(String::from(name));
        rest = &after[close + 1..];
    }
    source.push_str(&pattern::escape(rest));
    source.push('$');
    let regex = pattern::compile(&source)?;
    Ok(PathMatcher { regex, names })
}

impl PathMatcher {
    /// Raw (still encoded) captured values, in template order.
    pub fn captures(&self, path: &str) -> Option<Vec<(String, String)>> {
        let mut caps = self.regex.create_captures();
        self.regex.captures(path, &mut caps);
        if !caps.is_match() {
            return None;
        }
        self.names
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let span = caps.get_group_by_name(&alloc::format!("__param_{i}"))?;
                Some((name.clone(), String::from(&path[span.range()])))
            })
            .collect()
    }
}

/// The operation a call resolved to, with its decoded and type-checked
/// parameter values in template order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteMatch {
    pub api: usize,
    pub operation: usize,
    pub bindings: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RouteError {
    #[error("no operation matches `{0}`")]
    NotFound(String),
    #[error("`{path}` only accepts {allowed}")]
    MethodNotAllowed { path: String, allowed: HttpMethod },
    #[error("parameter `{param}`: `{value}` is not a valid {value_type}")]
    TypeMismatch { param: String, value: String, value_type: ValueType },
    #[error("parameter `{param}` is not valid percent-encoded UTF-8")]
    BadEncoding { param: String },
}

impl RouteError {
    pub fn status(&self) -> u16 {
        match self {
            RouteError::NotFound(_) => 404,
            RouteError::MethodNotAllowed { .. } => 405,
            RouteError::TypeMismatch { .. } | RouteError::BadEncoding { .. } => 400,
        }
    }
}

/// Checks that an already pattern-matched value also parses under the
/// parameter's declared type.
pub fn coerce_binding(name: &str, raw: &str, shape: &ParamShape) -> Result<(), RouteError> {
    TypedValue::parse(shape.value_type, raw).map(|_| ()).map_err(|_| RouteError::TypeMismatch {
        param: String::from(name),
        value: String::from(raw),
        value_type: shape.value_type,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RouterBuildError {
    #[error("two configurations share the api base `{0}`")]
    DuplicateBase(String),
    #[error("operation `{template}`: {reason}")]
    Matcher { template: String, reason: String },
}

#[derive(Debug, Clone)]
struct CompiledApi {
    doc: ConfigDocument,
    matchers: Vec<PathMatcher>,
}

/// Route space over one or more configuration documents. Each document is
/// mounted under its api base; the longest matching base serves a call.
#[derive(Debug, Clone)]
pub struct Router {
    apis: Vec<CompiledApi>,
}

impl Router {
    pub fn new(docs: Vec<ConfigDocument>) -> Result<Self, RouterBuildError> {
        let mut apis: Vec<CompiledApi> = Vec::with_capacity(docs.len());
        for doc in docs {
            if apis.iter().any(|a| a.doc.api.url == doc.api.url) {
                return Err(RouterBuildError::DuplicateBase(doc.api.url));
            }
            let matchers = doc
                .operations
                .iter()
                .map(|op| {
                    compile_matcher(&doc.api.url, &op.url_template, &op.params).map_err(|reason| {
                        RouterBuildError::Matcher { template: op.url_template.clone(), reason }
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            apis.push(CompiledApi { doc, matchers });
        }
        Ok(Router { apis })
    }

    pub fn documents(&self) -> impl ExactSizeIterator<Item = &ConfigDocument> {
        self.apis.iter().map(|a| &a.doc)
    }

    pub fn document(&self, api: usize) -> &ConfigDocument {
        &self.apis[api].doc
    }

    pub fn operation(&self, m: &RouteMatch) -> &OperationSpec {
        &self.apis[m.api].doc.operations[m.operation]
    }

    /// Index of the document whose api base is the longest segment-aligned
    /// prefix of `path`.
    pub fn api_for(&self, path: &str) -> Option<usize> {
        self.apis
            .iter()
            .enumerate()
            .filter(|(_, a)| {
                let base = a.doc.api.url.as_str();
                path.strip_prefix(base)
                    .is_some_and(|rest| rest.is_empty() || rest.starts_with('/'))
            })
            .max_by_key(|(_, a)| a.doc.api.url.len())
            .map(|(i, _)| i)
    }

    /// Finds the first operation (document order) whose template matches,
    /// ignoring the method. Bindings are decoded and type-checked.
    pub fn resolve_path(&self, path: &str) -> Result<RouteMatch, RouteError> {
        let not_found = || RouteError::NotFound(String::from(path));
        let api = self.api_for(path).ok_or_else(not_found)?;
        let compiled = &self.apis[api];
        let (operation, raw) = compiled
            .matchers
            .iter()
            .enumerate()
            .find_map(|(i, m)| m.captures(path).map(|c| (i, c)))
            .ok_or_else(not_found)?;
        let spec = &compiled.doc.operations[operation];

        let mut bindings = Vec::with_capacity(raw.len());
        for (name, value) in raw {
            let decoded = match percent_decode_str(&value).decode_utf8() {
                Ok(Cow::Borrowed(s)) => String::from(s),
                Ok(Cow::Owned(s)) => s,
                Err(_) => return Err(RouteError::BadEncoding { param: name }),
            };
            let shape = spec.param(&name).expect("matcher built from the same params");
            coerce_binding(&name, &decoded, shape)?;
            bindings.push((name, decoded));
        }
        Ok(RouteMatch { api, operation, bindings })
    }

    /// Resolves a call: 404 when nothing matches, 405 when the first
    /// matching operation expects another method, 400 on a type mismatch.
    pub fn resolve(&self, request: &CallRequest) -> Result<RouteMatch, RouteError> {
        let api = self
            .api_for(&request.full_path)
            .ok_or_else(|| RouteError::NotFound(request.full_path.clone()))?;
        let compiled = &self.apis[api];
        let first = compiled
            .matchers
            .iter()
            .position(|m| m.captures(&request.full_path).is_some())
            .ok_or_else(|| RouteError::NotFound(request.full_path.clone()))?;
        let allowed = compiled.doc.operations[first].method;
        if allowed != request.method {
            return Err(RouteError::MethodNotAllowed { path: request.full_path.to_string(), allowed });
        }
        self.resolve_path(&request.full_path)
    }
}
