use alloc::string::String;
use alloc::vec::Vec;

use super::blocks::template_params;
use super::{
    is_identifier, parse_field_types, parse_param_shape, parse_process_chain, serialize_blocks,
    split_blocks, ApiSpec, Block, ConfigError, ConfigErrorKind, FieldEntry, HttpMethod,
    OperationSpec, ParamShape,
};

const API_FIELDS: &[&str] = &[
    "url",
    "type",
    "base",
    "method",
    "title",
    "description",
    "version",
    "license",
    "contacts",
    "endpoint",
    "addon",
];

const OPERATION_FIELDS: &[&str] = &[
    "url",
    "type",
    "preprocess",
    "postprocess",
    "method",
    "description",
    "field_type",
    "call",
    "output_json",
    "sparql",
];

/// A parsed configuration document. `blocks` keeps the raw fields so the
/// document can be written back verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigDocument {
    pub api: ApiSpec,
    pub operations: Vec<OperationSpec>,
    pub blocks: Vec<Block>,
}

impl ConfigDocument {
    pub fn to_hash_format(&self) -> String {
        serialize_blocks(&self.blocks)
    }
}

/// Parses and validates a whole configuration document.
pub fn parse_document(text: &str) -> Result<ConfigDocument, ConfigError> {
    if text.trim().is_empty() {
        return Err(ConfigError::new(ConfigErrorKind::EmptyDocument));
    }
    let blocks = split_blocks(text)?;

    let mut api_index = None;
    let mut op_indices = Vec::new();
    for (i, block) in blocks.iter().enumerate() {
        check_duplicates(i, block)?;
        let ty = lookup(block, "type")
            .ok_or_else(|| ConfigError::at(i, "type", ConfigErrorKind::MissingField))?;
        match ty {
            "api" if api_index.is_none() => api_index = Some(i),
            "api" => log::warn!("block {i}: ignoring additional api block"),
            "operation" => op_indices.push(i),
            other => {
                return Err(ConfigError::at(
                    i,
                    "type",
                    ConfigErrorKind::UnknownType(String::from(other)),
                ))
            }
        }
    }

    let api_index = api_index.ok_or_else(|| ConfigError::new(ConfigErrorKind::MissingApiBlock))?;
    let api = parse_api(api_index, &blocks[api_index])?;
    let operations = op_indices
        .into_iter()
        .map(|i| parse_operation(i, &blocks[i], &api))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(ConfigDocument { api, operations, blocks })
}

fn lookup<'a>(block: &'a Block, name: &str) -> Option<&'a str> {
    block.iter().find(|f| f.name == name).map(|f| f.value.as_str())
}

fn text(block: &Block, name: &str) -> String {
    String::from(lookup(block, name).unwrap_or(""))
}

fn check_duplicates(index: usize, block: &Block) -> Result<(), ConfigError> {
    for (i, field) in block.iter().enumerate() {
        if block[..i].iter().any(|f| f.name == field.name) {
            return Err(ConfigError::at(index, &field.name, ConfigErrorKind::DuplicateField));
        }
    }
    Ok(())
}

fn extras(index: usize, block: &Block, allowed: impl Fn(&str) -> bool) -> Vec<FieldEntry> {
    block
        .iter()
        .filter(|f| !allowed(&f.name))
        .inspect(|f| log::warn!("block {index}: field `#{}` is not used here", f.name))
        .cloned()
        .collect()
}

fn parse_api(index: usize, block: &Block) -> Result<ApiSpec, ConfigError> {
    let url = text(block, "url");
    if !url.starts_with('/')
        || url.len() < 2
        || url.ends_with('/')
        || url.contains(|c: char| c.is_whitespace() || matches!(c, '{' | '}' | '?' | '#'))
    {
        return Err(ConfigError::at(
            index,
            "url",
            ConfigErrorKind::BadUrl(alloc::format!(
                "api base `{url}` must start with `/`, not end with `/`, and hold no placeholders"
            )),
        ));
    }

    let endpoint = lookup(block, "endpoint")
        .ok_or_else(|| ConfigError::at(index, "endpoint", ConfigErrorKind::MissingField))?;
    if !is_absolute_url(endpoint) {
        return Err(ConfigError::at(
            index,
            "endpoint",
            ConfigErrorKind::BadUrl(alloc::format!("`{endpoint}` is not an absolute URL")),
        ));
    }

    let methods = match lookup(block, "method") {
        None => alloc::vec![HttpMethod::Get, HttpMethod::Post],
        Some(value) => {
            let mut methods = Vec::new();
            for token in value.split_whitespace() {
                let m: HttpMethod = token.parse().map_err(|_| {
                    ConfigError::at(index, "method", ConfigErrorKind::BadMethod(String::from(token)))
                })?;
                if !methods.contains(&m) {
                    methods.push(m);
                }
            }
            if methods.is_empty() {
                return Err(ConfigError::at(
                    index,
                    "method",
                    ConfigErrorKind::BadMethod(String::new()),
                ));
            }
            methods
        }
    };

    Ok(ApiSpec {
        url,
        base: text(block, "base"),
        methods,
        title: text(block, "title"),
        description: text(block, "description"),
        version: text(block, "version"),
        license: text(block, "license"),
        contacts: text(block, "contacts"),
        endpoint: String::from(endpoint),
        addon: lookup(block, "addon").map(String::from),
        extra: extras(index, block, |n| API_FIELDS.contains(&n)),
    })
}

fn parse_operation(index: usize, block: &Block, api: &ApiSpec) -> Result<OperationSpec, ConfigError> {
    let at = |field: &str, kind| ConfigError::at(index, field, kind);

    let url_template = text(block, "url");
    let names = template_params(&url_template);
    check_template(&url_template, &names).map_err(|m| at("url", ConfigErrorKind::BadUrl(m)))?;

    let params = names
        .iter()
        .map(|name| match lookup(block, name) {
            Some(shape) => parse_param_shape(shape)
                .map(|s| ParamShape { name: name.clone(), ..s })
                .map_err(|e| at(name, e.kind)),
            None => Ok(ParamShape::new(name.clone())),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let method = match lookup(block, "method") {
        None => HttpMethod::Get,
        Some(value) => {
            let m: HttpMethod = value
                .parse()
                .map_err(|_| at("method", ConfigErrorKind::BadMethod(String::from(value))))?;
            if !api.methods.contains(&m) {
                return Err(at("method", ConfigErrorKind::MethodNotDeclared(String::from(value))));
            }
            m
        }
    };

    let field_types = match lookup(block, "field_type") {
        Some(v) => parse_field_types(v).map_err(|e| at("field_type", e.kind))?,
        None => Vec::new(),
    };

    let preprocess = match lookup(block, "preprocess") {
        Some(v) => {
            let chain = parse_process_chain(v).map_err(|e| at("preprocess", e.kind))?;
            for step in &chain.steps {
                if step.args.is_empty() {
                    return Err(at(
                        "preprocess",
                        ConfigErrorKind::BadProcessChain(alloc::format!(
                            "`{}` takes no parameter",
                            step.function
                        )),
                    ));
                }
                if let Some(arg) = step.args.iter().find(|a| !names.contains(a)) {
                    return Err(at("preprocess", ConfigErrorKind::UnknownParameter(arg.clone())));
                }
            }
            Some(chain)
        }
        None => None,
    };

    let postprocess = match lookup(block, "postprocess") {
        Some(v) => {
            let chain = parse_process_chain(v).map_err(|e| at("postprocess", e.kind))?;
            for arg in chain.steps.iter().flat_map(|s| &s.args) {
                if !field_types.iter().any(|(n, _)| n == arg) {
                    return Err(at("postprocess", ConfigErrorKind::UnknownVariable(arg.clone())));
                }
            }
            Some(chain)
        }
        None => None,
    };

    let sparql_raw =
        lookup(block, "sparql").ok_or_else(|| at("sparql", ConfigErrorKind::MissingField))?;
    let sparql_template = normalize_placeholders(sparql_raw);
    if let Some(undeclared) = placeholders(&sparql_template).find(|p| !names.iter().any(|n| n == p)) {
        return Err(at(
            "sparql",
            ConfigErrorKind::UndeclaredPlaceholder(String::from(undeclared)),
        ));
    }

    Ok(OperationSpec {
        url_template,
        params,
        preprocess,
        postprocess,
        method,
        description: text(block, "description"),
        field_types,
        call_example: text(block, "call"),
        output_json_example: text(block, "output_json"),
        sparql_template,
        extra: extras(index, block, |n| {
            OPERATION_FIELDS.contains(&n) || names.iter().any(|p| p == n)
        }),
    })
}

fn check_template(template: &str, names: &[String]) -> Result<(), String> {
    if !template.starts_with('/') {
        return Err(alloc::format!("operation url `{template}` must start with `/`"));
    }
    if template.contains(|c: char| c.is_whitespace() || c == '?' || c == '#') {
        return Err(alloc::format!("operation url `{template}` contains whitespace, `?` or `#`"));
    }
    let opens = template.matches('{').count();
    let closes = template.matches('}').count();
    if opens != names.len() || closes != names.len() {
        return Err(alloc::format!("unbalanced braces in `{template}`"));
    }
    for (i, name) in names.iter().enumerate() {
        if !is_identifier(name) {
            return Err(alloc::format!("`{{{name}}}` is not a valid parameter name"));
        }
        if names[..i].contains(name) {
            return Err(alloc::format!("parameter `{name}` appears twice"));
        }
    }
    Ok(())
}

/// Rewrites the `[{name}]` placeholder spelling to `[[name]]`.
pub(crate) fn normalize_placeholders(sparql: &str) -> String {
    let mut out = String::with_capacity(sparql.len());
    let mut rest = sparql;
    while let Some(pos) = rest.find("[{") {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 2..];
        match after.find("}]") {
            Some(end) if is_identifier(&after[..end]) => {
                out.push_str("[[");
                out.push_str(&after[..end]);
                out.push_str("]]");
                rest = &after[end + 2..];
            }
            _ => {
                out.push_str("[{");
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Names of all `[[name]]` placeholders in `sparql`, in order.
pub(crate) fn placeholders(sparql: &str) -> impl Iterator<Item = &str> {
    let mut rest = sparql;
    core::iter::from_fn(move || loop {
        let pos = rest.find("[[")?;
        let after = &rest[pos + 2..];
        match after.find("]]") {
            Some(end) if is_identifier(&after[..end]) => {
                rest = &after[end + 2..];
                return Some(&after[..end]);
            }
            Some(_) => rest = &rest[pos + 1..],
            None => return None,
        }
    })
}

fn is_absolute_url(s: &str) -> bool {
    let Some((scheme, rest)) = s.split_once("://") else {
        return false;
    };
    let scheme_ok = scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && scheme.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    let authority = rest.split(['/', '?', '#']).next().unwrap_or("");
    scheme_ok && !authority.is_empty() && !s.contains(char::is_whitespace)
}
