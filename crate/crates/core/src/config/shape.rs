use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{is_identifier, ConfigError, ConfigErrorKind, ParamShape, ProcessChain, ProcessStep, ValueType};
use crate::pattern;

/// Pattern used when a parameter shape gives no regular expression.
pub const DEFAULT_PATTERN: &str = ".+";

/// Parses `<type>` or `<type>(<regex>)`, e.g. `str(10\..+)`.
///
/// The returned shape has an empty `name`; the caller fills it in.
pub fn parse_param_shape(text: &str) -> Result<ParamShape, ConfigError> {
    let bad = |msg: &str| ConfigError::new(ConfigErrorKind::BadParamShape(String::from(msg)));
    let text = text.trim();
    let split = text.find('(').unwrap_or(text.len());
    let (type_token, body) = text.split_at(split);
    let value_type: ValueType = type_token
        .trim_end()
        .parse()
        .map_err(|_| bad(&alloc::format!("unknown type `{}`", type_token.trim_end())))?;

    let pattern = if body.is_empty() {
        String::from(DEFAULT_PATTERN)
    } else {
        let inner = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| bad("expected `<type>(<regex>)`"))?;
        if inner.is_empty() {
            return Err(bad("empty regular expression"));
        }
        pattern::compile(inner).map_err(|e| bad(&e))?;
        String::from(inner)
    };

    Ok(ParamShape { name: String::new(), value_type, pattern })
}

/// Parses `name(arg, ...) --> name(arg, ...)`.
pub fn parse_process_chain(text: &str) -> Result<ProcessChain, ConfigError> {
    let bad = |msg: String| ConfigError::new(ConfigErrorKind::BadProcessChain(msg));
    let mut steps = Vec::new();
    for term in text.split("-->") {
        let term = term.trim();
        if term.is_empty() {
            return Err(bad(String::from("empty step")));
        }
        let open = term
            .find('(')
            .ok_or_else(|| bad(alloc::format!("`{term}` lacks an argument list")))?;
        let function = term[..open].trim();
        if function.is_empty() {
            return Err(bad(alloc::format!("`{term}` has no function name")));
        }
        if !is_identifier(function) {
            return Err(bad(alloc::format!("`{function}` is not a valid function name")));
        }
        let args_text = term[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| bad(alloc::format!("`{term}` is not closed by `)`")))?;
        if args_text.contains(['(', ')']) {
            return Err(bad(alloc::format!("`{term}` has nested parentheses")));
        }
        let args = if args_text.trim().is_empty() {
            Vec::new()
        } else {
            args_text
                .split(',')
                .map(|a| {
                    let a = a.trim();
                    if is_identifier(a) {
                        Ok(a.to_string())
                    } else {
                        Err(bad(alloc::format!("`{a}` is not a valid argument name")))
                    }
                })
                .collect::<Result<Vec<_>, _>>()?
        };
        steps.push(ProcessStep { function: function.to_string(), args });
    }
    Ok(ProcessChain { steps })
}

/// Parses `#field_type` values such as `str(oci) datetime(creation)`.
pub fn parse_field_types(text: &str) -> Result<Vec<(String, ValueType)>, ConfigError> {
    let bad = |msg: String| ConfigError::new(ConfigErrorKind::BadFieldType(msg));
    let mut out: Vec<(String, ValueType)> = Vec::new();
    for item in text.split_whitespace() {
        let (ty, rest) = item
            .split_once('(')
            .ok_or_else(|| bad(alloc::format!("`{item}` is not `<type>(<variable>)`")))?;
        let var = rest
            .strip_suffix(')')
            .ok_or_else(|| bad(alloc::format!("`{item}` is not closed by `)`")))?;
        let ty: ValueType = ty
            .parse()
            .map_err(|_| bad(alloc::format!("unknown type `{ty}`")))?;
        if var.is_empty() || var.contains(['(', ')']) {
            return Err(bad(alloc::format!("`{item}` has an invalid variable name")));
        }
        if out.iter().any(|(n, _)| n == var) {
            return Err(bad(alloc::format!("variable `{var}` typed twice")));
        }
        out.push((var.to_string(), ty));
    }
    Ok(out)
}
