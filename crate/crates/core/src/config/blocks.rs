use alloc::string::String;
use alloc::vec::Vec;

use super::{Block, ConfigError, ConfigErrorKind, FieldEntry};

/// Field names from both the api and the operation block tables.
pub(crate) const KNOWN_FIELDS: &[&str] = &[
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
    "preprocess",
    "postprocess",
    "field_type",
    "call",
    "output_json",
    "sparql",
];

/// Splits a hash-format document into blocks of fields.
///
/// A block starts at every column-0 `#url` line. Inside a block a column-0
/// `#name` starts a new field only when `name` is a known field or one of the
/// `{params}` of the block's `#url`; any other line (SPARQL comments
/// included) continues the current value.
pub fn split_blocks(text: &str) -> Result<Vec<Block>, ConfigError> {
    let mut blocks: Vec<Block> = Vec::new();
    let mut params: Vec<String> = Vec::new();

    for line in text.lines() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let head = field_head(line);

        if let Some(("url", rest)) = head {
            params = template_params(rest.trim());
            blocks.push(alloc::vec![FieldEntry {
                name: String::from("url"),
                value: String::from(rest),
            }]);
            continue;
        }

        let Some(block) = blocks.last_mut() else {
            match head {
                Some((name, _)) if is_known(name) => {
                    return Err(ConfigError::at(0, name, ConfigErrorKind::UrlNotFirst));
                }
                // headings and comments ahead of the first block
                Some(_) => {}
                None if line.trim().is_empty() || line.starts_with('#') => {}
                None => {
                    return Err(ConfigError::new(ConfigErrorKind::StrayContent(
                        String::from(line.trim()),
                    )))
                }
            }
            continue;
        };

        match head {
            Some((name, rest)) if is_known(name) || params.iter().any(|p| p == name) => {
                block.push(FieldEntry {
                    name: String::from(name),
                    value: String::from(rest),
                });
            }
            _ => {
                let field = block.last_mut().expect("blocks start with #url");
                field.value.push('\n');
                field.value.push_str(line);
            }
        }
    }

    for field in blocks.iter_mut().flatten() {
        let trimmed = field.value.trim();
        if trimmed.len() != field.value.len() {
            field.value = String::from(trimmed);
        }
    }
    Ok(blocks)
}

/// Writes blocks back as hash-format text, one blank line between blocks.
pub fn serialize_blocks(blocks: &[Block]) -> String {
    let mut out = String::new();
    for (i, block) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for field in block {
            out.push('#');
            out.push_str(&field.name);
            if !field.value.is_empty() {
                out.push(' ');
                out.push_str(&field.value);
            }
            out.push('\n');
        }
    }
    out
}

/// `#name rest` → `(name, rest)`; `name` runs to the first whitespace.
fn field_head(line: &str) -> Option<(&str, &str)> {
    let body = line.strip_prefix('#')?;
    let end = body.find(char::is_whitespace).unwrap_or(body.len());
    let (name, rest) = body.split_at(end);
    if name.is_empty() {
        return None;
    }
    Some((name, rest.trim_start()))
}

fn is_known(name: &str) -> bool {
    KNOWN_FIELDS.contains(&name)
}

/// Names between `{` and `}` in a URL template, in order. Malformed braces
/// are left for the document parser to reject.
pub(crate) fn template_params(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let Some(close) = after.find('}') else { break };
        out.push(String::from(&after[..close]));
        rest = &after[close + 1..];
    }
    out
}
