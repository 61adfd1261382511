use alloc::string::{String, ToString};

use regex_automata::meta::Regex;

/// Compiles a user-supplied regular expression.
pub(crate) fn compile(pattern: &str) -> Result<Regex, String> {
    Regex::new(pattern).map_err(|e| e.to_string())
}

/// Escapes `text` so it matches itself literally.
pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if matches!(
            c,
            '\\' | '.' | '+' | '*' | '?' | '(' | ')' | '|' | '[' | ']' | '{' | '}' | '^' | '$'
                | '#' | '&' | '-' | '~'
        ) {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Strips one leading `^` and one trailing unescaped `$` so a shape pattern
/// can be embedded in a larger anchored expression.
pub(crate) fn strip_anchors(pattern: &str) -> &str {
    let mut p = pattern.strip_prefix('^').unwrap_or(pattern);
    if let Some(body) = p.strip_suffix('$') {
        let backslashes = body.chars().rev().take_while(|&c| c == '\\').count();
        if backslashes % 2 == 0 {
            p = body;
        }
    }
    p
}
