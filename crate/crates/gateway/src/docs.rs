//! HTML documentation pages and the call dashboard.

use std::fmt::Write;

use pulldown_cmark::{html, Event, Options, Parser};
use pulldown_cmark_escape::{escape_href, escape_html};
use sparqlrest_core::{ApiSpec, ConfigDocument, OperationSpec};
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

use crate::stats::{CounterSnapshot, StatsSnapshot};

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    escape_html(&mut out, s).expect("writing to a String");
    out
}

fn href(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    escape_href(&mut out, s).expect("writing to a String");
    out
}

/// Markdown to HTML. Raw HTML in the source is shown as text so a config
/// cannot break the page structure.
fn markdown(source: &str) -> String {
    let events = Parser::new_ext(source, Options::ENABLE_TABLES | Options::ENABLE_STRIKETHROUGH).map(|e| match e {
        Event::Html(s) | Event::InlineHtml(s) => Event::Text(s),
        other => other,
    });
    let mut out = String::new();
    html::push_html(&mut out, events);
    out
}

fn open_page(out: &mut String, title: &str, css: Option<&str>) {
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(out, "<title>{}</title>", esc(title));
    if let Some(css) = css {
        // `</` would close the element early; `<\/` means the same in CSS
        let _ = writeln!(out, "<style>\n{}\n</style>", css.replace("</", "<\\/"));
    }
    out.push_str("</head>\n<body>\n");
}

fn close_page(out: &mut String) {
    out.push_str("</body>\n</html>\n");
}

fn title_of(api: &ApiSpec) -> &str {
    if api.title.is_empty() {
        &api.url
    } else {
        &api.title
    }
}

fn contact(value: &str) -> String {
    if value.starts_with("http://") || value.starts_with("https://") || value.starts_with("mailto:") {
        format!("<a href=\"{}\">{}</a>", href(value), esc(value))
    } else {
        esc(value)
    }
}

fn write_api(out: &mut String, api: &ApiSpec, operations: &[OperationSpec], heading: &str) {
    let _ = writeln!(out, "<section class=\"api\">\n<{heading} class=\"api-title\">{}</{heading}>", esc(title_of(api)));
    if !api.description.is_empty() {
        let _ = writeln!(out, "<div class=\"api-description\">\n{}</div>", markdown(&api.description));
    }
    out.push_str("<dl class=\"api-info\">\n");
    let rows = [
        ("Version", esc(&api.version)),
        ("License", esc(&api.license)),
        ("Contacts", contact(&api.contacts)),
        ("SPARQL endpoint", contact(&api.endpoint)),
        ("API base", format!("<code>{}</code>", esc(&api.url))),
    ];
    for (label, value) in rows.iter().filter(|(_, v)| !v.is_empty()) {
        let _ = writeln!(out, "<dt>{label}</dt><dd>{value}</dd>");
    }
    out.push_str("</dl>\n");

    if !operations.is_empty() {
        out.push_str("<section class=\"operations\">\n<h2>Operations</h2>\n");
        for op in operations {
            write_operation(out, api, op);
        }
        out.push_str("</section>\n");
    }
    out.push_str("</section>\n");
}

fn write_operation(out: &mut String, api: &ApiSpec, op: &OperationSpec) {
    let _ = writeln!(
        out,
        "<article class=\"operation\">\n<h3 class=\"template\"><code>{}{}</code></h3>\n<p class=\"method\">Method: <code>{}</code></p>",
        esc(&api.url),
        esc(&op.url_template),
        op.method
    );
    if !op.params.is_empty() {
        out.push_str("<table class=\"parameters\">\n<thead><tr><th>Parameter</th><th>Type</th><th>Pattern</th></tr></thead>\n<tbody>\n");
        for p in &op.params {
            let _ = writeln!(
                out,
                "<tr><td><code>{}</code></td><td>{}</td><td><code>{}</code></td></tr>",
                esc(&p.name),
                p.value_type,
                esc(&p.pattern)
            );
        }
        out.push_str("</tbody>\n</table>\n");
    }
    if !op.description.is_empty() {
        let _ = writeln!(out, "<div class=\"description\">\n{}</div>", markdown(&op.description));
    }
    if !op.field_types.is_empty() {
        out.push_str("<p>Returned fields:</p>\n<ul class=\"fields\">\n");
        for (name, ty) in &op.field_types {
            let _ = writeln!(out, "<li><code>{}</code> ({ty})</li>", esc(name));
        }
        out.push_str("</ul>\n");
    }
    if !op.call_example.is_empty() {
        let _ = writeln!(out, "<p class=\"call\">Example call: <code>{}</code></p>", esc(&op.call_example));
    }
    if !op.output_json_example.is_empty() {
        let pretty = serde_json::from_str::<serde_json::Value>(&op.output_json_example)
            .ok()
            .and_then(|v| serde_json::to_string_pretty(&v).ok())
            .unwrap_or_else(|| op.output_json_example.clone());
        let _ = writeln!(out, "<p>Example output:</p>\n<pre class=\"output\"><code>{}</code></pre>", esc(&pretty));
    }
    out.push_str("</article>\n");
}

/// Documentation page for one API. Same input, same bytes.
pub fn render_docs(api: &ApiSpec, operations: &[OperationSpec], css: Option<&str>) -> String {
    let mut out = String::new();
    open_page(&mut out, title_of(api), css);
    write_api(&mut out, api, operations, "h1");
    close_page(&mut out);
    out
}

/// One page documenting several APIs, a section each.
pub fn render_docs_set<'a>(docs: impl IntoIterator<Item = &'a ConfigDocument>, css: Option<&str>) -> String {
    let docs: Vec<_> = docs.into_iter().collect();
    if let [only] = docs.as_slice() {
        return render_docs(&only.api, &only.operations, css);
    }
    let mut out = String::new();
    open_page(&mut out, "API documentation", css);
    out.push_str("<h1>API documentation</h1>\n");
    for doc in docs {
        write_api(&mut out, &doc.api, &doc.operations, "h2");
    }
    close_page(&mut out);
    out
}

fn timestamp(secs: Option<u64>) -> String {
    secs.and_then(|s| OffsetDateTime::from_unix_timestamp(s as i64).ok())
        .and_then(|t| t.format(&Rfc3339).ok())
        .unwrap_or_else(|| String::from("never"))
}

fn counter_cells(out: &mut String, c: &CounterSnapshot) {
    let _ = write!(
        out,
        "<td class=\"calls-total\">{}</td><td class=\"calls-2xx\">{}</td><td class=\"calls-4xx\">{}</td><td class=\"calls-5xx\">{}</td><td class=\"last-call\">{}</td>",
        c.total,
        c.success,
        c.client_error,
        c.server_error,
        timestamp(c.last_call)
    );
}

const COUNTER_HEAD: &str = "<th>Calls</th><th>2xx</th><th>4xx</th><th>5xx</th><th>Last call</th>";

/// The server's front page: global counters, then each API with a link to
/// its documentation and a row of counters per operation.
pub fn render_dashboard<'a>(stats: &StatsSnapshot, docs: impl IntoIterator<Item = &'a ConfigDocument>, css: Option<&str>) -> String {
    let mut out = String::new();
    open_page(&mut out, "API dashboard", css);
    out.push_str("<h1>API dashboard</h1>\n");
    let _ = writeln!(out, "<table id=\"summary\">\n<thead><tr>{COUNTER_HEAD}</tr></thead>\n<tbody><tr>");
    counter_cells(&mut out, &stats.global);
    out.push_str("</tr></tbody>\n</table>\n");

    for (i, doc) in docs.into_iter().enumerate() {
        let api = &doc.api;
        let _ = writeln!(
            out,
            "<section class=\"api\">\n<h2><a class=\"docs-link\" href=\"{}\">{}</a></h2>",
            href(&api.url),
            esc(title_of(api))
        );
        let _ = writeln!(
            out,
            "<table class=\"operations\">\n<thead><tr><th>Operation</th><th>Method</th>{COUNTER_HEAD}</tr></thead>\n<tbody>"
        );
        for (j, op) in doc.operations.iter().enumerate() {
            let _ = write!(out, "<tr class=\"operation\"><td><code>{}</code></td><td>{}</td>", esc(&op.url_template), op.method);
            let counters = stats.operations.get(i).and_then(|ops| ops.get(j)).copied().unwrap_or_default();
            counter_cells(&mut out, &counters);
            out.push_str("</tr>\n");
        }
        out.push_str("</tbody>\n</table>\n</section>\n");
    }
    close_page(&mut out);
    out
}
