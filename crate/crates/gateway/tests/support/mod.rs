//! Shared by the integration targets: a running fixture behind all three
//! surfaces (embedded manager, HTTP server, command line).

#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;

use markup5ever_rcdom::{Handle, NodeData, RcDom};
use sparqlrest::client::HttpEndpoint;
use sparqlrest::manager::ApiManager;
use sparqlrest::server::RunningServer;
use sparqlrest::testkit::{fixture_citations, MockEndpoint};
use sparqlrest_core::pipeline::percent_encode_component;
use sparqlrest_core::AddonCatalog;

pub struct Env {
    pub mock: MockEndpoint,
    pub manager: Arc<ApiManager>,
    pub server: RunningServer,
    pub config: String,
    pub dir: tempfile::TempDir,
    pub config_path: PathBuf,
}

impl Env {
    pub fn start() -> Env {
        let fixture = fixture_citations();
        let mock = MockEndpoint::start(fixture.rules.clone()).expect("mock endpoint");
        let config = fixture.config_for(&mock.url());
        let manager = Arc::new(
            ApiManager::from_sources(&[config.as_str()], &AddonCatalog::new(), HttpEndpoint::default()).expect("fixture loads"),
        );
        let server = RunningServer::start(Arc::clone(&manager), "127.0.0.1:0", None).expect("server");
        let dir = tempfile::tempdir().expect("temp dir");
        let config_path = dir.path().join("citations.hf");
        std::fs::write(&config_path, &config).expect("write config");
        Env { mock, manager, server, config, dir, config_path }
    }

    pub fn http(&self, method: &str, path: &str, query: &[(&str, &str)], accept: Option<&str>) -> HttpReply {
        http(&self.server.base_url(), method, path, query, accept)
    }

    /// Runs the binary with `-s <fixture config>` followed by `args`.
    pub fn cli(&self, args: &[&str]) -> CliReply {
        let out = Command::new(env!("CARGO_BIN_EXE_sparqlrest"))
            .arg("-s")
            .arg(&self.config_path)
            .args(args)
            .env("RUST_LOG", "off")
            .output()
            .expect("run binary");
        CliReply {
            code: out.status.code().unwrap_or(-1),
            stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
            stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub content_type: String,
    pub body: String,
}

/// `query` values are percent-encoded; keys are sent as given.
pub fn http(base: &str, method: &str, path: &str, query: &[(&str, &str)], accept: Option<&str>) -> HttpReply {
    let mut url = format!("{base}{path}");
    for (i, (k, v)) in query.iter().enumerate() {
        url.push(if i == 0 { '?' } else { '&' });
        url.push_str(k);
        url.push('=');
        url.push_str(&percent_encode_component(v));
    }
    let mut request = ureq::request(method, &url);
    if let Some(accept) = accept {
        request = request.set("Accept", accept);
    }
    let response = match request.call() {
        Ok(r) => r,
        Err(ureq::Error::Status(_, r)) => r,
        Err(e) => panic!("{method} {url}: {e}"),
    };
    HttpReply {
        status: response.status(),
        content_type: response.header("content-type").unwrap_or("").to_owned(),
        body: response.into_string().expect("body"),
    }
}

#[derive(Debug, Clone)]
pub struct CliReply {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CliReply {
    /// Status and body as the other surfaces report them: 200 with stdout on
    /// success, otherwise the status carried by the error body on stderr.
    pub fn status_and_body(&self) -> (u16, String) {
        if self.code == 0 {
            return (200, self.stdout.clone());
        }
        let body = self.stderr.strip_suffix('\n').unwrap_or(&self.stderr).to_owned();
        let value: serde_json::Value = serde_json::from_str(&body).unwrap_or_else(|e| panic!("error body {body:?}: {e}"));
        let status = value["status"].as_u64().expect("status in error body") as u16;
        (status, body)
    }
}

pub struct Html {
    pub dom: RcDom,
}

pub fn parse_html(text: &str) -> Html {
    use html5ever::tendril::TendrilSink;
    let opts = html5ever::ParseOpts {
        tree_builder: html5ever::tree_builder::TreeBuilderOpts { exact_errors: true, ..Default::default() },
        ..Default::default()
    };
    let dom = html5ever::parse_document(RcDom::default(), opts).from_utf8().read_from(&mut text.as_bytes()).expect("parse");
    Html { dom }
}

impl Html {
    pub fn errors(&self) -> Vec<String> {
        self.dom.errors.borrow().iter().map(|e| e.to_string()).collect()
    }

    pub fn has_doctype(&self) -> bool {
        self.dom.document.children.borrow().iter().any(|c| matches!(c.data, NodeData::Doctype { ref name, .. } if &**name == "html"))
    }

    /// Every element, in document order.
    pub fn elements(&self) -> Vec<Handle> {
        fn walk(node: &Handle, out: &mut Vec<Handle>) {
            if matches!(node.data, NodeData::Element { .. }) {
                out.push(node.clone());
            }
            for child in node.children.borrow().iter() {
                walk(child, out);
            }
        }
        let mut out = Vec::new();
        walk(&self.dom.document, &mut out);
        out
    }

    pub fn by_id(&self, id: &str) -> Option<Handle> {
        self.elements().into_iter().find(|e| attr(e, "id").as_deref() == Some(id))
    }
}

pub fn tag(node: &Handle) -> String {
    match &node.data {
        NodeData::Element { name, .. } => name.local.to_string(),
        _ => String::new(),
    }
}

pub fn attr(node: &Handle, name: &str) -> Option<String> {
    match &node.data {
        NodeData::Element { attrs, .. } => {
            attrs.borrow().iter().find(|a| &*a.name.local == name).map(|a| a.value.to_string())
        }
        _ => None,
    }
}

pub fn has_class(node: &Handle, class: &str) -> bool {
    attr(node, "class").is_some_and(|c| c.split_whitespace().any(|c| c == class))
}

pub fn text(node: &Handle) -> String {
    let mut out = String::new();
    fn walk(node: &Handle, out: &mut String) {
        if let NodeData::Text { contents } = &node.data {
            out.push_str(&contents.borrow());
        }
        for child in node.children.borrow().iter() {
            walk(child, out);
        }
    }
    walk(node, &mut out);
    out
}

/// Descendants of `node` (itself excluded) carrying `class`.
pub fn find_class(node: &Handle, class: &str) -> Vec<Handle> {
    let mut out = Vec::new();
    fn walk(node: &Handle, class: &str, out: &mut Vec<Handle>) {
        for child in node.children.borrow().iter() {
            if has_class(child, class) {
                out.push(child.clone());
            }
            walk(child, class, out);
        }
    }
    walk(node, class, &mut out);
    out
}
