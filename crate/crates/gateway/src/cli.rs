//! Command line: run one call, write documentation, or serve.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::error::ErrorKind;
use clap::Parser;

use crate::client::HttpEndpoint;
use crate::docs::render_docs_set;
use crate::manager::ApiManager;
use sparqlrest_core::AddonCatalog;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sparqlrest",
    version,
    about = "REST API gateway over SPARQL endpoints",
    after_help = "`-css` is accepted as a spelling of `--css`."
)]
struct Args {
    /// Configuration documents (hash format)
    #[arg(short = 's', value_name = "CONF", num_args = 1.., required = true)]
    specs: Vec<PathBuf>,

    /// Call to execute: <api base><operation path>[?refinements]
    #[arg(short = 'c', value_name = "CALL", conflicts_with_all = ["docs", "web"])]
    call: Option<String>,

    /// Output format of the call
    #[arg(short = 'f', value_name = "FORMAT", default_value = "json", value_parser = ["csv", "json"])]
    format: String,

    /// Write output here instead of standard output
    #[arg(short = 'o', value_name = "FILE")]
    output: Option<PathBuf>,

    /// Method of the call
    #[arg(short = 'm', value_name = "METHOD", default_value = "get", value_parser = ["get", "post"])]
    method: String,

    /// Write HTML documentation of the APIs
    #[arg(short = 'd', conflicts_with = "web")]
    docs: bool,

    /// Stylesheet embedded in documentation and server pages
    #[arg(long = "css", value_name = "FILE")]
    css: Option<PathBuf>,

    /// Serve the APIs on host:port
    #[arg(short = 'w', value_name = "HOST:PORT")]
    web: Option<String>,

    /// Seconds to wait for the SPARQL endpoint
    #[arg(long = "timeout", value_name = "SECS", default_value_t = 30)]
    timeout: u64,
}

/// `-css` is a single-dash long flag; clap wants `--css`.
fn normalize<I: IntoIterator<Item = String>>(args: I) -> Vec<String> {
    args.into_iter().map(|a| if a == "-css" { String::from("--css") } else { a }).collect()
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match path {
        Some(path) => std::fs::write(path, text),
        None => {
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

/// Runs the command line and returns the exit code: 0 when the call
/// answered 200 (or docs were written, or the server stopped cleanly), 1 on
/// a failed call, 2 on a usage error.
pub fn run<I: IntoIterator<Item = String>>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let args = match Args::try_parse_from(normalize(args)) {
        Ok(args) => args,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    if args.call.is_none() && !args.docs && args.web.is_none() {
        let _ = writeln!(stderr, "error: nothing to do; give one of -c, -d or -w");
        return EXIT_USAGE;
    }

    let css = match args.css.as_deref().map(std::fs::read_to_string).transpose() {
        Ok(css) => css,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot read stylesheet: {e}");
            return EXIT_USAGE;
        }
    };
    let endpoint = HttpEndpoint::new(Duration::from_secs(args.timeout));
    let manager = match ApiManager::from_paths_with(&args.specs, &AddonCatalog::new(), endpoint) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };

    if let Some(call) = &args.call {
        let (status, body) = match manager.get_op(call) {
            Ok(op) => op.exec(&args.method, &args.format),
            Err(e) => {
                let outcome = sparqlrest_core::CallOutcome::from(sparqlrest_core::CallError::from(e));
                (outcome.status, outcome.body)
            }
        };
        if status != 200 {
            let _ = writeln!(stderr, "{body}");
            return EXIT_FAILURE;
        }
        return match write_output(args.output.as_deref(), &body, stdout) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot write output: {e}");
                EXIT_FAILURE
            }
        };
    }

    if args.docs {
        let page = render_docs_set(manager.documents(), css.as_deref());
        return match write_output(args.output.as_deref(), &page, stdout) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot write documentation: {e}");
                EXIT_FAILURE
            }
        };
    }

    let addr = args.web.expect("checked above");
    serve_forever(Arc::new(manager), &addr, css, stderr)
}

fn serve_forever(manager: Arc<ApiManager>, addr: &str, css: Option<String>, stderr: &mut dyn Write) -> i32 {
    let runtime = match tokio::runtime::Builder::new_multi_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_FAILURE;
        }
    };
    let result = runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        let bound = listener.local_addr()?;
        let _ = writeln!(stderr, "serving on http://{bound}");
        log::info!("serving {} api(s) on http://{bound}", manager.documents().len());
        crate::server::serve(listener, manager, css, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot serve on {addr}: {e}");
            EXIT_FAILURE
        }
    }
}
