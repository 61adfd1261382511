//! REST gateway over SPARQL endpoints, configured by hash-format documents.
//!
//! The pure machinery lives in [`sparqlrest_core`]. This crate adds the
//! parts that need an operating system: the HTTP client that talks to the
//! endpoint, the web server with its documentation pages and dashboard, the
//! command line, and a mock endpoint for tests.
//!
//! ```no_run
//! use sparqlrest::manager::ApiManager;
//!
//! let manager = ApiManager::from_paths(&["citations.hf"])?;
//! let op = manager.get_op("/api/v1/citations/10.1108/JD-12-2013-0166?format=csv")?;
//! let (status, body) = op.exec("get", "json");
//! assert_eq!(status, 200);
//! println!("{body}");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

#![forbid(unsafe_code)]

pub mod cli;
pub mod client;
pub mod docs;
pub mod manager;
pub mod server;
pub mod stats;
pub mod testkit;

pub use sparqlrest_core;
