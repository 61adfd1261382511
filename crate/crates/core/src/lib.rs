//! Core of a REST gateway that fronts a SPARQL endpoint.
//!
//! Everything here is pure and allocation-only: parsing hash-format
//! configuration documents, routing call URLs onto operations, splicing
//! parameters into SPARQL templates, reading SPARQL-results JSON into a
//! [`ResultTable`], and running the `require`/`filter`/`sort`/`format`/`json`
//! refinement pipeline. Network dispatch is abstracted behind [`Endpoint`]
//! so the crate builds without `std`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod config;
mod pattern;
pub mod pipeline;
pub mod refine;
pub mod router;
pub mod sparql;
pub mod table;
pub mod value;

pub use config::{
    parse_document, parse_param_shape, parse_process_chain, split_blocks, ApiSpec, Block,
    ConfigDocument, ConfigError, ConfigErrorKind, FieldEntry, HttpMethod, OperationSpec,
    ParamShape, ProcessChain, ProcessStep, ValueType,
};
pub use pipeline::{
    AddonCatalog, CallError, CallOutcome, Gateway, LoadError, OperationHandle, ProcessRegistry,
};
pub use refine::{
    apply_plan, parse_refinements, Format, RefineError, RefinementPlan, Rendered,
};
pub use router::{CallRequest, RouteError, RouteMatch};
pub use sparql::{parse_results, substitute, ClientError, Endpoint, RawResponse};
pub use table::{Cell, ResultTable};
pub use value::TypedValue;
