//! Config-driven pipelines over `anosov-core`: parse a run description,
//! execute its commands and write CSV tables, SVG plots and a run record.

pub mod config;
pub mod error;
pub mod expr;
pub mod pipeline;
pub mod record;
pub mod report;

pub use config::{Budgets, Command, GroupSpec, RepSpec, RunConfig};
pub use error::CliError;
pub use expr::Expr;
pub use pipeline::run;
pub use record::{RunRecord, Schema};
pub use report::{emit_reports, FileKind, Manifest};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
