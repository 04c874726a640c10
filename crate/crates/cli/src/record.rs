//! In-memory results of a run, before they are written to disk.

use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;

/// CSV table kinds and their fixed headers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Schema {
    Certificate,
    Exponent,
    Dimension,
    Scan,
    Profile,
    Shadow,
    Boundary,
}

impl Schema {
    pub const ALL: [Schema; 7] = [
        Schema::Certificate,
        Schema::Exponent,
        Schema::Dimension,
        Schema::Scan,
        Schema::Profile,
        Schema::Shadow,
        Schema::Boundary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Schema::Certificate => "certificate",
            Schema::Exponent => "exponent",
            Schema::Dimension => "dimension",
            Schema::Scan => "scan",
            Schema::Profile => "profile",
            Schema::Shadow => "shadow",
            Schema::Boundary => "boundary",
        }
    }

    pub fn header(self) -> &'static [&'static str] {
        match self {
            Schema::Certificate => &["radius", "worst_gap", "log_worst_gap"],
            Schema::Exponent => &["t_bin", "count", "log_count"],
            Schema::Dimension => &["epsilon", "net_count"],
            Schema::Scan => &["triple_id", "margin", "witness_words"],
            Schema::Profile => &["step", "residual"],
            Schema::Shadow => &["eta", "ratio", "lower", "upper"],
            Schema::Boundary => &["ray", "error_bound", "chart_x", "chart_y"],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub schema: Schema,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(schema: Schema) -> Self {
        Self {
            schema,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.schema.header().len());
        self.rows.push(row);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Line,
    Scatter,
}

/// A 2d plot; `fit` is an optional line `y = slope x + intercept` drawn over
/// `fit_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub name: &'static str,
    pub kind: PlotKind,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
    pub fit: Option<(f64, f64)>,
    pub fit_x: Option<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    Budget,
    Numeric,
    Io,
}

impl ErrorKind {
    pub fn of(e: &CliError) -> Self {
        match e.exit_code() {
            3 => ErrorKind::Budget,
            4 => ErrorKind::Numeric,
            _ => ErrorKind::Io,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Budget => 3,
            ErrorKind::Numeric => 4,
            ErrorKind::Io => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Outcome {
    Ok { summary: Value },
    Error { kind: ErrorKind, message: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub command: String,
    pub elapsed_seconds: f64,
    pub outcome: Outcome,
    #[serde(skip)]
    pub tables: Vec<Table>,
    #[serde(skip)]
    pub plots: Vec<Plot>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub tool_version: String,
    /// sha256 of the normalized config text.
    pub config_hash: String,
    pub config: String,
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub wall_clock_exceeded: bool,
    pub steps: Vec<StepRecord>,
}

impl RunRecord {
    pub fn empty() -> Self {
        let now = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        Self {
            tool_version: crate::VERSION.to_string(),
            config_hash: String::new(),
            config: String::new(),
            seed: 0,
            started_at: now.clone(),
            finished_at: now,
            wall_clock_exceeded: false,
            steps: Vec::new(),
        }
    }

    /// 0 when every step succeeded, else the code of the first failing step.
    pub fn exit_code(&self) -> i32 {
        self.steps
            .iter()
            .find_map(|s| match &s.outcome {
                Outcome::Error { kind, .. } => Some(kind.exit_code()),
                Outcome::Ok { .. } => None,
            })
            .unwrap_or(0)
    }

    pub fn summary(&self, index: usize) -> Option<&Value> {
        match &self.steps.get(index)?.outcome {
            Outcome::Ok { summary } => Some(summary),
            Outcome::Error { .. } => None,
        }
    }
}
