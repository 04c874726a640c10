//! Run configuration: line-oriented `key = value` pairs under the section
//! headers `[group]`, `[representation]`, `[budgets]` and `[pipeline.N]`.
//! Only `seed` may appear before the first header. `#` starts a comment.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anosov_core::representation::{Representation, DEFAULT_MAX_BALL};
use anosov_core::GeodesicAutomaton;
use nalgebra::DMatrix;

use crate::error::CliError;
use crate::expr::Expr;

#[derive(Clone, Debug, PartialEq)]
pub enum GroupSpec {
    Free(u16),
    Automaton(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub enum RepSpec {
    Expr(Expr),
    /// Generator images; inverses are computed.
    Matrices(Vec<DMatrix<f64>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Budgets {
    pub max_ball: u128,
    pub max_triples: usize,
    /// Recorded with the run but not enforced.
    pub wall_clock: Option<f64>,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_ball: DEFAULT_MAX_BALL,
            max_triples: 100_000,
            wall_clock: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Certify {
        p: usize,
        radius: usize,
    },
    Exponent {
        radius: usize,
    },
    Dimension {
        radius: usize,
        points: usize,
        depth: usize,
        tol: f64,
        scales: usize,
    },
    HyperconvexScan {
        p: usize,
        q: usize,
        r: usize,
        radius: usize,
        triples: usize,
        depth: usize,
        floor: f64,
        tol: f64,
        threshold: f64,
        fallback_depth: Option<usize>,
    },
    ConvergenceProfile {
        p: usize,
        q: usize,
        r: usize,
        radius: usize,
        steps: usize,
        stride: usize,
        depth: usize,
        tol: f64,
        fallback_depth: Option<usize>,
    },
    ShadowCheck {
        radius: usize,
        max_eta: usize,
        angle_length: usize,
        geodesics: usize,
        points: usize,
        depth: usize,
        tol: f64,
    },
    BoundaryExport {
        p: usize,
        radius: usize,
        points: usize,
        depth: usize,
        tol: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Certify { .. } => "certify",
            Command::Exponent { .. } => "exponent",
            Command::Dimension { .. } => "dimension",
            Command::HyperconvexScan { .. } => "hyperconvex-scan",
            Command::ConvergenceProfile { .. } => "convergence-profile",
            Command::ShadowCheck { .. } => "shadow-check",
            Command::BoundaryExport { .. } => "boundary-export",
        }
    }

    /// Parameters in emission order.
    fn params(&self) -> Vec<(&'static str, String)> {
        fn opt(v: &Option<usize>) -> Vec<(&'static str, String)> {
            v.map(|n| vec![("fallback_depth", n.to_string())])
                .unwrap_or_default()
        }
        match self {
            Command::Certify { p, radius } => vec![("p", p.to_string()), ("R", radius.to_string())],
            Command::Exponent { radius } => vec![("R", radius.to_string())],
            Command::Dimension {
                radius,
                points,
                depth,
                tol,
                scales,
            } => vec![
                ("R", radius.to_string()),
                ("points", points.to_string()),
                ("depth", depth.to_string()),
                ("tol", format!("{tol:?}")),
                ("scales", scales.to_string()),
            ],
            Command::HyperconvexScan {
                p,
                q,
                r,
                radius,
                triples,
                depth,
                floor,
                tol,
                threshold,
                fallback_depth,
            } => {
                let mut v = vec![
                    ("p", p.to_string()),
                    ("q", q.to_string()),
                    ("r", r.to_string()),
                    ("R", radius.to_string()),
                    ("triples", triples.to_string()),
                    ("depth", depth.to_string()),
                    ("floor", format!("{floor:?}")),
                    ("tol", format!("{tol:?}")),
                    ("threshold", format!("{threshold:?}")),
                ];
                v.extend(opt(fallback_depth));
                v
            }
            Command::ConvergenceProfile {
                p,
                q,
                r,
                radius,
                steps,
                stride,
                depth,
                tol,
                fallback_depth,
            } => {
                let mut v = vec![
                    ("p", p.to_string()),
                    ("q", q.to_string()),
                    ("r", r.to_string()),
                    ("R", radius.to_string()),
                    ("steps", steps.to_string()),
                    ("stride", stride.to_string()),
                    ("depth", depth.to_string()),
                    ("tol", format!("{tol:?}")),
                ];
                v.extend(opt(fallback_depth));
                v
            }
            Command::ShadowCheck {
                radius,
                max_eta,
                angle_length,
                geodesics,
                points,
                depth,
                tol,
            } => vec![
                ("R", radius.to_string()),
                ("max_eta", max_eta.to_string()),
                ("L", angle_length.to_string()),
                ("geodesics", geodesics.to_string()),
                ("points", points.to_string()),
                ("depth", depth.to_string()),
                ("tol", format!("{tol:?}")),
            ],
            Command::BoundaryExport {
                p,
                radius,
                points,
                depth,
                tol,
            } => vec![
                ("p", p.to_string()),
                ("R", radius.to_string()),
                ("points", points.to_string()),
                ("depth", depth.to_string()),
                ("tol", format!("{tol:?}")),
            ],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub group: GroupSpec,
    pub representation: RepSpec,
    pub budgets: Budgets,
    pub pipeline: Vec<Command>,
}

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    line: usize,
    column: usize,
    key_column: usize,
}

#[derive(Default)]
struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

fn parse_err(line: usize, column: usize, msg: impl Into<String>) -> CliError {
    CliError::Parse {
        line,
        column,
        msg: msg.into(),
    }
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn finish(self) -> Result<(), CliError> {
        match self.entries.into_iter().next() {
            Some((k, e)) => Err(parse_err(
                e.line,
                e.key_column,
                format!("unknown key '{k}'"),
            )),
            None => Ok(()),
        }
    }

    fn value<T: std::str::FromStr>(
        &mut self,
        key: &str,
        default: Option<T>,
    ) -> Result<T, CliError> {
        match self.take(key) {
            Some(e) => e.value.parse().map_err(|_| {
                parse_err(
                    e.line,
                    e.column,
                    format!("cannot parse '{}' for '{key}'", e.value),
                )
            }),
            None => default.ok_or_else(|| CliError::Validation {
                field: key.to_string(),
                msg: "required".into(),
            }),
        }
    }

    fn optional<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.take(key) {
            Some(e) => e.value.parse().map(Some).map_err(|_| {
                parse_err(
                    e.line,
                    e.column,
                    format!("cannot parse '{}' for '{key}'", e.value),
                )
            }),
            None => Ok(None),
        }
    }
}

fn parse_matrix(e: &Entry) -> Result<DMatrix<f64>, CliError> {
    let rows: Vec<Vec<f64>> = e
        .value
        .split(';')
        .map(|r| {
            r.split_whitespace()
                .map(str::parse)
                .collect::<Result<Vec<f64>, _>>()
        })
        .collect::<Result<_, _>>()
        .map_err(|_| parse_err(e.line, e.column, "matrix entries must be numbers"))?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(parse_err(
            e.line,
            e.column,
            "matrix must be square, rows separated by ';'",
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn with_field(err: CliError, field: String) -> CliError {
    match err {
        CliError::Validation { msg, .. } => CliError::Validation { field, msg },
        other => other,
    }
}

fn parse_command(index: usize, mut s: Section) -> Result<Command, CliError> {
    let name = s.take("command").ok_or_else(|| CliError::Validation {
        field: format!("pipeline.{index}.command"),
        msg: "required".into(),
    })?;
    let cmd = match name.value.as_str() {
        "certify" => Command::Certify {
            p: s.value("p", Some(1))?,
            radius: s.value("R", Some(10))?,
        },
        "exponent" => Command::Exponent {
            radius: s.value("R", Some(10))?,
        },
        "dimension" => Command::Dimension {
            radius: s.value("R", Some(10))?,
            points: s.value("points", Some(10_000))?,
            depth: s.value("depth", Some(30))?,
            tol: s.value("tol", Some(1e-9))?,
            scales: s.value("scales", Some(40))?,
        },
        "hyperconvex-scan" => Command::HyperconvexScan {
            p: s.value("p", None)?,
            q: s.value("q", None)?,
            r: s.value("r", None)?,
            radius: s.value("R", Some(10))?,
            triples: s.value("triples", Some(10_000))?,
            depth: s.value("depth", Some(48))?,
            floor: s.value("floor", Some(anosov_core::hyperconvexity::SEPARATION_FLOOR))?,
            tol: s.value("tol", Some(anosov_core::hyperconvexity::MARGIN_RESOLUTION))?,
            threshold: s.value("threshold", Some(1e-3))?,
            fallback_depth: s.optional("fallback_depth")?,
        },
        "convergence-profile" => Command::ConvergenceProfile {
            p: s.value("p", None)?,
            q: s.value("q", None)?,
            r: s.value("r", None)?,
            radius: s.value("R", Some(10))?,
            steps: s.value("steps", Some(24))?,
            stride: s.value("stride", Some(2))?,
            depth: s.value("depth", Some(80))?,
            tol: s.value("tol", Some(1e-9))?,
            fallback_depth: s.optional("fallback_depth")?,
        },
        "shadow-check" => Command::ShadowCheck {
            radius: s.value("R", Some(10))?,
            max_eta: s.value("max_eta", Some(3))?,
            angle_length: s.value("L", Some(8))?,
            geodesics: s.value("geodesics", Some(256))?,
            points: s.value("points", Some(4096))?,
            depth: s.value("depth", Some(30))?,
            tol: s.value("tol", Some(1e-6))?,
        },
        "boundary-export" => Command::BoundaryExport {
            p: s.value("p", Some(1))?,
            radius: s.value("R", Some(10))?,
            points: s.value("points", Some(2000))?,
            depth: s.value("depth", Some(30))?,
            tol: s.value("tol", Some(1e-6))?,
        },
        other => {
            return Err(parse_err(
                name.line,
                name.column,
                format!("unknown command '{other}'"),
            ))
        }
    };
    s.finish()?;
    Ok(cmd)
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, CliError> {
        let mut top = Section::default();
        let mut sections: BTreeMap<String, Section> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("");
            let trimmed = content.trim();
            if trimmed.is_empty() {
                continue;
            }
            let indent = content.len() - content.trim_start().len();
            let col_of = |byte: usize| content[..byte].chars().count() + 1;
            if let Some(rest) = trimmed.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, col_of(indent), "unterminated section header"))?
                    .trim()
                    .to_string();
                let valid = matches!(name.as_str(), "group" | "representation" | "budgets")
                    || name
                        .strip_prefix("pipeline.")
                        .is_some_and(|n| n.parse::<usize>().is_ok_and(|n| n > 0));
                if !valid {
                    return Err(parse_err(
                        line,
                        col_of(indent) + 1,
                        format!("unknown section '{name}'"),
                    ));
                }
                if sections.contains_key(&name) {
                    return Err(parse_err(
                        line,
                        col_of(indent),
                        format!("duplicate section '{name}'"),
                    ));
                }
                sections.insert(
                    name.clone(),
                    Section {
                        line,
                        ..Default::default()
                    },
                );
                current = Some(name);
                continue;
            }
            let Some(eq) = content.find('=') else {
                return Err(parse_err(line, col_of(indent), "expected 'key = value'"));
            };
            let key = content[..eq].trim().to_string();
            if key.is_empty() {
                return Err(parse_err(line, col_of(indent), "missing key"));
            }
            let after = &content[eq + 1..];
            let value = after.trim().to_string();
            let value_byte = eq + 1 + (after.len() - after.trim_start().len());
            let entry = Entry {
                value,
                line,
                column: col_of(value_byte),
                key_column: col_of(indent),
            };
            let section = match &current {
                Some(name) => sections.get_mut(name).expect("section registered"),
                None => &mut top,
            };
            if section.entries.insert(key.clone(), entry).is_some() {
                return Err(parse_err(
                    line,
                    col_of(indent),
                    format!("duplicate key '{key}'"),
                ));
            }
        }

        let seed = top.value("seed", Some(0))?;
        top.finish()?;

        let mut group_sec = sections
            .remove("group")
            .ok_or_else(|| CliError::Validation {
                field: "group".into(),
                msg: "section missing".into(),
            })?;
        let group = match (group_sec.take("free"), group_sec.take("automaton")) {
            (Some(e), None) => GroupSpec::Free(e.value.parse().map_err(|_| {
                parse_err(e.line, e.column, "free rank must be a positive integer")
            })?),
            (None, Some(e)) => GroupSpec::Automaton(PathBuf::from(e.value)),
            (Some(e), Some(_)) => {
                return Err(parse_err(
                    e.line,
                    e.key_column,
                    "give either 'free' or 'automaton'",
                ))
            }
            (None, None) => {
                return Err(CliError::Validation {
                    field: "group.free".into(),
                    msg: "one of 'free' or 'automaton' is required".into(),
                })
            }
        };
        group_sec.finish()?;

        let mut rep_sec =
            sections
                .remove("representation")
                .ok_or_else(|| CliError::Validation {
                    field: "representation".into(),
                    msg: "section missing".into(),
                })?;
        let representation = if let Some(e) = rep_sec.take("expr") {
            let expr = Expr::parse(&e.value).map_err(|x| {
                let column = e.column + e.value.chars().take(x.column - 1).count();
                parse_err(e.line, column, x.msg)
            })?;
            RepSpec::Expr(expr)
        } else {
            let mut mats = Vec::new();
            for i in 1.. {
                match rep_sec.take(&format!("generator.{i}")) {
                    Some(e) => mats.push(parse_matrix(&e)?),
                    None => break,
                }
            }
            if mats.is_empty() {
                return Err(CliError::Validation {
                    field: "representation.expr".into(),
                    msg: "give 'expr' or 'generator.1', 'generator.2', ...".into(),
                });
            }
            RepSpec::Matrices(mats)
        };
        rep_sec.finish()?;

        let budgets = match sections.remove("budgets") {
            Some(mut b) => {
                let d = Budgets::default();
                let budgets = Budgets {
                    max_ball: b.value("max_ball", Some(d.max_ball))?,
                    max_triples: b.value("max_triples", Some(d.max_triples))?,
                    wall_clock: b.optional("wall_clock")?,
                };
                b.finish()?;
                budgets
            }
            None => Budgets::default(),
        };

        let mut steps: Vec<(usize, Section)> = sections
            .into_iter()
            .map(|(name, s)| {
                let n = name["pipeline.".len()..]
                    .parse()
                    .expect("checked at header");
                (n, s)
            })
            .collect();
        steps.sort_by_key(|s| s.0);
        let pipeline = steps
            .into_iter()
            .map(|(n, s)| {
                let line = s.line;
                parse_command(n, s).map_err(|e| match e {
                    CliError::Validation { field, msg } if !field.starts_with("pipeline.") => {
                        with_field(
                            CliError::Validation {
                                field: field.clone(),
                                msg,
                            },
                            format!("pipeline.{n}.{field} (line {line})"),
                        )
                    }
                    other => other,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        Ok(RunConfig {
            seed,
            group,
            representation,
            budgets,
            pipeline,
        })
    }

    /// Normalized text: every section present, defaults written out,
    /// pipeline steps renumbered from 1.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.seed);
        s.push_str("\n[group]\n");
        match &self.group {
            GroupSpec::Free(n) => {
                let _ = writeln!(s, "free = {n}");
            }
            GroupSpec::Automaton(p) => {
                let _ = writeln!(s, "automaton = {}", p.display());
            }
        }
        s.push_str("\n[representation]\n");
        match &self.representation {
            RepSpec::Expr(e) => {
                let _ = writeln!(s, "expr = {e}");
            }
            RepSpec::Matrices(ms) => {
                for (i, m) in ms.iter().enumerate() {
                    let rows: Vec<String> = m
                        .row_iter()
                        .map(|r| {
                            r.iter()
                                .map(|x| format!("{x:?}"))
                                .collect::<Vec<_>>()
                                .join(" ")
                        })
                        .collect();
                    let _ = writeln!(s, "generator.{} = {}", i + 1, rows.join("; "));
                }
            }
        }
        s.push_str("\n[budgets]\n");
        let _ = writeln!(s, "max_ball = {}", self.budgets.max_ball);
        let _ = writeln!(s, "max_triples = {}", self.budgets.max_triples);
        if let Some(w) = self.budgets.wall_clock {
            let _ = writeln!(s, "wall_clock = {w:?}");
        }
        for (i, c) in self.pipeline.iter().enumerate() {
            let _ = writeln!(s, "\n[pipeline.{}]", i + 1);
            let _ = writeln!(s, "command = {}", c.name());
            for (k, v) in c.params() {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }

    pub fn automaton(&self) -> Result<GeodesicAutomaton, CliError> {
        match &self.group {
            GroupSpec::Free(n) => {
                if *n == 0 {
                    return Err(CliError::Validation {
                        field: "group.free".into(),
                        msg: "rank must be at least 1".into(),
                    });
                }
                Ok(GeodesicAutomaton::free(
                    anosov_core::GeneratorAlphabet::new(*n),
                ))
            }
            GroupSpec::Automaton(path) => {
                if !path.exists() {
                    return Err(CliError::Validation {
                        field: "group.automaton".into(),
                        msg: format!("{} does not exist", path.display()),
                    });
                }
                GeodesicAutomaton::load(path).map_err(|e| CliError::Validation {
                    field: "group.automaton".into(),
                    msg: e.to_string(),
                })
            }
        }
    }

    pub fn build_representation(&self) -> Result<Representation, CliError> {
        let rep = match &self.representation {
            RepSpec::Expr(e) => e.build(),
            RepSpec::Matrices(ms) => Representation::new("explicit", ms.clone()),
        };
        rep.map_err(|e| CliError::Validation {
            field: "representation".into(),
            msg: e.to_string(),
        })
    }

    /// Checks referenced files, builds the representation and checks every
    /// pipeline step against its dimension and the budgets.
    pub fn validate(&self) -> Result<(Representation, GeodesicAutomaton), CliError> {
        let aut = self.automaton()?;
        let rep = self.build_representation()?;
        if rep.rank() != aut.alphabet().rank() {
            return Err(CliError::Validation {
                field: "representation".into(),
                msg: format!(
                    "{} generators for a group of rank {}",
                    rep.rank(),
                    aut.alphabet().rank()
                ),
            });
        }
        let d = rep.dim();
        for (i, c) in self.pipeline.iter().enumerate() {
            let bad = |field: &str, msg: String| CliError::Validation {
                field: format!("pipeline.{}.{field}", i + 1),
                msg,
            };
            match c {
                Command::Certify { p, radius } => {
                    if *p == 0 || *p >= d {
                        return Err(bad("p", format!("must lie in 1..{d}")));
                    }
                    if *radius < 4 {
                        return Err(bad("R", "must be at least 4".into()));
                    }
                }
                Command::HyperconvexScan { p, q, r, .. } => {
                    if *p == 0 || *q == 0 || p + q > *r || *r > d {
                        return Err(bad("r", format!("need 1 <= p, q and p + q <= r <= {d}")));
                    }
                }
                Command::ConvergenceProfile {
                    p, q, r, stride, ..
                } => {
                    if *p == 0 || *q == 0 || p + q > *r || *r > d {
                        return Err(bad("r", format!("need 1 <= p, q and p + q <= r <= {d}")));
                    }
                    if *stride == 0 {
                        return Err(bad("stride", "must be positive".into()));
                    }
                }
                Command::BoundaryExport { p, .. } => {
                    if *p == 0 || *p >= d {
                        return Err(bad("p", format!("must lie in 1..{d}")));
                    }
                }
                Command::Exponent { .. }
                | Command::Dimension { .. }
                | Command::ShadowCheck { .. } => {}
            }
        }
        Ok((rep, aut))
    }
}
