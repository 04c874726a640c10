//! Executes the configured commands in order.

use std::time::Instant;

use anosov_core::dimension::{
    box_dimension_of, critical_exponent, least_angle_estimate, ps_measure, shadow_ratio, LimitIndex,
};
use anosov_core::exterior::plucker;
use anosov_core::fit::fit_line;
use anosov_core::hyperconvexity::{
    convergence_profile, hyperconvexity_scan, ScanOptions, TripleOptions,
};
use anosov_core::representation::{
    certify_anosov, limit_set_sample, BoundaryMap, BoundaryPoint, CertifyOptions, Representation,
    MU_MIN,
};
use anosov_core::{Error, GeodesicAutomaton};
use nalgebra::DVector;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{Budgets, Command, RunConfig};
use crate::error::CliError;
use crate::record::{ErrorKind, Outcome, Plot, PlotKind, RunRecord, Schema, StepRecord, Table};

struct Context<'a> {
    rep: &'a Representation,
    aut: &'a GeodesicAutomaton,
    seed: u64,
    budgets: &'a Budgets,
    exponent: Option<f64>,
}

impl Context<'_> {
    fn certify_options(&self) -> CertifyOptions {
        CertifyOptions {
            mu_min: MU_MIN,
            max_ball: self.budgets.max_ball,
        }
    }

    fn map(&self, levels: &[usize], radius: usize) -> Result<BoundaryMap<'_>, CliError> {
        let d = self.rep.dim();
        let mut ls: Vec<usize> = levels.iter().copied().filter(|&l| l > 0 && l < d).collect();
        ls.sort_unstable();
        ls.dedup();
        Ok(BoundaryMap::certify(self.rep, self.aut, &ls, radius, self.certify_options())?.0)
    }
}

struct StepOutput {
    summary: serde_json::Value,
    tables: Vec<Table>,
    plots: Vec<Plot>,
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn certify(ctx: &Context, p: usize, radius: usize) -> Result<StepOutput, CliError> {
    let c = certify_anosov(ctx.rep, ctx.aut, p, radius, ctx.certify_options())?;
    let mut table = Table::new(Schema::Certificate);
    let mut points = Vec::new();
    for (k, lg) in c.worst_log_gap.iter().enumerate() {
        table.push(vec![k.to_string(), num(lg.exp()), num(*lg)]);
        if lg.is_finite() {
            points.push((k as f64, -lg));
        }
    }
    let plot = Plot {
        name: "certificate",
        kind: PlotKind::Line,
        title: format!("worst gap ratio of index {p} per sphere"),
        x_label: "radius".into(),
        y_label: "-log worst gap".into(),
        points,
        fit: Some((c.fitted_mu, -c.fitted_c.ln())),
        fit_x: Some((0.0, radius as f64)),
    };
    Ok(StepOutput {
        summary: json!({
            "p": p,
            "radius": radius,
            "verdict": c.verdict.to_string(),
            "fitted_mu": c.fitted_mu,
            "fitted_c": c.fitted_c,
            "envelope_c": c.envelope_c,
            "r_squared": c.r_squared,
            "mu_min": c.mu_min,
        }),
        tables: vec![table],
        plots: vec![plot],
    })
}

fn exponent(ctx: &mut Context, radius: usize) -> Result<StepOutput, CliError> {
    let e = critical_exponent(ctx.rep, ctx.aut, radius, ctx.budgets.max_ball)?;
    ctx.exponent = Some(e.h);
    let mut table = Table::new(Schema::Exponent);
    for &(t, n) in &e.bins {
        table.push(vec![num(t), n.to_string(), num((n as f64).ln())]);
    }
    Ok(StepOutput {
        summary: json!({
            "h": e.h,
            "method": e.method.to_string(),
            "radius": e.radius,
            "window": [e.window.0, e.window.1],
            "confidence": e.confidence,
            "series_h": e.series_h,
        }),
        tables: vec![table],
        plots: vec![],
    })
}

fn dimension(
    ctx: &Context,
    radius: usize,
    points: usize,
    depth: usize,
    tol: f64,
    scales: usize,
) -> Result<StepOutput, CliError> {
    let map = ctx.map(&[1], radius)?;
    let sample = limit_set_sample(&map, ctx.aut, 1, points, depth, ctx.seed, tol)?;
    let est = box_dimension_of(&sample, scales)?;
    let mut table = Table::new(Schema::Dimension);
    let mut pts = Vec::new();
    for (eps, n) in est.scales.iter().zip(&est.counts) {
        table.push(vec![num(*eps), n.to_string()]);
        if *eps > 0.0 {
            pts.push((-eps.ln(), (*n as f64).ln()));
        }
    }
    let (lo, hi) = est.fit_range;
    let fit = (hi > lo)
        .then(|| {
            fit_line(
                &pts[lo..=hi].iter().map(|p| p.0).collect::<Vec<_>>(),
                &pts[lo..=hi].iter().map(|p| p.1).collect::<Vec<_>>(),
            )
        })
        .flatten();
    let plot = Plot {
        name: "dimension",
        kind: PlotKind::Line,
        title: "greedy net counts".into(),
        x_label: "log 1/epsilon".into(),
        y_label: "log N(epsilon)".into(),
        fit: fit.map(|f| (f.slope, f.intercept)),
        fit_x: fit.map(|_| (pts[lo].0, pts[hi].0)),
        points: pts,
    };
    let max_error = sample.iter().map(|p| p.error_bound).fold(0.0, f64::max);
    Ok(StepOutput {
        summary: json!({
            "box_dimension": est.slope,
            "stderr": est.stderr,
            "fit_range": [lo, hi],
            "points": sample.len(),
            "max_error_bound": max_error,
        }),
        tables: vec![table],
        plots: vec![plot],
    })
}

fn rays_text(rays: &[anosov_core::BoundaryRay; 3]) -> String {
    format!("{} {} {}", rays[0], rays[1], rays[2])
}

#[allow(clippy::too_many_arguments)]
fn scan(
    ctx: &Context,
    (p, q, r): (usize, usize, usize),
    radius: usize,
    triples: usize,
    depth: usize,
    floor: f64,
    tol: f64,
    threshold: f64,
    fallback_depth: Option<usize>,
) -> Result<StepOutput, CliError> {
    if triples > ctx.budgets.max_triples {
        return Err(CliError::Budget(format!(
            "{triples} triples requested, max_triples is {}",
            ctx.budgets.max_triples
        )));
    }
    let d = ctx.rep.dim();
    let mut map = ctx.map(&[1, p, q, d - r], radius)?;
    if let Some(n) = fallback_depth {
        map = map.with_uncertified_depth(n);
    }
    let opts = ScanOptions {
        triple: TripleOptions {
            separation_floor: floor,
            tol,
        },
        ..ScanOptions::default()
    };
    let report = hyperconvexity_scan(&map, ctx.aut, p, q, r, triples, depth, ctx.seed, &opts)?;
    let mut table = Table::new(Schema::Scan);
    for rec in &report.records {
        table.push(vec![
            rec.id.to_string(),
            num(rec.margin),
            rays_text(&rec.rays),
        ]);
    }
    Ok(StepOutput {
        summary: json!({
            "p": p,
            "q": q,
            "r": r,
            "triples_tested": report.triples_tested,
            "worst_margin": report.worst_margin,
            "threshold": threshold,
            "passed": report.passed(threshold),
            "separation_floor": report.separation_floor,
            "uncertified_levels": report.uncertified,
            "witness": report.witness.as_ref().map(rays_text),
        }),
        tables: vec![table],
        plots: vec![],
    })
}

#[allow(clippy::too_many_arguments)]
fn profile(
    ctx: &Context,
    (p, q, r): (usize, usize, usize),
    radius: usize,
    steps: usize,
    stride: usize,
    depth: usize,
    tol: f64,
    fallback_depth: Option<usize>,
) -> Result<StepOutput, CliError> {
    let mut map = ctx.map(&[p, q, r], radius)?;
    if let Some(n) = fallback_depth {
        map = map.with_uncertified_depth(n);
    }
    let x = ctx
        .aut
        .sample_boundary_rays(1, depth, ctx.seed)
        .pop()
        .ok_or_else(|| Error::InvalidInput("no boundary ray".into()))?;
    let at: Vec<usize> = (0..=steps).step_by(stride).collect();
    let prof = convergence_profile(&map, ctx.aut, p, q, r, &x, &at, ctx.seed, tol)?;
    let mut table = Table::new(Schema::Profile);
    let mut pts = Vec::new();
    for &(i, res) in &prof.steps {
        table.push(vec![i.to_string(), num(res)]);
        if res > 0.0 {
            pts.push((i as f64, res.ln()));
        }
    }
    let plot = Plot {
        name: "profile",
        kind: PlotKind::Line,
        title: format!("({p},{q},{r}) convergence along {}", x.prefix(8)),
        x_label: "step".into(),
        y_label: "log residual".into(),
        points: pts,
        fit: Some((-prof.fitted_rate, prof.fitted_const.ln())),
        fit_x: Some((0.0, steps as f64)),
    };
    Ok(StepOutput {
        summary: json!({
            "p": p,
            "q": q,
            "r": r,
            "fitted_rate": prof.fitted_rate,
            "fitted_const": prof.fitted_const,
            "final_residual": prof.steps.last().map(|s| s.1),
            "ray": x.to_string(),
        }),
        tables: vec![table],
        plots: vec![plot],
    })
}

#[allow(clippy::too_many_arguments)]
fn shadow(
    ctx: &Context,
    radius: usize,
    max_eta: usize,
    angle_length: usize,
    geodesics: usize,
    points: usize,
    depth: usize,
    tol: f64,
) -> Result<StepOutput, CliError> {
    let h = match ctx.exponent {
        Some(h) => h,
        None => critical_exponent(ctx.rep, ctx.aut, radius, ctx.budgets.max_ball)?.h,
    };
    let la = least_angle_estimate(ctx.rep, ctx.aut, angle_length, geodesics, ctx.seed)?;
    if la.no_gap {
        return Err(Error::NoGap { p: 1, ratio: 1.0 }.into());
    }
    let map = ctx.map(&[1], radius)?;
    let mu = ps_measure(ctx.rep, ctx.aut, h, radius, ctx.budgets.max_ball)?;
    let sample = limit_set_sample(&map, ctx.aut, 1, points, depth, ctx.seed, tol)?;
    let index = LimitIndex::new(&sample, la.delta / 2.0)?;
    let mut table = Table::new(Schema::Shadow);
    let mut violations = Vec::new();
    let mut empty = Vec::new();
    for eta in ctx.aut.ball(max_eta).into_iter().filter(|w| !w.is_empty()) {
        match shadow_ratio(ctx.rep, &eta, &mu, &index, la.delta, h) {
            Ok(r) => {
                if !r.holds() {
                    violations.push(eta.to_string());
                }
                table.push(vec![
                    eta.to_string(),
                    num(r.ratio),
                    num(r.lower),
                    num(r.upper),
                ]);
            }
            Err(Error::EmptyShadow(_)) => empty.push(eta.to_string()),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(StepOutput {
        summary: json!({
            "h": h,
            "delta": la.delta,
            "evaluated": table.rows.len(),
            "all_hold": violations.is_empty(),
            "violations": violations,
            "empty_shadows": empty,
        }),
        tables: vec![table],
        plots: vec![],
    })
}

/// Coordinates in the affine chart centred at the mean direction: each
/// vector is sign-aligned on its dominant coordinate, reflected so that the
/// mean goes to `e_0`, and divided by its first coordinate.
pub fn affine_chart(vectors: &[DVector<f64>]) -> Vec<(f64, f64)> {
    let Some(first) = vectors.first() else {
        return Vec::new();
    };
    let n = first.len();
    let mut abs_mean = vec![0.0; n];
    for v in vectors {
        for (m, x) in abs_mean.iter_mut().zip(v.iter()) {
            *m += x.abs();
        }
    }
    let pivot = (0..n)
        .max_by(|&a, &b| abs_mean[a].total_cmp(&abs_mean[b]))
        .unwrap_or(0);
    let aligned: Vec<DVector<f64>> = vectors
        .iter()
        .map(|v| if v[pivot] < 0.0 { -v } else { v.clone() })
        .collect();
    let mut mean = aligned.iter().fold(DVector::zeros(n), |acc, v| acc + v);
    if mean.norm() == 0.0 {
        mean[pivot] = 1.0;
    }
    mean /= mean.norm();
    // Householder reflection taking the mean to e_0
    let mut w = mean.clone();
    w[0] -= 1.0;
    let ww = w.dot(&w);
    aligned
        .iter()
        .map(|v| {
            let y = if ww > 1e-24 {
                v - &w * (2.0 * w.dot(v) / ww)
            } else {
                v.clone()
            };
            let c = |k: usize| if k < n { y[k] / y[0] } else { 0.0 };
            (c(1), c(2))
        })
        .collect()
}

fn boundary_vector(pt: &BoundaryPoint) -> DVector<f64> {
    if pt.subspace.rank() == 1 {
        pt.subspace.direction()
    } else {
        plucker(pt.subspace.frame())
    }
}

fn boundary(
    ctx: &Context,
    p: usize,
    radius: usize,
    points: usize,
    depth: usize,
    tol: f64,
) -> Result<StepOutput, CliError> {
    let map = ctx.map(&[p], radius)?;
    let sample = limit_set_sample(&map, ctx.aut, p, points, depth, ctx.seed, tol)?;
    let vectors: Vec<DVector<f64>> = sample.iter().map(boundary_vector).collect();
    let chart = affine_chart(&vectors);
    let mut table = Table::new(Schema::Boundary);
    for (pt, &(x, y)) in sample.iter().zip(&chart) {
        table.push(vec![
            pt.ray.prefix(pt.depth).to_string(),
            num(pt.error_bound),
            num(x),
            num(y),
        ]);
    }
    let plot = Plot {
        name: "boundary",
        kind: PlotKind::Scatter,
        title: format!("limit set at index {p}, affine chart"),
        x_label: "chart x".into(),
        y_label: "chart y".into(),
        points: chart
            .into_iter()
            .filter(|c| c.0.is_finite() && c.1.is_finite())
            .collect(),
        fit: None,
        fit_x: None,
    };
    Ok(StepOutput {
        summary: json!({
            "p": p,
            "points": sample.len(),
            "max_error_bound": sample.iter().map(|s| s.error_bound).fold(0.0, f64::max),
        }),
        tables: vec![table],
        plots: vec![plot],
    })
}

fn execute(ctx: &mut Context, cmd: &Command) -> Result<StepOutput, CliError> {
    match *cmd {
        Command::Certify { p, radius } => certify(ctx, p, radius),
        Command::Exponent { radius } => exponent(ctx, radius),
        Command::Dimension {
            radius,
            points,
            depth,
            tol,
            scales,
        } => dimension(ctx, radius, points, depth, tol, scales),
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
        } => scan(
            ctx,
            (p, q, r),
            radius,
            triples,
            depth,
            floor,
            tol,
            threshold,
            fallback_depth,
        ),
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
        } => profile(
            ctx,
            (p, q, r),
            radius,
            steps,
            stride,
            depth,
            tol,
            fallback_depth,
        ),
        Command::ShadowCheck {
            radius,
            max_eta,
            angle_length,
            geodesics,
            points,
            depth,
            tol,
        } => shadow(
            ctx,
            radius,
            max_eta,
            angle_length,
            geodesics,
            points,
            depth,
            tol,
        ),
        Command::BoundaryExport {
            p,
            radius,
            points,
            depth,
            tol,
        } => boundary(ctx, p, radius, points, depth, tol),
    }
}

pub fn config_hash(config: &RunConfig) -> String {
    hex::encode(Sha256::digest(config.emit().as_bytes()))
}

/// Validates the config and runs every step. Only configuration problems
/// are returned as errors; step failures are recorded.
pub fn run(config: &RunConfig) -> Result<RunRecord, CliError> {
    let (rep, aut) = config.validate()?;
    let mut record = RunRecord::empty();
    record.config = config.emit();
    record.config_hash = config_hash(config);
    record.seed = config.seed;
    let mut ctx = Context {
        rep: &rep,
        aut: &aut,
        seed: config.seed,
        budgets: &config.budgets,
        exponent: None,
    };
    let start = Instant::now();
    for (i, cmd) in config.pipeline.iter().enumerate() {
        let t0 = Instant::now();
        let result = execute(&mut ctx, cmd);
        let elapsed_seconds = t0.elapsed().as_secs_f64();
        let step = match result {
            Ok(out) => StepRecord {
                index: i + 1,
                command: cmd.name().to_string(),
                elapsed_seconds,
                outcome: Outcome::Ok {
                    summary: out.summary,
                },
                tables: out.tables,
                plots: out.plots,
            },
            Err(e) => StepRecord {
                index: i + 1,
                command: cmd.name().to_string(),
                elapsed_seconds,
                outcome: Outcome::Error {
                    kind: ErrorKind::of(&e),
                    message: e.to_string(),
                },
                tables: vec![],
                plots: vec![],
            },
        };
        record.steps.push(step);
    }
    record.finished_at = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
    record.wall_clock_exceeded = config
        .budgets
        .wall_clock
        .is_some_and(|w| start.elapsed().as_secs_f64() > w);
    Ok(record)
}
