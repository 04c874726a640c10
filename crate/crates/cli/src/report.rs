//! Writes a [`RunRecord`] to a directory: one CSV per table, SVG plots,
//! `run.json` and a `manifest.json` with checksums.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::record::{Plot, PlotKind, RunRecord, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FileKind {
    Data,
    Plot,
    Metadata,
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub kind: FileKind,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Manifest {
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn count(&self, kind: FileKind) -> usize {
        self.files.iter().filter(|f| f.kind == kind).count()
    }

    fn write(
        &mut self,
        dir: &Path,
        name: String,
        kind: FileKind,
        bytes: &[u8],
    ) -> Result<(), CliError> {
        fs::write(dir.join(&name), bytes)?;
        self.files.push(ManifestEntry {
            path: name,
            kind,
            bytes: bytes.len(),
            sha256: hex::encode(Sha256::digest(bytes)),
        });
        Ok(())
    }
}

/// `name.ext` for the first use of `name`, then `name-2.ext`, `name-3.ext`, ...
fn numbered(seen: &mut BTreeMap<String, usize>, name: &str, ext: &str) -> String {
    let n = seen.entry(format!("{name}.{ext}")).or_insert(0);
    *n += 1;
    if *n == 1 {
        format!("{name}.{ext}")
    } else {
        format!("{name}-{n}.{ext}")
    }
}

pub fn table_csv(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(table.schema.header())?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Static SVG rendering. The second line is a version comment; everything
/// else depends only on the plot data.
pub fn plot_svg(plot: &Plot) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    let mut xs: Vec<f64> = plot.points.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = plot.points.iter().map(|p| p.1).collect();
    let fit_seg = plot
        .fit
        .zip(plot.fit_x)
        .map(|((a, b), (x0, x1))| [(x0, a * x0 + b), (x1, a * x1 + b)]);
    if let Some(seg) = fit_seg {
        for (x, y) in seg {
            xs.push(x);
            ys.push(y);
        }
    }
    let range = |v: &[f64]| {
        let lo = v
            .iter()
            .copied()
            .filter(|x| x.is_finite())
            .fold(f64::INFINITY, f64::min);
        let hi = v
            .iter()
            .copied()
            .filter(|x| x.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(s, "<!-- anosov-lab {} -->", crate::VERSION);
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
        W / 2.0,
        esc(&plot.title)
    );
    let _ = writeln!(
        s,
        "<path d=\"M{M} {top} V{bot} H{right}\" fill=\"none\" stroke=\"black\"/>",
        top = M,
        bot = H - M,
        right = W - M
    );
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"{anchor}\">{v:.3}</text>",
            sx(v),
            H - M + 16.0
        );
    }
    for v in [y0, y1] {
        let _ = writeln!(
            s,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{v:.3}</text>",
            M - 6.0,
            sy(v) + 4.0
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        W / 2.0,
        H - 16.0,
        esc(&plot.x_label)
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        H / 2.0,
        H / 2.0,
        esc(&plot.y_label)
    );
    let finite: Vec<(f64, f64)> = plot
        .points
        .iter()
        .copied()
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .collect();
    if plot.kind == PlotKind::Line && finite.len() > 1 {
        let d: Vec<String> = finite
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| {
                format!(
                    "{}{:.2} {:.2}",
                    if i == 0 { "M" } else { "L" },
                    sx(x),
                    sy(y)
                )
            })
            .collect();
        let _ = writeln!(
            s,
            "<path d=\"{}\" fill=\"none\" stroke=\"#1f4e9c\"/>",
            d.join(" ")
        );
    }
    let r = if plot.kind == PlotKind::Scatter {
        1.2
    } else {
        3.0
    };
    s.push_str("<g fill=\"#1f4e9c\">\n");
    for &(x, y) in &finite {
        let _ = writeln!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{r}\"/>",
            sx(x),
            sy(y)
        );
    }
    s.push_str("</g>\n");
    if let Some([(a, b), (c, d)]) = fit_seg {
        let _ = writeln!(
            s,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#c0392b\" stroke-dasharray=\"6 4\"/>",
            sx(a),
            sy(b),
            sx(c),
            sy(d)
        );
        if let Some((slope, _)) = plot.fit {
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" fill=\"#c0392b\">slope {slope:.4}</text>",
                W - M,
                M + 14.0
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

/// Writes every table and plot of `record` plus `run.json` and
/// `manifest.json` into `out_dir`, creating it if needed.
pub fn emit_reports(record: &RunRecord, out_dir: &Path) -> Result<Manifest, CliError> {
    fs::create_dir_all(out_dir)?;
    let mut manifest = Manifest::default();
    let mut seen = BTreeMap::new();
    for step in &record.steps {
        for t in &step.tables {
            let name = numbered(&mut seen, t.schema.name(), "csv");
            manifest.write(out_dir, name, FileKind::Data, &table_csv(t)?)?;
        }
        for p in &step.plots {
            let name = numbered(&mut seen, p.name, "svg");
            manifest.write(out_dir, name, FileKind::Plot, plot_svg(p).as_bytes())?;
        }
    }
    let json = serde_json::to_vec_pretty(record).map_err(std::io::Error::other)?;
    manifest.write(out_dir, "run.json".into(), FileKind::Metadata, &json)?;
    let m = serde_json::to_vec_pretty(&manifest).map_err(std::io::Error::other)?;
    fs::write(out_dir.join("manifest.json"), m)?;
    Ok(manifest)
}
