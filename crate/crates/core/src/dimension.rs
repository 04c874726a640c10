//! Critical exponents, box dimension of point clouds in projective space,
//! Patterson–Sullivan style measures, shadow ratios and least angles.

use std::collections::HashMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rayon::prelude::*;

use crate::automaton::{ray_rng, GeodesicAutomaton, GroupWord, Letter};
use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::geom::{line_distance_slice, TOL_GAP};
use crate::representation::{
    ball_log_gaps, check_automaton, scan_ball, BoundaryPoint, Representation,
};

/// Number of `t`-bins in the counting regression.
pub const COUNT_BINS: usize = 16;

/// Largest net size used in box-dimension fits, as a fraction of the
/// number of points.
pub const SATURATION_FRACTION: f64 = 0.05;

/// Smallest net size used in box-dimension fits.
pub const MIN_NET: usize = 4;

/// `log sum exp(x_i)`.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Truncated Dirichlet series `sum_{|g| <= R} (sigma_2/sigma_1)^s`.
#[derive(Clone, Copy, Debug)]
pub struct PoincareSum {
    pub s: f64,
    pub radius: usize,
    pub log_value: f64,
}

impl PoincareSum {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

pub fn poincare_partial(
    rep: &Representation,
    automaton: &GeodesicAutomaton,
    s: f64,
    radius: usize,
    max_ball: u128,
) -> Result<PoincareSum> {
    if !(s >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "exponent {s} must be non-negative"
        )));
    }
    let gaps = ball_log_gaps(rep, automaton, 1, radius, max_ball)?;
    Ok(PoincareSum {
        s,
        radius,
        log_value: log_sum_exp(gaps.iter().flatten().map(|g| s * g)),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExponentMethod {
    CountingRegression,
    SeriesTransition,
}

impl fmt::Display for ExponentMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExponentMethod::CountingRegression => "counting-regression",
            ExponentMethod::SeriesTransition => "series-transition",
        })
    }
}

/// Growth rate of `#{g : -log gap(g) <= t}` in `t`.
#[derive(Clone, Debug)]
pub struct ExponentEstimate {
    pub h: f64,
    pub method: ExponentMethod,
    pub radius: usize,
    /// `t` range of the regression.
    pub window: (f64, f64),
    /// Twice the standard error of the fitted slope.
    pub confidence: f64,
    /// Exponent where the per-sphere series stops growing.
    pub series_h: f64,
    pub bins: Vec<(f64, u64)>,
}

/// Estimates the critical exponent from an exhaustive ball scan.
pub fn critical_exponent(
    rep: &Representation,
    automaton: &GeodesicAutomaton,
    radius: usize,
    max_ball: u128,
) -> Result<ExponentEstimate> {
    let gaps = ball_log_gaps(rep, automaton, 1, radius, max_ball)?;
    let taus: Vec<Vec<f64>> = gaps
        .into_iter()
        .map(|v| v.into_iter().map(|g| -g).collect())
        .collect();
    exponent_from_taus(&taus)
}

/// Exponent estimate from `-log gap` values grouped by word length.
pub fn exponent_from_taus(taus: &[Vec<f64>]) -> Result<ExponentEstimate> {
    let radius = taus.len() - 1;
    let t_max = taus[radius].iter().copied().fold(f64::INFINITY, f64::min);
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::WindowTooShort(0));
    }
    let mut all: Vec<f64> = taus.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    let lo = t_max / 2.0;
    let mut bins = Vec::with_capacity(COUNT_BINS);
    for j in 0..COUNT_BINS {
        let t = lo + (t_max - lo) * j as f64 / (COUNT_BINS - 1) as f64;
        let n = all.partition_point(|&x| x <= t * (1.0 + 1e-12)) as u64;
        bins.push((t, n));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = bins
        .iter()
        .filter(|b| b.1 > 0)
        .map(|&(t, n)| (t, (n as f64).ln()))
        .unzip();
    if xs.len() < 4 {
        return Err(Error::WindowTooShort(xs.len()));
    }
    let fit = fit_line(&xs, &ys).ok_or(Error::WindowTooShort(xs.len()))?;
    Ok(ExponentEstimate {
        h: fit.slope.max(0.0),
        method: ExponentMethod::CountingRegression,
        radius,
        window: (lo, t_max),
        confidence: 2.0 * fit.slope_stderr,
        series_h: series_transition(taus),
        bins,
    })
}

/// Slope in `k` of `log sum_{|g| = k} exp(-s tau)` over `k in [R/2, R]`.
fn sphere_growth(taus: &[Vec<f64>], s: f64) -> f64 {
    let radius = taus.len() - 1;
    let lo = radius.div_ceil(2).max(1);
    let xs: Vec<f64> = (lo..=radius).map(|k| k as f64).collect();
    let ys: Vec<f64> = (lo..=radius)
        .map(|k| log_sum_exp(taus[k].iter().map(|t| -s * t)))
        .collect();
    fit_line(&xs, &ys).map(|f| f.slope).unwrap_or(0.0)
}

/// Bisection for the exponent where sphere sums switch from growth to decay.
fn series_transition(taus: &[Vec<f64>]) -> f64 {
    if taus.len() < 3 || sphere_growth(taus, 0.0) <= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while sphere_growth(taus, hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if sphere_growth(taus, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Net counts at dyadic scales and the fitted log-log slope.
#[derive(Clone, Debug)]
pub struct DimensionEstimate {
    pub scales: Vec<f64>,
    pub counts: Vec<usize>,
    pub slope: f64,
    pub stderr: f64,
    /// Indices into `scales` used by the fit.
    pub fit_range: (usize, usize),
}

/// Covering radii of a farthest-point traversal: entry `k-1` is the largest
/// distance from any point to the first `k` centres. Stops once the radius
/// drops to `floor`.
pub fn covering_radii(points: &[DVector<f64>], floor: f64) -> Vec<f64> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let d = points[0].len();
    let flat: Vec<f64> = points.iter().flat_map(|p| p.iter().copied()).collect();
    let at = |i: usize| &flat[i * d..(i + 1) * d];
    let mut dist = vec![f64::INFINITY; n];
    let mut radii = Vec::new();
    let mut centre = 0;
    loop {
        let c = at(centre);
        let mut best = (0.0, usize::MAX);
        for i in 0..n {
            if dist[i] > 0.0 {
                let e = line_distance_slice(c, at(i));
                if e < dist[i] {
                    dist[i] = e;
                }
            }
            if dist[i] > best.0 {
                best = (dist[i], i);
            }
        }
        radii.push(best.0);
        if best.1 == usize::MAX || best.0 <= floor || radii.len() == n {
            return radii;
        }
        centre = best.1;
    }
}

/// Box dimension of a set of lines from greedy net counts at dyadic scales
/// between the covering radius of one point and `4 * max_error`.
pub fn box_dimension(
    points: &[DVector<f64>],
    max_error: f64,
    scale_count: usize,
) -> Result<DimensionEstimate> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("need at least two points".into()));
    }
    let floor = 4.0 * max_error;
    let radii = covering_radii(points, floor);
    let top = radii[0];
    if top == 0.0 {
        return Ok(DimensionEstimate {
            scales: vec![0.0],
            counts: vec![1],
            slope: 0.0,
            stderr: 0.0,
            fit_range: (0, 0),
        });
    }
    let mut scales = Vec::new();
    let mut counts = Vec::new();
    let mut eps = top;
    while eps >= floor && scales.len() < scale_count {
        let n = radii.partition_point(|&r| r > eps) + 1;
        scales.push(eps);
        counts.push(n.min(points.len()));
        eps /= 2.0;
    }
    if scales.len() < 2 {
        return Err(Error::ScaleRangeEmpty {
            diameter: top,
            floor,
        });
    }
    let cap = ((points.len() as f64) * SATURATION_FRACTION).max(MIN_NET as f64) as usize;
    let idx: Vec<usize> = (0..scales.len())
        .filter(|&i| counts[i] >= MIN_NET && counts[i] <= cap)
        .collect();
    let fit: Option<LineFit> = if idx.len() >= 2 {
        let xs: Vec<f64> = idx.iter().map(|&i| -scales[i].ln()).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| (counts[i] as f64).ln()).collect();
        fit_line(&xs, &ys)
    } else {
        None
    };
    match fit {
        Some(f) => Ok(DimensionEstimate {
            scales,
            counts,
            slope: f.slope.max(0.0),
            stderr: f.slope_stderr,
            fit_range: (idx[0], *idx.last().unwrap()),
        }),
        None => {
            if counts.iter().all(|&c| c < MIN_NET) {
                // a handful of clusters at every scale: no growth
                Ok(DimensionEstimate {
                    scales,
                    counts,
                    slope: 0.0,
                    stderr: 0.0,
                    fit_range: (0, 0),
                })
            } else {
                Err(Error::ScaleRangeEmpty {
                    diameter: top,
                    floor,
                })
            }
        }
    }
}

/// Box dimension of boundary points, with the error floor taken from their
/// certified bounds.
pub fn box_dimension_of(points: &[BoundaryPoint], scale_count: usize) -> Result<DimensionEstimate> {
    let err = points.iter().map(|p| p.error_bound).fold(0.0, f64::max);
    let lines: Vec<DVector<f64>> = points.iter().map(|p| p.subspace.direction()).collect();
    box_dimension(&lines, err, scale_count)
}

/// One weighted point of a [`PSMeasure`].
#[derive(Clone, Debug)]
pub struct Atom {
    pub word: GroupWord,
    pub point: DVector<f64>,
    pub weight: f64,
}

/// Normalized weighted atoms at `U_1(rho(g))` with weights
/// `(sigma_2/sigma_1)^s`.
#[derive(Clone, Debug)]
pub struct PSMeasure {
    pub s: f64,
    pub radius: usize,
    pub atoms: Vec<Atom>,
    /// Words skipped because their image has no gap of index one.
    pub skipped: usize,
}

impl PSMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }
}

pub fn ps_measure(
    rep: &Representation,
    automaton: &GeodesicAutomaton,
    s: f64,
    radius: usize,
    max_ball: u128,
) -> Result<PSMeasure> {
    let scanned = scan_ball(rep, automaton, radius, 2, max_ball, |w, t| {
        let lg = t.log_gap(1);
        if w.is_empty() || lg.exp() >= 1.0 - TOL_GAP {
            return None;
        }
        Some((
            GroupWord::from_letters(w.to_vec()),
            t.attractor(1).direction(),
            lg,
        ))
    })?;
    let total = scanned.iter().map(|v| v.len()).sum::<usize>();
    let kept: Vec<(GroupWord, DVector<f64>, f64)> =
        scanned.into_iter().flatten().flatten().collect();
    let skipped = total - 1 - kept.len();
    let lse = log_sum_exp(kept.iter().map(|k| s * k.2));
    let atoms = kept
        .into_iter()
        .map(|(word, point, lg)| Atom {
            word,
            point,
            weight: (s * lg - lse).exp(),
        })
        .collect();
    Ok(PSMeasure {
        s,
        radius,
        atoms,
        skipped,
    })
}

/// Estimated least angle over sampled bi-infinite geodesics through the
/// identity.
#[derive(Clone, Copy, Debug)]
pub struct LeastAngle {
    pub delta: f64,
    /// Set when some sampled element had no gap, leaving `delta = 0`.
    pub no_gap: bool,
}

fn dual(rep: &Representation) -> Result<Representation> {
    let pairs = rep
        .generator_pairs()
        .into_iter()
        .map(|(g, inv)| (inv.transpose(), g.transpose()))
        .collect();
    Representation::from_pairs(format!("dual({})", rep.label()), pairs)
}

/// Minimum of `sin angle(U_1(rho(a_1..a_k)), U_{d-1}(rho(b_1..b_m)))` for
/// `k, m in [L, 2L]` over sampled pairs of rays with `a_1 != b_1`.
pub fn least_angle_estimate(
    rep: &Representation,
    automaton: &GeodesicAutomaton,
    l: usize,
    n_geodesics: usize,
    seed: u64,
) -> Result<LeastAngle> {
    check_automaton(rep, automaton)?;
    if !automaton.is_free() {
        return Err(Error::InvalidInput(
            "least angle is implemented for free-group automata".into(),
        ));
    }
    if l == 0 || rep.dim() < 2 {
        return Err(Error::InvalidInput("need L >= 1 and dimension >= 2".into()));
    }
    let dual = dual(rep)?;
    let live = automaton.live_states();
    let per: Vec<(f64, bool)> = (0..n_geodesics)
        .into_par_iter()
        .map(|i| {
            let mut rng = ray_rng(seed, i as u64);
            let fwd = automaton.random_path(automaton.initial(), 2 * l, &mut rng, &live);
            let firsts: Vec<(Letter, usize)> = automaton
                .out_edges(automaton.initial())
                .filter(|&(x, _)| x != fwd[0])
                .collect();
            let (b0, s0) = firsts[rng.random_range(0..firsts.len())];
            let mut bwd = vec![b0];
            bwd.extend(automaton.random_path(s0, 2 * l - 1, &mut rng, &live));
            let tops = |r: &Representation, w: &[Letter]| -> Option<Vec<DVector<f64>>> {
                let mut t = r.tower(&[], 2);
                let mut out = Vec::new();
                for (k, &x) in w.iter().enumerate() {
                    t = t.push(r, x);
                    if k + 1 >= l {
                        if t.log_gap(1).exp() >= 1.0 - TOL_GAP {
                            return None;
                        }
                        out.push(t.attractor(1).direction());
                    }
                }
                Some(out)
            };
            match (tops(rep, &fwd), tops(&dual, &bwd)) {
                (Some(us), Some(ns)) => {
                    let mut m: f64 = 1.0;
                    for u in &us {
                        for n in &ns {
                            m = m.min(u.dot(n).abs());
                        }
                    }
                    (m, false)
                }
                _ => (0.0, true),
            }
        })
        .collect();
    let no_gap = per.iter().any(|p| p.1);
    let delta = if no_gap {
        0.0
    } else {
        per.iter().map(|p| p.0).fold(1.0, f64::min)
    };
    Ok(LeastAngle { delta, no_gap })
}

/// Measured shadow ratio and its predicted bracket.
#[derive(Clone, Debug)]
pub struct ShadowReport {
    pub eta: GroupWord,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub mass_base: f64,
    pub mass_image: f64,
}

impl ShadowReport {
    pub fn holds(&self) -> bool {
        self.lower <= self.ratio && self.ratio <= self.upper
    }
}

/// Spatial hash of sampled boundary lines, storing both unit
/// representatives of each line, tagged by the first letter of its ray.
pub struct LimitIndex {
    dim: usize,
    radius: f64,
    cell: f64,
    cells: HashMap<Vec<i32>, Vec<(usize, Letter)>>,
    points: Vec<DVector<f64>>,
}

impl LimitIndex {
    /// Index for queries "within sine distance `radius`".
    pub fn new(sample: &[BoundaryPoint], radius: f64) -> Result<Self> {
        let Some(first) = sample.first() else {
            return Err(Error::InvalidInput("empty limit sample".into()));
        };
        let dim = first.subspace.ambient_dim();
        let cell = (std::f64::consts::SQRT_2 * radius).max(1e-9);
        let mut cells: HashMap<Vec<i32>, Vec<(usize, Letter)>> = HashMap::new();
        let mut points = Vec::with_capacity(2 * sample.len());
        for b in sample {
            let Some(&l) = b.ray.letters().first() else {
                continue;
            };
            let v = b.subspace.direction();
            for w in [v.clone(), -v] {
                let key = Self::key_of(&w, cell);
                cells.entry(key).or_default().push((points.len(), l));
                points.push(w);
            }
        }
        Ok(Self {
            dim,
            radius,
            cell,
            cells,
            points,
        })
    }

    fn key_of(v: &DVector<f64>, cell: f64) -> Vec<i32> {
        v.iter().map(|x| (x / cell).floor() as i32).collect()
    }

    /// Whether `v` is within the radius of a sample point whose ray does
    /// not start with `excluded`.
    pub fn near(&self, v: &DVector<f64>, excluded: Option<Letter>) -> bool {
        let v = v / v.norm();
        let base = Self::key_of(&v, self.cell);
        let mut key = base.clone();
        let n = 3usize.pow(self.dim as u32);
        for code in 0..n {
            let mut c = code;
            for (i, k) in key.iter_mut().enumerate() {
                *k = base[i] + (c % 3) as i32 - 1;
                c /= 3;
            }
            if let Some(list) = self.cells.get(&key) {
                for &(i, l) in list {
                    if Some(l) == excluded {
                        continue;
                    }
                    if line_distance_slice(v.as_slice(), self.points[i].as_slice()) < self.radius {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// `mu(rho(eta) X(eta)) / mu(X(eta))`, where `X(eta)` is the set of atoms
/// within `delta/2` of sampled boundary points whose rays can follow
/// `eta`, together with the bracket
/// `(sigma_d/sigma_1)^h <= ratio <= (4/delta^2) (sigma_2/sigma_1)^h`.
pub fn shadow_ratio(
    rep: &Representation,
    eta: &GroupWord,
    measure: &PSMeasure,
    index: &LimitIndex,
    delta: f64,
    h: f64,
) -> Result<ShadowReport> {
    let Some(last) = eta.last() else {
        return Err(Error::InvalidInput("eta must be nontrivial".into()));
    };
    let excluded = Some(last.inverse());
    let inv: DMatrix<f64> = rep.evaluate(&eta.inverse()).entries().clone();
    let (base, image): (f64, f64) = measure
        .atoms
        .par_iter()
        .map(|a| {
            let b = if index.near(&a.point, excluded) {
                a.weight
            } else {
                0.0
            };
            let moved = &inv * &a.point;
            let i = if index.near(&moved, excluded) {
                a.weight
            } else {
                0.0
            };
            (b, i)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    if base == 0.0 || image == 0.0 {
        return Err(Error::EmptyShadow(eta.to_string()));
    }
    let sig = rep.word_log_sigmas(eta);
    let d = sig.len();
    let lower = (h * (sig[d - 1] - sig[0])).exp();
    let upper = 4.0 / (delta * delta) * (h * (sig[1] - sig[0])).exp();
    Ok(ShadowReport {
        eta: eta.clone(),
        ratio: image / base,
        lower,
        upper,
        mass_base: base,
        mass_image: image,
    })
}
