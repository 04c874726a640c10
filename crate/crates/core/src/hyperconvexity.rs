//! Transversality of boundary-map triples, convergence profiles and
//! direct-sum checks built on subspace intersections.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;

use crate::automaton::{ray_rng, BoundaryRay, GeodesicAutomaton, Letter};
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::geom::{direct_sum_margin, sin_distance, subspace_intersection, Subspace};
use crate::representation::BoundaryMap;

/// Minimum pairwise sine distance between the `xi^1` images of a triple.
pub const SEPARATION_FLOOR: f64 = 0.05;

/// Margins below this are numerically zero.
pub const MARGIN_RESOLUTION: f64 = 1e-7;

/// Residuals below this are treated as rounding noise in profile fits.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct TripleOptions {
    pub separation_floor: f64,
    /// Certified error bound for every boundary point.
    pub tol: f64,
}

impl Default for TripleOptions {
    fn default() -> Self {
        Self {
            separation_floor: SEPARATION_FLOOR,
            tol: MARGIN_RESOLUTION,
        }
    }
}

fn check_indices(d: usize, p: usize, q: usize, r: usize) -> Result<()> {
    if p == 0 || q == 0 || p + q > r || r > d {
        return Err(Error::InvalidInput(format!(
            "need 1 <= p, q and p + q <= r <= {d}, got ({p},{q},{r})"
        )));
    }
    Ok(())
}

fn check_separated(
    map: &BoundaryMap<'_>,
    rays: [&BoundaryRay; 3],
    opts: &TripleOptions,
) -> Result<[Subspace; 3]> {
    let need = map.depth_for(1, opts.tol)?;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if rays[i].common_prefix(rays[j]) >= need {
            return Err(Error::DegenerateTriple(format!(
                "rays {i} and {j} agree beyond depth {need}"
            )));
        }
    }
    let pts = [
        map.point(rays[0], 1, opts.tol)?.subspace,
        map.point(rays[1], 1, opts.tol)?.subspace,
        map.point(rays[2], 1, opts.tol)?.subspace,
    ];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let s = sin_distance(&pts[i], &pts[j])?;
        if s < opts.separation_floor {
            return Err(Error::DegenerateTriple(format!(
                "points {i} and {j} are {s:.3e} apart"
            )));
        }
    }
    Ok(pts)
}

/// `direct_sum_margin(xi^p(x), xi^q(y), xi^{d-r}(z))` for a separated triple.
#[allow(clippy::too_many_arguments)]
pub fn triple_margin(
    map: &BoundaryMap<'_>,
    p: usize,
    q: usize,
    r: usize,
    x: &BoundaryRay,
    y: &BoundaryRay,
    z: &BoundaryRay,
    opts: &TripleOptions,
) -> Result<f64> {
    let d = map.rep().dim();
    check_indices(d, p, q, r)?;
    check_separated(map, [x, y, z], opts)?;
    let xp = map.point(x, p, opts.tol)?.subspace;
    let yq = map.point(y, q, opts.tol)?.subspace;
    let zr = map.point(z, d - r, opts.tol)?.subspace;
    direct_sum_margin(&[&xp, &yq, &zr])
}

/// One evaluated triple of a scan.
#[derive(Clone, Debug)]
pub struct TripleRecord {
    pub id: usize,
    pub margin: f64,
    pub rays: [BoundaryRay; 3],
}

/// Outcome of a sampled hyperconvexity scan.
#[derive(Clone, Debug)]
pub struct TripleMarginReport {
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub triples_tested: usize,
    pub worst_margin: f64,
    pub witness: Option<[BoundaryRay; 3]>,
    pub separation_floor: f64,
    /// Levels evaluated without an Anosov certificate.
    pub uncertified: Vec<usize>,
    pub records: Vec<TripleRecord>,
}

impl TripleMarginReport {
    pub fn passed(&self, threshold: f64) -> bool {
        self.worst_margin > threshold
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ScanOptions {
    pub triple: TripleOptions,
    /// Number of distinct rays triples are drawn from.
    pub pool_size: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            triple: TripleOptions::default(),
            pool_size: 1024,
        }
    }
}

/// Samples `n_triples` separated triples from a seeded pool of rays and
/// records the smallest margin.
#[allow(clippy::too_many_arguments)]
pub fn hyperconvexity_scan(
    map: &BoundaryMap<'_>,
    automaton: &GeodesicAutomaton,
    p: usize,
    q: usize,
    r: usize,
    n_triples: usize,
    depth: usize,
    seed: u64,
    opts: &ScanOptions,
) -> Result<TripleMarginReport> {
    let d = map.rep().dim();
    check_indices(d, p, q, r)?;
    let mut report = TripleMarginReport {
        p,
        q,
        r,
        triples_tested: 0,
        worst_margin: 1.0,
        witness: None,
        separation_floor: opts.triple.separation_floor,
        uncertified: [p, q, d - r]
            .into_iter()
            .filter(|&l| !map.is_certified(l))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect(),
        records: Vec::new(),
    };
    if n_triples == 0 {
        return Ok(report);
    }
    let tol = opts.triple.tol;
    let pool_size = opts.pool_size.max(3);
    let pool = automaton.sample_boundary_rays(pool_size, depth, seed);
    let mut levels: BTreeMap<usize, Vec<Subspace>> = BTreeMap::new();
    for lvl in [1, p, q, d - r] {
        if let std::collections::btree_map::Entry::Vacant(e) = levels.entry(lvl) {
            let pts = map.points(&pool, lvl, tol)?;
            e.insert(pts.into_iter().map(|b| b.subspace).collect());
        }
    }
    let lines = &levels[&1];
    let need = map.depth_for(1, tol)?;

    let mut rng = ray_rng(seed, u64::MAX);
    let mut triples = Vec::with_capacity(n_triples);
    let max_attempts = 1000 * n_triples;
    let mut attempts = 0;
    while triples.len() < n_triples {
        attempts += 1;
        if attempts > max_attempts {
            return Err(Error::DegenerateTriple(format!(
                "only {} separated triples found in {max_attempts} draws",
                triples.len()
            )));
        }
        let i = rng.random_range(0..pool_size);
        let j = rng.random_range(0..pool_size);
        let k = rng.random_range(0..pool_size);
        if i == j || i == k || j == k {
            continue;
        }
        let ok = [(i, j), (i, k), (j, k)].iter().all(|&(a, b)| {
            pool[a].common_prefix(&pool[b]) < need
                && sin_distance(&lines[a], &lines[b]).unwrap_or(0.0) >= opts.triple.separation_floor
        });
        if ok {
            triples.push((i, j, k));
        }
    }

    let margins: Vec<f64> = triples
        .par_iter()
        .map(|&(i, j, k)| {
            direct_sum_margin(&[&levels[&p][i], &levels[&q][j], &levels[&(d - r)][k]])
        })
        .collect::<Result<_>>()?;

    let mut worst = (1.0, None);
    for (id, (&(i, j, k), &m)) in triples.iter().zip(&margins).enumerate() {
        if m < worst.0 || worst.1.is_none() {
            worst = (m, Some(id));
        }
        report.records.push(TripleRecord {
            id,
            margin: m,
            rays: [pool[i].clone(), pool[j].clone(), pool[k].clone()],
        });
    }
    report.triples_tested = triples.len();
    report.worst_margin = worst.0;
    report.witness = worst.1.map(|id| report.records[id].rays.clone());
    Ok(report)
}

/// Residuals `d(xi^p(w_i) + xi^q(y_i), xi^r(x))` along a ray, with a fitted
/// exponential rate.
#[derive(Clone, Debug)]
pub struct ConvergenceProfile {
    pub steps: Vec<(usize, f64)>,
    pub fitted_rate: f64,
    pub fitted_const: f64,
}

impl ConvergenceProfile {
    pub fn residual_at(&self, i: usize) -> Option<f64> {
        self.steps.iter().find(|s| s.0 == i).map(|s| s.1)
    }
}

/// For each step `i`, draws two continuations of the first `i` letters of
/// `x` with different next letters and measures how far the sum of their
/// boundary subspaces is from `xi^r(x)`. Everything is computed for the
/// shifted rays and pushed forward by the prefix one letter at a time.
#[allow(clippy::too_many_arguments)]
pub fn convergence_profile(
    map: &BoundaryMap<'_>,
    automaton: &GeodesicAutomaton,
    p: usize,
    q: usize,
    r: usize,
    x: &BoundaryRay,
    steps: &[usize],
    seed: u64,
    tol: f64,
) -> Result<ConvergenceProfile> {
    let d = map.rep().dim();
    check_indices(d, p, q, r)?;
    let rep = map.rep();
    let need = [p, q, r]
        .iter()
        .map(|&l| map.depth_for(l, tol))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let live = automaton.live_states();
    let mut out = Vec::with_capacity(steps.len());
    for (n, &i) in steps.iter().enumerate() {
        if i + need > x.depth() {
            return Err(Error::RayTooShort {
                have: x.depth(),
                need: i + need,
            });
        }
        let prefix = &x.letters()[..i];
        let state = automaton
            .run_from(automaton.initial(), prefix)
            .ok_or_else(|| Error::InvalidInput(format!("ray prefix of length {i} not accepted")))?;
        let firsts: Vec<(Letter, usize)> = automaton
            .out_edges(state)
            .filter(|&(_, t)| live[t])
            .collect();
        if firsts.len() < 2 {
            return Err(Error::DegenerateTriple(format!(
                "cone after {i} letters has a single direction"
            )));
        }
        let mut rng = ray_rng(seed, n as u64);
        let a = rng.random_range(0..firsts.len());
        let mut b = rng.random_range(0..firsts.len() - 1);
        if b >= a {
            b += 1;
        }
        let cont = |(l, t): (Letter, usize), rng: &mut rand_chacha::ChaCha8Rng| {
            let mut letters = vec![l];
            letters.extend(automaton.random_path(t, need + 1, rng, &live));
            BoundaryRay::from_letters(letters, seed)
        };
        let w = cont(firsts[a], &mut rng);
        let y = cont(firsts[b], &mut rng);
        let xs = x.shifted(i);
        let wp = map.point(&w, p, tol)?.subspace;
        let yq = map.point(&y, q, tol)?.subspace;
        let xr = map.point(&xs, r, tol)?.subspace;
        let sum = wp.direct_sum(&yq)?;
        let pushed_sum = rep.apply_letters(prefix, &sum);
        let pushed_x = rep.apply_letters(prefix, &xr);
        out.push((i, sin_distance(&pushed_sum, &pushed_x)?));
    }
    let (rate, c) = fit_profile(&out);
    Ok(ConvergenceProfile {
        steps: out,
        fitted_rate: rate,
        fitted_const: c,
    })
}

fn fit_profile(steps: &[(usize, f64)]) -> (f64, f64) {
    let half = steps.len() / 2;
    let usable = |s: &[(usize, f64)]| -> (Vec<f64>, Vec<f64>) {
        s.iter()
            .filter(|&&(_, v)| v > RESIDUAL_FLOOR)
            .map(|&(i, v)| (i as f64, v.ln()))
            .unzip()
    };
    let (mut xs, mut ys) = usable(&steps[half..]);
    if xs.len() < 2 {
        (xs, ys) = usable(steps);
    }
    match fit_line(&xs, &ys) {
        Some(f) => (-f.slope, f.intercept.exp()),
        None => (0.0, 0.0),
    }
}

/// Margin of `xi^p(x) + (xi^p(z) ∩ xi^{q_dim}(y)) + xi^{d-s}(y)`; zero means
/// the sum is not direct.
#[allow(clippy::too_many_arguments)]
pub fn property_h_margin(
    map: &BoundaryMap<'_>,
    x: &BoundaryRay,
    y: &BoundaryRay,
    z: &BoundaryRay,
    p: usize,
    q_dim: usize,
    s: usize,
    opts: &TripleOptions,
    intersection_tol: f64,
) -> Result<f64> {
    let d = map.rep().dim();
    if p == 0 || q_dim > d || s > d || p + q_dim < d {
        return Err(Error::InvalidInput(format!(
            "bad indices p={p} q_dim={q_dim} s={s} in dimension {d}"
        )));
    }
    check_separated(map, [x, y, z], opts)?;
    let xp = map.point(x, p, opts.tol)?.subspace;
    let yq = map.point(y, q_dim, opts.tol)?.subspace;
    let zp = map.point(z, p, opts.tol)?.subspace;
    let ys = map.point(y, d - s, opts.tol)?.subspace;
    let mid = subspace_intersection(&zp, &yq, intersection_tol)?;
    let expected = p + q_dim - d;
    if mid.rank() != expected || expected == 0 {
        return Err(Error::EmptyIntersection {
            got: mid.rank(),
            expected,
        });
    }
    direct_sum_margin(&[&xp, &mid, &ys])
}
