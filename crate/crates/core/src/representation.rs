//! Representations of free groups: word evaluation, Anosov certificates,
//! boundary maps and stereographic projections.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::automaton::{
    BoundaryRay, GeneratorAlphabet, GeodesicAutomaton, GroupWord, Letter, StateId,
};
use crate::error::{Error, Result};
use crate::exterior::{compound, subspace_from_plucker};
use crate::fit::fit_line;
use crate::geom::{top_singular_value, SquareMatrix, Subspace, TOL_GAP};

/// Default pass threshold for the fitted exponential rate, in nats per letter.
pub const MU_MIN: f64 = 0.01;

/// Default cap on the number of words scanned in a ball.
pub const DEFAULT_MAX_BALL: u128 = 2_000_000;

/// Generator images of a free-group representation. Letter `2i-1` maps to
/// the `i`-th generator image and letter `2i` to its inverse.
pub struct Representation {
    dim: usize,
    images: Vec<DMatrix<f64>>,
    label: String,
    log_dets: Vec<f64>,
    compounds: Vec<OnceLock<Vec<DMatrix<f64>>>>,
}

impl Clone for Representation {
    fn clone(&self) -> Self {
        Self {
            dim: self.dim,
            images: self.images.clone(),
            label: self.label.clone(),
            log_dets: self.log_dets.clone(),
            compounds: self.compounds.clone(),
        }
    }
}

impl fmt::Debug for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Representation")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("rank", &self.rank())
            .finish()
    }
}

impl Representation {
    /// Builds a representation from generator images; inverses are computed.
    pub fn new(label: impl Into<String>, generators: Vec<DMatrix<f64>>) -> Result<Self> {
        let mut pairs = Vec::with_capacity(generators.len());
        for g in generators {
            let inv = g.clone().try_inverse().ok_or(Error::SingularInput(0.0))?;
            pairs.push((g, inv));
        }
        Self::from_pairs(label, pairs)
    }

    /// Builds a representation from `(image, inverse image)` pairs.
    pub fn from_pairs(
        label: impl Into<String>,
        pairs: Vec<(DMatrix<f64>, DMatrix<f64>)>,
    ) -> Result<Self> {
        let Some(first) = pairs.first() else {
            return Err(Error::InvalidInput(
                "representation needs a generator".into(),
            ));
        };
        let dim = first.0.nrows();
        let mut images = Vec::with_capacity(2 * pairs.len());
        let mut log_dets = Vec::with_capacity(2 * pairs.len());
        for (g, inv) in pairs {
            for m in [&g, &inv] {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(Error::DimensionMismatch(m.nrows(), dim));
                }
                if !m.iter().all(|x| x.is_finite()) {
                    return Err(Error::InvalidInput("non-finite generator entry".into()));
                }
            }
            let err = (&g * &inv - DMatrix::identity(dim, dim)).amax();
            if err > 1e-10 {
                return Err(Error::Validation(format!(
                    "generator times inverse differs from identity by {err:e}"
                )));
            }
            let ld = g.clone().lu().determinant().abs().ln();
            if !ld.is_finite() {
                return Err(Error::SingularInput(0.0));
            }
            log_dets.push(ld);
            log_dets.push(-ld);
            images.push(g);
            images.push(inv);
        }
        Ok(Self {
            dim,
            images,
            label: label.into(),
            log_dets,
            compounds: (1..dim).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Every generator mapped to the identity of `dim`.
    pub fn trivial(dim: usize, rank: u16) -> Self {
        let pairs = (0..rank)
            .map(|_| (DMatrix::identity(dim, dim), DMatrix::identity(dim, dim)))
            .collect();
        Self::from_pairs(format!("trivial({dim})"), pairs).expect("identity is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> u16 {
        (self.images.len() / 2) as u16
    }

    pub fn alphabet(&self) -> GeneratorAlphabet {
        GeneratorAlphabet::new(self.rank())
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn image(&self, l: Letter) -> &DMatrix<f64> {
        &self.images[l.index()]
    }

    /// `(image, inverse image)` for each generator.
    pub fn generator_pairs(&self) -> Vec<(DMatrix<f64>, DMatrix<f64>)> {
        self.images
            .chunks(2)
            .map(|c| (c[0].clone(), c[1].clone()))
            .collect()
    }

    /// The `k`-th compound of each letter image, `1 <= k < dim`.
    pub fn compound_images(&self, k: usize) -> &[DMatrix<f64>] {
        if k == 1 {
            return &self.images;
        }
        self.compounds[k - 1].get_or_init(|| self.images.iter().map(|m| compound(m, k)).collect())
    }

    /// Largest condition number `|A| |A^-1|` over the generators.
    pub fn kappa_max(&self) -> f64 {
        self.images
            .chunks(2)
            .map(|c| top_singular_value(&c[0]) * top_singular_value(&c[1]))
            .fold(1.0, f64::max)
    }

    /// Image of a word normalized to unit top singular value.
    pub fn evaluate(&self, w: &GroupWord) -> SquareMatrix {
        self.evaluate_letters(w.letters())
    }

    pub fn evaluate_letters(&self, letters: &[Letter]) -> SquareMatrix {
        let mut m = SquareMatrix::identity(self.dim);
        for &l in letters {
            let g = SquareMatrix::new(self.image(l).clone()).expect("validated generator");
            m = m.mul(&g);
        }
        m.normalized()
    }

    /// Image of a subspace under the word, applying letters from the last
    /// one and re-orthonormalizing after each step.
    pub fn apply_letters(&self, letters: &[Letter], s: &Subspace) -> Subspace {
        let mut cur = s.clone();
        for &l in letters.iter().rev() {
            cur = cur.image(self.image(l));
        }
        cur
    }

    pub fn apply_word(&self, w: &GroupWord, s: &Subspace) -> Subspace {
        self.apply_letters(w.letters(), s)
    }

    pub fn tower(&self, letters: &[Letter], levels: usize) -> Tower {
        let mut t = Tower::identity(self, levels);
        for &l in letters {
            t = t.push(self, l);
        }
        t
    }

    /// `log(sigma_{p+1}/sigma_p)` of the word image.
    pub fn word_log_gap(&self, w: &GroupWord, p: usize) -> Result<f64> {
        check_p(p, self.dim)?;
        Ok(self.tower(w.letters(), p + 1).log_gap(p))
    }

    /// All `log sigma_i` of the word image, accurate even for the smallest
    /// singular values.
    pub fn word_log_sigmas(&self, w: &GroupWord) -> Vec<f64> {
        let t = self.tower(w.letters(), self.dim - 1);
        (1..=self.dim)
            .map(|i| t.log_top(i) - t.log_top(i - 1))
            .collect()
    }

    /// Cartan attractor `U_p` of the word image.
    pub fn word_attractor(&self, w: &GroupWord, p: usize) -> Result<Subspace> {
        check_p(p, self.dim)?;
        let t = self.tower(w.letters(), p + 1);
        let ratio = t.log_gap(p).exp();
        if ratio >= 1.0 - TOL_GAP {
            return Err(Error::NoGap { p, ratio });
        }
        Ok(t.attractor(p))
    }
}

fn check_p(p: usize, d: usize) -> Result<()> {
    if p == 0 || p >= d {
        Err(Error::IndexOutOfRange {
            index: p,
            max: d.saturating_sub(1),
        })
    } else {
        Ok(())
    }
}

/// Running products of the exterior powers `\wedge^k rho(w)` for
/// `k = 1..=levels`, each stored normalized with a log scale, so that
/// `log sigma_1(\wedge^k) = sigma_1 + ... + sigma_k` in log form stays accurate.
#[derive(Clone, Debug)]
pub struct Tower {
    dim: usize,
    mats: Vec<DMatrix<f64>>,
    scales: Vec<f64>,
    log_det: f64,
}

impl Tower {
    pub fn identity(rep: &Representation, levels: usize) -> Self {
        let levels = levels.min(rep.dim.saturating_sub(1));
        let d = rep.dim;
        Self {
            dim: d,
            mats: (1..=levels)
                .map(|k| {
                    let n = crate::exterior::binomial(d, k);
                    DMatrix::identity(n, n)
                })
                .collect(),
            scales: vec![0.0; levels],
            log_det: 0.0,
        }
    }

    /// Right multiplication by the image of `l`.
    pub fn push(&self, rep: &Representation, l: Letter) -> Self {
        let mut mats = Vec::with_capacity(self.mats.len());
        let mut scales = Vec::with_capacity(self.mats.len());
        for (k, m) in self.mats.iter().enumerate() {
            let mut p = m * &rep.compound_images(k + 1)[l.index()];
            let a = p.amax();
            let mut s = self.scales[k];
            if a > 0.0 {
                p /= a;
                s += a.ln();
            }
            mats.push(p);
            scales.push(s);
        }
        Self {
            dim: self.dim,
            mats,
            scales,
            log_det: self.log_det + rep.log_dets[l.index()],
        }
    }

    pub fn levels(&self) -> usize {
        self.mats.len()
    }

    /// `log(sigma_1 ... sigma_k)`.
    pub fn log_top(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else if k == self.dim {
            self.log_det
        } else {
            self.scales[k - 1] + top_singular_value(&self.mats[k - 1]).ln()
        }
    }

    /// `log(sigma_{p+1}/sigma_p)`; needs `p+1` levels unless `p+1 = dim`.
    pub fn log_gap(&self, p: usize) -> f64 {
        self.log_top(p + 1) - 2.0 * self.log_top(p) + self.log_top(p - 1)
    }

    /// The Cartan attractor `U_p`, recovered from the top singular vector of
    /// the `p`-th exterior power.
    pub fn attractor(&self, p: usize) -> Subspace {
        let m = &self.mats[p - 1];
        let crate::geom::Svd { u, s, .. } = crate::geom::svd(m);
        let i = s.imax();
        let v: DVector<f64> = u.column(i).into_owned();
        if p == 1 {
            Subspace::line(&canonical_sign(v))
        } else {
            subspace_from_plucker(&v, self.dim, p)
        }
    }
}

pub(crate) fn canonical_sign(v: DVector<f64>) -> DVector<f64> {
    let i = v.iamax();
    if v[i] < 0.0 {
        -v
    } else {
        v
    }
}

/// Visits every word of the ball of radius `radius` with its tower,
/// returning per-radius results in lexicographic word order.
pub(crate) fn scan_ball<T, F>(
    rep: &Representation,
    automaton: &GeodesicAutomaton,
    radius: usize,
    levels: usize,
    max_ball: u128,
    f: F,
) -> Result<Vec<Vec<T>>>
where
    T: Send,
    F: Fn(&[Letter], &Tower) -> T + Sync,
{
    check_automaton(rep, automaton)?;
    let size = automaton.ball_size(radius);
    if size > max_ball {
        return Err(Error::BallTooLarge {
            radius,
            size,
            budget: max_ball,
        });
    }
    let split = radius.min(2);
    let mut out: Vec<Vec<T>> = (0..=radius).map(|_| Vec::new()).collect();
    let mut roots: Vec<(Vec<Letter>, StateId, Tower)> = Vec::new();
    let root = Tower::identity(rep, levels);
    collect_roots(
        rep,
        automaton,
        automaton.initial(),
        &mut Vec::new(),
        &root,
        split,
        &f,
        &mut out,
        &mut roots,
    );
    let parts: Vec<Vec<Vec<T>>> = roots
        .par_iter()
        .map(|(word, state, tower)| {
            let mut local: Vec<Vec<T>> = (0..=radius).map(|_| Vec::new()).collect();
            let mut w = word.clone();
            dfs(
                rep, automaton, *state, &mut w, tower, radius, &f, &mut local,
            );
            local
        })
        .collect();
    for part in parts {
        for (k, v) in part.into_iter().enumerate() {
            out[k].extend(v);
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn collect_roots<T, F>(
    rep: &Representation,
    automaton: &GeodesicAutomaton,
    state: StateId,
    word: &mut Vec<Letter>,
    tower: &Tower,
    split: usize,
    f: &F,
    out: &mut [Vec<T>],
    roots: &mut Vec<(Vec<Letter>, StateId, Tower)>,
) where
    F: Fn(&[Letter], &Tower) -> T,
{
    if word.len() == split {
        roots.push((word.clone(), state, tower.clone()));
        return;
    }
    out[word.len()].push(f(word, tower));
    for (l, t) in automaton.out_edges(state) {
        let child = tower.push(rep, l);
        word.push(l);
        collect_roots(rep, automaton, t, word, &child, split, f, out, roots);
        word.pop();
    }
}

#[allow(clippy::too_many_arguments)]
fn dfs<T, F>(
    rep: &Representation,
    automaton: &GeodesicAutomaton,
    state: StateId,
    word: &mut Vec<Letter>,
    tower: &Tower,
    radius: usize,
    f: &F,
    out: &mut [Vec<T>],
) where
    F: Fn(&[Letter], &Tower) -> T,
{
    out[word.len()].push(f(word, tower));
    if word.len() == radius {
        return;
    }
    for (l, t) in automaton.out_edges(state) {
        let child = tower.push(rep, l);
        word.push(l);
        dfs(rep, automaton, t, word, &child, radius, f, out);
        word.pop();
    }
}

pub(crate) fn check_automaton(rep: &Representation, automaton: &GeodesicAutomaton) -> Result<()> {
    if automaton.alphabet().rank() != rep.rank() {
        return Err(Error::Validation(format!(
            "automaton has {} generators, representation has {}",
            automaton.alphabet().rank(),
            rep.rank()
        )));
    }
    Ok(())
}

/// `log(sigma_{p+1}/sigma_p)` for every word of the ball, per radius.
pub fn ball_log_gaps(
    rep: &Representation,
    automaton: &GeodesicAutomaton,
    p: usize,
    radius: usize,
    max_ball: u128,
) -> Result<Vec<Vec<f64>>> {
    check_p(p, rep.dim())?;
    scan_ball(rep, automaton, radius, p + 1, max_ball, |_, t| t.log_gap(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Exhaustive finite check of exponential gap decay over a ball.
#[derive(Clone, Debug)]
pub struct AnosovCertificate {
    pub p: usize,
    pub radius: usize,
    /// `log` of the largest gap ratio on each sphere, indexed by radius.
    pub worst_log_gap: Vec<f64>,
    pub fitted_mu: f64,
    pub fitted_c: f64,
    pub r_squared: f64,
    /// Smallest `c` with `worst_gap(k) <= c exp(-mu k)` for all scanned `k`.
    pub envelope_c: f64,
    pub mu_min: f64,
    pub verdict: Verdict,
}

impl AnosovCertificate {
    pub fn per_radius_worst_gap(&self) -> Vec<(usize, f64)> {
        self.worst_log_gap
            .iter()
            .enumerate()
            .map(|(k, g)| (k, g.exp()))
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CertifyOptions {
    pub mu_min: f64,
    pub max_ball: u128,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            mu_min: MU_MIN,
            max_ball: DEFAULT_MAX_BALL,
        }
    }
}

/// Certificate from per-radius worst log gaps.
pub fn certificate_from_worst(p: usize, worst_log_gap: Vec<f64>, mu_min: f64) -> AnosovCertificate {
    let radius = worst_log_gap.len() - 1;
    let lo = radius.div_ceil(2);
    let xs: Vec<f64> = (lo..=radius).map(|k| k as f64).collect();
    let ys: Vec<f64> = (lo..=radius).map(|k| -worst_log_gap[k]).collect();
    let (mu, c, r2) = match fit_line(&xs, &ys) {
        Some(f) => (f.slope, (-f.intercept).exp(), f.r_squared),
        None => (0.0, 1.0, 0.0),
    };
    let envelope_c = worst_log_gap
        .iter()
        .enumerate()
        .map(|(k, g)| g + mu * k as f64)
        .fold(f64::NEG_INFINITY, f64::max)
        .exp();
    let last_ok = worst_log_gap[radius].exp() < 1.0 - TOL_GAP;
    let verdict = if mu > mu_min && last_ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    AnosovCertificate {
        p,
        radius,
        worst_log_gap,
        fitted_mu: mu,
        fitted_c: c,
        r_squared: r2,
        envelope_c,
        mu_min,
        verdict,
    }
}

/// Scans the whole ball of radius `radius` and fits the exponential decay
/// of the worst gap ratio per sphere.
pub fn certify_anosov(
    rep: &Representation,
    automaton: &GeodesicAutomaton,
    p: usize,
    radius: usize,
    options: CertifyOptions,
) -> Result<AnosovCertificate> {
    if radius < 4 {
        return Err(Error::InvalidInput(format!("radius {radius} below 4")));
    }
    let gaps = ball_log_gaps(rep, automaton, p, radius, options.max_ball)?;
    let worst: Vec<f64> = gaps
        .iter()
        .map(|v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(certificate_from_worst(p, worst, options.mu_min))
}

/// Constants of the geometric tail bound for boundary points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryParams {
    pub c: f64,
    pub mu: f64,
    /// Largest `|A| |A^-1|` over generators.
    pub kappa: f64,
}

impl BoundaryParams {
    pub fn from_certificate(cert: &AnosovCertificate, rep: &Representation) -> Result<Self> {
        if !cert.passed() {
            return Err(Error::NotCertified(cert.p));
        }
        Ok(Self {
            c: cert.envelope_c.max(1.0),
            mu: cert.fitted_mu,
            kappa: rep.kappa_max(),
        })
    }

    /// Bound on the distance from the attractor at depth `n` to the limit.
    pub fn tail(&self, n: usize) -> f64 {
        self.kappa * self.c * (-self.mu * n as f64).exp() / (1.0 - (-self.mu).exp())
    }

    /// Smallest depth whose tail is at most `tol`.
    pub fn depth_for(&self, tol: f64) -> usize {
        let x = (self.kappa * self.c / ((1.0 - (-self.mu).exp()) * tol)).ln() / self.mu;
        let mut n = x.ceil().max(1.0) as usize;
        while n > 1 && self.tail(n - 1) <= tol {
            n -= 1;
        }
        while self.tail(n) > tol {
            n += 1;
        }
        n
    }
}

/// Approximation of `xi^p(x)` with a certified error bound.
#[derive(Clone, Debug)]
pub struct BoundaryPoint {
    pub ray: BoundaryRay,
    pub p: usize,
    pub subspace: Subspace,
    pub error_bound: f64,
    pub depth: usize,
}

/// Boundary maps of a representation at the indices it was certified for.
#[derive(Clone, Debug)]
pub struct BoundaryMap<'a> {
    rep: &'a Representation,
    params: BTreeMap<usize, BoundaryParams>,
    fallback_depth: Option<usize>,
}

impl<'a> BoundaryMap<'a> {
    pub fn new(rep: &'a Representation) -> Self {
        Self {
            rep,
            params: BTreeMap::new(),
            fallback_depth: None,
        }
    }

    /// Certifies each index in `ps`; failing indices are left uncertified.
    pub fn certify(
        rep: &'a Representation,
        automaton: &GeodesicAutomaton,
        ps: &[usize],
        radius: usize,
        options: CertifyOptions,
    ) -> Result<(Self, Vec<AnosovCertificate>)> {
        let mut map = Self::new(rep);
        let mut certs = Vec::new();
        for &p in ps {
            if p == 0 || p >= rep.dim() || map.params.contains_key(&p) {
                continue;
            }
            let cert = certify_anosov(rep, automaton, p, radius, options)?;
            if let Ok(params) = BoundaryParams::from_certificate(&cert, rep) {
                map.params.insert(p, params);
            }
            certs.push(cert);
        }
        Ok((map, certs))
    }

    pub fn with_params(mut self, p: usize, params: BoundaryParams) -> Self {
        self.params.insert(p, params);
        self
    }

    /// Evaluates levels without a certificate as Cartan attractors of the
    /// length-`depth` ray prefix. Such points carry an infinite error bound.
    pub fn with_uncertified_depth(mut self, depth: usize) -> Self {
        self.fallback_depth = Some(depth);
        self
    }

    pub fn uncertified_depth(&self) -> Option<usize> {
        self.fallback_depth
    }

    pub fn rep(&self) -> &'a Representation {
        self.rep
    }

    pub fn params(&self, p: usize) -> Option<&BoundaryParams> {
        self.params.get(&p)
    }

    pub fn is_certified(&self, p: usize) -> bool {
        p == 0 || p == self.rep.dim() || self.params.contains_key(&p)
    }

    /// Depth at which points of level `p` meet `tol`.
    pub fn depth_for(&self, p: usize, tol: f64) -> Result<usize> {
        if p == 0 || p == self.rep.dim() {
            return Ok(0);
        }
        match (self.params.get(&p), self.fallback_depth) {
            (Some(params), _) => Ok(params.depth_for(tol)),
            (None, Some(n)) => Ok(n),
            (None, None) => Err(Error::NotCertified(p)),
        }
    }

    /// `xi^p(x)` from the Cartan attractor of the shortest ray prefix whose
    /// certified tail bound is at most `tol`.
    pub fn point(&self, ray: &BoundaryRay, p: usize, tol: f64) -> Result<BoundaryPoint> {
        let d = self.rep.dim();
        if p == 0 || p == d {
            let subspace = if p == 0 {
                Subspace::zero(d)
            } else {
                Subspace::coordinate(d, &(0..d).collect::<Vec<_>>())
            };
            return Ok(BoundaryPoint {
                ray: ray.clone(),
                p,
                subspace,
                error_bound: 0.0,
                depth: 0,
            });
        }
        if p > d {
            return Err(Error::IndexOutOfRange { index: p, max: d });
        }
        let params = self.params.get(&p);
        let n = match (params, self.fallback_depth) {
            (Some(params), _) => params.depth_for(tol),
            (None, Some(n)) => n,
            (None, None) => return Err(Error::NotCertified(p)),
        };
        if n > ray.depth() {
            return Err(Error::RayTooShort {
                have: ray.depth(),
                need: n,
            });
        }
        let t = self.rep.tower(&ray.letters()[..n], p + 1);
        if t.log_gap(p).exp() >= 1.0 - TOL_GAP {
            return Err(Error::NoGapAlongRay { p, prefix: n });
        }
        Ok(BoundaryPoint {
            ray: ray.clone(),
            p,
            subspace: t.attractor(p),
            error_bound: params.map_or(f64::INFINITY, |q| q.tail(n)),
            depth: n,
        })
    }

    pub fn points(&self, rays: &[BoundaryRay], p: usize, tol: f64) -> Result<Vec<BoundaryPoint>> {
        rays.par_iter().map(|r| self.point(r, p, tol)).collect()
    }
}

/// Samples `count` boundary rays and evaluates `xi^p` on each.
pub fn limit_set_sample(
    map: &BoundaryMap<'_>,
    automaton: &GeodesicAutomaton,
    p: usize,
    count: usize,
    depth: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<BoundaryPoint>> {
    let rays = automaton.sample_boundary_rays(count, depth, seed);
    map.points(&rays, p, tol)
}

/// Image of the line `x` in the quotient by `z`, in coordinates of the
/// orthonormal complement of `z`.
pub fn stereographic_projection(z: &Subspace, x: &Subspace, tol: f64) -> Result<Subspace> {
    if z.ambient_dim() != x.ambient_dim() {
        return Err(Error::DimensionMismatch(z.ambient_dim(), x.ambient_dim()));
    }
    if x.rank() != 1 {
        return Err(Error::InvalidInput(
            "stereographic projection needs a line".into(),
        ));
    }
    let c = z.complement();
    let coords = c.frame().transpose() * x.direction();
    let margin = coords.norm();
    if margin <= tol {
        return Err(Error::NotTransverse(margin));
    }
    Ok(Subspace::line(&canonical_sign(coords)))
}
