//! Linear algebra over R^d: Cartan decompositions, gap ratios, and
//! angles and distances between subspaces.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance below which two consecutive singular values are
/// considered equal and the attractor is undefined.
pub const TOL_GAP: f64 = 1e-8;

/// Default tolerance on the sine of principal angles used by
/// [`subspace_intersection`].
pub const DEFAULT_INTERSECTION_TOL: f64 = 1e-6;

const SINGULAR_FLOOR: f64 = 1e-300;

/// Full singular value decomposition with singular values sorted
/// non-increasing: column `i` of `u` and `v` pairs with `s[i]`.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub s: DVector<f64>,
    pub v: DMatrix<f64>,
}

fn to_faer(m: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub(crate) fn svd(m: &DMatrix<f64>) -> Svd {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Svd {
            u: DMatrix::identity(r, r),
            s: DVector::zeros(0),
            v: DMatrix::identity(c, c),
        };
    }
    let f = to_faer(m).svd().expect("svd converges");
    let s = f.S().column_vector();
    Svd {
        u: from_faer(f.U()),
        s: DVector::from_fn(r.min(c), |i, _| s[i]),
        v: from_faer(f.V()),
    }
}

pub(crate) fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(0);
    }
    DVector::from_vec(to_faer(m).singular_values().expect("svd converges"))
}

/// A square real matrix stored as `exp(log_scale) * entries`.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    entries: DMatrix<f64>,
    log_scale: f64,
}

impl SquareMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        Self::with_log_scale(entries, 0.0)
    }

    pub fn with_log_scale(entries: DMatrix<f64>, log_scale: f64) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch(entries.nrows(), entries.ncols()));
        }
        if entries.nrows() == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if !entries.iter().all(|x| x.is_finite()) || !log_scale.is_finite() {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self { entries, log_scale })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: DMatrix::identity(dim, dim),
            log_scale: 0.0,
        }
    }

    pub fn from_row_slice(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch(rows.len(), dim * dim));
        }
        Self::new(DMatrix::from_row_slice(dim, dim, rows))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// The matrix with the scale folded back in. Overflows for huge scales.
    pub fn to_dense(&self) -> DMatrix<f64> {
        &self.entries * self.log_scale.exp()
    }

    /// Rescales so the top singular value of `entries` is one.
    pub fn normalized(&self) -> Self {
        let s = top_singular_value(&self.entries);
        if s > 0.0 && s.is_finite() {
            Self {
                entries: &self.entries / s,
                log_scale: self.log_scale + s.ln(),
            }
        } else {
            self.clone()
        }
    }

    /// Product `self * other`, renormalized by the largest entry.
    pub fn mul(&self, other: &SquareMatrix) -> Self {
        let mut entries = &self.entries * &other.entries;
        let mut log_scale = self.log_scale + other.log_scale;
        let m = entries.amax();
        if m > 0.0 && m.is_finite() {
            entries /= m;
            log_scale += m.ln();
        }
        Self { entries, log_scale }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self
            .entries
            .clone()
            .try_inverse()
            .ok_or(Error::SingularInput(0.0))?;
        Ok(Self {
            entries: inv,
            log_scale: -self.log_scale,
        })
    }

    pub fn transpose(&self) -> Self {
        Self {
            entries: self.entries.transpose(),
            log_scale: self.log_scale,
        }
    }

    /// Operator norm, returned as a logarithm.
    pub fn log_norm(&self) -> f64 {
        top_singular_value(&self.entries).ln() + self.log_scale
    }
}

/// Singular value decomposition `g = left * diag(sigma) * right^T`, with the
/// singular values of the actual matrix equal to `sigma * exp(log_scale)`.
#[derive(Clone, Debug)]
pub struct CartanDecomposition {
    pub sigma: Vec<f64>,
    pub left_frame: DMatrix<f64>,
    pub right_frame: DMatrix<f64>,
    pub log_scale: f64,
}

impl CartanDecomposition {
    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    /// `log sigma_i` of the actual matrix, 1-based.
    pub fn log_sigma(&self, i: usize) -> f64 {
        self.sigma[i - 1].ln() + self.log_scale
    }

    /// Reconstructs `entries` (without the scale).
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let s = DMatrix::from_diagonal(&DVector::from_column_slice(&self.sigma));
        &self.left_frame * s * self.right_frame.transpose()
    }

    pub fn gap_ratio(&self, p: usize) -> Result<f64> {
        check_gap_index(p, self.dim())?;
        Ok(self.sigma[p] / self.sigma[p - 1])
    }

    /// Span of the first `p` columns of the left frame.
    pub fn attractor(&self, p: usize) -> Result<Subspace> {
        check_index(p, self.dim())?;
        if p < self.dim() {
            let ratio = self.sigma[p] / self.sigma[p - 1];
            if ratio >= 1.0 - TOL_GAP {
                return Err(Error::NoGap { p, ratio });
            }
        }
        Ok(Subspace {
            frame: self.left_frame.columns(0, p).into_owned(),
        })
    }
}

fn check_index(p: usize, d: usize) -> Result<()> {
    if p == 0 || p > d {
        Err(Error::IndexOutOfRange { index: p, max: d })
    } else {
        Ok(())
    }
}

fn check_gap_index(p: usize, d: usize) -> Result<()> {
    if p == 0 || p + 1 > d {
        Err(Error::IndexOutOfRange {
            index: p,
            max: d.saturating_sub(1),
        })
    } else {
        Ok(())
    }
}

pub(crate) fn top_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.norm();
    }
    singular_values(m).max()
}

/// Computes the Cartan (singular value) decomposition of `g`.
///
/// Singular values are sorted non-increasing. Columns sharing a singular
/// value are ordered by decreasing absolute first component, and each left
/// column is signed so its largest entry is positive.
pub fn cartan(g: &SquareMatrix) -> Result<CartanDecomposition> {
    let d = g.dim();
    let Svd { u, s, v } = svd(&g.entries);
    let smax = s.max();
    if !(smax > 0.0) || s.min() / smax < SINGULAR_FLOOR {
        return Err(Error::SingularInput(if smax > 0.0 {
            s.min() / smax
        } else {
            0.0
        }));
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    // reorder ties deterministically
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (s[order[start]] - s[order[end]]).abs() <= 1e-12 * smax {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].sort_by(|&i, &j| {
                for r in 0..d {
                    let c = u[(r, j)].abs().total_cmp(&u[(r, i)].abs());
                    if c != std::cmp::Ordering::Equal {
                        return c;
                    }
                }
                i.cmp(&j)
            });
        }
        start = end;
    }

    let mut left = DMatrix::zeros(d, d);
    let mut right = DMatrix::zeros(d, d);
    let mut sigma = Vec::with_capacity(d);
    for (k, &i) in order.iter().enumerate() {
        let mut col = u.column(i).into_owned();
        let mut rcol = v.column(i).into_owned();
        if leading_sign(col.as_slice()) < 0.0 {
            col = -col;
            rcol = -rcol;
        }
        left.set_column(k, &col);
        right.set_column(k, &rcol);
        sigma.push(s[i]);
    }
    Ok(CartanDecomposition {
        sigma,
        left_frame: left,
        right_frame: right,
        log_scale: g.log_scale,
    })
}

fn leading_sign(v: &[f64]) -> f64 {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v[best] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `sigma_{p+1}(g) / sigma_p(g)`.
pub fn gap_ratio(g: &SquareMatrix, p: usize) -> Result<f64> {
    check_gap_index(p, g.dim())?;
    cartan(g)?.gap_ratio(p)
}

/// The Cartan attractor `U_p(g)`.
pub fn cartan_attractor(g: &SquareMatrix, p: usize) -> Result<Subspace> {
    check_gap_index(p, g.dim() + 1)?;
    cartan(g)?.attractor(p)
}

/// A linear subspace of R^d stored as an orthonormal frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    frame: DMatrix<f64>,
}

impl Subspace {
    /// Wraps a frame that must already be orthonormal.
    pub fn from_orthonormal(frame: DMatrix<f64>) -> Result<Self> {
        let r = frame.ncols();
        if r > frame.nrows() {
            return Err(Error::RankOverflow {
                total: r,
                ambient: frame.nrows(),
            });
        }
        let err = (frame.transpose() * &frame - DMatrix::identity(r, r)).amax();
        if err > 1e-10 {
            return Err(Error::Validation(format!(
                "frame is not orthonormal (error {err:e})"
            )));
        }
        Ok(Self { frame })
    }

    /// Orthonormal basis of the column span, dropping directions whose
    /// singular value is below `1e-12` of the largest.
    pub fn span(vectors: &DMatrix<f64>) -> Self {
        let d = vectors.nrows();
        if vectors.ncols() == 0 || vectors.amax() == 0.0 {
            return Self::zero(d);
        }
        let Svd { u, s, .. } = svd(vectors);
        let smax = s.max();
        let mut idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] > 1e-12 * smax).collect();
        idx.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
        let cols: Vec<DVector<f64>> = idx.iter().map(|&i| u.column(i).into_owned()).collect();
        Self {
            frame: DMatrix::from_columns(&cols),
        }
    }

    /// Orthonormalizes a frame known to have full column rank.
    pub fn from_basis(vectors: &DMatrix<f64>) -> Self {
        if vectors.ncols() == 0 {
            return Self::zero(vectors.nrows());
        }
        let q = vectors.clone().qr().q();
        Self { frame: q }
    }

    pub fn line(v: &DVector<f64>) -> Self {
        let n = v.norm();
        Self {
            frame: DMatrix::from_column_slice(v.len(), 1, (v / n).as_slice()),
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Self {
            frame: DMatrix::zeros(ambient, 0),
        }
    }

    /// Span of the given standard basis vectors (0-based).
    pub fn coordinate(ambient: usize, axes: &[usize]) -> Self {
        let mut frame = DMatrix::zeros(ambient, axes.len());
        for (k, &i) in axes.iter().enumerate() {
            frame[(i, k)] = 1.0;
        }
        Self { frame }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// First basis vector; the line itself when the rank is one.
    pub fn direction(&self) -> DVector<f64> {
        self.frame.column(0).into_owned()
    }

    /// Image under a linear map, re-orthonormalized.
    pub fn image(&self, m: &DMatrix<f64>) -> Self {
        Self::from_basis(&(m * &self.frame))
    }

    /// Sum of two subspaces assumed to be in direct sum.
    pub fn direct_sum(&self, other: &Subspace) -> Result<Subspace> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch(
                self.ambient_dim(),
                other.ambient_dim(),
            ));
        }
        let total = self.rank() + other.rank();
        if total > self.ambient_dim() {
            return Err(Error::RankOverflow {
                total,
                ambient: self.ambient_dim(),
            });
        }
        let mut m = DMatrix::zeros(self.ambient_dim(), total);
        m.columns_mut(0, self.rank()).copy_from(&self.frame);
        m.columns_mut(self.rank(), other.rank())
            .copy_from(&other.frame);
        let Svd { u, s, .. } = svd(&m);
        let mut idx: Vec<usize> = (0..s.len()).collect();
        idx.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
        let cols: Vec<DVector<f64>> = idx.iter().map(|&i| u.column(i).into_owned()).collect();
        Ok(Subspace {
            frame: DMatrix::from_columns(&cols),
        })
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Subspace {
        let d = self.ambient_dim();
        let r = self.rank();
        if r == 0 {
            return Subspace {
                frame: DMatrix::identity(d, d),
            };
        }
        let p = DMatrix::identity(d, d) - self.projector();
        let Svd { u, s, .. } = svd(&p);
        let mut idx: Vec<usize> = (0..s.len()).collect();
        idx.sort_by(|&i, &j| s[j].total_cmp(&s[i]).then(i.cmp(&j)));
        let cols: Vec<DVector<f64>> = idx[..d - r]
            .iter()
            .map(|&i| {
                let c = u.column(i).into_owned();
                if leading_sign(c.as_slice()) < 0.0 {
                    -c
                } else {
                    c
                }
            })
            .collect();
        if cols.is_empty() {
            return Subspace::zero(d);
        }
        Subspace {
            frame: DMatrix::from_columns(&cols),
        }
    }
}

fn check_same_ambient(p: &Subspace, q: &Subspace) -> Result<()> {
    if p.ambient_dim() != q.ambient_dim() {
        Err(Error::DimensionMismatch(p.ambient_dim(), q.ambient_dim()))
    } else {
        Ok(())
    }
}

fn order_by_rank<'a>(p: &'a Subspace, q: &'a Subspace) -> (&'a Subspace, &'a Subspace) {
    if p.rank() <= q.rank() {
        (p, q)
    } else {
        (q, p)
    }
}

/// `(I - Q Q^T) P` for the lower-rank subspace `P`.
fn residual(p: &Subspace, q: &Subspace) -> DMatrix<f64> {
    let coeffs = q.frame.transpose() * &p.frame;
    &p.frame - &q.frame * coeffs
}

/// Largest sine of a principal angle from the lower-rank subspace to the
/// other one; zero iff the lower-rank subspace is contained in the other.
pub fn sin_distance(p: &Subspace, q: &Subspace) -> Result<f64> {
    check_same_ambient(p, q)?;
    let (p, q) = order_by_rank(p, q);
    if p.rank() == 0 {
        return Ok(0.0);
    }
    let d = top_singular_value(&residual(p, q));
    if p.rank() == q.rank() {
        return Ok(d.max(top_singular_value(&residual(q, p))).min(1.0));
    }
    Ok(d.min(1.0))
}

/// Smallest angle between nonzero vectors of `p` and `q`, in `[0, pi/2]`.
pub fn min_angle(p: &Subspace, q: &Subspace) -> Result<f64> {
    check_same_ambient(p, q)?;
    let (p, q) = order_by_rank(p, q);
    if p.rank() == 0 {
        return Ok(std::f64::consts::FRAC_PI_2);
    }
    let r = residual(p, q);
    let s_min = singular_values(&r).min().max(0.0);
    let c = q.frame.transpose() * &p.frame;
    let c_max = if c.nrows() == 0 {
        0.0
    } else {
        top_singular_value(&c)
    };
    Ok(s_min.atan2(c_max))
}

/// Smallest singular value of the concatenated frames: zero iff the sum is
/// not direct, one iff the parts are pairwise orthogonal.
pub fn direct_sum_margin(parts: &[&Subspace]) -> Result<f64> {
    let Some(first) = parts.first() else {
        return Ok(1.0);
    };
    let d = first.ambient_dim();
    for p in parts {
        if p.ambient_dim() != d {
            return Err(Error::DimensionMismatch(d, p.ambient_dim()));
        }
    }
    let total: usize = parts.iter().map(|p| p.rank()).sum();
    if total > d {
        return Err(Error::RankOverflow { total, ambient: d });
    }
    if total == 0 {
        return Ok(1.0);
    }
    let mut m = DMatrix::zeros(d, total);
    let mut c = 0;
    for p in parts {
        m.columns_mut(c, p.rank()).copy_from(&p.frame);
        c += p.rank();
    }
    Ok(singular_values(&m).min().clamp(0.0, 1.0))
}

/// Directions of `a` making an angle with sine at most `tol` with `b`.
pub fn subspace_intersection(a: &Subspace, b: &Subspace, tol: f64) -> Result<Subspace> {
    check_same_ambient(a, b)?;
    let d = a.ambient_dim();
    if a.rank() == 0 || b.rank() == 0 {
        return Ok(Subspace::zero(d));
    }
    let r = residual(a, b);
    let Svd { s, v, .. } = svd(&r);
    let mut idx: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= tol).collect();
    idx.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    if idx.is_empty() {
        return Ok(Subspace::zero(d));
    }
    let cols: Vec<DVector<f64>> = idx.iter().map(|&i| &a.frame * v.column(i)).collect();
    Ok(Subspace::from_basis(&DMatrix::from_columns(&cols)))
}

/// Sine of the angle between two lines, computed from the wedge product.
pub fn line_distance(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    line_distance_slice(u.as_slice(), v.as_slice())
}

pub(crate) fn line_distance_slice(u: &[f64], v: &[f64]) -> f64 {
    let nu: f64 = u.iter().map(|x| x * x).sum();
    let nv: f64 = v.iter().map(|x| x * x).sum();
    let mut w = 0.0;
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            let c = u[i] * v[j] - u[j] * v[i];
            w += c * c;
        }
    }
    (w / (nu * nv)).sqrt().min(1.0)
}
