//! Exterior powers: compound matrices and Plücker coordinates.

use nalgebra::{DMatrix, DVector};

use crate::geom::Subspace;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r as usize
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k));
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - k + i {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Determinant of a small dense matrix given row-major, by Gaussian
/// elimination with partial pivoting.
pub(crate) fn small_det(a: &mut [f64], k: usize) -> f64 {
    match k {
        0 => return 1.0,
        1 => return a[0],
        2 => return a[0] * a[3] - a[1] * a[2],
        3 => {
            return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => {}
    }
    let mut det = 1.0;
    for c in 0..k {
        let mut piv = c;
        for r in c + 1..k {
            if a[r * k + c].abs() > a[piv * k + c].abs() {
                piv = r;
            }
        }
        if a[piv * k + c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            for j in 0..k {
                a.swap(c * k + j, piv * k + j);
            }
            det = -det;
        }
        let p = a[c * k + c];
        det *= p;
        for r in c + 1..k {
            let f = a[r * k + c] / p;
            if f != 0.0 {
                for j in c..k {
                    a[r * k + j] -= f * a[c * k + j];
                }
            }
        }
    }
    det
}

/// The `k`-th compound of `m`: minors indexed by lexicographic row and
/// column `k`-subsets. Multiplicative by Cauchy–Binet.
pub fn compound(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let rows = subsets(m.nrows(), k);
    let cols = subsets(m.ncols(), k);
    let mut out = DMatrix::zeros(rows.len(), cols.len());
    let mut buf = vec![0.0; k * k];
    for (ri, r) in rows.iter().enumerate() {
        for (ci, c) in cols.iter().enumerate() {
            for (a, &i) in r.iter().enumerate() {
                for (b, &j) in c.iter().enumerate() {
                    buf[a * k + b] = m[(i, j)];
                }
            }
            out[(ri, ci)] = small_det(&mut buf, k);
        }
    }
    out
}

/// Plücker coordinates of the span of the columns of `frame`.
pub fn plucker(frame: &DMatrix<f64>) -> DVector<f64> {
    let c = compound(frame, frame.ncols());
    c.column(0).into_owned()
}

/// Recovers the `p`-dimensional subspace whose Plücker vector is (close
/// to) `omega`, from the column span of its contractions.
pub fn subspace_from_plucker(omega: &DVector<f64>, d: usize, p: usize) -> Subspace {
    if p == d {
        return Subspace::coordinate(d, &(0..d).collect::<Vec<_>>());
    }
    let top = subsets(d, p);
    let index = |s: &[usize]| top.binary_search_by(|t| t.as_slice().cmp(s)).unwrap();
    let lows = subsets(d, p - 1);
    let mut m = DMatrix::zeros(d, lows.len());
    let mut full = Vec::with_capacity(p);
    for (c, j) in lows.iter().enumerate() {
        for i in 0..d {
            if j.contains(&i) {
                continue;
            }
            full.clear();
            full.extend_from_slice(j);
            let pos = j.iter().filter(|&&x| x < i).count();
            full.insert(pos, i);
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            m[(i, c)] = sign * omega[index(&full)];
        }
    }
    let crate::geom::Svd { u, s, .. } = crate::geom::svd(&m);
    let mut idx: Vec<usize> = (0..s.len()).collect();
    idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    let cols: Vec<DVector<f64>> = idx[..p].iter().map(|&i| u.column(i).into_owned()).collect();
    Subspace::from_orthonormal(DMatrix::from_columns(&cols)).expect("svd frame is orthonormal")
}
