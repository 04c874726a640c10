//! Both sides of the quantitative attractor and singular value inequalities,
//! evaluated on concrete matrices, plus a seeded sampler of gapped matrices.

use nalgebra::DMatrix;
use rand::Rng;

use crate::automaton::ray_rng;
use crate::error::{Error, Result};
use crate::geom::{
    cartan, cartan_attractor, min_angle, sin_distance, CartanDecomposition, SquareMatrix, Subspace,
    TOL_GAP,
};

/// One instance of an inequality `lhs <= rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Inequality {
    pub lhs: f64,
    pub rhs: f64,
}

impl Inequality {
    pub fn holds(&self, rel_slack: f64) -> bool {
        self.lhs <= self.rhs * (1.0 + rel_slack) + f64::MIN_POSITIVE
    }
}

fn condition_number(g: &SquareMatrix) -> Result<f64> {
    let c = cartan(g)?;
    Ok(c.sigma[0] / c.sigma[c.sigma.len() - 1])
}

/// `d(U_p(gh), U_p(g)) <= |h| |h^-1| gap_p(g)` and
/// `d(U_p(gh), g U_p(h)) <= |g| |g^-1| gap_p(h)`.
pub fn product_bounds(g: &SquareMatrix, h: &SquareMatrix, p: usize) -> Result<[Inequality; 2]> {
    let gh = g.mul(h);
    let u_gh = cartan_attractor(&gh, p)?;
    let u_g = cartan_attractor(g, p)?;
    let u_h = cartan_attractor(h, p)?;
    let cg = cartan(g)?;
    let ch = cartan(h)?;
    Ok([
        Inequality {
            lhs: sin_distance(&u_gh, &u_g)?,
            rhs: condition_number(h)? * cg.gap_ratio(p)?,
        },
        Inequality {
            lhs: sin_distance(&u_gh, &u_h.image(g.entries()))?,
            rhs: condition_number(g)? * ch.gap_ratio(p)?,
        },
    ])
}

/// `d(gP, U_p(g)) <= gap_p(g) / sin angle(P, U_{d-p}(g^-1))` for `P`
/// transverse to `U_{d-p}(g^-1)`.
pub fn contraction_bound(g: &SquareMatrix, plane: &Subspace, p: usize) -> Result<Inequality> {
    let d = g.dim();
    if plane.rank() != p {
        return Err(Error::DimensionMismatch(plane.rank(), p));
    }
    let repeller = cartan_attractor(&g.inverse()?, d - p)?;
    let s = min_angle(plane, &repeller)?.sin();
    if s <= 0.0 {
        return Err(Error::NotTransverse(s));
    }
    Ok(Inequality {
        lhs: sin_distance(&plane.image(g.entries()), &cartan_attractor(g, p)?)?,
        rhs: cartan(g)?.gap_ratio(p)? / s,
    })
}

/// With `alpha = angle(U_p(h), U_{d-p}(g^-1))`, when `g` and `gh` have gaps:
/// `sigma_p(gh) >= sin(alpha) sigma_p(g) sigma_p(h)` and
/// `sigma_{p+1}(gh) <= sigma_{p+1}(g) sigma_{p+1}(h) / sin(alpha)`.
/// Both are returned as ratios against one.
pub fn growth_bounds(g: &SquareMatrix, h: &SquareMatrix, p: usize) -> Result<[Inequality; 2]> {
    let d = g.dim();
    let gh = g.mul(h);
    cartan_attractor(g, p)?;
    cartan_attractor(&gh, p)?;
    let (cg, ch, cgh) = (cartan(g)?, cartan(h)?, cartan(&gh)?);
    let repeller = cartan_attractor(&g.inverse()?, d - p)?;
    let u_h = Subspace::from_orthonormal(ch.left_frame.columns(0, p).into_owned())?;
    let sin_a = min_angle(&u_h, &repeller)?.sin();
    let lp = |c: &CartanDecomposition, i: usize| c.log_sigma(i);
    Ok([
        Inequality {
            lhs: (sin_a.ln() + lp(&cg, p) + lp(&ch, p) - lp(&cgh, p)).exp(),
            rhs: 1.0,
        },
        Inequality {
            lhs: (lp(&cgh, p + 1) - lp(&cg, p + 1) - lp(&ch, p + 1) + sin_a.ln()).exp(),
            rhs: 1.0,
        },
    ])
}

/// The `index`-th seeded `d x d` matrix with entries uniform in `[-1, 1]`
/// having a gap of index `p`.
pub fn sample_gapped(d: usize, p: usize, seed: u64, index: u64) -> SquareMatrix {
    let mut rng = ray_rng(seed, index);
    loop {
        let m = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        let Ok(g) = SquareMatrix::new(m) else {
            continue;
        };
        if let Ok(c) = cartan(&g) {
            if c.gap_ratio(p).is_ok_and(|r| r < 1.0 - TOL_GAP) {
                return g;
            }
        }
    }
}

/// A seeded `p`-dimensional subspace of `R^d`.
pub fn sample_subspace(d: usize, p: usize, seed: u64, index: u64) -> Subspace {
    let mut rng = ray_rng(seed, index);
    Subspace::from_basis(&DMatrix::from_fn(d, p, |_, _| rng.random_range(-1.0..1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_instances_are_tight() {
        let g = SquareMatrix::from_row_slice(2, &[4.0, 0.0, 0.0, 0.25]).unwrap();
        let b = growth_bounds(&g, &g, 1).unwrap();
        assert!((b[0].lhs - 1.0).abs() < 1e-12);
        assert!((b[1].lhs - 1.0).abs() < 1e-12);
        let pb = product_bounds(&g, &g, 1).unwrap();
        assert!(pb[0].lhs < 1e-15 && pb[1].lhs < 1e-15);
    }

    #[test]
    fn samples_are_deterministic() {
        assert_eq!(sample_gapped(4, 2, 9, 3), sample_gapped(4, 2, 9, 3));
        assert_ne!(sample_gapped(4, 2, 9, 3), sample_gapped(4, 2, 9, 4));
    }
}
