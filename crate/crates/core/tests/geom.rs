use anosov_core::geom::*;
use anosov_core::lemmas::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn eig_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    // singular values and left vectors from the Gram matrix
    let e = (m * m.transpose()).symmetric_eigen();
    let mut idx: Vec<usize> = (0..m.nrows()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]));
    let s = idx
        .iter()
        .map(|&i| e.eigenvalues[i].max(0.0).sqrt())
        .collect();
    let cols: Vec<DVector<f64>> = idx
        .iter()
        .map(|&i| e.eigenvectors.column(i).into_owned())
        .collect();
    (s, DMatrix::from_columns(&cols))
}

fn principal_cosines(p: &Subspace, q: &Subspace) -> Vec<f64> {
    let c = p.frame().transpose() * q.frame();
    let (s, _) = eig_svd(&c);
    s
}

#[test]
fn random_decomposition_reconstructs() {
    let g = sample_gapped(5, 1, 1, 0);
    let c = cartan(&g).unwrap();
    let err = (c.reconstruct() - g.entries()).norm() / g.entries().norm();
    assert!(err < 1e-10);
    let (s, _) = eig_svd(g.entries());
    for (a, b) in c.sigma.iter().zip(&s) {
        assert!((a - b).abs() < 1e-10 * s[0]);
    }
    let i = DMatrix::<f64>::identity(5, 5);
    assert!((c.left_frame.transpose() * &c.left_frame - &i).amax() < 1e-12);
    assert!((c.right_frame.transpose() * &c.right_frame - &i).amax() < 1e-12);
}

#[test]
fn veronese_weight_gap() {
    // iota_3(diag(2, 1/2)) = diag(4, 1, 1/4)
    let g =
        SquareMatrix::from_row_slice(3, &[4.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.25]).unwrap();
    assert!((gap_ratio(&g, 1).unwrap() - 0.25).abs() < 1e-15);
    let q = sample_subspace(3, 3, 4, 0).frame().clone();
    let conj = SquareMatrix::new(&q * g.entries() * q.transpose()).unwrap();
    assert!((gap_ratio(&conj, 1).unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn min_angle_matches_principal_angles() {
    for i in 0..20 {
        let p = sample_subspace(4, 2, 11, 2 * i);
        let q = sample_subspace(4, 2, 11, 2 * i + 1);
        let cos = principal_cosines(&p, &q);
        let expect = cos[0].min(1.0).acos();
        assert!((min_angle(&p, &q).unwrap() - expect).abs() < 1e-7);
        assert!(min_angle(&p, &q).unwrap().sin() <= sin_distance(&p, &q).unwrap() + 1e-12);
    }
}

#[test]
fn generic_planes_meet_trivially() {
    for i in 0..20 {
        let p = sample_subspace(4, 2, 12, 2 * i);
        let q = sample_subspace(4, 2, 12, 2 * i + 1);
        let stacked = DMatrix::from_columns(&[
            p.frame().column(0).into_owned(),
            p.frame().column(1).into_owned(),
            q.frame().column(0).into_owned(),
            q.frame().column(1).into_owned(),
        ]);
        assert!(stacked.determinant().abs() > 1e-6);
        assert_eq!(subspace_intersection(&p, &q, 1e-6).unwrap().rank(), 0);
    }
}

#[test]
fn near_degenerate_intersection() {
    let e = |i: usize| DVector::from_fn(4, |j, _| if i == j { 1.0 } else { 0.0 });
    let a = Subspace::from_basis(&DMatrix::from_columns(&[e(0), e(1)]));
    let t: f64 = 1e-9;
    let tilted = e(0) * t.cos() + e(2) * t.sin();
    let b = Subspace::from_basis(&DMatrix::from_columns(&[tilted, e(3)]));
    assert_eq!(subspace_intersection(&a, &b, 1e-6).unwrap().rank(), 1);
    assert_eq!(subspace_intersection(&a, &b, 1e-12).unwrap().rank(), 0);
}

#[test]
fn two_line_margin_closed_form() {
    let t = std::f64::consts::PI / 6.0;
    let a = Subspace::line(&DVector::from_vec(vec![1.0, 0.0]));
    let b = Subspace::line(&DVector::from_vec(vec![t.cos(), t.sin()]));
    // singular values of [[1, c], [0, s]] are sqrt(1 +- c)
    let expect = (1.0 - t.cos()).sqrt();
    assert!((direct_sum_margin(&[&a, &b]).unwrap() - expect).abs() < 1e-14);
}

#[test]
fn lemma_families_on_seeded_samples() {
    for d in 2..=6 {
        for i in 0..200u64 {
            let p = 1 + (i as usize) % (d - 1);
            let g = sample_gapped(d, p, 100 + d as u64, 2 * i);
            let h = sample_gapped(d, p, 100 + d as u64, 2 * i + 1);
            if let Ok(pb) = product_bounds(&g, &h, p) {
                assert!(pb.iter().all(|b| b.holds(1e-9)), "{pb:?}");
            }
            let plane = sample_subspace(d, p, 200 + d as u64, i);
            if let Ok(cb) = contraction_bound(&g, &plane, p) {
                assert!(cb.holds(1e-9), "{cb:?}");
            }
            if let Ok(gb) = growth_bounds(&g, &h, p) {
                assert!(gb.iter().all(|b| b.holds(1e-9)), "{gb:?}");
            }
        }
    }
}

fn arb_subspace(d: usize, r: usize) -> impl Strategy<Value = Subspace> {
    prop::collection::vec(-1.0f64..1.0, d * r).prop_filter_map("rank deficient", move |v| {
        let m = DMatrix::from_column_slice(d, r, &v);
        let s = Subspace::from_basis(&m);
        ((m.transpose() * &m).determinant() > 1e-6).then_some(s)
    })
}

fn arb_orthogonal(d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, d * d).prop_filter_map("singular", move |v| {
        let m = DMatrix::from_column_slice(d, d, &v);
        (m.determinant().abs() > 1e-3).then(|| m.qr().q())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reconstruction_holds(v in prop::collection::vec(-2.0f64..2.0, 16)) {
        let m = DMatrix::from_row_slice(4, 4, &v);
        prop_assume!(m.determinant().abs() > 1e-6);
        let g = SquareMatrix::new(m.clone()).unwrap();
        let c = cartan(&g).unwrap();
        prop_assert!((c.reconstruct() - &m).norm() <= 1e-10 * m.norm());
        prop_assert!(c.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn sin_distance_is_a_metric(p in arb_subspace(5, 2), q in arb_subspace(5, 2), r in arb_subspace(5, 2)) {
        let pq = sin_distance(&p, &q).unwrap();
        prop_assert_eq!(pq, sin_distance(&q, &p).unwrap());
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!(sin_distance(&p, &p).unwrap() < 1e-7);
        let pr = sin_distance(&p, &r).unwrap();
        let qr = sin_distance(&q, &r).unwrap();
        prop_assert!(pr <= pq + qr + 1e-9);
    }

    #[test]
    fn margin_is_permutation_and_rotation_invariant(
        a in arb_subspace(5, 1), b in arb_subspace(5, 2), c in arb_subspace(5, 2), q in arb_orthogonal(5)
    ) {
        let m = direct_sum_margin(&[&a, &b, &c]).unwrap();
        prop_assert!((m - direct_sum_margin(&[&c, &a, &b]).unwrap()).abs() < 1e-10);
        let (qa, qb, qc) = (a.image(&q), b.image(&q), c.image(&q));
        prop_assert!((m - direct_sum_margin(&[&qa, &qb, &qc]).unwrap()).abs() < 1e-10);
        prop_assert!((0.0..=1.0).contains(&m));
    }

    #[test]
    fn lemma_families(seed in 0u64..1_000_000, d in 2usize..=6, p_raw in 1usize..6) {
        let p = 1 + (p_raw - 1) % (d - 1);
        let g = sample_gapped(d, p, seed, 0);
        let h = sample_gapped(d, p, seed, 1);
        if let Ok(pb) = product_bounds(&g, &h, p) {
            prop_assert!(pb.iter().all(|b| b.holds(1e-9)));
        }
        if let Ok(cb) = contraction_bound(&g, &sample_subspace(d, p, seed, 2), p) {
            prop_assert!(cb.holds(1e-9));
        }
        if let Ok(gb) = growth_bounds(&g, &h, p) {
            prop_assert!(gb.iter().all(|b| b.holds(1e-9)));
        }
    }
}
