use anosov_core::constructions::*;
use anosov_core::exterior::compound;
use anosov_core::representation::*;
use anosov_core::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

const PI_4: f64 = std::f64::consts::FRAC_PI_4;

fn gram_sigmas(m: &DMatrix<f64>) -> Vec<f64> {
    let e = (m * m.transpose()).symmetric_eigen();
    let mut s: Vec<f64> = e.eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

fn rotation(t: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
}

fn schottky() -> Representation {
    schottky_fuchsian(3.0, PI_4).unwrap()
}

fn seeded_word(len: usize, seed: u64) -> GroupWord {
    let aut = GeodesicAutomaton::free(GeneratorAlphabet::new(2));
    aut.sample_boundary_rays(1, len, seed)[0].prefix(len)
}

fn rel_err(a: &SquareMatrix, b: &SquareMatrix) -> f64 {
    let x = a.to_dense();
    let y = b.to_dense();
    (&x - &y).norm() / y.norm()
}

#[test]
fn irreducible_images() {
    let t = 1.7;
    let a = diag(&[t, 1.0 / t]);
    assert!((symmetric_power_matrix(&a, 1) - &a).amax() < 1e-15);
    assert!((symmetric_power_matrix(&a, 2) - diag(&[t * t, 1.0, 1.0 / (t * t)])).amax() < 1e-14);
    let r = symmetric_power_matrix(&rotation(0.37), 4);
    assert!((r.transpose() * &r - DMatrix::identity(5, 5)).amax() < 1e-12);
    let s3 = symmetric_power_matrix(&diag(&[2.0, 3.0, 5.0]), 2);
    let mut ev: Vec<f64> = s3.diagonal().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    assert_eq!(ev, vec![4.0, 6.0, 9.0, 10.0, 15.0, 25.0]);
}

#[test]
fn exterior_power_examples() {
    let rep = perturb(&irreducible_rep(4, &schottky()).unwrap(), 0.1, 3).unwrap();
    let one = exterior_power(&rep, 1).unwrap();
    let top = exterior_power(&rep, 4).unwrap();
    for seed in 0..20 {
        let w = seeded_word(6, seed);
        let g = rep.evaluate(&w);
        assert!(rel_err(&one.evaluate(&w), &g) < 1e-12);
        let det: f64 = w
            .letters()
            .iter()
            .map(|&l| rep.image(l).determinant())
            .product();
        assert!((top.evaluate(&w).to_dense()[(0, 0)] - det).abs() < 1e-9 * det.abs().max(1.0));
    }
    for i in 0..50 {
        let g = anosov_core::lemmas::sample_gapped(4, 1, 21, i)
            .entries()
            .clone();
        let s = gram_sigmas(&g);
        let s2 = gram_sigmas(&compound(&g, 2));
        assert!((s2[0] - s[0] * s[1]).abs() < 1e-9 * s2[0]);
    }
}

#[test]
fn direct_sum_examples() {
    let rho = schottky();
    let plus = direct_sum(&rho, &Representation::trivial(1, 2)).unwrap();
    assert_eq!(plus.dim(), 3);
    let c = cyclic_hyperbolic(2.0).unwrap();
    let sum = direct_sum(
        &irreducible_rep(3, &c).unwrap(),
        &Representation::trivial(1, 1),
    )
    .unwrap();
    let g = sum.image(Letter(1));
    assert!((g - diag(&[4.0, 1.0, 0.25, 1.0])).amax() < 1e-14);
    let other = perturb(&irreducible_rep(3, &rho).unwrap(), 0.05, 1).unwrap();
    let both = direct_sum(&rho, &other).unwrap();
    for seed in 0..10 {
        let w = seeded_word(5, seed);
        let mut expect = gram_sigmas(&rho.evaluate(&w).to_dense());
        expect.extend(gram_sigmas(&other.evaluate(&w).to_dense()));
        expect.sort_by(|a, b| b.total_cmp(a));
        let got = gram_sigmas(&both.evaluate(&w).to_dense());
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-8 * expect[0]);
        }
    }
}

#[test]
fn weight_examples() {
    let p = |v: Vec<usize>| Partition::new(v).unwrap();
    assert_eq!(sl2_weights(&p(vec![4])).weights(), &[3, 1, -1, -3]);
    let w51 = sl2_weights(&p(vec![5, 1]));
    assert_eq!(w51.weights(), &[4, 2, 0, 0, -2, -4]);
    // top three weights of wedge^2 of the 4-dim irreducible: chi, chi-2, chi-4 with chi = p(d-p)
    let chi = 2 * (4 - 2);
    assert_eq!(&w51.weights()[..3], &[chi, chi - 2, chi - 4]);
    let mut union: Vec<i64> = vec![4, 2, 0, -2, -4, 1, -1];
    union.sort_by(|a, b| b.cmp(a));
    assert_eq!(sl2_weights(&p(vec![5, 2])).weights(), union.as_slice());
    assert_eq!(decompose_weights(&w51).unwrap(), p(vec![5, 1]));
    assert_eq!(
        decompose_weights(&WeightList::new(vec![0])).unwrap(),
        p(vec![1])
    );
    assert_eq!(
        decompose_weights(&WeightList::new(vec![1, 0, -1])).unwrap(),
        p(vec![2, 1])
    );
    assert!(matches!(
        decompose_weights(&WeightList::new(vec![2, 1])),
        Err(Error::NotAnSl2Module(_))
    ));
}

#[test]
fn wedge_of_irreducible_has_expected_weights() {
    let c = cyclic_hyperbolic(3.0).unwrap();
    let w = exterior_power(&irreducible_rep(4, &c).unwrap(), 2).unwrap();
    let g = w.image(Letter(1));
    let mut logs: Vec<i64> = g
        .diagonal()
        .iter()
        .map(|x| (x.ln() / 3f64.ln()).round() as i64)
        .collect();
    logs.sort_by(|a, b| b.cmp(a));
    assert_eq!(logs, vec![4, 2, 0, 0, -2, -4]);
    assert_eq!(
        decompose_weights(&WeightList::new(logs)).unwrap().parts(),
        &[5, 1]
    );
}

#[test]
fn coherence_examples() {
    let p = |v: Vec<usize>| Partition::new(v).unwrap();
    assert!(coherence_check(&p(vec![5, 2]), 2));
    assert!(!coherence_check(&p(vec![3, 1]), 2));
    assert!(coherence_check(&p(vec![5, 1]), 2));
    for d in 2..10 {
        for k in 2..d {
            assert!(coherence_check(&p(vec![d]), k));
        }
        for k in d..d + 3 {
            assert!(!coherence_check(&p(vec![d]), k));
        }
    }
}

#[test]
fn weight_consistency_of_constructions() {
    type Case = (Box<dyn Fn(&Representation) -> Representation>, Vec<usize>);
    let cases: Vec<Case> = vec![
        (Box::new(|r| irreducible_rep(5, r).unwrap()), vec![5]),
        (
            Box::new(|r| exterior_power(&irreducible_rep(4, r).unwrap(), 2).unwrap()),
            vec![5, 1],
        ),
        (
            Box::new(|r| symmetric_power(&irreducible_rep(3, r).unwrap(), 2).unwrap()),
            vec![5, 1],
        ),
        (
            Box::new(|r| {
                direct_sum(
                    &irreducible_rep(3, r).unwrap(),
                    &Representation::trivial(1, 1),
                )
                .unwrap()
            }),
            vec![3, 1],
        ),
    ];
    for t in [2.0, 3.0, 5.0] {
        let c = cyclic_hyperbolic(t).unwrap();
        for (build, parts) in &cases {
            let rep = build(&c);
            let sig = rep.word_log_sigmas(&GroupWord::from_letters(vec![Letter(1)]));
            let w = sl2_weights(&Partition::new(parts.clone()).unwrap());
            for (s, &k) in sig.iter().zip(w.weights()) {
                assert!(
                    (s - k as f64 * t.ln()).abs() < 1e-9,
                    "{} {parts:?}",
                    rep.label()
                );
            }
        }
    }
}

#[test]
fn perturbation_contract() {
    let rho = irreducible_rep(3, &schottky()).unwrap();
    let same = perturb(&rho, 0.0, 5).unwrap();
    assert_eq!(same.generator_pairs(), rho.generator_pairs());
    let a = perturb(&rho, 0.01, 5).unwrap();
    assert_eq!(
        a.generator_pairs(),
        perturb(&rho, 0.01, 5).unwrap().generator_pairs()
    );
    assert_ne!(
        a.generator_pairs(),
        perturb(&rho, 0.01, 6).unwrap().generator_pairs()
    );
    for (g, inv) in a.generator_pairs() {
        assert!((g * inv - DMatrix::identity(3, 3)).amax() < 1e-10);
    }
}

#[test]
fn irreducible_gaps_match_base_gap() {
    let rho = schottky();
    let r3 = irreducible_rep(3, &rho).unwrap();
    let aut = GeodesicAutomaton::free(GeneratorAlphabet::new(2));
    for w in aut.ball(8).into_iter().skip(1) {
        let s = r3.word_log_sigmas(&w);
        let s2 = rho.word_log_sigmas(&w);
        let base = s2[0] - s2[1];
        assert!(base > 0.0);
        assert!((s[0] - s[1] - base).abs() < 1e-8 * base.max(1.0));
        assert!((s[1] - s[2] - base).abs() < 1e-8 * base.max(1.0));
    }
}

fn arb_word() -> impl Strategy<Value = GroupWord> {
    prop::collection::vec(1u32..=4, 0..12)
        .prop_map(|raw| anosov_core::automaton::reduce(&raw, &GeneratorAlphabet::new(2)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn constructions_are_functorial(w in arb_word()) {
        let rho = perturb(&schottky(), 0.05, 2).unwrap();
        let g = rho.evaluate(&w).to_dense();
        let r4 = irreducible_rep(4, &rho).unwrap();
        let e = SquareMatrix::new(symmetric_power_matrix(&g, 3)).unwrap();
        prop_assert!(rel_err(&r4.evaluate(&w), &e.normalized()) < 1e-9);
        // minors of a long product cancel badly, so the compound oracle is
        // only trusted on short words
        prop_assume!(w.len() <= 4);
        let w2 = exterior_power(&r4, 2).unwrap();
        let e2 = SquareMatrix::new(compound(&symmetric_power_matrix(&g, 3), 2)).unwrap();
        prop_assert!(rel_err(&w2.evaluate(&w), &e2.normalized()) < 1e-9);
    }

    #[test]
    fn evaluation_is_multiplicative(u in arb_word(), v in arb_word()) {
        prop_assume!(u.len() + v.len() == u.mul(&v).len());
        let rep = symmetric_power(&irreducible_rep(3, &perturb(&schottky(), 0.05, 2).unwrap()).unwrap(), 2).unwrap();
        let prod = rep.evaluate(&u).mul(&rep.evaluate(&v));
        prop_assert!(rel_err(&prod, &rep.evaluate(&u.mul(&v))) < 1e-9);
    }

    #[test]
    fn decompose_inverts_weights(parts in prop::collection::vec(1usize..=6, 1..=4)) {
        prop_assume!(parts.iter().sum::<usize>() <= 12);
        let p = Partition::new(parts).unwrap();
        prop_assert_eq!(decompose_weights(&sl2_weights(&p)).unwrap(), p);
    }
}

#[test]
fn all_small_partitions_round_trip() {
    fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in (1..=max.min(n)).rev() {
            for mut rest in partitions(n - first, first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }
    let mut count = 0;
    for n in 1..=12 {
        for parts in partitions(n, n) {
            let p = Partition::new(parts).unwrap();
            assert_eq!(decompose_weights(&sl2_weights(&p)).unwrap(), p);
            count += 1;
        }
    }
    assert_eq!(count, 271);
}
