use anosov_lab::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use std::path::PathBuf;

const MINIMAL: &str = "\
[group]
free = 2

[representation]
expr = irr(3) ∘ schottky(3, 0.7853981634)

[pipeline.1]
command = certify
p = 1
R = 8
";

fn corpus() -> Vec<PathBuf> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "conf"))
        .collect();
    files.sort();
    files
}

#[test]
#[allow(clippy::approx_constant)]
fn minimal_config_parses_with_defaults() {
    let c = RunConfig::parse(MINIMAL).unwrap();
    assert_eq!(c.seed, 0);
    assert_eq!(c.group, GroupSpec::Free(2));
    assert_eq!(
        c.representation,
        RepSpec::Expr(Expr::Irr {
            d: 3,
            inner: Box::new(Expr::Schottky {
                t: 3.0,
                theta: 0.7853981634
            })
        })
    );
    assert_eq!(c.budgets, Budgets::default());
    assert_eq!(c.pipeline, vec![Command::Certify { p: 1, radius: 8 }]);
    let (rep, aut) = c.validate().unwrap();
    assert_eq!(rep.dim(), 3);
    assert_eq!(aut.alphabet().rank(), 2);
}

#[test]
fn unknown_key_is_a_parse_error() {
    let text = MINIMAL.replace("free = 2", "free = 2\ncolour = red");
    match RunConfig::parse(&text) {
        Err(CliError::Parse { line, column, msg }) => {
            assert_eq!((line, column), (3, 1));
            assert!(msg.contains("colour"), "{msg}");
        }
        other => panic!("{other:?}"),
    }
    let text = MINIMAL.replace("R = 8", "R = 8\n  radius = 9");
    assert!(matches!(
        RunConfig::parse(&text),
        Err(CliError::Parse {
            line: 11,
            column: 3,
            ..
        })
    ));
}

#[test]
fn parse_errors_carry_positions() {
    let cases = [
        ("[groups]\nfree = 2", 1, 2),
        ("seed = x\n[group]\nfree = 2", 1, 8),
        ("[group]\nfree 2", 2, 1),
        ("[group]\nfree = 2\n[representation]\nexpr = sum(cyclic(2), bar(1))", 4, 23),
        ("[group]\nfree = 2\n[representation]\nexpr = cyclic(2)\n[pipeline.1]\ncommand = teleport", 6, 11),
    ];
    for (text, line, column) in cases {
        match RunConfig::parse(text) {
            Err(CliError::Parse {
                line: l, column: c, ..
            }) => {
                assert_eq!((l, c), (line, column), "{text}")
            }
            other => panic!("{text}: {other:?}"),
        }
    }
}

#[test]
fn validation_errors_name_the_field() {
    let field = |text: &str| match RunConfig::parse(text).and_then(|c| c.validate().map(|_| ())) {
        Err(CliError::Validation { field, .. }) => field,
        other => panic!("{text}: {other:?}"),
    };
    assert_eq!(field("[representation]\nexpr = cyclic(2)"), "group");
    assert_eq!(field("[group]\nfree = 2"), "representation");
    assert_eq!(
        field(&MINIMAL.replace("free = 2", "automaton = /nonexistent/f2.aut")),
        "group.automaton"
    );
    assert_eq!(
        field(&MINIMAL.replace("free = 2", "free = 3")),
        "representation"
    );
    assert_eq!(field(&MINIMAL.replace("p = 1", "p = 3")), "pipeline.1.p");
    let scan = MINIMAL.replace(
        "command = certify\np = 1\nR = 8",
        "command = hyperconvex-scan\np = 1\nq = 1",
    );
    assert!(field(&scan).starts_with("pipeline.1.r"));
}

#[test]
fn explicit_generators_and_automaton_files() {
    let dir = tempfile::tempdir().unwrap();
    let aut_path = dir.path().join("f2.aut");
    let aut = anosov_core::GeodesicAutomaton::free(anosov_core::GeneratorAlphabet::new(2));
    std::fs::write(&aut_path, aut.to_text()).unwrap();
    let text = format!(
        "seed = 3\n[group]\nautomaton = {}\n[representation]\ngenerator.1 = 2 0; 0 0.5\ngenerator.2 = 1.25 0.75; 0.75 1.25\n",
        aut_path.display()
    );
    let c = RunConfig::parse(&text).unwrap();
    let RepSpec::Matrices(ms) = &c.representation else {
        panic!()
    };
    assert_eq!(
        ms[1],
        DMatrix::from_row_slice(2, 2, &[1.25, 0.75, 0.75, 1.25])
    );
    let (rep, a) = c.validate().unwrap();
    assert_eq!(rep.rank(), 2);
    assert_eq!(a.n_states(), aut.n_states());
    assert_eq!(RunConfig::parse(&c.emit()).unwrap(), c);
    assert!(matches!(
        RunConfig::parse("[group]\nfree = 2\n[representation]\ngenerator.1 = 1 2; 3"),
        Err(CliError::Parse { line: 4, .. })
    ));
}

#[test]
fn corpus_round_trips() {
    let files = corpus();
    assert!(files.len() >= 3);
    for f in files {
        let text = std::fs::read_to_string(&f).unwrap();
        let c = RunConfig::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let normal = c.emit();
        let again = RunConfig::parse(&normal).unwrap();
        assert_eq!(again, c, "{}", f.display());
        assert_eq!(again.emit(), normal);
        c.validate().unwrap();
    }
}

fn small_real() -> impl Strategy<Value = f64> {
    prop_oneof![(1u32..40).prop_map(|n| n as f64 / 4.0), 1e-12f64..10.0,]
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (small_real(), small_real()).prop_map(|(t, theta)| Expr::Schottky { t, theta }),
        small_real().prop_map(|t| Expr::Cyclic { t }),
        (1usize..5, 1u16..4).prop_map(|(dim, rank)| Expr::Trivial { dim, rank }),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (2usize..6, inner.clone()).prop_map(|(d, e)| Expr::Irr {
                d,
                inner: Box::new(e)
            }),
            (1usize..4, inner.clone()).prop_map(|(p, e)| Expr::Wedge {
                p,
                inner: Box::new(e)
            }),
            (1usize..4, inner.clone()).prop_map(|(k, e)| Expr::Sym {
                k,
                inner: Box::new(e)
            }),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sum(Box::new(a), Box::new(b))),
            (small_real(), any::<u64>(), inner).prop_map(|(eps, seed, e)| Expr::Perturb {
                eps,
                seed,
                inner: Box::new(e)
            }),
        ]
    })
}

fn command() -> impl Strategy<Value = Command> {
    prop_oneof![
        (1usize..5, 4usize..12).prop_map(|(p, radius)| Command::Certify { p, radius }),
        (4usize..12).prop_map(|radius| Command::Exponent { radius }),
        (
            4usize..12,
            1usize..10_000,
            1usize..80,
            small_real(),
            2usize..50
        )
            .prop_map(|(radius, points, depth, tol, scales)| Command::Dimension {
                radius,
                points,
                depth,
                tol,
                scales
            }),
        (
            (1usize..3, 1usize..3, 2usize..6, 4usize..12),
            (
                0usize..10_000,
                1usize..80,
                small_real(),
                small_real(),
                small_real()
            ),
            proptest::option::of(1usize..80)
        )
            .prop_map(
                |((p, q, r, radius), (triples, depth, floor, tol, threshold), fallback_depth)| {
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
                    }
                }
            ),
        (
            (1usize..3, 1usize..3, 2usize..6, 4usize..12),
            (1usize..40, 1usize..4, 1usize..100, small_real()),
            proptest::option::of(1usize..80)
        )
            .prop_map(
                |((p, q, r, radius), (steps, stride, depth, tol), fallback_depth)| {
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
                    }
                }
            ),
        (
            4usize..12,
            1usize..4,
            1usize..10,
            1usize..500,
            1usize..5000,
            1usize..60,
            small_real()
        )
            .prop_map(
                |(radius, max_eta, angle_length, geodesics, points, depth, tol)| {
                    Command::ShadowCheck {
                        radius,
                        max_eta,
                        angle_length,
                        geodesics,
                        points,
                        depth,
                        tol,
                    }
                }
            ),
        (
            1usize..4,
            4usize..12,
            1usize..5000,
            1usize..60,
            small_real()
        )
            .prop_map(|(p, radius, points, depth, tol)| Command::BoundaryExport {
                p,
                radius,
                points,
                depth,
                tol
            }),
    ]
}

fn matrices() -> impl Strategy<Value = Vec<DMatrix<f64>>> {
    (1usize..4, 1usize..4).prop_flat_map(|(n, count)| {
        proptest::collection::vec(
            proptest::collection::vec(-10.0f64..10.0, n * n)
                .prop_map(move |v| DMatrix::from_vec(n, n, v)),
            count,
        )
    })
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    (
        any::<u64>(),
        prop_oneof![
            (1u16..5).prop_map(GroupSpec::Free),
            "[a-z]{1,8}/[a-z0-9_]{1,8}\\.aut".prop_map(|p| GroupSpec::Automaton(p.into())),
        ],
        prop_oneof![
            expr().prop_map(RepSpec::Expr),
            matrices().prop_map(RepSpec::Matrices)
        ],
        (
            1u128..u128::MAX,
            0usize..1_000_000,
            proptest::option::of(small_real()),
        ),
        proptest::collection::vec(command(), 0..6),
    )
        .prop_map(
            |(seed, group, representation, (max_ball, max_triples, wall_clock), pipeline)| {
                RunConfig {
                    seed,
                    group,
                    representation,
                    budgets: Budgets {
                        max_ball,
                        max_triples,
                        wall_clock,
                    },
                    pipeline,
                }
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn emit_then_parse_is_identity(c in run_config()) {
        let text = c.emit();
        let back = RunConfig::parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.emit(), text);
    }

    #[test]
    fn expressions_round_trip(e in expr()) {
        prop_assert_eq!(Expr::parse(&e.to_string()).unwrap(), e);
    }
}
