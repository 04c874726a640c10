use anosov_lab::record::{Outcome, RunRecord};
use anosov_lab::*;
use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command as Process;

const SMALL: &str = "\
seed = 5

[group]
free = 2

[representation]
expr = irr(3) ∘ schottky(3, pi/4)

[pipeline.1]
command = certify
R = 8

[pipeline.2]
command = exponent
R = 8

[pipeline.3]
command = dimension
R = 8
points = 1500
depth = 24
tol = 1e-6

[pipeline.4]
command = hyperconvex-scan
p = 1
q = 1
r = 2
R = 8
triples = 200
depth = 40
tol = 1e-6

[pipeline.5]
command = convergence-profile
p = 1
q = 1
r = 2
R = 8
steps = 12
depth = 60

[pipeline.6]
command = shadow-check
R = 7
max_eta = 1
geodesics = 64
points = 1000
depth = 24

[pipeline.7]
command = boundary-export
p = 2
R = 8
points = 200
depth = 30
";

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_anosov-lab"))
}

fn summary(record: &RunRecord, i: usize) -> &serde_json::Value {
    match &record.steps[i].outcome {
        Outcome::Ok { summary } => summary,
        Outcome::Error { message, .. } => panic!("step {}: {message}", i + 1),
    }
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn trivial_certificate_is_a_negative_result() {
    let text = "[group]\nfree = 2\n[representation]\nexpr = trivial(3, 2)\n[pipeline.1]\ncommand = certify\n";
    let record = run(&RunConfig::parse(text).unwrap()).unwrap();
    assert_eq!(record.exit_code(), 0);
    assert_eq!(summary(&record, 0)["verdict"], "fail");
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("trivial.conf");
    std::fs::write(&conf, text).unwrap();
    let status = bin()
        .args(["run", conf.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let (_, rows) = read_csv(&dir.path().join("out/certificate.csv"));
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r[1] == "1.0"));
}

#[test]
fn budgets_are_enforced() {
    let text = "[group]\nfree = 2\n[representation]\nexpr = schottky(3, 1)\n[budgets]\nmax_ball = 1000\nmax_triples = 10\n\
                [pipeline.1]\ncommand = exponent\nR = 10\n[pipeline.2]\ncommand = certify\nR = 5\n\
                [pipeline.3]\ncommand = hyperconvex-scan\np = 1\nq = 1\nr = 2\ntriples = 11\n";
    let record = run(&RunConfig::parse(text).unwrap()).unwrap();
    assert_eq!(record.exit_code(), 3);
    let Outcome::Error { message, .. } = &record.steps[0].outcome else {
        panic!()
    };
    assert!(message.contains("budget is 1000"), "{message}");
    assert_eq!(summary(&record, 1)["verdict"], "pass");
    assert!(matches!(record.steps[2].outcome, Outcome::Error { .. }));

    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("budget.conf");
    std::fs::write(&conf, text).unwrap();
    let status = bin()
        .args(["run", conf.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
    assert!(dir.path().join("out/run.json").exists());
}

#[test]
fn exit_codes_for_config_and_numeric_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    std::fs::write(&bad, "[group]\nfree = 2\ncolour = red\n").unwrap();
    let out = bin()
        .args(["validate", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    let out = bin()
        .args(["validate", "/nonexistent.conf"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // the block sum has no certificate at index 2, so xi^2 is unavailable
    let numeric = dir.path().join("numeric.conf");
    std::fs::write(
        &numeric,
        "[group]\nfree = 2\n[representation]\nexpr = sum(schottky(4, 1), schottky(2, 1))\n\
         [pipeline.1]\ncommand = boundary-export\np = 2\n",
    )
    .unwrap();
    let out = bin()
        .args(["run", numeric.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));

    let good = dir.path().join("good.conf");
    std::fs::write(&good, SMALL).unwrap();
    let out = bin()
        .args(["validate", good.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let normal = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        RunConfig::parse(&normal).unwrap(),
        RunConfig::parse(SMALL).unwrap()
    );
}

#[test]
fn reports_follow_their_schemas() {
    let record = run(&RunConfig::parse(SMALL).unwrap()).unwrap();
    assert_eq!(record.exit_code(), 0);
    assert_eq!(summary(&record, 0)["verdict"], "pass");
    assert!(summary(&record, 3)["passed"].as_bool().unwrap());
    assert_eq!(summary(&record, 5)["all_hold"], true);

    let dir = tempfile::tempdir().unwrap();
    let manifest = emit_reports(&record, dir.path()).unwrap();
    assert_eq!(manifest.count(FileKind::Data), 7);
    assert_eq!(manifest.count(FileKind::Plot), 4);
    assert_eq!(manifest.count(FileKind::Metadata), 1);

    for schema in Schema::ALL {
        let (header, rows) = read_csv(&dir.path().join(format!("{}.csv", schema.name())));
        assert_eq!(header, schema.header(), "{}", schema.name());
        assert!(!rows.is_empty(), "{}", schema.name());
        for row in &rows {
            assert_eq!(row.len(), header.len(), "{}", schema.name());
        }
    }
    for name in ["certificate", "dimension", "profile", "boundary"] {
        let text = std::fs::read_to_string(dir.path().join(format!("{name}.svg"))).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        assert!(
            doc.descendants().any(|n| n.has_tag_name("circle")),
            "{name}"
        );
    }

    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("run.json")).unwrap()).unwrap();
    assert_eq!(json["steps"].as_array().unwrap().len(), 7);
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 64);
    let listed: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    for f in listed["files"].as_array().unwrap() {
        let bytes = std::fs::read(dir.path().join(f["path"].as_str().unwrap())).unwrap();
        use sha2::Digest;
        assert_eq!(f["sha256"], hex::encode(sha2::Sha256::digest(&bytes)));
    }
}

#[test]
fn falsified_scans_carry_replayable_witnesses() {
    let text = "seed = 2\n[group]\nfree = 2\n[representation]\nexpr = sum(schottky(4, pi/4), schottky(2, pi/4))\n\
                [pipeline.1]\ncommand = hyperconvex-scan\np = 1\nq = 1\nr = 2\ntriples = 300\nfallback_depth = 40\n";
    let cfg = RunConfig::parse(text).unwrap();
    let record = run(&cfg).unwrap();
    assert_eq!(record.exit_code(), 0);
    let s = summary(&record, 0);
    assert_eq!(s["passed"], false);
    assert_eq!(s["uncertified_levels"], serde_json::json!([2]));
    let dir = tempfile::tempdir().unwrap();
    emit_reports(&record, dir.path()).unwrap();
    let (_, rows) = read_csv(&dir.path().join("scan.csv"));
    let worst = rows
        .iter()
        .min_by(|a, b| {
            a[1].parse::<f64>()
                .unwrap()
                .total_cmp(&b[1].parse().unwrap())
        })
        .unwrap();
    assert_eq!(worst[2], s["witness"].as_str().unwrap());

    // re-evaluate the margin from the words alone
    use anosov_core::hyperconvexity::{triple_margin, TripleOptions};
    use anosov_core::representation::{BoundaryMap, CertifyOptions};
    let (rep, aut) = cfg.validate().unwrap();
    let map = BoundaryMap::certify(&rep, &aut, &[1, 2], 10, CertifyOptions::default())
        .unwrap()
        .0
        .with_uncertified_depth(40);
    let rays: Vec<anosov_core::BoundaryRay> = worst[2]
        .split(' ')
        .map(|w| {
            let g = anosov_core::GroupWord::parse(w, aut.alphabet()).unwrap();
            anosov_core::BoundaryRay::from_letters(g.letters().to_vec(), 0)
        })
        .collect();
    let m = triple_margin(
        &map,
        1,
        1,
        2,
        &rays[0],
        &rays[1],
        &rays[2],
        &TripleOptions::default(),
    )
    .unwrap();
    assert_eq!(format!("{m:?}"), worst[1]);
}

#[test]
fn repeated_schemas_are_numbered() {
    let text = "[group]\nfree = 2\n[representation]\nexpr = schottky(3, 1)\n\
                [pipeline.1]\ncommand = certify\nR = 5\n[pipeline.2]\ncommand = certify\nR = 6\n[pipeline.3]\ncommand = certify\nR = 7\n";
    let record = run(&RunConfig::parse(text).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = emit_reports(&record, dir.path()).unwrap();
    let names: Vec<&str> = manifest.files.iter().map(|f| f.path.as_str()).collect();
    assert_eq!(
        names,
        [
            "certificate.csv",
            "certificate.svg",
            "certificate-2.csv",
            "certificate-2.svg",
            "certificate-3.csv",
            "certificate-3.svg",
            "run.json"
        ]
    );
    assert_eq!(read_csv(&dir.path().join("certificate-3.csv")).1.len(), 8);
}

#[test]
fn empty_record_has_only_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = emit_reports(&RunRecord::empty(), dir.path()).unwrap();
    assert_eq!(manifest.count(FileKind::Data), 0);
    assert_eq!(manifest.count(FileKind::Metadata), 1);
    assert_eq!(manifest.files.len(), 1);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("small.conf");
    std::fs::write(&conf, SMALL).unwrap();
    let mut outputs: Vec<BTreeMap<String, Vec<u8>>> = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let status = bin()
            .args([
                "run",
                conf.to_str().unwrap(),
                "--threads",
                threads,
                "--seed",
                "9",
                "--out",
            ])
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        let mut files = BTreeMap::new();
        for e in std::fs::read_dir(&out).unwrap() {
            let p = e.unwrap().path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            if name.ends_with(".csv") || name.ends_with(".svg") {
                files.insert(name, std::fs::read(&p).unwrap());
            }
        }
        outputs.push(files);
    }
    assert_eq!(outputs[0].len(), 11);
    assert_eq!(outputs[0], outputs[1]);
}
