use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mhscreen_cli::formats::load_outcomes;
use tempfile::TempDir;

fn mhscreen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhscreen"))
        .args(args)
        .output()
        .expect("spawn mhscreen")
}

fn ok(args: &[&str]) -> Output {
    let out = mhscreen(args);
    assert!(
        out.status.success(),
        "mhscreen {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn workload(dir: &Path) -> (String, String) {
    let (sets, pairs) = (p(dir, "w.sets"), p(dir, "w.pairs"));
    ok(&[
        "gen",
        "--group",
        "0.9:40:20-60",
        "--group",
        "0.5:40:20-60",
        "--group",
        "1/10:40:20-60",
        "--seed",
        "5",
        "--sets",
        &sets,
        "--pairs",
        &pairs,
    ]);
    (sets, pairs)
}

#[test]
fn gen_sign_screen_pipeline() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (sets, pairs) = workload(d);
    assert_eq!(fs::read_to_string(&pairs).unwrap().lines().count(), 120);
    assert_eq!(fs::read_to_string(&sets).unwrap().lines().count(), 240);

    let cache = p(d, "w.cache");
    ok(&[
        "sign", "--sets", &sets, "--k", "1000", "--seed", "9", "--out", &cache,
    ]);
    assert_eq!(&fs::read(&cache).unwrap()[..4], b"MHSG");

    let from_cache = p(d, "from_cache");
    let from_sets = p(d, "from_sets");
    ok(&[
        "screen",
        "--cache",
        &cache,
        "--pairs",
        &pairs,
        "--e",
        "1e-3",
        "--out",
        &from_cache,
    ]);
    let out = ok(&[
        "screen",
        "--sets",
        &sets,
        "--pairs",
        &pairs,
        "--k",
        "1000",
        "--seed",
        "9",
        "--e",
        "1e-3",
        "--baseline",
        "--out",
        &from_sets,
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("accuracy vs full-K"));
    assert!(text.contains("agreement vs exact"));

    // signing on the fly and from the cache give the same outcomes
    assert_eq!(
        fs::read(Path::new(&from_cache).join("outcomes.csv")).unwrap(),
        fs::read(Path::new(&from_sets).join("outcomes.csv")).unwrap()
    );
    let json: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(Path::new(&from_sets).join("report.json")).unwrap(),
    )
    .unwrap();
    let report = &json["report"];
    assert_eq!(report["pairs"], 120);
    assert!(
        report["total_comparisons"].as_u64().unwrap()
            < report["baseline_comparisons"].as_u64().unwrap()
    );
    assert!(report["accuracy"].as_f64().unwrap() >= 0.95);
    assert!(Path::new(&from_sets).join("baseline_outcomes.csv").exists());
}

#[test]
fn screen_outputs_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (sets, pairs) = workload(d);
    for run in ["a", "b"] {
        ok(&[
            "screen",
            "--sets",
            &sets,
            "--pairs",
            &pairs,
            "--out",
            &p(d, run),
        ]);
    }
    assert_eq!(
        fs::read(d.join("a/outcomes.csv")).unwrap(),
        fs::read(d.join("b/outcomes.csv")).unwrap()
    );
}

#[test]
fn empty_schedule_matches_baseline() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (sets, pairs) = workload(d);
    let out = p(d, "plain");
    ok(&[
        "screen",
        "--sets",
        &sets,
        "--pairs",
        &pairs,
        "--schedule",
        "",
        "--baseline",
        "--out",
        &out,
    ]);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("plain/report.json")).unwrap()).unwrap();
    assert_eq!(json["report"]["accuracy"], 1.0);
    assert_eq!(
        json["report"]["total_comparisons"],
        json["report"]["baseline_comparisons"]
    );
    let screened = load_outcomes(&d.join("plain/outcomes.csv")).unwrap();
    let baseline = load_outcomes(&d.join("plain/baseline_outcomes.csv")).unwrap();
    assert_eq!(screened, baseline);
}

#[test]
fn b_bit_cache_screens() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (sets, pairs) = workload(d);
    let cache = p(d, "b8.cache");
    ok(&["sign", "--sets", &sets, "--bits", "8", "--out", &cache]);
    let bytes = fs::read(&cache).unwrap();
    assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
    let out = ok(&[
        "screen",
        "--cache",
        &cache,
        "--pairs",
        &pairs,
        "--e",
        "1e-3",
        "--out",
        &p(d, "b8"),
    ]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("8 bits"));
}

#[test]
fn thresholds_csv() {
    let out = ok(&[
        "thresholds",
        "--threshold",
        "0.5",
        "--e",
        "5.6e-10",
        "--schedule",
        "100",
    ]);
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "k,m_l,T_L,m_u,T_U\n100,20,0.2,79,0.79\n"
    );
    let out = ok(&[
        "thresholds",
        "--threshold",
        "0.5",
        "--e",
        "5.6e-10",
        "--e-upper",
        "1.36e-10",
        "--schedule",
        "100",
    ]);
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .ends_with("100,20,0.2,80,0.8\n"));
}

#[test]
fn fr_curves_from_outcomes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let (sets, pairs) = workload(d);
    for (name, e) in [("lo", "1e-10"), ("hi", "1e-3")] {
        ok(&[
            "screen",
            "--sets",
            &sets,
            "--pairs",
            &pairs,
            "--threshold",
            "0.3",
            "--e",
            e,
            "--out",
            &p(d, name),
        ]);
    }
    let lo = format!("1e-10={}", p(d, "lo/outcomes.csv"));
    let hi = format!("1e-3={}", p(d, "hi/outcomes.csv"));
    let fr_path = p(d, "fr.csv");
    ok(&[
        "fr",
        "--outcomes",
        &lo,
        "--outcomes",
        &hi,
        "--out",
        &fr_path,
    ]);
    let text = fs::read_to_string(&fr_path).unwrap();
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 18);
    for curve in rows.chunks(9) {
        let fr: Vec<f64> = curve.iter().map(|r| r[2].parse().unwrap()).collect();
        assert!(fr.windows(2).all(|w| w[0] <= w[1]));
    }
    let at_100 = |i: usize| rows[i][3].parse::<f64>().unwrap();
    assert!(at_100(0) <= at_100(9));
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let bad = p(d, "bad.sets");
    fs::write(&bad, "1 2\n3\n4\n5\n6 abc\n").unwrap();
    fs::write(d.join("p"), "0 1\n").unwrap();
    let out = mhscreen(&[
        "screen",
        "--sets",
        &bad,
        "--pairs",
        &p(d, "p"),
        "--out",
        &p(d, "o"),
    ]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 5"), "{err}");

    let out = mhscreen(&[
        "gen",
        "--group",
        "1.0:5:10",
        "--sets",
        &p(d, "s"),
        "--pairs",
        &p(d, "q"),
    ]);
    assert!(!out.status.success());

    let out = mhscreen(&["thresholds", "--schedule", "200,100"]);
    assert!(!out.status.success());

    let good = p(d, "good.sets");
    fs::write(&good, "1 2\n2 3\n").unwrap();
    fs::write(d.join("missing"), "0 7\n").unwrap();
    let out = mhscreen(&[
        "screen",
        "--sets",
        &good,
        "--pairs",
        &p(d, "missing"),
        "--out",
        &p(d, "o"),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains('7'));
}
