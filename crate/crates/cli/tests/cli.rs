use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn macc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macc"))
        .args(args)
        .env_remove("MACC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn scheme1_exhaustive_falls_back_to_distinct_demands() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = macc(&[
        "simulate",
        "--scheme",
        "s1",
        "-C",
        "4",
        "-r",
        "2",
        "-t",
        "2",
        "-N",
        "6",
        "--demands",
        "exhaustive",
        "--out",
        out,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = report(dir.path());
    assert_eq!(rep["truncated"], true);
    assert_eq!(rep["expected_memory"], "5/2");
    let dv = rep["demand_vectors"].as_array().unwrap();
    assert_eq!(dv.len(), 1);
    assert_eq!(dv[0]["demands"], serde_json::json!([1, 2, 3, 4, 5, 6]));
    assert_eq!(dv[0]["rate"], "1/6");
    assert!(dv[0]["users"]
        .as_array()
        .unwrap()
        .iter()
        .all(|u| u["decoded"] == true));
}

#[test]
fn corner_sends_nothing() {
    let o = macc(&[
        "simulate", "--scheme", "corner", "-C", "4", "-r", "2", "-N", "6", "--count", "5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("memory 3/1"), "{s}");
    assert!(s.contains("rates 0/1"), "{s}");
}

#[test]
fn scheme2_random_rate_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = macc(&[
        "simulate",
        "--scheme",
        "s2",
        "-C",
        "5",
        "-r",
        "3",
        "-N",
        "10",
        "--demands",
        "random",
        "--seed",
        "7",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rep = report(dir.path());
    assert_eq!(rep["seed"], 7);
    assert!(rep["demand_vectors"]
        .as_array()
        .unwrap()
        .iter()
        .all(|d| d["rate"] == "4/1"));
    for f in [
        "library.json",
        "library.bin",
        "caches/caches.json",
        "broadcasts/broadcast_0.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
}

#[test]
fn same_seed_gives_identical_outputs() {
    let run = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let o = macc(&[
            "simulate",
            "--scheme",
            "s1",
            "-C",
            "5",
            "-r",
            "2",
            "-t",
            "2",
            "-N",
            "3",
            "--count",
            "4",
            "--seed",
            seed,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
        (
            read("report.json"),
            read("library.bin"),
            read("caches/cache_1.bin"),
            read("broadcasts/broadcast_3.bin"),
        )
    };
    assert_eq!(run("11"), run("11"));
    assert_ne!(run("11").1, run("12").1);
}

#[test]
fn seed_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_macc"))
        .args([
            "simulate", "--scheme", "mkr", "-C", "4", "-r", "2", "-t", "1", "-N", "2", "--count", "2",
            "--out",
        ])
        .arg(dir.path())
        .env("MACC_SEED", "99")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(dir.path())["seed"], 99);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"scheme": "mkr", "C": 4, "r": 2, "t": 2, "N": 6, "demand_vector": [1,2,3,4,5,6], "seed": 3}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = macc(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = report(&out);
    assert_eq!(rep["seed"], 5);
    assert_eq!(rep["demand_mode"], "explicit");
    assert_eq!(rep["expected_memory"], "3/1");
}

#[test]
fn exit_codes() {
    // Scheme 2 needs N > binom(C-1, r).
    let o = macc(&["simulate", "--scheme", "s2", "-C", "4", "-r", "2", "-N", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = macc(&[
        "simulate", "--scheme", "s1", "-C", "4", "-r", "2", "-t", "2", "-N", "6", "--m", "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = macc(&[
        "simulate",
        "--scheme",
        "mkr",
        "-C",
        "4",
        "-r",
        "2",
        "-t",
        "1",
        "-N",
        "2",
        "--demand-vector",
        "1,3,1,1,1,1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = macc(&["simulate", "--config", "/nonexistent/run.json"]);
    assert_eq!(o.status.code(), Some(4));
    let o = macc(&["verify", "--suite", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tradeoff_fig5_corners() {
    let dir = tempfile::tempdir().unwrap();
    let o = macc(&[
        "tradeoff",
        "--preset",
        "fig5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("tradeoff.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("M,R_achievable,R_bound,provenance,argmax_s,argmax_l")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    for (m, r) in [("3/4", "3/1"), ("5/2", "1/6"), ("3/1", "0/1")] {
        assert!(
            rows.iter()
                .any(|row| row[0] == m && row[1] == r && row[2] == r && row[3].starts_with("envelope:")),
            "missing envelope vertex ({m}, {r})"
        );
    }
    // Every sample of the achievable rate sits on or above the bound.
    assert!(rows.iter().all(|row| {
        let q = |s: &str| {
            let (a, b) = s.split_once('/').unwrap();
            (a.parse::<i128>().unwrap(), b.parse::<i128>().unwrap())
        };
        let (a, b) = q(row[1]);
        let (c, d) = q(row[2]);
        a * d >= c * b
    }));
}

#[test]
fn tradeoff_fig3_scheme1_below_mkr() {
    let o = macc(&["tradeoff", "--preset", "fig3", "--grid", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let memory = |prefix: &str| -> String {
        s.lines()
            .find(|l| l.split(',').nth(3) == Some(prefix))
            .unwrap_or_else(|| panic!("{prefix}"))
            .split(',')
            .next()
            .unwrap()
            .to_string()
    };
    assert_eq!(memory("mkr(t=1)"), memory("scheme1(t=1)"));
    // Nt/C against the closed form evaluated independently.
    for (t, s1) in [(2, "12/1"), (3, "46/3"), (4, "52/3"), (5, "55/3")] {
        assert_eq!(memory(&format!("mkr(t={t})")), format!("{}/1", 7 * t));
        assert_eq!(memory(&format!("scheme1(t={t})")), s1);
    }
}

#[test]
fn tradeoff_decimal_and_missing_args() {
    let o = macc(&[
        "tradeoff",
        "-C",
        "5",
        "-r",
        "3",
        "-N",
        "10",
        "--decimal",
        "--grid",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("1.2,4,4,scheme2-corner"), "{}", stdout(&o));
    assert_eq!(macc(&["tradeoff", "-C", "5"]).status.code(), Some(2));
}

#[test]
fn verify_suites_pass() {
    for suite in ["identities", "mds", "decode"] {
        let o = macc(&["verify", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "{suite}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["passed"], true);
        assert_eq!(v["suites"][0]["suite"], suite);
    }
    let o = macc(&["verify", "--suite", "decode"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for run in v["suites"][0]["runs"].as_array().unwrap() {
        assert_eq!(run["demand_vectors"], 64);
        assert_eq!(run["passed_vectors"], 64);
    }
}
