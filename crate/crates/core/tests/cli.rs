use std::path::Path;
use std::process::{Command, Output};

fn supercvx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supercvx")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_scenario(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn selected_lawful_suites_exit_zero() {
    let o = supercvx(&["laws", "--suite", "axiom1/*", "--cases", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("PASS  axiom1/closed_unit"), "{text}");
    assert!(!text.contains("mutant"), "{text}");
    assert!(text.contains("0 failed, seed 0"), "{text}");
}

#[test]
fn mutants_exit_one_with_counterexample() {
    let o = supercvx(&["laws", "--suite", "morphism/mutant-square", "--mutants", "--cases", "20"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("FAIL  morphism/mutant-square"), "{text}");
    assert!(text.contains("counterexample"), "{text}");
    assert!(text.contains("\"map_of_combination\":\"1/4\""), "{text}");
}

#[test]
fn list_shows_mutants_only_on_request() {
    let plain = stdout(&supercvx(&["laws", "--list"]));
    let all = stdout(&supercvx(&["laws", "--list", "--mutants"]));
    assert!(plain.lines().any(|l| l == "triangle/closed_unit"));
    assert!(!plain.contains("(mutant)"));
    assert!(all.contains("phi/mutant-double-count  (mutant)"));
    assert!(all.lines().count() > plain.lines().count());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["demo", "nope"][..],
        &["laws", "--suite", "no-such-suite"],
        &["laws", "--tolerance", "-1"],
        &["laws", "--cases", "many"],
        &["frobnicate"],
        &["scenario", "/nonexistent/scenario.json"],
    ] {
        let o = supercvx(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty(), "{args:?}");
    }
}

#[test]
fn json_report_is_byte_identical_across_runs() {
    let args = ["laws", "--suite", "monad-*", "--cases", "40", "--seed", "7", "--json", "-"];
    let (a, b) = (supercvx(&args), supercvx(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let parsed: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 3);
    let other = supercvx(&["laws", "--suite", "monad-*", "--cases", "40", "--seed", "8", "--json", "-"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn json_report_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = supercvx(&["laws", "--suite", "phi/finite", "--cases", "10", "--json", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report[0]["passed"], report[0]["cases"]);
}

#[test]
fn demos() {
    let o = supercvx(&["demo", "divergent-sum", "--n", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("= 5050"), "{}", stdout(&o));

    let o = supercvx(&["demo", "half-cauchy", "--n", "1,10", "--json", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let demo: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(demo["rows"].as_array().unwrap().len(), 2);
    assert_eq!(demo["limit_in_image"], false);

    let o = supercvx(&["demo", "open-interval"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("enclosure [0.386294361"), "{}", stdout(&o));
    assert!(stdout(&o).contains("inside (0, 1): true"));

    let o = supercvx(&["demo", "divergent-sum", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scenario_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_scenario(
        dir.path(),
        "good.json",
        r#"{"schema": 1,
            "spaces": {"X": {"carrier": ["a", "b", "c"]}},
            "measures": {"P": {"space": "X", "atoms": [{"atom": "a", "weight": "1/3"}, {"atom": "c", "weight": "2/3"}]}},
            "suites": [{"suite": "triangle", "space": "X"}, {"suite": "phi", "measure": "P"}, {"suite": "monad", "space": "X"}]}"#,
    );
    let o = supercvx(&["scenario", &good, "--cases", "20"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 3);

    let bad_weights = write_scenario(
        dir.path(),
        "weights.json",
        r#"{"schema": 1,
            "spaces": {"X": {"carrier": ["a", "b"]}},
            "measures": {"P": {"space": "X", "atoms": [{"atom": "a", "weight": "1/2"}, {"atom": "b", "weight": "1/3"}]}},
            "suites": []}"#,
    );
    let o = supercvx(&["scenario", &bad_weights]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("weights must sum to 1"), "{}", stderr(&o));
    assert!(stderr(&o).contains("measures.P.atoms"), "{}", stderr(&o));

    let square = write_scenario(
        dir.path(),
        "square.json",
        r#"{"schema": 1,
            "maps": {"sq": {"kind": "polynomial", "domain": "closed_unit", "codomain": "closed_unit", "coefficients": ["0", "0", "1"]}},
            "suites": [{"suite": "morphism", "map": "sq"}]}"#,
    );
    let o = supercvx(&["scenario", &square, "--cases", "20"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample"), "{}", stdout(&o));

    let malformed = write_scenario(dir.path(), "broken.json", "{\n  \"schema\": 1,\n  \"suites\": [,]\n}");
    let o = supercvx(&["scenario", &malformed]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3, column 14"), "{}", stderr(&o));
}
