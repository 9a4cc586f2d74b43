use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use perfseq::{Configuration, Direction};
use perfseq_cli::{load_model, query_conditional, render_model};
use perfseq_oracle::{oracle_conditional, oracle_joint};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn perfseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perfseq"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn disjoint_supports_fail_in_both_directions() {
    let path = data("undefined_pair.json");
    for ops in ["right", "left"] {
        let o = perfseq(&["compose", path.to_str().unwrap(), "--ops", ops]);
        assert_eq!(o.status.code(), Some(2), "{ops}: {}", stderr(&o));
        assert!(stderr(&o).contains("x2="), "{}", stderr(&o));
    }
}

#[test]
fn chain_joint_matches_golden() {
    let golden = data("chain_joint.json");
    let model = load_model(&data("chain.json"), false).unwrap();
    let oracle = oracle_joint(model.sequence.items(), &[Direction::Right]).unwrap();
    let expected = render_model(&model.universe, &[oracle], None);
    if std::env::var_os("PERFSEQ_BLESS").is_some() {
        std::fs::write(&golden, &expected).unwrap();
    }
    assert_eq!(std::fs::read_to_string(&golden).unwrap(), expected);

    let o = perfseq(&["compose", data("chain.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), expected);
}

#[test]
fn output_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("joint.json");
    let o = perfseq(&["compose", data("chain.json").to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let joint = load_model(&out, false).unwrap();
    let model = load_model(&data("chain.json"), false).unwrap();
    assert_eq!(joint.sequence.items()[0], model.sequence.compose().unwrap());
}

#[test]
fn query_chain_fixture() {
    let o = perfseq(&["query", data("chain.json").to_str().unwrap(), "--target", "x3=1", "--given", "x1=a"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let p: f64 = stdout(&o).trim().parse().unwrap();

    let model = load_model(&data("chain.json"), false).unwrap();
    let joint = oracle_joint(model.sequence.items(), &[Direction::Right]).unwrap();
    let given = Configuration::from_pairs([(1, 0)]).unwrap();
    let expected = oracle_conditional(&joint, (3, 1), &given).unwrap();
    assert!((p - expected).abs() < 1e-9);
    let lib = query_conditional(&model.sequence, (3, 1), &given).unwrap();
    assert!((lib.probability - expected).abs() < 1e-9);
}

#[test]
fn zero_evidence_exit_code() {
    let o = perfseq(&["query", data("zero_evidence.json").to_str().unwrap(), "--target", "2=0", "--given", "1=1"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn validation_exit_code_and_normalize() {
    let drift = data("drift.json");
    let o = perfseq(&["marginalize", drift.to_str().unwrap(), "--onto", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("measure 0"));
    let o = perfseq(&["--normalize", "marginalize", drift.to_str().unwrap(), "--onto", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = perfseq(&["compose", data("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_and_localize() {
    let chain = data("chain.json");
    let o = perfseq(&["check", chain.to_str().unwrap()]);
    assert_eq!(stdout(&o), "perfect: true\nrip: true\nrip-reorderable: true\n");
    let o = perfseq(&["check", chain.to_str().unwrap(), "--rules"]);
    assert_eq!(o.status.code(), Some(3));

    let o = perfseq(&["localize", chain.to_str().unwrap(), "--report"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["report"]["all_pass"], true);

    let o = perfseq(&["localize", chain.to_str().unwrap(), "--covering", "1,2,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let row = perfseq_cli::parse_model(&stdout(&o), false).unwrap();
    let model = load_model(&chain, false).unwrap();
    assert!(row.sequence.items()[0].approx_eq(&model.sequence.compose().unwrap(), 1e-12));
}

#[test]
fn perfectize_output_is_perfect() {
    let o = perfseq(&["perfectize", data("undefined_pair.json").to_str().unwrap()]);
    // the first step of the pair is undefined, so is the rewrite
    assert_eq!(o.status.code(), Some(2));
    let o = perfseq(&["perfectize", data("chain.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}
