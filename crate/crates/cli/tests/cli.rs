use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn macrodim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_macrodim"))
        .args(args)
        .arg("--out")
        .arg(out)
        .current_dir(repo())
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(command: &str, doc: &Value) {
    let schema = read_json(&repo().join(format!("schemas/{command}.schema.json")));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{command}: {errors:#?}");
}

const SMALL: &[&str] = &["--generator", "lattice:z2:radius=6", "--radius", "3,6", "--replicas", "8"];

fn with_small<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(SMALL);
    v.extend_from_slice(extra);
    v
}

#[test]
fn every_command_output_matches_its_schema() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[(&str, &[&str])] = &[
        ("simulate", &["--grammar", "builtin:two_way_flip"]),
        ("clusters", &["--grammar", "builtin:spin_flip"]),
        ("distortion", &["--grammar", "builtin:chord"]),
        ("verify", &["--grammar", "builtin:chord", "--chain", "chains/box_walk.chain"]),
        ("reversibility", &["--chain", "chains/three_state.chain"]),
        ("experiment", &["--grammar", "builtin:two_way_flip"]),
        ("experiment", &["--grammar", "grammars/chord.grammar"]),
    ];
    for (cmd, extra) in runs {
        let o = macrodim(&with_small(cmd, extra), dir.path());
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert_valid(cmd, &read_json(&dir.path().join(format!("{cmd}.json"))));
    }
    let o = macrodim(&["dimension", "--generator", "tree:binary:depth=8"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_valid("dimension", &read_json(&dir.path().join("dimension.json")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    assert_eq!(code(&macrodim(&["no-such-command"], out)), 1);
    assert_eq!(code(&macrodim(&["simulate", "--replicas", "many"], out)), 1);
    assert_eq!(code(&macrodim(&["simulate", "--config", "missing.toml"], out)), 1);
    assert_eq!(code(&macrodim(&["simulate", "--replicas", "0"], out)), 2);
    assert_eq!(code(&macrodim(&["experiment", "--radius", "8,4"], out)), 2);
    assert_eq!(code(&macrodim(&["simulate", "--epsilon=-1"], out)), 2);
    assert_eq!(code(&macrodim(&["simulate", "--grammar", "builtin:nope"], out)), 2);
    assert_eq!(code(&macrodim(&["simulate", "--generator", "lattice:z9"], out)), 2);
    assert_eq!(code(&macrodim(&["reversibility", "--chain", "chains/cycle_a2.chain"], out)), 2);
    // Irreversible flips fail the experiment's preconditions.
    assert_eq!(code(&macrodim(&with_small("experiment", &["--grammar", "builtin:spin_flip"]), out)), 2);
}

#[test]
fn frozen_grammar_never_fires() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrodim(&with_small("simulate", &["--grammar", "builtin:frozen"]), dir.path());
    assert_eq!(code(&o), 0);
    let doc = read_json(&dir.path().join("simulate.json"));
    assert_eq!(doc["result"]["event_count"]["mean"], 0.0);
    assert_eq!(doc["result"]["initial_embeddings"], 0);
    let log = std::fs::read_to_string(dir.path().join("events/replica-000000.log")).unwrap();
    assert!(log.lines().all(|l| l.starts_with('#')), "{log}");
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = with_small("simulate", &["--grammar", "builtin:chord", "--seed", "11"]);
    assert_eq!(code(&macrodim(&args, a.path())), 0);
    assert_eq!(code(&macrodim(&args, b.path())), 0);
    for name in ["simulate.json", "events/replica-000000.log", "events/replica-000007.log"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs");
    }
    let other = with_small("simulate", &["--grammar", "builtin:chord", "--seed", "12"]);
    assert_eq!(code(&macrodim(&other, b.path())), 0);
    assert_ne!(
        std::fs::read(a.path().join("simulate.json")).unwrap(),
        std::fs::read(b.path().join("simulate.json")).unwrap()
    );
}

#[test]
fn chain_files_give_the_expected_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    for (file, verdict, exit) in [
        ("three_state", "reversible", 0),
        ("box_walk", "reversible", 0),
        ("cycle_a2", "violated", 2),
    ] {
        let path = format!("chains/{file}.chain");
        let o = macrodim(&["reversibility", "--chain", &path], dir.path());
        assert_eq!(code(&o), exit, "{file}");
        let doc = read_json(&dir.path().join("reversibility.json"));
        assert_eq!(doc["result"]["report"]["verdict"], verdict, "{file}");
    }
    let doc = read_json(&dir.path().join("reversibility.json"));
    assert_eq!(doc["result"]["report"]["violations"][0]["cycle"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_fails_only_on_hard_failures() {
    let dir = tempfile::tempdir().unwrap();
    let ok = macrodim(&["verify", "--grammar", "grammars/two_way_flip.grammar"], dir.path());
    assert_eq!(code(&ok), 0);
    let bad = macrodim(&["verify", "--grammar", "grammars/subdivide.grammar"], dir.path());
    assert_eq!(code(&bad), 2);
    let doc = read_json(&dir.path().join("verify.json"));
    assert!(!doc["result"]["hard_failures"].as_array().unwrap().is_empty());
    let chained = macrodim(&["verify", "--grammar", "builtin:chord", "--chain", "chains/cycle_a2.chain"], dir.path());
    assert_eq!(code(&chained), 2);
}

#[test]
fn csv_format_writes_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = macrodim(&["dimension", "--generator", "lattice:z1:radius=64", "--format", "csv"], dir.path());
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(dir.path().join("dimension.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("spec,n,size,d_n"));
    assert_eq!(lines.count(), 65);
    assert!(!dir.path().join("dimension.json").exists());
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "generator = \"lattice:z1:radius=32\"\ngrammar = \"builtin:two_way_flip\"\nreplicas = 3\nseed = 5\n",
    )
    .unwrap();
    let o = macrodim(&["simulate", "--config", cfg.to_str().unwrap(), "--replicas", "2"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&dir.path().join("simulate.json"));
    assert_eq!(doc["config"]["replicas"], 2);
    assert_eq!(doc["config"]["seed"], 5);
    assert_eq!(doc["result"]["window"]["spec"], "lattice:z1:radius=32");
    std::fs::write(&cfg, "replicas = 3\nunknown_key = 1\n").unwrap();
    assert_eq!(code(&macrodim(&["simulate", "--config", cfg.to_str().unwrap()], dir.path())), 1);
}
