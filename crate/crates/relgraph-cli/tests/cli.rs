//! Integration tests for the `relgraph` binary: argument handling, output
//! shapes, config-file precedence, and the documented exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relgraph"))
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn CLI")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Three-node grid chain A→B→C with query A..C.
fn chain_graph(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("chain.txt");
    std::fs::write(
        &path,
        "N\tA\tgender=unknown\tage=unknown\n\
         N\tB\tgender=unknown\tage=unknown\n\
         N\tC\tgender=unknown\tage=unknown\n\
         E\tA\ttop\tB\n\
         E\tB\tright\tC\n\
         Q\tA\tC\n",
    )
    .unwrap();
    path
}

#[test]
fn help_documents_subcommands_and_exit_codes() {
    let out = run(cli().arg("--help"));
    assert!(out.status.success());
    let text = stdout_of(&out);
    for needle in [
        "extract",
        "paths",
        "solve",
        "perturb",
        "eval",
        "Exit codes",
        "fixture miss",
    ] {
        assert!(text.contains(needle), "help output missing `{needle}`");
    }
}

#[test]
fn solve_chain_prints_per_path_table_and_answer() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = chain_graph(tmp.path());
    let out = run(cli()
        .args(["solve", "--domain", "stepgame", "--graph"])
        .arg(&graph));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(
        text.contains("A -[top>]- B -[right>]- C  =>  [top_right]"),
        "got: {text}"
    );
    assert!(text.contains("answer: [top_right]"), "got: {text}");
}

#[test]
fn paths_lists_enumerated_paths_with_total() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = chain_graph(tmp.path());
    let out = run(cli()
        .args(["paths", "--domain", "stepgame", "--graph"])
        .arg(&graph));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("A -[top>]- B -[right>]- C"), "got: {text}");
    assert!(text.contains("total: 1"), "got: {text}");
}

#[test]
fn disconnected_query_prints_empty_answer_and_exits_8() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("disconnected.txt");
    std::fs::write(
        &path,
        "N\tA\tgender=unknown\tage=unknown\n\
         N\tB\tgender=unknown\tage=unknown\n\
         N\tX\tgender=unknown\tage=unknown\n\
         E\tA\ttop\tB\n\
         Q\tA\tX\n",
    )
    .unwrap();
    let out = run(cli()
        .args(["solve", "--domain", "stepgame", "--graph"])
        .arg(&path));
    assert_eq!(out.status.code(), Some(8), "{}", stderr_of(&out));
    assert!(stdout_of(&out).contains("[]"));
}

#[test]
fn extract_without_recorded_fixture_exits_6() {
    let tmp = tempfile::tempdir().unwrap();
    let fixtures = tmp.path().join("fixtures");
    std::fs::create_dir(&fixtures).unwrap();
    let out = run(cli()
        .args(["extract", "--domain", "stepgame", "--mock", "--fixtures"])
        .arg(&fixtures)
        .args(["--story", "A is above B."]));
    assert_eq!(out.status.code(), Some(6), "{}", stderr_of(&out));
}

#[test]
fn unknown_eval_mode_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let dataset = tmp.path().join("d.jsonl");
    std::fs::write(
        &dataset,
        "{\"id\":\"r\",\"story\":\"x\",\"answers\":\"above\"}\n",
    )
    .unwrap();
    let out = run(cli()
        .args([
            "eval",
            "--domain",
            "stepgame",
            "--mode",
            "bogus",
            "--dataset",
        ])
        .arg(&dataset));
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn missing_dataset_file_exits_3() {
    let out = run(cli().args([
        "eval",
        "--domain",
        "stepgame",
        "--mode",
        "symbolic",
        "--dataset",
        "/nonexistent/dataset.jsonl",
    ]));
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
}

#[test]
fn dataset_with_foreign_answer_label_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let dataset = tmp.path().join("bad.jsonl");
    std::fs::write(
        &dataset,
        "{\"id\":\"r\",\"story\":\"x\",\"answers\":\"sideways\"}\n",
    )
    .unwrap();
    let out = run(cli()
        .args([
            "eval",
            "--domain",
            "stepgame",
            "--mode",
            "symbolic",
            "--dataset",
        ])
        .arg(&dataset));
    assert_eq!(out.status.code(), Some(4), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("sideways"));
}

#[test]
fn config_file_supplies_domain() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = chain_graph(tmp.path());
    let config = tmp.path().join("config.toml");
    std::fs::write(&config, "domain = \"stepgame\"\n").unwrap();
    let out = run(cli()
        .args(["--config"])
        .arg(&config)
        .args(["paths", "--graph"])
        .arg(&graph));
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(stdout_of(&out).contains("total: 1"));
}

#[test]
fn command_line_domain_overrides_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = chain_graph(tmp.path());
    let config = tmp.path().join("config.toml");
    // The grid edge labels are invalid under the kinship domain, so this
    // run only succeeds if the flag wins over the file.
    std::fs::write(&config, "domain = \"clutrr\"\n").unwrap();
    let out = run(cli()
        .args(["--config"])
        .arg(&config)
        .args(["paths", "--domain", "stepgame", "--graph"])
        .arg(&graph));
    assert!(out.status.success(), "{}", stderr_of(&out));
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let graph = chain_graph(tmp.path());
    let config = tmp.path().join("config.toml");
    std::fs::write(&config, "no_such_option = true\n").unwrap();
    let out = run(cli()
        .args(["--config"])
        .arg(&config)
        .args(["paths", "--domain", "stepgame", "--graph"])
        .arg(&graph));
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn perturb_injects_into_an_existing_corpus() {
    let tmp = tempfile::tempdir().unwrap();
    let clean = tmp.path().join("clean.txt");
    let noisy = tmp.path().join("noisy.txt");
    let out = run(cli()
        .args([
            "perturb", "--domain", "stepgame", "--count", "3", "--hops", "3..4",
        ])
        .args(["--seed", "11", "--output"])
        .arg(&clean));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let out = run(cli()
        .args(["perturb", "--domain", "stepgame", "--input"])
        .arg(&clean)
        .args(["--n", "2", "--seed", "12", "--types", "B,G", "--output"])
        .arg(&noisy));
    assert!(out.status.success(), "{}", stderr_of(&out));
    let clean_text = std::fs::read_to_string(&clean).unwrap();
    let noisy_text = std::fs::read_to_string(&noisy).unwrap();
    assert!(noisy_text.starts_with("S "));
    assert!(
        noisy_text.lines().count() > clean_text.lines().count(),
        "noise injection should add nodes/edges"
    );
}

#[test]
fn invalid_domain_exits_2() {
    let out = run(cli().args(["paths", "--domain", "bogus", "--graph", "x.txt"]));
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}
