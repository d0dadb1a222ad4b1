use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cardnet"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn missing_config_is_a_load_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--config", "nope.toml", "stats"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("kind=load"), "{}", stderr(&out));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["--no-such-flag", "stats"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), "corpus = \"x.csv\"\nlearning-rate = 3\n").unwrap();
    let out = run(dir.path(), &["--config", "c.toml", "stats"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("kind=config"), "{}", stderr(&out));
}

#[test]
fn bool_flags_do_not_swallow_the_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["make-fixtures", "--out", ".", "--cards", "12", "--size", "8"]).status.success());
    let out = run(dir.path(), &["--config", "cardnet.toml", "--include-malformed", "-v", "stats"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("include-malformed = true"), "{}", stderr(&out));
    let out = run(dir.path(), &["--config", "cardnet.toml", "--augment=false", "-v", "stats"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("augment = false"), "{}", stderr(&out));
}

#[test]
fn stats_csv_counts_every_fixture_card() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["make-fixtures", "--out", ".", "--cards", "30", "--size", "8"]).status.success());
    let out = run(dir.path(), &["--config", "cardnet.toml", "stats", "--csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let color_total: usize = text
        .lines()
        .filter(|l| l.starts_with("color:"))
        .map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(color_total, 30, "{text}");
}

#[test]
fn match_without_models_names_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["make-fixtures", "--out", ".", "--cards", "12", "--size", "8"]).status.success());
    let out = run(dir.path(), &["--config", "cardnet.toml", "match", "--image", "query.png"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("image-color.cnn"), "{}", stderr(&out));
}
