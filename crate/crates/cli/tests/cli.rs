//! Integration tests for the `equicast` binary: pipeline behavior, the
//! documented exit codes, config-file precedence, and artifact hygiene.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn equicast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equicast"))
        .args(args)
        .output()
        .expect("binary launches")
}

fn run_ok(args: &[&str]) -> Output {
    let output = equicast(args);
    assert!(
        output.status.success(),
        "equicast {} failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn assert_exit_code(args: &[&str], expected: i32) -> String {
    let output = equicast(args);
    let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
    assert_eq!(
        output.status.code(),
        Some(expected),
        "equicast {} exited {:?}, expected {expected}; stderr: {stderr}",
        args.join(" "),
        output.status.code()
    );
    assert!(
        stderr.starts_with("error:"),
        "nonzero exit without a one-line diagnostic on stderr: {stderr:?}"
    );
    stderr
}

/// Writes the selection-profile snapshot and labeled files into `dir`
/// and returns their paths. Small enough to keep every test quick.
fn small_pipeline_inputs(dir: &Path) -> (String, String) {
    let snaps = dir.join("snaps.csv").to_string_lossy().into_owned();
    let labeled = dir.join("labeled.csv").to_string_lossy().into_owned();
    run_ok(&["synth", "--profile", "selection", "--output", &snaps]);
    run_ok(&["label", "--input", &snaps, "--output", &labeled]);
    (snaps, labeled)
}

#[test]
fn default_pipeline_reaches_the_quality_bar() {
    let dir = tempfile::tempdir().expect("temp dir");
    let snaps = dir.path().join("snaps.csv").to_string_lossy().into_owned();
    let labeled = dir.path().join("labeled.csv").to_string_lossy().into_owned();
    let report = dir.path().join("report.txt").to_string_lossy().into_owned();

    // The canonical three-command run on nothing but defaults.
    run_ok(&["synth", "--output", &snaps]);
    let input_bytes = fs::read(&snaps).expect("snapshot file written");
    run_ok(&["label", "--input", &snaps, "--output", &labeled]);
    run_ok(&[
        "evaluate", "--input", &labeled, "--algo", "random_forest", "--output", &report,
    ]);

    let text = fs::read_to_string(&report).expect("report written");
    assert!(
        text.starts_with("equicast-report v1"),
        "report missing its version header: {text:?}"
    );
    let f_score: f64 = text
        .lines()
        .find_map(|line| line.strip_prefix("f_score "))
        .expect("report carries an f_score line")
        .parse()
        .expect("f_score parses");
    assert!(
        f_score >= 0.75,
        "default-pipeline forest F-score {f_score} fell below 0.75"
    );

    // Subcommands must never touch their inputs.
    assert_eq!(
        input_bytes,
        fs::read(&snaps).expect("snapshot file still readable"),
        "the pipeline mutated its input snapshot file"
    );
}

#[test]
fn documented_exit_codes_cover_each_error_class() {
    let dir = tempfile::tempdir().expect("temp dir");
    let (snaps, labeled) = small_pipeline_inputs(dir.path());
    let out = dir.path().join("out").to_string_lossy().into_owned();

    // 1 — usage errors: unknown algorithm, bad hyperparameter, zero
    // threads, unknown config key.
    assert_exit_code(&["evaluate", "--input", &labeled, "--algo", "bogus"], 1);
    assert_exit_code(
        &["train", "--input", &labeled, "--algo", "logistic", "--param", "nope=1", "--output", &out],
        1,
    );
    assert_exit_code(&["synth", "--output", &out, "--threads", "0"], 1);
    let config = dir.path().join("bad.conf");
    fs::write(&config, "unknown_key=1\n").expect("config written");
    assert_exit_code(
        &["evaluate", "--config", config.to_str().expect("utf-8 path")],
        1,
    );

    // 2 — unparseable input: a file that is not a snapshot table.
    let junk = dir.path().join("junk.csv");
    fs::write(&junk, "this,is,not\na,snapshot,file\n").expect("junk written");
    assert_exit_code(
        &["label", "--input", junk.to_str().expect("utf-8 path"), "--output", &out],
        2,
    );

    // 3 — labeling error: an impossible growth threshold.
    assert_exit_code(
        &["label", "--input", &snaps, "--output", &out, "--threshold", "-2"],
        3,
    );

    // 4 — training error: a single-class training set (threshold so high
    // that nothing is Good), trained as-is.
    let all_bad = dir.path().join("all_bad.csv").to_string_lossy().into_owned();
    run_ok(&["label", "--input", &snaps, "--output", &all_bad, "--threshold", "9999"]);
    assert_exit_code(
        &["train", "--input", &all_bad, "--algo", "logistic", "--no-balance", "--output", &out],
        4,
    );

    // 5 — evaluation error: more folds than examples of a class.
    assert_exit_code(&["evaluate", "--input", &labeled, "--algo", "logistic", "--k", "9999"], 5);

    // 6 — I/O error: a missing input file, named in the diagnostic.
    let stderr = assert_exit_code(
        &["evaluate", "--input", "/no/such/file.csv", "--algo", "logistic"],
        6,
    );
    assert!(
        stderr.contains("/no/such/file.csv"),
        "missing-file diagnostic does not name the path: {stderr:?}"
    );
}

#[test]
fn config_file_fills_flags_and_the_command_line_wins() {
    let dir = tempfile::tempdir().expect("temp dir");
    let (_, labeled) = small_pipeline_inputs(dir.path());

    let config = dir.path().join("run.conf");
    fs::write(
        &config,
        format!("# pipeline defaults\ninput={labeled}\nalgo=naive_bayes\nk=5\nseed=7\n"),
    )
    .expect("config written");
    let config = config.to_string_lossy().into_owned();

    // Flags absent from the command line come from the file.
    let output = run_ok(&["evaluate", "--config", &config]);
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    assert!(
        stdout.contains("naive_bayes"),
        "config-supplied algorithm not used: {stdout}"
    );

    // An explicit flag overrides the file's value.
    let output = run_ok(&["evaluate", "--config", &config, "--algo", "logistic"]);
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    assert!(
        stdout.contains("logistic") && !stdout.contains("naive_bayes"),
        "command-line --algo did not override the config file: {stdout}"
    );
}

#[test]
fn predict_emits_one_ticker_label_score_line_per_row() {
    let dir = tempfile::tempdir().expect("temp dir");
    let (_, labeled) = small_pipeline_inputs(dir.path());
    let model = dir.path().join("model.bin").to_string_lossy().into_owned();
    run_ok(&["train", "--input", &labeled, "--algo", "naive_bayes", "--output", &model]);

    // A one-row snapshot file must yield exactly one prediction line.
    let one_row = dir.path().join("one_row.csv").to_string_lossy().into_owned();
    run_ok(&[
        "synth", "--profile", "selection", "--stocks", "1", "--quarters", "1", "--output", &one_row,
    ]);
    let output = run_ok(&["predict", "--model", &model, "--input", &one_row]);
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 1, "expected exactly one prediction line: {stdout:?}");
    let fields: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(fields.len(), 3, "prediction line is not ticker,label,score: {stdout:?}");
    assert!(
        fields[1] == "Good" || fields[1] == "Bad",
        "prediction label {:?} is neither Good nor Bad",
        fields[1]
    );
    let score: f64 = fields[2].parse().expect("score parses as a number");
    assert!((0.0..=1.0).contains(&score), "score {score} outside [0, 1]");
}

#[test]
fn feature_lists_flow_from_selection_into_evaluation() {
    let dir = tempfile::tempdir().expect("temp dir");
    let (_, labeled) = small_pipeline_inputs(dir.path());

    // A hand-written feature list with comments restricts the model.
    let features = dir.path().join("features.txt");
    fs::write(&features, "# valuation only\nbook_value\nmarket_cap\nPE_RATIO\n")
        .expect("feature list written");
    let features = features.to_string_lossy().into_owned();
    let model = dir.path().join("model.bin").to_string_lossy().into_owned();
    run_ok(&[
        "train", "--input", &labeled, "--algo", "c45_tree", "--features", &features,
        "--output", &model,
    ]);

    // The selection subcommand's output is itself a usable feature list.
    let selected = dir.path().join("selected.txt").to_string_lossy().into_owned();
    run_ok(&[
        "select-features", "--input", &labeled, "--algo", "naive_bayes", "--k", "5",
        "--output", &selected,
    ]);
    let list = fs::read_to_string(&selected).expect("selected list written");
    assert!(!list.trim().is_empty(), "selection produced an empty feature list");
    run_ok(&[
        "evaluate", "--input", &labeled, "--algo", "naive_bayes", "--k", "5",
        "--features", &selected,
    ]);

    // An unknown feature id in the list is an input error (exit 2).
    let bad = dir.path().join("bad_features.txt");
    fs::write(&bad, "definitely_not_a_feature\n").expect("bad list written");
    assert_exit_code(
        &[
            "evaluate", "--input", &labeled, "--algo", "naive_bayes",
            "--features", bad.to_str().expect("utf-8 path"),
        ],
        2,
    );
}

#[test]
fn balance_writes_an_equalized_artifact_and_compare_reports_significance() {
    let dir = tempfile::tempdir().expect("temp dir");
    let (_, labeled) = small_pipeline_inputs(dir.path());

    // The balanced dataset is a first-class on-disk artifact.
    let balanced = dir.path().join("balanced.csv").to_string_lossy().into_owned();
    let output = run_ok(&["balance", "--input", &labeled, "--output", &balanced]);
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    assert!(
        Path::new(&balanced).exists(),
        "balance did not write its output file"
    );
    assert!(stdout.contains("balanced"), "balance printed no summary: {stdout}");

    // Two algorithms on identical folds, with a paired t-test verdict.
    let output = run_ok(&[
        "evaluate", "--input", &balanced, "--algo", "logistic", "--compare", "naive_bayes",
        "--k", "5", "--no-balance",
    ]);
    let stdout = String::from_utf8_lossy(&output.stdout).into_owned();
    assert!(
        stdout.contains("logistic") && stdout.contains("naive_bayes"),
        "comparison table missing a row: {stdout}"
    );
    assert!(
        stdout.contains("paired t-test") && stdout.contains("significant"),
        "comparison omitted the t-test verdict: {stdout}"
    );
}
