//! End-to-end checks of the binary: exit codes, report documents, config
//! handling, and determinism across repeated invocations.

use std::path::Path;
use std::process::{Command, Output};

use filterlab::config::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_filterlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("the binary should spawn")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("reports are utf-8")
}

fn config_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn membership_exit_codes_distinguish_holds_fails_inconclusive() {
    // A cofinite set is certified instantly.
    let holds = run(&["filter", "member", "--filter", "stat", "--set", "compl(range(1,64))"]);
    assert_eq!(holds.status.code(), Some(0), "a certified membership exits 0");

    // The odds keep density 1/2, a definitive refusal.
    let fails = run(&["filter", "member", "--filter", "stat", "--set", "evens"]);
    assert_eq!(fails.status.code(), Some(2), "a refuted membership exits 2");

    // The squares' complement has density near 1 but the ratio window has
    // not closed at the default horizon, so the honest answer is neither.
    let open = run(&["filter", "member", "--filter", "stat", "--set", "squares"]);
    assert_eq!(open.status.code(), Some(3), "an unsettled membership exits 3");
}

#[test]
fn operational_failures_exit_one_with_a_diagnostic() {
    let out = run(&["density", "--set", "trapezoids"]);
    assert_eq!(out.status.code(), Some(1), "an unknown set name is operational, not a verdict");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("trapezoids"), "the diagnostic should name the offender: {err}");
}

#[test]
fn usage_errors_are_operational_while_help_stays_clean() {
    // A typo'd flag must not exit 2: that code is reserved for refuted
    // verdicts, and a script has to be able to tell the two apart.
    let out = run(&["density", "--set", "evens", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1), "a bad flag is operational, not a refutation");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--frobnicate"), "the diagnostic should name the flag: {err}");

    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0), "asking for help is not an error");

    let bare = run(&[]);
    assert_eq!(bare.status.code(), Some(1), "a missing subcommand is operational");
}

#[test]
fn sparse_limits_default_to_the_space_spanned_by_the_keys() {
    let out = run(&[
        "converge",
        "sparse",
        "--seq",
        "entries(a: 1/n, b: 1)",
        "--keys",
        "a,b",
        "--filter",
        "frechet",
        "--horizon",
        "1e4",
        "--format",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0), "pointwise limits along a,b should certify");

    let missing = run(&["converge", "sparse", "--seq", "entries(a: 1/n)"]);
    assert_eq!(missing.status.code(), Some(1), "no keys and no space leaves nothing to inspect");
    let err = String::from_utf8_lossy(&missing.stderr);
    assert!(err.contains("--keys"), "the diagnostic should point at --keys: {err}");
}

#[test]
fn modulus_validation_reports_the_failing_axiom_and_exits_two() {
    let out = run(&["modulus", "validate", "--expr", "t*t", "--format", "text"]);
    assert_eq!(out.status.code(), Some(2), "a failed axiom is a refutation");
    let text = stdout_of(&out);
    assert!(
        text.contains("subadditive") && text.contains("exceeds"),
        "the report should carry the subadditivity witness: {text}"
    );

    let ok = run(&["modulus", "validate", "--name", "identity"]);
    assert_eq!(ok.status.code(), Some(0), "identity passes the axioms and the growth probe");

    // log1p satisfies every axiom and is unbounded in truth, but its growth
    // cannot be witnessed inside the probe's argument cap; the honest code
    // is the inconclusive one.
    let slow = run(&["modulus", "validate", "--name", "log1p"]);
    assert_eq!(slow.status.code(), Some(3), "an unwitnessed growth probe exits 3");
}

#[test]
fn density_csv_lists_checkpoint_ratios() {
    let out = run(&["density", "--set", "evens", "--format", "csv", "--horizon", "1e4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("# tool=filterlab"), "CSV opens with the tool stamp: {text}");
    assert!(text.contains("n,ratio"), "CSV carries the header row");
    assert!(
        text.lines().any(|l| l.starts_with("10000,")),
        "the final checkpoint is the horizon itself"
    );
}

#[test]
fn gallery_documents_are_stamped_and_structured() {
    let out = run(&["gallery", "run", "sparse-product"]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(doc["tool"], "filterlab");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["reports"][0]["name"], "sparse-product");
    assert_eq!(doc["reports"][0]["status"], "pass");
    assert!(
        doc.get("timings_ms").is_none(),
        "wall times only appear when asked for, keeping documents reproducible"
    );
}

#[test]
fn unknown_config_keys_are_rejected_with_a_position() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "horizont = 5\n").expect("write config");
    let out = run(&["gallery", "list", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1), "config rejection is operational");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("horizont"), "the unknown key is named: {err}");
    assert!(err.contains("line 1"), "the position is reported: {err}");
}

#[test]
fn shipped_configs_round_trip_through_emit_and_parse() {
    for name in ["gallery-default.toml", "density-squares-log.toml", "quick.toml"] {
        let text = std::fs::read_to_string(config_path(name))
            .unwrap_or_else(|e| panic!("shipped config {name} should be readable: {e}"));
        let parsed = RunConfig::parse(&text)
            .unwrap_or_else(|e| panic!("shipped config {name} should validate: {e}"));
        let emitted = parsed.emit().expect("emit is infallible for valid configs");
        let reparsed = RunConfig::parse(&emitted)
            .unwrap_or_else(|e| panic!("emitted form of {name} should re-parse: {e}"));
        assert_eq!(reparsed, parsed, "emit/parse must be an identity on {name}");
    }
}

#[test]
fn flag_overrides_config_value() {
    let out = run(&[
        "density",
        "--set",
        "evens",
        "--config",
        &config_path("quick.toml"),
        "--horizon",
        "2e4",
        "--format",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(
        text.contains("horizon 20000"),
        "the flag outranks the config's 4e5 horizon: {text}"
    );
}

#[test]
fn quick_config_runs_identically_regardless_of_job_count() {
    let quick = config_path("quick.toml");
    let first = run(&["gallery", "run-all", "--config", &quick, "--jobs", "1"]);
    assert_eq!(first.status.code(), Some(0), "the reduced gallery passes");
    let second = run(&["gallery", "run-all", "--config", &quick, "--jobs", "4"]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(
        stdout_of(&first),
        stdout_of(&second),
        "worker count must not leak into the document"
    );
}

#[test]
fn named_config_entries_resolve_in_expressions() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("named.toml");
    std::fs::write(&path, "[sets]\nprobe = \"compl(range(1,64))\"\n").expect("write config");
    let out = run(&[
        "filter",
        "member",
        "--filter",
        "stat",
        "--set",
        "probe",
        "--config",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "the name resolves to its definition");
}
