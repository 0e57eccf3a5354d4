use std::io::Write as _;
use std::path::Path;

use synlab::cli::{
    dispatch, parse_spec, run, spec_to_json, Check, Command, RunConfig, EXIT_CHECK_FAILED,
    EXIT_INPUT, EXIT_OK,
};
use synlab::Tolerances;

fn input(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn invoke(args: &[&str], path: &Path) -> (i32, String, String) {
    let mut argv = vec!["synlab".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    argv.push("--input".into());
    argv.push(path.display().to_string());
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(out: &str) -> serde_json::Value {
    serde_json::from_str(out).unwrap()
}

const NONCOMMUTING: &str =
    r#"{"blocks":[2],"elements":{"p":[[1,0],[0,0]],"q":[[0.5,0.5],[0.5,0.5]]}}"#;

#[test]
fn suite_on_non_factor() {
    let f = input(r#"{"blocks":[2,3]}"#);
    let (code, out, _) = invoke(&["suite", "--format", "json", "--trials", "20"], f.path());
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["results"]["verdict"], "NotAntilattice");
    assert_eq!(v["results"]["is_factor"], false);
    assert_eq!(v["config"]["seed"], 0);
    assert_eq!(v["config"]["trials"], 20);
    assert!(v["config"]["tolerances"]["psd"].is_number());
}

#[test]
fn factor_on_single_block() {
    let f = input(r#"{"blocks":[4]}"#);
    let (code, out, _) = invoke(&["factor", "--format", "json"], f.path());
    assert_eq!(code, EXIT_OK);
    assert_eq!(json(&out)["results"]["is_factor"], true);
}

#[test]
fn inf_on_noncommuting_projections() {
    let f = input(NONCOMMUTING);
    let (code, out, _) = invoke(&["inf", "--format", "json"], f.path());
    assert_eq!(code, EXIT_OK);
    let v = json(&out);
    assert_eq!(v["results"]["status"], "NotExists");
    assert_eq!(v["results"]["reason"], "NoncommutingProjections");
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["pass"] == true));
}

#[test]
fn every_command_runs() {
    let cases = [
        (
            "spectral",
            r#"{"blocks":[3],"elements":{"a":[[1,0,0],[0,2,0],[0,0,3]]}}"#,
        ),
        (
            "carrier",
            r#"{"blocks":[2],"elements":{"a":[[1,1],[1,1]]}}"#,
        ),
        ("meet", NONCOMMUTING),
        ("join", NONCOMMUTING),
        (
            "commutant",
            r#"{"blocks":[3],"elements":{"a":[[1,0,0],[0,1,0],[0,0,2]]}}"#,
        ),
        ("center", r#"{"blocks":[1,2,3]}"#),
        (
            "exchange",
            r#"{"blocks":[3],"elements":{"p":[[1,0,0],[0,0,0],[0,0,0]],"q":[[0,0,0],[0,1,0],[0,0,1]]}}"#,
        ),
        (
            "existsk",
            r#"{"blocks":[2],"elements":{"p":[[1,0],[0,0]],"s":[[0,1],[1,0]]}}"#,
        ),
        (
            "witness",
            r#"{"blocks":[1,1],"elements":{"c":[[2,0],[0,1]],"d":[[1,0],[0,2]]}}"#,
        ),
        ("suite", r#"{"blocks":[2]}"#),
        (
            "qsublambda-check",
            r#"{"blocks":[3],"elements":{"a":[[2,1,0],[1,2,0],[0,0,0]]}}"#,
        ),
    ];
    for (command, text) in cases {
        let f = input(text);
        for format in ["text", "json"] {
            let (code, out, err) =
                invoke(&[command, "--format", format, "--trials", "25"], f.path());
            assert_eq!(code, EXIT_OK, "{command} {format}: {out}{err}");
            assert!(!out.is_empty());
        }
    }
}

#[test]
fn text_report_lists_checks() {
    let f = input(r#"{"blocks":[2],"elements":{"p":[[1,0],[0,0]],"s":[[0,1],[1,0]]}}"#);
    let (code, out, _) = invoke(&["existsk"], f.path());
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("PASS  d² = p − k"));
    assert!(out.contains("k_max_eigenvalue = 0.4375"));
}

#[test]
fn reports_are_byte_identical() {
    let f = input(r#"{"blocks":[3]}"#);
    let a = invoke(
        &["suite", "--format", "json", "--seed", "9", "--trials", "40"],
        f.path(),
    );
    let b = invoke(
        &["suite", "--format", "json", "--seed", "9", "--trials", "40"],
        f.path(),
    );
    assert_eq!(a.1, b.1);
}

#[test]
fn input_errors_exit_two() {
    let bad_json = input(r#"{"blocks":[2],"elements":{"#);
    let (code, _, err) = invoke(&["spectral"], bad_json.path());
    assert_eq!(code, EXIT_INPUT);
    assert!(err.starts_with("ParseError"));

    let off_block = input(r#"{"blocks":[1,1],"elements":{"x":[[1,1],[1,0]]}}"#);
    let (code, _, err) = invoke(&["spectral"], off_block.path());
    assert_eq!(code, EXIT_INPUT);
    assert!(err.starts_with("ValidationError"));

    let ok = input(r#"{"blocks":[2]}"#);
    let (code, _, err) = invoke(&["frobnicate"], ok.path());
    assert_eq!(code, EXIT_INPUT);
    assert!(err.starts_with("UnknownCommand"));

    let (code, _, err) = invoke(&["suite", "--trials", "0"], ok.path());
    assert_eq!(code, EXIT_INPUT);
    assert!(err.starts_with("ValidationError"));

    let (code, _, err) = invoke(&["suite", "--tol-eig=-1"], ok.path());
    assert_eq!(code, EXIT_INPUT);
    assert!(err.starts_with("InvalidTolerance"));

    let not_projection =
        input(r#"{"blocks":[2],"elements":{"p":[[2,0],[0,0]],"q":[[1,0],[0,0]]}}"#);
    let (code, _, err) = invoke(&["meet"], not_projection.path());
    assert_eq!(code, EXIT_INPUT);
    assert!(err.starts_with("NotProjection"), "{err}");

    let (code, _, _) = invoke(&["spectral"], Path::new("/nonexistent/input.json"));
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn failed_check_exits_one() {
    let spec = synlab::cli::parse_spec_str(r#"{"blocks":[2]}"#, &Tolerances::default()).unwrap();
    let config = RunConfig::new(Command::Center, "x.json");
    let mut report = dispatch(&config, &spec).unwrap();
    assert_eq!(report.exit_code(), EXIT_OK);
    report.checks.push(Check {
        name: "forced".into(),
        pass: false,
        residual: 1.0,
    });
    assert_eq!(report.exit_code(), EXIT_CHECK_FAILED);
    assert!(report.to_text().contains("FAIL  forced"));
}

#[test]
fn spec_round_trips_through_file() {
    let text = r#"{"blocks":[1,2],"elements":{"b":[[0.1,0,0],[0,1,2],[0,2,-1]],"a":[[3,0,0],[0,0,0],[0,0,0]]}}"#;
    let f = input(text);
    let spec = parse_spec(f.path(), &Tolerances::default()).unwrap();
    let again = input(&spec_to_json(&spec));
    let reparsed = parse_spec(again.path(), &Tolerances::default()).unwrap();
    assert_eq!(spec, reparsed);
    assert_eq!(spec.elements.keys().collect::<Vec<_>>(), ["b", "a"]);
}
