mod support;

use std::process::Command;

use rhtk::cli::{parse_presentation, print_presentation, run_args};
use support::{corpus, golden, golden_args, GOLDEN_CASES};

fn rhtk(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_rhtk"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path(name: &str) -> String {
    corpus(name).display().to_string()
}

fn scratch(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("rhtk-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.display().to_string()
}

#[test]
fn golden_reports_match() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for (name, args) in GOLDEN_CASES {
        let (code, out, err) = run_args(golden_args(args));
        assert_eq!(code, 0, "{name}: {err}");
        let file = golden(name);
        if update {
            std::fs::write(&file, &out).unwrap();
            continue;
        }
        let expected = std::fs::read_to_string(&file)
            .unwrap_or_else(|_| panic!("missing golden file {}", file.display()));
        assert_eq!(out, expected, "{name} drifted from its golden file");
    }
}

#[test]
fn binary_matches_library_output() {
    let (code, out, _) = rhtk(&["--json", "hochschild", &path("s3.cdga"), "--max-degree", "8"]);
    assert_eq!(code, 0);
    assert_eq!(out, std::fs::read_to_string(golden("hochschild_s3")).unwrap());
}

#[test]
fn text_reports() {
    let (code, out, _) = rhtk(&["minimal-model", &path("s2.cdga"), "--up-to", "8"]);
    assert_eq!(code, 0);
    assert!(out.contains("generator counts {2:1, 3:1}"));
    let (code, out, _) = rhtk(&["apl-verify", "--n", "3"]);
    assert_eq!(code, 0);
    assert!(out.contains("all identities pass"));
    let (code, out, _) = rhtk(&["hochschild", &path("s3.cdga"), "--max-degree", "8", "--max-length", "4"]);
    assert_eq!(code, 0);
    assert!(out.contains("cohomological degree = sum of factor degrees - tensor length"));
    assert_eq!(out.matches("stable").count(), 9);
}

#[test]
fn input_errors_exit_with_2() {
    let missing = rhtk(&["cohomology", "/nonexistent/file.cdga"]);
    assert_eq!(missing.0, 2);
    assert!(missing.2.contains("cannot read"));

    let syntax = scratch("syntax.cdga", "generator x deg 2\nd x = y +\n");
    let (code, _, err) = rhtk(&["cohomology", &syntax]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2"), "{err}");

    let not_closed = scratch("dsq.cdga", "generator x deg 2\ngenerator y deg 3\ngenerator z deg 4\nd y = x^2\nd z = x*y\n");
    let (code, _, err) = rhtk(&["cohomology", &not_closed]);
    assert_eq!(code, 2);
    assert!(err.contains('z'), "{err}");

    let short = scratch("short.cdga", "generator x deg 2\nrelation x^2\ntruncate 4\n");
    let (code, _, err) = rhtk(&["minimal-model", &short, "--up-to", "8"]);
    assert_eq!(code, 2);
    assert!(err.contains("degree 9 is required"), "{err}");
    assert_eq!(rhtk(&["cohomology", &short, "--up-to", "4"]).0, 2);

    let jets = scratch("bad.jets", "1 2\n0 0 0\n");
    assert_eq!(rhtk(&["jets", &jets]).0, 2);
    let sset = scratch("bad.sset", "0 a\n1 e a b\n");
    assert_eq!(rhtk(&["apl-sections", &sset]).0, 2);

    assert_eq!(rhtk(&["stokes", "--n", "0"]).0, 2);
    assert_eq!(rhtk(&["quadrant-poincare", "--quadrant", "+x"]).0, 2);
    assert_eq!(rhtk(&["hochschild", &path("s3.cdga"), "--min-degree", "4", "--max-degree", "2"]).0, 2);
    assert_eq!(rhtk(&["no-such-command"]).0, 2);
    assert_eq!(rhtk(&["minimal-model"]).0, 2);
}

#[test]
fn unsupported_inputs_exit_with_3() {
    let (code, _, err) = rhtk(&["homotopy-ranks", &path("circle_model.cdga"), "--up-to", "4"]);
    assert_eq!(code, 3);
    assert!(err.contains("simply connected"), "{err}");
    assert_eq!(rhtk(&["quadrant-poincare", "--quadrant", "++@1,1"]).0, 3);
    assert_eq!(rhtk(&["quadrant-poincare", "--quadrant", "+0|0+"]).0, 3);
    assert_eq!(rhtk(&["loop-space", &path("circle_model.cdga"), "--max-degree", "2"]).0, 3);
}

#[test]
fn corpus_round_trips() {
    for entry in std::fs::read_dir(corpus("")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().and_then(|e| e.to_str()) != Some("cdga") {
            continue;
        }
        let parsed = parse_presentation(&std::fs::read_to_string(&p).unwrap()).unwrap();
        let again = parse_presentation(&print_presentation(&parsed)).unwrap();
        assert_eq!(parsed, again, "{}", p.display());
    }
}
