use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use effsess_core::corpus::corpus;
use tempfile::TempDir;

fn effsess(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_effsess"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(TempDir::new().expect("temp dir"))
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        fs::write(&p, text).expect("write");
        p
    }
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

const INCREMENT: &str = "store nat init 0\nlet x = get in put (suc x)\n";

#[test]
fn check_reports_type_and_effect() {
    let d = Dir::new();
    let f = d.file("inc.eff", INCREMENT);
    let o = effsess(&["check", s(&f)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "unit, [G nat, P nat]");
    let f = d.file("c.eff", &format!("-- increment\n{INCREMENT}"));
    assert_eq!(stdout(&effsess(&["check", s(&f)])).trim(), "unit, [G nat, P nat]");
}

#[test]
fn check_rejects_impure_argument_and_unbound() {
    let d = Dir::new();
    let o = effsess(&["check", s(&d.file("a.eff", "suc get"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("must be pure"));
    let o = effsess(&["check", s(&d.file("b.eff", "put y"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("unbound variable `y`"));
}

#[test]
fn parse_errors_and_bad_flags_exit_two() {
    let d = Dir::new();
    let o = effsess(&["check", s(&d.file("a.eff", "let x ="))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("syntax error at"));
    assert_eq!(effsess(&["run", "--no-such-flag", "x"]).status.code(), Some(2));
    assert_eq!(effsess(&["check", "/nonexistent/file"]).status.code(), Some(2));
}

#[test]
fn translate_then_pi_check() {
    let d = Dir::new();
    let f = d.file("inc.eff", INCREMENT);
    let o = effsess(&["translate", s(&f)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("@delta eff : +{get: ?[nat]. +{put: ![nat]. end}}"), "{text}");
    assert!(text.contains("@delta r : ![unit]. end"));
    let pi = d.file("inc.pi", &text);
    let o = effsess(&["pi-check", s(&pi)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "OK");
}

#[test]
fn pure_program_translates_with_end() {
    let d = Dir::new();
    let o = effsess(&["translate", s(&d.file("p.eff", "let x = zero in suc x"))]);
    assert!(stdout(&o).contains("@delta eff : end"));
}

#[test]
fn optimize_emits_parallel_form() {
    let d = Dir::new();
    let f = d.file("c.eff", "let x = zero in let y = get in put y");
    let plain = stdout(&effsess(&["translate", s(&f)]));
    let opt = stdout(&effsess(&["translate", "--optimize", s(&f)]));
    assert_ne!(plain, opt);
    assert!(opt.contains("new q, s, ea. (q!<0>.0 | "), "{opt}");
    let o = effsess(&["pi-check", s(&d.file("c.pi", &opt))]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn pi_check_flags_linearity() {
    let d = Dir::new();
    let f = d.file("bad.pi", "@delta eff : end\n(~ei![eff] | ~eo![eff])\n");
    let o = effsess(&["pi-check", s(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("eff"));
}

#[test]
fn run_gives_result_and_store() {
    let d = Dir::new();
    let f = d.file("inc.eff", INCREMENT);
    let o = effsess(&["run", "--all-schedules", s(&f)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("result [unit] store 1"), "{}", stdout(&o));
    let o = effsess(&["--json", "run", s(&f)]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["outcomes"][0]["store"], "1");
    assert_eq!(v["outcomes"][0]["result_values"][0], "unit");
}

#[test]
fn run_out_of_fuel() {
    let d = Dir::new();
    let f = d.file("loop.pi", "def X(; c: end) = X<; c> in X<; c>\n");
    let o = effsess(&["run", "--fuel", "5", s(&f)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("fuel exhausted"));
}

#[test]
fn equiv_verdicts() {
    let d = Dir::new();
    let a = d.file("a.eff", "let x = get in x");
    let b = d.file("b.eff", "get");
    let o = effsess(&["equiv", s(&a), s(&b)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "BISIMILAR");

    let c = d.file("c.eff", "put zero");
    let e = d.file("e.eff", "put (suc zero)");
    let o = effsess(&["equiv", "--values", "0,1", s(&c), s(&e)]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.starts_with("NOT BISIMILAR"));
    assert!(text.contains("eff<+put, eff!<0>"), "{text}");
}

#[test]
fn json_schema_is_pinned() {
    let d = Dir::new();
    let c = d.file("c.eff", "put zero");
    let e = d.file("e.eff", "put (suc zero)");
    let o = effsess(&["--json", "equiv", s(&c), s(&e)]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let want = serde_json::json!({
        "schema": 1,
        "command": "equiv",
        "bisimilar": false,
        "states": [7, 7],
        "trace": ["eff<+put", "eff!<0>"],
        "last_by": "left",
    });
    assert_eq!(v, want);

    let f = d.file("inc.eff", INCREMENT);
    let o = effsess(&["--json", "translate", s(&f)]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["type"], "unit");
    assert_eq!(v["effect"], "[G nat, P nat]");
    assert_eq!(v["delta"]["eff"], "+{get: ?[nat]. +{put: ![nat]. end}}");
    assert_eq!(v["delta"]["r"], "![unit]. end");
}

#[test]
fn output_is_deterministic() {
    let d = Dir::new();
    let f = d.file("inc.eff", INCREMENT);
    for args in [
        vec!["translate", s(&f)],
        vec!["run", "--all-schedules", s(&f)],
        vec!["--json", "run", "--seed", "3", s(&f)],
    ] {
        assert_eq!(effsess(&args).stdout, effsess(&args).stdout);
    }
}

#[test]
fn corpus_pipeline() {
    let d = Dir::new();
    for (i, prog) in corpus(31, 25, 5).iter().enumerate() {
        let src = d.file(&format!("p{i}.eff"), &prog.to_string());
        assert_eq!(effsess(&["check", s(&src)]).status.code(), Some(0), "{prog}");
        let out = effsess(&["translate", s(&src)]);
        let pi = d.file(&format!("p{i}.pi"), &stdout(&out));
        let o = effsess(&["pi-check", s(&pi)]);
        assert_eq!(o.status.code(), Some(0), "{prog}: {}", stdout(&o));
    }
}
