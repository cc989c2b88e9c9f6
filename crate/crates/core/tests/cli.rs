//! The `cobord` binary: exit codes, deterministic output and JSON that reads
//! back into the library types.

use std::process::{Command, Output};

use cobord::bivariant::{run_check, Budget, Check, CheckReport, SkippedPullback};
use cobord::chern::{ambient_space, ChernCalculus, ChernVector, ChernVectorJson};
use cobord::fgl::{FglJson, FormalGroupLaw};
use cobord::spaces::{grr_check, HrrReport};

fn cobord(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cobord"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

#[test]
fn exit_codes() {
    assert_eq!(cobord(&["hrr", "--n", "2", "--d", "-1"]).status.code(), Some(0));
    assert_eq!(cobord(&["--help"]).status.code(), Some(0));
    assert_eq!(cobord(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(cobord(&["fgl", "universal", "--degree", "99"]).status.code(), Some(2));
    assert_eq!(cobord(&["fgl", "twist", "--tau", "2,1"]).status.code(), Some(2));
    let mutant = cobord(&[
        "bivariant", "check", "--axiom", "a12", "--engine", "skipped-pullback", "--trials", "20",
    ]);
    assert_eq!(mutant.status.code(), Some(1));
    assert!(stdout(&mutant).contains("a12: FAIL"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs: [&[&str]; 4] = [
        &["fgl", "twist", "--law", "additive", "--degree", "5", "--json"],
        &["chern", "twist", "--roots", "u,v", "--line", "w", "--nilpotency", "4"],
        &["bivariant", "check", "--axiom", "a12", "--engine", "skipped-pullback", "--json"],
        &["bivariant", "check", "--axiom", "orientation", "--trials", "300", "--seed", "7"],
    ];
    for args in runs {
        let (a, b) = (cobord(args), cobord(args));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn law_json_reads_back() {
    let out = cobord(&["fgl", "universal", "--degree", "4", "--json"]);
    assert!(out.status.success());
    let parsed: FglJson = serde_json::from_str(&stdout(&out)).unwrap();
    let law = FormalGroupLaw::universal(4).unwrap();
    let space = law.series().space();
    assert_eq!(parsed.cap, law.cap());
    assert_eq!(space.from_json(&parsed.law).unwrap(), *law.series());
    assert_eq!(space.from_json(&parsed.difference).unwrap(), *law.difference());
}

#[test]
fn hrr_json_reads_back() {
    for (n, d) in [(1, 3), (2, -4), (3, 0)] {
        let (ns, ds) = (n.to_string(), d.to_string());
        let out = cobord(&["hrr", "--n", &ns, "--d", &ds, "--json"]);
        assert!(out.status.success());
        let parsed: HrrReport = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(parsed, grr_check(n, d).unwrap());
    }
}

#[test]
fn twisted_classes_read_back() {
    let out = cobord(&["chern", "twist", "--law", "additive", "--roots", "u,v", "--line", "w", "--nilpotency", "3", "--json"]);
    assert!(out.status.success());
    let parsed: ChernVectorJson = serde_json::from_str(&stdout(&out)).unwrap();
    let law = FormalGroupLaw::additive(&cobord::exactalg::GradedRing::integers(0), 4).unwrap();
    let calc = ChernCalculus::new(&law, law.cap()).unwrap();
    let sp = ambient_space(law.ring(), &["u", "v", "w"], 3).unwrap();
    let e = ChernVector::from_roots(&sp, &[sp.var("u").unwrap(), sp.var("v").unwrap()]).unwrap();
    let expected = calc.twist(&e, &sp.var("w").unwrap()).unwrap();
    assert_eq!(ChernVector::from_json(&sp, &parsed).unwrap(), expected);
}

#[test]
fn check_reports_read_back() {
    let out = cobord(&[
        "bivariant", "check", "--axiom", "a12", "--engine", "skipped-pullback", "--trials", "50",
        "--exhaustive-size", "2", "--seed", "9", "--json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let parsed: Vec<CheckReport> = serde_json::from_str(&stdout(&out)).unwrap();
    let budget = Budget {
        exhaustive_size: 2,
        trials: 50,
        seed: 9,
        ..Budget::default()
    };
    assert_eq!(parsed, vec![run_check(Check::A12, &SkippedPullback, &budget)]);
}
