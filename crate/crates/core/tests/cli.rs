//! End-to-end tests of the command-line interface: exit-code contract and
//! file artifacts.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use nsbox::constructions::{pr_box, pr_pseudostate, Wiring};
use nsbox::correlations::{Box, Scenario};

fn nsbox(args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nsbox"));
    cmd.args(args).env("NO_COLOR", "1");
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) {
    std::fs::write(path, serde_json::to_string_pretty(value).unwrap()).unwrap();
}

fn signalling_box() -> Box {
    let s = Scenario::chsh();
    let mut p = vec![0.0; s.len()];
    // Alice's outcome equals Bob's input.
    for x in 0..2 {
        for y in 0..2 {
            p[s.index(x, y, y, 0)] = 1.0;
        }
    }
    Box::new(s, p).unwrap()
}

#[test]
fn check_accepts_pr_box() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pr.json");
    write_json(&f, &pr_box(0.0).unwrap());
    let out = nsbox(&["check", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("no-signalling"), "{text}");
    assert!(text.contains("yes"), "{text}");
}

#[test]
fn check_rejects_signalling_box_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("sig.json");
    write_json(&f, &signalling_box());
    let out = nsbox(&["check", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(&f, "{not json").unwrap();
    let out = nsbox(&["check", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let missing = dir.path().join("does_not_exist.json");
    let out = nsbox(&["check", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn robustness_local_on_pr_box() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pr.json");
    let cert = dir.path().join("cert.json");
    write_json(&f, &pr_box(0.0).unwrap());
    let out = nsbox(&[
        "robustness",
        f.to_str().unwrap(),
        "--kind",
        "local",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("local robustness t = 0.5"), "{text}");
    assert!(text.contains("certificate verified"), "{text}");
    let cert_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert!((cert_json["local"]["value"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert!(cert_json["local"]["dual"].is_object());
}

#[test]
fn robustness_rejects_signalling_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("sig.json");
    write_json(&f, &signalling_box());
    let out = nsbox(&["robustness", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn epr2_on_pr_box() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pr.json");
    write_json(&f, &pr_box(0.0).unwrap());
    let out = nsbox(&["epr2", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("q_NL^min = 1"), "{}", stdout(&out));
}

#[test]
fn negativity_of_pr_pseudostate() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("o_pr.json");
    let closest = dir.path().join("sigma.json");
    write_json(&f, &pr_pseudostate(0.0).unwrap());
    let out = nsbox(&[
        "negativity",
        f.to_str().unwrap(),
        "--closest-state",
        closest.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("negativity = 0.2071067811865474"), "{text}");
    let sigma: nsbox::operators::PseudoState =
        serde_json::from_str(&std::fs::read_to_string(&closest).unwrap()).unwrap();
    assert!(nsbox::operators::negativity(&sigma).unwrap() < 1e-10);
}

#[test]
fn negativity_rejects_wrong_trace_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("op.json");
    std::fs::write(
        &f,
        r#"{"dim":2,"bipartition":[1,2],"re":[[1.0,0.0],[0.0,1.0]],"im":[[0.0,0.0],[0.0,0.0]]}"#,
    )
    .unwrap();
    let out = nsbox(&["negativity", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn realize_pr_box_reports_affine_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pr.json");
    let real = dir.path().join("realization.json");
    write_json(&f, &pr_box(0.0).unwrap());
    let out = nsbox(&[
        "realize",
        f.to_str().unwrap(),
        "--out",
        real.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.contains("(1.5, -0.5)"), "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&real).unwrap()).unwrap();
    assert!((json["t"].as_f64().unwrap() - 0.5).abs() < 1e-8);
}

#[test]
fn certify_writes_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pr.json");
    let cert = dir.path().join("cert.json");
    write_json(&f, &pr_box(0.1).unwrap());
    let out = nsbox(&[
        "certify",
        f.to_str().unwrap(),
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    let floor = json["trace_norm_floor"].as_f64().unwrap();
    assert!((floor - std::f64::consts::SQRT_2 * 0.8).abs() < 1e-9);
    assert_eq!(json["box_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn wire_identity_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let box_file = dir.path().join("pr.json");
    let wiring_file = dir.path().join("wiring.json");
    let out_file = dir.path().join("wired.json");
    let p = pr_box(0.1).unwrap();
    write_json(&box_file, &p);
    write_json(&wiring_file, &Wiring::identity(p.scenario()).unwrap());
    let out = nsbox(&[
        "wire",
        box_file.to_str().unwrap(),
        wiring_file.to_str().unwrap(),
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("monotone"), "{}", stdout(&out));
    let wired: Box = serde_json::from_str(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    for (a, b) in wired.entries().iter().zip(p.entries()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn pr_sweep_rejects_bad_grids() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("sweep.csv");
    let out = nsbox(&["pr-sweep", "--eps-grid", "0.6", "--out", out_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1)); // out of range
    let out = nsbox(&["pr-sweep", "--eps-grid", "zzz", "--out", out_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2)); // unparseable
}

#[test]
fn sweep_is_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for f in [&a, &b] {
        let out = nsbox(&["pr-sweep", "--eps-grid", "0,0.1,0.25", "--out", f.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn tol_flag_loosens_checks() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("near.json");
    // A box with a tiny signalling defect: accepted at loose tolerance only.
    let mut p = pr_box(0.2).unwrap().entries().to_vec();
    let s = Scenario::chsh();
    p[s.index(0, 0, 0, 0)] += 4e-6;
    p[s.index(0, 0, 0, 1)] -= 4e-6;
    write_json(&f, &Box::new_renormalized(s, p, 1e-3).unwrap());
    let strict = nsbox(&["check", f.to_str().unwrap()]);
    assert_eq!(strict.status.code(), Some(1));
    let loose = nsbox(&["check", f.to_str().unwrap(), "--tol", "1e-4"]);
    assert_eq!(loose.status.code(), Some(0));
}
