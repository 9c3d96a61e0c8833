//! End-to-end tests of the `skewcyl` binary: exit codes, artifact layout,
//! round-tripping, and determinism across worker counts.

use std::path::Path;
use std::process::{Command, Output};
use std::str::FromStr;

use serde_json::Value;

fn skewcyl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewcyl"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code (killed by signal?)")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout should be JSON")
}

#[test]
fn degenerate_fiber_report_matches_the_documented_shape() {
    let out = skewcyl(&["set", "fiber", "--z", "1/3", "--A", "10"]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["center"], serde_json::json!([0.0, 0.0]));
    assert_eq!(v["radius"], 0.0);
    assert_eq!(v["degenerate"], true);
}

#[test]
fn certification_exit_code_follows_the_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let ok_path = dir.path().join("ok.json");
    let out = skewcyl(&[
        "levi", "certify", "--A", "10", "--grid", "12x12", "--angles", "6",
        "--margin", "0.5", "--out", ok_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&ok_path).unwrap()).unwrap();
    assert_eq!(report["certified"], true);

    // a failed certification still writes its artifact, then signals via code 2
    let bad_path = dir.path().join("bad.json");
    let out = skewcyl(&[
        "levi", "certify", "--A", "-20", "--grid", "8x8", "--angles", "4",
        "--margin", "0.5", "--out", bad_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&bad_path).unwrap()).unwrap();
    assert_eq!(report["certified"], false);
}

#[test]
fn verdicts_map_to_exit_codes() {
    let out = skewcyl(&["rigidity", "certificate", "--family", "moebius-in-log", "--N", "25"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["verdict"], "contradiction-found");

    let out = skewcyl(&["rigidity", "certificate", "--family", "branch-adapted", "--N", "25"]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout_json(&out)["verdict"], "schwarzian-nonvanishing-on-E+");

    let out = skewcyl(&["rigidity", "certificate", "--family", "conj-perturbed", "--N", "25"]);
    assert_eq!(code(&out), 2);
    assert_eq!(stdout_json(&out)["verdict"], "inconclusive");
}

#[test]
fn malformed_input_exits_with_code_3() {
    for args in [
        &["set", "fiber", "--z", "zebra"][..],
        &["set", "grid", "--grid", "64y64"],
        &["rigidity", "certificate", "--family", "no-such-family"],
        &["frobnicate"],
        &["levi", "certify", "--grid", "0x16"],
        &["levi", "find-a", "--lo", "5", "--hi", "-5", "--grid", "4x4", "--angles", "2"],
    ] {
        let out = skewcyl(args);
        assert_eq!(code(&out), 3, "args {args:?} should be rejected");
        assert!(!out.stderr.is_empty(), "args {args:?} should explain the failure");
    }
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&skewcyl(&["--help"])), 0);
    assert_eq!(code(&skewcyl(&["--version"])), 0);
    assert_eq!(code(&skewcyl(&["levi", "certify", "--help"])), 0);
}

#[test]
fn outputs_are_byte_identical_across_worker_counts() {
    let args = |n: &'static str| {
        [
            "levi", "certify", "--A", "10", "--grid", "12x12", "--angles", "6",
            "--margin", "0.5", "--workers", n,
        ]
    };
    let one = skewcyl(&args("1"));
    let four = skewcyl(&args("4"));
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);

    let cert = |n: &'static str| {
        skewcyl(&["rigidity", "certificate", "--family", "moebius-in-log", "--workers", n])
    };
    assert_eq!(cert("1").stdout, cert("3").stdout);
}

#[test]
fn monodromy_witnesses_separate_the_mirror_fibers() {
    let minus = stdout_json(&skewcyl(&["fiber", "monodromy", "--z", "-1/3", "--A", "10"]));
    assert_eq!(minus["branch_point"], true);
    assert_eq!(minus["contractible_in_fiber"], true);
    assert_eq!(minus["monodromy"]["winding"], 1);

    let plus = stdout_json(&skewcyl(&["fiber", "monodromy", "--z", "1/3", "--A", "10"]));
    assert_eq!(plus["branch_point"], false);
    assert_eq!(plus["contractible_in_fiber"], false);

    // an explicit polyline avoiding the puncture stays in the trivial class
    let away = stdout_json(&skewcyl(&[
        "fiber", "monodromy", "--z", "1/3", "--path",
        "3,0;4,1;5,0;4,-1",
    ]));
    assert_eq!(away["monodromy"]["winding"], 0);
}

#[test]
fn emitted_reports_parse_back_into_their_types() {
    use skewcyl::brset::{BasePoint, DiscFibration};
    use skewcyl::levi::{GridSpec, LeviForm, LeviReport};
    use skewcyl::rigidity::{run_certificate, CertificateOptions, CertificateReport, MoebiusInLog};

    let out = skewcyl(&[
        "levi", "certify", "--A", "10", "--grid", "10x10", "--angles", "4", "--margin", "0.5",
    ]);
    let parsed: LeviReport = serde_json::from_slice(&out.stdout).unwrap();
    let spec = GridSpec { nx: 10, ny: 10, theta_count: 4, epsilon: 1.0 / 48.0 };
    let computed = LeviForm::with_a(10.0).certify(&spec, 0.5).unwrap();
    assert_eq!(parsed, computed);

    let out = skewcyl(&["set", "fiber", "--z", "0.2,0.1", "--A", "10"]);
    let parsed: skewcyl::brset::FiberDescriptor = serde_json::from_slice(&out.stdout).unwrap();
    let computed = DiscFibration::with_a(10.0)
        .fiber(BasePoint::from_str("0.2,0.1").unwrap())
        .unwrap();
    assert_eq!(parsed, computed);

    let out = skewcyl(&["rigidity", "certificate", "--family", "moebius-in-log"]);
    let parsed: CertificateReport = serde_json::from_slice(&out.stdout).unwrap();
    let computed = run_certificate(&MoebiusInLog, &CertificateOptions::default()).unwrap();
    assert_eq!(parsed, computed);
}

#[test]
fn relative_outputs_land_in_the_configured_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_skewcyl"))
        .args(["set", "fiber", "--z", "1/3", "--out", "pin.json"])
        .env("SKEWCYL_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("pin.json").is_file());

    // absolute paths win over the environment
    let abs = dir.path().join("abs.json");
    let out = Command::new(env!("CARGO_BIN_EXE_skewcyl"))
        .args(["set", "fiber", "--z", "1/3", "--out", abs.to_str().unwrap()])
        .env("SKEWCYL_OUT_DIR", "/definitely/not/here")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(abs.is_file());
}

fn first_line(bytes: &[u8]) -> &str {
    std::str::from_utf8(bytes).unwrap().lines().next().unwrap()
}

#[test]
fn csv_headers_are_frozen() {
    let out = skewcyl(&["set", "grid", "--grid", "8x8", "--A", "10"]);
    assert_eq!(code(&out), 0);
    assert_eq!(first_line(&out.stdout), "z_re,z_im,center_re,center_im,radius,degenerate");
    let rows: Vec<&str> = std::str::from_utf8(&out.stdout).unwrap().lines().skip(1).collect();
    assert_eq!(rows.len(), 52, "8x8 cell centers whose centers stay in the open disc");
    assert!(rows.iter().all(|r| r.split(',').count() == 6));

    let out = skewcyl(&["potential", "grid", "--grid", "8x8", "--N", "20"]);
    assert_eq!(first_line(&out.stdout), "z_re,z_im,u,tail_bound");

    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("grid.csv");
    let out = skewcyl(&[
        "levi", "certify", "--A", "10", "--grid", "6x6", "--angles", "4",
        "--dump-grid", dump.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(&dump).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "z_re,z_im,theta,H");
}

#[test]
fn rational_literals_are_accepted_everywhere() {
    let out = skewcyl(&[
        "levi", "certify", "--A", "10", "--grid", "6x6", "--angles", "4", "--eps", "1/48",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let eps = v["grid"]["epsilon"].as_f64().unwrap();
    assert_eq!(eps, 1.0 / 48.0);

    let out = skewcyl(&["potential", "eval", "--z", "-3/7"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout_json(&out)["z_re"].as_f64().unwrap(), -3.0 / 7.0);
}

#[test]
fn schwarzian_eval_reports_closed_and_fd_values() {
    let out = skewcyl(&[
        "schwarzian", "eval", "--family", "branch-adapted", "--z", "1/3", "--fd-step", "0.04",
    ]);
    assert_eq!(code(&out), 0);
    let v = stdout_json(&out);
    let s = v["s_re"].as_f64().unwrap();
    let fd = v["s_fd_re"].as_f64().unwrap();
    let err = v["fd_error"].as_f64().unwrap();
    assert!(s > 0.0 && (s - fd).abs() < 1e-7 && err > 0.0);

    // the Moebius family is exactly Moebius: S = 0 on the nose
    let v = stdout_json(&skewcyl(&["schwarzian", "eval", "--z", "1/3"]));
    assert_eq!(v["family"], "moebius-in-log");
    assert!(v["s_re"].as_f64().unwrap().abs() < 1e-15);
    assert!(v.get("s_fd_re").is_none(), "no FD block unless a step is requested");
}

#[test]
fn artifacts_do_not_depend_on_where_they_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pin.json");
    let to_file = skewcyl(&["set", "fiber", "--z", "2/5", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&to_file), 0);
    let to_stdout = skewcyl(&["set", "fiber", "--z", "2/5"]);
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
    assert!(Path::new(&path).is_file());
}
