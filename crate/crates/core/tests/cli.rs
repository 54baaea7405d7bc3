use std::path::Path;
use std::process::{Command, Output};

use threestage::harness::parse_csv;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_threestage"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn run_prints_json_and_manifest() {
    let o = run(&[
        "run",
        "--noise",
        "none",
        "--xi",
        "0.3",
        "--alice-angle",
        "1.0",
        "--bob-angle",
        "2.0",
        "--bit",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(stderr(&o).contains("\"version\""));
}

#[test]
fn run_validation_exit_code() {
    let o = run(&["run", "--noise", "ad", "--param", "2.0", "--xi", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--param"));
    assert!(stdout(&o).is_empty());
}

#[test]
fn sweep_files_have_expected_rows() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    let o = run(&[
        "sweep",
        "--noise",
        "pd",
        "--grid",
        "0:1:101",
        "--xi-avg",
        "--mode",
        "closed_form",
        "--out",
        f.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = parse_csv::<f64>(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(rows.len(), 101);
    let last = rows.last().unwrap();
    assert_eq!(last.param, 1.0);
    assert_eq!(last.closed_form, Some(0.5625));

    let g = dir.path().join("g.csv");
    let o = run(&[
        "sweep",
        "--noise",
        "cd",
        "--grid",
        "0:6.283185307179586:101",
        "--xi-grid",
        "0,0.7853981633974483",
        "--mode",
        "both",
        "--resolution",
        "32",
        "--out",
        g.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = parse_csv::<f64>(&std::fs::read_to_string(&g).unwrap()).unwrap();
    assert_eq!(rows.len(), 202);
    assert!(rows.iter().all(|r| r.deviation.unwrap() < 1e-9));
}

#[test]
fn sweep_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.json");
    let o = run(&[
        "sweep",
        "--noise",
        "cr",
        "--grid",
        "0,0.5",
        "--xi-grid",
        "computational,diagonal",
        "--format",
        "json",
        "--out",
        f.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (rows, manifest) =
        threestage::harness::parse_json::<f64>(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(rows.len(), 4);
    assert_eq!(manifest.resolutions.rotation, 256);
}

#[test]
fn sweep_io_failure_exits_1() {
    let o = run(&[
        "sweep",
        "--noise",
        "pd",
        "--grid",
        "0,1",
        "--xi-avg",
        "--out",
        "/nonexistent/dir/out.csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/nonexistent/dir/out.csv"));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(
        run(&["verify", "--kinds", "cr", "--tolerance", "1e-12"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(run(&["verify", "--kinds", "xx"]).status.code(), Some(2));
    // machine-epsilon deviations exceed a zero tolerance
    let o = run(&[
        "verify",
        "--kinds",
        "ad",
        "--tolerance",
        "0",
        "--resolution",
        "16",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn commutators_subcommand() {
    let o = run(&[
        "commutators",
        "--eta",
        "0.75",
        "--theta",
        "1.5707963267948966",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let e0 = &v["commutators"][0]["computed"];
    // σx pattern with coefficient 1 − √0.25 = ½ in magnitude
    assert!((e0[0][1][0].as_f64().unwrap().abs() - 0.5).abs() < 1e-12);
    assert!((e0[1][0][0].as_f64().unwrap().abs() - 0.5).abs() < 1e-12);
    assert_eq!(
        run(&["commutators", "--eta", "2", "--theta", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn message_with_full_damping() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let bits: String = (0..10_000)
        .map(|_| if rng.gen::<bool>() { '1' } else { '0' })
        .collect();
    let o = run(&[
        "message",
        "--noise",
        "ad",
        "--param",
        "1",
        "--xi",
        "0.4",
        "--alice-angle",
        "0.3",
        "--bob-angle",
        "1.2",
        "--bits",
        &bits,
        "--seed",
        "11",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let qber = v["qber"].as_f64().unwrap();
    assert!((qber - 0.5).abs() <= 0.015, "qber {qber}");
    let again = run(&[
        "message",
        "--noise",
        "ad",
        "--param",
        "1",
        "--xi",
        "0.4",
        "--alice-angle",
        "0.3",
        "--bob-angle",
        "1.2",
        "--bits",
        &bits,
        "--seed",
        "11",
    ]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn no_color_is_respected() {
    let o = bin()
        .env("NO_COLOR", "1")
        .args(["run", "--bogus"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(!stderr(&o).contains('\u{1b}'));
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    for sub in ["run", "sweep", "verify", "commutators", "message"] {
        assert!(stdout(&o).contains(sub));
    }
    assert!(Path::new(env!("CARGO_BIN_EXE_threestage")).exists());
}
