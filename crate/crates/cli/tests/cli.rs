use std::fs;
use std::path::PathBuf;
use std::process::Command;

use fou_sldp::mle::tail_mle;
use fou_sldp::{Error, ModelParams};
use fou_sldp_cli::{run, CliError, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fou-sldp").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], name: &str) -> usize {
    table[0].iter().position(|h| h == name).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fou-sldp-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn rate_row_for_easy_energy() {
    let (code, out, _) = call(&[
        "rate", "--target", "energy", "--theta", "-1", "--hurst", "0.75", "--c", "1",
    ]);
    assert_eq!(code, EXIT_OK);
    let t = rows(&out);
    assert_eq!(t[0], ["target", "theta", "hurst", "c", "rate", "branch"]);
    let rate: f64 = t[1][column(&t, "rate")].parse().unwrap();
    assert!((rate - 0.125).abs() < 1e-15);
    assert_eq!(t[1][column(&t, "branch")], "EasyBranch");
}

#[test]
fn rate_grid_with_negative_thresholds() {
    let (code, out, _) = call(&[
        "rate",
        "--target",
        "mle",
        "--theta",
        "-1",
        "--hurst",
        "0.75",
        "--c",
        "-2,-0.5,0.5",
    ]);
    assert_eq!(code, EXIT_OK);
    let t = rows(&out);
    assert_eq!(t.len(), 4);
    let b = column(&t, "branch");
    assert_eq!(
        [&t[1][b], &t[2][b], &t[3][b]],
        ["LeftTail", "EasyBranch", "HardBranch"]
    );
}

#[test]
fn zero_case_mle_tail() {
    let (code, out, _) = call(&[
        "tail", "--target", "mle", "--theta", "-1", "--hurst", "0.75", "--c", "0", "--T", "30",
    ]);
    assert_eq!(code, EXIT_OK);
    let t = rows(&out);
    assert_eq!(t[1][column(&t, "branch")], "ZeroCase");
    let value: f64 = t[1][column(&t, "value")].parse().unwrap();
    let p = ModelParams::new(-1.0, 0.75).unwrap();
    let want = tail_mle(&p, 0.0, 30.0).unwrap().value();
    assert_eq!(value, want);
}

#[test]
fn numbers_are_full_precision_scientific() {
    let (_, out, _) = call(&[
        "tail", "--theta", "-1", "--hurst", "0.75", "--c", "0.7", "--T", "40", "--order1",
    ]);
    let t = rows(&out);
    let v = &t[1][column(&t, "value")];
    assert!(v.contains('e'));
    let mantissa = v.split('e').next().unwrap();
    assert_eq!(mantissa.split('.').nth(1).unwrap().len(), 17);
}

#[test]
fn config_file_with_flag_override() {
    let dir = scratch("config");
    let path = dir.join("run.toml");
    fs::write(
        &path,
        "theta = -1.0\nhurst = 0.75\nc = [1.0, 2.0]\ntarget = \"energy\"\n",
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let (code, out, err) = call(&["rate", "--config", cfg]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(rows(&out).len(), 3);
    let (code, out, _) = call(&["rate", "--config", cfg, "--c", "1", "--target", "mle"]);
    assert_eq!(code, EXIT_OK);
    let t = rows(&out);
    assert_eq!(t.len(), 2);
    assert_eq!(t[1][0], "mle");
    fs::write(&path, "theta = -1.0\nbogus = 3\n").unwrap();
    assert_eq!(
        call(&["rate", "--config", cfg, "--hurst", "0.75", "--c", "1"]).0,
        EXIT_VALIDATION
    );
}

#[test]
fn exit_codes() {
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["rate", "--no-such-flag"]).0, EXIT_USAGE);
    assert_eq!(call(&["--help"]).0, EXIT_OK);
    let (code, _, err) = call(&["rate", "--theta", "1", "--hurst", "0.75", "--c", "1"]);
    assert_eq!(code, EXIT_VALIDATION);
    assert!(err.contains("theta"));
    assert_eq!(
        call(&["rate", "--theta", "-1", "--hurst", "1.2", "--c", "1"]).0,
        EXIT_VALIDATION
    );
    assert_eq!(
        call(&["tail", "--theta", "-1", "--hurst", "0.75", "--c", "1"]).0,
        EXIT_VALIDATION
    );
    assert_eq!(
        call(&[
            "mc",
            "--theta",
            "-1",
            "--hurst",
            "0.75",
            "--c",
            "1",
            "--T",
            "5",
            "--replicates",
            "100"
        ])
        .0,
        EXIT_VALIDATION
    );
    assert_eq!(
        CliError::from(Error::NoConvergence(50)).exit_code(),
        EXIT_NUMERICAL
    );
    assert_eq!(
        CliError::from(Error::InvalidArgument("x".into())).exit_code(),
        EXIT_VALIDATION
    );
}

#[test]
fn identical_invocations_are_byte_identical() {
    let dir = scratch("determinism");
    let base = [
        "mc",
        "--theta",
        "-1",
        "--hurst",
        "0.75",
        "--c",
        "0.7,1.0",
        "--T",
        "5",
        "--replicates",
        "10000",
        "--grid-n",
        "200",
        "--seed",
        "9",
    ];
    let mut outputs = Vec::new();
    for (k, threads) in ["1", "3", "3"].iter().enumerate() {
        let out = dir.join(format!("mc{k}.csv"));
        let mut args: Vec<&str> = base.to_vec();
        let out_str = out.to_str().unwrap().to_string();
        args.extend(["--threads", threads, "--out", &out_str]);
        let (code, stdout, err) = call(&args);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(stdout.is_empty());
        outputs.push(fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn simulate_dumps_paths() {
    let dir = scratch("paths");
    let d = dir.to_str().unwrap();
    for route in ["martingale", "fbm"] {
        let (code, out, err) = call(&[
            "simulate",
            "--route",
            route,
            "--theta",
            "-1",
            "--hurst",
            "0.75",
            "--T",
            "2",
            "--replicates",
            "2",
            "--grid-n",
            "100",
            "--dump-paths",
            d,
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert_eq!(rows(&out).len(), 3);
        let path = fs::read_to_string(dir.join("path_000001.csv")).unwrap();
        assert!(path.starts_with("t,M,Y,Q,S\n"));
        assert_eq!(path.lines().count(), 102);
    }
}

#[test]
fn oracles_run() {
    let (code, out, _) = call(&[
        "oracle", "--kind", "legendre", "--theta", "-1", "--hurst", "0.75", "--c", "1,4",
    ]);
    assert_eq!(code, EXIT_OK);
    let t = rows(&out);
    let e = column(&t, "abs_err");
    for r in &t[1..] {
        assert!(r[e].parse::<f64>().unwrap() < 1e-6);
    }
    let (code, out, _) = call(&[
        "oracle", "--kind", "contour", "--theta", "-1", "--hurst", "0.75", "--a", "1", "--T",
        "1000",
    ]);
    assert_eq!(code, EXIT_OK);
    let t = rows(&out);
    assert!(t[1][column(&t, "abs_err")].parse::<f64>().unwrap() < 1e-9);
    let (code, out, _) = call(&[
        "oracle", "--kind", "bessel", "--theta", "-1", "--hurst", "0.75", "--z", "100",
    ]);
    assert_eq!(code, EXIT_OK);
    let t = rows(&out);
    assert!(t[1][column(&t, "rel_err")].parse::<f64>().unwrap() < 1e-7);
}

#[test]
fn binary_reports_usage_exit_code() {
    let bin = env!("CARGO_BIN_EXE_fou-sldp");
    let status = Command::new(bin).arg("nonsense").output().unwrap().status;
    assert_eq!(status.code(), Some(EXIT_USAGE));
    let out = Command::new(bin)
        .args(["rate", "--theta", "-1", "--hurst", "0.75", "--c", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("target,"));
}
