use std::f64::consts::LN_2;
use std::path::Path;
use std::process::{Command, Output};

fn chaosdeg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaosdeg"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header plus data rows, split into fields.
fn table(o: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let text = stdout(o);
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn field(header: &[String], row: &[String], name: &str) -> String {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    row[i].clone()
}

fn num(header: &[String], row: &[String], name: &str) -> f64 {
    field(header, row, name).parse().unwrap()
}

#[test]
fn ecd_examples() {
    let o = chaosdeg(&["ecd", "--map", "bernoulli", "--param", "a=1.0"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&o);
    assert_eq!(
        h,
        [
            "a",
            "ecd",
            "shannon_out",
            "mutual_info",
            "occupied_cells",
            "overflow_fraction",
            "status"
        ]
    );
    assert!((num(&h, &rows[0], "ecd") / LN_2 - 1.0).abs() < 0.02);

    let o = chaosdeg(&["ecd", "--map", "bernoulli", "--param", "a=0.0"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&o);
    assert_eq!(num(&h, &rows[0], "ecd"), 0.0);
    assert_eq!(field(&h, &rows[0], "status"), "ok");

    let o = chaosdeg(&["ecd", "--map", "tinkerbell_a", "--param", "a=5.0"]);
    assert_eq!(o.status.code(), Some(2));
    let (h, rows) = table(&o);
    assert_eq!(field(&h, &rows[0], "status"), "diverged");
    assert_eq!(field(&h, &rows[0], "ecd"), "");
}

#[test]
fn lyapunov_examples() {
    let o = chaosdeg(&["lyapunov", "--map", "baker", "--param", "a=1.0"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&o);
    assert_eq!(h, ["a", "lambda_1", "lambda_2", "numeric_jacobian", "status"]);
    assert!((num(&h, &rows[0], "lambda_1") - LN_2).abs() < 1e-4);
    assert!((num(&h, &rows[0], "lambda_2") + LN_2).abs() < 1e-4);

    let o = chaosdeg(&["lyapunov", "--map", "bernoulli", "--param", "a=0.0"]);
    let (h, rows) = table(&o);
    assert_eq!(field(&h, &rows[0], "lambda_1"), "-inf");

    let o = chaosdeg(&["lyapunov", "--map", "logistic", "--param", "r=4.0"]);
    let (h, rows) = table(&o);
    assert!((num(&h, &rows[0], "lambda_1") - LN_2).abs() < 0.01);
}

#[test]
fn sweep_examples() {
    let o = chaosdeg(&[
        "sweep",
        "--map",
        "bernoulli",
        "--sweep",
        "a=0:1",
        "--points",
        "740",
        "--analyses",
        "ecd,lyapunov",
        "--n",
        "5000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = table(&o);
    assert_eq!(rows.len(), 740);
    assert_eq!(h[..3], ["index", "a", "ecd"]);
    assert!(h.contains(&"lambda_1".to_string()));
    assert_eq!(num(&h, &rows[739], "a"), 1.0);

    let o = chaosdeg(&[
        "sweep",
        "--map",
        "tinkerbell_b",
        "--sweep",
        "b=1.9:2.9",
        "--points",
        "740",
        "--analyses",
        "ecd",
        "--n",
        "2000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&o);
    assert_eq!(rows.len(), 740);
    assert!(!h.contains(&"lambda_1".to_string()));

    let o = chaosdeg(&["sweep", "--map", "bernoulli", "--points", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn diverged_sweep_rows_have_blank_values() {
    let o = chaosdeg(&[
        "sweep",
        "--map",
        "tinkerbell_a",
        "--sweep",
        "a=0.9:5",
        "--points",
        "3",
        "--n",
        "2000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&o);
    assert_eq!(field(&h, &rows[2], "status"), "diverged");
    assert_eq!(field(&h, &rows[2], "ecd"), "");
    assert_eq!(field(&h, &rows[2], "lambda_1"), "");
    assert!(field(&h, &rows[2], "diverged_step").parse::<usize>().unwrap() > 0);
    assert_eq!(field(&h, &rows[0], "status"), "overflow");
}

#[test]
fn orbit_examples() {
    let o = chaosdeg(&[
        "orbit",
        "--map",
        "tinkerbell_a",
        "--param",
        "a=0.9",
        "--from",
        "1001",
        "--to",
        "4000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&o);
    assert_eq!(h, ["step", "x1", "x2", "cell"]);
    assert_eq!(rows.len(), 3000);
    assert_eq!(rows[0][0], "1001");
    assert_eq!(rows[2999][0], "4000");

    let o = chaosdeg(&[
        "orbit",
        "--map",
        "bernoulli",
        "--param",
        "a=0.4",
        "--from",
        "1001",
        "--to",
        "1005",
    ]);
    let (h, rows) = table(&o);
    assert_eq!(rows.len(), 5);
    for row in &rows {
        assert_eq!(field(&h, row, "cell"), "0");
        assert!(num(&h, row, "x1") < 1e-90);
    }

    assert_eq!(
        chaosdeg(&["orbit", "--map", "bernoulli", "--to", "10", "--from", "20"])
            .status
            .code(),
        Some(1)
    );
    let o = chaosdeg(&["orbit", "--map", "bernoulli", "--from", "7", "--to", "7"]);
    assert_eq!(table(&o).1.len(), 1);
}

#[test]
fn usage_errors_exit_one_with_message() {
    for args in [
        &["ecd", "--map", "nope"][..],
        &["ecd", "--map", "bernoulli", "--bogus"],
        &["ecd"],
        &["ecd", "--map", "bernoulli", "--param", "q=1"],
        &["ecd", "--map", "bernoulli", "--param", "a"],
        &["ecd", "--map", "bernoulli", "--x0", "0.1,0.2"],
        &["ecd", "--map", "baker", "--cells", "10,10,10"],
        &["ecd", "--map", "bernoulli", "--log-base", "10"],
        &["sweep", "--map", "bernoulli", "--analyses", "fft"],
        &["sweep", "--map", "bernoulli", "--sweep", "a=1:0"],
        &["lyapunov", "--map", "bernoulli", "--renorm-every", "0"],
        &["frobnicate"],
    ] {
        let o = chaosdeg(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
    assert_eq!(chaosdeg(&["--help"]).status.code(), Some(0));
    assert_eq!(chaosdeg(&["--version"]).status.code(), Some(0));
}

#[test]
fn out_flag_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let p = path.to_str().unwrap();
    let o = chaosdeg(&[
        "ecd",
        "--map",
        "baker",
        "--n",
        "5000",
        "--cells",
        "50",
        "--log-base",
        "2",
        "--out",
        p,
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("a,ecd,"));
    assert!(!csv.contains('\r'));
    let manifest = std::fs::read_to_string(dir.path().join("run.manifest")).unwrap();
    for key in [
        "tool=chaosdeg",
        "command=ecd",
        "map=baker",
        "params=a=1.0",
        "cells=50x50",
        "n=5000",
        "log_base=2",
    ] {
        assert!(manifest.lines().any(|l| l == key), "missing {key} in\n{manifest}");
    }
    assert!(manifest.lines().any(|l| l.starts_with("timestamp_unix=")));
    assert!(manifest.lines().any(|l| l.starts_with("version=")));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs = [
        &["ecd", "--map", "tinkerbell_a", "--n", "20000"][..],
        &["lyapunov", "--map", "tinkerbell_b", "--n", "20000"],
        &["orbit", "--map", "baker", "--from", "1", "--to", "300"],
        &["sweep", "--map", "baker", "--points", "9", "--n", "5000"],
    ];
    for args in runs {
        let a = chaosdeg(args);
        let b = chaosdeg(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let sweep = |w: &str| {
        chaosdeg(&[
            "sweep",
            "--map",
            "tinkerbell_a",
            "--points",
            "25",
            "--n",
            "3000",
            "--workers",
            w,
        ])
        .stdout
    };
    assert_eq!(sweep("1"), sweep("3"));
}

#[test]
fn map_file_runs_custom_maps() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tent.map");
    std::fs::write(
        &path,
        "name = tent\ndimension = 1\ndomain = [0, 1]\nparams = mu=1.9\nguard = x1 < 0.5\nf1 = mu*x1\ng1 = mu*(1 - x1)\n",
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let o = chaosdeg(&["lyapunov", "--map-file", p, "--n", "20000"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = table(&o);
    assert!((num(&h, &rows[0], "lambda_1") - 1.9f64.ln()).abs() < 1e-6);
    assert_eq!(field(&h, &rows[0], "numeric_jacobian"), "true");

    let o = chaosdeg(&["ecd", "--map-file", p, "--cells", "100", "--n", "20000"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&o);
    assert!(num(&h, &rows[0], "ecd") > 0.0);

    // custom maps have no default grid or sweep range
    assert_eq!(chaosdeg(&["ecd", "--map-file", p]).status.code(), Some(1));
    assert_eq!(
        chaosdeg(&["sweep", "--map-file", p, "--cells", "10"]).status.code(),
        Some(1)
    );
    let o = chaosdeg(&[
        "sweep",
        "--map-file",
        p,
        "--cells",
        "10",
        "--sweep",
        "mu=1:2",
        "--points",
        "3",
        "--n",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(0));

    let bad = dir.path().join("bad.map");
    std::fs::write(&bad, "dimension = 1\ndomain = [0, 1]\nf1 = 2**x1\n").unwrap();
    let o = chaosdeg(&["ecd", "--map-file", bad.to_str().unwrap(), "--cells", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 2"));
    assert!(!Path::new(&dir.path().join("missing.map")).exists());
    assert_eq!(
        chaosdeg(&["ecd", "--map-file", dir.path().join("missing.map").to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}
