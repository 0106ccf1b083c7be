use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use snapvar_cli::matrix_file::write_matrix_file;
use snapvar_core::{Complex, ComplexMatrix};

fn snapvar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snapvar"))
        .args(args)
        .env_remove("SNAPVAR_SEED")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn sweep_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["variance-sweep", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    snapvar(&args)
}

const GOLDEN_ARGS: &[&str] = &[
    "--cost", "state", "--observable", "fock0", "--d-min", "2", "--d-max", "8", "--blocks", "5", "--samples", "10000",
    "--seed", "7",
];

#[test]
fn sweep_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let run = sweep_to(&out, GOLDEN_ARGS);
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));
    let golden = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/sweep_state_fock0_seed7.csv")).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), golden);
    assert!(String::from_utf8_lossy(&run.stdout).contains("log-log variance slope"));
}

#[test]
fn sweep_csv_follows_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let run = sweep_to(&out, &["--d-min", "2", "--d-max", "4", "--blocks", "3,4", "--samples", "300", "--seed", "1"]);
    assert_eq!(code(&run), 0);
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines().skip_while(|l| l.starts_with('#'));
    assert_eq!(
        lines.next().unwrap(),
        "cost,regime,d,T,k,nu,n_samples,mean,stderr_mean,variance,stderr_variance,analytic_variance,seed"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for (row, (d, t)) in rows.iter().zip([(2, 3), (2, 4), (3, 3), (3, 4), (4, 3), (4, 4)]) {
        assert_eq!(row.len(), 13);
        assert_eq!(row[0], "state");
        assert_eq!(row[1], "uniform");
        assert_eq!(row[2].parse::<usize>().unwrap(), d);
        assert_eq!(row[3].parse::<usize>().unwrap(), t);
        assert_eq!(row[6], "300");
        for field in &row[7..12] {
            let x: f64 = field.parse().unwrap();
            assert!(x.is_finite());
            // 17 significant digits: one leading digit and sixteen decimals
            let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.len(), 18, "{field}");
        }
        assert_eq!(row[12], "1");
    }
    assert!(text.contains("# seed=1"));
}

#[test]
fn outputs_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    for (name, args) in [
        ("gate", vec!["--cost", "gate", "--d-min", "2", "--d-max", "5", "--blocks", "5,10", "--samples", "2000", "--seed", "3"]),
        (
            "haar",
            vec!["--regime", "haar-blocks", "--d-min", "3", "--d-max", "4", "--blocks", "4", "--samples", "1000", "--seed", "4"],
        ),
    ] {
        let mut outputs = Vec::new();
        for threads in ["1", "3"] {
            let path = dir.path().join(format!("{name}-{threads}.csv"));
            let mut full = vec!["--threads", threads];
            full.extend_from_slice(&args);
            assert_eq!(code(&sweep_to(&path, &full)), 0);
            outputs.push(fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{name}");
    }

    let a = snapvar(&["--threads", "1", "two-design", "--d", "3", "--pairs", "2000", "--seed", "5"]);
    let b = snapvar(&["--threads", "4", "two-design", "--d", "3", "--pairs", "2000", "--seed", "5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let explicit = dir.path().join("explicit.csv");
    let from_env = dir.path().join("env.csv");
    let args = ["--d-min", "2", "--d-max", "3", "--blocks", "3", "--samples", "200"];
    let mut with_seed = args.to_vec();
    with_seed.extend(["--seed", "11"]);
    assert_eq!(code(&sweep_to(&explicit, &with_seed)), 0);
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_snapvar"));
    cmd.args(["variance-sweep", "--out", from_env.to_str().unwrap()]).args(args).env("SNAPVAR_SEED", "11");
    assert!(cmd.output().unwrap().status.success());
    assert_eq!(fs::read(&explicit).unwrap(), fs::read(&from_env).unwrap());
}

#[test]
fn matrix_files_feed_the_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("target.txt");
    write_matrix_file(&target, &ComplexMatrix::identity(3)).unwrap();
    let via_file = dir.path().join("file.csv");
    let builtin = dir.path().join("builtin.csv");
    let common = ["--cost", "gate", "--d-min", "3", "--d-max", "3", "--blocks", "4", "--samples", "500", "--seed", "2"];
    let source = format!("file:{}", target.display());
    let mut a = common.to_vec();
    a.extend(["--target", source.as_str()]);
    assert_eq!(code(&sweep_to(&via_file, &a)), 0);
    assert_eq!(code(&sweep_to(&builtin, &common)), 0);
    let rows = |p: &Path| {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(String::from)
            .collect::<Vec<_>>()
    };
    assert_eq!(rows(&via_file), rows(&builtin));

    let observable = dir.path().join("obs.txt");
    fs::write(&observable, "# number operator\n2\n1,0 0,0\n0,0 0,0\n").unwrap();
    let source = format!("file:{}", observable.display());
    let run = sweep_to(
        &dir.path().join("obs.csv"),
        &["--observable", &source, "--d-min", "2", "--d-max", "2", "--blocks", "3", "--samples", "200"],
    );
    assert_eq!(code(&run), 0, "{}", String::from_utf8_lossy(&run.stderr));

    // wrong dimension for the grid, non-unitary target, malformed file
    let wrong_grid = sweep_to(&dir.path().join("x.csv"), &["--observable", &source, "--d-min", "2", "--d-max", "3"]);
    assert_eq!(code(&wrong_grid), 2);
    let skew = dir.path().join("skew.txt");
    write_matrix_file(&skew, &ComplexMatrix::from_real_diag(&[1.0, 2.0])).unwrap();
    let source = format!("file:{}", skew.display());
    assert_eq!(code(&sweep_to(&dir.path().join("y.csv"), &["--cost", "gate", "--target", &source])), 2);
    let short = dir.path().join("short.txt");
    fs::write(&short, "3\n1,0 0,0 0,0\n").unwrap();
    let source = format!("file:{}", short.display());
    let run = sweep_to(&dir.path().join("z.csv"), &["--observable", &source]);
    assert_eq!(code(&run), 2);
    assert!(String::from_utf8_lossy(&run.stderr).contains("rows"));
    let phased = dir.path().join("phase.txt");
    write_matrix_file(&phased, &ComplexMatrix::identity(2).scale(Complex::from_polar(1.0, 0.3))).unwrap();
    let source = format!("file:{}", phased.display());
    let run = sweep_to(
        &dir.path().join("p.csv"),
        &["--cost", "gate", "--target", &source, "--d-min", "2", "--d-max", "2", "--blocks", "3", "--samples", "100"],
    );
    assert_eq!(code(&run), 0);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["verify-moments", "--d", "1"],
        vec!["variance-sweep", "--nu", "9", "--d-min", "4"],
        vec!["variance-sweep", "--cost", "energy"],
        vec!["variance-sweep", "--regime", "sobol"],
        vec!["variance-sweep", "--observable", "file:/definitely/not/here"],
        vec!["variance-sweep", "--k", "6", "--blocks", "5"],
        vec!["variance-sweep", "--samples", "notanumber"],
        vec!["two-design", "--pairs", "10"],
        vec!["two-design", "--d", "1"],
        vec!["compare-qubit-bound", "--a", "1.5"],
        vec!["compare-qubit-bound", "--a", "0"],
        vec!["compare-qubit-bound", "--d-min", "1"],
        vec!["--threads", "0", "verify-moments"],
        vec!["no-such-command"],
    ] {
        let out = snapvar(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!String::from_utf8_lossy(&out.stderr).contains("panicked"));
    }
}

#[test]
fn io_failure_exits_1() {
    let out = snapvar(&["variance-sweep", "--samples", "100", "--d-max", "2", "--blocks", "3", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn verify_moments_passes() {
    let out = snapvar(&["verify-moments"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("all checks passed"));
    assert!(text.lines().any(|l| l.contains("four_trace_repeated_as_quoted") && l.contains("reference")));

    let out = snapvar(&["verify-moments", "--d", "5", "--mc-samples", "100000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn two_design_table() {
    let out = snapvar(&["two-design", "--d", "4", "--pairs", "20000", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("ensemble"))
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 8);
    for r in rows.iter().filter(|r| r[0] == "haar") {
        let sigma: f64 = r[7].parse().unwrap();
        assert!(sigma <= 3.0, "{r:?}");
    }
    let again = snapvar(&["two-design", "--d", "4", "--pairs", "20000", "--seed", "1"]);
    assert_eq!(out.stdout, again.stdout);
}

#[test]
fn compare_qubit_bound_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cmp.csv");
    let out = snapvar(&[
        "compare-qubit-bound", "--observable", "number", "--a", "0.5,0.67", "--d-min", "2", "--d-max", "64", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("adjudicated formula:"));
    assert_eq!(stdout.lines().filter(|l| l.starts_with("crossover")).count(), 6);

    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 10);
    assert_eq!(header[8], "qubit_bound_a0.5");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 63);
    let d8 = &rows[6];
    assert_eq!(d8[0], "8");
    assert_eq!(d8[1].parse::<f64>().unwrap(), 3.0);
    assert_eq!(d8[8].parse::<f64>().unwrap(), 2f64.powf(-1.5));

    // other observables have no particle-number columns or adjudication
    let out = snapvar(&["compare-qubit-bound", "--observable", "fock0", "--d-max", "8"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let first = text.lines().find(|l| l.starts_with("2,")).unwrap();
    assert!(first.contains(",,,,"));
    assert!(!String::from_utf8_lossy(&out.stderr).contains("adjudicated"));
}
