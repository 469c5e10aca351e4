use std::io::Write;
use std::process::{Command, Output};

use baryiter::report::TraceReport;

fn baryiter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_baryiter"))
        .args(args)
        .env_remove("BARYITER_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn order_prints_five_decimals() {
    let o = baryiter(&["order", "--family", "root", "--m", "1", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1.83929\n");
    let o = baryiter(&["order", "--family", "opt", "--m", "3", "--n", "inf"]);
    assert_eq!(stdout(&o), "3.30278\n");
}

#[test]
fn newton_on_sqrt2_converges_quadratically() {
    let o = baryiter(&[
        "solve", "--expr", "x^2-2", "--x0", "1", "--method", "newton",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = TraceReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(report.summary.status, "converged");
    assert!(report
        .steps
        .last()
        .unwrap()
        .x
        .starts_with("1.41421356237309504880"));
    let order: f64 = report.summary.empirical_order.unwrap().parse().unwrap();
    assert!((order - 2.0).abs() < 0.15, "{order}");
}

#[test]
fn table4_window4_column_from_solve() {
    let o = baryiter(&[
        "solve",
        "--problem",
        "cos_minus_x",
        "--method",
        "exact-df",
        "--weights",
        "x",
        "--window",
        "4",
        "--bootstrap",
        "picard",
        "--precision-bits",
        "512",
        "--tol-f",
        "1e-150",
        "--tol-x",
        "1e-150",
        "--max-iter",
        "9",
        "--digits",
        "3",
    ]);
    // The run is cut at the tabulated rows, so it ends with the budget spent.
    assert_eq!(o.status.code(), Some(2));
    let report = TraceReport::from_json(&stdout(&o)).unwrap();
    let errors: Vec<_> = report
        .steps
        .iter()
        .map(|s| s.abs_error.clone().unwrap())
        .collect();
    assert_eq!(
        errors,
        [
            "2.26e+00", "1.73e+00", "6.19e-01", "3.47e-01", "1.77e-02", "2.00e-04", "1.78e-08",
            "4.40e-16", "6.06e-31", "2.08e-59"
        ]
    );
    assert_eq!(report.summary.status, "budget-exhausted");
}

#[test]
fn json_round_trips_byte_identically() {
    let o = baryiter(&[
        "solve",
        "--problem",
        "exp_root",
        "--method",
        "exact-d1",
        "--window",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(&o.stdout).unwrap();
    let text = std::fs::read_to_string(file.path()).unwrap();
    let again = TraceReport::from_json(&text).unwrap().to_json();
    assert_eq!(again, text);
}

#[test]
fn csv_and_human_outputs() {
    let o = baryiter(&[
        "optimize",
        "--problem",
        "opt_quadratic",
        "--method",
        "ch-d1",
        "--output",
        "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("i,x,f,abs_error,status\n"));
    assert!(text.trim_end().ends_with("converged"));
    let o = baryiter(&["optimize", "--problem", "opt_cos", "--output", "human"]);
    assert_eq!(o.status.code(), Some(0));
    // Twenty significant digits by default.
    assert!(
        stdout(&o).contains("3.1415926535897932385e+00"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn parse_error_reports_column() {
    let o = baryiter(&["solve", "--expr", "log(x"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("--expr") && err.contains("column 6"), "{err}");
}

#[test]
fn exit_codes() {
    assert_eq!(baryiter(&["--help"]).status.code(), Some(0));
    assert_eq!(baryiter(&["--version"]).status.code(), Some(0));
    assert_eq!(baryiter(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        baryiter(&["solve", "--problem", "nope"]).status.code(),
        Some(1)
    );
    assert_eq!(
        baryiter(&["solve", "--problem", "cos_minus_x", "--method", "bogus"])
            .status
            .code(),
        Some(1)
    );
    let o = baryiter(&[
        "solve",
        "--problem",
        "cos_minus_x",
        "--method",
        "picard",
        "--max-iter",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(
        TraceReport::from_json(&stdout(&o)).unwrap().summary.status,
        "budget-exhausted"
    );
}

#[test]
fn solver_errors_name_the_variant() {
    // f' vanishes at the start point.
    let o = baryiter(&[
        "solve", "--expr", "x^2+1", "--x0", "0", "--method", "newton",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let report = TraceReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(report.summary.error.as_deref(), Some("ZeroDerivative"));
    assert!(stderr(&o).contains("ZeroDerivative"));
}

#[test]
fn precision_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_baryiter"))
        .args(["solve", "--problem", "x2_minus_2"])
        .env("BARYITER_PRECISION_BITS", "128")
        .output()
        .unwrap();
    let report = TraceReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(report.config["precision_bits"], "128");
}

#[test]
fn tables_reproduce() {
    for t in ["table4", "table6"] {
        let o = baryiter(&["table", "--reproduce", t]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(stdout(&o).contains("all cells match"));
    }
}

#[test]
fn compare_lists_methods_side_by_side() {
    let o = baryiter(&[
        "compare",
        "--problem",
        "cos_minus_x",
        "--methods",
        "secant,exact-df:3,newton",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    let header = text.lines().next().unwrap();
    assert!(
        header.contains("secant:2") && header.contains("exact-df:3") && header.contains("newton:1")
    );
}
