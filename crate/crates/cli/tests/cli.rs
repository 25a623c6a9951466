use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn gaac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaac")).args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value, path: &str) -> f64 {
    v.pointer(path).and_then(Value::as_f64).unwrap_or_else(|| panic!("no number at {path}"))
}

#[test]
fn inspect_z2() {
    let v = json_of(&gaac(&["inspect", "--algebra", &fixture("group_z2_2.json")]));
    assert_eq!(v["algebra"]["blocks"], serde_json::json!([[3, 1], [1, 1]]));
    assert_eq!(v["algebra"]["dim_aprime"], 10);
    assert_eq!(v["algebra"]["collinear"], false);
    assert_eq!(v["tool"], "gaac");
    assert!(num(&v, "/residuals/commutator") < 1e-10);
}

#[test]
fn inspect_masa_is_collinear() {
    let v = json_of(&gaac(&["inspect", "--algebra", &fixture("diagonal_4.json")]));
    assert_eq!(v["algebra"]["collinear"], true);
    assert_eq!(v["algebra"]["lambda"], "1/1");
}

#[test]
fn malformed_input_exits_2() {
    let out = gaac(&["inspect", "--algebra", &fixture("malformed.json")]);
    assert_eq!(out.status.code(), Some(2));
    let out = gaac(&["inspect", "--algebra", &fixture("does_not_exist.json")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hadamard_saturates_the_masa_bound() {
    let v = json_of(&gaac(&[
        "gaac",
        "--algebra",
        &fixture("diagonal_2.json"),
        "--unitary",
        &fixture("hadamard.json"),
    ]));
    assert!((num(&v, "/report/value") - 0.5).abs() < 1e-12);
    assert!((num(&v, "/report/upper_bound") - 0.5).abs() < 1e-12);
    assert!(num(&v, "/cross_routes/max_route_residual") < 1e-10);
}

#[test]
fn swap_on_bipartite() {
    let v = json_of(&gaac(&[
        "gaac",
        "--algebra",
        &fixture("factor_2x2.json"),
        "--unitary",
        &fixture("swap_4.json"),
    ]));
    assert!((num(&v, "/report/value") - 0.75).abs() < 1e-12);
}

#[test]
fn shift_on_loschmidt() {
    // |0> is moved to an orthogonal state
    let v = json_of(&gaac(&[
        "gaac",
        "--algebra",
        &fixture("loschmidt_4.json"),
        "--unitary",
        &fixture("shift_4.json"),
    ]));
    let value = num(&v, "/report/value");
    let bound = num(&v, "/report/upper_bound");
    assert!(value <= bound + 1e-12);
    assert!(num(&v, "/cross_routes/max_route_residual") < 1e-10);
}

#[test]
fn non_unitary_exits_4() {
    let out = gaac(&[
        "gaac",
        "--algebra",
        &fixture("diagonal_2.json"),
        "--unitary",
        &fixture("not_unitary.json"),
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn haar_unitary_is_reproducible() {
    let args = ["gaac", "--algebra", &fixture("symmetric_swap_2.json"), "--haar", "--seed", "7"];
    let a = gaac(&args);
    let b = gaac(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let out = gaac(&["gaac", "--algebra", &fixture("diagonal_2.json"), "--haar"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn haar_csv_rows() {
    let args = [
        "haar",
        "--algebra",
        &fixture("diagonal_4.json"),
        "--samples",
        "500",
        "--seed",
        "3",
        "--format",
        "csv",
    ];
    let a = gaac(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, gaac(&args).stdout);
    let mut rdr = csv::Reader::from_reader(a.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    let get = |k: &str| rows[0][headers.iter().position(|h| h == k).unwrap()].to_string();
    assert_eq!(get("analytic").parse::<f64>().unwrap(), 0.6);
    let mean: f64 = get("mc_mean").parse().unwrap();
    let se: f64 = get("standard_error").parse().unwrap();
    assert!((mean - 0.6).abs() < 5.0 * se);
    assert_eq!(get("samples"), "500");
}

#[test]
fn haar_dims_sweep() {
    let v = json_of(&gaac(&[
        "haar",
        "--algebra",
        &fixture("diagonal_2.json"),
        "--dims",
        "2,3,5",
        "--samples",
        "50",
        "--seed",
        "1",
    ]));
    let rows = v["rows"].as_array().unwrap();
    let dims: Vec<u64> = rows.iter().map(|r| r["dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, [2, 3, 5]);
    for r in rows {
        let d = r["dim"].as_f64().unwrap();
        assert!((r["analytic"].as_f64().unwrap() - (d - 1.0) / (d + 1.0)).abs() < 1e-12);
    }
}

#[test]
fn haar_rejects_bad_sampling() {
    let base = ["haar", "--algebra", &fixture("diagonal_4.json")];
    let mut one = base.to_vec();
    one.extend(["--samples", "1", "--seed", "3"]);
    assert_eq!(gaac(&one).status.code(), Some(2));
    assert_eq!(gaac(&base).status.code(), Some(2));
}

#[test]
fn bell_time_average() {
    let v = json_of(&gaac(&[
        "time-average",
        "--algebra",
        &fixture("factor_2x2.json"),
        "--hamiltonian",
        &fixture("bell_hamiltonian.json"),
        "--bound",
        "--grid",
        "2000",
        "4000",
    ]));
    assert!((num(&v, "/exact") - 0.5625).abs() < 1e-12);
    assert!((num(&v, "/epsilon") - 0.0625).abs() < 1e-12);
    assert!((num(&v, "/nrc_bound") - 0.5625).abs() < 1e-12);
    assert_eq!(v["nrc_certified"], true);
    assert!((num(&v, "/grid/value") - 0.5625).abs() < 0.02);
}

#[test]
fn resonant_spectrum_is_not_certified() {
    let v = json_of(&gaac(&[
        "time-average",
        "--algebra",
        &fixture("diagonal_3.json"),
        "--hamiltonian",
        &fixture("resonant_hamiltonian.json"),
    ]));
    assert_eq!(v["nrc_certified"], false);
    assert_eq!(v["hamiltonian"]["nrc"], false);
    assert!(num(&v, "/exact") <= num(&v, "/nrc_formula") + 1e-12);
}

#[test]
fn bound_needs_collinear_algebra() {
    let out = gaac(&[
        "time-average",
        "--algebra",
        &fixture("group_z2_2.json"),
        "--hamiltonian",
        &fixture("bell_hamiltonian.json"),
        "--bound",
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn chaos_report() {
    let v = json_of(&gaac(&[
        "chaos",
        "--algebra",
        &fixture("diagonal_4.json"),
        "--hamiltonian",
        &fixture("gue_hamiltonian_4.json"),
        "--grid",
        "50",
        "20",
        "--epsilon",
        "0.1",
    ]));
    let eps = num(&v, "/epsilon");
    assert!((eps - (1.0 - num(&v, "/time_average") / num(&v, "/haar_mean"))).abs() < 1e-12);
    assert!(v["dephased_purity"].is_null());
    let rows = v["fluctuations"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((0.0..=1.0).contains(&rows[0]["frequency"].as_f64().unwrap()));
}

#[test]
fn json_output_is_canonical() {
    let out = gaac(&["inspect", "--algebra", &fixture("sigma_z_generators.json")]);
    let v = json_of(&out);
    let mut again = serde_json::to_string_pretty(&v).unwrap();
    again.push('\n');
    assert_eq!(String::from_utf8(out.stdout).unwrap(), again);
}

#[test]
fn out_file_replaces_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    std::fs::write(&path, "stale").unwrap();
    let out = gaac(&[
        "inspect",
        "--algebra",
        &fixture("diagonal_2.json"),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "inspect");
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1);
}

#[test]
fn thread_count_from_env() {
    let args = ["haar", "--algebra", &fixture("diagonal_2.json"), "--samples", "40", "--seed", "5"];
    let one = Command::new(env!("CARGO_BIN_EXE_gaac")).args(args).env("SCRAMBLE_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_gaac")).args(args).env("SCRAMBLE_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_gaac")).args(args).env("SCRAMBLE_THREADS", "lots").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
