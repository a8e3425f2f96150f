use std::path::Path;
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn quadsieve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadsieve")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn read_sidecar(csv: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(format!("{}.json", csv.display())).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn count_small_grid_writes_expected_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("count.csv");
    let o = quadsieve(&["count", "--form", "diag:1,1,-3", "--m", "1", "--T-grid", "2,3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "T,count\n2,4\n3,12\n");
    let meta = read_sidecar(&out);
    assert_eq!(meta["metadata"]["schema_version"], 1);
    assert_eq!(meta["metadata"]["spec"]["form"], "diag:1,1,-3");
    assert!(meta["metadata"]["wall_time_secs"].is_number());
    assert_eq!(meta["all_passed"], true);
}

#[test]
fn local_density_without_cutters_is_one() {
    let o = quadsieve(&["local-density", "--form", "diag:1,1,1,-1", "--m", "1", "--p-grid", "3,5,7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    let tau = header.iter().position(|c| *c == "tau").unwrap();
    for line in lines {
        assert_eq!(line.split(',').nth(tau), Some("1/1"));
    }
}

#[test]
fn unknown_kind_exits_2_and_lists_kinds() {
    let o = quadsieve(&["frobnicate", "--T-grid", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for k in ["enumerate", "count", "equidist", "sieve-tail", "coprime-density", "half-sieve", "local-density", "lang-weil"] {
        assert!(err.contains(k), "missing {k} in {err}");
    }
}

#[test]
fn usage_errors_name_the_flag() {
    let o = quadsieve(&["count", "--form", "diag:1,1,-3", "--m", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--T-grid"));
    let o = quadsieve(&["lang-weil", "--form", "diag:1,1,1", "--m", "1", "--p-grid", "3,4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("4 is not prime"));
    let o = quadsieve(&["count", "--form", "diag:1,0,1", "--m", "1", "--T-grid", "3"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn budget_overrun_exits_3() {
    let o = quadsieve(&["count", "--form", "diag:1,1,-3", "--m", "1", "--T-grid", "1000", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = quadsieve(&["lang-weil", "--form", "diag:1,1,1,-1", "--m", "1", "--p-grid", "101", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn failed_assertion_exits_1() {
    // Deviation modulo 3 grows between these two heights.
    let o = quadsieve(&["equidist", "--form", "diag:1,1,-3", "--m", "1", "--T-grid", "20,40", "--l-grid", "3"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("deviation_decreases_l3"));
}

#[test]
fn cache_reuse_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.tsv");
    let mut outputs = Vec::new();
    for i in 0..3 {
        let out = dir.path().join(format!("lw{i}.csv"));
        let mut args = vec!["lang-weil", "--form", "diag:1,1,1,-1", "--m", "1", "--p-grid", "3,5,7,11,13"];
        let (o, c) = (out.to_str().unwrap().to_string(), cache.to_str().unwrap().to_string());
        args.extend(["--out", &o]);
        if i > 0 {
            args.extend(["--cache", &c]);
        }
        let run = quadsieve(&args);
        assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(std::fs::read_to_string(&cache).unwrap().lines().count(), 5);
}

/// Recomputes three randomly chosen assertion rows from the raw CSV columns.
#[test]
fn assertion_rows_recompute_from_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tail.csv");
    let o = quadsieve(&[
        "sieve-tail", "--form", "diag:1,1,1,-1", "--m", "1", "--cutters", "x1;x2",
        "--T-grid", "10,20,40", "--M-grid", "3,5,7", "--out", out.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(1)), "{}", stderr(&o));
    let (header, rows) = read_csv(&out);
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let f = |row: &[String], name: &str| row[col(name)].parse::<f64>().unwrap();
    let sidecar = read_sidecar(&out);
    let shape_rows: Vec<&serde_json::Value> = sidecar["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["name"] == "tail_shape")
        .collect();
    assert_eq!(shape_rows.len(), rows.len());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for a in shape_rows.choose_multiple(&mut rng, 3) {
        let row = &rows[a["row"].as_u64().unwrap() as usize];
        let tau = f(row, "tail") / f(row, "total");
        let t = f(row, "T");
        let m = f(row, "M");
        let shape = 1.0 / m + 1.0 / t.ln().sqrt();
        let bound = f(row, "kappa") * shape;
        assert!((tau - a["observed"].as_f64().unwrap()).abs() < 1e-12);
        assert!((shape - f(row, "shape")).abs() < 1e-12);
        assert!((bound - a["bound"].as_f64().unwrap()).abs() < 1e-12);
        assert_eq!(a["pass"].as_bool().unwrap(), row[col("pass")] == "true");
    }
}
