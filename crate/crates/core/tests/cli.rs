use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pqss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqss")).args(args).output().unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn field(out: &Output, key: &str) -> f64 {
    text(&out.stdout)
        .lines()
        .find_map(|l| l.strip_prefix(key)?.strip_prefix('\t'))
        .unwrap()
        .parse()
        .unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![reader.headers().unwrap().iter().map(str::to_owned).collect()];
    for record in reader.records() {
        rows.push(record.unwrap().iter().map(str::to_owned).collect());
    }
    rows
}

#[test]
fn eval_constant_and_worked_example() {
    let out = pqss(&["eval", "--f", "const1", "--x1", "0.3", "--x2", "0.7"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((field(&out, "value") - 1.0).abs() < 1e-14);

    let args = [
        "eval", "--f", "e10", "--n1", "2", "--l1", "1", "--p1", "1", "--q1", "0.5", "--alpha1", "1", "--beta1", "2",
        "--x1", "0.5", "--oracle",
    ];
    let out = pqss(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!((field(&out, "value") - 1.875 / 3.5).abs() < 1e-14);
    assert!(field(&out, "absdiff") < 1e-14);
}

#[test]
fn validation_errors_exit_two() {
    let out = pqss(&["eval", "--x1", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("x ∈ [0,1]"));

    let out = pqss(&["eval", "--p1", "0.5", "--q1", "0.7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("0<q<p≤1"));

    let out = pqss(&["eval", "--f", "no_such_function"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(pqss(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn verify_exit_codes() {
    let out = pqss(&["verify", "--grid", "5"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).contains("all closed forms match the oracle"));

    let out = pqss(&["verify", "--grid", "5", "--node-exponent", "paper-literal"]);
    assert_eq!(out.status.code(), Some(1));
    let err = text(&out.stderr);
    assert!(err.contains("first-moment mismatch factor"), "{err}");

    let out = pqss(&["verify", "--grid", "5", "--tolerance", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));

    let out = pqss(&[
        "verify", "--single", "--n1", "7", "--l1", "2", "--alpha1", "1", "--beta1", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn converge_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = pqss(&[
        "converge",
        "--n-list",
        "16,32,64",
        "--grid",
        "11",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let name = files[0].file_name().unwrap().to_str().unwrap().to_owned();
    assert!(name.starts_with("converge-") && name.ends_with(".csv"), "{name}");
    assert_eq!(name.len(), "converge-".len() + 16 + ".csv".len());
    let rows = csv_rows(&files[0]);
    assert_eq!(rows[0], ["n", "p_n", "q_n", "e00", "e10", "e01", "e20+e02"]);
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        assert!(row[3].parse::<f64>().unwrap() <= 1e-12);
    }
    let summary = text(&out.stdout);
    assert!(summary.contains("empirical order e20+e02"));
}

#[test]
fn converge_json_keys_are_sorted() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.json");
    let out = pqss(&[
        "converge",
        "--n-list",
        "16,32,64",
        "--grid",
        "11",
        "--f",
        "sum",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let raw = fs::read_to_string(&path).unwrap();
    let value: serde_json::Value = serde_json::from_str(&raw).unwrap();
    fn check(v: &serde_json::Value) {
        match v {
            serde_json::Value::Object(map) => {
                let keys: Vec<_> = map.keys().collect();
                let mut sorted = keys.clone();
                sorted.sort();
                assert_eq!(keys, sorted);
                map.values().for_each(check);
            }
            serde_json::Value::Array(items) => items.iter().for_each(check),
            _ => {}
        }
    }
    check(&value);
    let top: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
    assert!(top.windows(2).all(|w| w[0] < w[1]));
    assert!(raw.find("\"config\"").unwrap() < raw.find("\"korovkin\"").unwrap());
}

#[test]
fn converge_rejects_bad_tables() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("seq.txt");
    fs::write(&table, "16 0.9 0.95\n32 0.95 0.97\n64 0.97 0.98\n").unwrap();
    let out = pqss(&[
        "converge",
        "--family",
        "tabulated",
        "--table",
        table.to_str().unwrap(),
        "--a",
        "0.5",
        "--b",
        "0.3",
        "--n-list",
        "16,32,64",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        text(&out.stderr).contains("invalid sequence family"),
        "{}",
        text(&out.stderr)
    );

    let out = pqss(&["converge", "--family", "tabulated", "--n-list", "16,32,64"]);
    assert_eq!(out.status.code(), Some(2));
    let out = pqss(&["converge", "--n-list", "32,16,64"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_commands() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let out = pqss(&[
        "bounds",
        "--f",
        "sum",
        "--grid",
        "11",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(csv_rows(&path).len(), 1 + 11 * 11);

    let out = pqss(&["bounds", "--f", "sin_sin"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("sin_sin"));

    let out = pqss(&[
        "bounds",
        "--f",
        "const1",
        "--grid",
        "5",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&path);
    let lhs = rows[0].iter().position(|h| h == "lhs").unwrap();
    for row in &rows[1..] {
        assert!(row[lhs].parse::<f64>().unwrap() <= 1e-12);
    }

    let out = pqss(&[
        "bounds", "--f", "product", "--kind", "lipschitz", "--lip-m", "1", "--gamma1", "1", "--gamma2", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let out = pqss(&[
        "bounds", "--f", "sum", "--kind", "k-functional", "--grid", "3", "--kf-points", "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    fs::write(
        &config,
        "# worked axis\nf = e10\nn1 = 2\nl1 = 1\np1 = 1\nq1 = 0.5\nalpha1 = 1\nbeta1 = 2\nx1 = 0.25\n",
    )
    .unwrap();
    let path = config.to_str().unwrap();
    let from_file = pqss(&["--config", path, "eval"]);
    assert_eq!(from_file.status.code(), Some(0), "{}", text(&from_file.stderr));
    let overridden = pqss(&["--config", path, "eval", "--x1", "0.5"]);
    assert!((field(&overridden, "value") - 1.875 / 3.5).abs() < 1e-14);
    assert!((field(&from_file, "value") - field(&overridden, "value")).abs() > 1e-3);

    fs::write(&config, "no_such_flag = 3\n").unwrap();
    assert_eq!(pqss(&["--config", path, "eval"]).status.code(), Some(2));
    assert_eq!(
        pqss(&["--config", "/nonexistent/run.conf", "eval"]).status.code(),
        Some(2)
    );
}

#[test]
fn catalog_lists_functions() {
    let out = pqss(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let listing = text(&out.stdout);
    for name in ["const1", "sum", "product", "sin_sin"] {
        assert!(listing.lines().any(|l| l.starts_with(&format!("{name},"))), "{name}");
    }
}
