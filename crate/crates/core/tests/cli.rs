use std::process::Command;

fn meanlab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_meanlab"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

#[test]
fn eval_round_trips_through_stdout() {
    let (code, out, _) = meanlab(&["eval", "invariant(arith,geom)", "1", "2"]);
    assert_eq!(code, 0);
    let v: f64 = out.trim().parse().unwrap();
    assert!((v - 1.456_791_031_046_907).abs() < 1e-13);
}

#[test]
fn eval_json() {
    let (code, out, _) = meanlab(&["eval", "geom", "4", "9", "--format", "json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["value"].as_f64(), Some(6.0));
    assert_eq!(v["expr"], "gini(0,0)");
}

#[test]
fn order_csv_dumps_phi() {
    let (code, out, _) = meanlab(&["order", "geom", "--format", "csv", "--points", "64"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("u,phi"));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 64);
    for r in rows {
        let phi: f64 = r.split(',').nth(1).unwrap().parse().unwrap();
        assert!((phi - 0.5).abs() < 1e-15);
    }
}

#[test]
fn order_json_report() {
    let (code, out, _) = meanlab(&["--format", "json", "order", "log"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["classification"]["is_gpg"], true);
    assert_eq!(v["classification"]["is_pg"], false);
    assert_eq!(v["estimate"]["windows"].as_array().unwrap().len(), 8);
}

#[test]
fn verify_exit_codes() {
    assert_eq!(meanlab(&["verify", "harm", "geom"]).0, 0);
    // orders (1, 0) are excluded from the law
    assert_eq!(meanlab(&["verify", "harm", "arith"]).0, 1);
    // no contraction at all
    assert_eq!(meanlab(&["verify", "min", "max"]).0, 3);
    assert_eq!(meanlab(&["verify", "harm", "nope"]).0, 2);
}

#[test]
fn gini_table_flags() {
    let (code, out, _) = meanlab(&["gini-table", "--p=-2,1", "--q", "0,-1"]);
    assert_eq!(code, 0);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "p,q,closed_form,estimated_lower,estimated_upper,abs_error");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("-2,0,1,"));
}

#[test]
fn invariant_command() {
    let (code, out, _) = meanlab(&["invariant", "arith", "harm", "2", "8"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next().unwrap().parse::<f64>().unwrap(), 4.0);
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("meanlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.txt");
    let (code, out, _) = meanlab(&["eval", "arith", "1", "3", "--output", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "2\n");
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn malformed_input_exits_two() {
    for args in [
        &["eval", "gini(1,", "1", "2"][..],
        &["eval", "frob", "1", "2"],
        &["eval", "arith", "0", "2"],
        &["eval", "arith", "x", "2"],
        &["order", "env(e1)", "--u-end", "-0.5"],
        &["compare", "1", "2", "3"],
        &["--format", "xml", "eval", "arith", "1", "2"],
    ] {
        let (code, _, err) = meanlab(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(!err.is_empty());
    }
}
