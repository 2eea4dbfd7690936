use std::path::Path;
use std::process::{Command, Output};

fn gumbel(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gumbel")).args(args).env("GUMBEL_CACHE_DIR", cache).output().expect("run gumbel")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn tables_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = gumbel(dir.path(), &["tables", "--n-max", "0", "--digits", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("0,1.0000000000,-1.0000000000,0.6321205588,-7.3890560989,-1.7182818285,"));
}

#[test]
fn tables_forty_digits_extend_ten() {
    let dir = tempfile::tempdir().unwrap();
    let run = |digits: &str, mode: &str| {
        stdout(&gumbel(dir.path(), &["tables", "--n-max", "5", "--digits", digits, "--mode", mode]))
    };
    let fields =
        |t: &str| -> Vec<Vec<String>> { t.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect() };
    let short = fields(&run("10", "truncate"));
    let long = fields(&run("40", "truncate"));
    for (a, b) in short.iter().zip(&long) {
        for i in 1..=5 {
            assert!(b[i].starts_with(&a[i]), "{} vs {}", a[i], b[i]);
            assert_eq!(b[i].split('.').nth(1).unwrap().len(), 40);
        }
    }
    // rounded columns: the 10-digit string is within half a unit of the 40-digit value
    let rounded = fields(&run("10", "nearest"));
    for (a, b) in rounded.iter().zip(&long) {
        for i in 1..=5 {
            let x: f64 = a[i].parse().unwrap();
            let y: f64 = b[i].parse().unwrap();
            assert!((x - y).abs() <= 0.5e-10 * (1.0 + 1e-6) + y.abs() * 1e-15, "{} vs {}", a[i], b[i]);
        }
    }
}

#[test]
fn tables_json_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = gumbel(dir.path(), &["tables", "--n-max", "2", "--output", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1]["gamma_n"], "0.5772156649");
    assert!(rows[1]["gamma_n_lo"].as_str().unwrap().starts_with("5.772156649"));
}

#[test]
fn polys_goldens_and_cache_reuse() {
    let dir = tempfile::tempdir().unwrap();
    let first = gumbel(dir.path(), &["polys", "--n-max", "3"]);
    assert_eq!(first.status.code(), Some(0));
    assert!(stdout(&first).contains("P_2 terms=5 built golden=match"));
    let bytes = std::fs::read(dir.path().join("P_3.poly")).unwrap();
    let again = gumbel(dir.path(), &["polys", "--n-max", "3"]);
    assert!(stdout(&again).contains("P_3 terms=11 cached golden=match"));
    assert_eq!(std::fs::read(dir.path().join("P_3.poly")).unwrap(), bytes);
}

#[test]
fn polys_term_counts_increase() {
    let dir = tempfile::tempdir().unwrap();
    let o = gumbel(dir.path(), &["polys", "--n-max", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let counts: Vec<usize> = stdout(&o)
        .lines()
        .map(|l| l.split("terms=").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(counts.len(), 7);
    assert!(counts.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn stale_cache_is_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    gumbel(dir.path(), &["polys", "--n-max", "2"]);
    let path = dir.path().join("P_2.poly");
    let text = std::fs::read_to_string(&path).unwrap().replace("primitive-integer-positive-top", "old-convention");
    std::fs::write(&path, text).unwrap();
    let o = gumbel(dir.path(), &["polys", "--n-max", "2"]);
    assert!(stdout(&o).contains("built golden=match"));
}

#[test]
fn tampered_golden_comparison_fails() {
    let dir = tempfile::tempdir().unwrap();
    gumbel(dir.path(), &["polys", "--n-max", "2"]);
    let path = dir.path().join("P_2.poly");
    let text = std::fs::read_to_string(&path).unwrap().replace("-27 ;", "-26 ;");
    std::fs::write(&path, text).unwrap();
    let o = gumbel(dir.path(), &["polys", "--n-max", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MISMATCH"));
}

#[test]
fn certify_counts_and_resume() {
    let dir = tempfile::tempdir().unwrap();
    let o = gumbel(dir.path(), &["certify", "--n-max", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.contains("CERTIFIED_NONZERO")).count(), 22);
    let ledger = dir.path().join("certify-n5-literal.jsonl");
    let lines: Vec<String> = std::fs::read_to_string(&ledger).unwrap().lines().map(String::from).collect();
    assert_eq!(lines.len(), 22);
    std::fs::write(&ledger, lines[..10].join("\n") + "\n").unwrap();
    let again = stdout(&gumbel(dir.path(), &["certify", "--n-max", "5"]));
    assert!(again.contains("records=22 resumed=10"));
    assert_eq!(std::fs::read_to_string(&ledger).unwrap().lines().count(), 22);
}

#[test]
fn certify_two_at_sixty_four_bits() {
    let dir = tempfile::tempdir().unwrap();
    let o = gumbel(dir.path(), &["certify", "--n-max", "2", "--bits", "64", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let recs: Vec<serde_json::Value> =
        stdout(&o).lines().filter(|l| l.starts_with('{')).map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 4);
    let top = recs.iter().find(|r| r["theta"] == "g4").unwrap();
    assert!(top["det_lo"].as_str().unwrap().starts_with("5.0000"));
    assert!(top["det_hi"].as_str().unwrap().starts_with("5.0000"));
}

#[test]
fn check_verdicts_do_not_depend_on_precision() {
    let dir = tempfile::tempdir().unwrap();
    let verdicts = |bits: &str| -> Vec<String> {
        let o = gumbel(dir.path(), &["check", "--bits", bits]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        stdout(&o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
    };
    let low = verdicts("64");
    assert!(low.iter().all(|l| l.starts_with("PASS")));
    assert_eq!(low, verdicts("256"));
}

#[test]
fn asympt_reports_json_lines() {
    let dir = tempfile::tempdir().unwrap();
    let o = gumbel(dir.path(), &["asympt", "--n-max", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let n = stdout(&o).lines().map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()).count();
    assert_eq!(n, 2 + 5 * 5);
}

#[test]
fn usage_errors_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["tables", "--bits", "32"][..],
        &["tables", "--digits", "0"],
        &["certify", "--n-max", "1"],
        &["certify", "--jobs", "0"],
        &["frobnicate"],
        &["tables", "--n-max", "-1"],
    ] {
        assert_eq!(gumbel(dir.path(), args).status.code(), Some(3), "{args:?}");
    }
    assert_eq!(gumbel(dir.path(), &["--help"]).status.code(), Some(0));
}
