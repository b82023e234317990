use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_diffract"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("diffract-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

/// Parses with a strict reader: `#` comments, header, fixed column count.
fn table(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).flexible(false).from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn front_scan_reaches_minus_one_half() {
    let o = run(&["front-scan", "--a", "0.25", "--n", "0", "--r2", "1", "--t", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(h, ["delta", "region_two", "region_three", "difference", "extrapolated"]);
    let last: f64 = rows.last().unwrap()[column(&h, "extrapolated")].parse().unwrap();
    assert!((last + 0.5).abs() < 1e-3, "{last}");
}

#[test]
fn mode_table_flags_the_exceptional_mode() {
    let o = run(&["mode-table", "--a", "3", "--n-max", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let (h, rows) = table(&stdout(&o));
    let flag = column(&h, "jump_nonzero");
    assert_eq!(rows.len(), 4);
    for row in &rows {
        let expect = if row[0] == "1" { "false" } else { "true" };
        assert_eq!(row[flag], expect, "{row:?}");
    }
}

#[test]
fn quick_verify_passes() {
    let o = run(&["verify", "--quick", "--reproducible"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = table(&stdout(&o));
    assert_eq!(rows.len(), 10);
    let status = column(&h, "status");
    assert!(rows.iter().all(|r| r[status] == "pass"), "{rows:?}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["kernel-grid", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["front-scan", "--t", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["oracle-compare", "--dr", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["mode-table", "--config", "/nonexistent/diffract.cfg"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn failing_audit_exits_one() {
    let o = run(&["symbol-audit", "--alpha", "0.05", "--count", "400", "--start", "0"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(!text.contains("violations=0 "), "{text}");
}

#[test]
fn reproducible_output_is_byte_identical() {
    let args = ["specfun", "--orders", "0,1.5", "--steps", "7", "--reproducible"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains("timestamp"));
    let stamped = stdout(&run(&["specfun", "--steps", "2"]));
    assert!(stamped.lines().any(|l| l.starts_with("# timestamp=")));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let cfg = scratch("mode.cfg");
    std::fs::write(&cfg, "# mode table\na = 3\nn-max = 5\n").unwrap();
    let path = cfg.to_str().unwrap();
    let o = run(&["mode-table", "--config", path, "--n-max", "2"]);
    let text = stdout(&o);
    assert!(text.lines().next().unwrap().contains("a=3 n_max=2"), "{text}");
    let (_, rows) = table(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][3], "false");
}

#[test]
fn output_flag_writes_a_file() {
    let path = scratch("kernel.csv");
    let o = run(&["kernel-grid", "--r1-steps", "5", "--t-steps", "4", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let (h, rows) = table(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(h, ["r1", "t", "region", "value"]);
    assert!(!rows.is_empty() && rows.len() <= 20);
    for row in rows {
        assert!(["I", "II", "III"].contains(&row[2].as_str()));
        let v: f64 = row[3].parse().unwrap();
        if row[2] == "I" {
            assert_eq!(v, 0.0);
        }
    }
}

#[test]
fn every_subcommand_emits_strict_numeric_csv() {
    let dump = scratch("field.csv");
    let cases: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (vec!["specfun", "--function", "legendre-q", "--steps", "4"], vec!["order", "argument", "value"]),
        (vec!["specfun", "--function", "gamma", "--steps", "4"], vec!["argument", "value"]),
        (
            vec!["hankel-check", "--steps", "0.2"],
            vec!["h", "points", "involution_defect", "plancherel_gap", "eigen_defect"],
        ),
        (vec!["kernel-grid", "--r1-steps", "4", "--t-steps", "4"], vec!["r1", "t", "value"]),
        (vec!["front-scan"], vec!["delta", "region_two", "region_three", "difference", "extrapolated"]),
        (vec!["mode-table", "--n-max", "2"], vec!["n", "nu", "sin_pi_nu"]),
        (
            vec!["oracle-compare", "--dr", "4e-3", "--points", "0.7:1,1.5:2", "--field-dump", dump.to_str().unwrap()],
            vec!["r1", "t", "analytic", "numeric", "rel_err"],
        ),
        (
            vec!["trace", "--span", "1", "--every", "100"],
            vec!["s", "t", "r", "theta", "tau", "xi", "zeta", "xi_hat", "sigma"],
        ),
        (vec!["energy-audit", "--dims", "4", "--count", "2"], vec!["lhs", "rhs", "margin"]),
        (
            vec!["symbol-audit", "--alpha", "1.5", "--count", "20"],
            vec!["t", "r", "tau", "xi", "zeta", "symbol", "h_p_a"],
        ),
    ];
    for (args, numeric) in cases {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert!(text.starts_with("# version="), "{args:?}");
        let (h, rows) = table(&text);
        assert!(!rows.is_empty(), "{args:?}");
        for name in numeric {
            let c = column(&h, name);
            for row in &rows {
                assert!(row[c].parse::<f64>().is_ok(), "{args:?} {name}: {}", row[c]);
            }
        }
    }
    let (h, rows) = table(&std::fs::read_to_string(&dump).unwrap());
    assert_eq!(h, ["r_index", "t_index", "value"]);
    assert!(rows.len() > 1000);
}
