use std::path::Path;
use std::process::{Command, Output};

use relaxlab::report::{parse_csv, parse_json, CSV_HEADER};

const SMALL: &str = "\
ladder = [0.2, 0.1, 0.05]
t_final = 0.5

[grid]
n = 64

[time]
samples = 11
layer_points = 5
";

fn relaxlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaxlab")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn sweep(config: &str, out: &Path, threads: &str) -> Output {
    relaxlab(&["sweep", "--config", config, "--out-dir", out.to_str().unwrap(), "--threads", threads])
}

#[test]
fn sweep_is_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (out, threads) in [(&a, "1"), (&b, "1"), (&c, "2")] {
        let o = sweep(&cfg, out, threads);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let csv = std::fs::read(a.join("errors.csv")).unwrap();
    assert_eq!(csv, std::fs::read(b.join("errors.csv")).unwrap());
    assert_eq!(csv, std::fs::read(c.join("errors.csv")).unwrap());

    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let table = parse_csv(&text).unwrap();
    assert_eq!(table.rows.len(), 3);
    let metrics = table.metric_names().len();
    assert_eq!(metrics, 5);
    assert_eq!(text.lines().count() - 1, 3 * metrics);

    let report = parse_json(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    for (r, c) in report.table.rows.iter().zip(&table.rows) {
        assert_eq!((r.eps, &r.metrics), (c.eps, &c.metrics));
    }
    assert_eq!(report.runs.len(), 3);
    let script = std::fs::read_to_string(a.join("plot_rates.py")).unwrap();
    assert!(script.contains("sup_rho_Hm1"));
}

#[test]
fn rates_refits_a_csv_and_can_assert() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    assert!(sweep(&cfg, &out, "1").status.success());
    let csv = out.join("errors.csv");
    let csv = csv.to_str().unwrap();

    let o = relaxlab(&["rates", "--csv", csv]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("fit sup_rho_Hm1"));

    let strict = write_config(
        dir.path(),
        &format!("{SMALL}\n[[bands]]\nmetric = \"sup_rho_Hm1\"\nmin = 5.0\n"),
    );
    let o = relaxlab(&["rates", "--csv", csv, "--config", &strict, "--assert-rates"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL sup_rho_Hm1"));
    let o = relaxlab(&["rates", "--csv", csv, "--config", &strict]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn empty_ladder_fails_before_solving() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ladder = []\n");
    let out = dir.path().join("out");
    let o = sweep(&cfg, &out, "1");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 3"), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "system = \"em\"\n[grid]\nd = 2\n");
    let o = relaxlab(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("em requires d=3"));

    let cfg = write_config(dir.path(), "[grid]\nn = \"many\"\n");
    let o = relaxlab(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn single_run_and_checks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("one");
    let o = relaxlab(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap(), "--eps", "0.1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = parse_csv(&std::fs::read_to_string(out.join("errors.csv")).unwrap()).unwrap();
    assert_eq!(table.eps(), vec![0.1]);

    let o = relaxlab(&["check"]);
    assert!(o.status.success());
    assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        relaxlab::config::parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 4);
}
