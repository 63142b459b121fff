//! Run reports and their CSV, JSON and plot-script renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, RateBand};
use crate::error::{Error, Result};
use crate::harness::{
    eps_sweep, fit_rate, EpsRunDiagnostics, ErrorRow, ErrorTable, LimitRunDiagnostics, MetricValue, RateFit,
};

pub const CSV_HEADER: &str = "eps,metric_name,value,T,tail_estimate";

/// Outcome of one acceptance band.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandCheck {
    pub band: RateBand,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub table: ErrorTable,
    pub fits: Vec<RateFit>,
    pub bands: Vec<BandCheck>,
    pub runs: Vec<EpsRunDiagnostics>,
    pub limit: LimitRunDiagnostics,
    pub wall_seconds: f64,
}

impl RunReport {
    pub fn all_bands_pass(&self) -> bool {
        self.bands.iter().all(|b| b.pass)
    }

    pub fn fit(&self, metric: &str) -> Option<&RateFit> {
        self.fits.iter().find(|f| f.metric == metric)
    }
}

/// Fit every metric of the table; metrics that cannot be fitted (for
/// instance an identically zero column) are left out.
pub fn fit_all(table: &ErrorTable) -> Vec<RateFit> {
    table.metric_names().iter().filter_map(|m| fit_rate(table, m).ok()).collect()
}

pub fn check_bands(bands: &[RateBand], fits: &[RateFit]) -> Vec<BandCheck> {
    bands
        .iter()
        .map(|band| {
            let slope = fits.iter().find(|f| f.metric == band.metric).map(|f| f.slope);
            BandCheck {
                band: band.clone(),
                slope,
                pass: slope.is_some_and(|s| band.contains(s)),
            }
        })
        .collect()
}

/// Sweep the ladder of `cfg`, fit rates and check the configured bands.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<RunReport> {
    let clock = Instant::now();
    let sweep = eps_sweep(cfg, threads)?;
    let fits = fit_all(&sweep.table);
    let bands = check_bands(&cfg.bands, &fits);
    Ok(RunReport {
        config: cfg.clone(),
        table: sweep.table,
        fits,
        bands,
        runs: sweep.runs,
        limit: sweep.limit,
        wall_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// CSV text: one line per (ε, metric), ε descending, metrics by name.
pub fn csv_string(table: &ErrorTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        for (name, v) in &row.metrics {
            let _ = writeln!(out, "{:e},{},{:e},{:e},{:e}", row.eps, name, v.value, row.t_final, v.tail);
        }
    }
    out
}

/// Parse CSV written by [`csv_string`].
pub fn parse_csv(text: &str) -> Result<ErrorTable> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                key: "header".into(),
                message: format!("expected `{CSV_HEADER}`"),
            })
        }
    }
    let mut rows: BTreeMap<u64, ErrorRow> = BTreeMap::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = |key: &str, message: String| Error::Parse {
            line: i + 1,
            key: key.into(),
            message,
        };
        if f.len() != 5 {
            return Err(bad("row", format!("expected 5 fields, got {}", f.len())));
        }
        let num = |k: &str, s: &str| s.trim().parse::<f64>().map_err(|e| bad(k, e.to_string()));
        let eps = num("eps", f[0])?;
        let value = num("value", f[2])?;
        let t = num("T", f[3])?;
        let tail = num("tail_estimate", f[4])?;
        let row = rows.entry(eps.to_bits()).or_insert_with(|| ErrorRow {
            eps,
            m: 0,
            t_final: t,
            metrics: BTreeMap::new(),
        });
        row.metrics.insert(f[1].trim().to_string(), MetricValue { value, tail });
    }
    let mut table = ErrorTable::new();
    for row in rows.into_values() {
        table.insert(row);
    }
    Ok(table)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn emit_csv(report: &RunReport, path: &Path) -> Result<()> {
    write(path, &csv_string(&report.table))
}

pub fn json_string(report: &RunReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Serialize(e.to_string()))
}

pub fn parse_json(text: &str) -> Result<RunReport> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        key: String::new(),
        message: e.to_string(),
    })
}

pub fn emit_json(report: &RunReport, path: &Path) -> Result<()> {
    write(path, &json_string(report)?)
}

const PLOT_BODY: &str = r#"
fig, ax = plt.subplots(figsize=(7, 5))
for name, pts in data.items():
    eps = [p[0] for p in pts]
    err = [p[1] for p in pts]
    line, = ax.loglog(eps, err, "o", label=name)
    if name in fits:
        slope, intercept = fits[name]
        ax.loglog(eps, [math.exp(intercept) * e ** slope for e in eps], "-", color=line.get_color(),
                  label=f"{name} fit, slope {slope:.3f}")
ax.set_xlabel("eps")
ax.set_ylabel("error")
ax.legend(fontsize=7)
ax.grid(True, which="both", alpha=0.3)
fig.tight_layout()
fig.savefig(__file__.rsplit(".", 1)[0] + ".png", dpi=150)
"#;

/// A matplotlib script drawing error against ε on log-log axes with the
/// fitted lines; the data are embedded.
pub fn plotscript_string(report: &RunReport) -> String {
    let mut s = String::new();
    s.push_str("import math\n\nimport matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\n\n");
    s.push_str("data = {\n");
    for name in report.table.metric_names() {
        let pts: Vec<String> = report
            .table
            .rows
            .iter()
            .filter_map(|r| r.get(&name).map(|v| format!("({:e}, {:e})", r.eps, v)))
            .collect();
        let _ = writeln!(s, "    {name:?}: [{}],", pts.join(", "));
    }
    s.push_str("}\nfits = {\n");
    for f in &report.fits {
        let _ = writeln!(s, "    {:?}: ({:e}, {:e}),", f.metric, f.slope, f.intercept);
    }
    s.push_str("}\n");
    s.push_str(PLOT_BODY);
    s
}

pub fn emit_plotscript(report: &RunReport, path: &Path) -> Result<()> {
    write(path, &plotscript_string(report))
}

/// Write CSV, JSON and plot script into the configured output directory
/// (or `out_dir` when given).
pub fn emit_all(report: &RunReport, out_dir: Option<&Path>) -> Result<()> {
    let o = &report.config.output;
    let dir = out_dir.unwrap_or(&o.dir);
    emit_csv(report, &dir.join(&o.csv))?;
    emit_json(report, &dir.join(&o.json))?;
    emit_plotscript(report, &dir.join(&o.plot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::System;

    fn sample_report() -> RunReport {
        let mut table = ErrorTable::new();
        for (i, eps) in [0.05, 0.2, 0.1].into_iter().enumerate() {
            let mut metrics = BTreeMap::new();
            metrics.insert("b".to_string(), MetricValue { value: eps * eps, tail: 1e-9 * i as f64 });
            metrics.insert("a".to_string(), MetricValue { value: 0.1 * eps + 1e-17, tail: 0.0 });
            table.insert(ErrorRow { eps, m: 3, t_final: 2.0, metrics });
        }
        let fits = fit_all(&table);
        let cfg = ExperimentConfig::defaults(System::Euler);
        RunReport {
            bands: check_bands(&[RateBand::new("b", Some(1.9), Some(2.1)), RateBand::new("zzz", None, None)], &fits),
            config: cfg,
            table,
            fits,
            runs: Vec::new(),
            limit: LimitRunDiagnostics {
                steps: 1,
                dt: 0.1,
                max_mass_drift: 0.0,
                samples: 2,
                corrector_steps: None,
                wall_seconds: 0.25,
            },
            wall_seconds: 1.0 / 3.0,
        }
    }

    #[test]
    fn csv_has_schema_and_order() {
        let r = sample_report();
        let csv = csv_string(&r.table);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 1 + 3 * 2);
        assert!(lines[1].starts_with("2e-1,a,"));
        assert!(lines[6].starts_with("5e-2,b,"));
    }

    #[test]
    fn csv_round_trips_exactly() {
        let r = sample_report();
        let back = parse_csv(&csv_string(&r.table)).unwrap();
        for (a, b) in r.table.rows.iter().zip(&back.rows) {
            assert_eq!(a.eps.to_bits(), b.eps.to_bits());
            for (k, v) in &a.metrics {
                assert_eq!(v.value.to_bits(), b.metrics[k].value.to_bits());
                assert_eq!(v.tail.to_bits(), b.metrics[k].tail.to_bits());
            }
        }
    }

    #[test]
    fn json_round_trips_losslessly() {
        let r = sample_report();
        let back = parse_json(&json_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.wall_seconds.to_bits(), r.wall_seconds.to_bits());
    }

    #[test]
    fn bands_are_checked() {
        let r = sample_report();
        assert!(r.bands[0].pass);
        assert!(!r.bands[1].pass, "missing metric must fail");
        assert!(!r.all_bands_pass());
    }

    #[test]
    fn plot_script_embeds_fits() {
        let s = plotscript_string(&sample_report());
        assert!(s.contains("\"a\": ["));
        assert!(s.contains("fits = {"));
        assert!(s.contains("loglog"));
    }

    #[test]
    fn bad_csv_reports_line() {
        let text = format!("{CSV_HEADER}\n0.1,a,1e-3,2,0\n0.05,a,oops,2,0\n");
        match parse_csv(&text).unwrap_err() {
            Error::Parse { line, key, .. } => {
                assert_eq!(line, 3);
                assert_eq!(key, "value");
            }
            e => panic!("{e:?}"),
        }
    }
}
