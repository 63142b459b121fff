use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relaxlab::check::run_checks;
use relaxlab::config::{parse_config, ExperimentConfig, System};
use relaxlab::harness::{run_ladder, ErrorTable};
use relaxlab::report::{
    check_bands, emit_all, emit_csv, emit_json, fit_all, parse_csv, run_experiment, BandCheck, RunReport,
};
use relaxlab::Result;

#[derive(Parser)]
#[command(name = "relaxlab", version, about = "Relaxation-limit convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single eps (the first of the ladder unless --eps is given).
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Run the whole eps ladder, fit rates and write CSV, JSON and a plot script.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Fit rates from an existing CSV.
    Rates {
        #[arg(long)]
        csv: PathBuf,
        /// Supplies acceptance bands; defaults to the euler bands.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        assert_rates: bool,
    },
    /// Run the invariant self-tests.
    Check,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Exit with status 1 unless every acceptance band passes.
    #[arg(long)]
    assert_rates: bool,
    /// Seed for random data families.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => parse_config(p)?,
            None => ExperimentConfig::defaults(System::Euler),
        };
        if self.seed.is_some() {
            cfg.seed = self.seed;
            cfg.validate()?;
        }
        Ok(cfg)
    }
}

fn print_table(table: &ErrorTable) {
    for row in &table.rows {
        println!("eps = {}", row.eps);
        for (name, v) in &row.metrics {
            println!("  {name:<24} {:.6e}  (tail {:.2e})", v.value, v.tail);
        }
    }
}

fn print_bands(bands: &[BandCheck]) -> bool {
    for b in bands {
        let slope = b.slope.map_or("missing".to_string(), |s| format!("{s:.4}"));
        let tag = if b.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:<24} slope {slope} in {}", b.band.metric, b.band.describe());
    }
    bands.iter().all(|b| b.pass)
}

fn sweep(common: &Common) -> Result<bool> {
    let cfg = common.load()?;
    let report = run_experiment(&cfg, common.threads)?;
    emit_all(&report, common.out_dir.as_deref())?;
    print_table(&report.table);
    for f in &report.fits {
        println!("fit {:<24} slope {:.4}  residual {:.2e}", f.metric, f.slope, f.residual);
    }
    let ok = print_bands(&report.bands);
    Ok(ok || !common.assert_rates)
}

fn run(common: &Common, eps: Option<f64>) -> Result<bool> {
    let cfg = common.load()?;
    let eps: Vec<f64> = match eps {
        Some(e) => vec![e],
        None => cfg.ladder.first().copied().into_iter().collect(),
    };
    let clock = std::time::Instant::now();
    let result = run_ladder(&cfg, &eps, common.threads)?;
    let report = RunReport {
        config: cfg,
        table: result.table,
        fits: Vec::new(),
        bands: Vec::new(),
        runs: result.runs,
        limit: result.limit,
        wall_seconds: clock.elapsed().as_secs_f64(),
    };
    let o = &report.config.output;
    let dir: &Path = common.out_dir.as_deref().unwrap_or(&o.dir);
    emit_csv(&report, &dir.join(&o.csv))?;
    emit_json(&report, &dir.join(&o.json))?;
    print_table(&report.table);
    for r in &report.runs {
        println!(
            "steps {} dt {:.3e} mass drift {:.2e} min density {:.4}",
            r.steps, r.dt, r.max_mass_drift, r.min_density
        );
    }
    Ok(true)
}

fn rates(csv: &Path, config: Option<&Path>, assert_rates: bool) -> Result<bool> {
    let text = std::fs::read_to_string(csv).map_err(|e| relaxlab::Error::io(csv, e))?;
    let table = parse_csv(&text)?;
    let cfg = match config {
        Some(p) => parse_config(p)?,
        None => ExperimentConfig::defaults(System::Euler),
    };
    let fits = fit_all(&table);
    for f in &fits {
        println!("fit {:<24} slope {:.4}  residual {:.2e}", f.metric, f.slope, f.residual);
    }
    let ok = print_bands(&check_bands(&cfg.bands, &fits));
    Ok(ok || !assert_rates)
}

fn check() -> bool {
    let results = run_checks();
    for c in &results {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:<40} {:.3e} (tolerance {:.0e})", c.name, c.value, c.tolerance);
    }
    results.iter().all(|c| c.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { common, eps } => run(common, *eps),
        Command::Sweep { common } => sweep(common),
        Command::Rates { csv, config, assert_rates } => rates(csv, config.as_deref(), *assert_rates),
        Command::Check => Ok(check()),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(2)
        }
    }
}
