use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, System};
use crate::data::Preparation;
use crate::error::{Error, Result};
use crate::euler::{solve_euler, RelaxParams};
use crate::harness::{error_report_em, error_report_thm11, error_report_thm12, ErrorRow, ErrorTable, InitialLayer, TailModel};
use crate::limit::{solve_corrector, solve_porous_medium, LimitParams};
use crate::maxwell::{
    em_darcy_flux, make_em_initial, solve_drift_diffusion, solve_em, solve_em_corrector, EMLimitParams, EMParams,
};
use crate::stepping::{layer_resolving_times, merge_times, uniform_times};

/// Run-level diagnostics of one ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsRunDiagnostics {
    pub eps: f64,
    pub steps: usize,
    pub dt: f64,
    pub max_mass_drift: f64,
    pub min_density: f64,
    pub guard_bound: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_gauss_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_div_b: Option<f64>,
    pub wall_seconds: f64,
}

/// Diagnostics of the shared limit (and corrector) solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitRunDiagnostics {
    pub steps: usize,
    pub dt: f64,
    pub max_mass_drift: f64,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrector_steps: Option<usize>,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub table: ErrorTable,
    pub runs: Vec<EpsRunDiagnostics>,
    pub limit: LimitRunDiagnostics,
}

/// Report samples of the run at `eps`.
pub fn report_times(cfg: &ExperimentConfig, eps: f64) -> Vec<f64> {
    layer_resolving_times(cfg.t_final, cfg.time.samples, eps, cfg.time.layer_points)
}

/// Run every ε of the ladder (at least three) against one shared limit
/// solve, `threads` runs at a time. Rows do not depend on scheduling.
pub fn eps_sweep(cfg: &ExperimentConfig, threads: usize) -> Result<SweepResult> {
    if cfg.ladder.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, got: cfg.ladder.len() });
    }
    run_ladder(cfg, &cfg.ladder, threads)
}

/// Same as [`eps_sweep`] for an arbitrary non-empty list of ε.
pub fn run_ladder(cfg: &ExperimentConfig, ladder: &[f64], threads: usize) -> Result<SweepResult> {
    cfg.validate()?;
    if ladder.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    match cfg.system {
        System::Euler => euler_ladder(cfg, ladder, &pool),
        System::Em => em_ladder(cfg, ladder, &pool),
    }
}

fn union_times(cfg: &ExperimentConfig, ladder: &[f64], dense_dt: Option<f64>) -> Vec<f64> {
    let mut all: Vec<f64> = ladder.iter().flat_map(|&e| report_times(cfg, e)).collect();
    if let Some(dt) = dense_dt {
        all.extend(uniform_times(cfg.t_final, (cfg.t_final / dt).ceil() as usize + 1));
    }
    merge_times(&mut all);
    all
}

fn collect_rows(
    results: Vec<Result<(ErrorRow, EpsRunDiagnostics)>>,
    limit: LimitRunDiagnostics,
) -> Result<SweepResult> {
    let mut table = ErrorTable::new();
    let mut runs = Vec::with_capacity(results.len());
    for r in results {
        let (row, diag) = r?;
        table.insert(row);
        runs.push(diag);
    }
    runs.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    Ok(SweepResult { table, runs, limit })
}

fn euler_ladder(cfg: &ExperimentConfig, ladder: &[f64], pool: &rayon::ThreadPool) -> Result<SweepResult> {
    let grid = cfg.build_grid()?;
    let law = cfg.law()?;
    let family = cfg.data_family();
    let rho_star0 = family.density_perturbation(&grid)?.shift(1.0);
    let rho1_0 = family.corrector_initial(&grid);
    let needs_corrector = family.preparation != Preparation::Ill;
    let mut lp = LimitParams::new(cfg.t_final).with_scheme(cfg.time.scheme);
    lp.cfl = cfg.time.cfl;
    if let Some(dt) = cfg.time.dt {
        lp = lp.with_dt(dt);
    }
    let limit_dt = lp.resolve_dt(&rho_star0, &law);
    let report: Vec<f64> = union_times(cfg, ladder, None);
    let dense = union_times(cfg, ladder, needs_corrector.then_some(limit_dt));

    let clock = Instant::now();
    let limit = solve_porous_medium(&rho_star0, &lp, law, &dense)?;
    let corrector = if needs_corrector {
        Some(solve_corrector(&limit, &rho1_0, limit_dt, law, cfg.time.scheme, &report)?)
    } else {
        None
    };
    let limit_diag = LimitRunDiagnostics {
        steps: limit.diagnostics.steps,
        dt: limit_dt,
        max_mass_drift: limit.diagnostics.max_mass_drift,
        samples: dense.len(),
        corrector_steps: corrector.as_ref().map(|c| c.steps),
        wall_seconds: clock.elapsed().as_secs_f64(),
    };
    let limit = limit.restrict_to(&report)?;
    let tail = TailModel::porous_medium(&grid, &law);

    let results: Vec<Result<_>> = pool.install(|| {
        ladder
            .par_iter()
            .map(|&eps| {
                let clock = Instant::now();
                let times = report_times(cfg, eps);
                let data = family.build(&grid, eps, &law)?;
                let mut params = RelaxParams::new(eps, cfg.t_final).with_scheme(cfg.time.scheme);
                params.cfl = cfg.time.cfl;
                if let Some(dt) = cfg.time.dt {
                    params = params.with_dt(dt);
                }
                let run = solve_euler(data.state.clone(), &params, law, &times)?;
                let lim = limit.restrict_to(&times)?;
                let row = match &corrector {
                    None => {
                        let layer = InitialLayer::new(data.state.q.clone(), eps)?;
                        error_report_thm11(&run.trajectory, &lim, &layer, cfg.m, tail)?
                    }
                    Some(c) => {
                        let c = c.restrict_to(&times)?;
                        error_report_thm12(&run.trajectory, &lim, &c, eps, cfg.m, tail)?
                    }
                };
                let d = &run.diagnostics;
                let diag = EpsRunDiagnostics {
                    eps,
                    steps: d.steps,
                    dt: d.dt,
                    max_mass_drift: d.max_mass_drift,
                    min_density: d.min_density,
                    guard_bound: d.guard_bound,
                    max_gauss_residual: None,
                    max_div_b: None,
                    wall_seconds: clock.elapsed().as_secs_f64(),
                };
                Ok((row, diag))
            })
            .collect::<Vec<_>>()
    });
    let results = results
        .into_iter()
        .zip(ladder)
        .map(|(r, &eps)| r.map_err(|e| e.at_eps(eps)))
        .collect();
    collect_rows(results, limit_diag)
}

fn em_ladder(cfg: &ExperimentConfig, ladder: &[f64], pool: &rayon::ThreadPool) -> Result<SweepResult> {
    let grid = cfg.build_grid()?;
    let law = cfg.law()?;
    let family = cfg.data_family();
    let rho0 = family.density_perturbation(&grid)?.shift(1.0);
    let mut lp = EMLimitParams::new(cfg.t_final);
    lp.cfl = cfg.time.cfl;
    lp.scheme = cfg.time.scheme;
    if let Some(dt) = cfg.time.dt {
        lp = lp.with_dt(dt);
    }
    let limit_dt = lp.resolve_dt(&rho0, &law);
    let report = union_times(cfg, ladder, None);
    let dense = union_times(cfg, ladder, cfg.em_corrector.then_some(limit_dt));

    let clock = Instant::now();
    let limit = solve_drift_diffusion(&rho0, &lp, law, &dense)?;
    let corrector = if cfg.em_corrector {
        Some(solve_em_corrector(&limit, cfg.b_ext, limit_dt, cfg.time.scheme, &report, None)?)
    } else {
        None
    };
    let limit_diag = LimitRunDiagnostics {
        steps: limit.steps,
        dt: limit_dt,
        max_mass_drift: limit.max_mass_drift,
        samples: dense.len(),
        corrector_steps: corrector.as_ref().map(|c| c.steps),
        wall_seconds: clock.elapsed().as_secs_f64(),
    };
    let limit = limit.restrict_to(&report)?;
    let tail = TailModel::drift_diffusion(&grid, &law);

    let results: Vec<Result<_>> = pool.install(|| {
        ladder
            .par_iter()
            .map(|&eps| {
                let clock = Instant::now();
                let times = report_times(cfg, eps);
                let scale = match family.velocity_scaling {
                    crate::data::VelocityScaling::InverseEps => 1.0 / eps,
                    crate::data::VelocityScaling::Unit => 1.0,
                };
                let mut init = make_em_initial(&rho0, &family.base_velocity(&grid).scale(scale), cfg.b_ext)?;
                if family.preparation == Preparation::Well {
                    init.q = em_darcy_flux(&init.rho, &init.e, &law);
                }
                let layer = InitialLayer::new(init.q.clone(), eps)?;
                let mut params = EMParams::new(eps, cfg.b_ext, cfg.t_final);
                params.cfl = cfg.time.cfl;
                params.scheme = cfg.time.scheme;
                if let Some(dt) = cfg.time.dt {
                    params = params.with_dt(dt);
                }
                let run = solve_em(init, &params, law, &times)?;
                let lim = limit.restrict_to(&times)?;
                let corr = match &corrector {
                    Some(c) => Some(c.restrict_to(&times)?),
                    None => None,
                };
                let row = error_report_em(&run.trajectory, &lim, corr.as_ref(), &layer, cfg.b_ext, cfg.m, tail)?;
                let d = &run.diagnostics;
                let diag = EpsRunDiagnostics {
                    eps,
                    steps: d.steps,
                    dt: d.dt,
                    max_mass_drift: d.max_mass_drift,
                    min_density: d.min_density,
                    guard_bound: d.guard_bound,
                    max_gauss_residual: Some(d.max_gauss_residual),
                    max_div_b: Some(d.max_div_b),
                    wall_seconds: clock.elapsed().as_secs_f64(),
                };
                Ok((row, diag))
            })
            .collect()
    });
    let results = results
        .into_iter()
        .zip(ladder)
        .map(|(r, &eps)| r.map_err(|e| e.at_eps(eps)))
        .collect();
    collect_rows(results, limit_diag)
}
