//! Worked examples of each solver checked against analytic, finite-difference
//! and self-convergence oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relaxlab::data::TWO_PI;
use relaxlab::euler::{
    euler_rhs_nonstiff, imex_step, initial_energy, solve_euler, EulerState, PressureLaw, RelaxParams,
};
use relaxlab::limit::{darcy_flux, expand, solve_corrector, solve_porous_medium, LimitParams};
use relaxlab::maxwell::{
    em_step, make_em_initial, maxwell_rotation, solve_drift_diffusion, solve_em, solve_em_corrector, EMLimitParams,
    EMParams, EMState,
};
use relaxlab::spectral::{
    divergence, gradient, inv_lap_curl, sobolev_norm, Grid, ScalarField, VectorField,
};
use relaxlab::stepping::{uniform_times, Scheme};
use relaxlab::Error;

fn law() -> PressureLaw {
    PressureLaw::default()
}

/// Mean-zero field with random coefficients on modes `1..=band`.
fn random_field(grid: &Grid, band: i64, amp: f64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let mut terms = Vec::new();
    for _ in 0..6 {
        let mut k = [0i64; 3];
        for slot in k.iter_mut().take(d) {
            *slot = rng.random_range(-band..=band);
        }
        if k == [0, 0, 0] {
            k[0] = 1;
        }
        terms.push((k, rng.random_range(-1.0..1.0), rng.random_range(0.0..TWO_PI)));
    }
    let raw = ScalarField::from_fn(grid, move |x| {
        terms
            .iter()
            .map(|(k, c, ph)| c * ((k[0] as f64) * x[0] + (k[1] as f64) * x[1] + (k[2] as f64) * x[2] + ph).cos())
            .sum()
    });
    raw.scale(amp / raw.max_abs())
}

fn periodic_fd(values: &[f64], h: f64, weights: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            weights
                .iter()
                .enumerate()
                .map(|(j, w)| {
                    let s = j + 1;
                    w * (values[(i + s) % n] - values[(i + n - s) % n])
                })
                .sum::<f64>()
                / h
        })
        .collect()
}

const FD4: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];
const FD8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

// spectral core

#[test]
fn gradient_of_random_field_matches_eighth_order_differences() {
    let err = |n: usize| {
        let g = Grid::new(1, n, TWO_PI).unwrap();
        let f = random_field(&g, 3, 1.0, 7);
        let spectral = gradient(&f);
        let fd = periodic_fd(f.values(), g.dx(), &FD8);
        max_diff(spectral.component(0).values(), &fd)
    };
    let (coarse, fine) = (err(32), err(64));
    assert!(fine < 1e-6, "fd8 gap {fine:e}");
    let order = (coarse / fine).log2();
    assert!(order > 7.0, "observed order {order}");
}

#[test]
fn parseval_matches_quadrature() {
    for seed in 0..5 {
        let g = Grid::new(2, 32, TWO_PI).unwrap();
        let f = random_field(&g, 4, 1.3, seed).shift(0.4);
        let quad = (f.values().iter().map(|v| v * v).sum::<f64>() * g.volume() / g.len() as f64).sqrt();
        let spec = sobolev_norm(&f, 0.0);
        assert!(((spec - quad) / quad).abs() < 1e-12);
    }
}

// relaxed Euler

#[test]
fn initial_energy_examples() {
    let g = Grid::new(1, 32, TWO_PI).unwrap();
    let eq = EulerState::equilibrium(&g);
    assert_eq!(initial_energy(&eq, 0.3, 3.0).unwrap(), 0.0);

    let delta = 0.01;
    let rho = ScalarField::from_fn(&g, |x| 1.0 + delta * x[0].cos());
    let s = EulerState::new(rho, VectorField::zeros(&g)).unwrap();
    let want = delta * delta * 8.0 * std::f64::consts::PI;
    assert!((initial_energy(&s, 0.5, 3.0).unwrap() - want).abs() < 1e-14);

    let rho = random_field(&g, 3, 0.1, 2).shift(1.0);
    let q = VectorField::from_components(vec![random_field(&g, 3, 0.2, 3)]).unwrap();
    let s = EulerState::new(rho.clone(), q.clone()).unwrap();
    let u = q.mul_scalar(&rho.map(|r| 1.0 / r));
    let (a, b) = (sobolev_norm(&rho.shift(-1.0), 2.0), sobolev_norm(&u, 2.0));
    let want = a * a + 0.04 * b * b;
    assert!(((initial_energy(&s, 0.2, 2.0).unwrap() - want) / want).abs() < 1e-12);

    let bad = EulerState::new(ScalarField::from_fn(&g, |x| x[0].cos()), VectorField::zeros(&g));
    if let Ok(bad) = bad {
        assert!(matches!(initial_energy(&bad, 0.1, 1.0), Err(Error::Vacuum { .. })));
    }
}

#[test]
fn nonstiff_tendencies() {
    let g = Grid::new(1, 64, TWO_PI).unwrap();
    let (dr, dq) = euler_rhs_nonstiff(&EulerState::equilibrium(&g)).unwrap();
    assert_eq!(dr.max_abs(), 0.0);
    assert_eq!(dq.max_abs(), 0.0);

    let q = VectorField::from_fn(&g, |x| [x[0].sin(), 0.0, 0.0]);
    let (dr, _) = euler_rhs_nonstiff(&EulerState::new(ScalarField::constant(&g, 1.0), q).unwrap()).unwrap();
    let want = ScalarField::from_fn(&g, |x| -x[0].cos());
    assert!(dr.sub(&want).max_abs() < 1e-12);
}

#[test]
fn nonstiff_tendencies_match_fourth_order_differences() {
    let err = |n: usize| {
        let g = Grid::new(1, n, TWO_PI).unwrap();
        let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.2 * x[0].cos() + 0.1 * (2.0 * x[0]).sin());
        let q = VectorField::from_fn(&g, |x| [0.3 * x[0].sin() - 0.1 * (2.0 * x[0]).cos(), 0.0, 0.0]);
        let (dr, dq) = euler_rhs_nonstiff(&EulerState::new(rho.clone(), q.clone()).unwrap()).unwrap();
        let qv = q.component(0).values();
        let flux: Vec<f64> = qv.iter().zip(rho.values()).map(|(q, r)| q * q / r).collect();
        let fd_r: Vec<f64> = periodic_fd(qv, g.dx(), &FD4).iter().map(|v| -v).collect();
        let fd_q: Vec<f64> = periodic_fd(&flux, g.dx(), &FD4).iter().map(|v| -v).collect();
        max_diff(dr.values(), &fd_r).max(max_diff(dq.component(0).values(), &fd_q))
    };
    let (coarse, fine) = (err(32), err(64));
    assert!(fine < 1e-4, "fd4 gap {fine:e}");
    assert!((coarse / fine).log2() > 3.5, "order {}", (coarse / fine).log2());
}

#[test]
fn equilibrium_is_a_fixed_point() {
    let g = Grid::new(2, 16, TWO_PI).unwrap();
    let eq = EulerState::equilibrium(&g);
    for scheme in [Scheme::ImexEuler, Scheme::Ars222] {
        for (dt, eps) in [(1e-2, 1e-6), (0.5, 1.0)] {
            let s = imex_step(&eq, dt, eps, &law(), scheme).unwrap();
            assert_eq!(s.rho.sub(&eq.rho).max_abs(), 0.0);
            assert_eq!(s.q.max_abs(), 0.0);
        }
    }
}

#[test]
fn stiff_step_relaxes_onto_darcy_law() {
    let g = Grid::new(1, 64, TWO_PI).unwrap();
    let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].cos());
    let q = VectorField::from_fn(&g, |x| [x[0].cos() + 0.3, 0.0, 0.0]);
    let s0 = EulerState::new(rho, q).unwrap();
    let gap = |s: &EulerState| sobolev_norm(&s.q.sub(&darcy_flux(&s.rho, &law())), 0.0);
    for scheme in [Scheme::ImexEuler, Scheme::Ars222] {
        let s1 = imex_step(&s0, 1e-3, 1e-6, &law(), scheme).unwrap();
        assert!(gap(&s1) <= 1e-3 * gap(&s0), "{scheme:?}: {} vs {}", gap(&s1), gap(&s0));
    }
}

fn euler_rho_at(dt: f64, eps: f64, scheme: Scheme, t: f64) -> ScalarField {
    let g = Grid::new(1, 64, TWO_PI).unwrap();
    let rho = ScalarField::from_fn(&g, |x| 1.0 + 0.1 * x[0].cos());
    let q = VectorField::from_fn(&g, |x| [0.2 * x[0].sin() + 0.1 * (2.0 * x[0]).cos(), 0.0, 0.0]);
    let params = RelaxParams::new(eps, t).with_dt(dt).with_scheme(scheme);
    let run = solve_euler(EulerState::new(rho, q).unwrap(), &params, law(), &[0.0, t]).unwrap();
    run.trajectory.last().unwrap().rho.clone()
}

#[test]
fn richardson_order_of_the_step() {
    for scheme in [Scheme::ImexEuler, Scheme::Ars222] {
        let r: Vec<ScalarField> = [4e-3, 2e-3, 1e-3].iter().map(|&dt| euler_rho_at(dt, 0.5, scheme, 0.1)).collect();
        let e1 = sobolev_norm(&r[0].sub(&r[1]), 0.0);
        let e2 = sobolev_norm(&r[1].sub(&r[2]), 0.0);
        let order = (e1 / e2).log2();
        assert!(order >= 1.0, "{scheme:?} order {order}");
    }
}

#[test]
fn fine_step_reference_gap_is_first_order() {
    let dt = 4e-3;
    let reference = euler_rho_at(dt / 8.0, 0.2, Scheme::ImexEuler, 0.2);
    let gap = |h: f64| sobolev_norm(&euler_rho_at(h, 0.2, Scheme::ImexEuler, 0.2).sub(&reference), 0.0);
    let (a, b) = (gap(dt), gap(dt / 2.0));
    assert!(a < 1e-2);
    // with the reference at dt/8 the exact O(dt) ratio is (1 − 1/8)/(1/2 − 1/8) = 7/3
    assert!(a / b > 1.8, "ratio {}", a / b);
}

#[test]
fn zero_perturbation_run_is_constant_and_mass_is_kept() {
    let g = Grid::new(2, 16, TWO_PI).unwrap();
    let run = solve_euler(EulerState::equilibrium(&g), &RelaxParams::new(0.1, 0.5), law(), &uniform_times(0.5, 6)).unwrap();
    for s in &run.trajectory.states {
        assert_eq!(s.rho.sub(&ScalarField::constant(&g, 1.0)).max_abs(), 0.0);
        assert_eq!(s.q.max_abs(), 0.0);
    }

    let rho = random_field(&g, 4, 0.1, 11).shift(1.0);
    let q = VectorField::from_components(vec![random_field(&g, 4, 0.1, 12), random_field(&g, 4, 0.1, 13)]).unwrap();
    let run = solve_euler(EulerState::new(rho, q).unwrap(), &RelaxParams::new(0.2, 0.5), law(), &uniform_times(0.5, 3)).unwrap();
    assert!(run.diagnostics.max_mass_drift < 1e-12);
}

// porous medium limit and corrector

#[test]
fn porous_medium_examples() {
    let g = Grid::new(1, 64, TWO_PI).unwrap();
    let times = uniform_times(0.5, 6);

    let flat = solve_porous_medium(&ScalarField::constant(&g, 1.0), &LimitParams::new(0.5), law(), &times).unwrap();
    for (rho, q) in flat.rho.states.iter().zip(&flat.q) {
        assert_eq!(rho.shift(-1.0).max_abs(), 0.0);
        assert_eq!(q.max_abs(), 0.0);
    }

    let delta = 1e-3;
    let rho0 = ScalarField::from_fn(&g, |x| 1.0 + delta * x[0].cos());
    let lim = solve_porous_medium(&rho0, &LimitParams::new(0.5), law(), &times).unwrap();
    let want = ScalarField::from_fn(&g, |x| delta * (-2.0f64 * 0.5).exp() * x[0].cos());
    let got = lim.rho.last().unwrap().shift(-1.0);
    let rel = sobolev_norm(&got.sub(&want), 0.0) / sobolev_norm(&want, 0.0);
    assert!(rel < 1e-2, "relative deviation {rel:e}");

    let norms: Vec<f64> = lim.rho.states.iter().map(|r| sobolev_norm(&r.shift(-1.0), 0.0)).collect();
    assert!(norms.windows(2).all(|w| w[1] <= w[0]));
    assert!(lim.diagnostics.max_mass_drift < 1e-12);
}

#[test]
fn darcy_flux_examples() {
    let g = Grid::new(1, 64, TWO_PI).unwrap();
    assert_eq!(darcy_flux(&ScalarField::constant(&g, 1.0), &law()).max_abs(), 0.0);

    let delta = 0.01;
    let rho = ScalarField::from_fn(&g, |x| 1.0 + delta * x[0].cos());
    let want = VectorField::from_fn(&g, |x| [2.0 * (1.0 + delta * x[0].cos()) * delta * x[0].sin(), 0.0, 0.0]);
    assert!(darcy_flux(&rho, &law()).sub(&want).max_abs() < 1e-12);

    let composed = gradient(&law().pressure(&rho)).scale(-1.0);
    assert!(darcy_flux(&rho, &law()).sub(&composed).max_abs() < 1e-12);
}

#[test]
fn corrector_examples() {
    let g = Grid::new(1, 64, TWO_PI).unwrap();
    let dt = 1e-3;
    let dense = uniform_times(0.5, 501);
    let report = uniform_times(0.5, 6);

    let rho_star0 = ScalarField::from_fn(&g, |x| 1.0 + 0.05 * x[0].cos());
    let lim = solve_porous_medium(&rho_star0, &LimitParams::new(0.5).with_dt(dt), law(), &dense).unwrap();
    let zero = solve_corrector(&lim, &ScalarField::zeros(&g), dt, law(), Scheme::Ars222, &report).unwrap();
    assert!(zero.rho1.states.iter().all(|r| r.max_abs() == 0.0));
    assert!(zero.q1.iter().all(|q| q.max_abs() == 0.0));

    let r0 = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos() + 0.3 * x[0].sin());
    let one = solve_corrector(&lim, &r0, dt, law(), Scheme::Ars222, &report).unwrap();
    let alpha = -2.5;
    let scaled = solve_corrector(&lim, &r0.scale(alpha), dt, law(), Scheme::Ars222, &report).unwrap();
    for (a, b) in one.rho1.states.iter().zip(&scaled.rho1.states) {
        assert!(b.sub(&a.scale(alpha)).max_abs() < 1e-12);
    }

    // constant background: heat semigroup
    let flat = solve_porous_medium(&ScalarField::constant(&g, 1.0), &LimitParams::new(0.5).with_dt(dt), law(), &dense).unwrap();
    let c = solve_corrector(&flat, &ScalarField::from_fn(&g, |x| x[0].cos()), dt, law(), Scheme::Ars222, &report).unwrap();
    let want = ScalarField::from_fn(&g, |x| (-1.0f64).exp() * x[0].cos());
    let rel = sobolev_norm(&c.rho1.last().unwrap().sub(&want), 0.0) / sobolev_norm(&want, 0.0);
    assert!(rel < 1e-3, "relative error {rel:e}");

    let coarse = solve_corrector(&lim.restrict_to(&report).unwrap(), &r0, dt, law(), Scheme::Ars222, &report);
    assert!(matches!(coarse, Err(Error::SamplingTooCoarse { .. })));
}

#[test]
fn expansion_examples() {
    let g = Grid::new(1, 32, TWO_PI).unwrap();
    let dt = 1e-3;
    let dense = uniform_times(0.2, 201);
    let dense_lim = solve_porous_medium(
        &ScalarField::from_fn(&g, |x| 1.0 + 0.05 * x[0].cos()),
        &LimitParams::new(0.2).with_dt(dt),
        law(),
        &dense,
    )
    .unwrap();
    let report = uniform_times(0.2, 3);
    let r0 = ScalarField::from_fn(&g, |x| (2.0 * x[0]).cos());
    let corr = solve_corrector(&dense_lim, &r0, dt, law(), Scheme::Ars222, &report).unwrap();
    let zero = solve_corrector(&dense_lim, &ScalarField::zeros(&g), dt, law(), Scheme::Ars222, &report).unwrap();
    let lim = dense_lim.restrict_to(&report).unwrap();

    let at_zero = expand(&lim, &corr, 0.0).unwrap();
    for (i, s) in at_zero.states.iter().enumerate() {
        assert_eq!(s.rho.sub(&lim.rho.states[i]).max_abs(), 0.0);
        assert_eq!(s.q.sub(&lim.q[i]).max_abs(), 0.0);
    }

    let a = expand(&lim, &zero, 0.3).unwrap();
    assert!(a.states.iter().zip(&lim.rho.states).all(|(s, r)| s.rho.sub(r).max_abs() == 0.0));

    let eps = 0.07;
    let a = expand(&lim, &corr, eps).unwrap();
    for (i, s) in a.states.iter().enumerate() {
        let lhs = sobolev_norm(&s.rho.sub(&lim.rho.states[i]), 1.0);
        let rhs = eps * sobolev_norm(&corr.rho1.states[i], 1.0);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    let misaligned = lim.restrict_to(&report[..2]).unwrap();
    assert!(matches!(expand(&misaligned, &corr, eps), Err(Error::Alignment(_))));
}

// Euler–Maxwell

fn grid3(n: usize) -> Grid {
    Grid::new(3, n, TWO_PI).unwrap()
}

#[test]
fn em_equilibrium_is_a_fixed_point() {
    let g = grid3(8);
    let eq = EMState::equilibrium(&g, [0.0, 0.0, 1.0]).unwrap();
    let params = EMParams::new(0.1, [0.0, 0.0, 1.0], 1.0);
    let s = em_step(&eq, 1e-3, &params, &law()).unwrap();
    assert!(s.rho.shift(-1.0).max_abs() < 1e-15);
    assert!(s.q.max_abs() < 1e-15 && s.e.max_abs() < 1e-15);
    assert!(s.b.sub(&eq.b).max_abs() < 1e-15);
}

#[test]
fn rotation_is_an_isometry() {
    let g = grid3(8);
    let e = VectorField::from_fn(&g, |x| [x[1].sin(), (x[2] + x[0]).cos(), 0.2]);
    let b = VectorField::from_fn(&g, |x| [(2.0 * x[2]).cos(), x[0].sin(), -0.7]);
    let energy = |e: &VectorField, b: &VectorField| sobolev_norm(e, 0.0).powi(2) + sobolev_norm(b, 0.0).powi(2);
    let before = energy(&e, &b);
    for (tau, eps) in [(0.01, 0.1), (1.3, 0.05), (10.0, 1.0)] {
        let (e2, b2) = maxwell_rotation(&e, &b, tau, eps);
        assert!(((energy(&e2, &b2) - before) / before).abs() < 1e-12);
    }
}

#[test]
fn em_constraints_hold_step_by_step() {
    let g = grid3(8);
    let b_ext = [0.0, 0.0, 1.0];
    let rho0 = ScalarField::from_fn(&g, |x| 1.0 + 0.05 * (x[0].cos() + (x[1] + x[2]).sin()));
    let u0 = VectorField::from_fn(&g, |x| [0.1 * x[1].cos(), 0.1 * x[2].sin(), 0.05 * x[0].cos()]);
    let mut s = make_em_initial(&rho0, &u0, b_ext).unwrap();
    let params = EMParams::new(0.5, b_ext, 1.0);
    let mut worst_gauss: f64 = 0.0;
    for _ in 0..1000 {
        s = em_step(&s, 1e-3, &params, &law()).unwrap();
        worst_gauss = worst_gauss.max(s.gauss_residual());
    }
    assert!(worst_gauss < 1e-10, "gauss residual {worst_gauss:e}");
    assert!(s.div_b() < 1e-12, "div B {:e}", s.div_b());
}

#[test]
fn em_zero_perturbation_and_self_convergence() {
    let g = grid3(8);
    let b_ext = [0.0, 0.0, 1.0];
    let eq = EMState::equilibrium(&g, b_ext).unwrap();
    let run = solve_em(eq.clone(), &EMParams::new(0.3, b_ext, 0.1), law(), &uniform_times(0.1, 3)).unwrap();
    for s in &run.trajectory.states {
        assert!(s.rho.shift(-1.0).max_abs() < 1e-15 && s.q.max_abs() < 1e-15);
    }

    let rho0 = ScalarField::from_fn(&g, |x| 1.0 + 0.05 * (x[0].cos() + x[1].sin()));
    let u0 = VectorField::from_fn(&g, |x| [0.1 * x[1].cos(), 0.1 * x[2].sin(), 0.1 * x[0].sin()]);
    let init = make_em_initial(&rho0, &u0, b_ext).unwrap();
    let rho_at = |dt: f64| {
        let p = EMParams::new(0.5, b_ext, 0.1).with_dt(dt);
        solve_em(init.clone(), &p, law(), &[0.0, 0.1]).unwrap().trajectory.last().unwrap().rho.clone()
    };
    let r: Vec<ScalarField> = [4e-3, 2e-3, 1e-3].iter().map(|&dt| rho_at(dt)).collect();
    let order = (sobolev_norm(&r[0].sub(&r[1]), 0.0) / sobolev_norm(&r[1].sub(&r[2]), 0.0)).log2();
    assert!(order >= 1.0, "order {order}");
}

#[test]
fn make_em_initial_examples() {
    let g = grid3(8);
    let zero_u = VectorField::zeros(&g);
    let s = make_em_initial(&ScalarField::constant(&g, 1.0), &zero_u, [0.0, 0.0, 1.0]).unwrap();
    assert_eq!(s.e.max_abs(), 0.0);

    let delta = 0.02;
    let rho0 = ScalarField::from_fn(&g, |x| 1.0 + delta * x[0].cos());
    let s = make_em_initial(&rho0, &zero_u, [0.0, 0.0, 1.0]).unwrap();
    // E₀ = Λ⁻²∇ρ₀ = −δ sin x₁ ê₁, so that div E₀ = 1 − ρ₀
    let want = VectorField::from_fn(&g, |x| [-delta * x[0].sin(), 0.0, 0.0]);
    assert!(s.e.sub(&want).max_abs() < 1e-14);
    assert!(divergence(&s.e).sub(&rho0.scale(-1.0).shift(1.0)).max_abs() < 1e-14);

    for seed in 0..3 {
        let rho0 = random_field(&g, 2, 0.1, seed).shift(1.0);
        let rho0 = rho0.shift(1.0 - rho0.mean());
        let s = make_em_initial(&rho0, &zero_u, [0.3, 0.0, 1.0]).unwrap();
        assert!(s.gauss_residual() < 1e-12);
        assert!(s.div_b() < 1e-12);
    }

    let shifted = rho0.shift(0.1);
    assert!(matches!(make_em_initial(&shifted, &zero_u, [0.0; 3]), Err(Error::MeanNotOne { .. })));
}

#[test]
fn drift_diffusion_examples() {
    let g = grid3(8);
    let times = uniform_times(0.5, 6);

    let flat = solve_drift_diffusion(&ScalarField::constant(&g, 1.0), &EMLimitParams::new(0.5), law(), &times).unwrap();
    for i in 0..flat.rho.len() {
        assert_eq!(flat.rho.states[i].shift(-1.0).max_abs(), 0.0);
        assert_eq!(flat.e_star(i).max_abs(), 0.0);
        assert_eq!(flat.q_star(i).max_abs(), 0.0);
    }

    let delta = 1e-3;
    let rho0 = ScalarField::from_fn(&g, |x| 1.0 + delta * x[0].cos());
    let lim = solve_drift_diffusion(&rho0, &EMLimitParams::new(0.5), law(), &times).unwrap();
    let want = ScalarField::from_fn(&g, |x| delta * (-3.0f64 * 0.5).exp() * x[0].cos());
    let got = lim.rho.last().unwrap().shift(-1.0);
    let rel = sobolev_norm(&got.sub(&want), 0.0) / sobolev_norm(&want, 0.0);
    assert!(rel < 1e-2, "relative deviation {rel:e}");
    assert!(lim.max_mass_drift < 1e-13);

    let off = rho0.shift(0.01);
    assert!(matches!(
        solve_drift_diffusion(&off, &EMLimitParams::new(0.5), law(), &times),
        Err(Error::MeanNotOne { .. })
    ));
}

#[test]
fn em_corrector_examples() {
    let g = grid3(8);
    let dt = 2e-3;
    let dense = uniform_times(0.2, 101);
    let report = uniform_times(0.2, 3);
    let rho0 = ScalarField::from_fn(&g, |x| 1.0 + 0.05 * (x[0].cos() + (x[1] - x[2]).sin()));
    let lim = solve_drift_diffusion(&rho0, &EMLimitParams::new(0.2).with_dt(dt), law(), &dense).unwrap();

    let none = solve_em_corrector(&lim, [0.0; 3], dt, Scheme::Ars222, &report, None).unwrap();
    assert!(none.rho1.states.iter().all(|r| r.max_abs() == 0.0));
    assert!(none.e1.iter().all(|e| e.max_abs() == 0.0));
    assert!(none.q1.iter().all(|q| q.max_abs() < 1e-15));
    assert!(none.b1.iter().skip(1).any(|b| b.max_abs() > 1e-6), "B₁ is driven by curl q*");

    let b = [0.2, -0.1, 1.0];
    let one = solve_em_corrector(&lim, b, dt, Scheme::Ars222, &report, None).unwrap();
    let two = solve_em_corrector(&lim, [0.4, -0.2, 2.0], dt, Scheme::Ars222, &report, None).unwrap();
    assert!(one.rho1.states.last().unwrap().max_abs() > 1e-6);
    for (a, b) in one.rho1.states.iter().zip(&two.rho1.states) {
        assert!(b.sub(&a.scale(2.0)).max_abs() < 1e-12);
    }
}

#[test]
fn corrector_magnetic_field_of_a_shear_flux() {
    let g = grid3(8);
    let q = VectorField::from_fn(&g, |x| [0.0, 0.0, x[0].cos()]);
    let b1 = inv_lap_curl(&q).unwrap().scale(-1.0);
    let want = VectorField::from_fn(&g, |x| [0.0, -x[0].sin(), 0.0]);
    assert!(b1.sub(&want).max_abs() < 1e-14);
}
