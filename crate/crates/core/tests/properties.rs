use std::collections::BTreeMap;

use proptest::prelude::*;

use relaxlab::config::{parse_config_str, ExperimentConfig, System};
use relaxlab::data::TWO_PI;
use relaxlab::harness::{fit_points, ErrorRow, ErrorTable, InitialLayer, MetricValue};
use relaxlab::report::{csv_string, parse_csv};
use relaxlab::spectral::{divergence, gradient, inv_lap_gradient, sobolev_norm, Grid, ScalarField, VectorField};

fn trig_field(g: &Grid, coeffs: &[(i32, f64, f64)]) -> ScalarField {
    let coeffs = coeffs.to_vec();
    ScalarField::from_fn(g, move |x| {
        coeffs.iter().map(|&(k, a, b)| a * (f64::from(k) * x[0]).cos() + b * (f64::from(k) * x[0]).sin()).sum()
    })
}

fn modes() -> impl Strategy<Value = Vec<(i32, f64, f64)>> {
    prop::collection::vec((1i32..8, -1.0f64..1.0, -1.0f64..1.0), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fitted_slope_ignores_scaling(slope in 0.3f64..3.0, scale in 1e-3f64..1e3, base in 0.05f64..0.5) {
        let eps: Vec<f64> = (0..4).map(|i| base / 2f64.powi(i)).collect();
        let vals: Vec<f64> = eps.iter().map(|e| e.powf(slope)).collect();
        let scaled: Vec<f64> = vals.iter().map(|v| v * scale).collect();
        let a = fit_points("m", &eps, &vals).unwrap();
        let b = fit_points("m", &eps, &scaled).unwrap();
        prop_assert!((a.slope - slope).abs() < 1e-9);
        prop_assert!((a.slope - b.slope).abs() < 1e-9);
        prop_assert!((b.intercept - a.intercept - scale.ln()).abs() < 1e-9);
    }

    #[test]
    fn sobolev_norm_is_homogeneous(m in modes(), c in -10.0f64..10.0, s in -1.0f64..3.0) {
        let g = Grid::new(1, 32, TWO_PI).unwrap();
        let f = trig_field(&g, &m);
        let (a, b) = (sobolev_norm(&f.scale(c), s), c.abs() * sobolev_norm(&f, s));
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn gradient_is_linear(m1 in modes(), m2 in modes(), a in -3.0f64..3.0) {
        let g = Grid::new(1, 32, TWO_PI).unwrap();
        let (f, h) = (trig_field(&g, &m1), trig_field(&g, &m2));
        let lhs = gradient(&f.axpy(a, &h));
        let rhs = gradient(&f).axpy(a, &gradient(&h));
        prop_assert!(lhs.sub(&rhs).max_abs() < 1e-11);
    }

    #[test]
    fn inverse_laplacian_gradient_inverts_divergence(m in modes()) {
        let g = Grid::new(1, 32, TWO_PI).unwrap();
        let f = trig_field(&g, &m);
        let back = divergence(&inv_lap_gradient(&f).unwrap()).add(&f);
        prop_assert!(back.max_abs() < 1e-12);
    }

    #[test]
    fn layer_factor_is_a_semigroup(eps in 0.01f64..1.0, t1 in 0.0f64..0.5, t2 in 0.0f64..0.5) {
        let g = Grid::new(1, 8, 1.0).unwrap();
        let l = InitialLayer::new(VectorField::zeros(&g), eps).unwrap();
        let prod = l.factor(t1).unwrap() * l.factor(t2).unwrap();
        prop_assert!((l.factor(t1 + t2).unwrap() - prod).abs() <= 1e-15);
        prop_assert!(l.factor(t1 + t2).unwrap() <= l.factor(t1).unwrap());
    }

    #[test]
    fn csv_round_trips_bit_for_bit(
        rows in prop::collection::btree_map(1u32..1000, prop::collection::vec((1e-300f64..1e300, 0.0f64..1.0), 3), 1..6),
        t in 0.1f64..10.0,
    ) {
        let mut table = ErrorTable::new();
        for (k, vals) in &rows {
            let mut metrics = BTreeMap::new();
            for (i, &(value, tail)) in vals.iter().enumerate() {
                metrics.insert(format!("metric_{i}"), MetricValue { value, tail });
            }
            table.insert(ErrorRow { eps: f64::from(*k) / 1000.0, m: 0, t_final: t, metrics });
        }
        let text = csv_string(&table);
        prop_assert_eq!(text.lines().count(), 1 + 3 * rows.len());
        let back = parse_csv(&text).unwrap();
        prop_assert_eq!(back, table);
    }

    #[test]
    fn config_round_trips(
        n_exp in 5u32..10,
        m in 2u32..6,
        t_final in 0.1f64..5.0,
        ladder_len in 3usize..6,
        top in 0.1f64..1.0,
        seed in 0u64..=i64::MAX as u64,
        amplitude in 0.001f64..0.2,
    ) {
        let mut cfg = ExperimentConfig::defaults(System::Euler);
        cfg.grid.n = 1 << n_exp;
        cfg.m = m;
        cfg.t_final = t_final;
        cfg.ladder = (0..ladder_len).map(|i| top / 2f64.powi(i as i32)).collect();
        cfg.seed = Some(seed);
        cfg.data.amplitude = amplitude;
        cfg.validate().unwrap();
        let back = parse_config_str(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn oversized_seed_is_rejected(seed in (i64::MAX as u64 + 1)..=u64::MAX) {
        let mut cfg = ExperimentConfig::defaults(System::Euler);
        cfg.seed = Some(seed);
        prop_assert!(cfg.validate().is_err());
    }
}
