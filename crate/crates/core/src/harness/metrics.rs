use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::euler::{EulerState, PressureLaw};
use crate::harness::InitialLayer;
use crate::limit::{CorrectorBundle, LimitBundle};
use crate::maxwell::{EMCorrectorBundle, EMLimitBundle, EMState};
use crate::spectral::{gradient_sobolev_norm, hom_sobolev_norm, sobolev_norm, Grid, ScalarField, VectorField};
use crate::stepping::{check_aligned, trapezoid, Trajectory};

/// One metric: its value over `[0, T]` and an estimate of what the
/// truncated part `[T, ∞)` would add.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub value: f64,
    pub tail: f64,
}

/// All metrics of one ε-run. Time-integrated metrics are reported as
/// `(∫₀^T ‖·‖² dt)^{1/2}`, so their ε-slopes compare directly with sup metrics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRow {
    pub eps: f64,
    pub m: u32,
    pub t_final: f64,
    pub metrics: BTreeMap<String, MetricValue>,
}

impl ErrorRow {
    pub fn get(&self, metric: &str) -> Option<f64> {
        self.metrics.get(metric).map(|v| v.value)
    }
}

/// Rows sorted by ε, largest first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub rows: Vec<ErrorRow>,
}

impl ErrorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, row: ErrorRow) {
        let pos = self.rows.partition_point(|r| r.eps > row.eps);
        self.rows.insert(pos, row);
    }

    /// Metric names present in every row.
    pub fn metric_names(&self) -> Vec<String> {
        let Some(first) = self.rows.first() else {
            return Vec::new();
        };
        first
            .metrics
            .keys()
            .filter(|k| self.rows.iter().all(|r| r.metrics.contains_key(*k)))
            .cloned()
            .collect()
    }

    pub fn eps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.eps).collect()
    }
}

/// Slowest linear decay rate `λ` of the limit dynamics; a time integrand
/// `‖e(t)‖²` is extrapolated past `T` as `‖e(T)‖² e^{−2λ(t−T)}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub rate: f64,
}

impl TailModel {
    /// `λ = p'(1)k₀²` for the porous-medium equation.
    pub fn porous_medium(grid: &Grid, law: &PressureLaw) -> Self {
        let k0 = grid.fundamental();
        Self { rate: law.dp_at_equilibrium() * k0 * k0 }
    }

    /// `λ = p'(1)k₀² + 1` for the drift-diffusion system.
    pub fn drift_diffusion(grid: &Grid, law: &PressureLaw) -> Self {
        let k0 = grid.fundamental();
        Self { rate: law.dp_at_equilibrium() * k0 * k0 + 1.0 }
    }
}

struct RowBuilder<'a> {
    times: &'a [f64],
    tail: TailModel,
    metrics: BTreeMap<String, MetricValue>,
}

impl RowBuilder<'_> {
    fn sup(&mut self, name: &str, values: &[f64]) {
        let value = values.iter().copied().fold(0.0, f64::max);
        self.metrics.insert(name.to_string(), MetricValue { value, tail: 0.0 });
    }

    /// `values` are the norms, not their squares.
    fn l2t(&mut self, name: &str, values: &[f64]) {
        let sq: Vec<f64> = values.iter().map(|v| v * v).collect();
        let integral = trapezoid(self.times, &sq);
        let last = sq.last().copied().unwrap_or(0.0);
        let extra = if self.tail.rate > 0.0 { last / (2.0 * self.tail.rate) } else { 0.0 };
        let value = integral.sqrt();
        self.metrics.insert(
            name.to_string(),
            MetricValue {
                value,
                tail: (integral + extra).sqrt() - value,
            },
        );
    }

    fn finish(self, eps: f64, m: u32) -> ErrorRow {
        ErrorRow {
            eps,
            m,
            t_final: self.times.last().copied().unwrap_or(0.0),
            metrics: self.metrics,
        }
    }
}

fn check_m(m: u32, least: u32) -> Result<()> {
    if m < least {
        return Err(Error::InvalidParameter(format!("regularity index m = {m} must be >= {least}")));
    }
    Ok(())
}

fn mean_free_gap(a: &ScalarField, b: &ScalarField) -> Result<()> {
    hom_sobolev_norm(&a.sub(b), -1.0).map(|_| ())
}

/// Density and momentum errors of a relaxation run against the porous-medium
/// limit at index `s = m − 1`, with the layer subtracted from the momentum:
///
/// * `sup_rho_Hm1`: `sup_t ‖ρ^ε − ρ*‖_{H^{m−1}}`
/// * `l2t_grad_rho_Hm1`: `(∫‖∇(ρ^ε − ρ*)‖²_{H^{m−1}})^{1/2}`
/// * `l2t_q_layer_Hm1`: `(∫‖q^ε − q* − q_I‖²_{H^{m−1}})^{1/2}`
/// * `l2t_q_Hm1`: the same without the layer
/// * `l2t_rho_L2`: `(∫‖ρ^ε − ρ*‖²_{L²})^{1/2}`; needs a mean-free initial gap
pub fn error_report_thm11(
    euler: &Trajectory<EulerState>,
    limit: &LimitBundle,
    layer: &InitialLayer,
    m: u32,
    tail: TailModel,
) -> Result<ErrorRow> {
    check_m(m, 1)?;
    check_aligned(&euler.times, limit.times())?;
    if let (Some(e0), Some(l0)) = (euler.first(), limit.rho.first()) {
        mean_free_gap(&e0.rho, l0)?;
    }
    let s = f64::from(m - 1);
    let n = euler.len();
    let (mut sup, mut grad, mut ql, mut q, mut l2) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, (t, st)) in euler.iter().enumerate() {
        let dr = st.rho.sub(&limit.rho.states[i]);
        let dq = st.q.sub(&limit.q[i]);
        sup.push(sobolev_norm(&dr, s));
        grad.push(gradient_sobolev_norm(&dr, s));
        l2.push(sobolev_norm(&dr, 0.0));
        ql.push(sobolev_norm(&dq.axpy(-layer.factor(t)?, layer.q0()), s));
        q.push(sobolev_norm(&dq, s));
    }
    let mut b = RowBuilder { times: &euler.times, tail, metrics: BTreeMap::new() };
    b.sup("sup_rho_Hm1", &sup);
    b.l2t("l2t_grad_rho_Hm1", &grad);
    b.l2t("l2t_q_layer_Hm1", &ql);
    b.l2t("l2t_q_Hm1", &q);
    b.l2t("l2t_rho_L2", &l2);
    Ok(b.finish(layer.eps(), m))
}

/// Errors against the first-order expansion at index `s = m − 2`:
///
/// * `sup_rho_exp_Hm2`: `sup_t ‖ρ^ε − ρ* − ερ₁‖_{H^{m−2}}`
/// * `l2t_grad_rho_exp_Hm2`: `(∫‖∇(ρ^ε − ρ* − ερ₁)‖²_{H^{m−2}})^{1/2}`
/// * `l2t_q_Hm2`: `(∫‖q^ε − q*‖²_{H^{m−2}})^{1/2}`
/// * `l2t_q_exp_Hm2`, `sup_q_exp_Hm2`: integral and sup of `q^ε − q* − εq₁`
///
/// Fails with `NotWellPrepared` when `‖ρ₀^ε − ρ₀* − ερ₁,₀‖ > ε²` or
/// `‖q₀^ε − q*(0)‖ > ε` (both in `H^{m−2}`).
pub fn error_report_thm12(
    euler: &Trajectory<EulerState>,
    limit: &LimitBundle,
    corrector: &CorrectorBundle,
    eps: f64,
    m: u32,
    tail: TailModel,
) -> Result<ErrorRow> {
    check_m(m, 2)?;
    check_aligned(&euler.times, limit.times())?;
    check_aligned(&euler.times, corrector.times())?;
    let s = f64::from(m - 2);
    if let Some(e0) = euler.first() {
        let rho_res = sobolev_norm(&e0.rho.sub(&limit.rho.states[0]).axpy(-eps, &corrector.rho1.states[0]), s);
        let q_res = sobolev_norm(&e0.q.sub(&limit.q[0]), s);
        if rho_res > eps * eps * (1.0 + 1e-9) {
            return Err(Error::NotWellPrepared(format!(
                "initial density residual {rho_res:e} exceeds eps² = {:e}",
                eps * eps
            )));
        }
        if q_res > eps * (1.0 + 1e-9) {
            return Err(Error::NotWellPrepared(format!("initial momentum gap {q_res:e} exceeds eps = {eps:e}")));
        }
    }
    let n = euler.len();
    let (mut sup, mut grad, mut q, mut qe) =
        (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (i, st) in euler.states.iter().enumerate() {
        let dr = st.rho.sub(&limit.rho.states[i]).axpy(-eps, &corrector.rho1.states[i]);
        let dq = st.q.sub(&limit.q[i]);
        sup.push(sobolev_norm(&dr, s));
        grad.push(gradient_sobolev_norm(&dr, s));
        q.push(sobolev_norm(&dq, s));
        qe.push(sobolev_norm(&dq.axpy(-eps, &corrector.q1[i]), s));
    }
    let mut b = RowBuilder { times: &euler.times, tail, metrics: BTreeMap::new() };
    b.sup("sup_rho_exp_Hm2", &sup);
    b.l2t("l2t_grad_rho_exp_Hm2", &grad);
    b.l2t("l2t_q_Hm2", &q);
    b.l2t("l2t_q_exp_Hm2", &qe);
    b.sup("sup_q_exp_Hm2", &qe);
    Ok(b.finish(eps, m))
}

/// Euler–Maxwell errors against the drift-diffusion limit (`B* = B^e`):
///
/// * `sup_rho_Hm1`, `sup_E_Hm1`, `sup_B_Hm1`: sup-in-time `H^{m−1}` errors
/// * `l2t_grad_rho_Hm1`, `l2t_E_Hm1`, `l2t_B_Hm1`: time-integrated errors
/// * `l2t_q_layer_Hm2`: `(∫‖q^ε − q* − q_I‖²_{H^{m−2}})^{1/2}`
///
/// With a corrector, also `sup_rho_exp_Hm2` and `sup_E_exp_Hm2` against
/// `ρ* + ερ₁`, `E* + εE₁`.
pub fn error_report_em(
    em: &Trajectory<EMState>,
    limit: &EMLimitBundle,
    corrector: Option<&EMCorrectorBundle>,
    layer: &InitialLayer,
    b_ext: [f64; 3],
    m: u32,
    tail: TailModel,
) -> Result<ErrorRow> {
    check_m(m, 2)?;
    check_aligned(&em.times, limit.times())?;
    if let Some(c) = corrector {
        check_aligned(&em.times, c.times())?;
    }
    let Some(first) = em.first() else {
        return Err(Error::InsufficientPoints { needed: 1, got: 0 });
    };
    let b_star = VectorField::constant(first.grid(), &b_ext)?;
    let (s1, s2) = (f64::from(m - 1), f64::from(m - 2));
    let eps = layer.eps();
    let mut cols: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    let mut push = |k: &'static str, v: f64| cols.entry(k).or_default().push(v);
    for (i, (t, st)) in em.iter().enumerate() {
        let dr = st.rho.sub(&limit.rho.states[i]);
        let e_star = limit.e_star(i);
        let de = st.e.sub(&e_star);
        let db = st.b.sub(&b_star);
        let dq = st.q.sub(&limit.q_star(i)).axpy(-layer.factor(t)?, layer.q0());
        push("sup_rho_Hm1", sobolev_norm(&dr, s1));
        push("sup_E_Hm1", sobolev_norm(&de, s1));
        push("sup_B_Hm1", sobolev_norm(&db, s1));
        push("l2t_grad_rho_Hm1", gradient_sobolev_norm(&dr, s1));
        push("l2t_q_layer_Hm2", sobolev_norm(&dq, s2));
        if let Some(c) = corrector {
            push("sup_rho_exp_Hm2", sobolev_norm(&dr.axpy(-eps, &c.rho1.states[i]), s2));
            push("sup_E_exp_Hm2", sobolev_norm(&de.axpy(-eps, &c.e1[i]), s2));
        }
    }
    let mut b = RowBuilder { times: &em.times, tail, metrics: BTreeMap::new() };
    for (name, vals) in &cols {
        if name.starts_with("sup_") {
            b.sup(name, vals);
        } else {
            b.l2t(name, vals);
        }
    }
    b.l2t("l2t_E_Hm1", &cols["sup_E_Hm1"]);
    b.l2t("l2t_B_Hm1", &cols["sup_B_Hm1"]);
    Ok(b.finish(eps, m))
}
