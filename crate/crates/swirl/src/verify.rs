//! Machine-checkable mirrors of the continuous identities: per-step energy
//! and BD residuals, Grönwall envelopes, manufactured-solution convergence,
//! cross-formulation agreement, large-time behavior and the dissipation
//! coefficient experiment.

use crate::error::{Result, SimError};
use crate::functionals::{
    basic_dissipation, basic_energy, bd_dissipation, bd_energy, bd_source, bd_young_bound,
    record, DiagnosticsRecord,
};
use crate::initcond::{normalize_and_sample, preset};
use crate::model::{rpow_nm1, Formulation, MassGrid, SimParams, State};
use crate::solver::{advance_to, stable_dt, step, step_primitive_forced, ForcingFields};

/// Discrete mirror of the energy identity: (E₁ − E₀)/dt plus the
/// trapezoidal average of the dissipation. Zero for the exact solution;
/// measures splitting and discretization error for the scheme.
pub fn energy_residual(s0: &State, s1: &State, dt: f64, params: &SimParams) -> f64 {
    (basic_energy(s1, params) - basic_energy(s0, params)) / dt
        + 0.5 * (basic_dissipation(s0, params) + basic_dissipation(s1, params))
}

/// Discrete mirror of the BD identity dE/dτ + D_bd = S_bd.
pub fn bd_residual(s0: &State, s1: &State, dt: f64, params: &SimParams) -> f64 {
    (bd_energy(s1, params) - bd_energy(s0, params)) / dt
        + 0.5 * (bd_dissipation(s0, params) + bd_dissipation(s1, params))
        - 0.5 * (bd_source(s0, params) + bd_source(s1, params))
}

/// Max |s(·,τ) − s(·,0)| over cells; exactly zero by construction.
pub fn entropy_invariance(initial: &State, final_state: &State) -> f64 {
    initial
        .s
        .iter()
        .zip(&final_state.s)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max)
}

/// Per-step residual time series of one run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ResidualSeries {
    pub taus: Vec<f64>,
    pub dts: Vec<f64>,
    pub energy_residuals: Vec<f64>,
    pub bd_residuals: Vec<f64>,
    pub max_abs_energy: f64,
    pub max_abs_bd: f64,
    /// Σ |residual| dt over the run.
    pub l1_energy: f64,
    pub l1_bd: f64,
}

/// Runs to `t_end` collecting both residuals at every step.
pub fn residual_series(initial: State, t_end: f64, params: &SimParams) -> Result<ResidualSeries> {
    let mut taus = Vec::new();
    let mut dts = Vec::new();
    let mut e_res = Vec::new();
    let mut b_res = Vec::new();
    advance_to(initial, t_end, params, |ev| {
        taus.push(ev.state.tau);
        dts.push(ev.dt);
        e_res.push(energy_residual(ev.prev, ev.state, ev.dt, params));
        b_res.push(bd_residual(ev.prev, ev.state, ev.dt, params));
    })?;
    let max_abs_energy = e_res.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let max_abs_bd = b_res.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let l1_energy = e_res.iter().zip(&dts).map(|(r, d)| r.abs() * d).sum();
    let l1_bd = b_res.iter().zip(&dts).map(|(r, d)| r.abs() * d).sum();
    Ok(ResidualSeries {
        taus,
        dts,
        energy_residuals: e_res,
        bd_residuals: b_res,
        max_abs_energy,
        max_abs_bd,
        l1_energy,
        l1_bd,
    })
}

/// Runs to `t_end` recording diagnostics every `every_steps` steps (plus the
/// initial and final states).
pub fn run_recording(
    initial: State,
    t_end: f64,
    params: &SimParams,
    every_steps: u64,
) -> Result<(State, Vec<DiagnosticsRecord>)> {
    let mut records = vec![record(&initial, params, None)];
    let mut last_tau = initial.tau;
    let final_state = advance_to(initial, t_end, params, |ev| {
        if (ev.step_index + 1) % every_steps == 0 || ev.state.tau >= t_end {
            records.push(record(ev.state, params, Some((ev.prev, ev.dt))));
            last_tau = ev.state.tau;
        }
    })?;
    if final_state.tau > last_tau {
        records.push(record(&final_state, params, None));
    }
    Ok((final_state, records))
}

/// Least-squares slope of ln(err) against ln(scale), with the fit residual.
pub fn fit_order(scales: &[f64], errors: &[f64]) -> (f64, f64) {
    assert_eq!(scales.len(), errors.len());
    let pts: Vec<(f64, f64)> = scales
        .iter()
        .zip(errors)
        .map(|(&h, &e)| (h.ln(), e.max(1e-300).ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).powi(2))
        .sum::<f64>()
        .sqrt();
    (slope, residual)
}

/// Grönwall-envelope consistency report for one run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EnvelopeReport {
    pub taus: Vec<f64>,
    pub e_bd: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Measured rate C* = max (dE_bd/dτ) / (1 + ‖u‖² + ‖w‖²).
    pub c_star: f64,
    pub pass: bool,
}

/// Measures the Grönwall constant from the recorded series and checks
/// E_bd(τ) ≤ (E_bd(0) + C*τ)·e^{2C*τ} at every sample.
pub fn gronwall_envelope(records: &[DiagnosticsRecord]) -> Result<EnvelopeReport> {
    if records.is_empty() {
        return Err(SimError::InvalidParams("empty diagnostics series".into()));
    }
    let taus: Vec<f64> = records.iter().map(|r| r.tau).collect();
    let e_bd: Vec<f64> = records.iter().map(|r| r.e_bd).collect();
    let mut c_star = 0.0f64;
    for k in 1..records.len() {
        let d_tau = taus[k] - taus[k - 1];
        if d_tau <= 0.0 {
            continue;
        }
        let rate = (e_bd[k] - e_bd[k - 1]) / d_tau;
        let denom = 1.0
            + records[k - 1].l4_u * records[k - 1].l4_u
            + records[k - 1].l4_w * records[k - 1].l4_w;
        c_star = c_star.max(rate / denom);
    }
    c_star = c_star.max(0.0);
    let t0 = taus[0];
    let e0 = e_bd[0];
    let envelope: Vec<f64> = taus
        .iter()
        .map(|&t| (e0 + c_star * (t - t0)) * (2.0 * c_star * (t - t0)).exp())
        .collect();
    let pass = e_bd
        .iter()
        .zip(&envelope)
        .all(|(&e, &env)| e <= env * (1.0 + 1e-9) + 1e-12);
    Ok(EnvelopeReport {
        taus,
        e_bd,
        envelope,
        c_star,
        pass,
    })
}

/// Analytic profiles driving the manufactured-solution harness; they must be
/// smooth on a neighborhood of [0,1] × [0, t_end], positive in ρ, with u
/// vanishing at y = 0, 1.
pub struct ManufacturedSolution {
    pub rho: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub u: Box<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    pub s: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl ManufacturedSolution {
    /// Decaying cosine density with a sine velocity pulse and a gentle
    /// entropy profile.
    pub fn default_smooth() -> Self {
        use std::f64::consts::PI;
        ManufacturedSolution {
            rho: Box::new(|y, tau| 1.0 + 0.1 * (-tau).exp() * (PI * y).cos()),
            u: Box::new(|y, tau| 0.1 * (PI * y).sin() * (-tau).exp()),
            s: Box::new(|y| 0.2 + 0.1 * (PI * y).sin()),
        }
    }

    /// Constant state: zero forcing, preserved exactly by the scheme.
    pub fn constant() -> Self {
        ManufacturedSolution {
            rho: Box::new(|_, _| 1.0),
            u: Box::new(|_, _| 0.0),
            s: Box::new(|_| 0.0),
        }
    }

    /// Samples the profiles at time tau onto an M-cell state.
    pub fn sample(&self, tau: f64, params: &SimParams) -> Result<State> {
        let m = params.cells;
        let grid = MassGrid::new(m);
        let rho: Vec<f64> = (0..m).map(|i| (self.rho)(grid.cell_center(i), tau)).collect();
        let s: Vec<f64> = (0..m).map(|i| (self.s)(grid.cell_center(i))).collect();
        let u: Vec<f64> = (0..=m).map(|j| (self.u)(grid.node(j), tau)).collect();
        if rho.iter().any(|&v| !(v > 0.0)) {
            return Err(SimError::Validation("manufactured density not positive".into()));
        }
        if u[0].abs() > 1e-12 || u[m].abs() > 1e-12 {
            return Err(SimError::Validation(
                "manufactured velocity must vanish at y = 0, 1".into(),
            ));
        }
        State::from_fields(tau, rho, s, u, params)
    }
}

/// 4th-order first derivative on a uniform grid, shifting the 5-point
/// stencil at the ends.
fn fd4(values: &[f64], k: usize, h: f64) -> f64 {
    let n = values.len();
    let c = 1.0 / (12.0 * h);
    if k >= 2 && k + 2 < n {
        c * (values[k - 2] - 8.0 * values[k - 1] + 8.0 * values[k + 1] - values[k + 2])
    } else if k < 2 {
        let f = &values[0..5];
        match k {
            0 => c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]),
            _ => c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]),
        }
    } else {
        let f = &values[n - 5..n];
        match n - 1 - k {
            0 => c * (3.0 * f[0] - 16.0 * f[1] + 36.0 * f[2] - 48.0 * f[3] + 25.0 * f[4]),
            _ => c * (-f[0] + 6.0 * f[1] - 18.0 * f[2] + 10.0 * f[3] - 3.0 * f[4]),
        }
    }
}

const MMS_REFINE: usize = 16;
const MMS_TAU_H: f64 = 1e-3;

/// Evaluates the continuity and momentum forcings that make the
/// manufactured profiles an exact solution, by high-order finite
/// differences on a 16×-finer auxiliary grid.
pub fn mms_forcing(sol: &ManufacturedSolution, tau: f64, params: &SimParams) -> ForcingFields {
    let n = params.dimension;
    let gamma = params.gamma;
    let m = params.cells;
    let k_fine = MMS_REFINE * m;
    let h = 1.0 / k_fine as f64;

    let rho_f: Vec<f64> = (0..=k_fine).map(|k| (sol.rho)(k as f64 * h, tau)).collect();
    let u_f: Vec<f64> = (0..=k_fine).map(|k| (sol.u)(k as f64 * h, tau)).collect();
    let s_f: Vec<f64> = (0..=k_fine).map(|k| (sol.s)(k as f64 * h)).collect();

    // radius from the cumulative specific volume (composite Simpson)
    let mut r_f = vec![0.0; k_fine + 1];
    let mut integral = 0.0;
    for k in 0..k_fine {
        let y_mid = (k as f64 + 0.5) * h;
        let g0 = 1.0 / rho_f[k];
        let gm = 1.0 / (sol.rho)(y_mid, tau);
        let g1 = 1.0 / rho_f[k + 1];
        integral += h / 6.0 * (g0 + 4.0 * gm + g1);
        r_f[k + 1] = crate::model::root_n(n as f64 * integral, n);
    }

    let phi_f: Vec<f64> = r_f.iter().map(|&r| rpow_nm1(r, n)).collect();
    let a_f: Vec<f64> = phi_f.iter().zip(&u_f).map(|(&p, &u)| p * u).collect();
    let p_f: Vec<f64> = rho_f
        .iter()
        .zip(&s_f)
        .map(|(&rho, &s)| rho.powf(gamma) * s.exp())
        .collect();
    let da_f: Vec<f64> = (0..=k_fine).map(|k| fd4(&a_f, k, h)).collect();
    let visc_f: Vec<f64> = rho_f
        .iter()
        .zip(&da_f)
        .map(|(&rho, &da)| 2.0 * rho * rho * da)
        .collect();

    let d_tau = |f: &dyn Fn(f64, f64) -> f64, y: f64| {
        (-f(y, tau + 2.0 * MMS_TAU_H) + 8.0 * f(y, tau + MMS_TAU_H) - 8.0 * f(y, tau - MMS_TAU_H)
            + f(y, tau - 2.0 * MMS_TAU_H))
            / (12.0 * MMS_TAU_H)
    };

    // continuity: f_c = ∂_τ ρ + ρ² ∂_y(r^{N−1}u) at cell centers
    let mut continuity = vec![0.0; m];
    for (i, fc) in continuity.iter_mut().enumerate() {
        let k = MMS_REFINE * i + MMS_REFINE / 2;
        let y = k as f64 * h;
        *fc = d_tau(&*sol.rho, y) + rho_f[k] * rho_f[k] * da_f[k];
    }

    // momentum: f_m = (1/r^{N−1}) ∂_τ u + ∂_y P − ∂_y[2ρ² ∂_y(r^{N−1}u)]
    //           + (2(N−1)/r) u ∂_y ρ at interior nodes
    let mut momentum = vec![0.0; m + 1];
    for (j, fm) in momentum.iter_mut().enumerate().take(m).skip(1) {
        let k = MMS_REFINE * j;
        let y = k as f64 * h;
        let dp = fd4(&p_f, k, h);
        let dvisc = fd4(&visc_f, k, h);
        let drho = fd4(&rho_f, k, h);
        let geom = 2.0 * (n as f64 - 1.0) / r_f[k] * u_f[k] * drho;
        *fm = d_tau(&*sol.u, y) / phi_f[k] + dp - dvisc + geom;
    }

    ForcingFields { continuity, momentum }
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceLevel {
    pub cells: usize,
    pub dt: f64,
    pub err_rho: f64,
    pub err_u: f64,
}

/// Observed orders of accuracy from the manufactured-solution study.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceReport {
    pub spatial: Vec<ConvergenceLevel>,
    pub spatial_order: f64,
    pub spatial_fit_residual: f64,
    pub temporal: Vec<ConvergenceLevel>,
    pub temporal_order: f64,
    pub temporal_fit_residual: f64,
}

fn l2_cells(a: &[f64], b: &[f64]) -> f64 {
    let dy = 1.0 / a.len() as f64;
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y) * dy)
        .sum::<f64>()
        .sqrt()
}

fn l2_nodes(a: &[f64], b: &[f64]) -> f64 {
    let m = a.len() - 1;
    let dy = 1.0 / m as f64;
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(j, (x, y))| {
            let w = if j == 0 || j == m { 0.5 * dy } else { dy };
            (x - y) * (x - y) * w
        })
        .sum::<f64>()
        .sqrt()
}

/// Runs the forced primitive scheme to `t_end` with a fixed dt.
fn mms_run(
    sol: &ManufacturedSolution,
    params: &SimParams,
    t_end: f64,
    n_steps: usize,
) -> Result<State> {
    let dt = t_end / n_steps as f64;
    let mut state = sol.sample(0.0, params)?;
    for _ in 0..n_steps {
        let forcing = mms_forcing(sol, state.tau, params);
        state = step_primitive_forced(&state, dt, params, Some(&forcing))?.0;
    }
    Ok(state)
}

/// Manufactured-solution convergence study: spatial orders from dyadic mesh
/// refinement at dt ∝ Δy², temporal orders from dt refinement against a
/// small-dt reference on the same mesh.
pub fn mms_convergence(
    params: &SimParams,
    sol: &ManufacturedSolution,
    spatial_levels: &[usize],
) -> Result<ConvergenceReport> {
    if spatial_levels.len() < 3 {
        return Err(SimError::InvalidParams(
            "convergence study needs at least 3 refinement levels".into(),
        ));
    }
    let t_end = 0.05;
    let mut spatial = Vec::new();
    for &m in spatial_levels {
        let mut p = params.clone();
        p.cells = m;
        let dy = 1.0 / m as f64;
        let dt_target = 0.25 * dy * dy;
        let n_steps = (t_end / dt_target).ceil() as usize;
        let dt = t_end / n_steps as f64;
        let end = mms_run(sol, &p, t_end, n_steps)?;
        let exact = sol.sample(t_end, &p)?;
        spatial.push(ConvergenceLevel {
            cells: m,
            dt,
            err_rho: l2_cells(&end.rho, &exact.rho),
            err_u: l2_nodes(&end.u, &exact.u),
        });
    }
    let dys: Vec<f64> = spatial.iter().map(|l| 1.0 / l.cells as f64).collect();
    let errs: Vec<f64> = spatial.iter().map(|l| l.err_rho + l.err_u).collect();
    let (spatial_order, spatial_fit_residual) = fit_order(&dys, &errs);

    // temporal study at fixed resolution
    let m_t = 64;
    let mut p_t = params.clone();
    p_t.cells = m_t;
    let t_end_t = 0.02;
    let step_counts = [16usize, 32, 64];
    let reference = mms_run(sol, &p_t, t_end_t, 1024)?;
    let mut temporal = Vec::new();
    for &n_steps in &step_counts {
        let end = mms_run(sol, &p_t, t_end_t, n_steps)?;
        temporal.push(ConvergenceLevel {
            cells: m_t,
            dt: t_end_t / n_steps as f64,
            err_rho: l2_cells(&end.rho, &reference.rho),
            err_u: l2_nodes(&end.u, &reference.u),
        });
    }
    let dts: Vec<f64> = temporal.iter().map(|l| l.dt).collect();
    let errs_t: Vec<f64> = temporal.iter().map(|l| l.err_rho + l.err_u).collect();
    let (temporal_order, temporal_fit_residual) = fit_order(&dts, &errs_t);

    Ok(ConvergenceReport {
        spatial,
        spatial_order,
        spatial_fit_residual,
        temporal,
        temporal_order,
        temporal_fit_residual,
    })
}

/// Gap between the two formulations at matched resolution.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AgreementLevel {
    pub cells: usize,
    pub gap: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AgreementReport {
    pub levels: Vec<AgreementLevel>,
    pub order: f64,
}

/// Runs both formulations from the same preset and measures the sup-norm
/// gap sup|ρ_prim − ρ_eff| + sup|u_prim − u_eff| at `t_end` per level.
pub fn scheme_agreement(
    params: &SimParams,
    preset_name: &str,
    preset_args: &[(String, f64)],
    t_end: f64,
    levels: &[usize],
) -> Result<AgreementReport> {
    let mut out = Vec::new();
    for &m in levels {
        let mut p = params.clone();
        p.cells = m;
        let profile = preset(preset_name, preset_args)?;
        let initial = normalize_and_sample(&profile, &p)?;
        // a fixed dt shared by both formulations, scaled with Δy
        let dt = 0.8 * stable_dt(&initial, &p);
        let n_steps = (t_end / dt).ceil() as usize;
        let dt = t_end / n_steps as f64;

        let mut prim = initial.clone();
        let mut eff = initial;
        let mut pp = p.clone();
        pp.formulation = Formulation::Primitive;
        let mut pe = p.clone();
        pe.formulation = Formulation::Effective;
        for _ in 0..n_steps {
            prim = step(&prim, dt, &pp)?.0;
            eff = step(&eff, dt, &pe)?.0;
        }
        let gap_rho = prim
            .rho
            .iter()
            .zip(&eff.rho)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        let gap_u = prim
            .u
            .iter()
            .zip(&eff.u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        out.push(AgreementLevel {
            cells: m,
            gap: gap_rho + gap_u,
        });
    }
    let dys: Vec<f64> = out.iter().map(|l| 1.0 / l.cells as f64).collect();
    let gaps: Vec<f64> = out.iter().map(|l| l.gap).collect();
    let (order, _) = fit_order(&dys, &gaps);
    Ok(AgreementReport { levels: out, order })
}

/// Large-time behavior report (isentropic runs only): the density flattens
/// to its mean and the weighted gradient norm decays. The monotonicity
/// verdicts are trend-based (quarter-means over the last half of the run).
#[derive(Debug, Clone, serde::Serialize)]
pub struct LargeTimeReport {
    pub final_sup_deviation: f64,
    pub final_grad_norm: f64,
    pub deviation_trending_down: bool,
    pub grad_trending_down: bool,
    pub pass: bool,
}

pub fn large_time_check(
    records: &[DiagnosticsRecord],
    isentropic: bool,
    dev_threshold: f64,
    grad_threshold: f64,
) -> Result<LargeTimeReport> {
    if records.len() < 8 {
        return Err(SimError::InvalidParams(
            "large-time check needs a longer diagnostics series".into(),
        ));
    }
    if !isentropic {
        return Err(SimError::InvalidParams(
            "large-time behavior applies to isentropic runs only".into(),
        ));
    }
    if records
        .iter()
        .any(|r| (r.s_max - r.s_min).abs() > f64::EPSILON)
    {
        return Err(SimError::InvalidParams(
            "diagnostics series is not isentropic".into(),
        ));
    }
    let dev: Vec<f64> = records
        .iter()
        .map(|r| {
            let mean = 1.0 / r.total_volume;
            (r.rho_max - mean).max(mean - r.rho_min)
        })
        .collect();
    let grad: Vec<f64> = records.iter().map(|r| r.l2_grad_rho_weighted).collect();

    let trend_down = |series: &[f64]| {
        let n = series.len();
        let half = &series[n / 2..];
        let q = half.len() / 2;
        if q == 0 {
            return true;
        }
        let mean_a = half[..q].iter().sum::<f64>() / q as f64;
        let mean_b = half[q..].iter().sum::<f64>() / (half.len() - q) as f64;
        mean_b <= mean_a * (1.0 + 1e-6) + 1e-12
    };

    let final_sup_deviation = *dev.last().unwrap();
    let final_grad_norm = *grad.last().unwrap();
    let deviation_trending_down = trend_down(&dev);
    let grad_trending_down = trend_down(&grad);
    let pass = final_sup_deviation < dev_threshold
        && final_grad_norm < grad_threshold
        && deviation_trending_down
        && grad_trending_down;
    Ok(LargeTimeReport {
        final_sup_deviation,
        final_grad_norm,
        deviation_trending_down,
        grad_trending_down,
        pass,
    })
}

/// Result of the N=3 dissipation-coefficient experiment: the candidate that
/// closes the discrete energy identity wins.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KappaReport {
    pub integrated_residual_kappa_2: f64,
    pub integrated_residual_kappa_4: f64,
    pub chosen_kappa: f64,
    pub separation_ratio: f64,
}

/// Runs a smooth N=3 bump and accumulates the time-integrated energy
/// residual under both κ candidates; the dynamics are κ-independent so one
/// run feeds both functionals.
pub fn kappa_resolution(base: &SimParams) -> Result<KappaReport> {
    let mut params = base.clone();
    params.dimension = 3;
    params.formulation = Formulation::Primitive;
    let profile = preset(
        "velocity_pulse",
        &[("amplitude".into(), 0.2), ("radius".into(), params.radius)],
    )?;
    let initial = normalize_and_sample(&profile, &params)?;

    let mut p2 = params.clone();
    p2.kappa_override = Some(2.0);
    let mut p4 = params.clone();
    p4.kappa_override = Some(4.0);

    let mut int2 = 0.0;
    let mut int4 = 0.0;
    advance_to(initial, 0.5, &params, |ev| {
        int2 += energy_residual(ev.prev, ev.state, ev.dt, &p2).abs() * ev.dt;
        int4 += energy_residual(ev.prev, ev.state, ev.dt, &p4).abs() * ev.dt;
    })?;

    let (chosen, ratio) = if int4 < int2 {
        (4.0, int2 / int4)
    } else {
        (2.0, int4 / int2)
    };
    Ok(KappaReport {
        integrated_residual_kappa_2: int2,
        integrated_residual_kappa_4: int4,
        chosen_kappa: chosen,
        separation_ratio: ratio,
    })
}

/// One named check of the verification suite.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub kappa: Option<KappaReport>,
    pub all_pass: bool,
}

impl VerifyReport {
    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Runs the full property suite: entropy invariance, volume conservation,
/// steady-state preservation, residual refinement for both identities,
/// isentropic BD monotonicity, scheme agreement, the Young split, and (for
/// N = 3) the dissipation-coefficient experiment.
pub fn run_verify_suite(params: &SimParams) -> Result<VerifyReport> {
    params.validate()?;
    let mut checks = Vec::new();
    let bump_args = [("amplitude".to_string(), 0.3), ("radius".to_string(), params.radius)];
    let layer_args = [
        ("rho_amplitude".to_string(), 0.3),
        ("s_base".to_string(), 1.0),
        ("radius".to_string(), params.radius),
    ];

    // entropy invariance, volume conservation and the Young split on a
    // non-isentropic run under both formulations
    for formulation in [Formulation::Primitive, Formulation::Effective] {
        let mut p = params.clone();
        p.formulation = formulation;
        let initial = normalize_and_sample(&preset("entropy_layer", &layer_args)?, &p)?;
        let s0 = initial.s.clone();
        let v0 = initial.total_volume();
        let mut young_ok = true;
        let mut worst_young = 0.0f64;
        let mut steps = 0u64;
        let final_state = advance_to(initial, 0.3, &p, |ev| {
            steps = ev.step_index + 1;
            if ev.step_index % 20 == 0 {
                let s = bd_source(ev.state, &p).abs();
                let bound = bd_dissipation(ev.state, &p) / 2.0 + bd_young_bound(ev.state, &p);
                let slack = 1e-12 * (1.0 + bound);
                if s > bound + slack {
                    young_ok = false;
                    worst_young = worst_young.max(s - bound);
                }
            }
        })?;
        let s_err = s0
            .iter()
            .zip(&final_state.s)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        checks.push(CheckResult {
            name: format!("entropy_invariance_{formulation}"),
            pass: s_err == 0.0,
            detail: format!("max |s − s0| = {s_err:e} after {steps} steps"),
        });
        let v_drift = ((final_state.total_volume() - v0) / v0).abs();
        let budget = params.tol_volume * (steps as f64 / 1000.0).max(1.0);
        checks.push(CheckResult {
            name: format!("volume_conservation_{formulation}"),
            pass: v_drift <= budget,
            detail: format!("relative drift {v_drift:e} over {steps} steps (budget {budget:e})"),
        });
        checks.push(CheckResult {
            name: format!("young_split_{formulation}"),
            pass: young_ok,
            detail: if young_ok {
                "|S_bd| ≤ D_bd/2 + Y at every sampled state".into()
            } else {
                format!("violated by {worst_young:e}")
            },
        });
    }

    // steady-state preservation
    for formulation in [Formulation::Primitive, Formulation::Effective] {
        let mut p = params.clone();
        p.formulation = formulation;
        p.cells = 128;
        let args = [
            ("gamma".to_string(), p.gamma),
            ("s_amp".to_string(), 0.5),
            ("radius".to_string(), p.radius),
        ];
        let initial = normalize_and_sample(&preset("isobaric_steady", &args)?, &p)?;
        let t_run = 1.0;
        let final_state = advance_to(initial.clone(), t_run, &p, |_| {})?;
        let mut drift = 0.0f64;
        for i in 0..p.cells {
            drift = drift.max((final_state.rho[i] - initial.rho[i]).abs());
        }
        for j in 0..=p.cells {
            drift = drift.max((final_state.u[j] - initial.u[j]).abs());
        }
        let rate = drift / t_run;
        checks.push(CheckResult {
            name: format!("steady_state_preservation_{formulation}"),
            pass: rate <= params.tol_steady,
            detail: format!("sup drift {rate:e} per unit time (budget {:e})", params.tol_steady),
        });
    }

    // residual refinement for both identities
    let levels = [64usize, 128, 256];
    let refinement_cases: [(&str, Formulation, fn(&ResidualSeries) -> f64); 2] = [
        (
            "energy_residual_refinement",
            Formulation::Primitive,
            |s| s.l1_energy,
        ),
        ("bd_residual_refinement", Formulation::Effective, |s| s.l1_bd),
    ];
    for (name, formulation, pick) in refinement_cases {
        let mut errs = Vec::new();
        for &m in &levels {
            let mut p = params.clone();
            p.cells = m;
            p.formulation = formulation;
            let initial = normalize_and_sample(&preset("gaussian_bump", &bump_args)?, &p)?;
            let dt = 0.8 * stable_dt(&initial, &p);
            p.dt_policy = crate::model::DtPolicy::Fixed(dt);
            let series = residual_series(initial, 0.25, &p)?;
            errs.push(pick(&series));
        }
        let dys: Vec<f64> = levels.iter().map(|&m| 1.0 / m as f64).collect();
        let (order, _) = fit_order(&dys, &errs);
        checks.push(CheckResult {
            name: name.to_string(),
            pass: order >= 0.8,
            detail: format!("integrated residuals {errs:?}, fitted order {order:.2}"),
        });
    }

    // isentropic BD monotonicity under the effective scheme
    {
        let mut p = params.clone();
        p.formulation = Formulation::Effective;
        p.cells = 128;
        let initial = normalize_and_sample(&preset("gaussian_bump", &bump_args)?, &p)?;
        let mut prev_e = bd_energy(&initial, &p);
        let mut worst = f64::NEG_INFINITY;
        advance_to(initial, 0.5, &p, |ev| {
            let e = bd_energy(ev.state, &p);
            worst = worst.max(e - prev_e);
            prev_e = e;
        })?;
        checks.push(CheckResult {
            name: "bd_monotonicity_isentropic".into(),
            pass: worst <= 1e-10,
            detail: format!("largest step-to-step E_bd increase {worst:e}"),
        });
    }

    // cross-formulation agreement
    {
        let report = scheme_agreement(params, "gaussian_bump", &bump_args, 0.25, &levels)?;
        let gaps: Vec<f64> = report.levels.iter().map(|l| l.gap).collect();
        checks.push(CheckResult {
            name: "scheme_agreement".into(),
            pass: report.order >= 0.8,
            detail: format!("gaps {gaps:?}, fitted order {:.2}", report.order),
        });
    }

    // dissipation coefficient experiment (an N=3 question)
    let kappa = if params.dimension == 3 {
        let rep = kappa_resolution(params)?;
        let expected = params.kappa();
        checks.push(CheckResult {
            name: "kappa_selection".into(),
            pass: rep.separation_ratio >= 10.0 && rep.chosen_kappa == expected,
            detail: format!(
                "kappa = {} closes the identity ({}× separation); configured {}",
                rep.chosen_kappa, rep.separation_ratio as i64, expected
            ),
        });
        Some(rep)
    } else {
        None
    };

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        checks,
        kappa,
        all_pass,
    })
}
