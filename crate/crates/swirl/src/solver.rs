//! Time integration of the Lagrangian system in either formulation.
//!
//! Both steppers follow the same splitting: momentum (or effective-velocity)
//! update first, then the specific-volume continuity update in conservative
//! flux form with zero boundary flux, then geometry reconstruction. Entropy
//! is copied bitwise and never enters the time loop.
//!
//! The degenerate viscosity 2ρ² r^{2N−2} is treated implicitly through one
//! symmetric tridiagonal solve per step — directly in the primitive
//! momentum equation, and through the density-gradient part of the flux
//! velocity u = w − 2r^{N−1}∂_y ρ in the effective formulation — so the
//! stable step is set by the acoustic signal speed alone.

use crate::error::{Result, SimError};
use crate::model::{
    density_gradient_nodes, effective_velocity, pressure, reconstruct_radius, rpow_nm1,
    sound_speed, DtPolicy, SimParams, State,
};

/// Per-step bookkeeping.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub dt: f64,
    /// Linear-solve iterations; the direct tridiagonal solve counts as 1.
    pub linear_iterations: u32,
    pub max_density_change: f64,
    pub max_velocity_change: f64,
    /// True when the step size came from the CFL bound rather than a fixed dt.
    pub cfl_limited: bool,
}

/// External forcing fields for manufactured-solution runs, sampled at the
/// step's starting time.
#[derive(Debug, Clone)]
pub struct ForcingFields {
    /// Continuity forcing at cell centers.
    pub continuity: Vec<f64>,
    /// Momentum forcing at nodes.
    pub momentum: Vec<f64>,
}

/// Acoustic CFL bound: min over cells of CFL·Δy / ((c_s + |u|)·ρ·r^{N−1}),
/// with the outer node radius of each cell and the larger adjacent |u|.
/// No parabolic bound enters because the viscosity is implicit.
pub fn stable_dt(state: &State, params: &SimParams) -> f64 {
    let n = params.dimension;
    let cfl = params.cfl_fraction();
    let dy = state.grid().dy();
    const EPS: f64 = 1e-300;
    let mut dt = f64::INFINITY;
    for i in 0..state.cells() {
        let cs = sound_speed(state.rho[i], state.s[i], params.gamma);
        let u_loc = state.u[i].abs().max(state.u[i + 1].abs());
        let signal = (cs + u_loc) * state.rho[i] * rpow_nm1(state.r[i + 1], n);
        dt = dt.min(cfl * dy / (signal + EPS));
    }
    dt.max(1e-12)
}

/// Thomas solve of a tridiagonal system; `sub[0]` and `sup[last]` are unused.
fn solve_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() < 1e-300 || !pivot.is_finite() {
        return Err(SimError::TridiagonalBreakdown { row: 0 });
    }
    c[0] = sup[0] / pivot;
    d[0] = rhs[0] / pivot;
    for k in 1..n {
        pivot = diag[k] - sub[k] * c[k - 1];
        if pivot.abs() < 1e-300 || !pivot.is_finite() {
            return Err(SimError::TridiagonalBreakdown { row: k });
        }
        if k < n - 1 {
            c[k] = sup[k] / pivot;
        }
        d[k] = (rhs[k] - sub[k] * d[k - 1]) / pivot;
    }
    let mut x = d;
    for k in (0..n - 1).rev() {
        let next = x[k + 1];
        x[k] -= c[k] * next;
    }
    Ok(x)
}

fn check_positive(v: &[f64]) -> Result<()> {
    for (i, &vi) in v.iter().enumerate() {
        if !(vi > 0.0) || !vi.is_finite() {
            return Err(SimError::DensityPositivity {
                cell: i,
                value: 1.0 / vi,
            });
        }
    }
    Ok(())
}

fn report(old: &State, new: &State, dt: f64) -> StepReport {
    let max_density_change = old
        .rho
        .iter()
        .zip(&new.rho)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    let max_velocity_change = old
        .u
        .iter()
        .zip(&new.u)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    StepReport {
        dt,
        linear_iterations: 1,
        max_density_change,
        max_velocity_change,
        cfl_limited: false,
    }
}

pub fn step_primitive(state: &State, dt: f64, params: &SimParams) -> Result<(State, StepReport)> {
    step_primitive_forced(state, dt, params, None)
}

/// One step of the primitive formulation: implicit viscous momentum solve,
/// explicit centered pressure gradient and geometric term, then the
/// flux-form volume update with the fresh velocity.
pub fn step_primitive_forced(
    state: &State,
    dt: f64,
    params: &SimParams,
    forcing: Option<&ForcingFields>,
) -> Result<(State, StepReport)> {
    if !(dt > 0.0) {
        return Err(SimError::InvalidParams(format!("step needs dt > 0, got {dt}")));
    }
    let n = params.dimension;
    let gamma = params.gamma;
    let m = state.cells();
    let dy = state.grid().dy();

    let p_cells: Vec<f64> = state
        .rho
        .iter()
        .zip(&state.s)
        .map(|(&rho, &s)| pressure(rho, s, gamma))
        .collect::<Result<_>>()?;
    let phi: Vec<f64> = state.r.iter().map(|&r| rpow_nm1(r, n)).collect();
    let drho = density_gradient_nodes(&state.rho, dy);

    // interior momentum rows: u⁺_j − dt φ_j D_y[2ρ² D_y(φ u⁺)] = rhs_j
    let rows = m - 1;
    let mut sub = vec![0.0; rows];
    let mut diag = vec![0.0; rows];
    let mut sup = vec![0.0; rows];
    let mut rhs = vec![0.0; rows];
    let lam = dt / (dy * dy);
    for j in 1..m {
        let k = j - 1;
        let a_left = 2.0 * state.rho[j - 1] * state.rho[j - 1];
        let a_right = 2.0 * state.rho[j] * state.rho[j];
        diag[k] = 1.0 + lam * phi[j] * phi[j] * (a_left + a_right);
        sub[k] = -lam * phi[j] * a_left * phi[j - 1];
        sup[k] = -lam * phi[j] * a_right * phi[j + 1];

        let dp = (p_cells[j] - p_cells[j - 1]) / dy;
        let geometric = 2.0 * (n as f64 - 1.0) / state.r[j] * state.u[j] * drho[j];
        let f_m = forcing.map_or(0.0, |f| f.momentum[j]);
        rhs[k] = state.u[j] + dt * phi[j] * (-dp - geometric + f_m);
    }
    let interior = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
    let mut u_new = vec![0.0; m + 1];
    u_new[1..m].copy_from_slice(&interior);

    // conservative volume update with the fresh velocity; boundary fluxes
    // vanish since u⁺ is pinned
    let mut v_new = vec![0.0; m];
    for i in 0..m {
        let flux_diff = phi[i + 1] * u_new[i + 1] - phi[i] * u_new[i];
        let f_c = forcing.map_or(0.0, |f| f.continuity[i]);
        v_new[i] = 1.0 / state.rho[i] + dt * (flux_diff / dy - f_c / (state.rho[i] * state.rho[i]));
    }
    check_positive(&v_new)?;
    let rho_new: Vec<f64> = v_new.iter().map(|&v| 1.0 / v).collect();
    let r_new = reconstruct_radius(&rho_new, &state.grid(), params)?;

    let new = State {
        tau: state.tau + dt,
        rho: rho_new,
        s: state.s.clone(),
        u: u_new,
        r: r_new,
    };
    let rep = report(state, &new, dt);
    Ok((new, rep))
}

pub fn step_effective(state: &State, dt: f64, params: &SimParams) -> Result<(State, StepReport)> {
    step_effective_forced(state, dt, params, None)
}

/// One step of the effective-velocity formulation: explicit pressure update
/// of w, then the volume update whose flux velocity w⁺ − 2r^{N−1}∂_y ρ⁺
/// carries the density gradient implicitly (linearized around the old
/// state), then recovery of u from the fresh fields.
pub fn step_effective_forced(
    state: &State,
    dt: f64,
    params: &SimParams,
    forcing: Option<&ForcingFields>,
) -> Result<(State, StepReport)> {
    if !(dt > 0.0) {
        return Err(SimError::InvalidParams(format!("step needs dt > 0, got {dt}")));
    }
    let n = params.dimension;
    let gamma = params.gamma;
    let m = state.cells();
    let dy = state.grid().dy();

    let p_cells: Vec<f64> = state
        .rho
        .iter()
        .zip(&state.s)
        .map(|(&rho, &s)| pressure(rho, s, gamma))
        .collect::<Result<_>>()?;
    let phi: Vec<f64> = state.r.iter().map(|&r| rpow_nm1(r, n)).collect();
    let dp = density_gradient_nodes(&p_cells, dy);

    // ∂_τ w = −r^{N−1} ∂_y P at every node (one-sided D_y P at the ends;
    // φ(0) = 0 keeps w(0) = 0)
    let eff = effective_velocity(state, params);
    let mut w_new = eff.w.clone();
    for j in 0..=m {
        let f_m = forcing.map_or(0.0, |f| f.momentum[j]);
        w_new[j] += dt * phi[j] * (-dp[j] + f_m);
    }

    // volume update v⁺ = v + dt D_y F, F_j = φ_j w⁺_j − 2φ_j² D_y ρ⁺ at
    // interior nodes, F = 0 at the ends. The new-level density enters
    // linearly via ρ⁺ = ρ − ρ² δv (exact at δv = 0), giving a tridiagonal
    // system in the increment δv = v⁺ − v whose right side is the
    // old-state flux divergence; on a steady state it assembles to
    // round-off directly.
    let mut flux_expl = vec![0.0; m + 1];
    for j in 1..m {
        let drho = (state.rho[j] - state.rho[j - 1]) / dy;
        flux_expl[j] = phi[j] * w_new[j] - 2.0 * phi[j] * phi[j] * drho;
    }
    let rows = m;
    let mut sub = vec![0.0; rows];
    let mut diag = vec![0.0; rows];
    let mut sup = vec![0.0; rows];
    let mut rhs = vec![0.0; rows];
    let c2 = 2.0 * dt / (dy * dy);
    for i in 0..m {
        let rho_i = state.rho[i];
        let mut d = 1.0;
        let mut b = dt / dy * (flux_expl[i + 1] - flux_expl[i]);
        if let Some(f) = forcing {
            b -= dt * f.continuity[i] / (rho_i * rho_i);
        }
        // implicit density-gradient part of the right-node flux (F_M = 0)
        if i + 1 < m {
            let ph2 = phi[i + 1] * phi[i + 1];
            d += c2 * ph2 * rho_i * rho_i;
            sup[i] = -c2 * ph2 * state.rho[i + 1] * state.rho[i + 1];
        }
        // implicit part of the left-node flux (F_0 = 0)
        if i > 0 {
            let ph2 = phi[i] * phi[i];
            d += c2 * ph2 * rho_i * rho_i;
            sub[i] = -c2 * ph2 * state.rho[i - 1] * state.rho[i - 1];
        }
        diag[i] = d;
        rhs[i] = b;
    }
    let dv = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;

    // re-apply the update through the literal nodal fluxes so the volume
    // sum telescopes in floating point as well
    let mut flux = flux_expl;
    for j in 1..m {
        let di = state.rho[j] * state.rho[j] * dv[j];
        let dim1 = state.rho[j - 1] * state.rho[j - 1] * dv[j - 1];
        flux[j] += 2.0 * phi[j] * phi[j] * (di - dim1) / dy;
    }
    let mut v_new = vec![0.0; m];
    for i in 0..m {
        let f_c = forcing.map_or(0.0, |f| f.continuity[i]);
        v_new[i] = 1.0 / state.rho[i]
            + dt * ((flux[i + 1] - flux[i]) / dy - f_c / (state.rho[i] * state.rho[i]));
    }
    check_positive(&v_new)?;
    let rho_new: Vec<f64> = v_new.iter().map(|&v| 1.0 / v).collect();
    let r_new = reconstruct_radius(&rho_new, &state.grid(), params)?;

    // recover u at the new level and pin the boundary values
    let drho_new = density_gradient_nodes(&rho_new, dy);
    let mut u_new = vec![0.0; m + 1];
    for j in 1..m {
        u_new[j] = w_new[j] - 2.0 * rpow_nm1(r_new[j], n) * drho_new[j];
    }

    let new = State {
        tau: state.tau + dt,
        rho: rho_new,
        s: state.s.clone(),
        u: u_new,
        r: r_new,
    };
    let rep = report(state, &new, dt);
    Ok((new, rep))
}

pub fn step(state: &State, dt: f64, params: &SimParams) -> Result<(State, StepReport)> {
    match params.formulation {
        crate::model::Formulation::Primitive => step_primitive(state, dt, params),
        crate::model::Formulation::Effective => step_effective(state, dt, params),
    }
}

/// What `advance_to` hands the observer after every accepted step.
pub struct StepEvent<'a> {
    pub prev: &'a State,
    pub state: &'a State,
    pub dt: f64,
    pub report: &'a StepReport,
    pub step_index: u64,
}

const MAX_DT_HALVINGS: u32 = 10;

/// Advances the state to `t_end`, selecting dt from the policy, retrying a
/// failed step with halved dt up to 10 times, and landing on `t_end`
/// exactly.
pub fn advance_to<F>(
    mut state: State,
    t_end: f64,
    params: &SimParams,
    mut observer: F,
) -> Result<State>
where
    F: FnMut(StepEvent<'_>),
{
    if t_end < state.tau {
        return Err(SimError::InvalidParams(format!(
            "t_end {t_end} lies before the state time {}",
            state.tau
        )));
    }
    let mut step_index: u64 = 0;
    while state.tau < t_end {
        let remaining = t_end - state.tau;
        let (dt_policy, cfl_limited) = match params.dt_policy {
            DtPolicy::Fixed(dt) => (dt, false),
            DtPolicy::Cfl(_) => (stable_dt(&state, params), true),
        };
        let mut dt = dt_policy.min(remaining);
        let landing = dt >= remaining;

        let mut attempt = 0;
        let (next, mut rep) = loop {
            match step(&state, dt, params) {
                Ok(ok) => break ok,
                Err(e @ SimError::DensityPositivity { .. }) if attempt < MAX_DT_HALVINGS => {
                    attempt += 1;
                    dt *= 0.5;
                    let _ = e;
                }
                Err(e) => return Err(e),
            }
        };
        rep.cfl_limited = cfl_limited && !landing;

        let mut accepted = next;
        if landing && attempt == 0 {
            accepted.tau = t_end; // kill float drift on the final step
        }
        observer(StepEvent {
            prev: &state,
            state: &accepted,
            dt,
            report: &rep,
            step_index,
        });
        state = accepted;
        step_index += 1;
    }
    state.tau = t_end;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initcond::{normalize_and_sample, preset};
    use crate::model::{effective_velocity, Formulation, MassGrid};

    fn base_params(n: u32, m: usize) -> SimParams {
        SimParams::new(n, 1.4, 1.0, m)
    }

    fn bump_state(params: &SimParams, amplitude: f64) -> State {
        let prof = preset(
            "gaussian_bump",
            &[
                ("amplitude".into(), amplitude),
                ("radius".into(), params.radius),
            ],
        )
        .unwrap();
        normalize_and_sample(&prof, params).unwrap()
    }

    #[test]
    fn tridiagonal_reference_solve() {
        // 4x4 system with known solution x = (1, 2, 3, 4)
        let sub = vec![0.0, -1.0, -1.0, -1.0];
        let diag = vec![2.0, 2.0, 2.0, 2.0];
        let sup = vec![-1.0, -1.0, -1.0, 0.0];
        let x_true = [1.0, 2.0, 3.0, 4.0];
        let mut rhs = vec![0.0; 4];
        for k in 0..4 {
            rhs[k] = diag[k] * x_true[k];
            if k > 0 {
                rhs[k] += sub[k] * x_true[k - 1];
            }
            if k < 3 {
                rhs[k] += sup[k] * x_true[k + 1];
            }
        }
        let x = solve_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for k in 0..4 {
            assert!((x[k] - x_true[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn stable_dt_scales_linearly_with_resolution() {
        let p1 = base_params(2, 64);
        let p2 = base_params(2, 128);
        let prof = preset("constant", &[]).unwrap();
        let s1 = normalize_and_sample(&prof, &p1).unwrap();
        let s2 = normalize_and_sample(&prof, &p2).unwrap();
        let dt1 = stable_dt(&s1, &p1);
        let dt2 = stable_dt(&s2, &p2);
        assert!(
            (dt1 / dt2 - 2.0).abs() < 1e-10,
            "dt ratio under doubling: {}",
            dt1 / dt2
        );
    }

    #[test]
    fn stable_dt_direct_formula() {
        // build ρ ≡ 1, s ≡ 0 with a hand-set linear radius so that
        // max ρ r^{N-1} = 1; the formula then gives CFL·dy/√γ exactly
        let m = 64;
        let p = base_params(2, m);
        let grid = MassGrid::new(m);
        let r: Vec<f64> = (0..=m).map(|j| grid.node(j)).collect();
        let state = State {
            tau: 0.0,
            rho: vec![1.0; m],
            s: vec![0.0; m],
            u: vec![0.0; m + 1],
            r,
        };
        let dt = stable_dt(&state, &p);
        let expect = 0.5 * grid.dy() / 1.4f64.sqrt();
        assert!(
            (dt - expect).abs() < 1e-12,
            "dt = {dt}, direct evaluation {expect}"
        );

        // independent re-evaluation of the stated formula on a generic state
        let st = bump_state(&p, 0.3);
        let dt = stable_dt(&st, &p);
        let mut expect = f64::INFINITY;
        for i in 0..m {
            let cs = (1.4 * st.rho[i].powf(0.4) * st.s[i].exp()).sqrt();
            let ul = st.u[i].abs().max(st.u[i + 1].abs());
            expect = expect.min(0.5 * grid.dy() / ((cs + ul) * st.rho[i] * st.r[i + 1]));
        }
        assert!((dt - expect).abs() <= 1e-15 * expect);
    }

    #[test]
    fn stable_dt_monotone_in_density() {
        let p = base_params(2, 64);
        let prof = preset("constant", &[]).unwrap();
        let uniform = normalize_and_sample(&prof, &p).unwrap();
        let mut spiked = uniform.clone();
        spiked.rho[40] *= 2.0;
        spiked.r = reconstruct_radius(&spiked.rho, &spiked.grid(), &p).unwrap();
        assert!(stable_dt(&spiked, &p) < stable_dt(&uniform, &p));
    }

    #[test]
    fn constant_state_is_exact_fixed_point() {
        for formulation in [Formulation::Primitive, Formulation::Effective] {
            let mut p = base_params(2, 64);
            p.formulation = formulation;
            let state =
                State::from_fields(0.0, vec![2.0; 64], vec![0.3; 64], vec![0.0; 65], &p).unwrap();
            let dt = stable_dt(&state, &p);
            let (next, _) = step(&state, dt, &p).unwrap();
            for i in 0..64 {
                assert_eq!(next.rho[i], state.rho[i], "{formulation}: rho drifted");
                assert_eq!(next.s[i], state.s[i]);
            }
            for j in 0..=64 {
                assert_eq!(next.u[j], state.u[j], "{formulation}: u drifted");
            }
        }
    }

    #[test]
    fn isobaric_steady_state_preserved_per_step() {
        for n in [2u32, 3] {
            for formulation in [Formulation::Primitive, Formulation::Effective] {
                let mut p = base_params(n, 64);
                p.formulation = formulation;
                let prof = preset(
                    "isobaric_steady",
                    &[("gamma".into(), p.gamma), ("s_amp".into(), 0.5)],
                )
                .unwrap();
                let state = normalize_and_sample(&prof, &p).unwrap();
                let dt = stable_dt(&state, &p);
                let (next, _) = step(&state, dt, &p).unwrap();
                let mut worst = 0.0f64;
                for i in 0..64 {
                    worst = worst.max((next.rho[i] - state.rho[i]).abs());
                }
                for j in 0..=64 {
                    worst = worst.max((next.u[j] - state.u[j]).abs());
                }
                assert!(
                    worst <= 1e-13,
                    "N={n} {formulation}: isobaric drift {worst:e} in one step"
                );
            }
        }
    }

    #[test]
    fn entropy_copied_bitwise() {
        let mut p = base_params(2, 48);
        for formulation in [Formulation::Primitive, Formulation::Effective] {
            p.formulation = formulation;
            let prof = preset(
                "entropy_layer",
                &[("rho_amplitude".into(), 0.2), ("s_base".into(), 0.8)],
            )
            .unwrap();
            let mut state = normalize_and_sample(&prof, &p).unwrap();
            let s0 = state.s.clone();
            for _ in 0..50 {
                let dt = stable_dt(&state, &p);
                state = step(&state, dt, &p).unwrap().0;
            }
            assert!(
                state.s.iter().zip(&s0).all(|(a, b)| a.to_bits() == b.to_bits()),
                "{formulation}: entropy not bitwise identical"
            );
        }
    }

    #[test]
    fn volume_conserved_in_flux_form() {
        for formulation in [Formulation::Primitive, Formulation::Effective] {
            let mut p = base_params(2, 128);
            p.formulation = formulation;
            let mut state = bump_state(&p, 0.3);
            let v0 = state.total_volume();
            for _ in 0..1000 {
                let dt = stable_dt(&state, &p);
                state = step(&state, dt, &p).unwrap().0;
            }
            let drift = ((state.total_volume() - v0) / v0).abs();
            assert!(
                drift <= 1e-13,
                "{formulation}: volume drift {drift:e} over 1000 steps"
            );
        }
    }

    #[test]
    fn boundary_velocities_pinned_every_step() {
        let mut p = base_params(3, 64);
        for formulation in [Formulation::Primitive, Formulation::Effective] {
            p.formulation = formulation;
            let mut state = bump_state(&p, 0.4);
            for _ in 0..200 {
                let dt = stable_dt(&state, &p);
                state = step(&state, dt, &p).unwrap().0;
                assert_eq!(state.u[0], 0.0);
                assert_eq!(state.u[64], 0.0);
            }
        }
    }

    #[test]
    fn primitive_step_second_order_local_truncation() {
        // one step at dt vs 100 substeps of dt/100: local error is O(dt²),
        // so halving dt shrinks it by ~4. The implicit viscous solve keeps
        // the step stable at dt = stable_dt but sits outside the asymptotic
        // truncation regime there, so the ratio is measured a few halvings
        // below the CFL step.
        let p = base_params(2, 64);
        let state = bump_state(&p, 0.1);
        let dt0 = stable_dt(&state, &p) / 32.0;
        let err = |dt: f64| {
            let coarse = step_primitive(&state, dt, &p).unwrap().0;
            let mut fine = state.clone();
            for _ in 0..100 {
                fine = step_primitive(&fine, dt / 100.0, &p).unwrap().0;
            }
            let mut worst = 0.0f64;
            for i in 0..64 {
                worst = worst.max((coarse.rho[i] - fine.rho[i]).abs());
            }
            for j in 0..=64 {
                worst = worst.max((coarse.u[j] - fine.u[j]).abs());
            }
            worst
        };
        let e1 = err(dt0);
        let e2 = err(dt0 / 2.0);
        let ratio = e1 / e2;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "dt-halving error ratio {ratio} (errors {e1:e}, {e2:e})"
        );
    }

    #[test]
    fn effective_scheme_keeps_bd_energy_nonincreasing_isentropic() {
        let mut p = base_params(2, 128);
        p.formulation = Formulation::Effective;
        let mut state = bump_state(&p, 0.3);
        let mut prev_e = crate::functionals::bd_energy(&state, &p);
        for k in 0..2000 {
            let dt = stable_dt(&state, &p);
            state = step(&state, dt, &p).unwrap().0;
            let e = crate::functionals::bd_energy(&state, &p);
            assert!(
                e <= prev_e + 1e-10,
                "E_bd increased by {:e} at step {k}",
                e - prev_e
            );
            prev_e = e;
        }
    }

    #[test]
    fn isobaric_effective_velocity_stationary_over_step() {
        // converged isobaric profile: ∂_y P = 0 so ∂_τ w = 0 over a step
        let mut p = base_params(2, 64);
        p.formulation = Formulation::Effective;
        let prof = preset(
            "isobaric_steady",
            &[("gamma".into(), p.gamma), ("s_amp".into(), 0.4)],
        )
        .unwrap();
        let state = normalize_and_sample(&prof, &p).unwrap();
        let w0 = effective_velocity(&state, &p).w;
        let dt = stable_dt(&state, &p);
        let (next, _) = step(&state, dt, &p).unwrap();
        let w1 = effective_velocity(&next, &p).w;
        let worst = w0
            .iter()
            .zip(&w1)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst <= 1e-12, "w drift {worst:e} over one step");
    }

    #[test]
    fn advance_to_trivial_and_constant_runs() {
        let p = base_params(2, 64);
        let prof = preset("constant", &[]).unwrap();
        let state = normalize_and_sample(&prof, &p).unwrap();

        // t_end equal to the current time: zero steps
        let mut called = 0;
        let same = advance_to(state.clone(), 0.0, &p, |_| called += 1).unwrap();
        assert_eq!(called, 0);
        assert_eq!(same.tau, 0.0);

        // constant state advanced far: unchanged within round-off
        let end = advance_to(state.clone(), 10.0, &p, |_| {}).unwrap();
        assert_eq!(end.tau, 10.0);
        for i in 0..64 {
            assert!((end.rho[i] - state.rho[i]).abs() < 1e-12);
        }
        assert!(end.u.iter().all(|&u| u.abs() < 1e-12));
    }

    #[test]
    fn advance_to_lands_exactly_and_reports_steps() {
        let mut p = base_params(2, 64);
        p.dt_policy = DtPolicy::Fixed(1e-3);
        let state = bump_state(&p, 0.2);
        let mut steps = 0u64;
        let mut last_dt = 0.0;
        let end = advance_to(state, 0.0105, &p, |ev| {
            steps = ev.step_index + 1;
            last_dt = ev.dt;
        })
        .unwrap();
        assert_eq!(end.tau, 0.0105);
        assert_eq!(steps, 11);
        assert!((last_dt - 5e-4).abs() < 1e-15, "landing dt {last_dt}");
    }

    #[test]
    fn advance_to_gives_up_after_halvings() {
        let mut p = base_params(2, 32);
        p.dt_policy = DtPolicy::Fixed(1e6);
        let state = bump_state(&p, 0.5);
        let res = advance_to(state, 1e7, &p, |_| {});
        match res {
            Err(SimError::DensityPositivity { .. }) => {}
            other => panic!("expected positivity failure, got {other:?}"),
        }
    }

    #[test]
    fn bump_run_completes_quickly() {
        let p = base_params(2, 128);
        let state = bump_state(&p, 0.3);
        let start = std::time::Instant::now();
        let end = advance_to(state, 1.0, &p, |_| {}).unwrap();
        let elapsed = start.elapsed();
        assert_eq!(end.tau, 1.0);
        assert!(
            elapsed.as_secs_f64() < 10.0,
            "bump run took {elapsed:?}, expected well under 10 s"
        );
    }
}
