//! Initial data: physical-space profiles, mass normalization, resampling
//! onto the mass grid, and validation of the admissibility hypotheses.
//!
//! Profiles are given in physical radius on [0,R]. Sampling rescales the
//! density so that ∫ ρ r^{N−1} dr = 1, then bins a fine physical-space
//! quadrature into M equal-mass cells. Cell densities are mass-weighted
//! averages of the specific volume (so the discrete geometry identity and
//! the total volume R^N/N come out exact); entropy is mass-averaged;
//! velocity is sampled at the equal-mass boundary radii.

use crate::error::{Result, SimError};
use crate::model::{root_n, rpow_n, MassGrid, SimParams, State};

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Marks profiles the sampler treats specially.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    Generic,
    /// P = ρ^γ e^s spatially constant; sampling projects onto the exact
    /// discrete isobaric relation so the state is a discrete equilibrium.
    Isobaric,
}

/// Radial profiles (ρ0, u0, s0) on [0, R].
pub struct PhysicalProfile {
    pub rho0: ScalarFn,
    pub u0: ScalarFn,
    pub s0: ScalarFn,
    pub kind: ProfileKind,
}

impl PhysicalProfile {
    pub fn new(rho0: ScalarFn, u0: ScalarFn, s0: ScalarFn) -> Self {
        PhysicalProfile {
            rho0,
            u0,
            s0,
            kind: ProfileKind::Generic,
        }
    }

    /// Builds a profile from tabulated (r, value) samples, linearly
    /// interpolated; missing tables fall back to ρ=1, u=0, s=0.
    pub fn from_tables(
        rho: Option<Vec<(f64, f64)>>,
        u: Option<Vec<(f64, f64)>>,
        s: Option<Vec<(f64, f64)>>,
    ) -> Result<Self> {
        fn table_fn(table: Vec<(f64, f64)>, name: &str) -> Result<ScalarFn> {
            if table.len() < 2 {
                return Err(SimError::Config(format!(
                    "table for {name} needs at least 2 rows"
                )));
            }
            if table.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(SimError::Config(format!(
                    "table for {name} must have strictly increasing radii"
                )));
            }
            Ok(Box::new(move |r: f64| interp_linear(&table, r)))
        }
        let rho0 = match rho {
            Some(t) => table_fn(t, "rho0")?,
            None => Box::new(|_| 1.0) as ScalarFn,
        };
        let u0 = match u {
            Some(t) => table_fn(t, "u0")?,
            None => Box::new(|_| 0.0) as ScalarFn,
        };
        let s0 = match s {
            Some(t) => table_fn(t, "s0")?,
            None => Box::new(|_| 0.0) as ScalarFn,
        };
        Ok(PhysicalProfile::new(rho0, u0, s0))
    }
}

fn interp_linear(table: &[(f64, f64)], r: f64) -> f64 {
    if r <= table[0].0 {
        return table[0].1;
    }
    if r >= table[table.len() - 1].0 {
        return table[table.len() - 1].1;
    }
    let idx = table.partition_point(|&(x, _)| x <= r);
    let (x0, y0) = table[idx - 1];
    let (x1, y1) = table[idx];
    y0 + (y1 - y0) * (r - x0) / (x1 - x0)
}

/// Named preset profiles selectable from the CLI.
pub fn preset(name: &str, args: &[(String, f64)]) -> Result<PhysicalProfile> {
    let get = |key: &str, default: f64| -> f64 {
        args.iter()
            .find(|(k, _)| k == key)
            .map(|&(_, v)| v)
            .unwrap_or(default)
    };
    let radius = get("radius", 1.0);
    match name {
        "constant" => {
            let rho = get("rho", 1.0);
            let s = get("s", 0.0);
            if !(rho > 0.0) {
                return Err(SimError::Config("constant preset needs rho > 0".into()));
            }
            Ok(PhysicalProfile::new(
                Box::new(move |_| rho),
                Box::new(|_| 0.0),
                Box::new(move |_| s),
            ))
        }
        "gaussian_bump" => {
            let a = get("amplitude", 0.5);
            let center = get("center", radius / 2.0);
            let width = get("width", radius / 8.0);
            let base = get("base", 1.0);
            let s = get("s", 0.0);
            if !(width > 0.0) || base + a.min(0.0) <= 0.0 {
                return Err(SimError::Config(
                    "gaussian_bump needs width > 0 and positive density".into(),
                ));
            }
            Ok(PhysicalProfile::new(
                Box::new(move |r| base + a * (-((r - center) / width).powi(2)).exp()),
                Box::new(|_| 0.0),
                Box::new(move |_| s),
            ))
        }
        "entropy_layer" => {
            // tanh entropy layer, optionally riding on a density bump
            let s_base = get("s_base", 0.5);
            let s_amp = get("s_amp", 0.3);
            let center = get("center", radius / 2.0);
            let width = get("width", radius / 8.0);
            let rho_amp = get("rho_amplitude", 0.0);
            if 1.0 + rho_amp.min(0.0) <= 0.0 {
                return Err(SimError::Config(
                    "entropy_layer density amplitude too negative".into(),
                ));
            }
            Ok(PhysicalProfile::new(
                Box::new(move |r| 1.0 + rho_amp * (-((r - center) / width).powi(2)).exp()),
                Box::new(|_| 0.0),
                Box::new(move |r| s_base + s_amp * ((r - center) / width).tanh()),
            ))
        }
        "isobaric_steady" => {
            // rho0 = (c e^{-s0})^{1/γ} with u0 = 0, so P ≡ c pointwise
            let c = get("c", 1.0);
            let gamma = get("gamma", 1.4);
            let s_base = get("s_base", 0.0);
            let s_amp = get("s_amp", 0.5);
            if !(c > 0.0) || !(gamma > 1.0) {
                return Err(SimError::Config(
                    "isobaric_steady needs c > 0 and gamma > 1".into(),
                ));
            }
            let s_fn = move |r: f64| s_base + s_amp * (std::f64::consts::PI * r / radius).sin();
            let mut p = PhysicalProfile::new(
                Box::new(move |r| (c * (-s_fn(r)).exp()).powf(1.0 / gamma)),
                Box::new(|_| 0.0),
                Box::new(s_fn),
            );
            p.kind = ProfileKind::Isobaric;
            Ok(p)
        }
        "velocity_pulse" => {
            let a = get("amplitude", 0.1);
            let rho = get("rho", 1.0);
            let s = get("s", 0.0);
            if !(rho > 0.0) {
                return Err(SimError::Config("velocity_pulse needs rho > 0".into()));
            }
            Ok(PhysicalProfile::new(
                Box::new(move |_| rho),
                Box::new(move |r| a * (std::f64::consts::PI * r / radius).sin()),
                Box::new(move |_| s),
            ))
        }
        other => Err(SimError::Config(format!("unknown preset '{other}'"))),
    }
}

/// Fine-grid subsamples per mass cell used by the sampler.
const SUBSAMPLES_PER_CELL: usize = 128;
const MIN_SUBSAMPLES: usize = 8192;

/// Normalizes the profile mass to 1 and resamples onto the mass grid.
pub fn normalize_and_sample(profile: &PhysicalProfile, params: &SimParams) -> Result<State> {
    params.validate()?;
    let n = params.dimension;
    let big_r = params.radius;
    let m = params.cells;
    let grid = MassGrid::new(m);
    let dy = grid.dy();

    let k = (SUBSAMPLES_PER_CELL * m).max(MIN_SUBSAMPLES);
    let hr = big_r / k as f64;

    // composite midpoint quadrature of the shell mass on the fine grid
    let rho_fine: Vec<f64> = (0..k)
        .map(|j| (profile.rho0)((j as f64 + 0.5) * hr))
        .collect();
    if let Some(j) = rho_fine.iter().position(|&v| !(v > 0.0)) {
        return Err(SimError::Validation(format!(
            "profile density non-positive near r = {}",
            (j as f64 + 0.5) * hr
        )));
    }
    // midpoint sampling of ρ with exact integration of the shell weight
    // r^{N−1}, so constant profiles bin exactly
    let masses: Vec<f64> = rho_fine
        .iter()
        .enumerate()
        .map(|(j, &rho)| {
            let shell = rpow_n((j + 1) as f64 * hr, n) - rpow_n(j as f64 * hr, n);
            rho * shell / n as f64
        })
        .collect();
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) {
        return Err(SimError::Validation("profile carries no mass".into()));
    }
    let scale = 1.0 / total; // density rescale factor

    // Equal-mass bin boundaries: walk the cumulative mass and invert the
    // shell-volume formula inside the fine cell that crosses each target.
    // Density is treated as constant within a fine cell, so the inversion
    // is exact for the quadrature model.
    let mut bounds = vec![0.0; m + 1];
    bounds[m] = big_r;
    let mut s_accum = vec![0.0; m]; // mass-weighted entropy per bin
    let mut cum = 0.0;
    let mut bin = 0usize;
    for j in 0..k {
        let r_right = (j + 1) as f64 * hr;
        let mut seg_left = j as f64 * hr;
        let mut remaining = masses[j] * scale;
        let s_here = (profile.s0)((j as f64 + 0.5) * hr);
        while bin < m - 1 && cum + remaining >= (bin + 1) as f64 * dy {
            let need = (bin + 1) as f64 * dy - cum;
            // density is constant within a fine cell, so mass is
            // proportional to shell volume: cut where the volume fraction
            // matches the mass fraction
            let frac = need / remaining;
            let seg_n = rpow_n(seg_left, n);
            let cut = root_n(seg_n + frac * (rpow_n(r_right, n) - seg_n), n);
            s_accum[bin] += s_here * need;
            cum += need;
            remaining -= need;
            bounds[bin + 1] = cut;
            seg_left = cut;
            bin += 1;
        }
        s_accum[bin] += s_here * remaining;
        cum += remaining;
    }

    // exact cell aggregation: v_i from the shell volume between boundaries
    let mut rho = vec![0.0; m];
    let mut s = vec![0.0; m];
    for i in 0..m {
        let shell = (rpow_n(bounds[i + 1], n) - rpow_n(bounds[i], n)) / n as f64;
        if !(shell > 0.0) {
            return Err(SimError::Validation(format!(
                "degenerate equal-mass cell {i} while sampling"
            )));
        }
        rho[i] = dy / shell;
        s[i] = s_accum[i] / dy;
    }

    // isobaric profiles: project onto the exact discrete isobaric relation,
    // keeping the total specific volume R^N/N
    if profile.kind == ProfileKind::Isobaric {
        let gamma = params.gamma;
        let vol_target = rpow_n(big_r, n) / n as f64;
        let weighted: f64 = s.iter().map(|&si| dy * (si / gamma).exp()).sum();
        let c_pow = weighted / vol_target; // c̃^{1/γ}
        for i in 0..m {
            rho[i] = c_pow * (-s[i] / gamma).exp();
        }
    }

    let mut u = vec![0.0; m + 1];
    for (i, b) in bounds.iter().enumerate() {
        u[i] = (profile.u0)(*b);
    }
    if u[0].abs() > 1e-10 || u[m].abs() > 1e-10 {
        return Err(SimError::Validation(format!(
            "u0 must vanish at r = 0 and r = R (got {} and {})",
            u[0], u[m]
        )));
    }

    let state = State::from_fields(0.0, rho, s, u, params)?;

    let vol = state.total_volume();
    let vol_target = rpow_n(big_r, n) / n as f64;
    if ((vol - vol_target) / vol_target).abs() > 1e-10 {
        return Err(SimError::Validation(format!(
            "sampled volume off target by {:e}",
            (vol - vol_target) / vol_target
        )));
    }
    Ok(state)
}

/// Outcome of checking the admissibility hypotheses on discrete initial data.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    pub rho_min: f64,
    pub rho_max: f64,
    pub s_min: f64,
    pub s_max: f64,
    /// Discrete sup |Δs/Δy|; equals sup |∂_r s0|/(ρ0 r^{N−1}) under the
    /// coordinate map.
    pub entropy_slope_sup: f64,
}

impl HypothesisReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&HypothesisCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Checks the hypotheses of the global-existence theorems on discrete data.
pub fn validate_hypotheses(state: &State, params: &SimParams) -> HypothesisReport {
    let mut checks = Vec::new();
    let n = params.dimension;
    let gamma = params.gamma;

    let gamma_ok = match n {
        2 => gamma > 1.0,
        3 => gamma > 1.0 && gamma < 3.0,
        _ => false,
    };
    checks.push(HypothesisCheck {
        name: "gamma_range".into(),
        pass: gamma_ok,
        detail: if gamma_ok {
            format!("gamma = {gamma} admissible for N = {n}")
        } else {
            format!(
                "gamma out of range: N = {n} requires {} (got {gamma})",
                if n == 3 { "1 < gamma < 3" } else { "gamma > 1" }
            )
        },
    });

    let rho_min = state.rho.iter().cloned().fold(f64::INFINITY, f64::min);
    let rho_max = state.rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    checks.push(HypothesisCheck {
        name: "density_bounds".into(),
        pass: rho_min > 0.0 && rho_max.is_finite(),
        detail: format!("density lower bound {rho_min:e}, upper bound {rho_max:e}"),
    });

    let s_min = state.s.iter().cloned().fold(f64::INFINITY, f64::min);
    let s_max = state.s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let isentropic = (s_max - s_min).abs() == 0.0;
    // strict positivity of the entropy is part of the non-isentropic
    // hypotheses; constant-entropy data falls under the isentropic result,
    // which carries no entropy assumption
    let s_ok = s_min.is_finite() && s_max.is_finite() && (isentropic || s_min > 0.0);
    checks.push(HypothesisCheck {
        name: "entropy_bounds".into(),
        pass: s_ok,
        detail: if isentropic {
            format!("entropy constant at {s_min}")
        } else {
            format!("entropy in [{s_min}, {s_max}], positivity required: {}", s_min > 0.0)
        },
    });

    let dy = state.grid().dy();
    let slope = state
        .s
        .windows(2)
        .map(|w| ((w[1] - w[0]) / dy).abs())
        .fold(0.0f64, f64::max);
    checks.push(HypothesisCheck {
        name: "entropy_slope_bounded".into(),
        pass: slope.is_finite(),
        detail: format!("sup |Δs/Δy| = {slope:e}"),
    });

    let m = state.cells();
    let bc_ok = state.u[0] == 0.0 && state.u[m] == 0.0;
    checks.push(HypothesisCheck {
        name: "boundary_velocity".into(),
        pass: bc_ok,
        detail: format!("u(0) = {}, u(R) = {}", state.u[0], state.u[m]),
    });

    HypothesisReport {
        checks,
        rho_min,
        rho_max,
        s_min,
        s_max,
        entropy_slope_sup: slope,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{pressure, DtPolicy};

    fn params(n: u32, m: usize) -> SimParams {
        let mut p = SimParams::new(n, 1.4, 1.0, m);
        p.dt_policy = DtPolicy::Cfl(0.5);
        p
    }

    #[test]
    fn constant_profile_normalizes_to_closed_form() {
        // rho0 ≡ c on B_R: normalization forces 2/R² (N=2) or 3/R³ (N=3)
        for (n, expect) in [(2u32, 2.0), (3u32, 3.0)] {
            let mut p = params(n, 32);
            p.radius = 1.0;
            let prof = preset("constant", &[("rho".into(), 7.3)]).unwrap();
            let state = normalize_and_sample(&prof, &p).unwrap();
            for (i, &rho) in state.rho.iter().enumerate() {
                assert!(
                    (rho - expect).abs() < 1e-11,
                    "N={n} cell {i}: rho = {rho}, expected {expect}"
                );
            }
        }
    }

    #[test]
    fn constant_profile_radius_two() {
        let mut p = params(2, 16);
        p.radius = 2.0;
        let prof = preset("constant", &[]).unwrap();
        let state = normalize_and_sample(&prof, &p).unwrap();
        for &rho in &state.rho {
            assert!((rho - 0.5).abs() < 1e-11, "rho = {rho}, expected 2/R² = 0.5");
        }
    }

    #[test]
    fn gaussian_bump_matches_fine_reference() {
        let p = params(2, 64);
        let prof = preset(
            "gaussian_bump",
            &[("amplitude".into(), 0.5), ("width".into(), 0.125)],
        )
        .unwrap();
        let coarse = normalize_and_sample(&prof, &p).unwrap();

        // reference: same construction at 10× the fine-grid resolution
        let fine = sample_with_subsamples(&prof, &p, 10).unwrap();
        let mut worst = 0.0f64;
        for i in 0..p.cells {
            let rel = ((coarse.rho[i] - fine.rho[i]) / fine.rho[i]).abs();
            worst = worst.max(rel);
        }
        assert!(worst <= 1e-6, "cell densities vs 10× reference: {worst:e}");
    }

    // rebuilds the state with a denser auxiliary grid (factor × default)
    fn sample_with_subsamples(
        profile: &PhysicalProfile,
        params: &SimParams,
        factor: usize,
    ) -> Result<State> {
        let mut dense = params.clone();
        dense.cells = params.cells; // the auxiliary refinement happens inside
        let _ = factor;
        // build by integrating the profile on a 10×-finer auxiliary grid:
        // reuse normalize_and_sample on a 10× finer mass grid, then
        // aggregate every 10 cells (exact: equal-mass cells nest).
        let mut fine_params = params.clone();
        fine_params.cells = params.cells * 10;
        let fine = normalize_and_sample(profile, &fine_params)?;
        let dy_f = 1.0 / fine_params.cells as f64;
        let dy = 1.0 / params.cells as f64;
        let mut rho = vec![0.0; params.cells];
        let mut s = vec![0.0; params.cells];
        for i in 0..params.cells {
            let mut vol = 0.0;
            let mut s_m = 0.0;
            for j in 0..10 {
                vol += dy_f / fine.rho[10 * i + j];
                s_m += dy_f * fine.s[10 * i + j];
            }
            rho[i] = dy / vol;
            s[i] = s_m / dy;
        }
        let mut u = vec![0.0; params.cells + 1];
        for j in 0..=params.cells {
            u[j] = fine.u[10 * j];
        }
        State::from_fields(0.0, rho, s, u, params)
    }

    #[test]
    fn sampled_mass_and_volume_are_exact() {
        let mut p = params(3, 48);
        p.radius = 1.5;
        let prof = preset(
            "gaussian_bump",
            &[
                ("amplitude".into(), 0.4),
                ("width".into(), 0.2),
                ("radius".into(), 1.5),
            ],
        )
        .unwrap();
        let state = normalize_and_sample(&prof, &p).unwrap();
        let vol = state.total_volume();
        let target = p.radius.powi(3) / 3.0;
        assert!(
            ((vol - target) / target).abs() <= 1e-10,
            "total specific volume {vol} vs R³/3 = {target}"
        );
        state.check_invariants(&p).unwrap();
    }

    #[test]
    fn normalization_constant_matches_quadrature_oracle() {
        // the sampler's density rescale equals 1/∫ρ0 r^{N-1}dr
        let p = params(2, 32);
        let a = 0.5f64;
        let w = 0.125f64;
        let prof = preset(
            "gaussian_bump",
            &[("amplitude".into(), a), ("width".into(), w)],
        )
        .unwrap();
        let state = normalize_and_sample(&prof, &p).unwrap();
        // Simpson oracle for ∫ (1 + a e^{-((r-c)/w)²}) r dr on [0,1]
        let c = 0.5;
        let f = |r: f64| (1.0 + a * (-((r - c) / w).powi(2)).exp()) * r;
        let k = 20000;
        let h = 1.0 / k as f64;
        let mut integral = 0.0;
        for j in 0..k {
            let x = j as f64 * h;
            integral += h / 6.0 * (f(x) + 4.0 * f(x + 0.5 * h) + f(x + h));
        }
        // center-cell density should equal profile value / integral to O(dy²)
        let mid = p.cells / 2;
        let r_mid = 0.5 * (state.r[mid] + state.r[mid + 1]);
        let expect = (1.0 + a * (-((r_mid - c) / w).powi(2)).exp()) / integral;
        let rel = ((state.rho[mid] - expect) / expect).abs();
        assert!(rel < 1e-3, "normalized density vs oracle: {rel:e}");
    }

    #[test]
    fn isobaric_profile_is_pointwise_isobaric() {
        let prof = preset(
            "isobaric_steady",
            &[("c".into(), 1.0), ("gamma".into(), 1.4), ("s_amp".into(), 0.5)],
        )
        .unwrap();
        for k in 0..=40 {
            let r = k as f64 / 40.0;
            let p_val = (prof.rho0)(r).powf(1.4) * (prof.s0)(r).exp();
            assert!((p_val - 1.0).abs() < 1e-13, "P({r}) = {p_val}");
        }
    }

    #[test]
    fn isobaric_sampling_is_uniform_in_pressure() {
        for n in [2u32, 3] {
            let mut p = params(n, 64);
            p.gamma = 1.4;
            let prof = preset(
                "isobaric_steady",
                &[("c".into(), 1.0), ("gamma".into(), 1.4), ("s_amp".into(), 0.5)],
            )
            .unwrap();
            let state = normalize_and_sample(&prof, &p).unwrap();
            let pressures: Vec<f64> = state
                .rho
                .iter()
                .zip(&state.s)
                .map(|(&rho, &s)| pressure(rho, s, p.gamma).unwrap())
                .collect();
            let pbar = pressures.iter().sum::<f64>() / pressures.len() as f64;
            let worst = pressures
                .iter()
                .map(|&pv| ((pv - pbar) / pbar).abs())
                .fold(0.0f64, f64::max);
            assert!(worst <= 1e-10, "N={n}: pressure spread {worst:e}");
        }
    }

    #[test]
    fn hypothesis_gamma_out_of_range_fails() {
        let mut p = params(3, 32);
        p.gamma = 3.5;
        let prof = preset("constant", &[("s".into(), 0.5)]).unwrap();
        let state = normalize_and_sample(&prof, &p).unwrap();
        let report = validate_hypotheses(&state, &p);
        assert!(!report.pass());
        let failed: Vec<_> = report.failures().iter().map(|c| c.name.clone()).collect();
        assert!(failed.contains(&"gamma_range".to_string()), "{failed:?}");
    }

    #[test]
    fn hypothesis_constant_data_passes() {
        let mut p = params(2, 32);
        p.gamma = 1.1;
        let prof = preset("constant", &[]).unwrap();
        let state = normalize_and_sample(&prof, &p).unwrap();
        let report = validate_hypotheses(&state, &p);
        assert!(report.pass(), "{:?}", report.failures());
    }

    #[test]
    fn hypothesis_vacuum_cell_fails_density_bound() {
        let p = params(2, 16);
        let grid = MassGrid::new(16);
        let mut rho = vec![1.0; 16];
        rho[7] = 0.0;
        // bypass the sampling path: the validator must flag rho_min = 0
        let state = State {
            tau: 0.0,
            rho,
            s: vec![0.3; 16],
            u: vec![0.0; 17],
            r: vec![0.0; 17],
        };
        let _ = grid;
        let report = validate_hypotheses(&state, &p);
        assert!(!report.pass());
        assert!(report
            .failures()
            .iter()
            .any(|c| c.name == "density_bounds"));
    }

    #[test]
    fn unknown_preset_rejected() {
        assert!(preset("whirlpool", &[]).is_err());
    }

    #[test]
    fn entropy_layer_has_positive_entropy_and_density_bump() {
        let p = params(2, 64);
        let prof = preset(
            "entropy_layer",
            &[("rho_amplitude".into(), 0.3), ("s_base".into(), 1.0)],
        )
        .unwrap();
        let state = normalize_and_sample(&prof, &p).unwrap();
        let report = validate_hypotheses(&state, &p);
        assert!(report.pass(), "{:?}", report.failures());
        assert!(report.s_min > 0.0);
        assert!(report.rho_max / report.rho_min > 1.2, "density bump present");
    }

    #[test]
    fn velocity_pulse_vanishes_at_boundaries() {
        let p = params(2, 32);
        let prof = preset("velocity_pulse", &[("amplitude".into(), 0.2)]).unwrap();
        let state = normalize_and_sample(&prof, &p).unwrap();
        assert_eq!(state.u[0], 0.0);
        assert_eq!(state.u[32], 0.0);
        assert!(state.u.iter().cloned().fold(0.0f64, f64::max) > 0.1);
    }

    #[test]
    fn tabulated_profile_interpolates() {
        let table = vec![(0.0, 2.0), (0.5, 3.0), (1.0, 2.0)];
        let prof = PhysicalProfile::from_tables(Some(table), None, None).unwrap();
        assert_eq!((prof.rho0)(0.25), 2.5);
        assert_eq!((prof.rho0)(2.0), 2.0); // flat extrapolation
        let p = params(2, 32);
        let state = normalize_and_sample(&prof, &p).unwrap();
        state.check_invariants(&p).unwrap();
    }
}
