//! Core model: domain types, the mass-coordinate geometry map, the equation
//! of state and the effective-velocity transformation.
//!
//! The unknowns live on a staggered grid over the mass coordinate y ∈ [0,1]:
//! density ρ and entropy s at cell centers, velocity u, effective velocity w
//! and physical radius r at nodes. The radius is always reconstructed from
//! the density through the shell-volume relation r_{i+1}^N − r_i^N = N·Δy/ρ_i,
//! which discretizes ∂_y r = 1/(ρ r^{N−1}) exactly.

use crate::error::{Result, SimError};

/// Which Lagrangian formulation the time stepper advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// Momentum equation in u with semi-implicit degenerate viscosity.
    Primitive,
    /// Transport equation for the effective velocity w = u + 2 r^{N−1} ∂_y ρ.
    Effective,
}

impl std::str::FromStr for Formulation {
    type Err = SimError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primitive" => Ok(Formulation::Primitive),
            "effective" => Ok(Formulation::Effective),
            other => Err(SimError::Config(format!(
                "unknown formulation '{other}' (expected 'primitive' or 'effective')"
            ))),
        }
    }
}

impl std::fmt::Display for Formulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Formulation::Primitive => write!(f, "primitive"),
            Formulation::Effective => write!(f, "effective"),
        }
    }
}

/// Time-step selection policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtPolicy {
    /// Fixed step size.
    Fixed(f64),
    /// Acoustic CFL fraction in (0, 1].
    Cfl(f64),
}

/// Physical and numerical configuration of one simulation.
#[derive(Debug, Clone)]
pub struct SimParams {
    /// Spatial dimension N, 2 or 3.
    pub dimension: u32,
    /// Adiabatic index γ > 1 in the pressure law P = ρ^γ e^s.
    pub gamma: f64,
    /// Domain radius R of the ball B_R.
    pub radius: f64,
    /// Number of mass cells M.
    pub cells: usize,
    pub dt_policy: DtPolicy,
    pub t_end: f64,
    pub formulation: Formulation,
    /// Exponent ξ ∈ (0,1) of the weighted density norm near the origin.
    pub origin_weight_xi: f64,
    /// Coefficient of the u²/r² term in the basic dissipation.
    /// `None` selects 2(N−1); the alternative value 2 can be forced here.
    pub kappa_override: Option<f64>,
    /// Relative drift allowed in total specific volume per 1000 steps.
    pub tol_volume: f64,
    /// Allowed drift of conserved energies on quiescent states.
    pub tol_energy: f64,
    /// Allowed sup-norm drift per unit time on steady states.
    pub tol_steady: f64,
}

impl SimParams {
    pub fn new(dimension: u32, gamma: f64, radius: f64, cells: usize) -> Self {
        SimParams {
            dimension,
            gamma,
            radius,
            cells,
            dt_policy: DtPolicy::Cfl(0.5),
            t_end: 1.0,
            formulation: Formulation::Primitive,
            origin_weight_xi: 0.1,
            kappa_override: None,
            tol_volume: 1e-12,
            tol_energy: 1e-10,
            tol_steady: 1e-11,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension != 2 && self.dimension != 3 {
            return Err(SimError::InvalidParams(format!(
                "dimension must be 2 or 3, got {}",
                self.dimension
            )));
        }
        if !(self.gamma > 1.0) {
            return Err(SimError::InvalidParams(format!(
                "gamma must exceed 1, got {}",
                self.gamma
            )));
        }
        if !(self.radius > 0.0) {
            return Err(SimError::InvalidParams("radius must be positive".into()));
        }
        if self.cells < 8 {
            return Err(SimError::InvalidParams(format!(
                "at least 8 cells required, got {}",
                self.cells
            )));
        }
        match self.dt_policy {
            DtPolicy::Fixed(dt) if !(dt > 0.0) => {
                return Err(SimError::InvalidParams("fixed dt must be positive".into()));
            }
            DtPolicy::Cfl(c) if !(c > 0.0 && c <= 1.0) => {
                return Err(SimError::InvalidParams(format!(
                    "CFL fraction must lie in (0,1], got {c}"
                )));
            }
            _ => {}
        }
        if !(self.t_end >= 0.0) {
            return Err(SimError::InvalidParams("t_end must be non-negative".into()));
        }
        if !(self.origin_weight_xi > 0.0 && self.origin_weight_xi < 1.0) {
            return Err(SimError::InvalidParams(format!(
                "origin_weight_xi must lie in (0,1), got {}",
                self.origin_weight_xi
            )));
        }
        for (name, tol) in [
            ("tol_volume", self.tol_volume),
            ("tol_energy", self.tol_energy),
            ("tol_steady", self.tol_steady),
        ] {
            if !(tol > 0.0) {
                return Err(SimError::InvalidParams(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Dissipation coefficient κ_N of the u²/r² term.
    pub fn kappa(&self) -> f64 {
        self.kappa_override
            .unwrap_or(2.0 * (self.dimension as f64 - 1.0))
    }

    /// CFL fraction used by `stable_dt` (1 when running at a fixed step).
    pub fn cfl_fraction(&self) -> f64 {
        match self.dt_policy {
            DtPolicy::Cfl(c) => c,
            DtPolicy::Fixed(_) => 1.0,
        }
    }

    pub fn grid(&self) -> MassGrid {
        MassGrid::new(self.cells)
    }
}

/// Uniform partition of the mass coordinate y ∈ [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MassGrid {
    pub cells: usize,
}

impl MassGrid {
    pub fn new(cells: usize) -> Self {
        MassGrid { cells }
    }

    pub fn dy(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Node position y_i = i·Δy, i = 0..=M.
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.cells as f64
    }

    /// Cell center y_{i+1/2}, i = 0..M.
    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.cells as f64
    }
}

/// r^{N−1} for N ∈ {2,3}.
#[inline]
pub(crate) fn rpow_nm1(r: f64, n: u32) -> f64 {
    match n {
        2 => r,
        _ => r * r,
    }
}

/// r^N for N ∈ {2,3}.
#[inline]
pub(crate) fn rpow_n(r: f64, n: u32) -> f64 {
    match n {
        2 => r * r,
        _ => r * r * r,
    }
}

/// N-th root for N ∈ {2,3}.
#[inline]
pub(crate) fn root_n(x: f64, n: u32) -> f64 {
    match n {
        2 => x.sqrt(),
        _ => x.cbrt(),
    }
}

/// Pressure law P = ρ^γ e^s.
pub fn pressure(rho: f64, s: f64, gamma: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(SimError::InvalidState(format!(
            "pressure requires positive density, got {rho}"
        )));
    }
    Ok(rho.powf(gamma) * s.exp())
}

/// Adiabatic sound speed c = √(γP/ρ) = √(γ ρ^{γ−1} e^s).
pub fn sound_speed(rho: f64, s: f64, gamma: f64) -> f64 {
    (gamma * rho.powf(gamma - 1.0) * s.exp()).sqrt()
}

/// Rebuilds the nodal radii from cell densities via
/// r_{i+1} = (r_i^N + N·Δy/ρ_i)^{1/N}, r_0 = 0.
pub fn reconstruct_radius(rho: &[f64], grid: &MassGrid, params: &SimParams) -> Result<Vec<f64>> {
    let n = params.dimension;
    let dy = grid.dy();
    let mut r = vec![0.0; rho.len() + 1];
    let mut rn = 0.0;
    for (i, &rho_i) in rho.iter().enumerate() {
        if !(rho_i > 0.0) {
            return Err(SimError::DensityPositivity {
                cell: i,
                value: rho_i,
            });
        }
        rn += n as f64 * dy / rho_i;
        r[i + 1] = root_n(rn, n);
    }
    Ok(r)
}

/// Full discrete solution at one time.
#[derive(Debug, Clone)]
pub struct State {
    pub tau: f64,
    /// Cell densities, length M.
    pub rho: Vec<f64>,
    /// Cell entropies, length M. Never touched by the time loop.
    pub s: Vec<f64>,
    /// Nodal velocities, length M+1, pinned to 0 at both ends.
    pub u: Vec<f64>,
    /// Nodal radii, length M+1, reconstructed from ρ.
    pub r: Vec<f64>,
}

impl State {
    /// Builds a state from cell/node fields; reconstructs r and pins the
    /// boundary velocities.
    pub fn from_fields(
        tau: f64,
        rho: Vec<f64>,
        s: Vec<f64>,
        mut u: Vec<f64>,
        params: &SimParams,
    ) -> Result<State> {
        let m = rho.len();
        if s.len() != m || u.len() != m + 1 {
            return Err(SimError::InvalidState(format!(
                "field lengths inconsistent: rho {}, s {}, u {}",
                m,
                s.len(),
                u.len()
            )));
        }
        let grid = MassGrid::new(m);
        let r = reconstruct_radius(&rho, &grid, params)?;
        u[0] = 0.0;
        u[m] = 0.0;
        Ok(State { tau, rho, s, u, r })
    }

    pub fn cells(&self) -> usize {
        self.rho.len()
    }

    pub fn grid(&self) -> MassGrid {
        MassGrid::new(self.rho.len())
    }

    /// Total specific volume Σ Δy/ρ (= R^N/N when the mass is normalized).
    pub fn total_volume(&self) -> f64 {
        let dy = self.grid().dy();
        self.rho.iter().map(|&rho| dy / rho).sum()
    }

    /// Largest violation of the discrete geometry identity
    /// r_{i+1}^N − r_i^N = N·Δy/ρ_i.
    pub fn geometry_residual(&self, params: &SimParams) -> f64 {
        let n = params.dimension;
        let dy = self.grid().dy();
        let mut worst = 0.0f64;
        for i in 0..self.cells() {
            let res =
                (rpow_n(self.r[i + 1], n) - rpow_n(self.r[i], n) - n as f64 * dy / self.rho[i])
                    .abs();
            worst = worst.max(res);
        }
        worst
    }

    pub fn check_invariants(&self, params: &SimParams) -> Result<()> {
        let m = self.cells();
        if self.s.len() != m || self.u.len() != m + 1 || self.r.len() != m + 1 {
            return Err(SimError::InvalidState("field lengths inconsistent".into()));
        }
        for (i, &rho) in self.rho.iter().enumerate() {
            if !(rho > 0.0) {
                return Err(SimError::DensityPositivity {
                    cell: i,
                    value: rho,
                });
            }
        }
        if self.r[0] != 0.0 {
            return Err(SimError::InvalidState("r[0] must be 0".into()));
        }
        if self.r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SimError::InvalidState(
                "radii must be strictly increasing".into(),
            ));
        }
        if self.u[0] != 0.0 || self.u[m] != 0.0 {
            return Err(SimError::InvalidState(
                "boundary velocities must be pinned to 0".into(),
            ));
        }
        let geo = self.geometry_residual(params);
        let tol = 1e-12 * rpow_n(params.radius, params.dimension).max(1.0);
        if geo > tol {
            return Err(SimError::InvalidState(format!(
                "geometry identity violated: residual {geo:e} exceeds {tol:e}"
            )));
        }
        Ok(())
    }
}

/// Nodal mass-coordinate density gradient: centered two-cell difference at
/// interior nodes, second-order one-sided stencils at the ends. Written in
/// difference form so constant fields give exactly zero.
pub fn density_gradient_nodes(field: &[f64], dy: f64) -> Vec<f64> {
    let m = field.len();
    assert!(m >= 3, "gradient stencils need at least 3 cells");
    let mut d = vec![0.0; m + 1];
    d[0] = (2.0 * (field[1] - field[0]) + (field[1] - field[2])) / dy;
    for j in 1..m {
        d[j] = (field[j] - field[j - 1]) / dy;
    }
    d[m] = (2.0 * (field[m - 1] - field[m - 2]) - (field[m - 2] - field[m - 3])) / dy;
    d
}

/// Effective velocity field at the nodes.
#[derive(Debug, Clone)]
pub struct EffectiveState {
    pub w: Vec<f64>,
}

/// w = u + 2 r^{N−1} ∂_y ρ at every node.
pub fn effective_velocity(state: &State, params: &SimParams) -> EffectiveState {
    let n = params.dimension;
    let dy = state.grid().dy();
    let drho = density_gradient_nodes(&state.rho, dy);
    let w = state
        .u
        .iter()
        .zip(state.r.iter())
        .zip(drho.iter())
        .map(|((&u, &r), &d)| u + 2.0 * rpow_nm1(r, n) * d)
        .collect();
    EffectiveState { w }
}

/// Inverts `effective_velocity`: u = w − 2 r^{N−1} ∂_y ρ, boundaries pinned.
pub fn recover_velocity(
    eff: &EffectiveState,
    rho: &[f64],
    r: &[f64],
    params: &SimParams,
) -> Vec<f64> {
    let n = params.dimension;
    let m = rho.len();
    let dy = 1.0 / m as f64;
    let drho = density_gradient_nodes(rho, dy);
    let mut u: Vec<f64> = eff
        .w
        .iter()
        .zip(r.iter())
        .zip(drho.iter())
        .map(|((&w, &r), &d)| w - 2.0 * rpow_nm1(r, n) * d)
        .collect();
    u[0] = 0.0;
    u[m] = 0.0;
    u
}
