//! Run configuration: a flat TOML document mapping onto `SimParams` plus
//! initial-data selection, output cadence and the sweep grid.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;

use crate::error::{Result, SimError};
use crate::model::{DtPolicy, Formulation, SimParams};

fn default_dimension() -> u32 {
    2
}
fn default_gamma() -> f64 {
    1.4
}
fn default_radius() -> f64 {
    1.0
}
fn default_cells() -> usize {
    256
}
fn default_formulation() -> String {
    "primitive".into()
}
fn default_t_end() -> f64 {
    1.0
}
fn default_xi() -> f64 {
    0.1
}
fn default_tol_volume() -> f64 {
    1e-12
}
fn default_tol_energy() -> f64 {
    1e-10
}
fn default_tol_steady() -> f64 {
    1e-11
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Convergence-study section.
#[derive(Debug, Clone, Deserialize)]
pub struct ConvergeConfig {
    pub levels: Vec<usize>,
}

/// Sweep grid: Cartesian product of dimensions, gammas and swept preset
/// arguments.
#[derive(Debug, Clone, Deserialize, Default)]
pub struct SweepConfig {
    #[serde(default)]
    pub dimension: Vec<u32>,
    #[serde(default)]
    pub gamma: Vec<f64>,
    /// Preset arguments swept over lists of values.
    #[serde(default, flatten)]
    pub preset_args: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // physical and numerical parameters (units: R in length, times in the
    // acoustic units of the normalized system)
    #[serde(default = "default_dimension")]
    pub dimension: u32,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default = "default_formulation")]
    pub formulation: String,
    /// CFL fraction; ignored when dt_fixed is set.
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default)]
    pub dt_fixed: Option<f64>,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_xi")]
    pub origin_weight_xi: f64,
    /// Override of the dissipation coefficient κ_N (default 2(N−1)).
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default = "default_tol_volume")]
    pub tol_volume: f64,
    #[serde(default = "default_tol_energy")]
    pub tol_energy: f64,
    #[serde(default = "default_tol_steady")]
    pub tol_steady: f64,

    // initial data: preset with arguments, tabulated profiles, or a
    // snapshot reloaded as tables
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub preset_args: BTreeMap<String, f64>,
    #[serde(default)]
    pub rho0_table: Option<PathBuf>,
    #[serde(default)]
    pub u0_table: Option<PathBuf>,
    #[serde(default)]
    pub s0_table: Option<PathBuf>,
    #[serde(default)]
    pub snapshot_init: Option<PathBuf>,

    // outputs
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Record diagnostics every k steps…
    #[serde(default)]
    pub cadence_steps: Option<u64>,
    /// …or every Δτ of simulated time.
    #[serde(default)]
    pub cadence_time: Option<f64>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Run even when the hypothesis validation fails.
    #[serde(default)]
    pub force: bool,

    #[serde(default)]
    pub converge: Option<ConvergeConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config populates defaults")
    }
}

impl RunConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = toml::from_str(&text).map_err(|e| SimError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if let Some(k) = self.cadence_steps {
            if k == 0 {
                return Err(SimError::Config("cadence_steps must be positive".into()));
            }
        }
        if let Some(dt) = self.cadence_time {
            if !(dt > 0.0) {
                return Err(SimError::Config("cadence_time must be positive".into()));
            }
        }
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_end).contains(&t) {
                return Err(SimError::Config(format!(
                    "snapshot time {t} outside [0, t_end = {}]",
                    self.t_end
                )));
            }
        }
        self.to_sim_params()?.validate()
    }

    pub fn to_sim_params(&self) -> Result<SimParams> {
        let dt_policy = match (self.dt_fixed, self.cfl) {
            (Some(dt), _) => DtPolicy::Fixed(dt),
            (None, Some(c)) => DtPolicy::Cfl(c),
            (None, None) => DtPolicy::Cfl(0.5),
        };
        let formulation: Formulation = self.formulation.parse()?;
        Ok(SimParams {
            dimension: self.dimension,
            gamma: self.gamma,
            radius: self.radius,
            cells: self.cells,
            dt_policy,
            t_end: self.t_end,
            formulation,
            origin_weight_xi: self.origin_weight_xi,
            kappa_override: self.kappa,
            tol_volume: self.tol_volume,
            tol_energy: self.tol_energy,
            tol_steady: self.tol_steady,
        })
    }

    /// Preset arguments as (key, value) pairs with the domain radius and
    /// adiabatic index injected for presets that need them.
    pub fn preset_arg_list(&self) -> Vec<(String, f64)> {
        let mut args: Vec<(String, f64)> = self
            .preset_args
            .iter()
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        if !self.preset_args.contains_key("radius") {
            args.push(("radius".into(), self.radius));
        }
        if !self.preset_args.contains_key("gamma") {
            args.push(("gamma".into(), self.gamma));
        }
        args
    }
}
