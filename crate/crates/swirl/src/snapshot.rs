//! Headered plain-text snapshots of one State: node rows (y, r, u, w) and
//! cell rows (y_center, rho, s, P). Floats are written in Rust's shortest
//! round-trip form, so parse(write(x)) = x to the bit.

use std::io::Write;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::functionals;
use crate::model::{effective_velocity, pressure, SimParams, State};

pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub version: u32,
    pub dimension: u32,
    pub gamma: f64,
    pub radius: f64,
    pub cells: usize,
    pub tau: f64,
    /// (y, r, u, w) per node, length cells + 1.
    pub nodes: Vec<(f64, f64, f64, f64)>,
    /// (y_center, rho, s, P) per cell, length cells.
    pub cell_rows: Vec<(f64, f64, f64, f64)>,
}

impl SnapshotFile {
    pub fn from_state(state: &State, params: &SimParams) -> Result<Self> {
        let m = state.cells();
        let grid = state.grid();
        let eff = effective_velocity(state, params);
        let nodes = (0..=m)
            .map(|j| (grid.node(j), state.r[j], state.u[j], eff.w[j]))
            .collect();
        let cell_rows = (0..m)
            .map(|i| {
                Ok((
                    grid.cell_center(i),
                    state.rho[i],
                    state.s[i],
                    pressure(state.rho[i], state.s[i], params.gamma)?,
                ))
            })
            .collect::<Result<_>>()?;
        Ok(SnapshotFile {
            version: SNAPSHOT_VERSION,
            dimension: params.dimension,
            gamma: params.gamma,
            radius: params.radius,
            cells: m,
            tau: state.tau,
            nodes,
            cell_rows,
        })
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut out = Vec::new();
        writeln!(out, "# swirl snapshot").unwrap();
        writeln!(out, "version = {}", self.version).unwrap();
        writeln!(out, "dimension = {}", self.dimension).unwrap();
        writeln!(out, "gamma = {}", self.gamma).unwrap();
        writeln!(out, "radius = {}", self.radius).unwrap();
        writeln!(out, "cells = {}", self.cells).unwrap();
        writeln!(out, "tau = {}", self.tau).unwrap();
        writeln!(out, "# nodes: y r u w").unwrap();
        for &(y, r, u, w) in &self.nodes {
            writeln!(out, "{y} {r} {u} {w}").unwrap();
        }
        writeln!(out, "# cells: y_center rho s P").unwrap();
        for &(y, rho, s, p) in &self.cell_rows {
            writeln!(out, "{y} {rho} {s} {p}").unwrap();
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let err = |message: &str| SimError::Parse {
            path: path.display().to_string(),
            message: message.into(),
        };
        let mut version = None;
        let mut dimension = None;
        let mut gamma = None;
        let mut radius = None;
        let mut cells: Option<usize> = None;
        let mut tau = None;
        let mut nodes = Vec::new();
        let mut cell_rows = Vec::new();
        #[derive(PartialEq)]
        enum Section {
            Header,
            Nodes,
            Cells,
        }
        let mut section = Section::Header;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('#') {
                if line.starts_with("# nodes:") {
                    section = Section::Nodes;
                } else if line.starts_with("# cells:") {
                    section = Section::Cells;
                }
                continue;
            }
            match section {
                Section::Header => {
                    let (key, value) = line
                        .split_once('=')
                        .ok_or_else(|| err(&format!("bad header line '{line}'")))?;
                    let key = key.trim();
                    let value = value.trim();
                    match key {
                        "version" => version = Some(value.parse().map_err(|_| err("version"))?),
                        "dimension" => {
                            dimension = Some(value.parse().map_err(|_| err("dimension"))?)
                        }
                        "gamma" => gamma = Some(value.parse().map_err(|_| err("gamma"))?),
                        "radius" => radius = Some(value.parse().map_err(|_| err("radius"))?),
                        "cells" => cells = Some(value.parse().map_err(|_| err("cells"))?),
                        "tau" => tau = Some(value.parse().map_err(|_| err("tau"))?),
                        other => return Err(err(&format!("unknown header key '{other}'"))),
                    }
                }
                Section::Nodes | Section::Cells => {
                    let vals: Vec<f64> = line
                        .split_whitespace()
                        .map(|t| t.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| err(&format!("bad data row '{line}'")))?;
                    if vals.len() != 4 {
                        return Err(err("data rows carry 4 columns"));
                    }
                    let row = (vals[0], vals[1], vals[2], vals[3]);
                    if section == Section::Nodes {
                        nodes.push(row);
                    } else {
                        cell_rows.push(row);
                    }
                }
            }
        }
        let cells = cells.ok_or_else(|| err("missing cells"))?;
        if nodes.len() != cells + 1 || cell_rows.len() != cells {
            return Err(err(&format!(
                "row counts ({} nodes, {} cells) do not match cells = {cells}",
                nodes.len(),
                cell_rows.len()
            )));
        }
        Ok(SnapshotFile {
            version: version.ok_or_else(|| err("missing version"))?,
            dimension: dimension.ok_or_else(|| err("missing dimension"))?,
            gamma: gamma.ok_or_else(|| err("missing gamma"))?,
            radius: radius.ok_or_else(|| err("missing radius"))?,
            cells,
            tau: tau.ok_or_else(|| err("missing tau"))?,
            nodes,
            cell_rows,
        })
    }

    /// Rebuilds a State on the snapshot's own grid (radius reconstructed
    /// from the stored densities).
    pub fn to_state(&self, params: &SimParams) -> Result<State> {
        let rho = self.cell_rows.iter().map(|r| r.1).collect();
        let s = self.cell_rows.iter().map(|r| r.2).collect();
        let u = self.nodes.iter().map(|r| r.2).collect();
        State::from_fields(self.tau, rho, s, u, params)
    }

    /// Reinterprets the snapshot as tabulated physical-space profiles
    /// (r, value), suitable as initial data for a new run.
    pub fn to_profile(&self) -> Result<crate::initcond::PhysicalProfile> {
        let cell_radii: Vec<f64> = self
            .nodes
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1))
            .collect();
        let rho_table: Vec<(f64, f64)> = cell_radii
            .iter()
            .zip(&self.cell_rows)
            .map(|(&r, row)| (r, row.1))
            .collect();
        let s_table: Vec<(f64, f64)> = cell_radii
            .iter()
            .zip(&self.cell_rows)
            .map(|(&r, row)| (r, row.2))
            .collect();
        let u_table: Vec<(f64, f64)> = self.nodes.iter().map(|n| (n.1, n.2)).collect();
        crate::initcond::PhysicalProfile::from_tables(
            Some(rho_table),
            Some(u_table),
            Some(s_table),
        )
    }
}

/// Writes one diagnostics CSV with the frozen column order.
pub fn write_diagnostics_csv(
    path: &Path,
    records: &[functionals::DiagnosticsRecord],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(functionals::DiagnosticsRecord::CSV_HEADER);
    out.push('\n');
    for rec in records {
        out.push_str(&rec.csv_row());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Loads a two-column (r, value) table, skipping blank and '#' lines.
pub fn read_table(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        let (a, b) = (it.next(), it.next());
        match (a, b) {
            (Some(a), Some(b)) => rows.push((
                a.parse().map_err(|_| SimError::Parse {
                    path: path.display().to_string(),
                    message: format!("bad number '{a}'"),
                })?,
                b.parse().map_err(|_| SimError::Parse {
                    path: path.display().to_string(),
                    message: format!("bad number '{b}'"),
                })?,
            )),
            _ => {
                return Err(SimError::Parse {
                    path: path.display().to_string(),
                    message: format!("expected two columns, got '{line}'"),
                })
            }
        }
    }
    Ok(rows)
}
