//! Command implementations behind the CLI: run, verify, converge, sweep.
//!
//! Exit codes: 0 success, 2 validation failure, 3 solver failure,
//! 4 verification failure.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Result, SimError};
use crate::functionals::{record, DiagnosticsRecord};
use crate::initcond::{normalize_and_sample, preset, validate_hypotheses, PhysicalProfile};
use crate::model::State;
use crate::snapshot::{read_table, write_diagnostics_csv, SnapshotFile};
use crate::solver::advance_to;
use crate::verify::{mms_convergence, run_verify_suite, scheme_agreement, ManufacturedSolution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

pub fn exit_code_for(err: &SimError) -> i32 {
    match err {
        SimError::Validation(_)
        | SimError::Config(_)
        | SimError::InvalidParams(_)
        | SimError::Parse { .. } => EXIT_VALIDATION,
        SimError::Verification(_) => EXIT_VERIFICATION,
        _ => EXIT_SOLVER,
    }
}

/// Builds the initial profile from the config: preset, tabulated files, or
/// a snapshot reloaded as tables.
pub fn build_profile(config: &RunConfig) -> Result<PhysicalProfile> {
    if let Some(snap_path) = &config.snapshot_init {
        let snap = SnapshotFile::read_from(snap_path)?;
        return snap.to_profile();
    }
    if config.rho0_table.is_some() || config.u0_table.is_some() || config.s0_table.is_some() {
        let load = |p: &Option<PathBuf>| -> Result<Option<Vec<(f64, f64)>>> {
            Ok(match p {
                Some(path) => Some(read_table(path)?),
                None => None,
            })
        };
        return PhysicalProfile::from_tables(
            load(&config.rho0_table)?,
            load(&config.u0_table)?,
            load(&config.s0_table)?,
        );
    }
    let name = config
        .preset
        .as_deref()
        .ok_or_else(|| SimError::Config("no preset, tables or snapshot given".into()))?;
    preset(name, &config.preset_arg_list())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| SimError::Config(format!("serialization: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(serde::Serialize)]
struct RunSummary {
    dimension: u32,
    gamma: f64,
    radius: f64,
    cells: usize,
    formulation: String,
    t_end: f64,
    steps: u64,
    wall_seconds: f64,
    hypothesis_pass: bool,
    forced: bool,
    final_record: DiagnosticsRecord,
}

/// Runs one simulation: validates the initial data, advances to t_end
/// writing diagnostics at the configured cadence, drops snapshots at the
/// requested times, and leaves a summary document.
pub fn cmd_run(config: &RunConfig, force: bool) -> i32 {
    match run_inner(config, force || config.force) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("run failed: {e}");
            exit_code_for(&e)
        }
    }
}

fn run_inner(config: &RunConfig, force: bool) -> Result<i32> {
    config.check()?;
    let params = config.to_sim_params()?;
    std::fs::create_dir_all(&config.out_dir)?;

    let profile = build_profile(config)?;
    let initial = normalize_and_sample(&profile, &params)?;
    let hypotheses = validate_hypotheses(&initial, &params);
    write_json(&config.out_dir.join("validation.json"), &hypotheses)?;
    if !hypotheses.pass() {
        for check in hypotheses.failures() {
            eprintln!("hypothesis violated: {}: {}", check.name, check.detail);
        }
        if !force {
            eprintln!("refusing to run (pass --force to override)");
            return Ok(EXIT_VALIDATION);
        }
        eprintln!("running anyway (--force)");
    }

    let started = std::time::Instant::now();
    let mut records = vec![record(&initial, &params, None)];
    let mut steps: u64 = 0;

    // snapshot times partition the run so each snapshot lands exactly
    let mut stops: Vec<f64> = config
        .snapshot_times
        .iter()
        .cloned()
        .filter(|&t| t > initial.tau && t <= params.t_end)
        .collect();
    stops.sort_by(|a, b| a.partial_cmp(b).unwrap());
    stops.dedup();
    if stops.last() != Some(&params.t_end) {
        stops.push(params.t_end);
    }
    let snapshot_times = &config.snapshot_times;

    let cadence_steps = config.cadence_steps.unwrap_or(10);
    let cadence_time = config.cadence_time;
    let mut next_time_tick = cadence_time.map(|dt| initial.tau + dt);

    let mut state = initial;
    let run_result = (|| -> Result<State> {
        for &stop in &stops {
            state = advance_to(state.clone(), stop, &params, |ev| {
                steps += 1;
                let due_steps = cadence_time.is_none() && steps % cadence_steps == 0;
                let due_time = match next_time_tick {
                    Some(tick) => ev.state.tau >= tick,
                    None => false,
                };
                if due_steps || due_time {
                    records.push(record(ev.state, &params, Some((ev.prev, ev.dt))));
                    if let Some(tick) = next_time_tick {
                        let dt = cadence_time.unwrap();
                        let mut t = tick;
                        while t <= ev.state.tau {
                            t += dt;
                        }
                        next_time_tick = Some(t);
                    }
                }
            })?;
            if snapshot_times.contains(&stop) || stop == params.t_end {
                let snap = SnapshotFile::from_state(&state, &params)?;
                let name = format!("snapshot_t{}.txt", fmt_time(stop));
                snap.write_to(&config.out_dir.join(name))?;
            }
        }
        Ok(state.clone())
    })();

    // diagnostics and summary are written even when the solver fails
    let final_record = record(&state, &params, None);
    if records.last().map(|r| r.tau) != Some(state.tau) {
        records.push(final_record.clone());
    }
    write_diagnostics_csv(&config.out_dir.join("diagnostics.csv"), &records)?;
    let summary = RunSummary {
        dimension: params.dimension,
        gamma: params.gamma,
        radius: params.radius,
        cells: params.cells,
        formulation: params.formulation.to_string(),
        t_end: params.t_end,
        steps,
        wall_seconds: started.elapsed().as_secs_f64(),
        hypothesis_pass: hypotheses.pass(),
        forced: force && !hypotheses.pass(),
        final_record,
    };
    write_json(&config.out_dir.join("summary.json"), &summary)?;

    match run_result {
        Ok(_) => Ok(EXIT_OK),
        Err(e) => {
            eprintln!("solver failed at tau = {}: {e}", state.tau);
            Ok(EXIT_SOLVER)
        }
    }
}

fn fmt_time(t: f64) -> String {
    format!("{t}").replace('.', "p")
}

/// Runs the verification suite and reports one line per check.
pub fn cmd_verify(config: &RunConfig) -> i32 {
    let inner = || -> Result<i32> {
        let params = config.to_sim_params()?;
        std::fs::create_dir_all(&config.out_dir)?;
        let report = run_verify_suite(&params)?;
        for check in &report.checks {
            println!(
                "{} {} — {}",
                if check.pass { "PASS" } else { "FAIL" },
                check.name,
                check.detail
            );
        }
        write_json(&config.out_dir.join("verify_report.json"), &report)?;
        if report.all_pass {
            println!("all checks passed");
            Ok(EXIT_OK)
        } else {
            let first = report.first_failure().unwrap();
            eprintln!("verification failed: {}", first.name);
            Ok(EXIT_VERIFICATION)
        }
    };
    match inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("verify failed: {e}");
            exit_code_for(&e)
        }
    }
}

#[derive(serde::Serialize)]
struct ConvergeOutput {
    mms: crate::verify::ConvergenceReport,
    scheme_agreement: crate::verify::AgreementReport,
}

/// Convergence study: manufactured solutions plus cross-formulation
/// agreement across the configured refinement levels.
pub fn cmd_converge(config: &RunConfig) -> i32 {
    let inner = || -> Result<i32> {
        let params = config.to_sim_params()?;
        let levels = config
            .converge
            .as_ref()
            .map(|c| c.levels.clone())
            .unwrap_or_else(|| vec![32, 64, 128]);
        if levels.len() < 3 {
            return Err(SimError::Config(
                "convergence study needs at least 3 levels".into(),
            ));
        }
        std::fs::create_dir_all(&config.out_dir)?;
        let sol = ManufacturedSolution::default_smooth();
        let mms = mms_convergence(&params, &sol, &levels)?;
        println!(
            "mms: spatial order {:.2}, temporal order {:.2}",
            mms.spatial_order, mms.temporal_order
        );
        let agree = scheme_agreement(
            &params,
            "gaussian_bump",
            &[
                ("amplitude".to_string(), 0.3),
                ("radius".to_string(), params.radius),
            ],
            0.25,
            &levels,
        )?;
        println!("scheme agreement order {:.2}", agree.order);
        let out = ConvergeOutput {
            mms,
            scheme_agreement: agree,
        };
        write_json(&config.out_dir.join("converge_report.json"), &out)?;
        Ok(EXIT_OK)
    };
    match inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("converge failed: {e}");
            exit_code_for(&e)
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
struct SweepCell {
    label: String,
    dimension: u32,
    gamma: f64,
    args: Vec<(String, f64)>,
    status: String,
}

/// Cartesian sweep over (dimension, gamma, preset args); one run directory
/// per cell, failures recorded without stopping the sweep, and a roll-up
/// CSV of end-time diagnostics.
pub fn cmd_sweep(config: &RunConfig, workers: Option<usize>) -> i32 {
    let inner = || -> Result<i32> {
        config.to_sim_params()?.validate()?;
        let sweep = config
            .sweep
            .clone()
            .ok_or_else(|| SimError::Config("config carries no [sweep] section".into()))?;
        std::fs::create_dir_all(&config.out_dir)?;

        let dims = if sweep.dimension.is_empty() {
            vec![config.dimension]
        } else {
            sweep.dimension.clone()
        };
        let gammas = if sweep.gamma.is_empty() {
            vec![config.gamma]
        } else {
            sweep.gamma.clone()
        };
        // Cartesian product over the swept preset arguments
        let mut arg_sets: Vec<Vec<(String, f64)>> = vec![Vec::new()];
        for (key, values) in &sweep.preset_args {
            let mut next = Vec::new();
            for base in &arg_sets {
                for &v in values {
                    let mut set = base.clone();
                    set.push((key.clone(), v));
                    next.push(set);
                }
            }
            arg_sets = next;
        }

        let mut cells = Vec::new();
        for &dim in &dims {
            for &gamma in &gammas {
                for args in &arg_sets {
                    let mut label = format!("N{dim}_g{gamma}");
                    for (k, v) in args {
                        label.push_str(&format!("_{k}{v}"));
                    }
                    let label = label.replace('.', "p");
                    cells.push((dim, gamma, args.clone(), label));
                }
            }
        }
        println!("sweep over {} cells", cells.len());

        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.unwrap_or(0))
            .build()
            .map_err(|e| SimError::Config(format!("worker pool: {e}")))?;
        let results: Vec<(SweepCell, Option<DiagnosticsRecord>)> = pool.install(|| {
            cells
                .par_iter()
                .map(|(dim, gamma, args, label)| {
                    let mut sub = config.clone();
                    sub.dimension = *dim;
                    sub.gamma = *gamma;
                    sub.sweep = None;
                    for (k, v) in args {
                        sub.preset_args.insert(k.clone(), *v);
                    }
                    sub.out_dir = config.out_dir.join(label);
                    let code = cmd_run(&sub, sub.force);
                    let status = if code == EXIT_OK {
                        "ok".to_string()
                    } else {
                        format!("failed (exit {code})")
                    };
                    let final_rec = if code == EXIT_OK {
                        read_final_record(&sub.out_dir.join("diagnostics.csv"))
                    } else {
                        None
                    };
                    (
                        SweepCell {
                            label: label.clone(),
                            dimension: *dim,
                            gamma: *gamma,
                            args: args.clone(),
                            status,
                        },
                        final_rec,
                    )
                })
                .collect()
        });

        let mut rollup = String::from("label,dimension,gamma,status,");
        rollup.push_str(DiagnosticsRecord::CSV_HEADER);
        rollup.push('\n');
        for (cell, rec) in &results {
            let tail = rec
                .as_ref()
                .map(|r| r.csv_row())
                .unwrap_or_else(|| ",".repeat(19));
            rollup.push_str(&format!(
                "{},{},{},{},{}\n",
                cell.label, cell.dimension, cell.gamma, cell.status, tail
            ));
        }
        std::fs::write(config.out_dir.join("rollup.csv"), rollup)?;
        let failures = results.iter().filter(|(c, _)| c.status != "ok").count();
        println!(
            "sweep finished: {} ok, {} failed",
            results.len() - failures,
            failures
        );
        Ok(EXIT_OK)
    };
    match inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sweep failed: {e}");
            exit_code_for(&e)
        }
    }
}

/// Reads the last data row of a diagnostics CSV back into a record.
fn read_final_record(path: &Path) -> Option<DiagnosticsRecord> {
    let text = std::fs::read_to_string(path).ok()?;
    let line = text.lines().filter(|l| !l.is_empty()).last()?;
    let vals: Vec<f64> = line.split(',').map(|t| t.parse().ok()).collect::<Option<_>>()?;
    if vals.len() != 20 {
        return None;
    }
    Some(DiagnosticsRecord {
        tau: vals[0],
        mass: vals[1],
        total_volume: vals[2],
        e_basic: vals[3],
        d_basic: vals[4],
        e_bd: vals[5],
        d_bd: vals[6],
        s_bd: vals[7],
        rho_min: vals[8],
        rho_max: vals[9],
        s_min: vals[10],
        s_max: vals[11],
        sup_u: vals[12],
        sup_w: vals[13],
        l4_u: vals[14],
        l4_w: vals[15],
        l2_grad_rho_weighted: vals[16],
        weighted_origin_norm: vals[17],
        energy_residual: vals[18],
        bd_residual: vals[19],
    })
}
