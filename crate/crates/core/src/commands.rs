//! The five `risleo` subcommands. Each reads a validated [`RunConfig`],
//! writes its CSV files plus a `<command>.config.toml` sidecar into the
//! output directory, and returns a text summary for stdout.

use std::fmt::{self, Write as _};
use std::path::Path;

use crate::config::{ElevationTarget, RunConfig};
use crate::constellation::{blockage_report, classify_regime, Preset, Regime};
use crate::engine::{
    coverage_map, ordered_map, tilt_curve, tilt_samples, DoubleRisEvaluator, DoubleRisScenario,
    SatElevationModel, ServingLink,
};
use crate::error::{Error, Result};
use crate::geometry::{CanyonScenario, Vec3};
use crate::output::{
    angle_tag, format_blockage_table, format_validation, write_blockage, write_coverage,
    write_double_ris, write_sidecar, write_tilt, write_validation, BlockageRow, DoubleRisRow,
    TiltRow,
};
use crate::validate::run_suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Coverage,
    TiltSweep,
    DoubleRis,
    BlockageTable,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Coverage => "coverage",
            Command::TiltSweep => "tilt-sweep",
            Command::DoubleRis => "double-ris",
            Command::BlockageTable => "blockage-table",
            Command::Validate => "validate",
        }
    }

    /// The elevation list `--elevations` replaces for this command.
    pub fn elevation_target(self) -> ElevationTarget {
        match self {
            Command::Coverage => ElevationTarget::Coverage,
            Command::TiltSweep => ElevationTarget::Tilt,
            Command::DoubleRis => ElevationTarget::DoubleRis,
            Command::BlockageTable | Command::Validate => ElevationTarget::None,
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    /// Written files, relative to the output directory.
    pub files: Vec<String>,
    pub summary: String,
    /// `false` only for a failed `validate`.
    pub passed: bool,
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })
}

/// Validates `config`, runs `command`, and writes the sidecar last.
pub fn run(command: Command, config: &RunConfig) -> Result<CommandOutput> {
    config.validate()?;
    let resolved = config.resolved()?;
    let dir = resolved.output.dir.clone();
    prepare_dir(&dir)?;
    let out = match command {
        Command::Coverage => cmd_coverage(&resolved, &dir)?,
        Command::TiltSweep => cmd_tilt_sweep(&resolved, &dir)?,
        Command::DoubleRis => cmd_double_ris(&resolved, &dir)?,
        Command::BlockageTable => cmd_blockage_table(&resolved, &dir)?,
        Command::Validate => cmd_validate(&resolved, &dir)?,
    };
    write_sidecar(&dir, command.name(), &resolved, &out.files)?;
    Ok(out)
}

fn min_max(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

pub fn cmd_coverage(config: &RunConfig, dir: &Path) -> Result<CommandOutput> {
    let scene = config.scene()?;
    let grid = config.grid()?;
    let workers = config.workers()?;
    let kind = config.coverage_link();
    let mut files = Vec::new();
    let mut summary = String::new();
    for &deg in &config.sweep.elevations_deg {
        let map = coverage_map(&scene, deg.to_radians(), &grid, kind, workers)?;
        let name = format!("coverage_el{}.csv", angle_tag(deg));
        write_coverage(&dir.join(&name), &map)?;
        let blocked = map.values.iter().filter(|v| v.is_none()).count();
        let _ = write!(
            summary,
            "{name}: {} x {} cells, {} elements, link {kind}, {blocked} blocked",
            map.nx, map.ny, map.element_count
        );
        if let Some((lo, hi)) = min_max(map.values.iter().flatten().copied()) {
            let _ = write!(summary, ", SNR {lo:.2} to {hi:.2} dB");
        }
        summary.push('\n');
        files.push(name);
    }
    Ok(CommandOutput {
        files,
        summary,
        passed: true,
    })
}

/// Tilt values in degrees matching [`tilt_samples`] on the same range.
fn tilt_degrees(config: &RunConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = &config.sweep;
    let rad = tilt_samples(
        s.tilt_min_deg.to_radians(),
        s.tilt_max_deg.to_radians(),
        s.tilt_step_deg.to_radians(),
    )?;
    let deg = (0..rad.len())
        .map(|i| s.tilt_min_deg + i as f64 * s.tilt_step_deg)
        .collect();
    Ok((deg, rad))
}

pub fn cmd_tilt_sweep(config: &RunConfig, dir: &Path) -> Result<CommandOutput> {
    let scene = config.scene()?;
    let workers = config.workers()?;
    let (deg, rad) = tilt_degrees(config)?;
    let users: Vec<Vec3> = config
        .sweep
        .users
        .iter()
        .map(|&[x, y]| Vec3::new(x, y, 0.0))
        .collect();
    let mut files = Vec::new();
    let mut summary = String::new();
    for &el in &config.sweep.tilt_sat_elevations_deg {
        let curves = ordered_map(&users, workers, |&u| {
            tilt_curve(&scene, el.to_radians(), u, &rad)
        })?;
        let mut rows = Vec::with_capacity(users.len() * deg.len());
        for (id, (user, curve)) in users.iter().zip(&curves).enumerate() {
            for (&t, (_, snr)) in deg.iter().zip(curve) {
                rows.push(TiltRow {
                    tilt_deg: t,
                    user_id: id,
                    user_x: user.x,
                    user_y: user.y,
                    snr_db: snr.db(),
                });
            }
            // First maximum, so ties go to the smaller tilt.
            let mut best: Option<(f64, f64)> = None;
            for (&t, (_, snr)) in deg.iter().zip(curve) {
                if let Some(v) = snr.db() {
                    if best.is_none_or(|(_, b)| v > b) {
                        best = Some((t, v));
                    }
                }
            }
            let _ = match best {
                Some((t, v)) => writeln!(
                    summary,
                    "elevation {el} deg, user {id} at ({}, {}): best tilt {t} deg, {v:.2} dB",
                    user.x, user.y
                ),
                None => writeln!(
                    summary,
                    "elevation {el} deg, user {id} at ({}, {}): blocked at every tilt",
                    user.x, user.y
                ),
            };
        }
        let name = format!("tilt_sweep_el{}.csv", angle_tag(el));
        write_tilt(&dir.join(&name), &rows)?;
        files.push(name);
    }
    Ok(CommandOutput {
        files,
        summary,
        passed: true,
    })
}

/// User positions `(i + 1/2) step` across the street.
pub fn street_positions(width: f64, step: f64) -> Vec<f64> {
    let n = (width / step + 1e-9).floor() as usize;
    (0..n).map(|i| (i as f64 + 0.5) * step).collect()
}

pub fn cmd_double_ris(config: &RunConfig, dir: &Path) -> Result<CommandOutput> {
    let canyon = config.canyon()?;
    let params = config.link_params()?;
    let template = config.panel()?;
    let spec = config.constellation_spec()?;
    let workers = config.workers()?;
    let model = if config.sweep.approximate_sat_elevation {
        SatElevationModel::StreetCenter
    } else {
        SatElevationModel::Exact
    };
    let xs = street_positions(canyon.width, config.sweep.user_x_step);
    let mut files = Vec::new();
    let mut summary = String::new();
    let regime = classify_regime(&spec, &canyon);
    if regime.regime != Regime::PartialBlockage {
        let _ = writeln!(
            summary,
            "warning: Q = {} puts this canyon in the {} regime",
            spec.sats_per_orbit, regime.regime
        );
    }
    for &el in &config.sweep.double_ris_elevations_deg {
        let scenario =
            DoubleRisScenario::from_constellation(canyon, &template, &spec, el.to_radians());
        let ev = DoubleRisEvaluator::new(&scenario, model)?;
        let results = ordered_map(&xs, workers, |&x| {
            ev.evaluate(&params, Vec3::new(x, 0.0, 0.0))
        })?;
        let mut rows = Vec::with_capacity(4 * xs.len());
        let mut los_blocked = 0;
        let mut ris_covered = 0;
        for (&x, r) in xs.iter().zip(&results) {
            for link in ServingLink::ORDER {
                rows.push(DoubleRisRow {
                    user_x: x,
                    link: link.to_string(),
                    snr_db: r.link(link).db(),
                });
            }
            los_blocked += usize::from(r.los1.blocked && r.los2.blocked);
            ris_covered += usize::from(!r.ris1.blocked || !r.ris2.blocked);
        }
        let name = format!("double_ris_el{}.csv", angle_tag(el));
        write_double_ris(&dir.join(&name), &rows)?;
        let sat2 = match scenario.sat2_elevation {
            Some(e) => format!("{:.2} deg", e.to_degrees()),
            None => "below horizon".to_string(),
        };
        let _ = writeln!(
            summary,
            "{name}: SAT2 at {sat2}; {} positions, both LoS blocked at {los_blocked}, RIS link available at {ris_covered}",
            xs.len()
        );
        files.push(name);
    }
    Ok(CommandOutput {
        files,
        summary,
        passed: true,
    })
}

pub fn blockage_rows(config: &RunConfig) -> Result<Vec<BlockageRow>> {
    let width = config.scenario.width;
    let length = config.scenario.region_length;
    let mut shells: Vec<(String, crate::constellation::ConstellationSpec, bool)> = Vec::new();
    match config.preset()? {
        Some(p) => shells.push((
            p.name().to_string(),
            config.constellation_spec()?,
            p.is_fitted(),
        )),
        None => {
            for p in Preset::ALL {
                let mut spec = p.spec();
                spec.earth_radius = config.constellation.earth_radius_km * 1e3;
                shells.push((p.name().to_string(), spec, p.is_fitted()));
            }
            shells.push(("custom".to_string(), config.constellation_spec()?, false));
        }
    }
    let mut rows = Vec::new();
    for (name, spec, fitted) in shells {
        for &hw in &config.sweep.hw_ratios {
            let canyon = CanyonScenario::new(hw * width, width, length)?;
            let report = blockage_report(&spec, &canyon);
            rows.push(BlockageRow {
                constellation: name.clone(),
                altitude_km: spec.altitude / 1e3,
                sats_per_orbit: spec.sats_per_orbit,
                hw_ratio: hw,
                blockage_pct: 100.0 * report.blockage_ratio,
                q_min: report.q_min.count,
                q_min_exact: report.q_min.exact,
                q_threshold: report.q_threshold,
                regime: classify_regime(&spec, &canyon).regime.to_string(),
                fitted,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_blockage_table(config: &RunConfig, dir: &Path) -> Result<CommandOutput> {
    let rows = blockage_rows(config)?;
    let name = "blockage_table.csv".to_string();
    write_blockage(&dir.join(&name), &rows)?;
    Ok(CommandOutput {
        files: vec![name],
        summary: format_blockage_table(&rows),
        passed: true,
    })
}

pub fn cmd_validate(config: &RunConfig, dir: &Path) -> Result<CommandOutput> {
    let report = run_suite(config.run.seed.unwrap_or(0))?;
    let name = "validation.csv".to_string();
    write_validation(&dir.join(&name), &report)?;
    Ok(CommandOutput {
        files: vec![name],
        summary: format_validation(&report),
        passed: report.all_passed(),
    })
}
