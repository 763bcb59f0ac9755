//! CSV and text emission. Numbers use the shortest decimal form that
//! parses back to the same `f64`, so files round-trip exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::RunConfig;
use crate::engine::SnrGrid;
use crate::error::{Error, Result};
use crate::validate::ValidationReport;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let source = match e.into_kind() {
        csv::ErrorKind::Io(io) => io,
        other => std::io::Error::other(format!("{other:?}")),
    };
    io_err(path, source)
}

pub fn num(v: f64) -> String {
    v.to_string()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn flag(blocked: bool) -> &'static str {
    if blocked {
        "1"
    } else {
        "0"
    }
}

pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

pub const COVERAGE_HEADER: [&str; 4] = ["x_m", "y_m", "snr_db", "blocked"];

pub fn write_coverage(path: &Path, grid: &SnrGrid) -> Result<()> {
    let rows = grid.cells.iter().zip(&grid.values).map(|(c, v)| {
        vec![
            num(c.x),
            num(c.y),
            opt_num(*v),
            flag(v.is_none()).to_string(),
        ]
    });
    write_csv(path, &COVERAGE_HEADER, rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageRow {
    pub x: f64,
    pub y: f64,
    pub snr_db: Option<f64>,
}

fn parse_f64(path: &Path, field: &str) -> Result<f64> {
    field.parse().map_err(|_| {
        io_err(
            path,
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("bad number `{field}`"),
            ),
        )
    })
}

/// Reads a file written by [`write_coverage`].
pub fn read_coverage(path: &Path) -> Result<Vec<CoverageRow>> {
    let mut r = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(COVERAGE_HEADER) {
        return Err(io_err(
            path,
            std::io::Error::new(std::io::ErrorKind::InvalidData, "not a coverage file"),
        ));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let snr = match &rec[2] {
            "" => None,
            s => Some(parse_f64(path, s)?),
        };
        out.push(CoverageRow {
            x: parse_f64(path, &rec[0])?,
            y: parse_f64(path, &rec[1])?,
            snr_db: snr,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltRow {
    pub tilt_deg: f64,
    pub user_id: usize,
    pub user_x: f64,
    pub user_y: f64,
    pub snr_db: Option<f64>,
}

pub fn write_tilt(path: &Path, rows: &[TiltRow]) -> Result<()> {
    write_csv(
        path,
        &[
            "tilt_deg", "user_id", "user_x_m", "user_y_m", "snr_db", "blocked",
        ],
        rows.iter().map(|r| {
            vec![
                num(r.tilt_deg),
                r.user_id.to_string(),
                num(r.user_x),
                num(r.user_y),
                opt_num(r.snr_db),
                flag(r.snr_db.is_none()).to_string(),
            ]
        }),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoubleRisRow {
    pub user_x: f64,
    pub link: String,
    pub snr_db: Option<f64>,
}

pub fn write_double_ris(path: &Path, rows: &[DoubleRisRow]) -> Result<()> {
    write_csv(
        path,
        &["user_x_m", "link", "snr_db", "blocked"],
        rows.iter().map(|r| {
            vec![
                num(r.user_x),
                r.link.clone(),
                opt_num(r.snr_db),
                flag(r.snr_db.is_none()).to_string(),
            ]
        }),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockageRow {
    pub constellation: String,
    pub altitude_km: f64,
    pub sats_per_orbit: u32,
    pub hw_ratio: f64,
    pub blockage_pct: f64,
    pub q_min: u64,
    pub q_min_exact: f64,
    pub q_threshold: u64,
    pub regime: String,
    pub fitted: bool,
}

pub fn write_blockage(path: &Path, rows: &[BlockageRow]) -> Result<()> {
    write_csv(
        path,
        &[
            "constellation",
            "altitude_km",
            "sats_per_orbit",
            "hw_ratio",
            "blockage_pct",
            "q_min",
            "q_min_exact",
            "q_threshold",
            "regime",
            "fitted",
        ],
        rows.iter().map(|r| {
            vec![
                r.constellation.clone(),
                num(r.altitude_km),
                r.sats_per_orbit.to_string(),
                num(r.hw_ratio),
                num(r.blockage_pct),
                r.q_min.to_string(),
                num(r.q_min_exact),
                r.q_threshold.to_string(),
                r.regime.clone(),
                flag(r.fitted).to_string(),
            ]
        }),
    )
}

/// Fixed-width table with percentages to one decimal. Fitted shells are
/// marked with `*`.
pub fn format_blockage_table(rows: &[BlockageRow]) -> String {
    let name_w = rows
        .iter()
        .map(|r| r.constellation.len() + usize::from(r.fitted))
        .max()
        .unwrap_or(0)
        .max("constellation".len());
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<name_w$}  {:>6}  {:>4}  {:>5}  {:>6}  {:>6}  {:>4}",
        "constellation", "h_km", "Q", "H/W", "T_B%", "Q_min", "Q_th"
    );
    for r in rows {
        let name = if r.fitted {
            format!("{}*", r.constellation)
        } else {
            r.constellation.clone()
        };
        let _ = writeln!(
            s,
            "{:<name_w$}  {:>6}  {:>4}  {:>5}  {:>6.1}  {:>6}  {:>4}",
            name,
            r.altitude_km,
            r.sats_per_orbit,
            r.hw_ratio,
            r.blockage_pct,
            r.q_min,
            r.q_threshold
        );
    }
    if rows.iter().any(|r| r.fitted) {
        s.push_str("* fitted shell parameters\n");
    }
    s
}

pub fn format_validation(report: &ValidationReport) -> String {
    let mut s = String::new();
    for c in &report.checks {
        let _ = writeln!(
            s,
            "{} {}  residual={:e}  tolerance={:e}",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance
        );
    }
    s
}

pub fn write_validation(path: &Path, report: &ValidationReport) -> Result<()> {
    write_csv(
        path,
        &["check", "residual", "tolerance", "passed"],
        report.checks.iter().map(|c| {
            vec![
                c.name.clone(),
                num(c.residual),
                num(c.tolerance),
                flag(c.passed()).to_string(),
            ]
        }),
    )
}

/// Writes `<command>.config.toml`: the resolved configuration, loadable
/// with `--config`, headed by comments naming the command and its outputs.
pub fn write_sidecar(
    dir: &Path,
    command: &str,
    config: &RunConfig,
    outputs: &[String],
) -> Result<()> {
    let body = toml::to_string(config).map_err(|e| Error::config("config", e.to_string()))?;
    let mut text = format!(
        "# risleo {} {command}\n# outputs: {}\n\n",
        env!("CARGO_PKG_VERSION"),
        outputs.join(", ")
    );
    text.push_str(&body);
    let path = dir.join(format!("{command}.config.toml"));
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))
}

/// File-name fragment for an angle in degrees, e.g. `45` or `37.5`.
pub fn angle_tag(deg: f64) -> String {
    num(deg)
}
