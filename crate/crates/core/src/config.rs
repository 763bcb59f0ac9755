//! Run configuration: a TOML file with strict schema, every field optional
//! with the reference defaults, plus command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constellation::{ConstellationSpec, Preset};
use crate::engine::{GridSpec, Orbit, Scene};
use crate::error::{Error, Result};
use crate::geometry::{CanyonScenario, RisPanel, SPEED_OF_LIGHT};
use crate::link::{from_db, LinkKind, LinkParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub panel: PanelConfig,
    pub link: LinkConfig,
    pub constellation: ConstellationConfig,
    pub grid: GridConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
    pub run: RunSection,
}

/// Canyon dimensions in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub height: f64,
    pub width: f64,
    pub region_length: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            height: 100.0,
            width: 50.0,
            region_length: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PanelConfig {
    pub length_y: f64,
    pub length_z: f64,
    /// Defaults to half a wavelength.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element_spacing: Option<f64>,
    pub tilt_deg: f64,
    pub radiation_exponent: f64,
}

impl Default for PanelConfig {
    fn default() -> Self {
        PanelConfig {
            length_y: 5.0,
            length_z: 3.0,
            element_spacing: None,
            tilt_deg: 0.0,
            radiation_exponent: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LinkConfig {
    pub frequency_ghz: f64,
    pub tx_power_dbw: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub noise_power_dbw: f64,
    pub atmospheric_loss_db: f64,
    /// Element area in m^2; defaults to the squared element spacing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub element_area: Option<f64>,
    pub tx_antennas: u32,
    pub rx_antennas: u32,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            frequency_ghz: 11.54,
            tx_power_dbw: 15.0,
            tx_gain_db: 24.6,
            rx_gain_db: 27.6,
            noise_power_dbw: -120.5,
            atmospheric_loss_db: 0.0166,
            element_area: None,
            tx_antennas: 288,
            rx_antennas: 576,
        }
    }
}

/// Either a named preset or a custom `(altitude, sats per orbit)` shell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstellationConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub altitude_km: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sats_per_orbit: Option<u32>,
    pub earth_radius_km: f64,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        ConstellationConfig {
            preset: None,
            altitude_km: None,
            sats_per_orbit: None,
            earth_radius_km: 6371.0,
        }
    }
}

const DEFAULT_ALTITUDE_KM: f64 = 1300.0;
const DEFAULT_SATS_PER_ORBIT: u32 = 20;

/// Ground grid; missing extents cover the street `[0, W] x [-L/2, L/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub spacing: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_max: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            spacing: 1.0,
            x_min: None,
            x_max: None,
            y_min: None,
            y_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// SAT elevations for `coverage`.
    pub elevations_deg: Vec<f64>,
    /// `ris`, `ris_tilted` or `los`; by default `ris` for an untilted panel
    /// and `ris_tilted` otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coverage_link: Option<LinkKind>,
    /// SAT elevations for `tilt-sweep`.
    pub tilt_sat_elevations_deg: Vec<f64>,
    pub tilt_min_deg: f64,
    pub tilt_max_deg: f64,
    pub tilt_step_deg: f64,
    /// `[x, y]` user positions for `tilt-sweep`.
    pub users: Vec<[f64; 2]>,
    /// SAT1 elevations for `double-ris`.
    pub double_ris_elevations_deg: Vec<f64>,
    /// Spacing of double-RIS users across the street.
    pub user_x_step: f64,
    /// Use the street-center elevation for each SAT -> RIS hop.
    pub approximate_sat_elevation: bool,
    /// Canyon aspect ratios for `blockage-table`.
    pub hw_ratios: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            elevations_deg: vec![30.0, 45.0, 60.0],
            coverage_link: None,
            tilt_sat_elevations_deg: vec![45.0],
            tilt_min_deg: 0.0,
            tilt_max_deg: 60.0,
            tilt_step_deg: 1.0,
            users: vec![[5.0, 0.0], [25.0, 0.0], [45.0, 0.0]],
            double_ris_elevations_deg: vec![35.0, 45.0, 55.0, 65.0],
            user_x_step: 1.0,
            approximate_sat_elevation: false,
            hw_ratios: vec![1.4, 2.0, 2.4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Defaults to the available parallelism.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Seeds the `validate` geometries; the simulations are deterministic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Values given on the command line, applied over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub elevations_deg: Option<Vec<f64>>,
    pub preset: Option<String>,
    pub seed: Option<u64>,
}

/// Which elevation list `--elevations` replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElevationTarget {
    Coverage,
    Tilt,
    DoubleRis,
    None,
}

fn check_positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive, got {v}")))
    }
}

fn check_finite(key: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be finite, got {v}")))
    }
}

fn check_elevations(key: &str, list: &[f64]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::config(key, "list is empty"));
    }
    for (i, &e) in list.iter().enumerate() {
        if !(e > 0.0 && e <= 90.0) {
            return Err(Error::config(
                format!("{key}[{i}]"),
                format!("elevation must be in (0, 90] degrees, got {e}"),
            ));
        }
    }
    Ok(())
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let message = e.inner().message().to_string();
            Error::config(error_key(&path, &message), message)
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn apply(&mut self, o: &Overrides, target: ElevationTarget) {
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(w) = o.workers {
            self.run.workers = Some(w);
        }
        if let Some(p) = &o.preset {
            self.constellation.preset = Some(p.clone());
        }
        if let Some(s) = o.seed {
            self.run.seed = Some(s);
        }
        if let Some(list) = &o.elevations_deg {
            match target {
                ElevationTarget::Coverage => self.sweep.elevations_deg = list.clone(),
                ElevationTarget::Tilt => self.sweep.tilt_sat_elevations_deg = list.clone(),
                ElevationTarget::DoubleRis => self.sweep.double_ris_elevations_deg = list.clone(),
                ElevationTarget::None => {}
            }
        }
    }

    pub fn canyon(&self) -> Result<CanyonScenario> {
        let s = &self.scenario;
        CanyonScenario::new(s.height, s.width, s.region_length)
    }

    pub fn wavelength(&self) -> Result<f64> {
        check_positive("link.frequency_ghz", self.link.frequency_ghz)?;
        Ok(SPEED_OF_LIGHT / (self.link.frequency_ghz * 1e9))
    }

    pub fn element_spacing(&self) -> Result<f64> {
        match self.panel.element_spacing {
            Some(s) => {
                check_positive("panel.element_spacing", s)?;
                Ok(s)
            }
            None => Ok(self.wavelength()? / 2.0),
        }
    }

    pub fn link_params(&self) -> Result<LinkParams> {
        let l = &self.link;
        for (key, v) in [
            ("link.tx_power_dbw", l.tx_power_dbw),
            ("link.tx_gain_db", l.tx_gain_db),
            ("link.rx_gain_db", l.rx_gain_db),
            ("link.noise_power_dbw", l.noise_power_dbw),
        ] {
            check_finite(key, v)?;
        }
        if !(l.atmospheric_loss_db >= 0.0 && l.atmospheric_loss_db.is_finite()) {
            return Err(Error::config(
                "link.atmospheric_loss_db",
                format!("must be a nonnegative loss, got {}", l.atmospheric_loss_db),
            ));
        }
        let spacing = self.element_spacing()?;
        let element_area = match l.element_area {
            Some(a) => {
                check_positive("link.element_area", a)?;
                a
            }
            None => spacing * spacing,
        };
        if l.rx_antennas == 0 {
            return Err(Error::config("link.rx_antennas", "must be at least 1"));
        }
        let params = LinkParams {
            tx_power_w: from_db(l.tx_power_dbw),
            tx_gain: from_db(l.tx_gain_db),
            rx_gain: from_db(l.rx_gain_db),
            wavelength: self.wavelength()?,
            noise_power_w: from_db(l.noise_power_dbw),
            atmospheric_loss: from_db(-l.atmospheric_loss_db),
            element_area,
            tx_antennas: l.tx_antennas,
            rx_antennas: l.rx_antennas,
        };
        params.validate()?;
        Ok(params)
    }

    /// Panel mounted at the left roof edge, facing across the street.
    pub fn panel(&self) -> Result<RisPanel> {
        let p = &self.panel;
        check_positive("panel.length_y", p.length_y)?;
        check_positive("panel.length_z", p.length_z)?;
        if !(p.tilt_deg >= 0.0 && p.tilt_deg < 90.0) {
            return Err(Error::config(
                "panel.tilt_deg",
                format!("must be in [0, 90), got {}", p.tilt_deg),
            ));
        }
        if !(p.radiation_exponent >= 0.0 && p.radiation_exponent.is_finite()) {
            return Err(Error::config(
                "panel.radiation_exponent",
                format!("must be nonnegative, got {}", p.radiation_exponent),
            ));
        }
        let spacing = self.element_spacing()?;
        let canyon = self.canyon()?;
        RisPanel::new(p.length_y, p.length_z, spacing, canyon.ris_center())
            .and_then(|panel| panel.with_tilt(p.tilt_deg.to_radians()))
            .and_then(|panel| panel.with_radiation_exponent(p.radiation_exponent))
            .map_err(|e| Error::config("panel", e.to_string()))
    }

    pub fn preset(&self) -> Result<Option<Preset>> {
        self.constellation
            .preset
            .as_deref()
            .map(str::parse)
            .transpose()
    }

    pub fn constellation_spec(&self) -> Result<ConstellationSpec> {
        let c = &self.constellation;
        check_positive("constellation.earth_radius_km", c.earth_radius_km)?;
        let mut spec = match self.preset()? {
            Some(preset) => {
                if c.altitude_km.is_some() {
                    return Err(Error::config(
                        "constellation.altitude_km",
                        "cannot be combined with constellation.preset",
                    ));
                }
                if c.sats_per_orbit.is_some() {
                    return Err(Error::config(
                        "constellation.sats_per_orbit",
                        "cannot be combined with constellation.preset",
                    ));
                }
                preset.spec()
            }
            None => {
                let h = c.altitude_km.unwrap_or(DEFAULT_ALTITUDE_KM);
                check_positive("constellation.altitude_km", h)?;
                ConstellationSpec {
                    altitude: h * 1e3,
                    sats_per_orbit: c.sats_per_orbit.unwrap_or(DEFAULT_SATS_PER_ORBIT),
                    earth_radius: c.earth_radius_km * 1e3,
                }
            }
        };
        spec.earth_radius = c.earth_radius_km * 1e3;
        spec.validate()?;
        Ok(spec)
    }

    pub fn orbit(&self) -> Result<Orbit> {
        let spec = self.constellation_spec()?;
        Ok(Orbit {
            altitude: spec.altitude,
            earth_radius: spec.earth_radius,
        })
    }

    pub fn scene(&self) -> Result<Scene> {
        Ok(Scene {
            canyon: self.canyon()?,
            panel: self.panel()?,
            params: self.link_params()?,
            orbit: self.orbit()?,
        })
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let g = &self.grid;
        let canyon = self.canyon()?;
        let half = canyon.region_length / 2.0;
        let spec = GridSpec {
            spacing: g.spacing,
            x_min: g.x_min.unwrap_or(0.0),
            x_max: g.x_max.unwrap_or(canyon.width),
            y_min: g.y_min.unwrap_or(-half),
            y_max: g.y_max.unwrap_or(half),
        };
        for (key, v) in [
            ("grid.x_min", spec.x_min),
            ("grid.x_max", spec.x_max),
            ("grid.y_min", spec.y_min),
            ("grid.y_max", spec.y_max),
        ] {
            check_finite(key, v)?;
        }
        spec.dims()?;
        Ok(spec)
    }

    pub fn coverage_link(&self) -> LinkKind {
        match self.sweep.coverage_link {
            Some(k) => k,
            None if self.panel.tilt_deg > 0.0 => LinkKind::RisTilted,
            None => LinkKind::Ris,
        }
    }

    pub fn workers(&self) -> Result<usize> {
        match self.run.workers {
            Some(0) => Err(Error::config("run.workers", "must be at least 1")),
            Some(w) => Ok(w),
            None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }

    /// Checks everything the commands read.
    pub fn validate(&self) -> Result<()> {
        self.scene()?;
        self.grid()?;
        self.workers()?;
        let s = &self.sweep;
        check_elevations("sweep.elevations_deg", &s.elevations_deg)?;
        check_elevations("sweep.tilt_sat_elevations_deg", &s.tilt_sat_elevations_deg)?;
        check_elevations(
            "sweep.double_ris_elevations_deg",
            &s.double_ris_elevations_deg,
        )?;
        check_positive("sweep.tilt_step_deg", s.tilt_step_deg)?;
        if !(s.tilt_min_deg >= 0.0) {
            return Err(Error::config("sweep.tilt_min_deg", "must be nonnegative"));
        }
        if !(s.tilt_max_deg >= s.tilt_min_deg && s.tilt_max_deg < 90.0) {
            return Err(Error::config(
                "sweep.tilt_max_deg",
                "must lie in [sweep.tilt_min_deg, 90)",
            ));
        }
        if s.users.is_empty() {
            return Err(Error::config("sweep.users", "list is empty"));
        }
        for (i, u) in s.users.iter().enumerate() {
            if !(u[0].is_finite() && u[1].is_finite()) {
                return Err(Error::config(format!("sweep.users[{i}]"), "must be finite"));
            }
        }
        check_positive("sweep.user_x_step", s.user_x_step)?;
        if s.hw_ratios.is_empty() {
            return Err(Error::config("sweep.hw_ratios", "list is empty"));
        }
        for (i, &r) in s.hw_ratios.iter().enumerate() {
            check_positive(&format!("sweep.hw_ratios[{i}]"), r)?;
        }
        Ok(())
    }

    /// Copy with every defaulted optional filled in, for the output sidecar.
    pub fn resolved(&self) -> Result<RunConfig> {
        let mut r = self.clone();
        r.panel.element_spacing = Some(self.element_spacing()?);
        r.link.element_area = Some(self.link_params()?.element_area);
        let spec = self.constellation_spec()?;
        if r.constellation.preset.is_none() {
            r.constellation.altitude_km = Some(spec.altitude / 1e3);
            r.constellation.sats_per_orbit = Some(spec.sats_per_orbit);
        }
        let g = self.grid()?;
        r.grid.x_min = Some(g.x_min);
        r.grid.x_max = Some(g.x_max);
        r.grid.y_min = Some(g.y_min);
        r.grid.y_max = Some(g.y_max);
        r.run.workers = Some(self.workers()?);
        r.sweep.coverage_link = Some(self.coverage_link());
        Ok(r)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config("config", e.to_string()))
    }
}

/// Dotted key of a deserialization failure; root-level unknown keys carry
/// their name only in the message.
fn error_key(path: &str, message: &str) -> String {
    if path != "." {
        return path.to_string();
    }
    message
        .strip_prefix("unknown field `")
        .and_then(|rest| rest.split('`').next())
        .unwrap_or("config")
        .to_string()
}
