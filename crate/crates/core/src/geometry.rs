//! Local Cartesian frame, RIS panels, and canyon geometry.
//!
//! The frame has its origin on the ground at the foot of the RIS building:
//! `x` runs across the street, `y` along it, `z` up. An untilted panel on the
//! left building has its center at `(0, 0, H)` and faces `+x`.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Absorbs floating noise when a panel length is an exact multiple of the
/// element spacing.
const COUNT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0).then(|| self * (1.0 / n))
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Which side of the street a panel faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Facing {
    /// Mounted on the building at `x = 0`, looking across the street.
    #[default]
    PlusX,
    /// Mounted on the building at `x = W`, looking back toward `x = 0`.
    MinusX,
}

impl Facing {
    fn sign(self) -> f64 {
        match self {
            Facing::PlusX => 1.0,
            Facing::MinusX => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RisPanel {
    pub length_y: f64,
    pub length_z: f64,
    pub element_spacing: f64,
    pub center: Vec3,
    /// Down-tilt angle in radians; 0 is a vertical panel.
    pub tilt: f64,
    /// Exponent `b` of the `cos^b` element radiation profile.
    pub radiation_exponent: f64,
    pub facing: Facing,
}

impl RisPanel {
    /// Vertical panel facing `+x` at `center`.
    pub fn new(length_y: f64, length_z: f64, element_spacing: f64, center: Vec3) -> Result<Self> {
        let panel = RisPanel {
            length_y,
            length_z,
            element_spacing,
            center,
            tilt: 0.0,
            radiation_exponent: 2.0,
            facing: Facing::PlusX,
        };
        panel.validate()?;
        Ok(panel)
    }

    pub fn with_tilt(mut self, tilt: f64) -> Result<Self> {
        self.tilt = tilt;
        self.validate()?;
        Ok(self)
    }

    pub fn with_radiation_exponent(mut self, b: f64) -> Result<Self> {
        self.radiation_exponent = b;
        self.validate()?;
        Ok(self)
    }

    pub fn with_facing(mut self, facing: Facing) -> Self {
        self.facing = facing;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.element_spacing > 0.0) || !self.element_spacing.is_finite() {
            return Err(Error::InvalidPanel(format!(
                "element spacing must be positive, got {}",
                self.element_spacing
            )));
        }
        if !self.center.is_finite() {
            return Err(Error::InvalidPanel("center is not finite".into()));
        }
        if !(0.0..FRAC_PI_2).contains(&self.tilt) {
            return Err(Error::InvalidPanel(format!(
                "tilt must lie in [0, pi/2), got {}",
                self.tilt
            )));
        }
        if !(self.radiation_exponent >= 0.0) || !self.radiation_exponent.is_finite() {
            return Err(Error::InvalidPanel(format!(
                "radiation exponent must be >= 0, got {}",
                self.radiation_exponent
            )));
        }
        let (ny, nz) = self.counts_unchecked();
        if ny == 0 || nz == 0 {
            return Err(Error::InvalidPanel(format!(
                "{} m x {} m panel is smaller than one {} m element",
                self.length_y, self.length_z, self.element_spacing
            )));
        }
        Ok(())
    }

    fn counts_unchecked(&self) -> (usize, usize) {
        let count = |len: f64| {
            let n = (len / self.element_spacing + COUNT_EPS).floor();
            if n.is_finite() && n >= 1.0 {
                n as usize
            } else {
                0
            }
        };
        (count(self.length_y), count(self.length_z))
    }

    /// Element counts `(N_y, N_z)`.
    pub fn counts(&self) -> (usize, usize) {
        self.counts_unchecked()
    }

    pub fn element_count(&self) -> usize {
        let (ny, nz) = self.counts();
        ny * nz
    }

    /// Panel diagonal, used as the aperture for the Fraunhofer check.
    pub fn aperture(&self) -> f64 {
        self.length_y.hypot(self.length_z)
    }

    /// Outward unit normal of the (possibly tilted) panel.
    pub fn boresight(&self) -> Vec3 {
        Vec3::new(self.facing.sign() * self.tilt.cos(), 0.0, -self.tilt.sin())
    }
}

/// A panel with its element grid materialized, for repeated evaluation.
#[derive(Debug, Clone)]
pub struct PanelGeometry {
    pub elements: Vec<Vec3>,
    pub center: Vec3,
    pub boresight: Vec3,
    pub radiation_exponent: f64,
}

impl PanelGeometry {
    pub fn new(panel: &RisPanel) -> Result<Self> {
        Ok(PanelGeometry {
            elements: element_grid(panel)?,
            center: panel.center,
            boresight: panel.boresight(),
            radiation_exponent: panel.radiation_exponent,
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanyonScenario {
    pub height: f64,
    pub width: f64,
    pub region_length: f64,
}

impl CanyonScenario {
    pub fn new(height: f64, width: f64, region_length: f64) -> Result<Self> {
        for (name, v) in [
            ("height", height),
            ("width", width),
            ("region_length", region_length),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(
                    format!("scenario.{name}"),
                    format!("must be positive, got {v}"),
                ));
            }
        }
        Ok(CanyonScenario {
            height,
            width,
            region_length,
        })
    }

    pub fn aspect_ratio(&self) -> f64 {
        self.height / self.width
    }

    /// Center of the RIS mounted on the left building roof edge.
    pub fn ris_center(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, self.height)
    }

    /// Ground point in the middle of the street.
    pub fn street_center(&self) -> Vec3 {
        Vec3::new(self.width / 2.0, 0.0, 0.0)
    }
}

impl Default for CanyonScenario {
    fn default() -> Self {
        CanyonScenario {
            height: 100.0,
            width: 50.0,
            region_length: 100.0,
        }
    }
}

/// Element centers of `panel`, row-major with `y` varying fastest.
pub fn element_grid(panel: &RisPanel) -> Result<Vec<Vec3>> {
    panel.validate()?;
    let (ny, nz) = panel.counts();
    let s = panel.element_spacing;
    let y0 = (ny as f64 - 1.0) / 2.0;
    let z0 = (nz as f64 - 1.0) / 2.0;
    let sign = panel.facing.sign();
    let c = panel.center;

    let mut out = Vec::with_capacity(ny * nz);
    for iz in 0..nz {
        let z = (iz as f64 - z0) * s;
        for iy in 0..ny {
            let y = (iy as f64 - y0) * s;
            let p = tilt_transform(Vec3::new(0.0, y, z), panel.tilt, c.z);
            out.push(Vec3::new(c.x + sign * p.x, c.y + p.y, p.z));
        }
    }
    Ok(out)
}

/// Rotates an element offset `(0, y_n, z_n)` about the panel's horizontal
/// center line by the down-tilt angle and lifts it to height `height`.
pub fn tilt_transform(local: Vec3, tilt: f64, height: f64) -> Vec3 {
    let (s, c) = tilt.sin_cos();
    Vec3::new(local.z * s, local.y, local.z * c + height)
}

/// `|<p, axis>| / |p|` for a unit `axis`.
pub fn elevation_cos(p: Vec3, axis: Vec3) -> Result<f64> {
    let n = p.norm();
    if !(n > 0.0) {
        return Err(Error::DegenerateGeometry("zero-length direction".into()));
    }
    Ok((p.dot(axis).abs() / n).min(1.0))
}

/// Signed cosine between `p` and `axis`; negative behind the panel plane.
pub fn facing_cos(p: Vec3, axis: Vec3) -> Result<f64> {
    let n = p.norm();
    if !(n > 0.0) {
        return Err(Error::DegenerateGeometry("zero-length direction".into()));
    }
    Ok((p.dot(axis) / n).clamp(-1.0, 1.0))
}

pub fn fraunhofer_distance(aperture: f64, wavelength: f64) -> f64 {
    2.0 * aperture * aperture / wavelength
}

pub fn is_near_field(distance: f64, aperture: f64, wavelength: f64) -> bool {
    distance < fraunhofer_distance(aperture, wavelength)
}

/// Distance from a ground terminal to a satellite at altitude `altitude`
/// seen at `elevation` above the local horizon.
pub fn slant_range(elevation: f64, altitude: f64, earth_radius: f64) -> f64 {
    let r = earth_radius;
    let rs = r + altitude;
    let (s, c) = elevation.sin_cos();
    (rs * rs - r * r * c * c).sqrt() - r * s
}

/// Satellite position in the `x-z` plane on the `+x` side of `origin`.
pub fn sat_position(
    elevation: f64,
    altitude: f64,
    earth_radius: f64,
    origin: Vec3,
) -> Result<Vec3> {
    if !(elevation > 0.0) {
        return Err(Error::BelowHorizon {
            elevation_rad: elevation,
        });
    }
    if elevation > FRAC_PI_2 + 1e-12 {
        return Err(Error::Domain(format!(
            "elevation {elevation} rad exceeds zenith; place the satellite on the other side instead"
        )));
    }
    let d = slant_range(elevation, altitude, earth_radius);
    let (s, c) = elevation.sin_cos();
    // Exact zero at zenith keeps the satellite on the panel-plane boundary
    // from picking up a cos(pi/2) residue.
    let c = if elevation == FRAC_PI_2 { 0.0 } else { c };
    Ok(origin + Vec3::new(d * c, 0.0, d * s))
}

/// Same as [`sat_position`] but on the `-x` side of `origin`.
pub fn sat_position_mirrored(
    elevation: f64,
    altitude: f64,
    earth_radius: f64,
    origin: Vec3,
) -> Result<Vec3> {
    let p = sat_position(elevation, altitude, earth_radius, origin)?;
    Ok(Vec3::new(2.0 * origin.x - p.x, p.y, p.z))
}
