//! Element radiation profile, steering vectors, attenuation, and explicit
//! channel matrices for the SAT -> RIS -> user cascade.
//!
//! The explicit matrices are the brute-force path. The link-budget code never
//! builds them; they exist to check the closed-form amplitude on small arrays.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{element_grid, facing_cos, RisPanel, Vec3};

/// Default cap on `N * max(M_t, M_r)` for explicit channel assembly.
pub const DEFAULT_ORACLE_CAP: usize = 1 << 20;

/// `cos^b` over the front hemisphere, zero at and behind the panel plane.
#[inline]
pub fn radiation_profile(cos_theta: f64, b: f64) -> f64 {
    if cos_theta > 0.0 {
        cos_theta.min(1.0).powf(b)
    } else {
        0.0
    }
}

/// Boresight gain of a `cos^b` element, `4 pi / integral(F sin)`, in closed form.
pub fn element_gain(b: f64) -> f64 {
    2.0 * (b + 1.0)
}

/// Same gain evaluated by adaptive quadrature over the full sphere.
pub fn element_gain_quadrature(b: f64) -> f64 {
    let tol = 1e-13;
    let theta_integral = |_phi: f64| {
        adaptive_simpson(
            &|t: f64| radiation_profile(t.cos(), b) * t.sin(),
            0.0,
            PI,
            tol,
        )
    };
    let total = adaptive_simpson(&theta_integral, 0.0, TAU, tol);
    4.0 * PI / total
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Propagation phase `k d` reduced to `[0, 2 pi)`.
///
/// Reduction goes through the wavelength count so that sums of large
/// distances stay consistent to the last few ulps.
#[inline]
pub fn wrapped_phase(distance: f64, wavelength: f64) -> f64 {
    let cycles = distance / wavelength;
    TAU * (cycles - cycles.floor())
}

/// Unit-modulus per-element phase terms, ordered like the element grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector(Vec<Complex64>);

impl SteeringVector {
    pub fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        SteeringVector(
            phases
                .into_iter()
                .map(|p| Complex64::from_polar(1.0, p))
                .collect(),
        )
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.0)
    }
}

/// Diagonal of `sqrt(F_n) / |p_n|` terms (units 1/m).
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationDiag(Vec<f64>);

impl AttenuationDiag {
    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn checked_distance(element: Vec3, target: Vec3) -> Result<f64> {
    let d = (target - element).norm();
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::DegenerateGeometry(format!(
            "target {target:?} coincides with an element"
        )))
    }
}

/// Spherical-wave steering vector `exp(-j k |target - p_n|)`.
pub fn nearfield_steering(
    elements: &[Vec3],
    target: Vec3,
    wavelength: f64,
) -> Result<SteeringVector> {
    let phases = elements
        .iter()
        .map(|&p| checked_distance(p, target).map(|d| -wrapped_phase(d, wavelength)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SteeringVector::from_phases(phases))
}

pub fn attenuation(
    elements: &[Vec3],
    target: Vec3,
    boresight: Vec3,
    b: f64,
) -> Result<AttenuationDiag> {
    elements
        .iter()
        .map(|&p| {
            let d = checked_distance(p, target)?;
            let cos = facing_cos(target - p, boresight)?;
            Ok(radiation_profile(cos, b).sqrt() / d)
        })
        .collect::<Result<Vec<_>>>()
        .map(AttenuationDiag)
}

/// Plane-wave steering vector `exp(-j k <r_m, direction>)` for element
/// offsets `r_m` measured from the array center.
pub fn farfield_steering(offsets: &[Vec3], direction: Vec3, wavelength: f64) -> SteeringVector {
    let k = TAU / wavelength;
    SteeringVector::from_phases(offsets.iter().map(|r| -k * r.dot(direction)))
}

/// Centered `count_u x count_v` lattice spanned by unit vectors `u` and `v`.
pub fn planar_lattice(count_u: usize, count_v: usize, spacing: f64, u: Vec3, v: Vec3) -> Vec<Vec3> {
    let cu = (count_u as f64 - 1.0) / 2.0;
    let cv = (count_v as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(count_u * count_v);
    for j in 0..count_v {
        for i in 0..count_u {
            out.push(u * ((i as f64 - cu) * spacing) + v * ((j as f64 - cv) * spacing));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix(DMatrix<Complex64>);

impl ChannelMatrix {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    /// Numerical rank: singular values above `rel_tol * sigma_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let sv = self.0.clone().svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return 0;
        }
        sv.iter().filter(|&&s| s > rel_tol * max).count()
    }
}

/// How the SAT -> RIS hop treats the per-element geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SatSideModel {
    /// Every element sees the panel-center distance and elevation.
    #[default]
    CenterFarField,
    /// Per-element distances, phases, and radiation factors.
    PerElement,
}

#[derive(Debug, Clone)]
pub struct CascadeSetup {
    /// SAT antenna offsets from the SAT array center (`M_t` entries).
    pub tx_array: Vec<Vec3>,
    /// User antenna offsets from the user array center (`M_r` entries).
    pub rx_array: Vec<Vec3>,
    pub wavelength: f64,
    pub sat_side: SatSideModel,
    pub max_entries: usize,
}

impl CascadeSetup {
    /// Square half-wavelength arrays of `side x side` elements at both ends.
    pub fn square(side: usize, wavelength: f64) -> Self {
        let lattice = planar_lattice(
            side,
            side,
            wavelength / 2.0,
            Vec3::X,
            Vec3::new(0.0, 1.0, 0.0),
        );
        CascadeSetup {
            tx_array: lattice.clone(),
            rx_array: lattice,
            wavelength,
            sat_side: SatSideModel::default(),
            max_entries: DEFAULT_ORACLE_CAP,
        }
    }
}

/// Explicit channels plus the matched beamformers used with them.
///
/// The far-field array vectors are normalized to unit norm inside `H` and
/// `G` and in the beamformers, so all array gain lives in `G_t`/`G_r`.
#[derive(Debug, Clone)]
pub struct CascadeChannels {
    /// RIS -> user, `M_r x N`.
    pub h: ChannelMatrix,
    /// SAT -> RIS, `N x M_t`.
    pub g: ChannelMatrix,
    pub combiner: DVector<Complex64>,
    pub precoder: DVector<Complex64>,
}

impl CascadeChannels {
    /// `w^H H diag(e^{j psi}) G f`.
    pub fn received_amplitude(&self, phases: &[f64]) -> Result<Complex64> {
        let n = self.h.shape().1;
        if phases.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: phases.len(),
            });
        }
        let left = self.combiner.adjoint() * self.h.matrix(); // 1 x N
        let right = self.g.matrix() * &self.precoder; // N x 1
        Ok(phases
            .iter()
            .enumerate()
            .map(|(i, &psi)| left[(0, i)] * Complex64::from_polar(1.0, psi) * right[i])
            .sum())
    }
}

pub fn assemble_channels(
    panel: &RisPanel,
    sat: Vec3,
    user: Vec3,
    setup: &CascadeSetup,
) -> Result<CascadeChannels> {
    let n = panel.element_count();
    let m = setup.tx_array.len().max(setup.rx_array.len());
    let requested = n.saturating_mul(m);
    if requested > setup.max_entries {
        return Err(Error::OracleScale {
            requested,
            cap: setup.max_entries,
        });
    }
    let elements = element_grid(panel)?;
    let axis = panel.boresight();
    let b = panel.radiation_exponent;
    let lambda = setup.wavelength;

    let a_user = nearfield_steering(&elements, user, lambda)?;
    let att_user = attenuation(&elements, user, axis, b)?;

    let (a_sat, att_sat) = match setup.sat_side {
        SatSideModel::PerElement => (
            nearfield_steering(&elements, sat, lambda)?,
            attenuation(&elements, sat, axis, b)?,
        ),
        SatSideModel::CenterFarField => {
            let d1 = checked_distance(panel.center, sat)?;
            let amp = attenuation(&[panel.center], sat, axis, b)?.0[0];
            (
                SteeringVector::from_phases(std::iter::repeat_n(-wrapped_phase(d1, lambda), n)),
                AttenuationDiag(vec![amp; n]),
            )
        }
    };

    let to_ris = |from: Vec3| {
        (panel.center - from)
            .normalized()
            .ok_or_else(|| Error::DegenerateGeometry("array at the panel center".into()))
    };
    let c = unit_norm(farfield_steering(&setup.rx_array, to_ris(user)?, lambda));
    let bvec = unit_norm(farfield_steering(&setup.tx_array, to_ris(sat)?, lambda));

    let row: Vec<Complex64> = a_user
        .entries()
        .iter()
        .zip(att_user.entries())
        .map(|(a, w)| a * w)
        .collect();
    let col: Vec<Complex64> = a_sat
        .entries()
        .iter()
        .zip(att_sat.entries())
        .map(|(a, w)| a * w)
        .collect();

    let h = &c * DMatrix::from_row_slice(1, n, &row);
    let g = DVector::from_vec(col) * bvec.adjoint();

    Ok(CascadeChannels {
        h: ChannelMatrix(h),
        g: ChannelMatrix(g),
        combiner: c,
        precoder: bvec,
    })
}

fn unit_norm(v: SteeringVector) -> DVector<Complex64> {
    let scale = 1.0 / (v.len() as f64).sqrt();
    v.to_dvector().map(|z| z * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn radiation_profile_examples() {
        assert_eq!(radiation_profile(1.0, 3.7), 1.0);
        assert_eq!(radiation_profile(0.0, 2.0), 0.0);
        assert_eq!(radiation_profile(-0.3, 2.0), 0.0);
        assert!((radiation_profile(0.5, 2.0) - 0.25).abs() < 1e-15);
        assert_eq!(radiation_profile(0.5, 0.0), 1.0);
    }

    #[test]
    fn element_gain_closed_form() {
        assert_eq!(element_gain(0.0), 2.0);
        assert_eq!(element_gain(1.0), 4.0);
        assert_eq!(element_gain(2.0), 6.0);
    }

    #[test]
    fn element_gain_quadrature_matches() {
        for b in [0.0, 0.5, 1.0, 2.0, 3.0, 5.0] {
            let q = element_gain_quadrature(b);
            let c = element_gain(b);
            assert!(((q - c) / c).abs() < 1e-6, "b={b}: {q} vs {c}");
        }
    }

    #[test]
    fn nearfield_single_element_phases() {
        let lambda = 0.02;
        let e = [Vec3::ZERO];
        let one = nearfield_steering(&e, Vec3::new(lambda, 0.0, 0.0), lambda).unwrap();
        assert!((one.entries()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let half = nearfield_steering(&e, Vec3::new(lambda / 2.0, 0.0, 0.0), lambda).unwrap();
        assert!((half.entries()[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn nearfield_quarter_wave_offset() {
        let lambda = 0.04;
        let target = Vec3::ZERO;
        let e = [
            Vec3::new(lambda, 0.0, 0.0),
            Vec3::new(1.25 * lambda, 0.0, 0.0),
        ];
        let s = nearfield_steering(&e, target, lambda).unwrap();
        assert!((s.entries()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((s.entries()[1] - Complex64::from_polar(1.0, -FRAC_PI_2)).norm() < 1e-12);
        assert!(matches!(
            nearfield_steering(&e, e[1], lambda),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn attenuation_examples() {
        let e = [Vec3::ZERO];
        let a = attenuation(&e, Vec3::new(8.0, 0.0, 0.0), Vec3::X, 2.0).unwrap();
        assert!((a.entries()[0] - 1.0 / 8.0).abs() < 1e-15);
        let a = attenuation(&e, Vec3::new(-8.0, 1.0, 0.0), Vec3::X, 2.0).unwrap();
        assert_eq!(a.entries()[0], 0.0);
        let a = attenuation(&e, Vec3::new(3.0, 4.0, 0.0), Vec3::X, 2.0).unwrap();
        assert!((a.entries()[0] - 0.12).abs() < 1e-15);
    }

    #[test]
    fn farfield_examples() {
        let lambda = 0.03;
        let lattice = planar_lattice(
            3,
            2,
            lambda / 2.0,
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        );
        let s = farfield_steering(&lattice, Vec3::X, lambda);
        assert!(s
            .entries()
            .iter()
            .all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));

        let pair = planar_lattice(2, 1, lambda / 2.0, Vec3::new(0.0, 1.0, 0.0), Vec3::X);
        let s = farfield_steering(&pair, Vec3::new(0.0, 1.0, 0.0), lambda);
        assert!((s.entries()[0] - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((s.entries()[1] - Complex64::new(0.0, -1.0)).norm() < 1e-12);

        // 60 degrees off broadside: offsets +-lambda/4 along y project to
        // +-(lambda/4) sin 60, so the pair differs by pi sin 60 in phase.
        let dir = Vec3::new(0.5, 60f64.to_radians().sin(), 0.0);
        let s = farfield_steering(&pair, dir, lambda);
        let dphi = (s.entries()[0] / s.entries()[1]).arg();
        assert!((dphi - PI * 60f64.to_radians().sin()).abs() < 1e-12);
    }

    #[test]
    fn single_element_channels_are_scalars() {
        let lambda = 0.025;
        let panel = RisPanel::new(
            lambda / 2.0,
            lambda / 2.0,
            lambda / 2.0,
            Vec3::new(0.0, 0.0, 20.0),
        )
        .unwrap();
        let user = Vec3::new(7.0, 2.0, 0.0);
        let sat = Vec3::new(3.0e5, 0.0, 4.0e5);
        let setup = CascadeSetup::square(1, lambda);
        let ch = assemble_channels(&panel, sat, user, &setup).unwrap();
        assert_eq!(ch.h.shape(), (1, 1));
        assert_eq!(ch.g.shape(), (1, 1));
        let d = (user - panel.center).norm();
        let cos = (user - panel.center).dot(Vec3::X) / d;
        let expect = Complex64::from_polar(cos / d, -wrapped_phase(d, lambda));
        assert!((ch.h.matrix()[(0, 0)] - expect).norm() < 1e-15);
    }

    #[test]
    fn oracle_cap_is_enforced() {
        let lambda = 0.025;
        let panel = RisPanel::new(0.1, 0.1, lambda / 2.0, Vec3::new(0.0, 0.0, 20.0)).unwrap();
        let mut setup = CascadeSetup::square(2, lambda);
        setup.max_entries = 10;
        let r = assemble_channels(
            &panel,
            Vec3::new(1e5, 0.0, 1e5),
            Vec3::new(5.0, 0.0, 0.0),
            &setup,
        );
        assert!(matches!(r, Err(Error::OracleScale { .. })));
    }

    #[test]
    fn channels_are_rank_one() {
        let lambda = 0.025;
        let panel = RisPanel::new(lambda, lambda, lambda / 2.0, Vec3::new(0.0, 0.0, 20.0)).unwrap();
        assert_eq!(panel.element_count(), 4);
        let setup = CascadeSetup {
            sat_side: SatSideModel::PerElement,
            ..CascadeSetup::square(2, lambda)
        };
        let ch = assemble_channels(
            &panel,
            Vec3::new(2e5, 1e3, 3e5),
            Vec3::new(9.0, -3.0, 0.0),
            &setup,
        )
        .unwrap();
        assert_eq!(ch.h.shape(), (4, 4));
        assert_eq!(ch.g.shape(), (4, 4));
        assert_eq!(ch.h.rank(1e-10), 1);
        assert_eq!(ch.g.rank(1e-10), 1);
    }
}
