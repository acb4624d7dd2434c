//! Surface layout and wave phases.
//!
//! Elements sit on a rectangular grid in the z = 0 plane. Element `(m, n)` is
//! at `(m·dx, n·dy)`; flat element indices are row-major, `e = m·N + n`.
//! Feeds inject a guided reference wave that travels in-plane with
//! wavenumber `n_wg·k_f` and decays as `exp(−α·d)`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RhsError};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default element spacing in free-space wavelengths.
pub const DEFAULT_SPACING_WAVELENGTHS: f64 = 0.2;
/// Default effective index of the guiding structure.
pub const DEFAULT_WAVEGUIDE_INDEX: f64 = 3.7;
/// Default reference-wave attenuation, Np/m.
pub const DEFAULT_ATTENUATION: f64 = 40.0;

/// Far-field direction. `theta` is measured from broadside (the surface
/// normal), `phi` is the azimuth in the surface plane from the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    theta: f64,
    phi: f64,
}

impl Direction {
    /// Angles in radians. `phi` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(RhsError::invalid("direction angles must be finite"));
        }
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
            return Err(RhsError::invalid(format!(
                "theta = {theta} rad outside [0, π/2]"
            )));
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Ok(Self {
            theta: theta.min(FRAC_PI_2),
            phi,
        })
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    pub const fn broadside() -> Self {
        Self {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// In-plane projection `(sinθ·cosφ, sinθ·sinφ)`.
    pub fn direction_cosines(&self) -> (f64, f64) {
        let s = self.theta.sin();
        (s * self.phi.cos(), s * self.phi.sin())
    }
}

/// Azimuth of the plane used for signed pattern angles on a given layout.
///
/// Lines along y (`M = 1`) use the y–z plane, everything else the x–z plane.
fn principal_azimuth(rows: usize, cols: usize) -> f64 {
    if rows == 1 && cols > 1 {
        FRAC_PI_2
    } else {
        0.0
    }
}

impl Direction {
    /// Maps a signed angle in degrees (in `[-90, 90]`) to a direction in the
    /// surface's principal plane: positive angles lie on the `+axis` side,
    /// negative ones on the opposite azimuth.
    pub fn in_principal_plane(geometry: &RhsGeometry, signed_deg: f64) -> Result<Self> {
        if !signed_deg.is_finite() || signed_deg.abs() > 90.0 {
            return Err(RhsError::invalid(format!(
                "angle {signed_deg}° outside [-90°, 90°]"
            )));
        }
        let base = principal_azimuth(geometry.rows, geometry.cols);
        let phi = if signed_deg < 0.0 { base + PI } else { base };
        Self::new(signed_deg.abs().to_radians(), phi)
    }

    /// Inverse of [`Direction::in_principal_plane`] for directions lying in
    /// that plane; off-plane directions report the sign of their projection.
    pub fn signed_degrees(&self, geometry: &RhsGeometry) -> f64 {
        let base = principal_azimuth(geometry.rows, geometry.cols);
        let along = (self.phi - base).cos();
        let deg = self.theta.to_degrees();
        if along < -1e-9 {
            -deg
        } else {
            deg
        }
    }
}

/// Surface layout: element grid, feeds, carrier and guided-wave parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsGeometry {
    rows: usize,
    cols: usize,
    spacing_x: f64,
    spacing_y: f64,
    feeds: Vec<[f64; 2]>,
    carrier_frequency: f64,
    waveguide_index: f64,
    attenuation: f64,
}

/// Builder for [`RhsGeometry`]; unset spacings default to `λ/5`, unset feeds
/// to [`default_feed_positions`] with one feed.
#[derive(Debug, Clone)]
pub struct GeometryBuilder {
    rows: usize,
    cols: usize,
    carrier_frequency: f64,
    spacing: Option<(f64, f64)>,
    feeds: FeedSpec,
    waveguide_index: f64,
    attenuation: f64,
}

#[derive(Debug, Clone)]
enum FeedSpec {
    Default(usize),
    Explicit(Vec<[f64; 2]>),
}

impl GeometryBuilder {
    pub fn spacing(mut self, dx: f64, dy: f64) -> Self {
        self.spacing = Some((dx, dy));
        self
    }

    /// Equal spacing in both axes, given in free-space wavelengths.
    pub fn spacing_wavelengths(mut self, fraction: f64) -> Self {
        let d = fraction * SPEED_OF_LIGHT / self.carrier_frequency;
        self.spacing = Some((d, d));
        self
    }

    pub fn feed_count(mut self, k: usize) -> Self {
        self.feeds = FeedSpec::Default(k);
        self
    }

    pub fn feeds(mut self, positions: Vec<[f64; 2]>) -> Self {
        self.feeds = FeedSpec::Explicit(positions);
        self
    }

    pub fn waveguide_index(mut self, n_wg: f64) -> Self {
        self.waveguide_index = n_wg;
        self
    }

    pub fn attenuation(mut self, alpha: f64) -> Self {
        self.attenuation = alpha;
        self
    }

    pub fn build(self) -> Result<RhsGeometry> {
        if self.rows == 0 || self.cols == 0 {
            return Err(RhsError::invalid("rows and cols must be ≥ 1"));
        }
        if !(self.carrier_frequency.is_finite() && self.carrier_frequency > 0.0) {
            return Err(RhsError::invalid("carrier frequency must be > 0"));
        }
        let wavelength = SPEED_OF_LIGHT / self.carrier_frequency;
        let (dx, dy) = self.spacing.unwrap_or((
            DEFAULT_SPACING_WAVELENGTHS * wavelength,
            DEFAULT_SPACING_WAVELENGTHS * wavelength,
        ));
        if !(dx.is_finite() && dx > 0.0 && dy.is_finite() && dy > 0.0) {
            return Err(RhsError::invalid("element spacings must be > 0"));
        }
        if !(self.waveguide_index.is_finite() && self.waveguide_index >= 1.0) {
            return Err(RhsError::invalid("waveguide index must be ≥ 1"));
        }
        if !(self.attenuation.is_finite() && self.attenuation >= 0.0) {
            return Err(RhsError::invalid("attenuation must be ≥ 0"));
        }
        let feeds = match self.feeds {
            FeedSpec::Default(k) => default_feed_positions(self.rows, self.cols, dy, k)?,
            FeedSpec::Explicit(f) => f,
        };
        if feeds.is_empty() {
            return Err(RhsError::invalid("at least one feed is required"));
        }
        let (xmax, ymax) = ((self.rows - 1) as f64 * dx, (self.cols - 1) as f64 * dy);
        let tol = 1e-12 * (1.0 + xmax.max(ymax));
        for (k, f) in feeds.iter().enumerate() {
            let inside = f.iter().all(|c| c.is_finite())
                && (-tol..=xmax + tol).contains(&f[0])
                && (-tol..=ymax + tol).contains(&f[1]);
            if !inside {
                return Err(RhsError::invalid(format!(
                    "feed {k} at ({}, {}) lies outside the surface",
                    f[0], f[1]
                )));
            }
        }
        Ok(RhsGeometry {
            rows: self.rows,
            cols: self.cols,
            spacing_x: dx,
            spacing_y: dy,
            feeds,
            carrier_frequency: self.carrier_frequency,
            waveguide_index: self.waveguide_index,
            attenuation: self.attenuation,
        })
    }
}

/// Default feed layout: `k` feeds along the `x = 0` edge.
///
/// A single feed sits at the line start for 1-D surfaces (`M = 1`) and at
/// the edge midpoint otherwise; several feeds span the edge evenly.
pub fn default_feed_positions(rows: usize, cols: usize, dy: f64, k: usize) -> Result<Vec<[f64; 2]>> {
    if k == 0 {
        return Err(RhsError::invalid("feed count must be ≥ 1"));
    }
    let edge = (cols.max(1) - 1) as f64 * dy;
    Ok(match k {
        1 if rows == 1 => vec![[0.0, 0.0]],
        1 => vec![[0.0, edge / 2.0]],
        _ => (0..k)
            .map(|i| [0.0, edge * i as f64 / (k - 1) as f64])
            .collect(),
    })
}

impl RhsGeometry {
    /// Starts a builder at the given grid size and carrier frequency, with
    /// `λ/5` spacing, one feed, `n_wg = 3.7` and `α = 40 Np/m`.
    pub fn builder(rows: usize, cols: usize, carrier_frequency: f64) -> GeometryBuilder {
        GeometryBuilder {
            rows,
            cols,
            carrier_frequency,
            spacing: None,
            feeds: FeedSpec::Default(1),
            waveguide_index: DEFAULT_WAVEGUIDE_INDEX,
            attenuation: DEFAULT_ATTENUATION,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn element_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn feed_count(&self) -> usize {
        self.feeds.len()
    }

    pub fn feed_positions(&self) -> &[[f64; 2]] {
        &self.feeds
    }

    pub fn spacing(&self) -> (f64, f64) {
        (self.spacing_x, self.spacing_y)
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    pub fn waveguide_index(&self) -> f64 {
        self.waveguide_index
    }

    pub fn attenuation(&self) -> f64 {
        self.attenuation
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency
    }

    /// `k_f = 2π·f/c`, rad/m.
    pub fn free_space_wavenumber(&self) -> f64 {
        TAU * self.carrier_frequency / SPEED_OF_LIGHT
    }

    fn check_element(&self, m: usize, n: usize) -> Result<()> {
        if m >= self.rows {
            return Err(RhsError::InvalidIndex {
                what: "m",
                index: m,
                limit: self.rows,
            });
        }
        if n >= self.cols {
            return Err(RhsError::InvalidIndex {
                what: "n",
                index: n,
                limit: self.cols,
            });
        }
        Ok(())
    }

    fn check_feed(&self, k: usize) -> Result<()> {
        if k >= self.feeds.len() {
            return Err(RhsError::InvalidIndex {
                what: "feed",
                index: k,
                limit: self.feeds.len(),
            });
        }
        Ok(())
    }

    /// Row-major flat index of element `(m, n)`.
    pub fn element_index(&self, m: usize, n: usize) -> Result<usize> {
        self.check_element(m, n)?;
        Ok(m * self.cols + n)
    }

    pub fn element_position(&self, m: usize, n: usize) -> Result<[f64; 2]> {
        self.check_element(m, n)?;
        Ok(self.position_unchecked(m, n))
    }

    fn position_unchecked(&self, m: usize, n: usize) -> [f64; 2] {
        [m as f64 * self.spacing_x, n as f64 * self.spacing_y]
    }

    /// Element positions in row-major order.
    pub fn element_positions(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.rows).flat_map(move |m| (0..self.cols).map(move |n| self.position_unchecked(m, n)))
    }

    /// Feed-to-element distance.
    pub fn feed_distance(&self, k: usize, m: usize, n: usize) -> Result<f64> {
        self.check_feed(k)?;
        self.check_element(m, n)?;
        Ok(self.distance_unchecked(k, self.position_unchecked(m, n)))
    }

    fn distance_unchecked(&self, k: usize, p: [f64; 2]) -> f64 {
        let f = self.feeds[k];
        (p[0] - f[0]).hypot(p[1] - f[1])
    }

    /// Guided travel phase `n_wg·k_f·d` from feed `k` to element `(m, n)`.
    pub fn reference_phase(&self, k: usize, m: usize, n: usize) -> Result<f64> {
        Ok(self.waveguide_index * self.free_space_wavenumber() * self.feed_distance(k, m, n)?)
    }

    /// Free-space phase `k_f·(x·sinθcosφ + y·sinθsinφ)` of element `(m, n)`.
    pub fn object_phase(&self, m: usize, n: usize, dir: Direction) -> Result<f64> {
        self.check_element(m, n)?;
        Ok(self.object_phase_at(self.position_unchecked(m, n), dir))
    }

    pub(crate) fn object_phase_at(&self, p: [f64; 2], dir: Direction) -> f64 {
        let (u, v) = dir.direction_cosines();
        self.free_space_wavenumber() * (p[0] * u + p[1] * v)
    }

    /// Reference-wave amplitude `exp(−α·d)` at element `(m, n)` from feed `k`.
    pub fn reference_amplitude(&self, k: usize, m: usize, n: usize) -> Result<f64> {
        Ok((-self.attenuation * self.feed_distance(k, m, n)?).exp())
    }

    /// Per-element object phases toward `dir`, row-major.
    pub fn object_phases(&self, dir: Direction) -> Vec<f64> {
        self.element_positions()
            .map(|p| self.object_phase_at(p, dir))
            .collect()
    }

    /// Per-element reference phases from feed `k`, row-major.
    pub fn reference_phases(&self, k: usize) -> Result<Vec<f64>> {
        self.check_feed(k)?;
        let beta = self.waveguide_index * self.free_space_wavenumber();
        Ok(self
            .element_positions()
            .map(|p| beta * self.distance_unchecked(k, p))
            .collect())
    }

    /// Guided excitation `exp(−α·d)·exp(−j·n_wg·k_f·d)` of every element by
    /// every feed, as a row-major `[element][feed]` table.
    pub fn guided_excitation(&self) -> Vec<Vec<Complex64>> {
        let beta = self.waveguide_index * self.free_space_wavenumber();
        self.element_positions()
            .map(|p| {
                (0..self.feeds.len())
                    .map(|k| {
                        let d = self.distance_unchecked(k, p);
                        Complex64::from_polar((-self.attenuation * d).exp(), -beta * d)
                    })
                    .collect()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line(n: usize) -> RhsGeometry {
        RhsGeometry::builder(1, n, 12e9).build().unwrap()
    }

    #[test]
    fn wavenumber_values() {
        let g = line(4);
        assert_relative_eq!(g.free_space_wavenumber(), 251.501403, epsilon = 1e-6);
        let unit = RhsGeometry::builder(1, 1, SPEED_OF_LIGHT / TAU).build().unwrap();
        assert_relative_eq!(unit.free_space_wavenumber(), 1.0, epsilon = 1e-15);
        let g24 = RhsGeometry::builder(1, 4, 24e9).build().unwrap();
        assert_relative_eq!(
            g24.free_space_wavenumber(),
            2.0 * g.free_space_wavenumber(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn element_positions_follow_grid() {
        let g = RhsGeometry::builder(3, 4, 12e9)
            .spacing(0.0125, 0.02)
            .build()
            .unwrap();
        assert_eq!(g.element_position(0, 0).unwrap(), [0.0, 0.0]);
        assert_eq!(g.element_position(1, 0).unwrap(), [0.0125, 0.0]);
        assert_eq!(g.element_position(2, 3).unwrap(), [0.025, 0.06]);
        assert!(matches!(
            g.element_position(3, 0),
            Err(RhsError::InvalidIndex { what: "m", .. })
        ));
        assert!(g.element_position(0, 4).is_err());
        assert_eq!(g.element_index(2, 3).unwrap(), 11);
    }

    #[test]
    fn reference_phase_cases() {
        let g = line(8);
        // Feed sits on element (0, 0).
        assert_eq!(g.reference_phase(0, 0, 0).unwrap(), 0.0);

        // One guided wavelength.
        let lg = g.wavelength() / g.waveguide_index();
        let g1 = RhsGeometry::builder(1, 2, 12e9)
            .spacing(1.0, lg)
            .build()
            .unwrap();
        assert_relative_eq!(g1.reference_phase(0, 0, 1).unwrap(), TAU, epsilon = 1e-12);

        let g2 = RhsGeometry::builder(1, 2, 12e9)
            .spacing(0.01, 0.01)
            .waveguide_index(1.5)
            .build()
            .unwrap();
        let expected = 1.5 * TAU * 12e9 / SPEED_OF_LIGHT * 0.01;
        assert_relative_eq!(g2.reference_phase(0, 0, 1).unwrap(), expected, epsilon = 1e-12);
        assert_relative_eq!(expected, 3.772521, epsilon = 1e-6);
        assert!(g2.reference_phase(1, 0, 0).is_err());
    }

    #[test]
    fn object_phase_cases() {
        let g = RhsGeometry::builder(4, 3, 12e9).build().unwrap();
        for m in 0..4 {
            for n in 0..3 {
                let dir = Direction::new(0.0, 1.234).unwrap();
                assert_eq!(g.object_phase(m, n, dir).unwrap(), 0.0);
            }
        }
        let lam = g.wavelength();
        let half = RhsGeometry::builder(2, 1, 12e9)
            .spacing(lam / 2.0, lam / 2.0)
            .build()
            .unwrap();
        let endfire = Direction::new(FRAC_PI_2, 0.0).unwrap();
        assert_relative_eq!(half.object_phase(1, 0, endfire).unwrap(), PI, epsilon = 1e-12);

        let full = RhsGeometry::builder(2, 1, 12e9)
            .spacing(lam, lam)
            .build()
            .unwrap();
        let d30 = Direction::from_degrees(30.0, 0.0).unwrap();
        assert_relative_eq!(full.object_phase(1, 0, d30).unwrap(), PI, epsilon = 1e-12);
    }

    #[test]
    fn reference_amplitude_cases() {
        let lossless = RhsGeometry::builder(1, 5, 12e9).attenuation(0.0).build().unwrap();
        for n in 0..5 {
            assert_eq!(lossless.reference_amplitude(0, 0, n).unwrap(), 1.0);
        }
        let g = RhsGeometry::builder(1, 2, 12e9)
            .spacing(0.1, 0.1)
            .attenuation(5.0)
            .build()
            .unwrap();
        assert_relative_eq!(g.reference_amplitude(0, 0, 1).unwrap(), 0.6065, epsilon = 1e-4);
        let unit = RhsGeometry::builder(1, 2, 12e9)
            .spacing(0.1, 0.1)
            .attenuation(10.0)
            .build()
            .unwrap();
        assert_relative_eq!(
            unit.reference_amplitude(0, 0, 1).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-15
        );
        assert_eq!(g.reference_amplitude(0, 0, 0).unwrap(), 1.0);
    }

    #[test]
    fn builder_rejects_invalid() {
        assert!(RhsGeometry::builder(0, 4, 12e9).build().is_err());
        assert!(RhsGeometry::builder(1, 4, 0.0).build().is_err());
        assert!(RhsGeometry::builder(1, 4, 12e9).waveguide_index(0.9).build().is_err());
        assert!(RhsGeometry::builder(1, 4, 12e9).attenuation(-1.0).build().is_err());
        assert!(RhsGeometry::builder(1, 4, 12e9).spacing(0.0, 1.0).build().is_err());
        assert!(RhsGeometry::builder(1, 4, 12e9).feed_count(0).build().is_err());
        assert!(RhsGeometry::builder(2, 2, 12e9)
            .spacing(0.01, 0.01)
            .feeds(vec![[0.02, 0.0]])
            .build()
            .is_err());
        // Edges are inclusive.
        assert!(RhsGeometry::builder(2, 2, 12e9)
            .spacing(0.01, 0.01)
            .feeds(vec![[0.01, 0.01]])
            .build()
            .is_ok());
    }

    #[test]
    fn default_feeds() {
        let g = RhsGeometry::builder(1, 16, 12e9).build().unwrap();
        assert_eq!(g.feed_positions(), &[[0.0, 0.0]]);
        let g = RhsGeometry::builder(4, 5, 12e9).spacing(0.01, 0.01).build().unwrap();
        assert_relative_eq!(g.feed_positions()[0][1], 0.02, epsilon = 1e-15);
        let g = RhsGeometry::builder(4, 5, 12e9)
            .spacing(0.01, 0.01)
            .feed_count(3)
            .build()
            .unwrap();
        let ys: Vec<f64> = g.feed_positions().iter().map(|f| f[1]).collect();
        assert_relative_eq!(ys.as_slice(), [0.0, 0.02, 0.04].as_slice(), epsilon = 1e-15);
    }

    #[test]
    fn principal_plane_round_trip() {
        let line = line(16);
        let d = Direction::in_principal_plane(&line, -3.0).unwrap();
        assert_relative_eq!(d.phi(), 3.0 * FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(d.signed_degrees(&line), -3.0, epsilon = 1e-12);
        let plane = RhsGeometry::builder(4, 4, 12e9).build().unwrap();
        let d = Direction::in_principal_plane(&plane, 23.0).unwrap();
        assert_eq!(d.phi(), 0.0);
        assert_relative_eq!(d.signed_degrees(&plane), 23.0, epsilon = 1e-12);
        assert!(Direction::in_principal_plane(&plane, 91.0).is_err());
        assert!(Direction::new(-0.1, 0.0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn reference_phase_monotone_in_distance(n1 in 0usize..32, n2 in 0usize..32, nwg in 1.0f64..4.0) {
                let g = RhsGeometry::builder(1, 32, 12e9).waveguide_index(nwg).build().unwrap();
                let (d1, d2) = (g.feed_distance(0, 0, n1).unwrap(), g.feed_distance(0, 0, n2).unwrap());
                let (p1, p2) = (g.reference_phase(0, 0, n1).unwrap(), g.reference_phase(0, 0, n2).unwrap());
                if d1 <= d2 { prop_assert!(p1 <= p2); } else { prop_assert!(p1 >= p2); }
            }

            #[test]
            fn object_phase_linear_in_position(m in 0usize..8, n in 0usize..8, th in 0.0f64..FRAC_PI_2, ph in 0.0f64..TAU) {
                let g = RhsGeometry::builder(16, 16, 12e9).build().unwrap();
                let dir = Direction::new(th, ph).unwrap();
                let single = g.object_phase(m, n, dir).unwrap();
                let double = g.object_phase(2 * m, 2 * n, dir).unwrap();
                prop_assert!((double - 2.0 * single).abs() <= 1e-12 * (1.0 + single.abs()));
                let broadside = Direction::new(0.0, ph).unwrap();
                prop_assert_eq!(g.object_phase(m, n, broadside).unwrap(), 0.0);
            }

            #[test]
            fn reference_amplitude_in_unit_interval(n in 0usize..16, alpha in 0.0f64..200.0) {
                let g = RhsGeometry::builder(1, 16, 12e9).attenuation(alpha).build().unwrap();
                let a = g.reference_amplitude(0, 0, n).unwrap();
                prop_assert!(a > 0.0 && a <= 1.0);
                prop_assert_eq!(a == 1.0, alpha == 0.0 || n == 0);
            }
        }
    }
}
