//! Holographic amplitude patterns and far-field evaluation.
//!
//! An element's radiation amplitude toward a target direction follows the
//! normalized real part of the reference/object interference,
//! `(cos(ψ_obj − ψ_ref) + 1) / 2`. Multi-beam patterns are weighted averages
//! of single-beam maps. The far field is the coherent sum of every element's
//! leaked reference wave, re-phased toward the observation direction.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Result, RhsError};
use crate::geometry::{Direction, RhsGeometry};

/// Numeric floor used in place of −∞ dB.
pub const GAIN_FLOOR_DB: f64 = -300.0;

/// Default PIN switching threshold on the normalized amplitude.
pub const DEFAULT_PIN_THRESHOLD: f64 = 0.5;

/// Radiation efficiency of an element with the diode OFF (radiating).
pub const MEASURED_OFF_EFFICIENCY: f64 = 0.37;
/// Radiation efficiency of an element with the diode ON.
pub const MEASURED_ON_EFFICIENCY: f64 = 0.13;

/// Per-element amplitudes in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HolographicAmplitudes(Vec<f64>);

impl HolographicAmplitudes {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(RhsError::invalid(format!(
                "amplitude {v} at element {i} outside [0, 1]"
            )));
        }
        Ok(Self(values))
    }

    /// Clips every value into `[0, 1]`; NaN maps to 0.
    pub fn clamped(values: Vec<f64>) -> Self {
        Self(
            values
                .into_iter()
                .map(|v| if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) })
                .collect(),
        )
    }

    pub fn uniform(len: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for HolographicAmplitudes {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Real part of the normalized interference, `cos(ψ_obj − ψ_ref)`.
pub fn interference_real(
    geometry: &RhsGeometry,
    feed: usize,
    m: usize,
    n: usize,
    dir: Direction,
) -> Result<f64> {
    let obj = geometry.object_phase(m, n, dir)?;
    let reference = geometry.reference_phase(feed, m, n)?;
    Ok((obj - reference).cos())
}

/// Single-beam holographic amplitude of element `(m, n)`, in `[0, 1]`.
pub fn holographic_amplitude(
    geometry: &RhsGeometry,
    feed: usize,
    m: usize,
    n: usize,
    dir: Direction,
) -> Result<f64> {
    Ok(amplitude_from_interference(interference_real(
        geometry, feed, m, n, dir,
    )?))
}

#[inline]
fn amplitude_from_interference(re: f64) -> f64 {
    ((re + 1.0) / 2.0).clamp(0.0, 1.0)
}

/// Whole-surface single-beam map for one feed.
pub fn single_beam_pattern(
    geometry: &RhsGeometry,
    feed: usize,
    dir: Direction,
) -> Result<HolographicAmplitudes> {
    multibeam_pattern(geometry, feed, &[(dir, 1.0)])
}

/// Weighted average of single-beam maps, `Σ w_b·M_b / Σ w_b`.
pub fn multibeam_pattern(
    geometry: &RhsGeometry,
    feed: usize,
    beams: &[(Direction, f64)],
) -> Result<HolographicAmplitudes> {
    let total = check_beam_weights(beams)?;
    let reference = geometry.reference_phases(feed)?;
    let mut acc = vec![0.0; geometry.element_count()];
    for &(dir, w) in beams {
        if w == 0.0 {
            continue;
        }
        for ((a, obj), r) in acc.iter_mut().zip(geometry.object_phases(dir)).zip(&reference) {
            *a += w * amplitude_from_interference((obj - r).cos());
        }
    }
    Ok(HolographicAmplitudes::clamped(
        acc.into_iter().map(|a| a / total).collect(),
    ))
}

/// Equal-weight average of [`multibeam_pattern`] over every feed; one shared
/// amplitude per element for multi-feed surfaces.
pub fn multifeed_multibeam_pattern(
    geometry: &RhsGeometry,
    beams: &[(Direction, f64)],
) -> Result<HolographicAmplitudes> {
    let k = geometry.feed_count();
    let mut acc = vec![0.0; geometry.element_count()];
    for feed in 0..k {
        let p = multibeam_pattern(geometry, feed, beams)?;
        for (a, v) in acc.iter_mut().zip(p.values()) {
            *a += v;
        }
    }
    Ok(HolographicAmplitudes::clamped(
        acc.into_iter().map(|a| a / k as f64).collect(),
    ))
}

fn check_beam_weights(beams: &[(Direction, f64)]) -> Result<f64> {
    if beams.is_empty() {
        return Err(RhsError::invalid("at least one beam is required"));
    }
    if beams.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
        return Err(RhsError::invalid("beam weights must be finite and ≥ 0"));
    }
    let total: f64 = beams.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(RhsError::invalid("beam weights are all zero"));
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinMode {
    /// OFF radiates with unit field amplitude, ON not at all.
    Ideal,
    /// Field amplitudes from measured OFF/ON radiation efficiencies.
    Measured,
}

impl PinMode {
    /// `(off_weight, on_weight)` field amplitudes.
    pub fn weights(self) -> (f64, f64) {
        match self {
            PinMode::Ideal => (1.0, 0.0),
            PinMode::Measured => (MEASURED_OFF_EFFICIENCY.sqrt(), MEASURED_ON_EFFICIENCY.sqrt()),
        }
    }
}

/// Binary diode states; `true` means the diode is ON (element detuned).
#[derive(Debug, Clone, PartialEq)]
pub struct PinState {
    states: Vec<bool>,
    mode: PinMode,
    off_weight: f64,
    on_weight: f64,
}

impl PinState {
    pub fn states(&self) -> &[bool] {
        &self.states
    }

    pub fn mode(&self) -> PinMode {
        self.mode
    }

    pub fn off_weight(&self) -> f64 {
        self.off_weight
    }

    pub fn on_weight(&self) -> f64 {
        self.on_weight
    }

    /// Field weight per element.
    pub fn weights(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|&on| if on { self.on_weight } else { self.off_weight })
            .collect()
    }
}

/// Elements strictly above `threshold` get the diode OFF and radiate.
pub fn quantize_pin(
    amps: &HolographicAmplitudes,
    threshold: f64,
    mode: PinMode,
) -> Result<PinState> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(RhsError::invalid(format!(
            "PIN threshold {threshold} outside (0, 1)"
        )));
    }
    let (off_weight, on_weight) = mode.weights();
    Ok(PinState {
        states: amps.values().iter().map(|&a| a <= threshold).collect(),
        mode,
        off_weight,
        on_weight,
    })
}

/// Complex far field toward `dir`:
/// `Σ_k e_k Σ_{mn} w_mn·a_k,mn·exp(−jψ_ref)·exp(+jψ_obj)`.
///
/// Summation runs over feeds in the outer loop and row-major elements in the
/// inner loop.
pub fn array_factor(
    geometry: &RhsGeometry,
    element_weights: &[f64],
    feed_excitations: &[Complex64],
    dir: Direction,
) -> Result<Complex64> {
    let source = PatternSource::new(geometry, element_weights, feed_excitations)?;
    Ok(source.evaluate(geometry, dir))
}

/// Precomputed per-feed leaked-wave terms for repeated far-field evaluation.
struct PatternSource {
    positions: Vec<[f64; 2]>,
    // [feed][element]: e_k · w_e · a_k,e · exp(−jψ_ref)
    terms: Vec<Vec<Complex64>>,
}

impl PatternSource {
    fn new(
        geometry: &RhsGeometry,
        element_weights: &[f64],
        feed_excitations: &[Complex64],
    ) -> Result<Self> {
        let count = geometry.element_count();
        if element_weights.len() != count {
            return Err(RhsError::invalid(format!(
                "expected {count} element weights, got {}",
                element_weights.len()
            )));
        }
        if feed_excitations.len() != geometry.feed_count() {
            return Err(RhsError::invalid(format!(
                "expected {} feed excitations, got {}",
                geometry.feed_count(),
                feed_excitations.len()
            )));
        }
        let guided = geometry.guided_excitation();
        let terms = feed_excitations
            .iter()
            .enumerate()
            .map(|(k, &ek)| {
                element_weights
                    .iter()
                    .zip(&guided)
                    .map(|(&w, g)| ek * g[k] * w)
                    .collect()
            })
            .collect();
        Ok(Self {
            positions: geometry.element_positions().collect(),
            terms,
        })
    }

    fn evaluate(&self, geometry: &RhsGeometry, dir: Direction) -> Complex64 {
        let phases: Vec<Complex64> = self
            .positions
            .iter()
            .map(|&p| Complex64::from_polar(1.0, geometry.object_phase_at(p, dir)))
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for feed_terms in &self.terms {
            for (t, ph) in feed_terms.iter().zip(&phases) {
                total += t * ph;
            }
        }
        total
    }
}

/// Layout of a pattern's direction grid, used for neighbor tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridShape {
    /// Ordered sweep; neighbors are adjacent entries.
    Line,
    /// Row-major `rows × cols` grid with 4-neighborhoods.
    Grid { rows: usize, cols: usize },
}

/// Normalized gain over a direction grid (peak at 0 dB).
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationPattern {
    grid: Vec<Direction>,
    gains_db: Vec<f64>,
    shape: GridShape,
}

impl RadiationPattern {
    pub fn grid(&self) -> &[Direction] {
        &self.grid
    }

    pub fn gains_db(&self) -> &[f64] {
        &self.gains_db
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Index and direction of the global maximum (first one on ties).
    pub fn peak(&self) -> (usize, Direction) {
        let mut best = 0;
        for (i, g) in self.gains_db.iter().enumerate() {
            if *g > self.gains_db[best] {
                best = i;
            }
        }
        (best, self.grid[best])
    }

    /// CSV with columns `theta_deg,phi_deg,gain_db`, 6 decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["theta_deg", "phi_deg", "gain_db"])?;
        for (d, g) in self.grid.iter().zip(&self.gains_db) {
            w.write_record([
                format!("{:.6}", d.theta().to_degrees()),
                format!("{:.6}", d.phi().to_degrees()),
                format!("{:.6}", g),
            ])?;
        }
        w.flush().map_err(|e| RhsError::io("<csv writer>", e))?;
        Ok(())
    }
}

/// Evaluates `20·log10|AF|` over an ordered 1-D sweep, normalized to a 0 dB
/// peak; zero-field directions get [`GAIN_FLOOR_DB`].
pub fn radiation_pattern(
    geometry: &RhsGeometry,
    element_weights: &[f64],
    feed_excitations: &[Complex64],
    grid: &[Direction],
) -> Result<RadiationPattern> {
    pattern_with_shape(geometry, element_weights, feed_excitations, grid, GridShape::Line)
}

/// As [`radiation_pattern`] over a row-major `rows × cols` direction grid.
pub fn radiation_pattern_grid(
    geometry: &RhsGeometry,
    element_weights: &[f64],
    feed_excitations: &[Complex64],
    grid: &[Direction],
    rows: usize,
    cols: usize,
) -> Result<RadiationPattern> {
    if rows * cols != grid.len() {
        return Err(RhsError::invalid(format!(
            "grid of {} directions is not {rows}×{cols}",
            grid.len()
        )));
    }
    pattern_with_shape(
        geometry,
        element_weights,
        feed_excitations,
        grid,
        GridShape::Grid { rows, cols },
    )
}

fn pattern_with_shape(
    geometry: &RhsGeometry,
    element_weights: &[f64],
    feed_excitations: &[Complex64],
    grid: &[Direction],
    shape: GridShape,
) -> Result<RadiationPattern> {
    if grid.is_empty() {
        return Err(RhsError::invalid("direction grid is empty"));
    }
    let source = PatternSource::new(geometry, element_weights, feed_excitations)?;
    let magnitudes: Vec<f64> = grid
        .iter()
        .map(|&d| source.evaluate(geometry, d).norm())
        .collect();
    let peak = magnitudes.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return Err(RhsError::invalid("array factor vanishes on the whole grid"));
    }
    let gains_db = magnitudes
        .iter()
        .map(|&a| {
            if a > 0.0 {
                (20.0 * (a / peak).log10()).max(GAIN_FLOOR_DB)
            } else {
                GAIN_FLOOR_DB
            }
        })
        .collect();
    Ok(RadiationPattern {
        grid: grid.to_vec(),
        gains_db,
        shape,
    })
}

/// A local maximum of a pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lobe {
    pub index: usize,
    pub direction: Direction,
    pub gain_db: f64,
}

/// All strict local maxima, sorted by gain descending (ties by grid index).
pub fn local_maxima(pattern: &RadiationPattern) -> Vec<Lobe> {
    let g = &pattern.gains_db;
    let is_max = |i: usize| -> bool {
        match pattern.shape {
            GridShape::Line => i > 0 && i + 1 < g.len() && g[i] > g[i - 1] && g[i] > g[i + 1],
            GridShape::Grid { rows, cols } => {
                let (r, c) = (i / cols, i % cols);
                let mut neighbors = Vec::with_capacity(4);
                if r > 0 {
                    neighbors.push(i - cols);
                }
                if r + 1 < rows {
                    neighbors.push(i + cols);
                }
                if c > 0 {
                    neighbors.push(i - 1);
                }
                if c + 1 < cols {
                    neighbors.push(i + 1);
                }
                !neighbors.is_empty() && neighbors.iter().all(|&j| g[i] > g[j])
            }
        }
    };
    let mut lobes: Vec<Lobe> = (0..g.len())
        .filter(|&i| is_max(i))
        .map(|i| Lobe {
            index: i,
            direction: pattern.grid[i],
            gain_db: g[i],
        })
        .collect();
    lobes.sort_by(|a, b| b.gain_db.total_cmp(&a.gain_db).then(a.index.cmp(&b.index)));
    lobes
}

/// Directions of the `count` highest local maxima.
pub fn find_main_lobes(pattern: &RadiationPattern, count: usize) -> Result<Vec<Direction>> {
    if count == 0 {
        return Err(RhsError::invalid("lobe count must be ≥ 1"));
    }
    let lobes = local_maxima(pattern);
    if lobes.len() < count {
        return Err(RhsError::LobeShortfall {
            requested: count,
            found: lobes.iter().map(|l| l.direction).collect(),
        });
    }
    Ok(lobes.iter().take(count).map(|l| l.direction).collect())
}

/// Ordered principal-plane sweep from `start_deg` to `stop_deg` (inclusive)
/// in `step_deg` increments.
pub fn principal_plane_grid(
    geometry: &RhsGeometry,
    start_deg: f64,
    stop_deg: f64,
    step_deg: f64,
) -> Result<Vec<Direction>> {
    if !(step_deg > 0.0) || stop_deg < start_deg {
        return Err(RhsError::invalid("invalid angular sweep"));
    }
    let steps = ((stop_deg - start_deg) / step_deg + 1e-9).floor() as usize;
    (0..=steps)
        .map(|i| Direction::in_principal_plane(geometry, start_deg + i as f64 * step_deg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_3, PI};

    /// Two-element geometry whose second element sees a chosen phase
    /// difference toward broadside.
    fn geometry_with_phase_difference(delta: f64) -> RhsGeometry {
        let probe = RhsGeometry::builder(1, 2, 12e9).build().unwrap();
        let beta = probe.waveguide_index() * probe.free_space_wavenumber();
        RhsGeometry::builder(1, 2, 12e9)
            .spacing(1.0, delta / beta)
            .build()
            .unwrap()
    }

    #[test]
    fn interference_cases() {
        let b = Direction::broadside();
        let g = geometry_with_phase_difference(PI);
        // Element (0, 0) coincides with the feed.
        assert_relative_eq!(interference_real(&g, 0, 0, 0, b).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(interference_real(&g, 0, 0, 1, b).unwrap(), -1.0, epsilon = 1e-12);
        let g = geometry_with_phase_difference(PI / 2.0);
        assert_relative_eq!(interference_real(&g, 0, 0, 1, b).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn amplitude_cases() {
        let b = Direction::broadside();
        let g = geometry_with_phase_difference(PI);
        assert_relative_eq!(holographic_amplitude(&g, 0, 0, 0, b).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(holographic_amplitude(&g, 0, 0, 1, b).unwrap(), 0.0, epsilon = 1e-12);
        let g = geometry_with_phase_difference(FRAC_PI_3);
        assert_relative_eq!(holographic_amplitude(&g, 0, 0, 1, b).unwrap(), 0.75, epsilon = 1e-12);
        assert!(holographic_amplitude(&g, 1, 0, 0, b).is_err());
    }

    #[test]
    fn multibeam_degenerate_cases() {
        let g = RhsGeometry::builder(3, 4, 12e9).feed_count(2).build().unwrap();
        let d = Direction::from_degrees(20.0, 40.0).unwrap();
        let single = single_beam_pattern(&g, 1, d).unwrap();
        for m in 0..3 {
            for n in 0..4 {
                let e = g.element_index(m, n).unwrap();
                assert_relative_eq!(
                    single.values()[e],
                    holographic_amplitude(&g, 1, m, n, d).unwrap(),
                    epsilon = 1e-15
                );
            }
        }
        let twice = multibeam_pattern(&g, 1, &[(d, 1.0), (d, 1.0)]).unwrap();
        for (a, b) in twice.values().iter().zip(single.values()) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
        assert!(multibeam_pattern(&g, 0, &[]).is_err());
        assert!(multibeam_pattern(&g, 0, &[(d, 0.0)]).is_err());
        assert!(multibeam_pattern(&g, 0, &[(d, -1.0)]).is_err());
    }

    #[test]
    fn dual_beam_line_matches_direct_evaluation() {
        // Values from a direct per-element evaluation at λ/5, n_wg = 3.7.
        let expected = [
            1.000000000000, 0.369244793601, 0.138319307695, 0.746770362126,
            0.599771081567, 0.412706814364, 0.495934912700, 0.327164459597,
            0.680439470533, 0.747401941365, 0.066300918367, 0.444479630406,
            0.983564197296, 0.311134934819, 0.225194360167, 0.713713986855,
        ];
        let g = RhsGeometry::builder(1, 16, 12e9).build().unwrap();
        let beams = [
            (Direction::in_principal_plane(&g, -3.0).unwrap(), 1.0),
            (Direction::in_principal_plane(&g, 23.0).unwrap(), 1.0),
        ];
        let p = multibeam_pattern(&g, 0, &beams).unwrap();
        for (a, e) in p.values().iter().zip(expected) {
            assert_relative_eq!(*a, e, epsilon = 1e-10);
        }
    }

    #[test]
    fn pin_quantization() {
        let a = HolographicAmplitudes::new(vec![0.8, 0.2, 0.5]).unwrap();
        let s = quantize_pin(&a, 0.5, PinMode::Ideal).unwrap();
        assert_eq!(s.states(), &[false, true, true]);
        assert_eq!(s.weights(), vec![1.0, 0.0, 0.0]);
        let s = quantize_pin(&a, 0.5, PinMode::Measured).unwrap();
        assert_relative_eq!(s.weights()[0], 0.6083, epsilon = 1e-4);
        assert_relative_eq!(s.weights()[1], 0.13f64.sqrt(), epsilon = 1e-15);
        assert!(s.off_weight() > s.on_weight());
        assert!(quantize_pin(&a, 0.0, PinMode::Ideal).is_err());
        assert!(quantize_pin(&a, 1.0, PinMode::Ideal).is_err());
    }

    #[test]
    fn amplitudes_validate_range() {
        assert!(HolographicAmplitudes::new(vec![0.0, 1.0]).is_ok());
        assert!(HolographicAmplitudes::new(vec![1.01]).is_err());
        assert!(HolographicAmplitudes::new(vec![f64::NAN]).is_err());
        assert_eq!(
            HolographicAmplitudes::clamped(vec![-1.0, 2.0, f64::NAN]).values(),
            &[0.0, 1.0, 0.0]
        );
    }

    #[test]
    fn array_factor_single_element_is_unity() {
        let g = RhsGeometry::builder(1, 1, 12e9).attenuation(0.0).build().unwrap();
        let e = [Complex64::new(1.0, 0.0)];
        for deg in [-80.0, -10.0, 0.0, 33.0, 90.0] {
            let d = Direction::in_principal_plane(&g, deg).unwrap();
            let af = array_factor(&g, &[1.0], &e, d).unwrap();
            assert_relative_eq!(af.re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(af.im, 0.0, epsilon = 1e-15);
        }
        assert!(array_factor(&g, &[1.0, 1.0], &e, Direction::broadside()).is_err());
        assert!(array_factor(&g, &[1.0], &[], Direction::broadside()).is_err());
    }

    #[test]
    fn array_factor_coherent_sum() {
        // Guided wave matched to the object wave: sinθ = n_wg is impossible,
        // so use spacing equal to a guided wavelength, where every reference
        // phase is a multiple of 2π and broadside adds coherently.
        let probe = RhsGeometry::builder(1, 1, 12e9).build().unwrap();
        let lg = probe.wavelength() / probe.waveguide_index();
        let g = RhsGeometry::builder(1, 8, 12e9)
            .spacing(lg, lg)
            .attenuation(0.0)
            .build()
            .unwrap();
        let af = array_factor(&g, &[1.0; 8], &[Complex64::new(1.0, 0.0)], Direction::broadside())
            .unwrap();
        assert_relative_eq!(af.norm(), 8.0, epsilon = 1e-10);
    }

    #[test]
    fn flat_pattern_for_single_element() {
        let g = RhsGeometry::builder(1, 1, 12e9).build().unwrap();
        let grid = principal_plane_grid(&g, -90.0, 90.0, 1.0).unwrap();
        let p = radiation_pattern(&g, &[1.0], &[Complex64::new(1.0, 0.0)], &grid).unwrap();
        assert!(p.gains_db().iter().all(|&x| x.abs() < 1e-12));
        assert!(radiation_pattern(&g, &[1.0], &[Complex64::new(1.0, 0.0)], &[]).is_err());
        assert!(radiation_pattern(&g, &[0.0], &[Complex64::new(1.0, 0.0)], &grid).is_err());
    }

    #[test]
    fn lobe_detection_on_synthetic_patterns() {
        let g = RhsGeometry::builder(1, 1, 12e9).build().unwrap();
        let grid = principal_plane_grid(&g, -10.0, 10.0, 1.0).unwrap();
        // Symmetric two-lobe pattern.
        let gains: Vec<f64> = (-10..=10)
            .map(|x: i32| -((x.abs() - 5) as f64).powi(2))
            .collect();
        let peak = gains.iter().cloned().fold(f64::MIN, f64::max);
        let pattern = RadiationPattern {
            grid: grid.clone(),
            gains_db: gains.iter().map(|x| x - peak).collect(),
            shape: GridShape::Line,
        };
        let lobes = local_maxima(&pattern);
        assert_eq!(lobes.len(), 2);
        assert_eq!(lobes[0].gain_db, lobes[1].gain_db);
        let dirs = find_main_lobes(&pattern, 2).unwrap();
        let mut degs: Vec<f64> = dirs.iter().map(|d| d.signed_degrees(&g)).collect();
        degs.sort_by(f64::total_cmp);
        assert_relative_eq!(degs[0], -5.0, epsilon = 1e-9);
        assert_relative_eq!(degs[1], 5.0, epsilon = 1e-9);
        match find_main_lobes(&pattern, 3) {
            Err(RhsError::LobeShortfall { requested: 3, found }) => assert_eq!(found.len(), 2),
            other => panic!("expected shortfall, got {other:?}"),
        }
    }

    #[test]
    fn lobe_detection_on_2d_grid() {
        let mut grid = Vec::new();
        for t in 0..5 {
            for p in 0..5 {
                grid.push(Direction::from_degrees(t as f64 * 10.0, p as f64 * 45.0).unwrap());
            }
        }
        let mut gains = vec![-20.0; 25];
        gains[6] = 0.0;
        gains[18] = -3.0;
        gains[24] = -1.0; // corner, above both neighbors
        let pattern = RadiationPattern {
            grid,
            gains_db: gains,
            shape: GridShape::Grid { rows: 5, cols: 5 },
        };
        let lobes = local_maxima(&pattern);
        let idx: Vec<usize> = lobes.iter().map(|l| l.index).collect();
        assert_eq!(idx, vec![6, 24, 18]);
    }

    #[test]
    fn pattern_csv_format() {
        let g = RhsGeometry::builder(1, 1, 12e9).build().unwrap();
        let grid = principal_plane_grid(&g, -1.0, 1.0, 1.0).unwrap();
        let p = radiation_pattern(&g, &[1.0], &[Complex64::new(1.0, 0.0)], &grid).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("theta_deg,phi_deg,gain_db"));
        assert_eq!(lines.next(), Some("1.000000,180.000000,0.000000"));
        assert_eq!(lines.count(), 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use std::f64::consts::{FRAC_PI_2, TAU};

        proptest! {
            #[test]
            fn amplitude_bounded(n in 0usize..16, th in 0.0f64..FRAC_PI_2, ph in 0.0f64..TAU) {
                let g = RhsGeometry::builder(1, 16, 12e9).build().unwrap();
                let d = Direction::new(th, ph).unwrap();
                let a = holographic_amplitude(&g, 0, 0, n, d).unwrap();
                prop_assert!((0.0..=1.0).contains(&a));
            }

            #[test]
            fn multibeam_scale_invariant(w1 in 0.01f64..5.0, w2 in 0.0f64..5.0, c in 0.1f64..10.0,
                                         t1 in 0.0f64..1.5, t2 in 0.0f64..1.5) {
                let g = RhsGeometry::builder(3, 3, 12e9).build().unwrap();
                let d1 = Direction::new(t1, 0.3).unwrap();
                let d2 = Direction::new(t2, 2.0).unwrap();
                let a = multibeam_pattern(&g, 0, &[(d1, w1), (d2, w2)]).unwrap();
                let b = multibeam_pattern(&g, 0, &[(d1, c * w1), (d2, c * w2)]).unwrap();
                for (x, y) in a.values().iter().zip(b.values()) {
                    prop_assert!((0.0..=1.0).contains(x));
                    prop_assert!((x - y).abs() < 1e-12);
                }
            }

            #[test]
            fn pin_monotone(a in 0.0f64..1.0, bump in 0.0f64..1.0, thr in 0.01f64..0.99) {
                let lo = HolographicAmplitudes::new(vec![a]).unwrap();
                let hi = HolographicAmplitudes::new(vec![(a + bump).min(1.0)]).unwrap();
                let s_lo = quantize_pin(&lo, thr, PinMode::Ideal).unwrap();
                let s_hi = quantize_pin(&hi, thr, PinMode::Ideal).unwrap();
                // OFF (false) may not become ON (true) when the amplitude grows.
                prop_assert!(!( !s_lo.states()[0] && s_hi.states()[0]));
            }

            #[test]
            fn array_factor_is_linear(
                w1 in proptest::collection::vec(0.0f64..1.0, 6),
                w2 in proptest::collection::vec(0.0f64..1.0, 6),
                a in -2.0f64..2.0, b in -2.0f64..2.0,
                er in -1.0f64..1.0, ei in -1.0f64..1.0,
                th in 0.0f64..1.5, ph in 0.0f64..6.2,
            ) {
                let g = RhsGeometry::builder(2, 3, 12e9).feed_count(2).build().unwrap();
                let d = Direction::new(th, ph).unwrap();
                let e = [Complex64::new(1.0, 0.0), Complex64::new(er, ei)];
                let mix: Vec<f64> = w1.iter().zip(&w2).map(|(x, y)| a * x + b * y).collect();
                let lhs = array_factor(&g, &mix, &e, d).unwrap();
                let rhs = array_factor(&g, &w1, &e, d).unwrap() * a + array_factor(&g, &w2, &e, d).unwrap() * b;
                prop_assert!((lhs - rhs).norm() < 1e-12);

                let e2 = [Complex64::new(0.3, -0.2), Complex64::new(0.0, 1.0)];
                let esum = [e[0] + e2[0], e[1] + e2[1]];
                let lhs = array_factor(&g, &w1, &esum, d).unwrap();
                let rhs = array_factor(&g, &w1, &e, d).unwrap() + array_factor(&g, &w1, &e2, d).unwrap();
                prop_assert!((lhs - rhs).norm() < 1e-12);

                // Triangle bound.
                let bound: f64 = (0..2).map(|k| {
                    let amps: f64 = (0..2).flat_map(|m| (0..3).map(move |n| (m, n)))
                        .map(|(m, n)| w1[g.element_index(m, n).unwrap()] * g.reference_amplitude(k, m, n).unwrap())
                        .sum();
                    amps * e[k].norm()
                }).sum();
                prop_assert!(array_factor(&g, &w1, &e, d).unwrap().norm() <= bound + 1e-12);
            }
        }
    }
}
