//! Python bindings for `rhs_core`.
//!
//! Angles cross the boundary in degrees. Amplitude maps are flat row-major
//! lists; channel entries are nested lists of Python `complex`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use rhs_core::beamforming::{self, LinkBudget, PowerAllocation};
use rhs_core::channel::{self, ChannelConfig, ChannelMatrix};
use rhs_core::holography::{self, HolographicAmplitudes, PinMode};
use rhs_core::optimizer::{self, InitMode, OptimizationReport, OptimizerConfig, SumRateModel, Termination};
use rhs_core::{Direction, RhsError, RhsGeometry};

fn to_py(err: RhsError) -> PyErr {
    match err {
        RhsError::Io { .. } => PyOSError::new_err(err.to_string()),
        RhsError::SingularChannel { .. } | RhsError::ExperimentFailed(_) => {
            PyRuntimeError::new_err(err.to_string())
        }
        _ => PyValueError::new_err(err.to_string()),
    }
}

trait OrPy<T> {
    fn or_py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for rhs_core::Result<T> {
    fn or_py(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn parse_allocation(name: &str) -> PyResult<PowerAllocation> {
    match name {
        "equal" => Ok(PowerAllocation::Equal),
        "waterfilling" => Ok(PowerAllocation::Waterfilling),
        _ => Err(PyValueError::new_err(format!(
            "allocation must be 'equal' or 'waterfilling', got {name:?}"
        ))),
    }
}

fn parse_pin_mode(name: &str) -> PyResult<PinMode> {
    match name {
        "ideal" => Ok(PinMode::Ideal),
        "measured" => Ok(PinMode::Measured),
        _ => Err(PyValueError::new_err(format!(
            "mode must be 'ideal' or 'measured', got {name:?}"
        ))),
    }
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Threshold => "threshold",
        Termination::NoImprovement => "no_improvement",
        Termination::MaxIterations => "max_iterations",
        Termination::SingularIterate => "singular_iterate",
        Termination::SinglePass => "single_pass",
    }
}

/// Surface layout: element grid, feeds and guided-wave parameters.
#[pyclass(name = "Geometry", module = "rhs_py", frozen)]
pub struct PyGeometry {
    inner: RhsGeometry,
}

#[pymethods]
impl PyGeometry {
    #[new]
    #[pyo3(signature = (rows, cols, carrier_frequency = 12e9, feeds = 1, spacing_wavelengths = None, waveguide_index = None, attenuation = None))]
    fn new(
        rows: usize,
        cols: usize,
        carrier_frequency: f64,
        feeds: usize,
        spacing_wavelengths: Option<f64>,
        waveguide_index: Option<f64>,
        attenuation: Option<f64>,
    ) -> PyResult<Self> {
        let mut b = RhsGeometry::builder(rows, cols, carrier_frequency).feed_count(feeds);
        if let Some(s) = spacing_wavelengths {
            b = b.spacing_wavelengths(s);
        }
        if let Some(n) = waveguide_index {
            b = b.waveguide_index(n);
        }
        if let Some(a) = attenuation {
            b = b.attenuation(a);
        }
        Ok(Self { inner: b.build().or_py()? })
    }

    #[getter]
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    #[getter]
    fn cols(&self) -> usize {
        self.inner.cols()
    }

    #[getter]
    fn element_count(&self) -> usize {
        self.inner.element_count()
    }

    #[getter]
    fn feed_count(&self) -> usize {
        self.inner.feed_count()
    }

    #[getter]
    fn feed_positions(&self) -> Vec<(f64, f64)> {
        self.inner.feed_positions().iter().map(|p| (p[0], p[1])).collect()
    }

    /// `(dx, dy)` in meters.
    #[getter]
    fn spacing(&self) -> (f64, f64) {
        self.inner.spacing()
    }

    #[getter]
    fn wavelength(&self) -> f64 {
        self.inner.wavelength()
    }

    #[getter]
    fn wavenumber(&self) -> f64 {
        self.inner.free_space_wavenumber()
    }

    #[getter]
    fn waveguide_index(&self) -> f64 {
        self.inner.waveguide_index()
    }

    #[getter]
    fn attenuation(&self) -> f64 {
        self.inner.attenuation()
    }

    fn element_position(&self, m: usize, n: usize) -> PyResult<(f64, f64)> {
        let p = self.inner.element_position(m, n).or_py()?;
        Ok((p[0], p[1]))
    }

    fn __repr__(&self) -> String {
        format!(
            "Geometry(rows={}, cols={}, feeds={}, carrier_frequency={})",
            self.inner.rows(),
            self.inner.cols(),
            self.inner.feed_count(),
            self.inner.carrier_frequency()
        )
    }
}

/// Single-beam amplitude of element `(m, n)` for one feed.
#[pyfunction]
fn holographic_amplitude(
    geometry: &PyGeometry,
    feed: usize,
    m: usize,
    n: usize,
    theta_deg: f64,
    phi_deg: f64,
) -> PyResult<f64> {
    let dir = Direction::from_degrees(theta_deg, phi_deg).or_py()?;
    holography::holographic_amplitude(&geometry.inner, feed, m, n, dir).or_py()
}

/// Multibeam amplitude map toward signed principal-plane angles. Without
/// `feed` the maps of all feeds are averaged.
#[pyfunction]
#[pyo3(signature = (geometry, beams_deg, weights = None, feed = None))]
fn multibeam_pattern(
    geometry: &PyGeometry,
    beams_deg: Vec<f64>,
    weights: Option<Vec<f64>>,
    feed: Option<usize>,
) -> PyResult<Vec<f64>> {
    let g = &geometry.inner;
    let weights = weights.unwrap_or_else(|| vec![1.0; beams_deg.len()]);
    if weights.len() != beams_deg.len() {
        return Err(PyValueError::new_err("weights and beams_deg differ in length"));
    }
    let beams = beams_deg
        .iter()
        .zip(&weights)
        .map(|(&deg, &w)| Ok((Direction::in_principal_plane(g, deg)?, w)))
        .collect::<rhs_core::Result<Vec<_>>>()
        .or_py()?;
    let amps = match feed {
        Some(k) => holography::multibeam_pattern(g, k, &beams),
        None => holography::multifeed_multibeam_pattern(g, &beams),
    }
    .or_py()?;
    Ok(amps.into_inner())
}

/// Element field weights after binary PIN quantization.
#[pyfunction]
#[pyo3(signature = (amplitudes, threshold = 0.5, mode = "ideal"))]
fn quantize_pin(amplitudes: Vec<f64>, threshold: f64, mode: &str) -> PyResult<Vec<f64>> {
    let amps = HolographicAmplitudes::new(amplitudes).or_py()?;
    let state = holography::quantize_pin(&amps, threshold, parse_pin_mode(mode)?).or_py()?;
    Ok(state.weights())
}

/// Principal-plane cut: returns `(angles_deg, gains_db, lobes)` where lobes
/// are `(angle_deg, gain_db)` local maxima, strongest first.
#[pyfunction]
#[pyo3(signature = (geometry, weights, step_deg = 0.1, excitations = None))]
#[allow(clippy::type_complexity)]
fn radiation_pattern(
    geometry: &PyGeometry,
    weights: Vec<f64>,
    step_deg: f64,
    excitations: Option<Vec<Complex64>>,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<(f64, f64)>)> {
    let g = &geometry.inner;
    let excitations = excitations.unwrap_or_else(|| vec![Complex64::new(1.0, 0.0); g.feed_count()]);
    let grid = holography::principal_plane_grid(g, -90.0, 90.0, step_deg).or_py()?;
    let pattern = holography::radiation_pattern(g, &weights, &excitations, &grid).or_py()?;
    let angles = pattern.grid().iter().map(|d| d.signed_degrees(g)).collect();
    let lobes = holography::local_maxima(&pattern)
        .iter()
        .map(|l| (l.direction.signed_degrees(g), l.gain_db))
        .collect();
    Ok((angles, pattern.gains_db().to_vec(), lobes))
}

/// User-by-element downlink channel.
#[pyclass(name = "Channel", module = "rhs_py", frozen)]
pub struct PyChannel {
    inner: ChannelMatrix,
}

#[pymethods]
impl PyChannel {
    /// Wraps explicit entries, one row per user.
    #[new]
    fn new(entries: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let users = entries.len();
        let elements = entries.first().map_or(0, Vec::len);
        if entries.iter().any(|r| r.len() != elements) {
            return Err(PyValueError::new_err("channel rows differ in length"));
        }
        let m = DMatrix::from_fn(users, elements, |l, e| entries[l][e]);
        Ok(Self {
            inner: ChannelMatrix::from_entries(m).or_py()?,
        })
    }

    /// Seeded Rician draw; `trial` selects an independent stream.
    #[staticmethod]
    #[pyo3(signature = (geometry, num_users = 3, seed = 42, trial = 0, rician_factor_db = 10.0, path_count = 3, pathloss_exponent = 2.7))]
    fn generate(
        geometry: &PyGeometry,
        num_users: usize,
        seed: u64,
        trial: u64,
        rician_factor_db: f64,
        path_count: usize,
        pathloss_exponent: f64,
    ) -> PyResult<Self> {
        let cfg = ChannelConfig {
            num_users,
            seed,
            rician_factor_db,
            path_count,
            pathloss_exponent,
            ..ChannelConfig::default()
        };
        let mut rng = channel::trial_rng(seed, trial);
        let inner = channel::generate_channel_with_rng(&geometry.inner, &cfg, &mut rng).or_py()?;
        Ok(Self { inner })
    }

    #[getter]
    fn num_users(&self) -> usize {
        self.inner.num_users()
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.num_elements()
    }

    #[getter]
    fn entries(&self) -> Vec<Vec<Complex64>> {
        let h = self.inner.entries();
        (0..h.nrows())
            .map(|l| h.row(l).iter().copied().collect())
            .collect()
    }

    #[getter]
    fn pathloss(&self) -> Vec<f64> {
        self.inner.pathloss().to_vec()
    }

    /// Line-of-sight `(theta_deg, phi_deg)` per user; empty for loaded channels.
    #[getter]
    fn los_directions(&self) -> Vec<(f64, f64)> {
        self.inner
            .los_directions()
            .iter()
            .map(|d| (d.theta().to_degrees(), d.phi().to_degrees()))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Channel(users={}, elements={})",
            self.inner.num_users(),
            self.inner.num_elements()
        )
    }
}

/// Outcome of a baseline or optimizer run.
#[pyclass(name = "Report", module = "rhs_py", frozen, get_all)]
pub struct PyReport {
    final_rate: f64,
    initial_rate: f64,
    rate_trajectory: Vec<f64>,
    amplitudes: Vec<f64>,
    beamformer: Vec<Vec<Complex64>>,
    iterations: usize,
    converged: bool,
    termination: &'static str,
    user_sinr: Vec<f64>,
    radiated_power: f64,
}

impl From<OptimizationReport> for PyReport {
    fn from(r: OptimizationReport) -> Self {
        let v = r.final_beamformer.matrix();
        Self {
            final_rate: r.final_rate(),
            initial_rate: r.initial_rate(),
            beamformer: (0..v.nrows()).map(|k| v.row(k).iter().copied().collect()).collect(),
            iterations: r.iterations_used,
            converged: r.converged,
            termination: termination_name(r.termination),
            radiated_power: r.radiated_power,
            user_sinr: r.user_sinr,
            amplitudes: r.final_amplitudes.into_inner(),
            rate_trajectory: r.rate_trajectory,
        }
    }
}

#[pymethods]
impl PyReport {
    fn __repr__(&self) -> String {
        format!(
            "Report(final_rate={:.6}, iterations={}, termination={:?})",
            self.final_rate, self.iterations, self.termination
        )
    }
}

fn model(
    channel: &PyChannel,
    geometry: &PyGeometry,
    transmit_power: f64,
    noise_power: f64,
    allocation: &str,
) -> PyResult<SumRateModel> {
    let budget = LinkBudget::new(transmit_power, noise_power).or_py()?;
    SumRateModel::new(&channel.inner, &geometry.inner, budget, parse_allocation(allocation)?).or_py()
}

/// Superposition hologram followed by zero forcing.
#[pyfunction]
#[pyo3(signature = (channel, geometry, transmit_power = 0.5, noise_power = 0.01, allocation = "equal"))]
fn baseline(
    py: Python<'_>,
    channel: &PyChannel,
    geometry: &PyGeometry,
    transmit_power: f64,
    noise_power: f64,
    allocation: &str,
) -> PyResult<PyReport> {
    let budget = LinkBudget::new(transmit_power, noise_power).or_py()?;
    let alloc = parse_allocation(allocation)?;
    let (h, g) = (&channel.inner, &geometry.inner);
    let rep = py.detach(|| optimizer::baseline_superposition(h, g, budget, alloc)).or_py()?;
    Ok(rep.into())
}

/// Alternating hologram and zero-forcing optimization. `initial` overrides
/// the warm start given by `init` ("superposition" or "uniform_half").
#[pyfunction]
#[pyo3(signature = (channel, geometry, transmit_power = 0.5, noise_power = 0.01, allocation = "equal", max_iterations = 100, rate_tolerance = 1e-3, init = "superposition", initial = None))]
#[allow(clippy::too_many_arguments)]
fn optimize(
    py: Python<'_>,
    channel: &PyChannel,
    geometry: &PyGeometry,
    transmit_power: f64,
    noise_power: f64,
    allocation: &str,
    max_iterations: usize,
    rate_tolerance: f64,
    init: &str,
    initial: Option<Vec<f64>>,
) -> PyResult<PyReport> {
    let budget = LinkBudget::new(transmit_power, noise_power).or_py()?;
    let init_mode = match init {
        "superposition" => InitMode::Superposition,
        "uniform_half" => InitMode::UniformHalf,
        _ => {
            return Err(PyValueError::new_err(format!(
                "init must be 'superposition' or 'uniform_half', got {init:?}"
            )))
        }
    };
    let cfg = OptimizerConfig {
        max_outer_iterations: max_iterations,
        rate_tolerance,
        init_mode,
        allocation: parse_allocation(allocation)?,
        ..OptimizerConfig::default()
    };
    let initial = initial.map(HolographicAmplitudes::new).transpose().or_py()?;
    let (h, g) = (&channel.inner, &geometry.inner);
    let rep = py
        .detach(|| match initial {
            Some(a) => optimizer::optimize_from(h, g, budget, &cfg, a),
            None => optimizer::optimize(h, g, budget, &cfg),
        })
        .or_py()?;
    Ok(rep.into())
}

/// Zero-forcing sum rate and per-user SINR for a fixed amplitude map.
#[pyfunction]
#[pyo3(signature = (channel, geometry, amplitudes, transmit_power = 0.5, noise_power = 0.01, allocation = "equal"))]
fn zf_rate(
    channel: &PyChannel,
    geometry: &PyGeometry,
    amplitudes: Vec<f64>,
    transmit_power: f64,
    noise_power: f64,
    allocation: &str,
) -> PyResult<(f64, Vec<f64>)> {
    let model = model(channel, geometry, transmit_power, noise_power, allocation)?;
    let amps = HolographicAmplitudes::new(amplitudes).or_py()?;
    let (v, rate) = model.zf_rate(&amps).or_py()?;
    Ok((rate, model.sinr(&amps, &v).or_py()?))
}

/// Exhaustive search over per-element amplitude levels. Only for tiny surfaces.
#[pyfunction]
#[pyo3(signature = (channel, geometry, levels, transmit_power = 0.5, noise_power = 0.01))]
fn grid_search(
    py: Python<'_>,
    channel: &PyChannel,
    geometry: &PyGeometry,
    levels: Vec<f64>,
    transmit_power: f64,
    noise_power: f64,
) -> PyResult<(Vec<f64>, f64)> {
    let model = model(channel, geometry, transmit_power, noise_power, "equal")?;
    let (amps, rate) = py.detach(|| model.grid_search(&levels)).or_py()?;
    Ok((amps.into_inner(), rate))
}

/// `Σ log2(1 + sinr)`.
#[pyfunction]
fn sum_rate(sinrs: Vec<f64>) -> PyResult<f64> {
    beamforming::sum_rate(&sinrs).or_py()
}

/// Adds every class and function to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGeometry>()?;
    m.add_class::<PyChannel>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(holographic_amplitude, m)?)?;
    m.add_function(wrap_pyfunction!(multibeam_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(quantize_pin, m)?)?;
    m.add_function(wrap_pyfunction!(radiation_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(baseline, m)?)?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(zf_rate, m)?)?;
    m.add_function(wrap_pyfunction!(grid_search, m)?)?;
    m.add_function(wrap_pyfunction!(sum_rate, m)?)?;
    Ok(())
}

#[pymodule]
fn rhs_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}
