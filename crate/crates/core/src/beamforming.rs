//! Hybrid transmit chain: holographic stage, zero-forcing digital stage and
//! rate evaluation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelMatrix;
use crate::error::{Result, RhsError};
use crate::geometry::RhsGeometry;
use crate::holography::HolographicAmplitudes;

/// Effective channels with a larger 2-norm condition number are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    transmit_power: f64,
    noise_power: f64,
}

impl LinkBudget {
    pub fn new(transmit_power: f64, noise_power: f64) -> Result<Self> {
        if !(transmit_power.is_finite() && transmit_power > 0.0) {
            return Err(RhsError::invalid("transmit power must be > 0"));
        }
        if !(noise_power.is_finite() && noise_power > 0.0) {
            return Err(RhsError::invalid("noise power must be > 0"));
        }
        Ok(Self {
            transmit_power,
            noise_power,
        })
    }

    pub fn transmit_power(&self) -> f64 {
        self.transmit_power
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerAllocation {
    #[default]
    Equal,
    Waterfilling,
}

/// `MN × K` response of the surface, `Q[e,k] = m_e·a_ke·exp(−j·ψ_ref(k,e))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolographicResponse {
    q: DMatrix<Complex64>,
}

impl HolographicResponse {
    pub(crate) fn from_matrix(q: DMatrix<Complex64>) -> Self {
        Self { q }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.q
    }
}

pub fn holographic_response(
    geometry: &RhsGeometry,
    amps: &HolographicAmplitudes,
) -> Result<HolographicResponse> {
    if amps.len() != geometry.element_count() {
        return Err(RhsError::dims(format!(
            "{} amplitudes for {} elements",
            amps.len(),
            geometry.element_count()
        )));
    }
    Ok(HolographicResponse {
        q: scale_rows(&guided_matrix(geometry), amps.values()),
    })
}

/// The unit-amplitude response `G` (`Q = diag(m)·G`).
pub(crate) fn guided_matrix(geometry: &RhsGeometry) -> DMatrix<Complex64> {
    let g = geometry.guided_excitation();
    DMatrix::from_fn(geometry.element_count(), geometry.feed_count(), |e, k| g[e][k])
}

fn scale_rows(g: &DMatrix<Complex64>, m: &[f64]) -> DMatrix<Complex64> {
    let mut q = g.clone();
    for (e, &v) in m.iter().enumerate() {
        q.row_mut(e).scale_mut(v);
    }
    q
}

/// `H_eff = H·Q`, an `L × K` matrix.
pub fn effective_channel(h: &ChannelMatrix, q: &HolographicResponse) -> Result<DMatrix<Complex64>> {
    if h.num_elements() != q.q.nrows() {
        return Err(RhsError::dims(format!(
            "channel has {} elements, response has {}",
            h.num_elements(),
            q.q.nrows()
        )));
    }
    Ok(h.entries() * &q.q)
}

/// `K × L` digital precoder; column `l` carries stream `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalBeamformer {
    v: DMatrix<Complex64>,
}

impl DigitalBeamformer {
    pub fn new(v: DMatrix<Complex64>) -> Self {
        Self { v }
    }

    pub fn zeros(feeds: usize, users: usize) -> Self {
        Self {
            v: DMatrix::zeros(feeds, users),
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    /// `trace(V·Vᴴ)`.
    pub fn power(&self) -> f64 {
        self.v.norm_squared()
    }

    /// Per-stream transmit power `‖v_l‖²`.
    pub fn stream_powers(&self) -> Vec<f64> {
        self.v.column_iter().map(|c| c.norm_squared()).collect()
    }
}

/// Ratio of extreme singular values; infinite for rank-deficient input.
pub fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min > 0.0 && min.is_finite() {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Zero-forcing precoder `V₀ = H_effᴴ(H_eff·H_effᴴ)⁻¹` with columns rescaled
/// to the chosen power split of `P_T`.
pub fn zf_digital(
    h_eff: &DMatrix<Complex64>,
    budget: &LinkBudget,
    allocation: PowerAllocation,
) -> Result<DigitalBeamformer> {
    let (users, feeds) = h_eff.shape();
    if users == 0 || feeds == 0 {
        return Err(RhsError::invalid("effective channel is empty"));
    }
    if users > feeds {
        return Err(RhsError::dims(format!(
            "{users} users exceed {feeds} feeds; zero-forcing needs L ≤ K"
        )));
    }
    let condition = condition_number(h_eff);
    if !(condition < CONDITION_LIMIT) {
        return Err(RhsError::SingularChannel { condition });
    }
    let gram = h_eff * h_eff.adjoint();
    let inv = gram
        .try_inverse()
        .ok_or(RhsError::SingularChannel { condition })?;
    let v0 = h_eff.adjoint() * inv;
    let norms: Vec<f64> = v0.column_iter().map(|c| c.norm_squared()).collect();
    let powers = match allocation {
        PowerAllocation::Equal => vec![budget.transmit_power / users as f64; users],
        PowerAllocation::Waterfilling => waterfill(&norms, budget),
    };
    let mut v = v0;
    for (l, mut col) in v.column_iter_mut().enumerate() {
        col.scale_mut((powers[l] / norms[l]).sqrt());
    }
    Ok(DigitalBeamformer { v })
}

/// Stream powers `max(0, μ − σ²‖v₀_l‖²)` summing to `P_T`, with the water
/// level found by bisection.
fn waterfill(norms: &[f64], budget: &LinkBudget) -> Vec<f64> {
    let floors: Vec<f64> = norms.iter().map(|n| budget.noise_power * n).collect();
    let alloc = |mu: f64| -> Vec<f64> { floors.iter().map(|f| (mu - f).max(0.0)).collect() };
    let mut lo = 0.0;
    let mut hi = budget.transmit_power + floors.iter().cloned().fold(0.0, f64::max);
    let tol = 1e-12 * hi.max(1e-300);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if alloc(mid).iter().sum::<f64>() > budget.transmit_power {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut p = alloc(0.5 * (lo + hi));
    // Remove the residual bisection error so the budget holds to rounding.
    let total: f64 = p.iter().sum();
    if total > 0.0 {
        p.iter_mut().for_each(|x| *x *= budget.transmit_power / total);
    }
    p
}

/// Received amplitudes `S = H·Q·V`; `S[l,j]` is stream `j` at user `l`.
pub fn received_matrix(
    h: &ChannelMatrix,
    q: &HolographicResponse,
    v: &DigitalBeamformer,
) -> Result<DMatrix<Complex64>> {
    let h_eff = effective_channel(h, q)?;
    if h_eff.ncols() != v.v.nrows() || v.v.ncols() != h.num_users() {
        return Err(RhsError::dims(format!(
            "beamformer is {}×{}, expected {}×{}",
            v.v.nrows(),
            v.v.ncols(),
            h_eff.ncols(),
            h.num_users()
        )));
    }
    Ok(h_eff * &v.v)
}

pub fn user_sinr(
    h: &ChannelMatrix,
    q: &HolographicResponse,
    v: &DigitalBeamformer,
    budget: &LinkBudget,
) -> Result<Vec<f64>> {
    Ok(sinr_from_received(&received_matrix(h, q, v)?, budget.noise_power))
}

pub(crate) fn sinr_from_received(s: &DMatrix<Complex64>, noise: f64) -> Vec<f64> {
    (0..s.nrows())
        .map(|l| {
            let signal = s[(l, l)].norm_sqr();
            let interference: f64 = (0..s.ncols())
                .filter(|&j| j != l)
                .map(|j| s[(l, j)].norm_sqr())
                .sum();
            signal / (interference + noise)
        })
        .collect()
}

/// `Σ log2(1 + SINR_l)` in bits/s/Hz.
pub fn sum_rate(sinrs: &[f64]) -> Result<f64> {
    if let Some(bad) = sinrs.iter().find(|s| !(**s >= 0.0)) {
        return Err(RhsError::invalid(format!("SINR {bad} is negative or NaN")));
    }
    Ok(sinrs.iter().map(|s| s.ln_1p()).sum::<f64>() / std::f64::consts::LN_2)
}

/// Power leaving the surface, `‖Q·V‖_F²`.
pub fn radiated_power(q: &HolographicResponse, v: &DigitalBeamformer) -> f64 {
    (&q.q * &v.v).norm_squared()
}
