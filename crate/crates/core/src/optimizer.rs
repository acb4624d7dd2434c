//! Sum-rate maximization over holographic amplitudes.
//!
//! Alternates a zero-forcing digital stage with a fractional-programming
//! block update of the amplitudes. The FP surrogate, in nats scaled to bits,
//! is
//!
//! ```text
//! f = (1/ln2)·Σ_l [ln(1+γ_l) − γ_l + 2√(1+γ_l)·Re(y_l*·s_ll) − |y_l|²·(I_l + σ²)]
//! ```
//!
//! with `S = H·diag(m)·G·V` and `I_l = Σ_j |s_lj|²`. It equals the sum rate
//! at `γ_l = SINR_l`, `y_l = √(1+γ_l)·s_ll/(I_l + σ²)` and is a concave
//! quadratic in each amplitude.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::beamforming::{
    guided_matrix, radiated_power, sinr_from_received, sum_rate, zf_digital, DigitalBeamformer,
    HolographicResponse, LinkBudget, PowerAllocation,
};
use crate::channel::ChannelMatrix;
use crate::error::{Result, RhsError};
use crate::geometry::RhsGeometry;
use crate::holography::{multifeed_multibeam_pattern, HolographicAmplitudes};

/// Longest line-search step is `2^MAX_STEP_DOUBLINGS`.
const MAX_STEP_DOUBLINGS: u32 = 10;
/// Shortest line-search step is `2^-MAX_STEP_HALVINGS`.
const MAX_STEP_HALVINGS: u32 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct FpAuxiliaries {
    gamma: Vec<f64>,
    y: Vec<Complex64>,
}

impl FpAuxiliaries {
    pub fn new(gamma: Vec<f64>, y: Vec<Complex64>) -> Result<Self> {
        if gamma.len() != y.len() {
            return Err(RhsError::dims(format!(
                "{} γ values but {} y values",
                gamma.len(),
                y.len()
            )));
        }
        if gamma.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(RhsError::invalid("γ must be finite and ≥ 0"));
        }
        Ok(Self { gamma, y })
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn y(&self) -> &[Complex64] {
        &self.y
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    #[default]
    Superposition,
    UniformHalf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_outer_iterations: usize,
    /// Stop once the sum rate moves by less than this (bits/s/Hz).
    pub rate_tolerance: f64,
    pub coordinate_passes: usize,
    pub init_mode: InitMode,
    pub allocation: PowerAllocation,
    /// Only accept amplitude updates that raise the true sum rate.
    pub safeguard: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_outer_iterations: 100,
            rate_tolerance: 1e-3,
            coordinate_passes: 1,
            init_mode: InitMode::Superposition,
            allocation: PowerAllocation::Equal,
            safeguard: true,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_outer_iterations == 0 || self.coordinate_passes == 0 {
            return Err(RhsError::invalid("iteration and pass counts must be ≥ 1"));
        }
        if !(self.rate_tolerance > 0.0 && self.rate_tolerance.is_finite()) {
            return Err(RhsError::invalid("rate_tolerance must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Rate change fell below the tolerance.
    Threshold,
    /// No amplitude update raised the rate; counted as a zero rate change.
    NoImprovement,
    MaxIterations,
    /// An unguarded update made the effective channel singular.
    SingularIterate,
    /// Non-iterative result.
    SinglePass,
}

#[derive(Debug, Clone)]
pub struct OptimizationReport {
    /// Sum rate of the initial point followed by one entry per accepted update.
    pub rate_trajectory: Vec<f64>,
    pub final_amplitudes: HolographicAmplitudes,
    pub final_beamformer: DigitalBeamformer,
    pub iterations_used: usize,
    pub converged: bool,
    pub termination: Termination,
    pub user_sinr: Vec<f64>,
    /// `‖Q·V‖_F²`.
    pub radiated_power: f64,
}

impl OptimizationReport {
    pub fn final_rate(&self) -> f64 {
        *self.rate_trajectory.last().expect("trajectory is never empty")
    }

    pub fn initial_rate(&self) -> f64 {
        self.rate_trajectory[0]
    }
}

/// Channel, surface and budget bundled for repeated rate evaluations.
#[derive(Debug, Clone)]
pub struct SumRateModel {
    h: DMatrix<Complex64>,
    g: DMatrix<Complex64>,
    budget: LinkBudget,
    allocation: PowerAllocation,
    /// `H[:,e]·G[e,:]`, so `H_eff = Σ_e m_e·outer[e]`.
    outer: Vec<DMatrix<Complex64>>,
}

impl SumRateModel {
    pub fn new(
        h: &ChannelMatrix,
        geometry: &RhsGeometry,
        budget: LinkBudget,
        allocation: PowerAllocation,
    ) -> Result<Self> {
        if h.num_elements() != geometry.element_count() {
            return Err(RhsError::dims(format!(
                "channel has {} elements, surface has {}",
                h.num_elements(),
                geometry.element_count()
            )));
        }
        if h.num_users() > geometry.feed_count() {
            return Err(RhsError::dims(format!(
                "{} users exceed {} feeds",
                h.num_users(),
                geometry.feed_count()
            )));
        }
        let h = h.entries().clone();
        let g = guided_matrix(geometry);
        let outer = (0..g.nrows())
            .map(|e| h.column(e) * g.row(e))
            .collect();
        Ok(Self {
            h,
            g,
            budget,
            allocation,
            outer,
        })
    }

    pub fn num_users(&self) -> usize {
        self.h.nrows()
    }

    pub fn num_elements(&self) -> usize {
        self.h.ncols()
    }

    pub fn num_feeds(&self) -> usize {
        self.g.ncols()
    }

    pub fn budget(&self) -> &LinkBudget {
        &self.budget
    }

    fn check_amps(&self, amps: &[f64]) -> Result<()> {
        if amps.len() != self.num_elements() {
            return Err(RhsError::dims(format!(
                "{} amplitudes for {} elements",
                amps.len(),
                self.num_elements()
            )));
        }
        Ok(())
    }

    fn check_v(&self, v: &DigitalBeamformer) -> Result<()> {
        let (k, l) = v.matrix().shape();
        if k != self.num_feeds() || l != self.num_users() {
            return Err(RhsError::dims(format!(
                "beamformer is {k}×{l}, expected {}×{}",
                self.num_feeds(),
                self.num_users()
            )));
        }
        Ok(())
    }

    pub fn response(&self, amps: &HolographicAmplitudes) -> Result<HolographicResponse> {
        self.check_amps(amps.values())?;
        let mut q = self.g.clone();
        for (e, &m) in amps.values().iter().enumerate() {
            q.row_mut(e).scale_mut(m);
        }
        Ok(HolographicResponse::from_matrix(q))
    }

    pub fn effective_channel(&self, amps: &HolographicAmplitudes) -> Result<DMatrix<Complex64>> {
        self.check_amps(amps.values())?;
        Ok(self.heff(amps.values()))
    }

    fn heff(&self, amps: &[f64]) -> DMatrix<Complex64> {
        let mut acc = DMatrix::zeros(self.num_users(), self.num_feeds());
        for (o, &m) in self.outer.iter().zip(amps) {
            if m != 0.0 {
                acc += o * Complex64::new(m, 0.0);
            }
        }
        acc
    }

    pub fn zf(&self, amps: &HolographicAmplitudes) -> Result<DigitalBeamformer> {
        zf_digital(&self.effective_channel(amps)?, &self.budget, self.allocation)
    }

    pub fn sinr(&self, amps: &HolographicAmplitudes, v: &DigitalBeamformer) -> Result<Vec<f64>> {
        self.check_amps(amps.values())?;
        self.check_v(v)?;
        Ok(sinr_from_received(
            &(self.heff(amps.values()) * v.matrix()),
            self.budget.noise_power(),
        ))
    }

    pub fn rate(&self, amps: &HolographicAmplitudes, v: &DigitalBeamformer) -> Result<f64> {
        sum_rate(&self.sinr(amps, v)?)
    }

    /// Zero-forcing precoder for `amps` and the resulting sum rate.
    pub fn zf_rate(&self, amps: &HolographicAmplitudes) -> Result<(DigitalBeamformer, f64)> {
        self.check_amps(amps.values())?;
        self.zf_rate_heff(&self.heff(amps.values()))
    }

    fn zf_rate_heff(&self, heff: &DMatrix<Complex64>) -> Result<(DigitalBeamformer, f64)> {
        let v = zf_digital(heff, &self.budget, self.allocation)?;
        let r = sum_rate(&sinr_from_received(
            &(heff * v.matrix()),
            self.budget.noise_power(),
        ))?;
        Ok((v, r))
    }

    /// Per-element received contributions `c[e][l·L + j] = H[l,e]·(G·V)[e,j]`.
    fn contributions(&self, v: &DigitalBeamformer) -> Vec<Vec<Complex64>> {
        let gv = &self.g * v.matrix();
        let users = self.num_users();
        (0..self.num_elements())
            .map(|e| {
                let mut c = Vec::with_capacity(users * users);
                for l in 0..users {
                    for j in 0..users {
                        c.push(self.h[(l, e)] * gv[(e, j)]);
                    }
                }
                c
            })
            .collect()
    }

    fn received_flat(&self, amps: &[f64], c: &[Vec<Complex64>]) -> Vec<Complex64> {
        let mut s = vec![Complex64::new(0.0, 0.0); self.num_users() * self.num_users()];
        for (ce, &m) in c.iter().zip(amps) {
            for (si, ci) in s.iter_mut().zip(ce) {
                *si += ci * m;
            }
        }
        s
    }

    fn check_aux(&self, aux: &FpAuxiliaries) -> Result<()> {
        if aux.gamma.len() != self.num_users() {
            return Err(RhsError::dims(format!(
                "auxiliaries for {} users, model has {}",
                aux.gamma.len(),
                self.num_users()
            )));
        }
        Ok(())
    }

    pub fn update_auxiliaries(
        &self,
        amps: &HolographicAmplitudes,
        v: &DigitalBeamformer,
    ) -> Result<FpAuxiliaries> {
        self.check_amps(amps.values())?;
        self.check_v(v)?;
        let s = self.heff(amps.values()) * v.matrix();
        let noise = self.budget.noise_power();
        let users = self.num_users();
        let mut gamma = Vec::with_capacity(users);
        let mut y = Vec::with_capacity(users);
        for l in 0..users {
            let total: f64 = s.row(l).iter().map(|z| z.norm_sqr()).sum::<f64>() + noise;
            let signal = s[(l, l)].norm_sqr();
            let g = signal / (total - signal);
            y.push(s[(l, l)] * ((1.0 + g).sqrt() / total));
            gamma.push(g);
        }
        Ok(FpAuxiliaries { gamma, y })
    }

    pub fn surrogate_value(
        &self,
        amps: &HolographicAmplitudes,
        v: &DigitalBeamformer,
        aux: &FpAuxiliaries,
    ) -> Result<f64> {
        self.check_amps(amps.values())?;
        self.check_v(v)?;
        self.check_aux(aux)?;
        let s = self.heff(amps.values()) * v.matrix();
        let noise = self.budget.noise_power();
        let mut f = 0.0;
        for l in 0..self.num_users() {
            let (g, y) = (aux.gamma[l], aux.y[l]);
            let total: f64 = s.row(l).iter().map(|z| z.norm_sqr()).sum::<f64>() + noise;
            f += g.ln_1p() - g + 2.0 * (1.0 + g).sqrt() * (y.conj() * s[(l, l)]).re
                - y.norm_sqr() * total;
        }
        Ok(f / LN_2)
    }

    /// `∂f/∂m_e` for every element at fixed `V` and auxiliaries.
    pub fn surrogate_gradient(
        &self,
        amps: &HolographicAmplitudes,
        v: &DigitalBeamformer,
        aux: &FpAuxiliaries,
    ) -> Result<Vec<f64>> {
        self.check_amps(amps.values())?;
        self.check_v(v)?;
        self.check_aux(aux)?;
        let c = self.contributions(v);
        let s = self.received_flat(amps.values(), &c);
        Ok(c.iter()
            .zip(amps.values())
            .map(|(ce, &m)| {
                let (a, b) = self.quadratic_coefficients(ce, &s, m, aux);
                (a - 2.0 * b * m) / LN_2
            })
            .collect())
    }

    /// `(A, B)` such that, as a function of `m_e` alone, `ln2·f = const + A·m_e − B·m_e²`.
    fn quadratic_coefficients(
        &self,
        ce: &[Complex64],
        s: &[Complex64],
        m: f64,
        aux: &FpAuxiliaries,
    ) -> (f64, f64) {
        let users = self.num_users();
        let (mut a, mut b) = (0.0, 0.0);
        for l in 0..users {
            let y2 = aux.y[l].norm_sqr();
            a += 2.0 * (1.0 + aux.gamma[l]).sqrt() * (aux.y[l].conj() * ce[l * users + l]).re;
            let mut cross = 0.0;
            let mut energy = 0.0;
            for j in 0..users {
                let cj = ce[l * users + j];
                let rest = s[l * users + j] - cj * m;
                cross += 2.0 * (rest.conj() * cj).re;
                energy += cj.norm_sqr();
            }
            a -= y2 * cross;
            b += y2 * energy;
        }
        (a, b)
    }

    fn vertex(a: f64, b: f64, current: f64) -> f64 {
        if b > 0.0 {
            (a / (2.0 * b)).clamp(0.0, 1.0)
        } else if a > 0.0 {
            1.0
        } else if a < 0.0 {
            0.0
        } else {
            current
        }
    }

    /// Surrogate maximizer over the single amplitude `element`, others fixed.
    pub fn coordinate_update(
        &self,
        amps: &HolographicAmplitudes,
        v: &DigitalBeamformer,
        aux: &FpAuxiliaries,
        element: usize,
    ) -> Result<f64> {
        if element >= self.num_elements() {
            return Err(RhsError::InvalidIndex {
                what: "element",
                index: element,
                limit: self.num_elements(),
            });
        }
        self.check_amps(amps.values())?;
        self.check_v(v)?;
        self.check_aux(aux)?;
        let c = self.contributions(v);
        let s = self.received_flat(amps.values(), &c);
        let m = amps.values()[element];
        let (a, b) = self.quadratic_coefficients(&c[element], &s, m, aux);
        Ok(Self::vertex(a, b, m))
    }

    /// Row-major coordinate ascent on the surrogate, `passes` sweeps.
    pub fn holographic_update(
        &self,
        amps: &HolographicAmplitudes,
        v: &DigitalBeamformer,
        aux: &FpAuxiliaries,
        passes: usize,
    ) -> Result<HolographicAmplitudes> {
        self.check_amps(amps.values())?;
        self.check_v(v)?;
        self.check_aux(aux)?;
        let c = self.contributions(v);
        let mut m = amps.values().to_vec();
        let mut s = self.received_flat(&m, &c);
        for _ in 0..passes {
            for (e, ce) in c.iter().enumerate() {
                let (a, b) = self.quadratic_coefficients(ce, &s, m[e], aux);
                let new = Self::vertex(a, b, m[e]);
                let delta = new - m[e];
                if delta != 0.0 {
                    for (si, ci) in s.iter_mut().zip(ce) {
                        *si += ci * delta;
                    }
                    m[e] = new;
                }
            }
        }
        HolographicAmplitudes::new(m)
    }

    fn report(
        &self,
        amps: HolographicAmplitudes,
        v: DigitalBeamformer,
        rate_trajectory: Vec<f64>,
        iterations_used: usize,
        termination: Termination,
    ) -> Result<OptimizationReport> {
        let user_sinr = self.sinr(&amps, &v)?;
        let radiated_power = radiated_power(&self.response(&amps)?, &v);
        Ok(OptimizationReport {
            rate_trajectory,
            final_amplitudes: amps,
            final_beamformer: v,
            iterations_used,
            converged: matches!(
                termination,
                Termination::Threshold | Termination::NoImprovement
            ),
            termination,
            user_sinr,
            radiated_power,
        })
    }

    /// Alternating optimization from the given starting amplitudes.
    pub fn optimize_from(
        &self,
        initial: HolographicAmplitudes,
        cfg: &OptimizerConfig,
    ) -> Result<OptimizationReport> {
        cfg.validate()?;
        let (v, r) = self.zf_rate(&initial)?;
        let mut state = Iterate {
            m: initial.into_inner(),
            v,
            r,
        };
        let mut trajectory = vec![state.r];
        let mut termination = Termination::MaxIterations;
        let mut iterations = 0;
        for it in 0..cfg.max_outer_iterations {
            iterations = it + 1;
            let amps = HolographicAmplitudes::new(state.m.clone())?;
            let aux = self.update_auxiliaries(&amps, &state.v)?;
            let proposal = self
                .holographic_update(&amps, &state.v, &aux, cfg.coordinate_passes)?
                .into_inner();
            let next = if cfg.safeguard {
                match self
                    .line_search(&state, &proposal)
                    .or_else(|| self.coordinate_fallback(&state, &proposal))
                {
                    Some(next) => next,
                    None => {
                        termination = Termination::NoImprovement;
                        break;
                    }
                }
            } else {
                match self.zf_rate_heff(&self.heff(&proposal)) {
                    Ok((v, r)) => Iterate { m: proposal, v, r },
                    Err(RhsError::SingularChannel { .. }) => {
                        termination = Termination::SingularIterate;
                        break;
                    }
                    Err(e) => return Err(e),
                }
            };
            let delta = next.r - state.r;
            state = next;
            trajectory.push(state.r);
            if delta.abs() < cfg.rate_tolerance {
                termination = Termination::Threshold;
                break;
            }
        }
        self.report(
            HolographicAmplitudes::new(state.m)?,
            state.v,
            trajectory,
            iterations,
            termination,
        )
    }

    fn try_point(&self, m: Vec<f64>) -> Option<Iterate> {
        let (v, r) = self.zf_rate_heff(&self.heff(&m)).ok()?;
        Some(Iterate { m, v, r })
    }

    /// Projected search along `proposal − m`: step 1, doubled while the rate
    /// keeps rising, otherwise halved until it beats the current rate.
    fn line_search(&self, state: &Iterate, proposal: &[f64]) -> Option<Iterate> {
        let point = |t: f64| -> Vec<f64> {
            state
                .m
                .iter()
                .zip(proposal)
                .map(|(m, p)| (m + t * (p - m)).clamp(0.0, 1.0))
                .collect()
        };
        let better = |it: &Option<Iterate>, r: f64| it.as_ref().is_some_and(|x| x.r > r);

        let mut t = 1.0;
        let mut best = self.try_point(point(t));
        if better(&best, state.r) {
            for _ in 0..MAX_STEP_DOUBLINGS {
                let cand = self.try_point(point(2.0 * t));
                if !better(&cand, best.as_ref().map_or(f64::MIN, |b| b.r)) {
                    break;
                }
                t *= 2.0;
                best = cand;
            }
            return best;
        }
        for _ in 0..MAX_STEP_HALVINGS {
            t *= 0.5;
            best = self.try_point(point(t));
            if better(&best, state.r) {
                return best;
            }
        }
        None
    }

    /// Greedy row-major sweep over each element's candidate values
    /// `{proposal, 0, 1}`, scored by the zero-forcing sum rate.
    fn coordinate_fallback(&self, state: &Iterate, proposal: &[f64]) -> Option<Iterate> {
        let mut m = state.m.clone();
        let mut heff = self.heff(&m);
        let mut best: Option<(DigitalBeamformer, f64)> = None;
        let mut best_rate = state.r;
        for e in 0..m.len() {
            for cand in [proposal[e], 0.0, 1.0] {
                if cand == m[e] {
                    continue;
                }
                let trial = &heff + &self.outer[e] * Complex64::new(cand - m[e], 0.0);
                if let Ok((v, r)) = self.zf_rate_heff(&trial) {
                    if r > best_rate {
                        best_rate = r;
                        best = Some((v, r));
                        heff = trial;
                        m[e] = cand;
                    }
                }
            }
        }
        best.map(|(v, r)| Iterate { m, v, r })
    }

    /// Zero-forcing evaluation of `amps` as a single-pass report.
    pub fn evaluate(&self, amps: HolographicAmplitudes) -> Result<OptimizationReport> {
        let (v, r) = self.zf_rate(&amps)?;
        self.report(amps, v, vec![r], 0, Termination::SinglePass)
    }

    /// Best point of the full grid `levels^MN`, scored by the zero-forcing sum
    /// rate. Singular points are skipped.
    pub fn grid_search(&self, levels: &[f64]) -> Result<(HolographicAmplitudes, f64)> {
        if levels.is_empty() || levels.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(RhsError::invalid("grid levels must be nonempty and in [0, 1]"));
        }
        let n = self.num_elements();
        let count = (levels.len() as f64).powi(n as i32);
        if count > 1e7 {
            return Err(RhsError::invalid(format!(
                "grid of {count:.0} points is too large"
            )));
        }
        let mut idx = vec![0usize; n];
        let mut best: Option<(Vec<f64>, f64)> = None;
        loop {
            let m: Vec<f64> = idx.iter().map(|&i| levels[i]).collect();
            if let Ok((_, r)) = self.zf_rate_heff(&self.heff(&m)) {
                if best.as_ref().is_none_or(|b| r > b.1) {
                    best = Some((m, r));
                }
            }
            // Odometer increment, last element fastest.
            let mut pos = n;
            loop {
                if pos == 0 {
                    let (m, r) = best.ok_or(RhsError::SingularChannel {
                        condition: f64::INFINITY,
                    })?;
                    return Ok((HolographicAmplitudes::new(m)?, r));
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < levels.len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }
}

struct Iterate {
    m: Vec<f64>,
    v: DigitalBeamformer,
    r: f64,
}

/// Superposition hologram: the multibeam map toward every user's dominant
/// direction, averaged over feeds.
pub fn superposition_amplitudes(
    h: &ChannelMatrix,
    geometry: &RhsGeometry,
) -> Result<HolographicAmplitudes> {
    let beams: Vec<_> = h
        .dominant_directions(geometry)?
        .into_iter()
        .map(|d| (d, 1.0))
        .collect();
    multifeed_multibeam_pattern(geometry, &beams)
}

/// Superposition hologram followed by one zero-forcing stage.
pub fn baseline_superposition(
    h: &ChannelMatrix,
    geometry: &RhsGeometry,
    budget: LinkBudget,
    allocation: PowerAllocation,
) -> Result<OptimizationReport> {
    let model = SumRateModel::new(h, geometry, budget, allocation)?;
    model.evaluate(superposition_amplitudes(h, geometry)?)
}

/// Alternating optimization with the configured warm start. A singular
/// superposition start falls back to uniform 0.5 amplitudes.
pub fn optimize(
    h: &ChannelMatrix,
    geometry: &RhsGeometry,
    budget: LinkBudget,
    cfg: &OptimizerConfig,
) -> Result<OptimizationReport> {
    cfg.validate()?;
    let model = SumRateModel::new(h, geometry, budget, cfg.allocation)?;
    let half = HolographicAmplitudes::uniform(geometry.element_count(), 0.5)?;
    let initial = match cfg.init_mode {
        InitMode::Superposition => {
            let sup = superposition_amplitudes(h, geometry)?;
            match model.zf_rate(&sup) {
                Err(RhsError::SingularChannel { .. }) => half,
                _ => sup,
            }
        }
        InitMode::UniformHalf => half,
    };
    model.optimize_from(initial, cfg)
}

/// Alternating optimization from caller-supplied amplitudes.
pub fn optimize_from(
    h: &ChannelMatrix,
    geometry: &RhsGeometry,
    budget: LinkBudget,
    cfg: &OptimizerConfig,
    initial: HolographicAmplitudes,
) -> Result<OptimizationReport> {
    SumRateModel::new(h, geometry, budget, cfg.allocation)?.optimize_from(initial, cfg)
}
