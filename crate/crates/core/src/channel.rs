//! Geometric Rician element-to-user channels.
//!
//! Row `l` of the channel matrix is
//! `√β_l·(√(κ/(1+κ))·a(dir_l) + √(1/(1+κ))·Σ_p g_p/√P·a(dir_p))`
//! with `a(·)` the surface steering vector, `g_p ~ CN(0, 1)` and a distance
//! pathloss `β_l = (d_l / d_min)^(−η)` that puts the nearest user at 1.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RhsError};
use crate::geometry::{Direction, RhsGeometry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub num_users: usize,
    /// Non-line-of-sight paths per user.
    pub path_count: usize,
    /// Rician K-factor in dB; `inf` gives pure line of sight.
    pub rician_factor_db: f64,
    pub pathloss_exponent: f64,
    /// User distances are drawn uniformly from `[min, max]` meters.
    pub user_distance_min: f64,
    pub user_distance_max: f64,
    /// Line-of-sight elevations are drawn uniformly from `[0, max]` degrees.
    pub max_user_theta_deg: f64,
    pub noise_power: f64,
    pub seed: u64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            num_users: 3,
            path_count: 3,
            rician_factor_db: 10.0,
            pathloss_exponent: 2.7,
            user_distance_min: 20.0,
            user_distance_max: 100.0,
            max_user_theta_deg: 60.0,
            noise_power: 0.01,
            seed: 42,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_users == 0 {
            return Err(RhsError::invalid("num_users must be ≥ 1"));
        }
        if self.path_count == 0 {
            return Err(RhsError::invalid("path_count must be ≥ 1"));
        }
        if self.rician_factor_db.is_nan() || self.rician_factor_db == f64::NEG_INFINITY {
            return Err(RhsError::invalid("rician_factor_db must be a number or +inf"));
        }
        if !(self.pathloss_exponent.is_finite() && self.pathloss_exponent >= 0.0) {
            return Err(RhsError::invalid("pathloss_exponent must be ≥ 0"));
        }
        if !(self.user_distance_min > 0.0
            && self.user_distance_max.is_finite()
            && self.user_distance_max >= self.user_distance_min)
        {
            return Err(RhsError::invalid(
                "user distances need 0 < user_distance_min ≤ user_distance_max",
            ));
        }
        if !(0.0..=90.0).contains(&self.max_user_theta_deg) {
            return Err(RhsError::invalid("max_user_theta_deg must lie in [0, 90]"));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(RhsError::invalid("noise_power must be > 0"));
        }
        Ok(())
    }

    /// `(√(κ/(1+κ)), √(1/(1+κ)))`.
    fn rician_weights(&self) -> (f64, f64) {
        if self.rician_factor_db == f64::INFINITY {
            return (1.0, 0.0);
        }
        let kappa = 10f64.powf(self.rician_factor_db / 10.0);
        ((kappa / (1.0 + kappa)).sqrt(), (1.0 / (1.0 + kappa)).sqrt())
    }
}

/// `L × MN` channel; row `l` is user `l`'s channel to every element.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    entries: DMatrix<Complex64>,
    los_directions: Vec<Direction>,
    pathloss: Vec<f64>,
}

impl ChannelMatrix {
    /// Wraps raw entries. Line-of-sight metadata is left empty.
    pub fn from_entries(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(RhsError::invalid("channel matrix is empty"));
        }
        if entries.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(RhsError::invalid("channel has non-finite entries"));
        }
        Ok(Self {
            entries,
            los_directions: Vec::new(),
            pathloss: Vec::new(),
        })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn num_users(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_elements(&self) -> usize {
        self.entries.ncols()
    }

    /// Line-of-sight direction per user; empty for loaded channels.
    pub fn los_directions(&self) -> &[Direction] {
        &self.los_directions
    }

    pub fn pathloss(&self) -> &[f64] {
        &self.pathloss
    }

    /// Each user's dominant arrival direction: the line-of-sight direction
    /// when known, otherwise the best match of a steering-vector scan over
    /// the front hemisphere.
    pub fn dominant_directions(&self, geometry: &RhsGeometry) -> Result<Vec<Direction>> {
        if self.num_elements() != geometry.element_count() {
            return Err(RhsError::dims(format!(
                "channel has {} elements, surface has {}",
                self.num_elements(),
                geometry.element_count()
            )));
        }
        if self.los_directions.len() == self.num_users() {
            return Ok(self.los_directions.clone());
        }
        let candidates = scan_directions(geometry)?;
        let steering: Vec<DVector<Complex64>> = candidates
            .iter()
            .map(|&d| steering_vector(geometry, d))
            .collect();
        Ok((0..self.num_users())
            .map(|l| {
                let row = self.entries.row(l).transpose();
                let mut best = (0usize, f64::MIN);
                for (i, a) in steering.iter().enumerate() {
                    let c = a.dotc(&row).norm();
                    if c > best.1 {
                        best = (i, c);
                    }
                }
                candidates[best.0]
            })
            .collect())
    }

    /// CSV with columns `user,element,re,im`, full precision.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["user", "element", "re", "im"])?;
        for l in 0..self.num_users() {
            for e in 0..self.num_elements() {
                let z = self.entries[(l, e)];
                w.write_record([
                    l.to_string(),
                    e.to_string(),
                    format!("{:e}", z.re),
                    format!("{:e}", z.im),
                ])?;
            }
        }
        w.flush().map_err(|e| RhsError::io("<csv writer>", e))?;
        Ok(())
    }

    /// Reads the format produced by [`ChannelMatrix::write_csv`]. Every
    /// `(user, element)` pair must appear exactly once.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut rows: Vec<(usize, usize, Complex64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("").trim().to_string();
            let parse_err = |what: &str, v: &str| {
                RhsError::invalid(format!("bad {what} field {v:?} in channel CSV"))
            };
            let (u, e, re, im) = (field(0), field(1), field(2), field(3));
            rows.push((
                u.parse().map_err(|_| parse_err("user", &u))?,
                e.parse().map_err(|_| parse_err("element", &e))?,
                Complex64::new(
                    re.parse().map_err(|_| parse_err("re", &re))?,
                    im.parse().map_err(|_| parse_err("im", &im))?,
                ),
            ));
        }
        let users = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let elements = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        if users * elements != rows.len() {
            return Err(RhsError::invalid(format!(
                "channel CSV has {} rows, expected {users}×{elements}",
                rows.len()
            )));
        }
        let mut seen = vec![false; users * elements];
        let mut entries = DMatrix::zeros(users, elements);
        for (u, e, z) in rows {
            if std::mem::replace(&mut seen[u * elements + e], true) {
                return Err(RhsError::invalid(format!(
                    "duplicate entry for user {u}, element {e}"
                )));
            }
            entries[(u, e)] = z;
        }
        Self::from_entries(entries)
    }
}

/// Hemisphere scan grid (0.5° in θ, 1° in φ; a single principal-plane sweep
/// for 1-D surfaces).
fn scan_directions(geometry: &RhsGeometry) -> Result<Vec<Direction>> {
    let mut out = Vec::new();
    if geometry.rows() == 1 || geometry.cols() == 1 {
        for i in 0..=360 {
            out.push(Direction::in_principal_plane(geometry, -90.0 + 0.5 * i as f64)?);
        }
    } else {
        out.push(Direction::broadside());
        for t in 1..=180 {
            for p in 0..360 {
                out.push(Direction::from_degrees(0.5 * t as f64, p as f64)?);
            }
        }
    }
    Ok(out)
}

/// Unit-modulus steering vector, entry `e = exp(+j·ψ_obj(e, dir))`.
pub fn steering_vector(geometry: &RhsGeometry, dir: Direction) -> DVector<Complex64> {
    DVector::from_iterator(
        geometry.element_count(),
        geometry
            .object_phases(dir)
            .into_iter()
            .map(|ph| Complex64::from_polar(1.0, ph)),
    )
}

/// Deterministic per-trial stream: the trial index is XOR-ed into the seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ trial)
}

/// Draws a channel from the stream seeded by `cfg.seed`.
pub fn generate_channel(geometry: &RhsGeometry, cfg: &ChannelConfig) -> Result<ChannelMatrix> {
    generate_channel_with_rng(geometry, cfg, &mut trial_rng(cfg.seed, 0))
}

pub fn generate_channel_with_rng<R: Rng + ?Sized>(
    geometry: &RhsGeometry,
    cfg: &ChannelConfig,
    rng: &mut R,
) -> Result<ChannelMatrix> {
    cfg.validate()?;
    let users = cfg.num_users;
    let (w_los, w_nlos) = cfg.rician_weights();
    let path_scale = w_nlos / (cfg.path_count as f64).sqrt();
    let one_d = geometry.rows() == 1 || geometry.cols() == 1;

    let distances: Vec<f64> = (0..users)
        .map(|_| {
            if cfg.user_distance_max > cfg.user_distance_min {
                rng.random_range(cfg.user_distance_min..=cfg.user_distance_max)
            } else {
                cfg.user_distance_min
            }
        })
        .collect();
    let nearest = distances.iter().cloned().fold(f64::INFINITY, f64::min);
    let pathloss: Vec<f64> = distances
        .iter()
        .map(|d| (d / nearest).powf(-cfg.pathloss_exponent))
        .collect();

    let max_theta = cfg.max_user_theta_deg.to_radians();
    let mut entries = DMatrix::<Complex64>::zeros(users, geometry.element_count());
    let mut los_directions = Vec::with_capacity(users);
    for (l, beta) in pathloss.iter().enumerate() {
        let theta = rng.random::<f64>() * max_theta;
        let los = if one_d {
            Direction::in_principal_plane(geometry, theta.to_degrees())?
        } else {
            Direction::new(theta, rng.random::<f64>() * TAU)?
        };
        let mut h = steering_vector(geometry, los) * Complex64::new(w_los, 0.0);
        for _ in 0..cfg.path_count {
            // Uniform on the front hemisphere.
            let cos_theta: f64 = rng.random();
            let dir = Direction::new(cos_theta.acos().min(FRAC_PI_2), rng.random::<f64>() * TAU)?;
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let gain = Complex64::new(re, im) * (path_scale / std::f64::consts::SQRT_2);
            h += steering_vector(geometry, dir) * gain;
        }
        h *= Complex64::new(beta.sqrt(), 0.0);
        entries.set_row(l, &h.transpose());
        los_directions.push(los);
    }
    Ok(ChannelMatrix {
        entries,
        los_directions,
        pathloss,
    })
}
