//! Experiment configuration, read from TOML (`geometry.rows = 8` style keys
//! or `[geometry]` tables). Every field has a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::beamforming::LinkBudget;
use crate::channel::ChannelConfig;
use crate::error::{Result, RhsError};
use crate::geometry::{
    RhsGeometry, DEFAULT_ATTENUATION, DEFAULT_SPACING_WAVELENGTHS, DEFAULT_WAVEGUIDE_INDEX,
};
use crate::holography::PinMode;
use crate::optimizer::OptimizerConfig;

/// Largest surface the exhaustive grid check accepts.
pub const GRIDCHECK_MAX_ELEMENTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub channel: ChannelConfig,
    pub budget: BudgetConfig,
    pub optimizer: OptimizerConfig,
    pub pattern: PatternConfig,
    pub experiment: SweepConfig,
    pub gridcheck: GridcheckConfig,
}

/// Physical surface parameters plus the size used by `optimize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub rows: usize,
    pub cols: usize,
    pub feeds: usize,
    pub carrier_frequency: f64,
    pub spacing_wavelengths: f64,
    pub waveguide_index: f64,
    /// Np/m.
    pub attenuation: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            rows: 8,
            cols: 8,
            feeds: 4,
            carrier_frequency: 12e9,
            spacing_wavelengths: DEFAULT_SPACING_WAVELENGTHS,
            waveguide_index: DEFAULT_WAVEGUIDE_INDEX,
            attenuation: DEFAULT_ATTENUATION,
        }
    }
}

impl GeometryConfig {
    /// Surface of the given size sharing this block's physical parameters.
    pub fn build(&self, rows: usize, cols: usize, feeds: usize) -> Result<RhsGeometry> {
        RhsGeometry::builder(rows, cols, self.carrier_frequency)
            .spacing_wavelengths(self.spacing_wavelengths)
            .waveguide_index(self.waveguide_index)
            .attenuation(self.attenuation)
            .feed_count(feeds)
            .build()
    }

    pub fn surface(&self) -> Result<RhsGeometry> {
        self.build(self.rows, self.cols, self.feeds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    /// Watts. Noise power lives in the channel block.
    pub transmit_power: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self { transmit_power: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Quantization {
    #[default]
    None,
    PinIdeal,
    PinMeasured,
}

impl Quantization {
    pub fn pin_mode(self) -> Option<PinMode> {
        match self {
            Quantization::None => None,
            Quantization::PinIdeal => Some(PinMode::Ideal),
            Quantization::PinMeasured => Some(PinMode::Measured),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternConfig {
    pub rows: usize,
    pub cols: usize,
    pub feeds: usize,
    /// Signed principal-plane angles.
    pub beams_deg: Vec<f64>,
    pub quantize: Quantization,
    pub pin_threshold: f64,
    pub step_deg: f64,
}

impl Default for PatternConfig {
    fn default() -> Self {
        Self {
            rows: 1,
            cols: 16,
            feeds: 1,
            beams_deg: vec![-3.0, 23.0],
            quantize: Quantization::None,
            pin_threshold: 0.5,
            step_deg: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Square surface sizes `M = N` for `sweep`.
    pub sizes: Vec<usize>,
    pub trials: u64,
    pub output_dir: PathBuf,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            sizes: vec![4, 8, 12],
            trials: 20,
            output_dir: PathBuf::from("out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridcheckConfig {
    pub rows: usize,
    pub cols: usize,
    pub feeds: usize,
    pub users: usize,
    pub trials: u64,
    pub levels: Vec<f64>,
    /// Required median of optimizer rate over grid-best rate.
    pub threshold: f64,
}

impl Default for GridcheckConfig {
    fn default() -> Self {
        Self {
            rows: 2,
            cols: 2,
            feeds: 2,
            users: 2,
            trials: 20,
            levels: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            threshold: 0.9,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| RhsError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| RhsError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn budget(&self) -> Result<LinkBudget> {
        LinkBudget::new(self.budget.transmit_power, self.channel.noise_power)
    }

    pub fn validate(&self) -> Result<()> {
        let block = |name: &str, r: Result<()>| {
            r.map_err(|e| RhsError::Config(format!("{name}: {e}")))
        };
        block("geometry", self.geometry.surface().map(drop))?;
        block("channel", self.channel.validate())?;
        block("budget", self.budget().map(drop))?;
        block("optimizer", self.optimizer.validate())?;

        let p = &self.pattern;
        block("pattern", self.geometry.build(p.rows, p.cols, p.feeds).map(drop))?;
        if p.beams_deg.iter().any(|b| !(b.abs() <= 90.0)) {
            return Err(RhsError::Config("pattern: beam angles must lie in [-90, 90]".into()));
        }
        if !(p.step_deg > 0.0 && p.step_deg <= 10.0) {
            return Err(RhsError::Config("pattern: step_deg must lie in (0, 10]".into()));
        }
        if !(p.pin_threshold > 0.0 && p.pin_threshold < 1.0) {
            return Err(RhsError::Config("pattern: pin_threshold must lie in (0, 1)".into()));
        }

        let s = &self.experiment;
        if s.trials == 0 {
            return Err(RhsError::Config("experiment: trials must be ≥ 1".into()));
        }
        if s.sizes.is_empty() || s.sizes.iter().any(|&m| m < 2) {
            return Err(RhsError::Config("experiment: sizes must be nonempty and ≥ 2".into()));
        }

        let g = &self.gridcheck;
        block("gridcheck", self.geometry.build(g.rows, g.cols, g.feeds).map(drop))?;
        if g.rows * g.cols > GRIDCHECK_MAX_ELEMENTS {
            return Err(RhsError::Config(format!(
                "gridcheck: {} elements exceed the limit of {GRIDCHECK_MAX_ELEMENTS}",
                g.rows * g.cols
            )));
        }
        if g.users == 0 || g.users > g.feeds {
            return Err(RhsError::Config("gridcheck: need 1 ≤ users ≤ feeds".into()));
        }
        if g.trials == 0 || g.levels.is_empty() || g.levels.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(RhsError::Config(
                "gridcheck: trials ≥ 1 and levels in [0, 1] required".into(),
            ));
        }
        if self.channel.num_users > self.geometry.feeds {
            return Err(RhsError::Config("channel: num_users exceeds geometry.feeds".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn shipped_config_parses() {
        let text = include_str!("../../../configs/default.toml");
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.experiment.sizes, vec![4, 8, 12]);
        assert_eq!(cfg.geometry.feeds, 4);
        assert_eq!(cfg.channel.num_users, 3);
        assert_eq!(cfg.budget.transmit_power, 0.5);
        assert_eq!(cfg.gridcheck.rows * cfg.gridcheck.cols, 4);
    }

    #[test]
    fn dotted_and_table_forms_agree() {
        let a = ExperimentConfig::from_toml("geometry.rows = 4\nchannel.seed = 9\n").unwrap();
        let b = ExperimentConfig::from_toml("[geometry]\nrows = 4\n[channel]\nseed = 9\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.geometry.rows, 4);
        assert_eq!(a.channel.seed, 9);
    }

    #[test]
    fn quantize_names() {
        let c = ExperimentConfig::from_toml("pattern.quantize = \"pin-measured\"").unwrap();
        assert_eq!(c.pattern.quantize, Quantization::PinMeasured);
        assert!(ExperimentConfig::from_toml("pattern.quantize = \"pin\"").is_err());
    }

    #[test]
    fn rejects_bad_blocks() {
        for text in [
            "geometry.rowz = 4",
            "experiment.trials = 0",
            "experiment.sizes = []",
            "experiment.sizes = [1, 4]",
            "gridcheck.rows = 3\ngridcheck.cols = 3",
            "gridcheck.users = 3",
            "channel.noise_power = 0.0",
            "budget.transmit_power = -1.0",
            "optimizer.rate_tolerance = 0.0",
            "pattern.beams_deg = [95.0]",
            "channel.num_users = 5",
            "geometry.rows = 0",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml(text), Err(RhsError::Config(_))),
                "{text}"
            );
        }
    }
}
