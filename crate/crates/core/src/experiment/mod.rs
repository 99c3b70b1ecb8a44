//! Monte Carlo simulation of the four-fold coincidence experiment and
//! analysis of coincidence-count tables.
//!
//! The pipeline mirrors the lab procedure: raw mean counts per outcome are
//! divided by the detection efficiencies of the `±1` outcomes, normalized
//! per setting into probabilities, turned into four correlations and
//! combined into `S`.

mod estimate;
mod simulate;
mod table;

use serde::{Deserialize, Serialize};

use crate::analyzer::DetectionModel;
use crate::bell::BellSettings;
use crate::error::{Error, Result};

pub use estimate::{
    estimate_bell, BellEstimate, CorrelationEstimate, EstimateOptions, UncertaintyMethod,
};
pub use simulate::{expected_table, simulate_counts};
pub use table::{
    correct_counts, probability_table, CountRow, CountTable, SettingBlock, SettingProbabilities,
    COUNT_CSV_HEADER,
};

/// Parameters of a simulated run. Field names double as the JSON config
/// keys; missing keys take the defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub settings: BellSettings,
    pub p: f64,
    pub det: DetectionModel,
    /// Efficiency-corrected four-fold coincidences per 60 s per setting.
    pub corrected_rate: f64,
    pub n_intervals: usize,
    pub interval_s: f64,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    /// Equally spaced settings with `Δφ = 10°` centred at `-1°`, i.e.
    /// `(α, α', β, β') = (-16°, 4°, -6°, 14°)`, twelve 60 s intervals.
    fn default() -> Self {
        Self {
            settings: BellSettings::new(-16.0, 4.0, -6.0, 14.0),
            p: 0.69,
            det: DetectionModel::default(),
            corrected_rate: 520.35,
            n_intervals: 12,
            interval_s: 60.0,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    /// The alternative reading of the printed settings with `β = +6°`.
    pub fn printed_beta_preset() -> Self {
        Self {
            settings: BellSettings::new(-16.0, 4.0, 6.0, 14.0),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.settings
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidConfig(format!(
                "p = {} is outside [0, 1]",
                self.p
            )));
        }
        self.det
            .validate()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        if !(self.corrected_rate > 0.0 && self.corrected_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "corrected_rate must be positive, got {}",
                self.corrected_rate
            )));
        }
        if self.n_intervals < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_intervals must be at least 2, got {}",
                self.n_intervals
            )));
        }
        if !(self.interval_s > 0.0 && self.interval_s.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "interval_s must be positive, got {}",
                self.interval_s
            )));
        }
        Ok(())
    }

    /// Expected corrected coincidences per interval for one setting.
    pub fn corrected_per_interval(&self) -> f64 {
        self.corrected_rate * self.interval_s / 60.0
    }
}
