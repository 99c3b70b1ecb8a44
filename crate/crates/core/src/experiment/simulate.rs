use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::table::{CountRow, CountTable};
use super::ExperimentConfig;
use crate::analyzer::{expected_counts, joint_probabilities, AnalyzerSetting};
use crate::error::{Error, Result};
use crate::qstate::{make_noisy_state, Outcome};

/// Label, angles and expected raw counts per interval of one setting.
type SettingExpectation = (&'static str, f64, f64, [[f64; 3]; 3]);

fn expected_raw(cfg: &ExperimentConfig) -> Result<Vec<SettingExpectation>> {
    cfg.validate()?;
    let state = make_noisy_state(cfg.p)?;
    cfg.settings
        .pairs()
        .iter()
        .map(|pair| {
            let grid = joint_probabilities(
                &state,
                AnalyzerSetting(pair.alpha),
                AnalyzerSetting(pair.beta),
            )?;
            let raw = expected_counts(&grid, &cfg.det, cfg.corrected_per_interval())?;
            Ok((pair.label, pair.alpha, pair.beta, raw))
        })
        .collect()
}

/// Draws `n_intervals` independent Poisson counts for each setting and
/// outcome pair.
///
/// Every (setting, outcome) cell reads its own ChaCha stream of the
/// configured seed, so the table depends only on the seed and config.
pub fn simulate_counts(cfg: &ExperimentConfig) -> Result<CountTable> {
    let mut rows = Vec::with_capacity(36);
    for (k, (label, alpha, beta, raw)) in expected_raw(cfg)?.into_iter().enumerate() {
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                let cell = 9 * k + 3 * a.index() + b.index();
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(cell as u64);
                let mean = raw[a.index()][b.index()];
                let intervals: Vec<f64> = if mean > 0.0 {
                    let poisson = Poisson::new(mean)
                        .map_err(|e| Error::InvalidConfig(format!("Poisson mean {mean}: {e}")))?;
                    (0..cfg.n_intervals)
                        .map(|_| poisson.sample(&mut rng))
                        .collect()
                } else {
                    vec![0.0; cfg.n_intervals]
                };
                rows.push(CountRow {
                    setting_label: label.to_string(),
                    alpha_deg: alpha,
                    beta_deg: beta,
                    outcome_a: a,
                    outcome_b: b,
                    mean_counts: intervals.iter().sum::<f64>() / intervals.len() as f64,
                    n_intervals: cfg.n_intervals,
                    interval_s: cfg.interval_s,
                    intervals,
                });
            }
        }
    }
    Ok(CountTable::new(rows))
}

/// The noiseless table: every mean count equals its expectation and no
/// per-interval data is attached.
pub fn expected_table(cfg: &ExperimentConfig) -> Result<CountTable> {
    let mut rows = Vec::with_capacity(36);
    for (label, alpha, beta, raw) in expected_raw(cfg)? {
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                rows.push(CountRow {
                    setting_label: label.to_string(),
                    alpha_deg: alpha,
                    beta_deg: beta,
                    outcome_a: a,
                    outcome_b: b,
                    mean_counts: raw[a.index()][b.index()],
                    n_intervals: cfg.n_intervals,
                    interval_s: cfg.interval_s,
                    intervals: Vec::new(),
                });
            }
        }
    }
    Ok(CountTable::new(rows))
}
