use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::table::{CountTable, SettingBlock};
use crate::analyzer::DetectionModel;
use crate::bell::{observable_value, BellSettings};
use crate::error::{Error, Result};
use crate::qstate::Outcome;

const CROSS_CHECK_REL_TOL: f64 = 0.30;
const ANGLE_MATCH_TOL: f64 = 1e-6;
const CANONICAL_LABELS: [&str; 4] = ["ab", "ab'", "a'b", "a'b'"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UncertaintyMethod {
    /// Sample variance of the per-interval counts, propagated linearly.
    IntervalScatter,
    /// Resampling intervals with replacement.
    Bootstrap,
    /// Poisson variance `mean / n_intervals`, propagated linearly.
    PoissonPropagation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateOptions {
    /// `None` picks bootstrap when every row carries per-interval counts and
    /// Poisson propagation otherwise.
    pub method: Option<UncertaintyMethod>,
    pub bootstrap_samples: usize,
    pub seed: u64,
    /// Explicit CHSH roles; otherwise inferred from labels or angles.
    pub settings: Option<BellSettings>,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            method: None,
            bootstrap_samples: 1000,
            seed: 0x5eed,
            settings: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationEstimate {
    pub alpha_deg: f64,
    pub beta_deg: f64,
    /// Sign of this term in `S`.
    pub sign: f64,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellEstimate {
    #[serde(rename = "S")]
    pub s: f64,
    pub sigma: f64,
    pub signed_s: f64,
    #[serde(rename = "E")]
    pub e: BTreeMap<String, CorrelationEstimate>,
    pub method: UncertaintyMethod,
    pub settings: BellSettings,
    pub efficiencies: DetectionModel,
    pub sigma_poisson: f64,
    pub sigma_interval_scatter: Option<f64>,
    pub sigma_bootstrap: Option<f64>,
    pub bootstrap_samples: Option<usize>,
    /// Whether bootstrap and Poisson errors agree within 30 %.
    pub cross_check_ok: Option<bool>,
}

/// Corrected-count correlation of one setting from raw means.
fn correlation_from_means(means: &[f64; 9], weights: &[f64; 9], values: &[f64; 9]) -> f64 {
    let mut total = 0.0;
    let mut signed = 0.0;
    for k in 0..9 {
        let c = means[k] / weights[k];
        total += c;
        signed += values[k] * c;
    }
    if total > 0.0 {
        signed / total
    } else {
        0.0
    }
}

struct Role<'a> {
    block: SettingBlock<'a>,
    sign: f64,
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= ANGLE_MATCH_TOL
}

/// Orders the four measured settings as `(α,β), (α,β'), (α',β), (α',β')`.
fn assign_roles<'a>(
    blocks: Vec<SettingBlock<'a>>,
    explicit: Option<BellSettings>,
) -> Result<(Vec<Role<'a>>, BellSettings)> {
    if blocks.len() != 4 {
        return Err(Error::Table(format!(
            "expected 4 settings, found {}",
            blocks.len()
        )));
    }
    let settings = match explicit {
        Some(s) => s,
        None if CANONICAL_LABELS
            .iter()
            .all(|l| blocks.iter().any(|b| b.label == *l)) =>
        {
            let find = |l: &str| blocks.iter().find(|b| b.label == l).expect("checked");
            let (ab, abp, apb) = (find("ab"), find("ab'"), find("a'b"));
            BellSettings::new(ab.alpha_deg, apb.alpha_deg, ab.beta_deg, abp.beta_deg)
        }
        None => infer_settings(&blocks)?,
    };
    let mut remaining: Vec<Option<SettingBlock<'a>>> = blocks.into_iter().map(Some).collect();
    let mut roles = Vec::with_capacity(4);
    for pair in settings.pairs() {
        let slot = remaining
            .iter_mut()
            .find(|b| {
                b.as_ref()
                    .is_some_and(|b| close(b.alpha_deg, pair.alpha) && close(b.beta_deg, pair.beta))
            })
            .ok_or_else(|| {
                Error::Table(format!(
                    "no setting measured at (alpha, beta) = ({}, {})",
                    pair.alpha, pair.beta
                ))
            })?;
        roles.push(Role {
            block: slot.take().expect("found above"),
            sign: pair.sign,
        });
    }
    Ok((roles, settings))
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for v in values {
        if !out.iter().any(|&u| close(u, v)) {
            out.push(v);
        }
    }
    out
}

/// Folded analyzer separation in `[0°, 45°]`; correlations are 90°-periodic
/// and even in the separation.
fn folded_separation(alpha: f64, beta: f64) -> f64 {
    let d = (alpha - beta).rem_euclid(90.0);
    d.min(90.0 - d)
}

/// The CHSH minus sign goes on the pair with the widest separation.
fn infer_settings(blocks: &[SettingBlock<'_>]) -> Result<BellSettings> {
    let alphas = distinct(blocks.iter().map(|b| b.alpha_deg));
    let betas = distinct(blocks.iter().map(|b| b.beta_deg));
    if alphas.len() != 2 || betas.len() != 2 {
        return Err(Error::Table(format!(
            "settings do not form a 2x2 pattern: alphas {alphas:?}, betas {betas:?}"
        )));
    }
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, &a) in alphas.iter().enumerate() {
        for (j, &b) in betas.iter().enumerate() {
            let sep = folded_separation(a, b);
            if best.is_none_or(|(s, _, _)| sep > s + ANGLE_MATCH_TOL) {
                best = Some((sep, i, j));
            }
        }
    }
    let (_, i, j) = best.expect("nonempty");
    Ok(BellSettings::new(
        alphas[i],
        alphas[1 - i],
        betas[1 - j],
        betas[j],
    ))
}

fn std_dev(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    if values.len() < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Linear error propagation of per-cell variances of the raw mean counts.
fn propagated_sigma(
    means: &[f64; 9],
    variances: &[f64; 9],
    weights: &[f64; 9],
    values: &[f64; 9],
) -> f64 {
    let e = correlation_from_means(means, weights, values);
    let total: f64 = (0..9).map(|k| means[k] / weights[k]).sum();
    if total <= 0.0 {
        return 0.0;
    }
    (0..9)
        .map(|k| ((values[k] - e) / (weights[k] * total)).powi(2) * variances[k])
        .sum::<f64>()
        .sqrt()
}

/// `S` and its uncertainty from raw coincidence counts of the four settings.
///
/// Counts are corrected for detection efficiency, normalized per setting,
/// reduced to correlations and combined into `S`. The Poisson error is
/// always computed; the bootstrap resamples each row's intervals with
/// replacement, and its error is cross-checked against the Poisson value.
pub fn estimate_bell(
    table: &CountTable,
    det: &DetectionModel,
    options: &EstimateOptions,
) -> Result<BellEstimate> {
    det.validate()?;
    let (roles, settings) = assign_roles(table.settings()?, options.settings)?;
    let has_intervals = roles.iter().all(|r| r.block.has_intervals());
    let method = match options.method {
        Some(m) => m,
        None if has_intervals => UncertaintyMethod::Bootstrap,
        None => UncertaintyMethod::PoissonPropagation,
    };
    if matches!(
        method,
        UncertaintyMethod::Bootstrap | UncertaintyMethod::IntervalScatter
    ) && !has_intervals
    {
        return Err(Error::Table(format!(
            "{method:?} needs at least two per-interval counts on every row"
        )));
    }
    if method == UncertaintyMethod::Bootstrap && options.bootstrap_samples < 2 {
        return Err(Error::InvalidArgument(
            "bootstrap needs at least 2 resamples".into(),
        ));
    }

    struct Cells {
        means: [f64; 9],
        weights: [f64; 9],
        values: [f64; 9],
        poisson_var: [f64; 9],
        scatter_var: [f64; 9],
        // Sorted so nothing downstream depends on interval order.
        intervals: Vec<Vec<f64>>,
    }
    let mut cells = Vec::with_capacity(4);
    for role in &roles {
        let mut c = Cells {
            means: [0.0; 9],
            weights: [0.0; 9],
            values: [0.0; 9],
            poisson_var: [0.0; 9],
            scatter_var: [0.0; 9],
            intervals: Vec::with_capacity(9),
        };
        for (k, row) in role.block.iter().enumerate() {
            if row.n_intervals == 0 {
                return Err(Error::Table(format!(
                    "setting `{}` row ({}, {}) has n_intervals = 0",
                    row.setting_label, row.outcome_a, row.outcome_b
                )));
            }
            let a = Outcome::from_index(k / 3).expect("k < 9");
            let b = Outcome::from_index(k % 3).expect("k < 9");
            c.means[k] = row.mean_counts;
            c.weights[k] = det.weight(a, b);
            c.values[k] = observable_value(a) * observable_value(b);
            c.poisson_var[k] = row.mean_counts / row.n_intervals as f64;
            let mut sorted = row.intervals.clone();
            sorted.sort_by(f64::total_cmp);
            if sorted.len() >= 2 {
                let sd = std_dev(&sorted);
                c.scatter_var[k] = sd * sd / sorted.len() as f64;
            }
            c.intervals.push(sorted);
        }
        cells.push(c);
    }

    let e: Vec<f64> = cells
        .iter()
        .map(|c| correlation_from_means(&c.means, &c.weights, &c.values))
        .collect();
    let signed_s: f64 = roles.iter().zip(&e).map(|(r, e)| r.sign * e).sum();

    let sigma_e_poisson: Vec<f64> = cells
        .iter()
        .map(|c| propagated_sigma(&c.means, &c.poisson_var, &c.weights, &c.values))
        .collect();
    let sigma_poisson = sigma_e_poisson.iter().map(|s| s * s).sum::<f64>().sqrt();

    let sigma_e_scatter: Option<Vec<f64>> = has_intervals.then(|| {
        cells
            .iter()
            .map(|c| propagated_sigma(&c.means, &c.scatter_var, &c.weights, &c.values))
            .collect()
    });
    let sigma_scatter = sigma_e_scatter
        .as_ref()
        .map(|s| s.iter().map(|x| x * x).sum::<f64>().sqrt());

    let bootstrap = (has_intervals && options.bootstrap_samples >= 2).then(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        let n_boot = options.bootstrap_samples;
        let mut s_samples = Vec::with_capacity(n_boot);
        let mut e_samples: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(n_boot));
        let mut resampled = [0.0; 9];
        for _ in 0..n_boot {
            let mut s = 0.0;
            for (k, c) in cells.iter().enumerate() {
                for (slot, intervals) in resampled.iter_mut().zip(&c.intervals) {
                    let n = intervals.len();
                    let sum: f64 = (0..n).map(|_| intervals[rng.random_range(0..n)]).sum();
                    *slot = sum / n as f64;
                }
                let e_k = correlation_from_means(&resampled, &c.weights, &c.values);
                e_samples[k].push(e_k);
                s += roles[k].sign * e_k;
            }
            s_samples.push(s.abs());
        }
        let per_setting: Vec<f64> = e_samples.iter().map(|v| std_dev(v)).collect();
        (std_dev(&s_samples), per_setting)
    });

    let (sigma, sigma_e) = match method {
        UncertaintyMethod::PoissonPropagation => (sigma_poisson, sigma_e_poisson.clone()),
        UncertaintyMethod::IntervalScatter => (
            sigma_scatter.expect("intervals checked"),
            sigma_e_scatter.clone().expect("intervals checked"),
        ),
        UncertaintyMethod::Bootstrap => bootstrap.clone().expect("intervals checked"),
    };
    let cross_check_ok = bootstrap.as_ref().map(|(sb, _)| {
        sigma_poisson > 0.0 && ((sb - sigma_poisson) / sigma_poisson).abs() <= CROSS_CHECK_REL_TOL
    });

    let e_map = roles
        .iter()
        .zip(e.iter().zip(&sigma_e))
        .map(|(role, (&value, &sigma))| {
            (
                role.block.label.to_string(),
                CorrelationEstimate {
                    alpha_deg: role.block.alpha_deg,
                    beta_deg: role.block.beta_deg,
                    sign: role.sign,
                    value,
                    sigma,
                },
            )
        })
        .collect();

    Ok(BellEstimate {
        s: signed_s.abs(),
        sigma,
        signed_s,
        e: e_map,
        method,
        settings,
        efficiencies: *det,
        sigma_poisson,
        sigma_interval_scatter: sigma_scatter,
        sigma_bootstrap: bootstrap.as_ref().map(|b| b.0),
        bootstrap_samples: bootstrap.is_some().then_some(options.bootstrap_samples),
        cross_check_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::chsh;
    use crate::experiment::{expected_table, simulate_counts, ExperimentConfig};
    use crate::qstate::make_noisy_state;

    #[test]
    fn noiseless_round_trip() {
        let cfg = ExperimentConfig::default();
        let table = expected_table(&cfg).unwrap();
        let est = estimate_bell(&table, &cfg.det, &EstimateOptions::default()).unwrap();
        let model = chsh(&make_noisy_state(cfg.p).unwrap(), &cfg.settings).unwrap();
        assert_eq!(est.method, UncertaintyMethod::PoissonPropagation);
        assert!((est.s - model).abs() < 1e-10, "{} vs {model}", est.s);
        assert_eq!(est.settings, cfg.settings);
    }

    #[test]
    fn roles_inferred_from_angles() {
        let cfg = ExperimentConfig::default();
        let mut table = expected_table(&cfg).unwrap();
        for row in &mut table.rows {
            row.setting_label = format!("{}/{}", row.alpha_deg, row.beta_deg);
        }
        let est = estimate_bell(&table, &cfg.det, &EstimateOptions::default()).unwrap();
        assert_eq!(est.settings, cfg.settings);
        assert_eq!(est.e["-16/14"].sign, -1.0);
    }

    #[test]
    fn mismatched_settings() {
        let cfg = ExperimentConfig::default();
        let mut table = expected_table(&cfg).unwrap();
        table.rows.retain(|r| r.setting_label != "a'b'");
        assert!(estimate_bell(&table, &cfg.det, &EstimateOptions::default()).is_err());

        let table = expected_table(&cfg).unwrap();
        let opts = EstimateOptions {
            settings: Some(BellSettings::new(0.0, 1.0, 2.0, 3.0)),
            ..EstimateOptions::default()
        };
        assert!(estimate_bell(&table, &cfg.det, &opts).is_err());
    }

    #[test]
    fn bootstrap_requires_intervals() {
        let cfg = ExperimentConfig::default();
        let table = expected_table(&cfg).unwrap();
        let opts = EstimateOptions {
            method: Some(UncertaintyMethod::Bootstrap),
            ..EstimateOptions::default()
        };
        assert!(estimate_bell(&table, &cfg.det, &opts).is_err());
    }

    #[test]
    fn interval_order_does_not_matter() {
        let cfg = ExperimentConfig {
            seed: 7,
            ..ExperimentConfig::default()
        };
        let table = simulate_counts(&cfg).unwrap();
        let mut shuffled = table.clone();
        for row in &mut shuffled.rows {
            row.intervals.reverse();
            row.intervals.rotate_left(5);
        }
        let opts = EstimateOptions::default();
        let a = estimate_bell(&table, &cfg.det, &opts).unwrap();
        let b = estimate_bell(&shuffled, &cfg.det, &opts).unwrap();
        assert_eq!(a.s.to_bits(), b.s.to_bits());
        assert_eq!(a.sigma.to_bits(), b.sigma.to_bits());
        assert_eq!(a.sigma_interval_scatter, b.sigma_interval_scatter);
    }

    #[test]
    fn all_methods_report_positive_sigma() {
        let cfg = ExperimentConfig {
            seed: 3,
            ..ExperimentConfig::default()
        };
        let table = simulate_counts(&cfg).unwrap();
        for method in [
            UncertaintyMethod::Bootstrap,
            UncertaintyMethod::IntervalScatter,
            UncertaintyMethod::PoissonPropagation,
        ] {
            let opts = EstimateOptions {
                method: Some(method),
                ..EstimateOptions::default()
            };
            let est = estimate_bell(&table, &cfg.det, &opts).unwrap();
            assert_eq!(est.method, method);
            assert!(
                est.sigma > 0.0 && est.sigma < 0.1,
                "{method:?}: {}",
                est.sigma
            );
        }
    }

    #[test]
    fn folded_separation_is_periodic() {
        assert_eq!(folded_separation(-16.0, 14.0), 30.0);
        assert_eq!(folded_separation(4.0, -6.0), 10.0);
        assert!((folded_separation(80.0, 0.0) - 10.0).abs() < 1e-12);
    }
}
