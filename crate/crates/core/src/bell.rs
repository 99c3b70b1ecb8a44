//! Spin-1 correlations, the CHSH combination and the local-hidden-variable
//! bound.
//!
//! Each outcome carries the observable value `v(+1) = +1`, `v(0) = -1`,
//! `v(-1) = +1`, and the correlation is
//!
//! ```text
//! E(α, β) = Σ_{A,B} v(A) v(B) P(A, B | α, β)
//! S = |E(α, β) - E(α, β') + E(α', β) + E(α', β')|
//! ```

use serde::{Deserialize, Serialize};

use crate::analyzer::{joint_probabilities, AnalyzerSetting, OutcomeGrid};
use crate::error::{Error, Result};
use crate::qstate::{JointState, Outcome};

const GRID_SUM_TOL: f64 = 1e-8;

/// Analyzer angles `(α, α', β, β')` in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellSettings {
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    pub beta_prime: f64,
}

/// One of the four `(Alice, Bob)` angle combinations entering `S`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SettingPair {
    pub label: &'static str,
    pub alpha: f64,
    pub beta: f64,
    /// Sign of this term in the CHSH combination.
    pub sign: f64,
}

impl BellSettings {
    pub fn new(alpha: f64, alpha_prime: f64, beta: f64, beta_prime: f64) -> Self {
        Self {
            alpha,
            alpha_prime,
            beta,
            beta_prime,
        }
    }

    /// Parses `a,a',b,b'`.
    pub fn parse(text: &str) -> Result<Self> {
        let values = text
            .split(',')
            .map(|part| {
                part.trim().parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!("cannot parse angle `{}`", part.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let [alpha, alpha_prime, beta, beta_prime] = values[..] else {
            return Err(Error::InvalidArgument(format!(
                "expected four angles a,a',b,b', got {}",
                values.len()
            )));
        };
        let s = Self::new(alpha, alpha_prime, beta, beta_prime);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.angles().iter().all(|a| a.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "non-finite angle in {self:?}"
            )))
        }
    }

    pub fn angles(&self) -> [f64; 4] {
        [self.alpha, self.alpha_prime, self.beta, self.beta_prime]
    }

    /// Adds `delta` to all four angles.
    pub fn shifted(&self, delta: f64) -> Self {
        Self::new(
            self.alpha + delta,
            self.alpha_prime + delta,
            self.beta + delta,
            self.beta_prime + delta,
        )
    }

    /// The four combinations in the order `(α,β), (α,β'), (α',β), (α',β')`.
    pub fn pairs(&self) -> [SettingPair; 4] {
        [
            SettingPair {
                label: "ab",
                alpha: self.alpha,
                beta: self.beta,
                sign: 1.0,
            },
            SettingPair {
                label: "ab'",
                alpha: self.alpha,
                beta: self.beta_prime,
                sign: -1.0,
            },
            SettingPair {
                label: "a'b",
                alpha: self.alpha_prime,
                beta: self.beta,
                sign: 1.0,
            },
            SettingPair {
                label: "a'b'",
                alpha: self.alpha_prime,
                beta: self.beta_prime,
                sign: 1.0,
            },
        ]
    }
}

/// Observable value attached to each spin-1 outcome.
pub fn observable_value(outcome: Outcome) -> f64 {
    match outcome {
        Outcome::Plus | Outcome::Minus => 1.0,
        Outcome::Zero => -1.0,
    }
}

/// Signed sum of the nine joint probabilities.
pub fn expectation(grid: &OutcomeGrid) -> Result<f64> {
    let total = grid.total();
    if (total - 1.0).abs() > GRID_SUM_TOL {
        return Err(Error::UnnormalizedGrid(total));
    }
    Ok(signed_sum(grid))
}

fn signed_sum(grid: &OutcomeGrid) -> f64 {
    grid.iter()
        .map(|(a, b, p)| observable_value(a) * observable_value(b) * p)
        .sum()
}

/// `E(α, β)` for a state.
pub fn correlation(state: &JointState, alpha: f64, beta: f64) -> Result<f64> {
    let grid = joint_probabilities(state, AnalyzerSetting(alpha), AnalyzerSetting(beta))?;
    expectation(&grid)
}

/// The four correlations in [`BellSettings::pairs`] order.
pub fn correlations(state: &JointState, s: &BellSettings) -> Result<[f64; 4]> {
    let pairs = s.pairs();
    let mut e = [0.0; 4];
    for (slot, pair) in e.iter_mut().zip(pairs.iter()) {
        *slot = correlation(state, pair.alpha, pair.beta)?;
    }
    Ok(e)
}

/// `E(α,β) - E(α,β') + E(α',β) + E(α',β')` from correlations in
/// [`BellSettings::pairs`] order.
pub fn chsh_combination(e: [f64; 4]) -> f64 {
    e[0] - e[1] + e[2] + e[3]
}

/// The CHSH combination without the absolute value.
pub fn chsh_signed(state: &JointState, s: &BellSettings) -> Result<f64> {
    s.validate()?;
    Ok(chsh_combination(correlations(state, s)?))
}

/// `S = |E(α,β) - E(α,β') + E(α',β) + E(α',β')|`.
pub fn chsh(state: &JointState, s: &BellSettings) -> Result<f64> {
    chsh_signed(state, s).map(f64::abs)
}

/// A deterministic local strategy: the outcome Alice returns for `α` and
/// `α'`, and Bob for `β` and `β'`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalStrategy {
    pub alpha: Outcome,
    pub alpha_prime: Outcome,
    pub beta: Outcome,
    pub beta_prime: Outcome,
}

impl LocalStrategy {
    /// `|A B - A B' + A' B + A' B'|` with outcome values as integers.
    pub fn chsh_value(&self) -> i32 {
        let v = |o: Outcome| observable_value(o) as i32;
        let (a, ap, b, bp) = (
            v(self.alpha),
            v(self.alpha_prime),
            v(self.beta),
            v(self.beta_prime),
        );
        (a * b - a * bp + ap * b + ap * bp).abs()
    }
}

/// All `3^4 = 81` deterministic local strategies.
pub fn local_strategies() -> impl Iterator<Item = LocalStrategy> {
    (0..81usize).map(|k| {
        let digit = |d: u32| Outcome::from_index(k / 3usize.pow(d) % 3).unwrap();
        LocalStrategy {
            alpha: digit(3),
            alpha_prime: digit(2),
            beta: digit(1),
            beta_prime: digit(0),
        }
    })
}

/// Maximum of the CHSH combination over every deterministic local strategy.
/// Mixtures of strategies cannot exceed it, so this is the local bound.
pub fn lhv_max() -> i32 {
    local_strategies()
        .map(|s| s.chsh_value())
        .max()
        .expect("strategy set is nonempty")
}

/// Joint outcome distribution when the four photons form two
/// distinguishable polarization singlets, pair `k` shared by Alice's and
/// Bob's photon `k`. Each side reports `+1` for two `H`, `0` for one of each
/// and `-1` for two `V` in its rotated basis.
pub fn pairs_model_probabilities(alpha: AnalyzerSetting, beta: AnalyzerSetting) -> OutcomeGrid {
    let theta = alpha.radians() - beta.radians();
    let same = 0.5 * theta.sin().powi(2);
    let different = 0.5 * theta.cos().powi(2);
    // Per-pair table indexed by (Alice photon is V, Bob photon is V).
    let pair = [[same, different], [different, same]];
    let side = |first_v: usize, second_v: usize| match first_v + second_v {
        0 => Outcome::Plus,
        1 => Outcome::Zero,
        _ => Outcome::Minus,
    };
    let mut p = [[0.0; 3]; 3];
    for a1 in 0..2 {
        for b1 in 0..2 {
            for a2 in 0..2 {
                for b2 in 0..2 {
                    let a = side(a1, a2);
                    let b = side(b1, b2);
                    p[a.index()][b.index()] += pair[a1][b1] * pair[a2][b2];
                }
            }
        }
    }
    OutcomeGrid { p }
}

/// `E(α, β)` under the distinguishable-pairs model.
pub fn pairs_model_correlation(alpha: f64, beta: f64) -> f64 {
    signed_sum(&pairs_model_probabilities(
        AnalyzerSetting(alpha),
        AnalyzerSetting(beta),
    ))
}

/// `S` under the distinguishable-pairs model.
pub fn pairs_model_chsh(s: &BellSettings) -> f64 {
    let pairs = s.pairs();
    let e = pairs.map(|pair| pairs_model_correlation(pair.alpha, pair.beta));
    chsh_combination(e).abs()
}

/// Polarization correlation `-cos 2θ` of a single photon-pair singlet.
pub fn spin_half_baseline(theta_deg: f64) -> f64 {
    -(2.0 * theta_deg.to_radians()).cos()
}
