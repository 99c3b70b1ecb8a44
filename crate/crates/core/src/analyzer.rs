//! Rotated two-photon analyzers and the detection model.

use nalgebra::{Matrix3, SMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{JointState, Outcome, TripletAmplitudes, C64};

const CLAMP_TOL: f64 = 1e-12;

/// Polarization-rotation angle of one analyzer, in degrees.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnalyzerSetting(pub f64);

impl AnalyzerSetting {
    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    /// The angle folded into `[-90, 90)`. Outcome probabilities are
    /// 180°-periodic, so this is the canonical form for reporting.
    pub fn reported(self) -> f64 {
        (self.0 + 90.0).rem_euclid(180.0) - 90.0
    }
}

impl From<f64> for AnalyzerSetting {
    fn from(deg: f64) -> Self {
        AnalyzerSetting(deg)
    }
}

/// Two-photon detection efficiency of the `±1` outcomes relative to the `0`
/// outcome, one factor per side. The `0` outcome has efficiency 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionModel {
    pub eta_a: f64,
    pub eta_b: f64,
}

impl Default for DetectionModel {
    fn default() -> Self {
        Self {
            eta_a: 0.431,
            eta_b: 0.434,
        }
    }
}

impl DetectionModel {
    pub const LOSSLESS: DetectionModel = DetectionModel {
        eta_a: 1.0,
        eta_b: 1.0,
    };

    pub fn new(eta_a: f64, eta_b: f64) -> Result<Self> {
        let det = Self { eta_a, eta_b };
        det.validate()?;
        Ok(det)
    }

    pub fn validate(&self) -> Result<()> {
        for eta in [self.eta_a, self.eta_b] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::InvalidEfficiency(eta));
            }
        }
        Ok(())
    }

    /// Relative detection weight of the joint outcome `(a, b)`.
    pub fn weight(&self, a: Outcome, b: Outcome) -> f64 {
        let side = |o: Outcome, eta: f64| if o == Outcome::Zero { 1.0 } else { eta };
        side(a, self.eta_a) * side(b, self.eta_b)
    }
}

/// Joint outcome probabilities `p[A][B]`, rows and columns in the order
/// `+1, 0, -1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeGrid {
    pub p: [[f64; 3]; 3],
}

impl OutcomeGrid {
    pub fn new(p: [[f64; 3]; 3]) -> Self {
        Self { p }
    }

    pub fn get(&self, a: Outcome, b: Outcome) -> f64 {
        self.p[a.index()][b.index()]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().flatten().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Outcome, Outcome, f64)> + '_ {
        Outcome::ALL.into_iter().flat_map(move |a| {
            Outcome::ALL
                .into_iter()
                .map(move |b| (a, b, self.get(a, b)))
        })
    }

    /// Largest element-wise difference to another grid.
    pub fn max_abs_diff(&self, other: &OutcomeGrid) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|((_, _, x), (_, _, y))| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// The three outcome states `|2H_α⟩`, `|H_αV_α⟩`, `|2V_α⟩` of an analyzer
/// rotated by `α`, expressed in the unrotated `{|2H⟩, |HV⟩, |2V⟩}` basis.
///
/// They are the symmetric two-photon products of
/// `|H_α⟩ = cos α|H⟩ + sin α|V⟩` and `|V_α⟩ = -sin α|H⟩ + cos α|V⟩`.
pub fn outcome_vectors(setting: AnalyzerSetting) -> [TripletAmplitudes; 3] {
    let (s, c) = setting.radians().sin_cos();
    let r2 = std::f64::consts::SQRT_2;
    [
        TripletAmplitudes::real(c * c, r2 * c * s, s * s),
        TripletAmplitudes::real(-r2 * c * s, c * c - s * s, r2 * c * s),
        TripletAmplitudes::real(s * s, -r2 * c * s, c * c),
    ]
}

/// The unitary on one triplet space whose columns are [`outcome_vectors`].
pub fn triplet_rotation(setting: AnalyzerSetting) -> SMatrix<C64, 3, 3> {
    let v = outcome_vectors(setting);
    Matrix3::from_fn(|row, col| v[col].to_array()[row])
}

/// Rotates Alice's mode by `alpha` and Bob's by `beta`.
pub fn rotate_state(
    state: &JointState,
    alpha: AnalyzerSetting,
    beta: AnalyzerSetting,
) -> JointState {
    state.transformed(&triplet_rotation(alpha), &triplet_rotation(beta))
}

/// `p[A][B] = ⟨A_α ⊗ B_β| ρ |A_α ⊗ B_β⟩`.
///
/// Round-off negatives above `-1e-12` are clamped to zero; anything more
/// negative is an error.
pub fn joint_probabilities(
    state: &JointState,
    alpha: AnalyzerSetting,
    beta: AnalyzerSetting,
) -> Result<OutcomeGrid> {
    let va = outcome_vectors(alpha);
    let vb = outcome_vectors(beta);
    let mut p = [[0.0; 3]; 3];
    for a in Outcome::ALL {
        for b in Outcome::ALL {
            let v = va[a.index()].tensor(&vb[b.index()]);
            let prob = state.expectation_of_projector(&v);
            p[a.index()][b.index()] = clamp_probability(prob, a, b)?;
        }
    }
    Ok(OutcomeGrid { p })
}

fn clamp_probability(value: f64, a: Outcome, b: Outcome) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value > -CLAMP_TOL {
        Ok(0.0)
    } else {
        Err(Error::NegativeProbability {
            a: a.spin(),
            b: b.spin(),
            value,
        })
    }
}

/// Forward detection model: raw counts expected per interval when the
/// efficiency-corrected total is `corrected_total`.
pub fn expected_counts(
    grid: &OutcomeGrid,
    det: &DetectionModel,
    corrected_total: f64,
) -> Result<[[f64; 3]; 3]> {
    if !corrected_total.is_finite() || corrected_total <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "corrected total must be positive and finite, got {corrected_total}"
        )));
    }
    det.validate()?;
    let mut raw = [[0.0; 3]; 3];
    for (a, b, p) in grid.iter() {
        raw[a.index()][b.index()] = corrected_total * p * det.weight(a, b);
    }
    Ok(raw)
}
