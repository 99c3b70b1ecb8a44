//! Fringe scans and the entanglement visibility of the noisy singlet.
//!
//! A fringe is recorded by fixing Alice's analyzer and rotating Bob's,
//! counting `(+1, -1)` coincidences (two `H` at Alice, two `V` at Bob in the
//! respective rotated bases). Its visibility at a fixed orientation is the
//! contrast between aligned and crossed analyzers,
//!
//! ```text
//! V(φ) = (P(φ, φ) - P(φ, φ + 90°)) / (P(φ, φ) + P(φ, φ + 90°))
//! ```
//!
//! and the entanglement visibility is the lowest `V(φ)` over `φ`. For the
//! noisy singlet the minimum sits at `φ = 45°`, where `V = 4p / (3 + p)`.
//! At `φ = 0°` the mixture shares the pure-state fringe and `V = 1`, which
//! is why the minimum over orientations matters.

use std::io::Write;

use crate::analyzer::{joint_probabilities, AnalyzerSetting};
use crate::error::{Error, Result};
use crate::qstate::{check_probability, make_noisy_state, JointState, Outcome};
use crate::search::{golden_section_max, golden_section_min};

const FIXED_ANGLE_GRID_DEG: f64 = 1.0;
const REFINE_TOL_DEG: f64 = 1e-4;
const BISECTION_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Alice,
    Bob,
}

/// Coincidence probability versus the scanned analyzer angle.
#[derive(Clone, Debug, PartialEq)]
pub struct FringeScan {
    pub fixed_side: Side,
    pub fixed_angle: f64,
    pub fixed_outcome: Outcome,
    pub scanned_outcome: Outcome,
    /// `(scan angle in degrees, probability)`, angles strictly increasing.
    pub samples: Vec<(f64, f64)>,
}

impl FringeScan {
    pub fn max(&self) -> (f64, f64) {
        self.samples
            .iter()
            .copied()
            .fold(
                (f64::NAN, f64::NEG_INFINITY),
                |m, s| if s.1 > m.1 { s } else { m },
            )
    }

    pub fn min(&self) -> (f64, f64) {
        self.samples.iter().copied().fold(
            (f64::NAN, f64::INFINITY),
            |m, s| if s.1 < m.1 { s } else { m },
        )
    }

    /// `(max - min) / (max + min)` over the sampled points.
    pub fn contrast(&self) -> f64 {
        contrast(self.max().1, self.min().1)
    }

    /// Writes `theta_deg,probability` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["theta_deg", "probability"])?;
        for (theta, prob) in &self.samples {
            w.write_record([theta.to_string(), prob.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn contrast(max: f64, min: f64) -> f64 {
    if max + min <= 0.0 {
        0.0
    } else {
        (max - min) / (max + min)
    }
}

/// Probability of `fixed_outcome` on Alice at `fixed_angle` together with
/// `scanned_outcome` on Bob at `theta`.
pub fn fringe_probability(
    state: &JointState,
    fixed_angle: f64,
    theta: f64,
    fixed_outcome: Outcome,
    scanned_outcome: Outcome,
) -> Result<f64> {
    let grid = joint_probabilities(state, AnalyzerSetting(fixed_angle), AnalyzerSetting(theta))?;
    Ok(grid.get(fixed_outcome, scanned_outcome))
}

fn check_step(step: f64) -> Result<()> {
    if step > 0.0 && step <= 5.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "scan step must be in (0, 5] degrees, got {step}"
        )))
    }
}

/// Scans Bob's analyzer over `[-90°, 90°]` with Alice fixed, for an arbitrary
/// pair of outcomes.
pub fn fringe_scan_with(
    state: &JointState,
    fixed_angle: f64,
    step: f64,
    fixed_outcome: Outcome,
    scanned_outcome: Outcome,
) -> Result<FringeScan> {
    check_step(step)?;
    if !fixed_angle.is_finite() {
        return Err(Error::InvalidArgument("fixed angle must be finite".into()));
    }
    let n = (180.0 / step + 1e-9).floor() as usize;
    let samples = (0..=n)
        .map(|i| {
            let theta = -90.0 + i as f64 * step;
            fringe_probability(state, fixed_angle, theta, fixed_outcome, scanned_outcome)
                .map(|prob| (theta, prob))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FringeScan {
        fixed_side: Side::Alice,
        fixed_angle,
        fixed_outcome,
        scanned_outcome,
        samples,
    })
}

/// The `(+1, -1)` fringe of the noisy singlet.
pub fn fringe_scan(p: f64, fixed_angle: f64, step: f64) -> Result<FringeScan> {
    let state = make_noisy_state(p)?;
    fringe_scan_with(&state, fixed_angle, step, Outcome::Plus, Outcome::Minus)
}

/// The `(0, 0)` fringe of the noisy singlet, for diagnostics.
pub fn zero_zero_fringe_scan(p: f64, fixed_angle: f64, step: f64) -> Result<FringeScan> {
    let state = make_noisy_state(p)?;
    fringe_scan_with(&state, fixed_angle, step, Outcome::Zero, Outcome::Zero)
}

/// Aligned-versus-crossed contrast of the `(+1, -1)` fringe at one fixed
/// orientation.
pub fn fringe_visibility_at(state: &JointState, fixed_angle: f64) -> Result<f64> {
    let aligned = fringe_probability(
        state,
        fixed_angle,
        fixed_angle,
        Outcome::Plus,
        Outcome::Minus,
    )?;
    let crossed = fringe_probability(
        state,
        fixed_angle,
        fixed_angle + 90.0,
        Outcome::Plus,
        Outcome::Minus,
    )?;
    Ok(contrast(aligned, crossed))
}

/// True `(max - min)/(max + min)` of the `(+1, -1)` fringe at one fixed
/// orientation, with extrema located on a 0.5° grid and refined by
/// golden-section search.
pub fn extremal_contrast(state: &JointState, fixed_angle: f64) -> Result<f64> {
    let step = 0.5;
    let scan = fringe_scan_with(state, fixed_angle, step, Outcome::Plus, Outcome::Minus)?;
    let prob = |theta: f64| {
        fringe_probability(state, fixed_angle, theta, Outcome::Plus, Outcome::Minus)
            .unwrap_or(f64::NAN)
    };
    let (t_max, p_max) = scan.max();
    let (t_min, p_min) = scan.min();
    let (_, refined_max) = golden_section_max(prob, t_max - step, t_max + step, REFINE_TOL_DEG);
    let (_, refined_min) = golden_section_min(prob, t_min - step, t_min + step, REFINE_TOL_DEG);
    Ok(contrast(refined_max.max(p_max), refined_min.min(p_min)))
}

/// Closed form of [`visibility`] for the noisy singlet.
pub fn visibility_closed_form(p: f64) -> f64 {
    4.0 * p / (3.0 + p)
}

/// Entanglement visibility: the lowest fringe visibility over Alice's fixed
/// orientation in `[0°, 90°]`, searched on a 1° grid and refined near the
/// minimum.
pub fn visibility(p: f64) -> Result<f64> {
    let state = make_noisy_state(p)?;
    visibility_of(&state)
}

/// [`visibility`] for an arbitrary state.
pub fn visibility_of(state: &JointState) -> Result<f64> {
    let n = (90.0 / FIXED_ANGLE_GRID_DEG).round() as usize;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..=n {
        let angle = i as f64 * FIXED_ANGLE_GRID_DEG;
        let v = fringe_visibility_at(state, angle)?;
        if v < best.1 {
            best = (angle, v);
        }
    }
    let lo = (best.0 - FIXED_ANGLE_GRID_DEG).max(0.0);
    let hi = (best.0 + FIXED_ANGLE_GRID_DEG).min(90.0);
    let (_, refined) = golden_section_min(
        |angle| fringe_visibility_at(state, angle).unwrap_or(f64::INFINITY),
        lo,
        hi,
        REFINE_TOL_DEG,
    );
    Ok(refined.min(best.1))
}

/// Inverts [`visibility`] by bisection on `p ∈ [0, 1]`.
pub fn p_from_visibility(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::VisibilityDomain(v));
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if visibility(hi)? <= v {
        return Ok(hi);
    }
    if visibility(lo)? >= v {
        return Ok(lo);
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if visibility(mid)? < v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    check_probability(p)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_fringe_is_cos4() {
        let scan = fringe_scan(1.0, 0.0, 1.0).unwrap();
        assert_eq!(scan.samples.len(), 181);
        for (theta, prob) in &scan.samples {
            let expected = theta.to_radians().cos().powi(4) / 3.0;
            assert!((prob - expected).abs() < 1e-14, "{theta}: {prob}");
        }
        let (t, m) = scan.max();
        assert_eq!(t, 0.0);
        assert!((m - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn noisy_fringe_at_45_degrees() {
        let p = 0.69;
        let scan = fringe_scan(p, 45.0, 0.5).unwrap();
        // P(θ) = (p/3)cos^4(45° - θ) + ((1-p)/3)(1/4 + sin^2(2θ)/8)
        for (theta, prob) in &scan.samples {
            let t = theta.to_radians();
            let expected = p / 3.0 * (std::f64::consts::FRAC_PI_4 - t).cos().powi(4)
                + (1.0 - p) / 3.0 * (0.25 + (2.0 * t).sin().powi(2) / 8.0);
            assert!((prob - expected).abs() < 1e-14);
        }
        let (t_max, max) = scan.max();
        assert_eq!(t_max, 45.0);
        assert!((max - 0.268_75).abs() < 1e-12);
        let at_minus_45 = scan.samples.iter().find(|s| s.0 == -45.0).unwrap().1;
        assert!((at_minus_45 - 0.038_75).abs() < 1e-12);
    }

    #[test]
    fn fixed_angle_zero_has_unit_visibility() {
        for p in [0.0, 0.3, 0.69, 1.0] {
            let state = make_noisy_state(p).unwrap();
            assert!((fringe_visibility_at(&state, 0.0).unwrap() - 1.0).abs() < 1e-12);
            let scan = fringe_scan(p, 0.0, 0.5).unwrap();
            assert!((scan.contrast() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn visibility_values() {
        assert!((visibility(1.0).unwrap() - 1.0).abs() < 1e-12);
        let v = visibility(0.69).unwrap();
        assert!((v - 0.748).abs() < 5e-4, "{v}");
        assert!((v - visibility_closed_form(0.69)).abs() < 1e-10);
        assert!(visibility(0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn inverse_visibility() {
        assert!((p_from_visibility(0.75).unwrap() - 9.0 / 13.0).abs() < 1e-6);
        assert!((p_from_visibility(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((p_from_visibility(0.4).unwrap() - 1.0 / 3.0).abs() < 1e-6);
        assert!(matches!(
            p_from_visibility(1.2),
            Err(Error::VisibilityDomain(_))
        ));
        assert!(matches!(
            p_from_visibility(-0.1),
            Err(Error::VisibilityDomain(_))
        ));
        assert!(p_from_visibility(f64::NAN).is_err());
    }

    #[test]
    fn true_extrema_differ_from_aligned_crossed() {
        // The crossed orientation is a local maximum of the mixture term, so
        // the fringe's true minimum is lower and its contrast higher.
        let state = make_noisy_state(0.69).unwrap();
        let true_contrast = extremal_contrast(&state, 45.0).unwrap();
        let aligned_crossed = fringe_visibility_at(&state, 45.0).unwrap();
        assert!(true_contrast > aligned_crossed + 0.01);
        assert!((true_contrast - 0.7615).abs() < 5e-4, "{true_contrast}");
    }

    #[test]
    fn bad_arguments() {
        assert!(fringe_scan(0.5, 0.0, 0.0).is_err());
        assert!(fringe_scan(0.5, 0.0, 6.0).is_err());
        assert!(fringe_scan(1.1, 0.0, 1.0).is_err());
        assert!(visibility(-0.2).is_err());
    }

    #[test]
    fn csv_output() {
        let mut buf = Vec::new();
        fringe_scan(1.0, 0.0, 5.0)
            .unwrap()
            .write_csv(&mut buf)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("theta_deg,probability"));
        assert_eq!(lines.count(), 37);
    }
}
