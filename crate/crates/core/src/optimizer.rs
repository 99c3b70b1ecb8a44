//! Maximizing `S` over analyzer settings.
//!
//! Equally spaced settings `Δφ = β - α = α' - β = β' - α'` placed
//! symmetrically around `center` give, for the pure singlet,
//!
//! ```text
//! S(Δφ) = 2/3 + 2 cos 4Δφ - (2/3) cos 12Δφ
//! ```
//!
//! with its maximum `≈ 2.5523` at `Δφ = 11.25°`. Noise moves the optimum to
//! smaller `Δφ`.

use serde::Serialize;

use crate::bell::{chsh, chsh_combination, correlation, BellSettings};
use crate::error::{Error, Result};
use crate::noisevis::visibility;
use crate::qstate::{check_probability, make_noisy_state, JointState};
use crate::search::{golden_section_max, pattern_search_max};

const DPHI_GRID_DEG: f64 = 0.25;
const DPHI_MAX_DEG: f64 = 45.0;
const DPHI_TOL_DEG: f64 = 1e-4;
const TIE_TOL: f64 = 1e-9;
const FREE_GRID_DEG: f64 = 2.0;
const FREE_MIN_STEP_DEG: f64 = 1e-3;
const FREE_STARTS: usize = 8;

/// Equally spaced settings around `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetricSettings {
    pub dphi: f64,
    pub center: f64,
}

impl SymmetricSettings {
    pub fn new(dphi: f64) -> Self {
        Self { dphi, center: 0.0 }
    }

    pub fn with_center(dphi: f64, center: f64) -> Self {
        Self { dphi, center }
    }

    /// `(α, α', β, β') = (c - 3Δφ/2, c + Δφ/2, c - Δφ/2, c + 3Δφ/2)`.
    pub fn to_bell(self) -> BellSettings {
        let (c, d) = (self.center, self.dphi);
        BellSettings::new(c - 1.5 * d, c + 0.5 * d, c - 0.5 * d, c + 1.5 * d)
    }
}

/// One point of an `S`-versus-`Δφ` curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub dphi: f64,
    pub s: f64,
    pub visibility: f64,
}

/// Inclusive `start:end:step` range of `Δφ` values in degrees.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DphiRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl DphiRange {
    pub fn new(start: f64, end: f64, step: f64) -> Result<Self> {
        if step <= 0.0 || !step.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "step must be positive, got {step}"
            )));
        }
        if !start.is_finite() || !end.is_finite() || end < start {
            return Err(Error::InvalidArgument(format!(
                "empty dphi range {start}:{end}"
            )));
        }
        Ok(Self { start, end, step })
    }

    /// Parses `start:end:step`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<f64> = text
            .split(':')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad range component `{s}`")))
            })
            .collect::<Result<_>>()?;
        match parts[..] {
            [start, end, step] => Self::new(start, end, step),
            _ => Err(Error::InvalidArgument(format!(
                "expected start:end:step, got `{text}`"
            ))),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// `S` for equally spaced settings.
pub fn symmetric_chsh(state: &JointState, settings: SymmetricSettings) -> Result<f64> {
    chsh(state, &settings.to_bell())
}

/// The `S(Δφ)` curve of the noisy singlet at center 0.
pub fn scan_dphi(p: f64, range: &DphiRange) -> Result<Vec<CurvePoint>> {
    let state = make_noisy_state(p)?;
    let vis = visibility(p)?;
    range
        .values()
        .into_iter()
        .map(|dphi| {
            Ok(CurvePoint {
                dphi,
                s: symmetric_chsh(&state, SymmetricSettings::new(dphi))?,
                visibility: vis,
            })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetricOptimum {
    pub p: f64,
    pub dphi: f64,
    pub s: f64,
}

/// Best `Δφ ∈ (0°, 45°]` for the noisy singlet at center 0: a 0.25° grid,
/// then golden-section refinement around the best grid point. Among grid
/// points within `1e-9` of the maximum the smallest `Δφ` wins.
pub fn optimize_symmetric(p: f64) -> Result<SymmetricOptimum> {
    let state = make_noisy_state(p)?;
    optimize_symmetric_state(&state).map(|(dphi, s)| SymmetricOptimum { p, dphi, s })
}

/// [`optimize_symmetric`] for an arbitrary state; returns `(Δφ*, S*)`.
pub fn optimize_symmetric_state(state: &JointState) -> Result<(f64, f64)> {
    let n = (DPHI_MAX_DEG / DPHI_GRID_DEG).round() as usize;
    let values = (1..=n)
        .map(|i| {
            let dphi = i as f64 * DPHI_GRID_DEG;
            symmetric_chsh(state, SymmetricSettings::new(dphi)).map(|s| (dphi, s))
        })
        .collect::<Result<Vec<_>>>()?;
    let top = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let (best_dphi, best_s) = *values
        .iter()
        .find(|v| v.1 >= top - TIE_TOL)
        .expect("grid is nonempty");
    let lo = (best_dphi - DPHI_GRID_DEG).max(0.0);
    let hi = (best_dphi + DPHI_GRID_DEG).min(DPHI_MAX_DEG);
    let (dphi, s) = golden_section_max(
        |d| symmetric_chsh(state, SymmetricSettings::new(d)).unwrap_or(f64::NEG_INFINITY),
        lo,
        hi,
        DPHI_TOL_DEG,
    );
    if s > best_s {
        Ok((dphi, s))
    } else {
        Ok((best_dphi, best_s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FreeOptimum {
    pub settings: BellSettings,
    pub s: f64,
    /// Mean of the four angles.
    pub center: f64,
}

fn fold_quarter_turn(angle: f64) -> f64 {
    (angle + 45.0).rem_euclid(90.0) - 45.0
}

/// Maximizes `S` over all four angles.
///
/// Rotating one analyzer by 90° swaps its `+1` and `-1` outcomes, which
/// carry the same observable value, so every correlation is 90°-periodic in
/// each angle and the search runs over `[-45°, 45°)^4`. A 2° grid is built
/// from a table of pairwise correlations, then the best few grid points are
/// refined by pattern search.
pub fn optimize_free(state: &JointState) -> Result<FreeOptimum> {
    let n = (90.0 / FREE_GRID_DEG).round() as usize;
    let grid: Vec<f64> = (0..n).map(|i| -45.0 + i as f64 * FREE_GRID_DEG).collect();
    let mut table = vec![0.0; n * n];
    for (i, &a) in grid.iter().enumerate() {
        for (j, &b) in grid.iter().enumerate() {
            table[i * n + j] = correlation(state, a, b)?;
        }
    }
    let e = |i: usize, j: usize| table[i * n + j];

    // Keep the best few grid points, strictly ordered by S then index.
    let mut best: Vec<(f64, [usize; 4])> = Vec::with_capacity(FREE_STARTS + 1);
    for a in 0..n {
        for ap in 0..n {
            for b in 0..n {
                for bp in 0..n {
                    let s = chsh_combination([e(a, b), e(a, bp), e(ap, b), e(ap, bp)]).abs();
                    if best.len() < FREE_STARTS || s > best[best.len() - 1].0 {
                        let pos = best.iter().position(|c| s > c.0).unwrap_or(best.len());
                        best.insert(pos, (s, [a, ap, b, bp]));
                        best.truncate(FREE_STARTS);
                    }
                }
            }
        }
    }

    let objective = |x: &[f64; 4]| {
        chsh(state, &BellSettings::new(x[0], x[1], x[2], x[3])).unwrap_or(f64::NEG_INFINITY)
    };
    let mut optimum: Option<([f64; 4], f64)> = None;
    for (_, idx) in &best {
        let start = idx.map(|i| grid[i]);
        let (x, s) = pattern_search_max(objective, start, FREE_GRID_DEG, FREE_MIN_STEP_DEG);
        if optimum.is_none_or(|(_, s_best)| s > s_best + TIE_TOL) {
            optimum = Some((x, s));
        }
    }
    let (x, s) = optimum.expect("at least one start");
    let x = x.map(fold_quarter_turn);
    Ok(FreeOptimum {
        settings: BellSettings::new(x[0], x[1], x[2], x[3]),
        s,
        center: x.iter().sum::<f64>() / 4.0,
    })
}

/// Smallest `p` whose symmetric optimum exceeds the local bound, found by
/// bisection to `1e-4`.
pub fn violation_threshold() -> Result<f64> {
    let violates = |p: f64| -> Result<bool> { Ok(optimize_symmetric(p)?.s > 2.0 + TIE_TOL) };
    let (mut lo, mut hi) = (0.0, 1.0);
    if violates(lo)? {
        return Ok(lo);
    }
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if violates(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    check_probability(p)?;
    Ok(p)
}
