//! Two-photon polarization modes treated as spin-1 particles.
//!
//! A mode carrying two photons lives in the symmetric subspace spanned by
//! `|2H⟩`, `|HV⟩` and `|2V⟩`, labelled as the spin-1 outcomes `+1`, `0` and
//! `-1`. A [`JointState`] describes Alice's and Bob's modes together on the
//! nine-dimensional product space, with the basis order
//!
//! ```text
//! (+1,+1) (+1,0) (+1,-1) (0,+1) (0,0) (0,-1) (-1,+1) (-1,0) (-1,-1)
//! ```
//!
//! which is also the row-major layout of every [`OutcomeGrid`](crate::OutcomeGrid).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::{Complex, SMatrix, SVector};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
/// Amplitudes on the nine-dimensional Alice ⊗ Bob triplet space.
pub type Ket9 = SVector<C64, 9>;
/// Density operator on the nine-dimensional Alice ⊗ Bob triplet space.
pub type Density9 = SMatrix<C64, 9, 9>;

pub(crate) const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const EIGEN_TOL: f64 = -1e-10;

/// A spin-1 measurement outcome of one two-photon mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    /// Two horizontal photons, `|2H⟩`.
    Plus,
    /// One horizontal and one vertical photon, `|HV⟩`.
    Zero,
    /// Two vertical photons, `|2V⟩`.
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Plus, Outcome::Zero, Outcome::Minus];

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Zero => 1,
            Outcome::Minus => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Outcome> {
        Outcome::ALL.get(index).copied()
    }

    /// The spin projection: `+1`, `0` or `-1`.
    pub fn spin(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Zero => 0,
            Outcome::Minus => -1,
        }
    }

    pub fn from_spin(spin: i8) -> Option<Outcome> {
        match spin {
            1 => Some(Outcome::Plus),
            0 => Some(Outcome::Zero),
            -1 => Some(Outcome::Minus),
            _ => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Plus => f.write_str("+1"),
            Outcome::Zero => f.write_str("0"),
            Outcome::Minus => f.write_str("-1"),
        }
    }
}

/// Index of `(a, b)` in the nine-dimensional joint basis.
pub fn joint_index(a: Outcome, b: Outcome) -> usize {
    3 * a.index() + b.index()
}

/// Amplitudes of one two-photon mode in the `{|2H⟩, |HV⟩, |2V⟩}` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripletAmplitudes {
    pub a_plus: C64,
    pub a_zero: C64,
    pub a_minus: C64,
}

impl TripletAmplitudes {
    pub fn new(a_plus: C64, a_zero: C64, a_minus: C64) -> Self {
        Self {
            a_plus,
            a_zero,
            a_minus,
        }
    }

    pub fn real(a_plus: f64, a_zero: f64, a_minus: f64) -> Self {
        Self::new(a_plus.into(), a_zero.into(), a_minus.into())
    }

    pub fn get(&self, outcome: Outcome) -> C64 {
        match outcome {
            Outcome::Plus => self.a_plus,
            Outcome::Zero => self.a_zero,
            Outcome::Minus => self.a_minus,
        }
    }

    pub fn to_array(self) -> [C64; 3] {
        [self.a_plus, self.a_zero, self.a_minus]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a_plus.norm_sqr() + self.a_zero.norm_sqr() + self.a_minus.norm_sqr()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &TripletAmplitudes) -> C64 {
        self.a_plus.conj() * other.a_plus
            + self.a_zero.conj() * other.a_zero
            + self.a_minus.conj() * other.a_minus
    }

    /// `|self⟩ ⊗ |other⟩` in the joint basis order.
    pub fn tensor(&self, other: &TripletAmplitudes) -> Ket9 {
        let a = self.to_array();
        let b = other.to_array();
        Ket9::from_fn(|k, _| a[k / 3] * b[k % 3])
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Repr {
    Pure(Ket9),
    Mixed(Box<Density9>),
}

/// A validated state of Alice's and Bob's two-photon modes.
///
/// Values can only be built through constructors that check the state
/// invariants, so downstream code never re-validates.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    repr: Repr,
}

impl JointState {
    /// A pure state. The amplitudes must have unit norm; the global phase is
    /// fixed so that the `(+1,-1)` amplitude (or the first nonzero one, if
    /// that vanishes) is real and nonnegative.
    pub fn pure(amplitudes: Ket9) -> Result<Self> {
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "pure state norm is {norm}, expected 1"
            )));
        }
        Ok(Self {
            repr: Repr::Pure(canonical_phase(amplitudes)),
        })
    }

    /// A mixed state given by its density operator.
    pub fn mixed(rho: Density9) -> Result<Self> {
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite density entry".into()));
        }
        let asym = (rho - rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if asym > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "density operator is not Hermitian (max |rho - rho^dagger| = {asym:e})"
            )));
        }
        let trace = rho.trace();
        if (trace.re - 1.0).abs() > TRACE_TOL || trace.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!(
                "density operator trace is {trace}, expected 1"
            )));
        }
        let min_eig = rho
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < EIGEN_TOL {
            return Err(Error::InvalidState(format!(
                "density operator has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self {
            repr: Repr::Mixed(Box::new(rho)),
        })
    }

    /// The maximally mixed state `I/9`.
    pub fn maximally_mixed() -> Self {
        Self {
            repr: Repr::Mixed(Box::new(Density9::identity() / C64::from(9.0))),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.repr, Repr::Pure(_))
    }

    /// Amplitudes of a pure state; `None` for a mixed one.
    pub fn amplitudes(&self) -> Option<&Ket9> {
        match &self.repr {
            Repr::Pure(psi) => Some(psi),
            Repr::Mixed(_) => None,
        }
    }

    /// Amplitude of `|a, b⟩` for a pure state.
    pub fn amplitude(&self, a: Outcome, b: Outcome) -> Option<C64> {
        self.amplitudes().map(|psi| psi[joint_index(a, b)])
    }

    /// The density operator (the projector for pure states).
    pub fn density(&self) -> Density9 {
        match &self.repr {
            Repr::Pure(psi) => psi * psi.adjoint(),
            Repr::Mixed(rho) => **rho,
        }
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        match &self.repr {
            Repr::Pure(_) => 1.0,
            Repr::Mixed(rho) => (**rho * **rho).trace().re,
        }
    }

    /// `⟨v|ρ|v⟩` for a vector on the joint space.
    pub fn expectation_of_projector(&self, v: &Ket9) -> f64 {
        match &self.repr {
            Repr::Pure(psi) => v.dotc(psi).norm_sqr(),
            Repr::Mixed(rho) => v.dotc(&(**rho * v)).re,
        }
    }

    /// Applies `U_A ⊗ U_B`, where each unitary acts on one triplet space.
    pub fn transformed(&self, u_a: &SMatrix<C64, 3, 3>, u_b: &SMatrix<C64, 3, 3>) -> Self {
        let u = u_a.kronecker(u_b);
        let repr = match &self.repr {
            Repr::Pure(psi) => Repr::Pure(canonical_phase(u * psi)),
            Repr::Mixed(rho) => Repr::Mixed(Box::new(u * **rho * u.adjoint())),
        };
        Self { repr }
    }
}

fn canonical_phase(mut psi: Ket9) -> Ket9 {
    let anchor_index = joint_index(Outcome::Plus, Outcome::Minus);
    let anchor = if psi[anchor_index].norm() > NORM_TOL {
        psi[anchor_index]
    } else {
        match psi.iter().find(|z| z.norm() > NORM_TOL) {
            Some(z) => *z,
            None => return psi,
        }
    };
    let phase = anchor.conj() / anchor.norm();
    psi *= phase;
    psi
}

/// The spin-1 singlet `(|+1,-1⟩ - |0,0⟩ + |-1,+1⟩)/√3`, realized as
/// `(|2H,2V⟩ - |HV,VH⟩ + |2V,2H⟩)/√3`.
pub fn make_spin1_singlet() -> JointState {
    let amp = 1.0 / 3f64.sqrt();
    let mut psi = Ket9::zeros();
    psi[joint_index(Outcome::Plus, Outcome::Minus)] = amp.into();
    psi[joint_index(Outcome::Zero, Outcome::Zero)] = (-amp).into();
    psi[joint_index(Outcome::Minus, Outcome::Plus)] = amp.into();
    JointState {
        repr: Repr::Pure(psi),
    }
}

/// The singlet mixed with the incoherent mixture of its three terms:
///
/// `ρ = p |ψ⟩⟨ψ| + (1-p)/3 (|2H,2V⟩⟨2H,2V| + |HV,VH⟩⟨HV,VH| + |2V,2H⟩⟨2V,2H|)`.
pub fn make_noisy_state(p: f64) -> Result<JointState> {
    check_probability(p)?;
    let singlet = make_spin1_singlet();
    let mut rho = singlet.density() * C64::from(p);
    let weight = C64::from((1.0 - p) / 3.0);
    for (a, b) in [
        (Outcome::Plus, Outcome::Minus),
        (Outcome::Zero, Outcome::Zero),
        (Outcome::Minus, Outcome::Plus),
    ] {
        let k = joint_index(a, b);
        rho[(k, k)] += weight;
    }
    Ok(JointState {
        repr: Repr::Mixed(Box::new(rho)),
    })
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// Single-photon polarization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    fn bit(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// Four polarization qubits ordered (Alice photon 1, Alice photon 2,
/// Bob photon 1, Bob photon 2); the first qubit is the most significant bit
/// of the amplitude index, with `H = 0` and `V = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairProductState {
    amplitudes: [C64; 16],
}

impl PairProductState {
    pub fn new(amplitudes: [C64; 16]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "four-photon state norm is {norm}, expected 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn amplitudes(&self) -> &[C64; 16] {
        &self.amplitudes
    }

    pub fn index(a1: Polarization, a2: Polarization, b1: Polarization, b2: Polarization) -> usize {
        (a1.bit() << 3) | (a2.bit() << 2) | (b1.bit() << 1) | b2.bit()
    }

    pub fn amplitude(
        &self,
        a1: Polarization,
        a2: Polarization,
        b1: Polarization,
        b2: Polarization,
    ) -> C64 {
        self.amplitudes[Self::index(a1, a2, b1, b2)]
    }

    /// Post-selects both photons of each side into the symmetric (spin-1)
    /// subspace. Returns the renormalized triplet state and the probability
    /// weight of the projection.
    pub fn project_symmetric(&self) -> Result<(JointState, f64)> {
        // Symmetric two-photon kets over the 2-bit index (p1 p2).
        let s = FRAC_1_SQRT_2;
        let symmetric: [[f64; 4]; 3] =
            [[1.0, 0.0, 0.0, 0.0], [0.0, s, s, 0.0], [0.0, 0.0, 0.0, 1.0]];
        let mut psi = Ket9::zeros();
        for a in Outcome::ALL {
            for b in Outcome::ALL {
                let mut amp = C64::from(0.0);
                for (alice, wa) in symmetric[a.index()].iter().enumerate() {
                    for (bob, wb) in symmetric[b.index()].iter().enumerate() {
                        amp += self.amplitudes[(alice << 2) | bob] * (wa * wb);
                    }
                }
                psi[joint_index(a, b)] = amp;
            }
        }
        let weight = psi.norm_squared();
        if weight <= NORM_TOL {
            return Err(Error::InvalidState(
                "state has no weight in the symmetric subspace".into(),
            ));
        }
        psi /= C64::from(weight.sqrt());
        Ok((JointState::pure(psi)?, weight))
    }
}

/// Two independent polarization singlets `(|HV⟩ - |VH⟩)/√2`, one shared by
/// (Alice photon 1, Bob photon 1) and one by (Alice photon 2, Bob photon 2).
pub fn make_pair_product_state() -> PairProductState {
    use Polarization::{H, V};
    let pair = |a: Polarization, b: Polarization| match (a, b) {
        (H, V) => FRAC_1_SQRT_2,
        (V, H) => -FRAC_1_SQRT_2,
        _ => 0.0,
    };
    let mut amplitudes = [C64::from(0.0); 16];
    for a1 in [H, V] {
        for a2 in [H, V] {
            for b1 in [H, V] {
                for b2 in [H, V] {
                    amplitudes[PairProductState::index(a1, a2, b1, b2)] =
                        (pair(a1, b1) * pair(a2, b2)).into();
                }
            }
        }
    }
    PairProductState { amplitudes }
}
