//! Brute-force oracles on the 16-dimensional four-photon space. They share
//! nothing with the library beyond reading the four-photon amplitudes.

#![allow(dead_code)]

use spin1bell::make_pair_product_state;

/// `[H_α, V_α]` in `(H, V)` components.
pub fn photon_basis(angle_deg: f64) -> [[f64; 2]; 2] {
    let (s, c) = angle_deg.to_radians().sin_cos();
    [[c, s], [-s, c]]
}

/// Real amplitudes of the product of two photon-pair singlets, index
/// `a1 a2 b1 b2` with `H = 0`.
pub fn four_photon_amplitudes() -> [f64; 16] {
    let state = make_pair_product_state();
    let mut out = [0.0; 16];
    for (o, z) in out.iter_mut().zip(state.amplitudes()) {
        assert_eq!(z.im, 0.0);
        *o = z.re;
    }
    out
}

fn bit(index: usize, qubit: usize) -> usize {
    (index >> (3 - qubit)) & 1
}

/// `⟨x1 x2 y1 y2|ψ⟩` for single-photon basis choices in rotated frames.
fn rotated_amplitude(
    psi: &[f64; 16],
    alice: [[f64; 2]; 2],
    bob: [[f64; 2]; 2],
    x: [usize; 4],
) -> f64 {
    let mut amp = 0.0;
    for (k, &v) in psi.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        amp += alice[x[0]][bit(k, 0)]
            * alice[x[1]][bit(k, 1)]
            * bob[x[2]][bit(k, 2)]
            * bob[x[3]][bit(k, 3)]
            * v;
    }
    amp
}

/// Outcome index of a side from its two photons: HH → +1 (0), mixed → 0 (1),
/// VV → -1 (2).
fn side_outcome(first: usize, second: usize) -> usize {
    first + second
}

/// Joint spin-1 outcome grid of distinguishable photon pairs, by
/// enumerating all 16 four-photon detection events.
pub fn pairs_grid_oracle(alpha: f64, beta: f64) -> [[f64; 3]; 3] {
    let psi = four_photon_amplitudes();
    let (ab, bb) = (photon_basis(alpha), photon_basis(beta));
    let mut grid = [[0.0; 3]; 3];
    for event in 0..16 {
        let x = [bit(event, 0), bit(event, 1), bit(event, 2), bit(event, 3)];
        let p = rotated_amplitude(&psi, ab, bb, x).powi(2);
        grid[side_outcome(x[0], x[1])][side_outcome(x[2], x[3])] += p;
    }
    grid
}

pub fn signed_correlation(grid: &[[f64; 3]; 3]) -> f64 {
    let v = [1.0, -1.0, 1.0];
    let mut e = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            e += v[i] * v[j] * grid[i][j];
        }
    }
    e
}

/// Projects the four-photon state onto (symmetric on Alice's two photons) ⊗
/// (symmetric on Bob's) with an explicit 16×16 projector, then measures
/// the rotated symmetric two-photon states. Returns the post-selected grid
/// and the projection weight.
pub fn symmetric_postselection_oracle(alpha: f64, beta: f64) -> ([[f64; 3]; 3], f64) {
    let psi = four_photon_amplitudes();
    // Two-qubit symmetric projector: swap-average, (1 + SWAP)/2.
    let swap = |i: usize| ((i & 1) << 1) | (i >> 1);
    let sym2 = |i: usize, j: usize| {
        let mut v = 0.0;
        if i == j {
            v += 0.5;
        }
        if swap(i) == j {
            v += 0.5;
        }
        v
    };
    let mut projected = [0.0; 16];
    for (row, out) in projected.iter_mut().enumerate() {
        for (col, &amp) in psi.iter().enumerate() {
            let (ra, rb) = (row >> 2, row & 3);
            let (ca, cb) = (col >> 2, col & 3);
            *out += sym2(ra, ca) * sym2(rb, cb) * amp;
        }
    }
    let weight: f64 = projected.iter().map(|a| a * a).sum();

    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let two_photon = |basis: [[f64; 2]; 2]| -> [[f64; 4]; 3] {
        let prod = |x: usize, y: usize| -> [f64; 4] {
            let mut v = [0.0; 4];
            for p in 0..2 {
                for q in 0..2 {
                    v[(p << 1) | q] = basis[x][p] * basis[y][q];
                }
            }
            v
        };
        let hh = prod(0, 0);
        let hv = prod(0, 1);
        let vh = prod(1, 0);
        let vv = prod(1, 1);
        let mut mixed = [0.0; 4];
        for k in 0..4 {
            mixed[k] = r2 * (hv[k] + vh[k]);
        }
        [hh, mixed, vv]
    };
    let (ka, kb) = (
        two_photon(photon_basis(alpha)),
        two_photon(photon_basis(beta)),
    );
    let mut grid = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut amp = 0.0;
            for (k, &v) in projected.iter().enumerate() {
                amp += ka[i][k >> 2] * kb[j][k & 3] * v;
            }
            grid[i][j] = amp * amp / weight;
        }
    }
    (grid, weight)
}
