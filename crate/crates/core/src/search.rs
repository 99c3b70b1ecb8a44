//! Derivative-free one- and multi-dimensional maximizers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
/// Stops when the bracket is narrower than `tol`; returns `(x, f(x))`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        // Ties move toward the lower end.
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // Return the best point seen in the final bracket.
    [(x1, f1), (x, fx), (x2, f2)]
        .into_iter()
        .fold(
            (x, fx),
            |best, cand| if cand.1 > best.1 { cand } else { best },
        )
}

/// Golden-section search for a minimum; see [`golden_section_max`].
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (x, fx) = golden_section_max(|x| -f(x), lo, hi, tol);
    (x, -fx)
}

/// Compass (pattern) search for a maximum. Polls `±step` along each
/// coordinate in a fixed order, moves to the first improvement and halves
/// the step when no poll improves, until the step drops below `min_step`.
pub fn pattern_search_max<F, const N: usize>(
    mut f: F,
    start: [f64; N],
    initial_step: f64,
    min_step: f64,
) -> ([f64; N], f64)
where
    F: FnMut(&[f64; N]) -> f64,
{
    let mut x = start;
    let mut fx = f(&x);
    let mut step = initial_step;
    while step >= min_step {
        let mut improved = false;
        'poll: for k in 0..N {
            for dir in [1.0, -1.0] {
                let mut y = x;
                y[k] += dir * step;
                let fy = f(&y);
                if fy > fx {
                    x = y;
                    fx = fy;
                    improved = true;
                    break 'poll;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}
