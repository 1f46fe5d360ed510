//! Derivative-free one- and multi-dimensional maximizers.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Returns `(x, f(x))` for the best point evaluated. Stops once the bracket is
/// narrower than `tol`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f2 > f1 { (x2, f2) } else { (x1, f1) };
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
            if f1 > best.1 || (f1 == best.1 && x1 < best.0) {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
            if f2 > best.1 || (f2 == best.1 && x2 < best.0) {
                best = (x2, f2);
            }
        }
    }
    best
}

/// Coarse scan of `points + 1` equally spaced values followed by golden-section
/// refinement inside the bracket around the best scanned point.
pub fn bracketed_max<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
) -> (f64, f64) {
    let step = (hi - lo) / points as f64;
    let mut best = (lo, f(lo));
    for i in 1..=points {
        let x = lo + step * i as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    let a = (best.0 - step).max(lo);
    let b = (best.0 + step).min(hi);
    let refined = golden_section_max(&mut f, a, b, tol);
    if refined.1 > best.1 {
        refined
    } else {
        best
    }
}

/// Compass search maximizing `f` over a box.
///
/// Each round polls `x +- step_i e_i` for every coordinate, moving to the best
/// strictly improving point until none improves, then halves every step.
/// Coordinates whose step is zero stay fixed.
pub fn compass_max<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    steps: &[f64],
    bounds: &[(f64, f64)],
    rounds: usize,
) -> (Vec<f64>, f64) {
    const MAX_MOVES_PER_ROUND: usize = 200;
    let mut x = start.to_vec();
    let mut fx = f(&x);
    let mut steps = steps.to_vec();
    for _ in 0..rounds {
        for _ in 0..MAX_MOVES_PER_ROUND {
            let mut best: Option<(Vec<f64>, f64)> = None;
            for i in 0..x.len() {
                if steps[i] == 0.0 {
                    continue;
                }
                for dir in [-1.0, 1.0] {
                    let mut y = x.clone();
                    y[i] = (x[i] + dir * steps[i]).clamp(bounds[i].0, bounds[i].1);
                    if y[i] == x[i] {
                        continue;
                    }
                    let fy = f(&y);
                    let incumbent = best.as_ref().map_or(fx, |b| b.1);
                    if fy > incumbent {
                        best = Some((y, fy));
                    }
                }
            }
            match best {
                Some((y, fy)) => {
                    x = y;
                    fx = fy;
                }
                None => break,
            }
        }
        steps.iter_mut().for_each(|s| *s *= 0.5);
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-9);
        assert_abs_diff_eq!(x, 0.3, epsilon = 1e-6);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn bracketed_escapes_local_peak() {
        let f = |x: f64| {
            if x < 0.5 {
                1.0 - (x - 0.1).abs()
            } else {
                2.0 - 10.0 * (x - 0.8).abs()
            }
        };
        let (x, v) = bracketed_max(f, 0.0, 1.0, 32, 1e-9);
        assert_abs_diff_eq!(x, 0.8, epsilon = 1e-7);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn compass_on_quadratic() {
        let f = |x: &[f64]| -(x[0] - 0.25).powi(2) - 2.0 * (x[1] - 0.6).powi(2);
        let (x, v) = compass_max(
            f,
            &[0.5, 0.5],
            &[0.125, 0.125],
            &[(0.0, 1.0), (0.0, 1.0)],
            20,
        );
        assert_abs_diff_eq!(x[0], 0.25, epsilon = 1e-4);
        assert_abs_diff_eq!(x[1], 0.6, epsilon = 1e-4);
        assert!(v <= 0.0);
    }

    #[test]
    fn compass_respects_frozen_coordinates() {
        let f = |x: &[f64]| -(x[0] - 0.25).powi(2) - (x[1] - 0.6).powi(2);
        let (x, _) = compass_max(f, &[0.5, 0.5], &[0.125, 0.0], &[(0.0, 1.0), (0.0, 1.0)], 10);
        assert_eq!(x[1], 0.5);
    }
}
