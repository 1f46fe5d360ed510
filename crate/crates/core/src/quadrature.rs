//! Adaptive Simpson quadrature over piecewise-smooth integrands.
//!
//! Callers pass the known kinks and jumps of the integrand as breakpoints; each
//! smooth piece is then integrated separately so Simpson's rule converges at
//! full order.

const MAX_DEPTH: u32 = 48;

fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, a, m);
    let right = simpson(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    adapt(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

/// Integrates `f` over `[a, b]`, splitting at every breakpoint inside the
/// interval. The tolerance budget is shared across pieces by length.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let width = b - a;
    cuts.windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol * (w[1] - w[0]) / width))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_on_cubics() {
        let v = adaptive_simpson(&|x: f64| x * x * x - 2.0 * x, 0.0, 2.0, 1e-12);
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn smooth_transcendental() {
        let v = adaptive_simpson(&f64::sin, 0.0, std::f64::consts::PI, 1e-10);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn jump_with_breakpoint_is_exact() {
        let step = |x: f64| if x < 0.3 { 1.0 } else { 5.0 };
        let v = integrate_piecewise(&step, 0.0, 1.0, &[0.3], 1e-10);
        assert_abs_diff_eq!(v, 0.3 + 3.5, epsilon = 1e-12);
    }

    #[test]
    fn kink_with_breakpoint() {
        let f = |x: f64| (x - 0.37).abs();
        let v = integrate_piecewise(&f, 0.0, 1.0, &[0.37, 5.0, -1.0], 1e-12);
        assert_abs_diff_eq!(
            v,
            0.5 * (0.37f64.powi(2) + 0.63f64.powi(2)),
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate_piecewise(&|_| 1.0, 1.0, 1.0, &[], 1e-9), 0.0);
    }
}
