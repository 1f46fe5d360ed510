//! Single-customer take-it-or-leave-it pricing.

use crate::error::{Error, Result};
use crate::valuation::ValuationDistribution;

/// Number of grid intervals scanned for sign changes of the revenue derivative.
pub const GRID_INTERVALS: usize = 2048;
/// Bisection tolerance in price.
pub const PRICE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinglePriceSolution {
    pub price: f64,
    pub expected_revenue: f64,
    /// `|p - (1 - F(p)) / f(p)|`
    pub fixed_point_residual: f64,
    /// `|1 - F(p) - p f(p)|`
    pub derivative_residual: f64,
}

/// Expected revenue `p (1 - F(p))` of a one-time offer at price `p`.
pub fn expected_revenue_single(dist: &ValuationDistribution, price: f64) -> Result<f64> {
    if !(price >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "price must be nonnegative, got {price}"
        )));
    }
    Ok(price * dist.survival_at(price))
}

/// Derivative of the single-offer revenue, `1 - F(p) - p f(p)`, for `p` in `[0, M]`.
pub fn revenue_derivative(dist: &ValuationDistribution, price: f64) -> Result<f64> {
    if !(price >= 0.0 && price <= dist.upper_bound()) {
        return Err(Error::InvalidParameter(format!(
            "price {price} lies outside the support [0, {}]",
            dist.upper_bound()
        )));
    }
    Ok(derivative(dist, price))
}

fn derivative(dist: &ValuationDistribution, p: f64) -> f64 {
    1.0 - dist.cdf_at(p) - p * dist.pdf_at(p)
}

fn bisect_root(dist: &ValuationDistribution, mut lo: f64, mut hi: f64) -> f64 {
    let mut g_lo = derivative(dist, lo);
    while hi - lo > PRICE_TOL {
        let mid = 0.5 * (lo + hi);
        let g_mid = derivative(dist, mid);
        if g_mid == 0.0 {
            return mid;
        }
        if (g_mid > 0.0) == (g_lo > 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Optimal single price: every sign change of the revenue derivative on a
/// uniform grid is refined by bisection, and the critical point with the
/// highest revenue wins (ties go to the smaller price).
pub fn optimal_single_price(dist: &ValuationDistribution) -> SinglePriceSolution {
    let m = dist.upper_bound();
    let grid: Vec<(f64, f64)> = (0..=GRID_INTERVALS)
        .map(|i| {
            let p = m * i as f64 / GRID_INTERVALS as f64;
            (p, derivative(dist, p))
        })
        .collect();

    let mut critical = Vec::new();
    for (i, w) in grid.windows(2).enumerate() {
        let ((p0, g0), (p1, g1)) = (w[0], w[1]);
        if g0 == 0.0 && i > 0 {
            critical.push(p0);
        } else if g0 * g1 < 0.0 {
            critical.push(bisect_root(dist, p0, p1));
        }
    }

    let mut best: Option<(f64, f64)> = None;
    for p in critical {
        let u = p * dist.survival_at(p);
        match best {
            Some((bp, bu)) if u < bu || (u == bu && p >= bp) => {}
            _ => best = Some((p, u)),
        }
    }
    // g(0) = 1 and g(M) = -M f(M) < 0, so at least one sign change exists.
    let (price, expected_revenue) = best.expect("revenue derivative changes sign on (0, M)");
    SinglePriceSolution {
        price,
        expected_revenue,
        fixed_point_residual: (price - dist.survival_at(price) / dist.pdf_at(price)).abs(),
        derivative_residual: derivative(dist, price).abs(),
    }
}
