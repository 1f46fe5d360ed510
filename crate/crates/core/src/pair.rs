//! Two-customer bundles: exact expected revenue, the epsilon-offer that beats
//! optimal separate pricing, its five-region decomposition of the valuation
//! quadrant, and offer optimization.
//!
//! For a pair, realized revenue is piecewise constant in `(V_1, V_2)`, so the
//! expected revenue reduces to one-dimensional integrals over `v_1` with the
//! tail probabilities in `v_2` taken analytically from the CDF.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanism::{capped_value, BundleOffer, ItemPrice};
use crate::montecarlo::{estimate_revenue, McEstimate};
use crate::quadrature::integrate_piecewise;
use crate::search::{bracketed_max, compass_max};
use crate::single::optimal_single_price;
use crate::valuation::ValuationDistribution;

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_EPS_GRID: [f64; 5] = [0.01, 0.02, 0.05, 0.1, 0.2];
/// Strict-improvement margin for the epsilon-offer check.
pub const IMPROVEMENT_TOL: f64 = 1e-6;
pub const GRID_POINTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairRevenueBreakdown {
    pub total: f64,
    /// `b * P[accept]`
    pub bundle_part: f64,
    pub solo_part_1: f64,
    pub solo_part_2: f64,
    pub accept_probability: f64,
}

fn check_pair(offer: &BundleOffer) -> Result<()> {
    if offer.len() != 2 {
        return Err(Error::InvalidParameter(format!(
            "pair evaluation needs a 2-customer offer, got {}",
            offer.len()
        )));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

/// `P[c + min(V, a) >= b]`, with the comparison written as in
/// `BundleOffer::settle` so that ties resolve the same way.
fn accept_tail(dist: &ValuationDistribution, price: ItemPrice, c: f64, b: f64) -> f64 {
    let cap = price
        .finite()
        .map_or(dist.upper_bound(), |a| a.min(dist.upper_bound()));
    if c >= b {
        1.0
    } else if c + cap < b {
        0.0
    } else {
        dist.survival_at(b - c)
    }
}

/// Exact expected seller revenue of a two-customer offer.
pub fn pair_expected_revenue_exact(
    d1: &ValuationDistribution,
    d2: &ValuationDistribution,
    offer: &BundleOffer,
    tol: f64,
) -> Result<PairRevenueBreakdown> {
    check_pair(offer)?;
    check_tol(tol)?;
    let (a1, a2) = (offer.individual_prices()[0], offer.individual_prices()[1]);
    let b = offer.bundle_price();
    let m1 = d1.upper_bound();

    let mut breaks: Vec<f64> = d1.knots().to_vec();
    breaks.extend(d2.knots().iter().map(|k| b - k));
    breaks.push(b);
    if let Some(a) = a1.finite() {
        breaks.push(a);
    }
    if let Some(a) = a2.finite() {
        breaks.push(b - a);
        breaks.push(b - a.min(d2.upper_bound()));
    }

    // Tolerance split over the three integrals.
    let t = tol / 3.0;
    let accept_probability = integrate_piecewise(
        &|v| d1.pdf_at(v) * accept_tail(d2, a2, capped_value(v, a1), b),
        0.0,
        m1,
        &breaks,
        t,
    )
    .clamp(0.0, 1.0);

    let solo_part_1 = match a1.finite() {
        Some(a) => {
            a * integrate_piecewise(
                &|v| {
                    if v >= a {
                        d1.pdf_at(v) * (1.0 - accept_tail(d2, a2, capped_value(v, a1), b))
                    } else {
                        0.0
                    }
                },
                0.0,
                m1,
                &breaks,
                t,
            )
        }
        None => 0.0,
    };

    let solo_part_2 = match a2.finite() {
        Some(a) => {
            let buys = d2.survival_at(a);
            a * buys
                * integrate_piecewise(
                    &|v| {
                        if capped_value(v, a1) + a < b {
                            d1.pdf_at(v)
                        } else {
                            0.0
                        }
                    },
                    0.0,
                    m1,
                    &breaks,
                    t,
                )
        }
        None => 0.0,
    };

    let bundle_part = b * accept_probability;
    Ok(PairRevenueBreakdown {
        total: bundle_part + solo_part_1 + solo_part_2,
        bundle_part,
        solo_part_1,
        solo_part_2,
        accept_probability,
    })
}

pub fn pair_expected_revenue_mc(
    d1: &ValuationDistribution,
    d2: &ValuationDistribution,
    offer: &BundleOffer,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_pair(offer)?;
    estimate_revenue(&[d1.clone(), d2.clone()], offer, n_samples, seed)
}

/// Individual prices `(p1 + eps, p2)` with bundle price `p1 + p2`.
pub fn epsilon_offer(p1: f64, p2: f64, eps: f64) -> Result<BundleOffer> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be nonnegative, got {eps}"
        )));
    }
    BundleOffer::new(
        vec![ItemPrice::Finite(p1 + eps), ItemPrice::Finite(p2)],
        p1 + p2,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionLabel {
    A1,
    A2,
    A3,
    A4,
    A5,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 5] = [
        RegionLabel::A1,
        RegionLabel::A2,
        RegionLabel::A3,
        RegionLabel::A4,
        RegionLabel::A5,
    ];

    /// Half-open rectangle `[x0, x1) x [y0, y1)` covered by the region.
    pub fn rectangle(self, p1: f64, p2: f64, eps: f64) -> Rect {
        let inf = f64::INFINITY;
        let (x0, x1, y0, y1) = match self {
            RegionLabel::A1 => (p1, inf, p2, inf),
            RegionLabel::A2 => (0.0, inf, 0.0, p2 - eps),
            RegionLabel::A3 => (0.0, p1, p2 - eps, inf),
            RegionLabel::A4 => (p1, p1 + eps, p2 - eps, p2),
            RegionLabel::A5 => (p1 + eps, inf, p2 - eps, p2),
        };
        Rect { x0, x1, y0, y1 }
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

fn check_region_params(p1: f64, p2: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )));
    }
    if !(p1 >= 0.0) || !(p2 - eps >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need p1 >= 0 and p2 - eps >= 0, got p1 = {p1}, p2 = {p2}, eps = {eps}"
        )));
    }
    Ok(())
}

pub fn classify_region(v1: f64, v2: f64, p1: f64, p2: f64, eps: f64) -> Result<RegionLabel> {
    check_region_params(p1, p2, eps)?;
    if !(v1 >= 0.0 && v2 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "valuations must be nonnegative, got ({v1}, {v2})"
        )));
    }
    Ok(if v2 < p2 - eps {
        RegionLabel::A2
    } else if v1 < p1 {
        RegionLabel::A3
    } else if v2 >= p2 {
        RegionLabel::A1
    } else if v1 < p1 + eps {
        RegionLabel::A4
    } else {
        RegionLabel::A5
    })
}

/// Bundle acceptance under the epsilon-offer written as three inequalities.
pub fn bundle_accept_condition_pair(v1: f64, v2: f64, p1: f64, p2: f64, eps: f64) -> bool {
    v1 + v2 >= p1 + p2 && v1 >= p1 && v2 >= p2 - eps
}

/// A payoff that is piecewise constant over the valuation quadrant.
pub trait PairPayoff: Sync {
    fn value(&self, v1: f64, v2: f64) -> f64;
    /// Values of `v1` where the payoff's dependence on `v1` changes.
    fn v1_breaks(&self, d2: &ValuationDistribution, rect: &Rect) -> Vec<f64>;
    /// Values of `v2` where the payoff jumps, for fixed `v1`.
    fn v2_cuts(&self, v1: f64) -> Vec<f64>;
}

/// Revenue of a bundle offer.
impl PairPayoff for BundleOffer {
    fn value(&self, v1: f64, v2: f64) -> f64 {
        self.settle(&[v1, v2]).1
    }

    fn v1_breaks(&self, d2: &ValuationDistribution, rect: &Rect) -> Vec<f64> {
        let b = self.bundle_price();
        let mut out = Vec::new();
        if let Some(a) = self.individual_prices()[0].finite() {
            out.push(a);
        }
        let mut levels: Vec<f64> = d2.knots().to_vec();
        levels.extend([rect.y0, rect.y1]);
        if let Some(a) = self.individual_prices()[1].finite() {
            levels.push(a);
        }
        out.extend(levels.iter().map(|t| b - t));
        out
    }

    fn v2_cuts(&self, v1: f64) -> Vec<f64> {
        let mut out = vec![self.bundle_price() - capped_value(v1, self.individual_prices()[0])];
        if let Some(a) = self.individual_prices()[1].finite() {
            out.push(a);
        }
        out
    }
}

/// Revenue of separate take-it-or-leave-it offers at `(p1, p2)`.
#[derive(Debug, Clone, Copy)]
pub struct SeparatePrices(pub f64, pub f64);

impl PairPayoff for SeparatePrices {
    fn value(&self, v1: f64, v2: f64) -> f64 {
        let mut r = 0.0;
        if v1 >= self.0 {
            r += self.0;
        }
        if v2 >= self.1 {
            r += self.1;
        }
        r
    }

    fn v1_breaks(&self, _: &ValuationDistribution, _: &Rect) -> Vec<f64> {
        vec![self.0]
    }

    fn v2_cuts(&self, _: f64) -> Vec<f64> {
        vec![self.1]
    }
}

/// Constant payoff one: integrates to the probability of a rectangle.
#[derive(Debug, Clone, Copy)]
pub struct Indicator;

impl PairPayoff for Indicator {
    fn value(&self, _: f64, _: f64) -> f64 {
        1.0
    }

    fn v1_breaks(&self, _: &ValuationDistribution, _: &Rect) -> Vec<f64> {
        Vec::new()
    }

    fn v2_cuts(&self, _: f64) -> Vec<f64> {
        Vec::new()
    }
}

/// `E[payoff(V_1, V_2) 1{(V_1, V_2) in rect}]`: exact inner sums over the
/// constant pieces in `v2`, adaptive Simpson over `v1`.
pub fn integrate_over_rect<P: PairPayoff>(
    d1: &ValuationDistribution,
    d2: &ValuationDistribution,
    payoff: &P,
    rect: &Rect,
    tol: f64,
) -> Result<f64> {
    check_tol(tol)?;
    let x0 = rect.x0.max(0.0);
    let x1 = rect.x1.min(d1.upper_bound());
    let y0 = rect.y0.max(0.0);
    let y1 = rect.y1.min(d2.upper_bound());
    if !(x1 > x0) || !(y1 > y0) {
        return Ok(0.0);
    }
    let inner = |v1: f64| -> f64 {
        let mut cuts: Vec<f64> = payoff
            .v2_cuts(v1)
            .into_iter()
            .filter(|c| *c > y0 && *c < y1)
            .collect();
        cuts.push(y0);
        cuts.push(y1);
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .map(|w| {
                let mass = d2.cdf_at(w[1]) - d2.cdf_at(w[0]);
                if mass == 0.0 {
                    0.0
                } else {
                    mass * payoff.value(v1, 0.5 * (w[0] + w[1]))
                }
            })
            .sum()
    };
    let mut breaks = d1.knots().to_vec();
    breaks.extend(payoff.v1_breaks(d2, &Rect { x0, x1, y0, y1 }));
    Ok(integrate_piecewise(
        &|v| d1.pdf_at(v) * inner(v),
        x0,
        x1,
        &breaks,
        tol,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionRow {
    pub label: RegionLabel,
    pub probability: f64,
    pub separate_revenue: f64,
    pub bundle_revenue: f64,
}

/// Probability and restricted expected revenue of both strategies on each of
/// the five regions.
pub fn region_decomposition(
    d1: &ValuationDistribution,
    d2: &ValuationDistribution,
    p1: f64,
    p2: f64,
    eps: f64,
    tol: f64,
) -> Result<Vec<RegionRow>> {
    check_region_params(p1, p2, eps)?;
    let offer = epsilon_offer(p1, p2, eps)?;
    let separate = SeparatePrices(p1, p2);
    RegionLabel::ALL
        .iter()
        .map(|label| {
            let rect = label.rectangle(p1, p2, eps);
            Ok(RegionRow {
                label: *label,
                probability: integrate_over_rect(d1, d2, &Indicator, &rect, tol)?,
                separate_revenue: integrate_over_rect(d1, d2, &separate, &rect, tol)?,
                bundle_revenue: integrate_over_rect(d1, d2, &offer, &rect, tol)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonRow {
    pub eps: f64,
    pub bundle_revenue: f64,
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm1Report {
    pub p1: f64,
    pub p2: f64,
    pub separate_revenue: f64,
    pub rows: Vec<EpsilonRow>,
    pub best: EpsilonRow,
    /// Best epsilon from golden-section refinement over `(0, p2)`.
    pub refined: EpsilonRow,
    pub verified: bool,
}

/// Evaluates the epsilon-offer built on the optimal separate prices for each
/// grid value and reports whether any strictly beats separate pricing.
pub fn verify_thm1(
    d1: &ValuationDistribution,
    d2: &ValuationDistribution,
    eps_grid: &[f64],
) -> Result<Thm1Report> {
    let s1 = optimal_single_price(d1);
    let s2 = optimal_single_price(d2);
    let (p1, p2) = (s1.price, s2.price);
    if eps_grid.is_empty() {
        return Err(Error::InvalidParameter("eps grid is empty".into()));
    }
    if let Some(e) = eps_grid.iter().find(|e| !(**e > 0.0 && **e < p2)) {
        return Err(Error::InvalidParameter(format!(
            "each eps must lie in (0, p2 = {p2}), got {e}"
        )));
    }
    let separate_revenue = s1.expected_revenue + s2.expected_revenue;
    let row = |eps: f64| -> Result<EpsilonRow> {
        let bundle_revenue =
            pair_expected_revenue_exact(d1, d2, &epsilon_offer(p1, p2, eps)?, DEFAULT_TOL)?.total;
        Ok(EpsilonRow {
            eps,
            bundle_revenue,
            improvement: bundle_revenue - separate_revenue,
        })
    };
    let rows = eps_grid
        .iter()
        .map(|e| row(*e))
        .collect::<Result<Vec<_>>>()?;
    let best = *rows
        .iter()
        .reduce(|a, b| if b.improvement > a.improvement { b } else { a })
        .unwrap();

    let hi = p2.min(d1.upper_bound() - p1) * (1.0 - 1e-9);
    let (eps_star, _) = bracketed_max(
        |e| row(e).map_or(f64::NEG_INFINITY, |r| r.improvement),
        hi * 1e-6,
        hi,
        GRID_POINTS,
        1e-7,
    );
    let refined = row(eps_star)?;
    Ok(Thm1Report {
        p1,
        p2,
        separate_revenue,
        verified: best.improvement > IMPROVEMENT_TOL,
        rows,
        best,
        refined,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairOptimum {
    pub offer: BundleOffer,
    pub revenue: f64,
}

fn linspace(hi: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| hi * i as f64 / (points - 1) as f64)
        .collect()
}

fn exact_total(d1: &ValuationDistribution, d2: &ValuationDistribution, offer: &BundleOffer) -> f64 {
    pair_expected_revenue_exact(d1, d2, offer, DEFAULT_TOL).map_or(f64::NEG_INFINITY, |r| r.total)
}

/// Grid search over `(a_1, a_2, b)` (each `a_i` also tried as no-sale) seeded
/// with the separate-sales offer, then `budget` rounds of compass search.
pub fn optimize_pair_offer(
    d1: &ValuationDistribution,
    d2: &ValuationDistribution,
    budget: usize,
) -> Result<PairOptimum> {
    if budget < 1 {
        return Err(Error::InvalidParameter("budget must be at least 1".into()));
    }
    let (m1, m2) = (d1.upper_bound(), d2.upper_bound());
    let price_options = |m: f64| -> Vec<ItemPrice> {
        let mut v: Vec<ItemPrice> = linspace(m, GRID_POINTS)
            .into_iter()
            .map(ItemPrice::Finite)
            .collect();
        v.push(ItemPrice::NoSale);
        v
    };
    let a1s = price_options(m1);
    let a2s = price_options(m2);
    let bs = linspace(m1 + m2, GRID_POINTS);

    let mut candidates = Vec::with_capacity(a1s.len() * a2s.len() * bs.len() + 1);
    let s1 = optimal_single_price(d1);
    let s2 = optimal_single_price(d2);
    candidates.push(BundleOffer::separate_sales(&[s1.price, s2.price])?);
    for a1 in &a1s {
        for a2 in &a2s {
            for b in &bs {
                candidates.push(BundleOffer::new(vec![*a1, *a2], *b)?);
            }
        }
    }
    let values: Vec<f64> = candidates
        .par_iter()
        .map(|o| exact_total(d1, d2, o))
        .collect();
    let mut best_idx = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best_idx] {
            best_idx = i;
        }
    }
    let start_offer = &candidates[best_idx];
    let prices = start_offer.individual_prices();

    let to_offer = |x: &[f64]| -> BundleOffer {
        let a = |i: usize| match prices[i] {
            ItemPrice::NoSale => ItemPrice::NoSale,
            ItemPrice::Finite(_) => ItemPrice::Finite(x[i]),
        };
        BundleOffer::new(vec![a(0), a(1)], x[2]).expect("compass search stays inside the box")
    };
    let start = [
        prices[0].finite().unwrap_or(0.0),
        prices[1].finite().unwrap_or(0.0),
        start_offer.bundle_price(),
    ];
    let step = |m: f64, frozen: bool| {
        if frozen {
            0.0
        } else {
            m / (GRID_POINTS - 1) as f64
        }
    };
    let steps = [
        step(m1, prices[0].is_no_sale()),
        step(m2, prices[1].is_no_sale()),
        step(m1 + m2, false),
    ];
    let bounds = [(0.0, m1), (0.0, m2), (0.0, m1 + m2)];
    let (x, revenue) = compass_max(
        |x| exact_total(d1, d2, &to_offer(x)),
        &start,
        &steps,
        &bounds,
        budget,
    );
    Ok(PairOptimum {
        offer: to_offer(&x),
        revenue,
    })
}

/// Best pure-bundle price for a pair under the exact integrator.
pub fn optimize_pair_pure_bundle(
    d1: &ValuationDistribution,
    d2: &ValuationDistribution,
) -> Result<PairOptimum> {
    let hi = d1.upper_bound() + d2.upper_bound();
    let (b, revenue) = bracketed_max(
        |b| exact_total(d1, d2, &BundleOffer::pure_bundle(2, b).expect("b >= 0")),
        0.0,
        hi,
        GRID_POINTS * 4,
        1e-9,
    );
    Ok(PairOptimum {
        offer: BundleOffer::pure_bundle(2, b)?,
        revenue,
    })
}
