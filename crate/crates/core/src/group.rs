//! Large-group bundling: the pure-bundle offer priced a concentration margin
//! below total expected valuation, its Bernstein tail bound and revenue lower
//! bound, and Monte Carlo optimization of group offers.

use crate::error::{Error, Result};
use crate::mechanism::{BundleOffer, ItemPrice};
use crate::montecarlo::{estimate_revenue, McEstimate, SampleBank};
use crate::search::bracketed_max;
use crate::single::optimal_single_price;
use crate::valuation::ValuationDistribution;

/// Number of standard errors allowed by the Monte Carlo assertions.
pub const SE_MULTIPLIER: f64 = 4.0;
const SCAN_POINTS: usize = 64;
const COORD_SCAN_POINTS: usize = 32;

/// `2 M sqrt(n ln n)`, the margin between total expected valuation and the bundle price.
pub fn concentration_margin(n: usize, upper_bound: f64) -> f64 {
    let n = n as f64;
    2.0 * upper_bound * (n * n.ln()).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeBundleOffer {
    pub offer: BundleOffer,
    /// Sum of expected valuations.
    pub mu: f64,
    /// Largest support bound among the customers.
    pub upper_bound: f64,
}

/// Pure bundle (no individual sales) at `b = mu - 2 M sqrt(n ln n)`.
pub fn thm2_offer(dists: &[ValuationDistribution]) -> Result<LargeBundleOffer> {
    let n = dists.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 customers, got {n}"
        )));
    }
    let mu: f64 = dists.iter().map(|d| d.mean()).sum();
    let upper_bound = dists.iter().map(|d| d.upper_bound()).fold(0.0, f64::max);
    let bundle_price = mu - concentration_margin(n, upper_bound);
    if !(bundle_price > 0.0) {
        return Err(Error::VacuousBundle { n, bundle_price });
    }
    Ok(LargeBundleOffer {
        offer: BundleOffer::pure_bundle(n, bundle_price)?,
        mu,
        upper_bound,
    })
}

/// Bernstein tail bound `exp(-(t^2/2) / (n M^2 + M t / 3))`, using `E[X_i^2] <= M^2`.
pub fn bernstein_upper_bound(n: usize, upper_bound: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "deviation must be nonnegative, got {t}"
        )));
    }
    if n < 1 || !(upper_bound > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need n >= 1 and M > 0, got n = {n}, M = {upper_bound}"
        )));
    }
    let m = upper_bound;
    let exponent = -(t * t / 2.0) / (n as f64 * m * m + m * t / 3.0);
    Ok(exponent.exp().min(1.0))
}

/// `(1 - 1/n)(mu - 2 M sqrt(n ln n))`; negative values mean the bound is vacuous.
pub fn thm2_revenue_lower_bound(n: usize, mu: f64, upper_bound: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {n}")));
    }
    Ok((1.0 - 1.0 / n as f64) * (mu - concentration_margin(n, upper_bound)))
}

pub fn group_expected_revenue_mc(
    dists: &[ValuationDistribution],
    offer: &BundleOffer,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    estimate_revenue(dists, offer, n_samples, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupSearchMode {
    /// All customers restricted to the bundle; only `b` is searched.
    PureBundle,
    /// Individual prices and bundle price searched jointly.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupOptimum {
    pub offer: BundleOffer,
    pub estimate: McEstimate,
}

/// Optimizes a group offer against one bank of seeded samples, so every
/// candidate is scored on the same valuation profiles.
pub fn optimize_group_offer(
    dists: &[ValuationDistribution],
    mode: GroupSearchMode,
    budget: usize,
    n_samples: usize,
    seed: u64,
) -> Result<GroupOptimum> {
    let bank = SampleBank::draw(dists, n_samples, seed)?;
    optimize_group_offer_on(&bank, dists, mode, budget)
}

/// Same as [`optimize_group_offer`] on a caller-provided bank.
pub fn optimize_group_offer_on(
    bank: &SampleBank,
    dists: &[ValuationDistribution],
    mode: GroupSearchMode,
    budget: usize,
) -> Result<GroupOptimum> {
    let n = dists.len();
    if bank.customers() != n {
        return Err(Error::LengthMismatch {
            offer: n,
            profile: bank.customers(),
        });
    }
    let total_bound: f64 = dists.iter().map(|d| d.upper_bound()).sum();
    let (b, _) = bracketed_max(
        |b| bank.evaluate_pure_bundle(b).estimate,
        0.0,
        total_bound,
        SCAN_POINTS,
        1e-6 * total_bound,
    );
    let pure = BundleOffer::pure_bundle(n, b)?;
    let pure_est = bank.evaluate(&pure)?;
    if mode == GroupSearchMode::PureBundle {
        return Ok(GroupOptimum {
            offer: pure,
            estimate: pure_est,
        });
    }

    let singles: Vec<f64> = dists
        .iter()
        .map(|d| optimal_single_price(d).price)
        .collect();
    let separate = BundleOffer::separate_sales(&singles)?;
    let separate_est = bank.evaluate(&separate)?;
    let (mut prices, mut bundle_price, mut best) = if separate_est.estimate > pure_est.estimate {
        (
            separate.individual_prices().to_vec(),
            separate.bundle_price(),
            separate_est,
        )
    } else {
        (
            pure.individual_prices().to_vec(),
            pure.bundle_price(),
            pure_est,
        )
    };

    let score = |prices: &[ItemPrice], b: f64| -> f64 {
        BundleOffer::new(prices.to_vec(), b)
            .and_then(|o| bank.evaluate(&o))
            .map_or(f64::NEG_INFINITY, |e| e.estimate)
    };

    for _ in 0..budget {
        let before = best.estimate;
        for i in 0..n {
            let m = dists[i].upper_bound();
            let mut trial = prices.clone();
            let (a, v) = bracketed_max(
                |a| {
                    trial[i] = ItemPrice::Finite(a);
                    score(&trial, bundle_price)
                },
                0.0,
                m,
                COORD_SCAN_POINTS,
                1e-4 * m,
            );
            trial[i] = ItemPrice::NoSale;
            let no_sale = score(&trial, bundle_price);
            let (choice, value) = if no_sale >= v {
                (ItemPrice::NoSale, no_sale)
            } else {
                (ItemPrice::Finite(a), v)
            };
            if value > best.estimate {
                prices[i] = choice;
                best = bank.evaluate(&BundleOffer::new(prices.clone(), bundle_price)?)?;
            }
        }
        let (b, v) = bracketed_max(
            |b| score(&prices, b),
            0.0,
            total_bound,
            COORD_SCAN_POINTS,
            1e-4 * total_bound,
        );
        if v > best.estimate {
            bundle_price = b;
            best = bank.evaluate(&BundleOffer::new(prices.clone(), bundle_price)?)?;
        }
        if best.estimate <= before {
            break;
        }
    }
    Ok(GroupOptimum {
        offer: BundleOffer::new(prices, bundle_price)?,
        estimate: best,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm2Report {
    pub n: usize,
    pub mu: f64,
    pub bundle_price: f64,
    pub accept_prob_estimate: f64,
    pub revenue_estimate: f64,
    pub revenue_std_error: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub bernstein_bound: f64,
    /// Largest admissible smoothness constant (reported only).
    pub delta: f64,
    /// `(1 - (4/delta) sqrt(ln n / n)) mu`, reported only.
    pub delta_form_bound: f64,
    pub lower_bound_holds: bool,
    pub upper_bound_holds: bool,
}

impl Thm2Report {
    pub fn passes(&self) -> bool {
        self.lower_bound_holds && self.upper_bound_holds
    }

    pub fn relative_gap(&self) -> f64 {
        (self.mu - self.revenue_estimate) / self.mu
    }
}

/// Builds `n` i.i.d. copies of `template` for each `n` and checks the
/// Monte Carlo revenue of the large-bundle offer against both bounds.
pub fn verify_thm2(
    template: &ValuationDistribution,
    n_list: &[usize],
    n_samples: usize,
    seed: u64,
) -> Result<Vec<Thm2Report>> {
    let delta = template.delta_ceiling();
    n_list
        .iter()
        .map(|&n| {
            let dists = vec![template.clone(); n];
            let large = thm2_offer(&dists)?;
            let est = group_expected_revenue_mc(&dists, &large.offer, n_samples, seed)?;
            let lower_bound = thm2_revenue_lower_bound(n, large.mu, large.upper_bound)?;
            let margin = concentration_margin(n, large.upper_bound);
            let slack = SE_MULTIPLIER * est.std_error;
            let nf = n as f64;
            Ok(Thm2Report {
                n,
                mu: large.mu,
                bundle_price: large.offer.bundle_price(),
                accept_prob_estimate: est.accept_fraction,
                revenue_estimate: est.estimate,
                revenue_std_error: est.std_error,
                lower_bound,
                upper_bound: large.mu,
                bernstein_bound: bernstein_upper_bound(n, large.upper_bound, margin)?,
                delta,
                delta_form_bound: (1.0 - 4.0 / delta * (nf.ln() / nf).sqrt()) * large.mu,
                lower_bound_holds: est.estimate + slack >= lower_bound,
                upper_bound_holds: est.estimate - slack <= large.mu,
            })
        })
        .collect()
}
