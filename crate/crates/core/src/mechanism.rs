//! Bundle offers, group-rational acceptance, and realized outcomes.
//!
//! A group accepts a bundle at price `b` iff some split `(P_1, ..., P_n)`
//! satisfies `sum P_i = b`, `P_i <= V_i` and `P_i <= a_i`. No lower bound is
//! placed on any `P_i`, so the split exists exactly when
//! `sum min(V_i, a_i) >= b`. Payments may come out negative, meaning one
//! member subsidizes another.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Individual price for one customer, or `NoSale` when the item cannot be
/// bought alone. Serialized as a number or `null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "Option<f64>", into = "Option<f64>")]
pub enum ItemPrice {
    Finite(f64),
    NoSale,
}

impl From<Option<f64>> for ItemPrice {
    fn from(v: Option<f64>) -> Self {
        v.map_or(ItemPrice::NoSale, ItemPrice::Finite)
    }
}

impl From<ItemPrice> for Option<f64> {
    fn from(p: ItemPrice) -> Self {
        p.finite()
    }
}

impl ItemPrice {
    pub fn finite(self) -> Option<f64> {
        match self {
            ItemPrice::Finite(a) => Some(a),
            ItemPrice::NoSale => None,
        }
    }

    pub fn is_no_sale(self) -> bool {
        matches!(self, ItemPrice::NoSale)
    }
}

/// `min(V_i, a_i)`, with `NoSale` leaving the valuation uncapped.
pub fn capped_value(valuation: f64, price: ItemPrice) -> f64 {
    match price {
        ItemPrice::Finite(a) => valuation.min(a),
        ItemPrice::NoSale => valuation,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOffer", into = "RawOffer")]
pub struct BundleOffer {
    individual_prices: Vec<ItemPrice>,
    bundle_price: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOffer {
    individual_prices: Vec<ItemPrice>,
    bundle_price: f64,
}

impl TryFrom<RawOffer> for BundleOffer {
    type Error = Error;

    fn try_from(raw: RawOffer) -> Result<Self> {
        BundleOffer::new(raw.individual_prices, raw.bundle_price)
    }
}

impl From<BundleOffer> for RawOffer {
    fn from(o: BundleOffer) -> Self {
        RawOffer {
            individual_prices: o.individual_prices,
            bundle_price: o.bundle_price,
        }
    }
}

impl BundleOffer {
    pub fn new(individual_prices: Vec<ItemPrice>, bundle_price: f64) -> Result<Self> {
        let offer = Self {
            individual_prices,
            bundle_price,
        };
        offer.validate()?;
        Ok(offer)
    }

    /// All customers restricted to the bundle.
    pub fn pure_bundle(n: usize, bundle_price: f64) -> Result<Self> {
        Self::new(vec![ItemPrice::NoSale; n], bundle_price)
    }

    /// Offer with individual prices `a_i` and bundle price `sum a_i`; its
    /// revenue coincides with independent single-price sales.
    pub fn separate_sales(prices: &[f64]) -> Result<Self> {
        Self::new(
            prices.iter().map(|p| ItemPrice::Finite(*p)).collect(),
            prices.iter().sum(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.individual_prices.is_empty() {
            return Err(Error::InvalidParameter(
                "offer needs at least one customer".into(),
            ));
        }
        if !(self.bundle_price >= 0.0) || !self.bundle_price.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "bundle price must be finite and nonnegative, got {}",
                self.bundle_price
            )));
        }
        for p in &self.individual_prices {
            if let ItemPrice::Finite(a) = p {
                if !(*a >= 0.0) || !a.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "individual prices must be finite and nonnegative, got {a}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.individual_prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individual_prices.is_empty()
    }

    pub fn individual_prices(&self) -> &[ItemPrice] {
        &self.individual_prices
    }

    pub fn bundle_price(&self) -> f64 {
        self.bundle_price
    }

    fn check_len(&self, profile: &ValuationProfile) -> Result<()> {
        if self.len() != profile.len() {
            return Err(Error::LengthMismatch {
                offer: self.len(),
                profile: profile.len(),
            });
        }
        Ok(())
    }

    /// Bundle acceptance and seller revenue for raw valuations, without
    /// building an [`Outcome`]. Callers guarantee equal lengths.
    pub(crate) fn settle(&self, valuations: &[f64]) -> (bool, f64) {
        debug_assert_eq!(valuations.len(), self.len());
        let capped: f64 = valuations
            .iter()
            .zip(&self.individual_prices)
            .map(|(v, a)| capped_value(*v, *a))
            .sum();
        if capped >= self.bundle_price {
            return (true, self.bundle_price);
        }
        let solo = valuations
            .iter()
            .zip(&self.individual_prices)
            .filter_map(|(v, a)| a.finite().filter(|a| v >= a))
            .sum();
        (false, solo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValuationProfile {
    valuations: Vec<f64>,
}

impl ValuationProfile {
    pub fn new(valuations: Vec<f64>) -> Result<Self> {
        if let Some(v) = valuations.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "valuations must be finite and nonnegative, got {v}"
            )));
        }
        Ok(Self { valuations })
    }

    pub fn valuations(&self) -> &[f64] {
        &self.valuations
    }

    pub fn len(&self) -> usize {
        self.valuations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valuations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub bundle_accepted: bool,
    pub receives: Vec<bool>,
    pub payments: Vec<f64>,
    pub seller_revenue: f64,
}

fn capped_sum(offer: &BundleOffer, profile: &ValuationProfile) -> f64 {
    profile
        .valuations
        .iter()
        .zip(&offer.individual_prices)
        .map(|(v, a)| capped_value(*v, *a))
        .sum()
}

/// Whether the group can split the bundle price so that every member pays at
/// most both its valuation and its individual price.
pub fn group_rational_accepts(offer: &BundleOffer, profile: &ValuationProfile) -> Result<bool> {
    offer.check_len(profile)?;
    Ok(capped_sum(offer, profile) >= offer.bundle_price)
}

/// An explicit payment split when the bundle is acceptable: each member pays
/// its capped value minus an equal share of the slack.
pub fn witness_split(offer: &BundleOffer, profile: &ValuationProfile) -> Result<Option<Vec<f64>>> {
    offer.check_len(profile)?;
    let total = capped_sum(offer, profile);
    if total < offer.bundle_price {
        return Ok(None);
    }
    let share = (total - offer.bundle_price) / offer.len() as f64;
    Ok(Some(
        profile
            .valuations
            .iter()
            .zip(&offer.individual_prices)
            .map(|(v, a)| capped_value(*v, *a) - share)
            .collect(),
    ))
}

pub fn resolve_outcome(offer: &BundleOffer, profile: &ValuationProfile) -> Result<Outcome> {
    if let Some(payments) = witness_split(offer, profile)? {
        return Ok(Outcome {
            bundle_accepted: true,
            receives: vec![true; offer.len()],
            payments,
            seller_revenue: offer.bundle_price,
        });
    }
    let mut receives = Vec::with_capacity(offer.len());
    let mut payments = Vec::with_capacity(offer.len());
    let mut seller_revenue = 0.0;
    for (v, a) in profile.valuations.iter().zip(&offer.individual_prices) {
        match a.finite() {
            Some(a) if *v >= a => {
                receives.push(true);
                payments.push(a);
                seller_revenue += a;
            }
            _ => {
                receives.push(false);
                payments.push(0.0);
            }
        }
    }
    Ok(Outcome {
        bundle_accepted: false,
        receives,
        payments,
        seller_revenue,
    })
}
