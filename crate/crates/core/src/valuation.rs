//! Valuation distributions with bounded support and piecewise-linear density.
//!
//! A distribution lives on `[0, M]` and is described by ascending knots
//! `0 = x_0 < x_1 < ... < x_k = M` with a strictly positive density value at
//! each knot. Between knots the density is linear, so the CDF is piecewise
//! quadratic and every moment has a closed form.

use rand::Rng;

use crate::error::{Error, Result};

/// Absolute tolerance (in value space) of the inverse-CDF bisection.
pub const INVERSE_CDF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ValuationDistribution {
    upper_bound: f64,
    knots: Vec<f64>,
    densities: Vec<f64>,
    /// CDF evaluated at each knot.
    cumulative: Vec<f64>,
    normalization_factor: f64,
    mean: f64,
}

impl ValuationDistribution {
    /// Uniform distribution on `[0, upper_bound]`.
    pub fn uniform(upper_bound: f64) -> Result<Self> {
        if !(upper_bound > 0.0) || !upper_bound.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "upper bound must be positive and finite, got {upper_bound}"
            )));
        }
        let d = 1.0 / upper_bound;
        Self::piecewise_linear(vec![0.0, upper_bound], vec![d, d], upper_bound)
    }

    /// Piecewise-linear density through `(knots[i], densities[i])`.
    ///
    /// The densities are rescaled so the density integrates to exactly one;
    /// the applied factor is available from [`Self::normalization_factor`].
    pub fn piecewise_linear(
        knots: Vec<f64>,
        densities: Vec<f64>,
        upper_bound: f64,
    ) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidDistribution("knot list is empty".into()));
        }
        if knots.len() != densities.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} knots but {} densities",
                knots.len(),
                densities.len()
            )));
        }
        if !(upper_bound > 0.0) || !upper_bound.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "upper bound must be positive and finite, got {upper_bound}"
            )));
        }
        if knots.len() < 2 {
            return Err(Error::InvalidDistribution(
                "at least two knots (0 and M) are required".into(),
            ));
        }
        if knots[0] != 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "first knot must be 0, got {}",
                knots[0]
            )));
        }
        if *knots.last().unwrap() != upper_bound {
            return Err(Error::InvalidDistribution(format!(
                "last knot must equal the upper bound {upper_bound}, got {}",
                knots.last().unwrap()
            )));
        }
        if let Some(w) = knots.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidDistribution(format!(
                "knots must be strictly ascending ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(d) = densities.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidDistribution(format!(
                "densities must be strictly positive and finite, got {d}"
            )));
        }

        let total: f64 = knots
            .windows(2)
            .zip(densities.windows(2))
            .map(|(x, d)| 0.5 * (x[1] - x[0]) * (d[0] + d[1]))
            .sum();
        let normalization_factor = 1.0 / total;
        let densities: Vec<f64> = densities.iter().map(|d| d * normalization_factor).collect();

        let mut cumulative = Vec::with_capacity(knots.len());
        cumulative.push(0.0);
        let mut mean = 0.0;
        for (x, d) in knots.windows(2).zip(densities.windows(2)) {
            let h = x[1] - x[0];
            let slope = (d[1] - d[0]) / h;
            let mass = 0.5 * h * (d[0] + d[1]);
            cumulative.push(cumulative.last().unwrap() + mass);
            // integral of (x0 + t)(d0 + slope t) over [0, h]
            mean += x[0] * d[0] * h
                + x[0] * slope * h * h / 2.0
                + d[0] * h * h / 2.0
                + slope * h * h * h / 3.0;
        }
        // Normalization holds up to rounding; pin the endpoint.
        *cumulative.last_mut().unwrap() = 1.0;

        Ok(Self {
            upper_bound,
            knots,
            densities,
            cumulative,
            normalization_factor,
            mean,
        })
    }

    pub fn upper_bound(&self) -> f64 {
        self.upper_bound
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Normalized density values at the knots.
    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    /// Factor the input densities were multiplied by to integrate to one.
    pub fn normalization_factor(&self) -> f64 {
        self.normalization_factor
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn min_density(&self) -> f64 {
        self.densities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_density(&self) -> f64 {
        self.densities
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the segment `[knots[j], knots[j+1]]` containing `v`, for `v` in `[0, M]`.
    fn segment(&self, v: f64) -> usize {
        let j = self.knots.partition_point(|k| *k <= v);
        j.saturating_sub(1).min(self.knots.len() - 2)
    }

    pub fn pdf_at(&self, v: f64) -> f64 {
        if v < 0.0 || v > self.upper_bound || v.is_nan() {
            return 0.0;
        }
        let j = self.segment(v);
        let (x0, x1) = (self.knots[j], self.knots[j + 1]);
        let (d0, d1) = (self.densities[j], self.densities[j + 1]);
        d0 + (d1 - d0) * (v - x0) / (x1 - x0)
    }

    fn cdf_in_segment(&self, j: usize, v: f64) -> f64 {
        let x0 = self.knots[j];
        let h = self.knots[j + 1] - x0;
        let d0 = self.densities[j];
        let slope = (self.densities[j + 1] - d0) / h;
        let t = v - x0;
        self.cumulative[j] + d0 * t + 0.5 * slope * t * t
    }

    pub fn cdf_at(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= self.upper_bound {
            return 1.0;
        }
        let j = self.segment(v);
        self.cdf_in_segment(j, v).clamp(0.0, 1.0)
    }

    /// `P[V >= v]`.
    pub fn survival_at(&self, v: f64) -> f64 {
        1.0 - self.cdf_at(v)
    }

    /// Inverse CDF by monotone bisection inside the segment holding `u`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return self.upper_bound;
        }
        let j = self
            .cumulative
            .partition_point(|c| *c <= u)
            .saturating_sub(1)
            .min(self.knots.len() - 2);
        let (mut lo, mut hi) = self.quantile_bracket(j, u);
        while hi - lo > INVERSE_CDF_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf_in_segment(j, mid) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Narrow bracket around the closed-form root of the segment quadratic,
    /// falling back to the whole segment if rounding puts the root outside.
    fn quantile_bracket(&self, j: usize, u: f64) -> (f64, f64) {
        const HALF_WIDTH: f64 = 1e-9;
        let (x0, x1) = (self.knots[j], self.knots[j + 1]);
        let d0 = self.densities[j];
        let slope = (self.densities[j + 1] - d0) / (x1 - x0);
        let r = u - self.cumulative[j];
        let t = 2.0 * r / (d0 + (d0 * d0 + 2.0 * slope * r).max(0.0).sqrt());
        let lo = (x0 + t - HALF_WIDTH).max(x0);
        let hi = (x0 + t + HALF_WIDTH).min(x1);
        if self.cdf_in_segment(j, lo) < u && self.cdf_in_segment(j, hi) >= u {
            (lo, hi)
        } else {
            (x0, x1)
        }
    }

    /// Draws one valuation by inverse-transform sampling.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        self.quantile(u)
    }

    /// Any `delta` strictly below this value satisfies `delta < f < 1/delta` on `[0, M]`.
    pub fn delta_ceiling(&self) -> f64 {
        self.min_density().min(1.0 / self.max_density()).min(1.0)
    }

    /// Checks the smoothness and boundedness hypotheses for a given `delta`.
    pub fn validate_smoothness(&self, delta: f64) -> Result<SmoothnessReport> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        let min_density = self.min_density();
        let max_density = self.max_density();
        let mut violations = Vec::new();
        if !(self.upper_bound > 0.0 && self.upper_bound.is_finite()) {
            violations.push(format!(
                "support [0, M] needs a finite M > 0, got M = {}",
                self.upper_bound
            ));
        }
        // Linear between knots, so extremes over [0, M] sit at knots.
        if !(min_density > delta) {
            violations.push(format!(
                "minimum density {min_density} is not above delta = {delta}"
            ));
        }
        if !(max_density < 1.0 / delta) {
            violations.push(format!(
                "maximum density {max_density} is not below 1/delta = {}",
                1.0 / delta
            ));
        }
        Ok(SmoothnessReport {
            passes: violations.is_empty(),
            min_density,
            max_density,
            delta_used: delta,
            violations,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessReport {
    pub passes: bool,
    pub min_density: f64,
    pub max_density: f64,
    pub delta_used: f64,
    pub violations: Vec<String>,
}
