//! Seeded Monte Carlo revenue estimation.
//!
//! Samples are drawn in fixed-size batches. Batch `k` of a run with master
//! seed `s` uses the ChaCha8 stream `k` keyed by `s`, and within a sample the
//! customers are drawn in index order. Batch statistics are merged strictly in
//! batch order, so results are bit-identical regardless of thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanism::BundleOffer;
use crate::valuation::ValuationDistribution;

pub const BATCH_SIZE: usize = 4096;
pub const MIN_SAMPLES: usize = 1000;
pub const THREADS_ENV: &str = "BUNDLE_LAB_THREADS";

/// Random stream for one batch.
pub fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Caps the global rayon pool from `BUNDLE_LAB_THREADS` when set. Has no
/// effect if the pool was already initialized.
pub fn configure_threads_from_env() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().map_err(|_| {
        Error::InvalidParameter(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    if threads == 0 {
        return Err(Error::InvalidParameter(format!(
            "{THREADS_ENV} must be positive"
        )));
    }
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

/// Welford accumulator with pairwise merging.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &RunningStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / n;
        self.mean += delta * w;
        self.m2 += other.m2 + delta * delta * self.count as f64 * w;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub accept_fraction: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct BatchTally {
    revenue: RunningStats,
    accepted: u64,
}

fn reduce(tallies: &[BatchTally], n_samples: usize) -> McEstimate {
    let mut revenue = RunningStats::default();
    let mut accepted = 0;
    for t in tallies {
        revenue.merge(&t.revenue);
        accepted += t.accepted;
    }
    McEstimate {
        estimate: revenue.mean(),
        std_error: revenue.std_error(),
        accept_fraction: accepted as f64 / n_samples as f64,
        n_samples,
    }
}

fn batch_ranges(n_samples: usize) -> Vec<(u64, usize)> {
    (0..n_samples.div_ceil(BATCH_SIZE))
        .map(|k| (k as u64, BATCH_SIZE.min(n_samples - k * BATCH_SIZE)))
        .collect()
}

fn check_inputs(
    dists: &[ValuationDistribution],
    offer: &BundleOffer,
    n_samples: usize,
) -> Result<()> {
    if dists.len() != offer.len() {
        return Err(Error::LengthMismatch {
            offer: offer.len(),
            profile: dists.len(),
        });
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_SAMPLES} samples required, got {n_samples}"
        )));
    }
    Ok(())
}

/// Mean and standard error of realized seller revenue over seeded i.i.d.
/// valuation profiles.
pub fn estimate_revenue(
    dists: &[ValuationDistribution],
    offer: &BundleOffer,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_inputs(dists, offer, n_samples)?;
    let tallies: Vec<BatchTally> = batch_ranges(n_samples)
        .into_par_iter()
        .map(|(k, len)| {
            let mut rng = batch_rng(seed, k);
            let mut buf = vec![0.0; dists.len()];
            let mut tally = BatchTally::default();
            for _ in 0..len {
                for (slot, d) in buf.iter_mut().zip(dists) {
                    *slot = d.sample_one(&mut rng);
                }
                let (accepted, revenue) = offer.settle(&buf);
                tally.revenue.push(revenue);
                tally.accepted += accepted as u64;
            }
            tally
        })
        .collect();
    Ok(reduce(&tallies, n_samples))
}

/// A stored set of valuation profiles drawn under the batch stream contract.
/// Evaluating several offers against one bank uses common random numbers;
/// the result for any offer is bit-identical to [`estimate_revenue`] with the
/// same seed and sample count.
#[derive(Debug, Clone)]
pub struct SampleBank {
    customers: usize,
    n_samples: usize,
    /// Row-major `n_samples x customers`.
    valuations: Vec<f64>,
    /// Per-sample sum of valuations, in customer order.
    totals: Vec<f64>,
}

impl SampleBank {
    pub fn draw(dists: &[ValuationDistribution], n_samples: usize, seed: u64) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::InvalidParameter("need at least one customer".into()));
        }
        if n_samples < MIN_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "at least {MIN_SAMPLES} samples required, got {n_samples}"
            )));
        }
        let n = dists.len();
        let chunks: Vec<Vec<f64>> = batch_ranges(n_samples)
            .into_par_iter()
            .map(|(k, len)| {
                let mut rng = batch_rng(seed, k);
                let mut out = Vec::with_capacity(len * n);
                for _ in 0..len {
                    for d in dists {
                        out.push(d.sample_one(&mut rng));
                    }
                }
                out
            })
            .collect();
        let valuations: Vec<f64> = chunks.concat();
        let totals = valuations
            .chunks_exact(n)
            .map(|row| row.iter().sum())
            .collect();
        Ok(Self {
            customers: n,
            n_samples,
            valuations,
            totals,
        })
    }

    pub fn customers(&self) -> usize {
        self.customers
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn evaluate(&self, offer: &BundleOffer) -> Result<McEstimate> {
        if offer.len() != self.customers {
            return Err(Error::LengthMismatch {
                offer: offer.len(),
                profile: self.customers,
            });
        }
        let rows = BATCH_SIZE * self.customers;
        let tallies: Vec<BatchTally> = self
            .valuations
            .par_chunks(rows)
            .map(|chunk| {
                let mut tally = BatchTally::default();
                for row in chunk.chunks_exact(self.customers) {
                    let (accepted, revenue) = offer.settle(row);
                    tally.revenue.push(revenue);
                    tally.accepted += accepted as u64;
                }
                tally
            })
            .collect();
        Ok(reduce(&tallies, self.n_samples))
    }

    /// Pure-bundle revenue `b * 1{sum V >= b}` using the cached totals.
    pub fn evaluate_pure_bundle(&self, bundle_price: f64) -> McEstimate {
        let tallies: Vec<BatchTally> = self
            .totals
            .par_chunks(BATCH_SIZE)
            .map(|chunk| {
                let mut tally = BatchTally::default();
                for total in chunk {
                    let accepted = *total >= bundle_price;
                    tally
                        .revenue
                        .push(if accepted { bundle_price } else { 0.0 });
                    tally.accepted += accepted as u64;
                }
                tally
            })
            .collect();
        reduce(&tallies, self.n_samples)
    }
}
