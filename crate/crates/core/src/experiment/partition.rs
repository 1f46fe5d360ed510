//! Mixed population: half the customers in pairs, a third in triples, a sixth
//! in groups of six, all i.i.d. from one template. Each group size gets its own
//! best-found bundle offer; the result is compared with separate sales.
//! Customers left over when a share is not a multiple of its group size are
//! sold to separately at the optimal single price.

use super::config::{ExperimentConfig, DEFAULT_POPULATION};
use super::report::{Cell, RunReport};
use crate::error::{Error, Result};
use crate::group::{optimize_group_offer_on, GroupSearchMode};
use crate::mechanism::BundleOffer;
use crate::montecarlo::SampleBank;
use crate::pair::optimize_pair_offer;
use crate::single::optimal_single_price;

/// `(group size, share of the population)`
const SPLIT: [(usize, usize); 3] = [(2, 2), (3, 3), (6, 6)];

pub fn partition_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    let population = config.population.unwrap_or(DEFAULT_POPULATION);
    if population == 0 || !population.is_multiple_of(6) {
        return Err(Error::Config(format!(
            "population: must be a positive multiple of 6, got {population}"
        )));
    }
    let template = config
        .build_distributions()?
        .into_iter()
        .next()
        .ok_or_else(|| {
            Error::Config("distributions: a template distribution is required".into())
        })?;
    let single = optimal_single_price(&template);
    let budget = config.budget();

    let mut report = RunReport::new(
        config.clone(),
        &[
            "label",
            "group_size",
            "groups",
            "per_group_revenue",
            "per_group_std_error",
            "per_customer_revenue",
            "separate_per_group",
            "subtotal",
        ],
    );
    let mut total = 0.0;
    let mut total_var = 0.0;
    let mut dominance_ok = true;
    let mut leftovers = 0;

    for (size, share) in SPLIT {
        let customers = population / share;
        let groups = customers / size;
        leftovers += customers % size;
        let separate_exact = size as f64 * single.expected_revenue;
        let (label, revenue, std_error, separate_reference) = if size == 2 {
            let opt = optimize_pair_offer(&template, &template, budget)?;
            ("pairs", opt.revenue, 0.0, separate_exact)
        } else {
            let dists = vec![template.clone(); size];
            let bank = SampleBank::draw(&dists, config.n_samples, config.seed)?;
            let opt = optimize_group_offer_on(&bank, &dists, GroupSearchMode::Full, budget)?;
            // Same samples, so the optimized offer can be compared exactly.
            let separate =
                bank.evaluate(&BundleOffer::separate_sales(&vec![single.price; size])?)?;
            let label = if size == 3 { "triples" } else { "sixes" };
            (
                label,
                opt.estimate.estimate,
                opt.estimate.std_error,
                separate.estimate,
            )
        };
        dominance_ok &= revenue >= separate_reference - 1e-6;
        let subtotal = groups as f64 * revenue;
        total += subtotal;
        total_var += (groups as f64 * std_error).powi(2);
        report.push_row(vec![
            Cell::Text(label.into()),
            Cell::Int(size as u64),
            Cell::Int(groups as u64),
            Cell::Num(revenue),
            Cell::Num(std_error),
            Cell::Num(revenue / size as f64),
            Cell::Num(separate_exact),
            Cell::Num(subtotal),
        ]);
    }

    let n = population as f64;
    let leftover_revenue = leftovers as f64 * single.expected_revenue;
    total += leftover_revenue;
    report.push_row(vec![
        Cell::Text("leftover_singles".into()),
        Cell::Int(1),
        Cell::Int(leftovers as u64),
        Cell::Num(single.expected_revenue),
        Cell::Num(0.0),
        Cell::Num(single.expected_revenue),
        Cell::Num(single.expected_revenue),
        Cell::Num(leftover_revenue),
    ]);
    report.push_row(vec![
        Cell::Text("mixed_total".into()),
        Cell::Text(String::new()),
        Cell::Int(
            SPLIT
                .iter()
                .map(|(s, sh)| (population / sh / s) as u64)
                .sum::<u64>(),
        ),
        Cell::Text(String::new()),
        Cell::Num(total_var.sqrt()),
        Cell::Num(total / n),
        Cell::Text(String::new()),
        Cell::Num(total),
    ]);
    report.push_row(vec![
        Cell::Text("separate_baseline".into()),
        Cell::Int(1),
        Cell::Int(population as u64),
        Cell::Num(single.expected_revenue),
        Cell::Num(0.0),
        Cell::Num(single.expected_revenue),
        Cell::Num(single.expected_revenue),
        Cell::Num(n * single.expected_revenue),
    ]);
    report.notes.push(
        "offers are optimized per group size; the result need not be the optimal mechanism for the mixed population"
            .into(),
    );
    report.verified = Some(dominance_ok);
    Ok(report)
}
