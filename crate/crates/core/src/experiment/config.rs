use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::BundleOffer;
use crate::valuation::ValuationDistribution;

pub const DEFAULT_SAMPLES: usize = 100_000;
pub const DEFAULT_BUDGET: usize = 4;
pub const DEFAULT_N_LIST: [usize; 3] = [100, 1000, 10_000];
pub const DEFAULT_POPULATION: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SingleOpt,
    PairOpt,
    VerifyThm1,
    VerifyThm2,
    Partition,
    Sweep,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::SingleOpt => "single-opt",
            Command::PairOpt => "pair-opt",
            Command::VerifyThm1 => "verify-thm1",
            Command::VerifyThm2 => "verify-thm2",
            Command::Partition => "partition",
            Command::Sweep => "sweep",
        };
        f.write_str(s)
    }
}

/// Distribution descriptor as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Uniform {
        #[serde(rename = "M")]
        upper_bound: f64,
    },
    PiecewiseLinear {
        knots: Vec<f64>,
        densities: Vec<f64>,
        /// Defaults to the last knot.
        #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
        upper_bound: Option<f64>,
    },
}

impl DistributionSpec {
    pub fn build(&self) -> Result<ValuationDistribution> {
        match self {
            DistributionSpec::Uniform { upper_bound } => {
                ValuationDistribution::uniform(*upper_bound)
            }
            DistributionSpec::PiecewiseLinear {
                knots,
                densities,
                upper_bound,
            } => {
                let m = match (upper_bound, knots.last()) {
                    (Some(m), _) => *m,
                    (None, Some(last)) => *last,
                    (None, None) => {
                        return Err(Error::InvalidDistribution("knot list is empty".into()));
                    }
                };
                ValuationDistribution::piecewise_linear(knots.clone(), densities.clone(), m)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub distributions: Vec<DistributionSpec>,
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    /// Refinement rounds for pair search, sweeps for group coordinate descent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    /// Population size `N` for the partition experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offers: Option<Vec<BundleOffer>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl ExperimentConfig {
    pub fn build_distributions(&self) -> Result<Vec<ValuationDistribution>> {
        self.distributions
            .iter()
            .enumerate()
            .map(|(i, d)| {
                d.build()
                    .map_err(|e| Error::Config(format!("distributions[{i}]: {e}")))
            })
            .collect()
    }

    pub fn budget(&self) -> usize {
        self.budget.unwrap_or(DEFAULT_BUDGET)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let dists = self.build_distributions()?;
        if dists.is_empty() {
            return Err(Error::Config(
                "distributions: at least one is required".into(),
            ));
        }
        if self.n_samples < crate::montecarlo::MIN_SAMPLES {
            return Err(Error::Config(format!(
                "n_samples: at least {} required, got {}",
                crate::montecarlo::MIN_SAMPLES,
                self.n_samples
            )));
        }
        if self.budget == Some(0) {
            return Err(Error::Config("budget: must be at least 1".into()));
        }
        match self.command {
            Command::PairOpt | Command::VerifyThm1 if dists.len() > 2 => {
                return Err(Error::Config(format!(
                    "distributions: {} takes one (i.i.d. pair) or two distributions, got {}",
                    self.command,
                    dists.len()
                )));
            }
            Command::VerifyThm2 | Command::Partition if dists.len() != 1 => {
                return Err(Error::Config(format!(
                    "distributions: {} takes exactly one template distribution, got {}",
                    self.command,
                    dists.len()
                )));
            }
            _ => {}
        }
        if let Some(grid) = &self.eps_grid {
            if grid.is_empty() || grid.iter().any(|e| !(*e > 0.0)) {
                return Err(Error::Config(
                    "eps_grid: must be nonempty and positive".into(),
                ));
            }
        }
        if let Some(ns) = &self.n_list {
            if ns.is_empty() || ns.iter().any(|n| *n < 2) {
                return Err(Error::Config(
                    "n_list: must be nonempty with every n >= 2".into(),
                ));
            }
        }
        if let Some(n) = self.population {
            if n == 0 || n % 6 != 0 {
                return Err(Error::Config(format!(
                    "population: must be a positive multiple of 6, got {n}"
                )));
            }
        }
        if self.command == Command::Sweep {
            let offers = self.offers.as_deref().unwrap_or_default();
            if offers.is_empty() {
                return Err(Error::Config(
                    "offers: sweep needs at least one offer".into(),
                ));
            }
            for (i, o) in offers.iter().enumerate() {
                if dists.len() != 1 && dists.len() != o.len() {
                    return Err(Error::Config(format!(
                        "offers[{i}]: {} customers but {} distributions",
                        o.len(),
                        dists.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parses and validates a JSON experiment config. Unknown keys are rejected
/// with the path of the offending key.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            Error::Config(e.inner().to_string())
        } else {
            Error::Config(format!("{path}: {}", e.inner()))
        }
    })?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = parse_config(
            r#"{"command":"single-opt","distributions":[{"type":"uniform","M":1.0}],"seed":42,"n_samples":100000}"#,
        )
        .unwrap();
        assert_eq!(c.command, Command::SingleOpt);
        assert_eq!(c.seed, 42);
        assert_eq!(c.n_samples, 100_000);
    }

    #[test]
    fn missing_seed_is_named() {
        let e = parse_config(
            r#"{"command":"single-opt","distributions":[{"type":"uniform","M":1.0}]}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(e.contains("seed"), "{e}");
    }

    #[test]
    fn unknown_key_reports_path() {
        let e = parse_config(
            r#"{"command":"single-opt","distributions":[{"type":"uniform","M":1.0,"colour":1}],"seed":1}"#,
        )
        .unwrap_err()
        .to_string();
        assert!(e.contains("distributions[0]"), "{e}");
        assert!(e.contains("colour"), "{e}");
        let e =
            parse_config(r#"{"command":"single-opt","distributions":[],"seed":1,"extra":true}"#)
                .unwrap_err()
                .to_string();
        assert!(e.contains("extra"), "{e}");
    }

    #[test]
    fn zero_density_is_rejected() {
        let e = parse_config(
            r#"{"command":"single-opt","seed":1,
                "distributions":[{"type":"piecewise_linear","knots":[0,0.5,1],"densities":[1,0,1]}]}"#,
        )
        .unwrap_err();
        assert!(e.to_string().contains("strictly positive"), "{e}");
    }

    #[test]
    fn command_specific_checks() {
        let base = |cmd: &str, extra: &str| {
            format!(
                r#"{{"command":"{cmd}","seed":1,"distributions":[{{"type":"uniform","M":1.0}}]{extra}}}"#
            )
        };
        assert!(parse_config(&base("partition", r#","population":7"#)).is_err());
        assert!(parse_config(&base("partition", r#","population":12"#)).is_ok());
        assert!(parse_config(&base("sweep", "")).is_err());
        assert!(parse_config(&base("verify-thm1", r#","eps_grid":[0.1,-0.1]"#)).is_err());
        assert!(parse_config(&base("verify-thm2", r#","n_list":[1]"#)).is_err());
        assert!(parse_config(&base("single-opt", r#","n_samples":10"#)).is_err());
        assert!(parse_config(&base("bogus", "")).is_err());
    }

    #[test]
    fn round_trip_every_command() {
        let texts = [
            r#"{"command":"single-opt","distributions":[{"type":"uniform","M":2.0}],"seed":3}"#,
            r#"{"command":"pair-opt","distributions":[{"type":"uniform","M":1.0},{"type":"piecewise_linear","knots":[0,1],"densities":[0.5,1.5]}],"seed":3,"budget":2}"#,
            r#"{"command":"verify-thm1","distributions":[{"type":"uniform","M":1.0}],"seed":3,"eps_grid":[0.05,0.1]}"#,
            r#"{"command":"verify-thm2","distributions":[{"type":"uniform","M":1.0}],"seed":3,"n_list":[100,1000],"n_samples":5000,"out":"x.csv"}"#,
            r#"{"command":"partition","distributions":[{"type":"uniform","M":1.0}],"seed":3,"population":12}"#,
            r#"{"command":"sweep","distributions":[{"type":"uniform","M":1.0}],"seed":3,"offers":[{"individual_prices":[0.5,null],"bundle_price":1.0}]}"#,
        ];
        for t in texts {
            let c = parse_config(t).unwrap();
            assert_eq!(parse_config(&c.to_json()).unwrap(), c);
        }
    }
}
