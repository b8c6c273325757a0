//! Randomized approximation-ratio experiments.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Metric, Point};
use crate::mechanisms::{AgentProfile, FacilitySpec, MechanismDescriptor};
use crate::welfare::{approximation_ratio, Ratio, WelfareObjective};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    fn admits(self, n: usize) -> bool {
        match self {
            Parity::Odd => !n.is_multiple_of(2),
            Parity::Even => n.is_multiple_of(2),
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd" => Ok(Parity::Odd),
            "even" => Ok(Parity::Even),
            other => Err(Error::invalid(format!(
                "unknown parity `{other}` (expected `odd` or `even`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub trials: usize,
    pub n_min: usize,
    pub n_max: usize,
    /// Agents are uniform on `[0, box_side]^dim`.
    pub box_side: f64,
    pub seed: u64,
    pub objective: WelfareObjective,
    pub parity: Option<Parity>,
    pub metric: Metric,
    pub facilities: usize,
    pub dim: usize,
    pub histogram_bins: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            trials: 1000,
            n_min: 3,
            n_max: 9,
            box_side: 100.0,
            seed: 0,
            objective: WelfareObjective::Total,
            parity: None,
            metric: Metric::Euclidean,
            facilities: 1,
            dim: 2,
            histogram_bins: 10,
        }
    }
}

impl BenchConfig {
    /// Agent counts the sampler may draw.
    pub fn admissible_sizes(&self) -> Vec<usize> {
        (self.n_min..=self.n_max)
            .filter(|&n| self.parity.is_none_or(|p| p.admits(n)))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(Error::invalid(format!(
                "empty agent range [{}, {}]",
                self.n_min, self.n_max
            )));
        }
        if self.admissible_sizes().is_empty() {
            return Err(Error::invalid("no agent count in range matches the parity"));
        }
        if !(self.box_side > 0.0 && self.box_side.is_finite()) {
            return Err(Error::invalid("box side must be positive"));
        }
        if self.dim == 0 || self.facilities == 0 || self.histogram_bins == 0 {
            return Err(Error::invalid(
                "dimension, facilities and bins must be positive",
            ));
        }
        Ok(())
    }

    /// The profile sampled for `trial`; independent of every other trial.
    pub fn sample(&self, trial: usize) -> Result<AgentProfile> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        let sizes = self.admissible_sizes();
        let n = sizes[rng.random_range(0..sizes.len())];
        let agents = (0..n)
            .map(|_| Point::new((0..self.dim).map(|_| rng.random_range(0.0..=self.box_side))))
            .collect::<Result<Vec<_>>>()?;
        AgentProfile::new(agents, self.metric)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeSummary {
    pub trials: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchSummary {
    pub mechanism: MechanismDescriptor,
    pub config: BenchConfig,
    /// Trials whose ratio was computed.
    pub evaluated: usize,
    /// Trials the oracle refused, by reason.
    pub skipped: BTreeMap<String, usize>,
    /// Finite ratios only; `infinite` counts the rest.
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub infinite: usize,
    /// Trial index reaching `max_ratio`, lowest on ties.
    pub worst_trial: Option<usize>,
    pub per_n: BTreeMap<usize, SizeSummary>,
    /// Equal-width bins over `[1, max_ratio]`.
    pub histogram: Vec<Bin>,
}

enum Trial {
    Done { n: usize, ratio: Ratio },
    Skipped(String),
}

pub fn run_bench(config: &BenchConfig, desc: &MechanismDescriptor) -> Result<BenchSummary> {
    config.validate()?;
    let spec = FacilitySpec::uncapacitated(config.facilities);
    let trials: Vec<Trial> = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let profile = config.sample(t)?;
            match approximation_ratio(desc, &profile, &spec, config.objective) {
                Ok(r) => Ok(Trial::Done {
                    n: profile.len(),
                    ratio: r.ratio,
                }),
                Err(Error::ResourceCap { what, .. }) => Ok(Trial::Skipped(what.to_string())),
                Err(Error::Convergence { .. }) => Ok(Trial::Skipped("oracle convergence".into())),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;

    let mut skipped = BTreeMap::new();
    let mut finite: Vec<(usize, usize, f64)> = Vec::new();
    let mut infinite = 0;
    for (t, trial) in trials.into_iter().enumerate() {
        match trial {
            Trial::Done {
                n,
                ratio: Ratio::Finite(r),
            } => finite.push((t, n, r)),
            Trial::Done { .. } => infinite += 1,
            Trial::Skipped(why) => *skipped.entry(why).or_insert(0) += 1,
        }
    }

    let (worst_trial, max_ratio) =
        finite
            .iter()
            .fold((None, f64::NEG_INFINITY), |(wt, m), &(t, _, r)| {
                if r > m {
                    (Some(t), r)
                } else {
                    (wt, m)
                }
            });
    let max_ratio = if finite.is_empty() {
        f64::NAN
    } else {
        max_ratio
    };
    let mean_ratio = finite.iter().map(|f| f.2).sum::<f64>() / finite.len() as f64;

    let mut per_n: BTreeMap<usize, SizeSummary> = BTreeMap::new();
    for &(_, n, r) in &finite {
        let e = per_n.entry(n).or_insert(SizeSummary {
            trials: 0,
            max_ratio: f64::NEG_INFINITY,
            mean_ratio: 0.0,
        });
        e.trials += 1;
        e.max_ratio = e.max_ratio.max(r);
        e.mean_ratio += r;
    }
    for e in per_n.values_mut() {
        e.mean_ratio /= e.trials as f64;
    }

    Ok(BenchSummary {
        mechanism: desc.clone(),
        config: config.clone(),
        evaluated: finite.len() + infinite,
        skipped,
        max_ratio,
        mean_ratio,
        infinite,
        worst_trial,
        per_n,
        histogram: histogram(finite.iter().map(|f| f.2), max_ratio, config.histogram_bins),
    })
}

fn histogram(ratios: impl Iterator<Item = f64>, max: f64, bins: usize) -> Vec<Bin> {
    if !max.is_finite() {
        return Vec::new();
    }
    let low = 1.0f64.min(max);
    let width = (max - low) / bins as f64;
    let mut out: Vec<Bin> = (0..bins)
        .map(|k| Bin {
            low: low + k as f64 * width,
            high: if k + 1 == bins {
                max
            } else {
                low + (k + 1) as f64 * width
            },
            count: 0,
        })
        .collect();
    for r in ratios {
        let k = if width > 0.0 {
            (((r - low) / width) as usize).min(bins - 1)
        } else {
            0
        };
        out[k].count += 1;
    }
    out
}
