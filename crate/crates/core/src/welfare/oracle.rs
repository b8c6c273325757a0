use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    coordinate_median, geometric_median_with, manhattan_one_center, max_distance,
    smallest_enclosing_circle, total_distance, EvenMedian, Metric, Point, WeiszfeldOptions,
};
use crate::mechanisms::{assign_nearest, AgentProfile, FacilitySpec, Solution};

use super::{evaluate, WelfareObjective};

/// Largest `n` the partition enumeration accepts for `m >= 2` by default.
pub const DEFAULT_PARTITION_CAP: usize = 10;

/// Hard ceiling: the per-subset cache is indexed by a bitmask.
const MASK_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub partition_cap: usize,
    pub weiszfeld: WeiszfeldOptions,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            partition_cap: DEFAULT_PARTITION_CAP,
            weiszfeld: WeiszfeldOptions {
                tolerance: 1e-9,
                ..WeiszfeldOptions::default()
            },
        }
    }
}

/// Exact optimal uncapacitated welfare for small instances.
pub fn optimal_welfare(
    profile: &AgentProfile,
    spec: &FacilitySpec,
    objective: WelfareObjective,
) -> Result<(f64, Solution)> {
    optimal_welfare_with(profile, spec, objective, OracleOptions::default())
}

/// Enumerates every partition of the agents into at most `m` nonempty groups
/// and places each group's facility at that group's optimizer:
///
/// | metric    | total               | max                 |
/// |-----------|---------------------|---------------------|
/// | Euclidean | geometric median    | enclosing circle    |
/// | Manhattan | coordinate median   | Manhattan 1-centre  |
///
/// Group optima are computed once per subset and shared across partitions.
pub fn optimal_welfare_with(
    profile: &AgentProfile,
    spec: &FacilitySpec,
    objective: WelfareObjective,
    opts: OracleOptions,
) -> Result<(f64, Solution)> {
    spec.validate(profile.len())?;
    if spec.capacities.is_some() {
        return Err(Error::invalid(
            "the partition oracle is uncapacitated; use optimal_capacitated_assignment",
        ));
    }
    let n = profile.len();
    let m = spec.m;
    let agents = profile.agents();

    if m == 1 {
        let loc = group_optimizer(agents, profile.metric(), objective, opts)?;
        return finish(profile, vec![loc], objective);
    }
    let cap = opts.partition_cap.min(MASK_LIMIT);
    if n > cap {
        return Err(Error::ResourceCap {
            what: "agents for multi-facility partition oracle",
            value: n,
            cap,
        });
    }
    if m >= n {
        let mut locations = agents.to_vec();
        locations.resize(m, agents[0].clone());
        return finish(profile, locations, objective);
    }

    // Optimal location and welfare of every nonempty subset.
    let groups: Vec<(Point, f64)> = (1usize..1 << n)
        .into_par_iter()
        .map(|mask| {
            let members: Vec<Point> = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| agents[i].clone())
                .collect();
            let loc = group_optimizer(&members, profile.metric(), objective, opts)?;
            let value = match objective {
                WelfareObjective::Total => total_distance(&members, &loc, profile.metric()),
                WelfareObjective::Max => max_distance(&members, &loc, profile.metric()),
            };
            Ok((loc, value))
        })
        .collect::<Result<_>>()?;
    let group = |mask: usize| &groups[mask - 1];

    let partitions = restricted_growth_strings(n, m);
    let (_, best_labels) = partitions
        .par_iter()
        .map(|labels| {
            let masks = label_masks(labels);
            let value = masks
                .iter()
                .fold(0.0, |acc, &mask| objective.combine(acc, group(mask).1));
            (value, labels)
        })
        .reduce_with(|a, b| {
            if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .expect("at least one partition");

    let mut locations: Vec<Point> = label_masks(best_labels)
        .into_iter()
        .map(|mask| group(mask).0.clone())
        .collect();
    locations.resize(m, locations[0].clone());
    finish(profile, locations, objective)
}

fn finish(
    profile: &AgentProfile,
    locations: Vec<Point>,
    objective: WelfareObjective,
) -> Result<(f64, Solution)> {
    let assignment = assign_nearest(&locations, profile)?;
    let solution = Solution {
        locations,
        assignment,
    };
    Ok((evaluate(profile, &solution, objective)?, solution))
}

fn group_optimizer(
    members: &[Point],
    metric: Metric,
    objective: WelfareObjective,
    opts: OracleOptions,
) -> Result<Point> {
    match (metric, objective) {
        (Metric::Euclidean, WelfareObjective::Total) => {
            match geometric_median_with(members, opts.weiszfeld) {
                Err(Error::Convergence { best, .. }) => Ok(best),
                other => other,
            }
        }
        (Metric::Euclidean, WelfareObjective::Max) => {
            Ok(smallest_enclosing_circle(members)?.center)
        }
        (Metric::Manhattan, WelfareObjective::Total) => {
            coordinate_median(members, EvenMedian::Lower)
        }
        (Metric::Manhattan, WelfareObjective::Max) => manhattan_one_center(members),
    }
}

/// All labelings `a[0] = 0, a[i] <= 1 + max(a[..i])` with labels below `m`;
/// one per partition into at most `m` nonempty groups.
pub(crate) fn restricted_growth_strings(n: usize, m: usize) -> Vec<Vec<u8>> {
    fn extend(prefix: &mut Vec<u8>, top: u8, n: usize, m: usize, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let limit = (top as usize + 1).min(m - 1) as u8;
        for label in 0..=limit {
            prefix.push(label);
            extend(prefix, top.max(label), n, m, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    let mut prefix = vec![0u8];
    extend(&mut prefix, 0, n, m, &mut out);
    out
}

fn label_masks(labels: &[u8]) -> Vec<usize> {
    let groups = labels.iter().copied().max().unwrap_or(0) as usize + 1;
    let mut masks = vec![0usize; groups];
    for (i, &l) in labels.iter().enumerate() {
        masks[l as usize] |= 1 << i;
    }
    masks
}
