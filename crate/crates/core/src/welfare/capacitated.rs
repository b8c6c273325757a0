use crate::error::{Error, Result};
use crate::geometry::{distance_unchecked, Point};
use crate::mechanisms::AgentProfile;

use super::WelfareObjective;

/// Largest `n` the exhaustive capacitated search accepts.
pub const CAPACITATED_CAP: usize = 10;

/// Best capacity-respecting assignment of agents to fixed locations.
///
/// Depth-first enumeration over agents, trying facilities in index order and
/// pruning branches whose partial welfare already matches the incumbent.
/// Among optimal assignments the lexicographically smallest is returned.
pub fn optimal_capacitated_assignment(
    profile: &AgentProfile,
    locations: &[Point],
    capacities: &[usize],
    objective: WelfareObjective,
) -> Result<(Vec<usize>, f64)> {
    let n = profile.len();
    if locations.is_empty() || locations.len() != capacities.len() {
        return Err(Error::invalid(format!(
            "{} locations with {} capacities",
            locations.len(),
            capacities.len()
        )));
    }
    for l in locations {
        l.check_dim(profile.dim())?;
    }
    let total: usize = capacities.iter().sum();
    if total < n {
        return Err(Error::invalid(format!(
            "total capacity {total} cannot serve {n} agents"
        )));
    }
    if n > CAPACITATED_CAP {
        return Err(Error::ResourceCap {
            what: "agents for capacitated assignment oracle",
            value: n,
            cap: CAPACITATED_CAP,
        });
    }

    let cost: Vec<Vec<f64>> = profile
        .agents()
        .iter()
        .map(|a| {
            locations
                .iter()
                .map(|l| distance_unchecked(a, l, profile.metric()))
                .collect()
        })
        .collect();

    let mut search = Search {
        cost: &cost,
        objective,
        remaining: capacities.to_vec(),
        current: Vec::with_capacity(n),
        best: None,
    };
    search.descend(0.0);
    let (assignment, value) = search.best.expect("capacity is sufficient");
    Ok((assignment, value))
}

struct Search<'a> {
    cost: &'a [Vec<f64>],
    objective: WelfareObjective,
    remaining: Vec<usize>,
    current: Vec<usize>,
    best: Option<(Vec<usize>, f64)>,
}

impl Search<'_> {
    fn descend(&mut self, partial: f64) {
        if let Some((_, b)) = &self.best {
            if partial >= *b {
                return;
            }
        }
        let i = self.current.len();
        if i == self.cost.len() {
            self.best = Some((self.current.clone(), partial));
            return;
        }
        for j in 0..self.remaining.len() {
            if self.remaining[j] == 0 {
                continue;
            }
            self.remaining[j] -= 1;
            self.current.push(j);
            let next = self.objective.combine(partial, self.cost[i][j]);
            self.descend(next);
            self.current.pop();
            self.remaining[j] += 1;
        }
    }
}
