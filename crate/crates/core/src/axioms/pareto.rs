use itertools::Itertools;
use rayon::prelude::*;

use crate::error::Result;
use crate::geometry::{
    coordinate_median, geometric_median, manhattan_one_center, smallest_enclosing_circle,
    EvenMedian, Metric, Point, DEFAULT_TOLERANCE,
};
use crate::mechanisms::{assign_nearest, AgentProfile, FacilitySpec, Solution};

use super::candidates::budget_candidates;
use super::{
    check_locations, domination_margin, served_distances, Certificate, CertificateKind,
    SearchBudget, Witness,
};

/// Subsets of the agents get their own median candidates up to this size.
const SUBSET_LIMIT: usize = 8;

/// Cap on the `m`-subsets of agent locations tried as whole solutions.
const COMBINATION_LIMIT: usize = 20_000;

/// Looks for a solution that leaves no agent farther from its nearest
/// facility and brings at least one strictly closer.
///
/// Candidates are the budget grid, agent locations, coordinate and geometric
/// medians of agent subsets, and for several facilities, every single-facility
/// replacement plus every placement on distinct agent locations. The
/// dominating candidate with the largest total saving is reported.
pub fn check_pareto(
    profile: &AgentProfile,
    solution: &Solution,
    budget: &SearchBudget,
) -> Result<Option<Certificate>> {
    check_locations(profile, &solution.locations)?;
    let before = served_distances(profile, &solution.locations);
    let points = point_candidates(profile, budget)?;
    let m = solution.locations.len();

    let mut layouts: Vec<Vec<Point>> = Vec::new();
    if m == 1 {
        layouts.extend(points.into_iter().map(|p| vec![p]));
    } else {
        for j in 0..m {
            for p in &points {
                let mut locs = solution.locations.clone();
                locs[j] = p.clone();
                layouts.push(locs);
            }
        }
        let mut distinct = profile.agents().to_vec();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        distinct.dedup();
        if distinct.len() >= m && binomial(distinct.len(), m) <= COMBINATION_LIMIT {
            layouts.extend(distinct.into_iter().combinations(m));
        }
    }

    let best = layouts
        .par_iter()
        .enumerate()
        .filter_map(|(i, locs)| {
            domination_margin(&before, &served_distances(profile, locs))
                .map(|(_, total)| (total, i))
        })
        .reduce_with(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        });

    let Some((_, idx)) = best else {
        return Ok(None);
    };
    let locations = layouts.swap_remove(idx);
    let (improvement, _) = domination_margin(&before, &served_distances(profile, &locations))
        .expect("selected candidate dominates");
    let assignment = assign_nearest(&locations, profile)?;
    Ok(Some(Certificate {
        kind: CertificateKind::ParetoDomination,
        original_profile: profile.clone(),
        mechanism: None,
        facilities: FacilitySpec::uncapacitated(m),
        witness: Witness::Dominating {
            original: solution.clone(),
            dominating: Solution {
                locations,
                assignment,
            },
        },
        improvement,
    }))
}

fn point_candidates(profile: &AgentProfile, budget: &SearchBudget) -> Result<Vec<Point>> {
    let agents = profile.agents();
    let mut out = budget_candidates(agents, budget)?;
    out.extend(agents.iter().cloned());

    let n = agents.len();
    let subsets: Vec<Vec<Point>> = if n <= SUBSET_LIMIT {
        (1usize..1 << n)
            .filter(|mask| mask.count_ones() >= 2)
            .map(|mask| {
                (0..n)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| agents[i].clone())
                    .collect()
            })
            .collect()
    } else {
        vec![agents.to_vec()]
    };
    for group in &subsets {
        out.push(coordinate_median(group, EvenMedian::Lower)?);
        out.push(coordinate_median(group, EvenMedian::Upper)?);
        if let Ok(p) = geometric_median(group, DEFAULT_TOLERANCE) {
            out.push(p);
        }
    }
    match profile.metric() {
        Metric::Euclidean if profile.dim() <= 2 => {
            out.push(smallest_enclosing_circle(agents)?.center)
        }
        Metric::Manhattan if profile.dim() <= 2 => out.push(manhattan_one_center(agents)?),
        _ => {}
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::verify_certificate;

    fn at(p: Point, n: usize) -> Solution {
        Solution {
            locations: vec![p],
            assignment: vec![0; n],
        }
    }

    #[test]
    fn min_corner_is_dominated_by_the_median() {
        let p = AgentProfile::planar(&[(0., 2.), (1., 0.), (2., 1.)], Metric::Manhattan).unwrap();
        let cert = check_pareto(&p, &at(Point::xy(0., 0.), 3), &SearchBudget::default())
            .unwrap()
            .expect("dominated");
        let Witness::Dominating { dominating, .. } = &cert.witness else {
            panic!("wrong witness")
        };
        assert_eq!(dominating.locations, vec![Point::xy(1., 1.)]);
        assert!(verify_certificate(&cert).unwrap());
    }

    #[test]
    fn optimal_points_are_not_dominated() {
        let p = AgentProfile::planar(&[(0., 1.), (1., 0.)], Metric::Manhattan).unwrap();
        assert!(
            check_pareto(&p, &at(Point::xy(1., 1.), 2), &SearchBudget::default())
                .unwrap()
                .is_none()
        );
        let p = AgentProfile::planar(&[(0., 0.), (4., 0.), (0., 4.)], Metric::Euclidean).unwrap();
        let gm = geometric_median(p.agents(), 1e-12).unwrap();
        assert!(check_pareto(&p, &at(gm, 3), &SearchBudget::default())
            .unwrap()
            .is_none());
    }

    #[test]
    fn far_facility_is_dominated() {
        let p = AgentProfile::planar(&[(0., 0.), (1., 0.)], Metric::Euclidean).unwrap();
        let cert = check_pareto(&p, &at(Point::xy(10., 10.), 2), &SearchBudget::default())
            .unwrap()
            .unwrap();
        assert!(verify_certificate(&cert).unwrap());
    }

    #[test]
    fn two_facilities_moved_onto_agents() {
        let p = AgentProfile::planar(&[(0., 0.), (10., 0.), (0., 10.)], Metric::Euclidean).unwrap();
        let s = Solution {
            locations: vec![Point::xy(0., 0.), Point::xy(20., 20.)],
            assignment: vec![0, 0, 0],
        };
        let cert = check_pareto(&p, &s, &SearchBudget::with_resolution(1.0))
            .unwrap()
            .unwrap();
        assert!(verify_certificate(&cert).unwrap());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(4, 4), 1);
    }
}
