//! Welfare evaluation and exact small-instance optimal-welfare oracles.

mod capacitated;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::distance_unchecked;
use crate::mechanisms::{run_mechanism, AgentProfile, FacilitySpec, MechanismDescriptor, Solution};

pub use capacitated::{optimal_capacitated_assignment, CAPACITATED_CAP};
pub use oracle::{optimal_welfare, optimal_welfare_with, OracleOptions, DEFAULT_PARTITION_CAP};

/// Welfare values at or below this count as zero when forming ratios.
pub const ZERO_WELFARE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WelfareObjective {
    /// Utilitarian: sum of distances.
    Total,
    /// Egalitarian: largest distance.
    Max,
}

impl WelfareObjective {
    pub fn as_str(self) -> &'static str {
        match self {
            WelfareObjective::Total => "total",
            WelfareObjective::Max => "max",
        }
    }

    pub(crate) fn combine(self, acc: f64, d: f64) -> f64 {
        match self {
            WelfareObjective::Total => acc + d,
            WelfareObjective::Max => acc.max(d),
        }
    }
}

impl std::str::FromStr for WelfareObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "total" => Ok(WelfareObjective::Total),
            "max" => Ok(WelfareObjective::Max),
            other => Err(Error::invalid(format!(
                "unknown objective `{other}` (expected `total` or `max`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ratio {
    Finite(f64),
    /// Positive mechanism welfare against a zero optimum.
    Infinite,
}

impl Ratio {
    pub fn value(self) -> f64 {
        match self {
            Ratio::Finite(r) => r,
            Ratio::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Ratio::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub mechanism_welfare: f64,
    pub optimal_welfare: f64,
    pub ratio: Ratio,
}

impl RatioReport {
    pub fn new(mechanism_welfare: f64, optimal_welfare: f64) -> Self {
        let ratio = if optimal_welfare > ZERO_WELFARE {
            Ratio::Finite(mechanism_welfare / optimal_welfare)
        } else if mechanism_welfare > ZERO_WELFARE {
            Ratio::Infinite
        } else {
            Ratio::Finite(1.0)
        };
        RatioReport {
            mechanism_welfare,
            optimal_welfare,
            ratio,
        }
    }
}

/// Total or maximum distance from each agent to its assigned facility.
pub fn evaluate(
    profile: &AgentProfile,
    solution: &Solution,
    objective: WelfareObjective,
) -> Result<f64> {
    let n = profile.len();
    if solution.assignment.len() != n {
        return Err(Error::invalid(format!(
            "assignment covers {} agents, profile has {n}",
            solution.assignment.len()
        )));
    }
    for l in &solution.locations {
        l.check_dim(profile.dim())?;
    }
    profile
        .agents()
        .iter()
        .zip(&solution.assignment)
        .try_fold(0.0, |acc, (agent, &j)| {
            let loc = solution.locations.get(j).ok_or_else(|| {
                Error::invalid(format!(
                    "assignment names facility {j}, only {} exist",
                    solution.locations.len()
                ))
            })?;
            Ok(objective.combine(acc, distance_unchecked(agent, loc, profile.metric())))
        })
}

/// `total / n`, a lower bound on the maximum distance.
pub fn max_distance_lower_bound(total: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    Ok(total / n as f64)
}

/// Runs the mechanism and compares its welfare with the exact optimum.
pub fn approximation_ratio(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
    objective: WelfareObjective,
) -> Result<RatioReport> {
    let solution = run_mechanism(desc, profile, spec)?;
    let achieved = evaluate(profile, &solution, objective)?;
    let (optimum, _) = optimal_welfare(profile, spec, objective)?;
    Ok(RatioReport::new(achieved, optimum))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Metric, Point};
    use crate::mechanisms::MechanismKind;

    fn corners() -> AgentProfile {
        AgentProfile::planar(
            &[(0., 0.), (0., 2.), (12., 0.), (12., 2.)],
            Metric::Euclidean,
        )
        .unwrap()
    }

    fn at(p: Point, n: usize) -> Solution {
        Solution {
            locations: vec![p],
            assignment: vec![0; n],
        }
    }

    #[test]
    fn evaluate_examples() {
        let total = evaluate(
            &corners(),
            &at(Point::xy(6., 1.), 4),
            WelfareObjective::Total,
        )
        .unwrap();
        assert!((total - 4.0 * 37f64.sqrt()).abs() < 1e-12);
        assert!((total - 24.33105).abs() < 1e-5);

        let shifted = evaluate(
            &corners(),
            &at(Point::xy(5., 1.), 4),
            WelfareObjective::Total,
        )
        .unwrap();
        assert!((shifted - 2.0 * (50f64.sqrt() + 26f64.sqrt())).abs() < 1e-12);

        let on_agents = Solution {
            locations: corners().agents().to_vec(),
            assignment: vec![0, 1, 2, 3],
        };
        assert_eq!(
            evaluate(&corners(), &on_agents, WelfareObjective::Max).unwrap(),
            0.0
        );
    }

    #[test]
    fn evaluate_uses_assignment_not_nearest() {
        let p = AgentProfile::planar(&[(0., 0.), (0., 0.)], Metric::Euclidean).unwrap();
        let s = Solution {
            locations: vec![Point::xy(0., 0.), Point::xy(100., 100.)],
            assignment: vec![0, 1],
        };
        let w = evaluate(&p, &s, WelfareObjective::Total).unwrap();
        assert!((w - 100.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn evaluate_errors() {
        assert!(evaluate(
            &corners(),
            &at(Point::xy(6., 1.), 3),
            WelfareObjective::Total
        )
        .is_err());
        let bad = Solution {
            locations: vec![Point::xy(0., 0.)],
            assignment: vec![0, 0, 0, 1],
        };
        assert!(evaluate(&corners(), &bad, WelfareObjective::Total).is_err());
    }

    #[test]
    fn lower_bound_examples() {
        assert!((max_distance_lower_bound(24.33105, 4).unwrap() - 6.0827625).abs() < 1e-7);
        assert_eq!(max_distance_lower_bound(0.0, 7).unwrap(), 0.0);
        assert_eq!(max_distance_lower_bound(10.0, 1).unwrap(), 10.0);
        assert!(max_distance_lower_bound(1.0, 0).is_err());
    }

    #[test]
    fn ratio_report_rules() {
        assert_eq!(RatioReport::new(2.0, 1.0).ratio, Ratio::Finite(2.0));
        assert_eq!(RatioReport::new(1.0, 0.0).ratio, Ratio::Infinite);
        assert_eq!(RatioReport::new(0.0, 0.0).ratio, Ratio::Finite(1.0));
    }

    #[test]
    fn approximation_ratio_examples() {
        let spec = FacilitySpec::uncapacitated(1);
        let p = AgentProfile::planar(&[(0., 0.), (0., 0.), (0., 1.)], Metric::Euclidean).unwrap();
        let r = approximation_ratio(
            &MechanismDescriptor::multi_dim_median(),
            &p,
            &spec,
            WelfareObjective::Max,
        )
        .unwrap();
        assert_eq!(r.mechanism_welfare, 1.0);
        assert!((r.optimal_welfare - 0.5).abs() < 1e-12);
        assert!((r.ratio.value() - 2.0).abs() < 1e-12);

        let p = AgentProfile::planar(&[(0., 1.), (1., 0.)], Metric::Euclidean).unwrap();
        let endpoint = MechanismDescriptor::percentile_multi_d(vec![vec![0., 0.], vec![1., 1.]]);
        let r = approximation_ratio(
            &endpoint,
            &p,
            &FacilitySpec::uncapacitated(2),
            WelfareObjective::Max,
        )
        .unwrap();
        assert_eq!(r.mechanism_welfare, 1.0);
        assert_eq!(r.optimal_welfare, 0.0);
        assert!(r.ratio.is_infinite());

        let p = AgentProfile::planar(&[(3., -2.)], Metric::Euclidean).unwrap();
        for objective in [WelfareObjective::Total, WelfareObjective::Max] {
            let r = approximation_ratio(
                &MechanismDescriptor::new(MechanismKind::MultiDimMedian),
                &p,
                &spec,
                objective,
            )
            .unwrap();
            assert_eq!(r.ratio, Ratio::Finite(1.0));
        }
    }
}
