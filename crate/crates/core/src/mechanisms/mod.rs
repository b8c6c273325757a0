//! Deterministic facility-location mechanisms behind one interface.
//!
//! A [`MechanismDescriptor`] is a closed, serializable description of a
//! mechanism. [`run_mechanism`] turns a descriptor, a reported profile and a
//! facility specification into a [`Solution`], so the axiom checkers can
//! re-run any mechanism on perturbed profiles without knowing what it is.

mod dictatorship;
mod percentile;
mod single;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{common_dim, distance_unchecked, EvenMedian, Metric, Point};
use crate::welfare::{optimal_capacitated_assignment, WelfareObjective};

pub use dictatorship::{lexicographic_first_agent, lexicographic_walk, serial_dictatorship};
pub use percentile::{multi_dim_median, percentile_1d, percentile_multi_d, Axes};
pub use single::{coordinate_extreme, geometric_median_location, one_centre, Extreme};

/// Reported agent locations, indexed by agent, plus the metric they live in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile")]
pub struct AgentProfile {
    agents: Vec<Point>,
    metric: Metric,
}

#[derive(Deserialize)]
struct RawProfile {
    agents: Vec<Point>,
    metric: Metric,
}

impl TryFrom<RawProfile> for AgentProfile {
    type Error = Error;

    fn try_from(raw: RawProfile) -> Result<Self> {
        AgentProfile::new(raw.agents, raw.metric)
    }
}

impl AgentProfile {
    pub fn new(agents: Vec<Point>, metric: Metric) -> Result<Self> {
        common_dim(&agents)?;
        Ok(AgentProfile { agents, metric })
    }

    /// Convenience constructor for 2-d profiles.
    pub fn planar(agents: &[(f64, f64)], metric: Metric) -> Result<Self> {
        let pts = agents
            .iter()
            .map(|&(x, y)| Point::new([x, y]))
            .collect::<Result<Vec<_>>>()?;
        AgentProfile::new(pts, metric)
    }

    pub fn line(xs: &[f64], metric: Metric) -> Result<Self> {
        let pts = xs
            .iter()
            .map(|&x| Point::new([x]))
            .collect::<Result<Vec<_>>>()?;
        AgentProfile::new(pts, metric)
    }

    pub fn agents(&self) -> &[Point] {
        &self.agents
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.agents[0].dim()
    }

    /// The same profile with agent `i` reporting `report` instead.
    pub fn with_report(&self, i: usize, report: Point) -> Result<Self> {
        if i >= self.len() {
            return Err(Error::invalid(format!("agent {i} out of range")));
        }
        report.check_dim(self.dim())?;
        let mut agents = self.agents.clone();
        agents[i] = report;
        Ok(AgentProfile {
            agents,
            metric: self.metric,
        })
    }

    /// Profile whose agent `k` is this profile's agent `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        Ok(AgentProfile {
            agents: perm.iter().map(|&i| self.agents[i].clone()).collect(),
            metric: self.metric,
        })
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::invalid(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in perm {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::invalid(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
    }
    Ok(())
}

/// Number of facilities and, for the capacitated model, per-facility capacities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacilitySpec {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacities: Option<Vec<usize>>,
}

impl FacilitySpec {
    pub fn uncapacitated(m: usize) -> Self {
        FacilitySpec {
            m,
            capacities: None,
        }
    }

    pub fn capacitated(capacities: Vec<usize>) -> Self {
        FacilitySpec {
            m: capacities.len(),
            capacities: Some(capacities),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.m == 0 {
            return Err(Error::invalid("at least one facility is required"));
        }
        if let Some(caps) = &self.capacities {
            if caps.len() != self.m {
                return Err(Error::invalid(format!(
                    "{} capacities given for {} facilities",
                    caps.len(),
                    self.m
                )));
            }
            let total: usize = caps.iter().sum();
            if total < n {
                return Err(Error::invalid(format!(
                    "total capacity {total} cannot serve {n} agents"
                )));
            }
        }
        Ok(())
    }
}

/// Facility locations plus the facility serving each agent (0-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub locations: Vec<Point>,
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    #[serde(rename = "percentile_1d")]
    Percentile1D,
    #[serde(rename = "percentile_multi_d")]
    PercentileMultiD,
    MultiDimMedian,
    SerialDictatorship,
    OneCentre,
    CoordinateMax,
    CoordinateMin,
    LexicographicFirstAgent,
    GeometricMedian,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 9] = [
        MechanismKind::Percentile1D,
        MechanismKind::PercentileMultiD,
        MechanismKind::MultiDimMedian,
        MechanismKind::SerialDictatorship,
        MechanismKind::OneCentre,
        MechanismKind::CoordinateMax,
        MechanismKind::CoordinateMin,
        MechanismKind::LexicographicFirstAgent,
        MechanismKind::GeometricMedian,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MechanismKind::Percentile1D => "percentile_1d",
            MechanismKind::PercentileMultiD => "percentile_multi_d",
            MechanismKind::MultiDimMedian => "multi_dim_median",
            MechanismKind::SerialDictatorship => "serial_dictatorship",
            MechanismKind::OneCentre => "one_centre",
            MechanismKind::CoordinateMax => "coordinate_max",
            MechanismKind::CoordinateMin => "coordinate_min",
            MechanismKind::LexicographicFirstAgent => "lexicographic_first_agent",
            MechanismKind::GeometricMedian => "geometric_median",
        }
    }

    fn single_facility(self) -> bool {
        matches!(
            self,
            MechanismKind::MultiDimMedian
                | MechanismKind::OneCentre
                | MechanismKind::CoordinateMax
                | MechanismKind::CoordinateMin
                | MechanismKind::GeometricMedian
        )
    }
}

impl std::str::FromStr for MechanismKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MechanismKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<_> = MechanismKind::ALL.iter().map(|k| k.as_str()).collect();
                Error::invalid(format!(
                    "unknown mechanism `{s}` (known: {})",
                    known.join(", ")
                ))
            })
    }
}

impl std::fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Nearest-facility ties always go to the lowest facility index; only the
/// even-median rule is configurable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TiePolicy {
    #[serde(default)]
    pub even_median: EvenMedian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismDescriptor {
    pub kind: MechanismKind,
    /// One parameter vector per facility, one entry per axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percentile_params: Option<Vec<Vec<f64>>>,
    /// Rows are the orthonormal axes; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<Vec<f64>>>,
    /// Dictatorship order over agent indices; identity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_order: Option<Vec<usize>>,
    #[serde(default)]
    pub tie_policy: TiePolicy,
}

impl MechanismDescriptor {
    pub fn new(kind: MechanismKind) -> Self {
        MechanismDescriptor {
            kind,
            percentile_params: None,
            axes: None,
            agent_order: None,
            tie_policy: TiePolicy::default(),
        }
    }

    pub fn percentile_1d(params: &[f64]) -> Self {
        MechanismDescriptor {
            percentile_params: Some(params.iter().map(|&p| vec![p]).collect()),
            ..Self::new(MechanismKind::Percentile1D)
        }
    }

    pub fn percentile_multi_d(params: Vec<Vec<f64>>) -> Self {
        MechanismDescriptor {
            percentile_params: Some(params),
            ..Self::new(MechanismKind::PercentileMultiD)
        }
    }

    pub fn multi_dim_median() -> Self {
        Self::new(MechanismKind::MultiDimMedian)
    }

    pub fn serial_dictatorship(order: Option<Vec<usize>>) -> Self {
        MechanismDescriptor {
            agent_order: order,
            ..Self::new(MechanismKind::SerialDictatorship)
        }
    }

    pub fn with_axes(mut self, axes: Vec<Vec<f64>>) -> Self {
        self.axes = Some(axes);
        self
    }

    /// Checks parameters against the kind and the instance they will run on.
    pub fn validate(&self, profile: &AgentProfile, spec: &FacilitySpec) -> Result<()> {
        use MechanismKind as K;
        spec.validate(profile.len())?;
        let d = profile.dim();
        let needs_params = matches!(self.kind, K::Percentile1D | K::PercentileMultiD);
        if needs_params != self.percentile_params.is_some() {
            return Err(Error::invalid(if needs_params {
                format!("{} requires percentile parameters", self.kind)
            } else {
                format!("{} takes no percentile parameters", self.kind)
            }));
        }
        if self.axes.is_some() && !matches!(self.kind, K::PercentileMultiD | K::MultiDimMedian) {
            return Err(Error::invalid(format!("{} takes no axes", self.kind)));
        }
        if self.agent_order.is_some() && self.kind != K::SerialDictatorship {
            return Err(Error::invalid(format!(
                "{} takes no agent order",
                self.kind
            )));
        }
        if self.kind.single_facility() && spec.m != 1 {
            return Err(Error::invalid(format!(
                "{} locates a single facility, spec asks for {}",
                self.kind, spec.m
            )));
        }
        if let Some(params) = &self.percentile_params {
            if params.len() != spec.m {
                return Err(Error::invalid(format!(
                    "{} parameter vectors for {} facilities",
                    params.len(),
                    spec.m
                )));
            }
            for p in params {
                if p.len() != d {
                    return Err(Error::invalid(format!(
                        "percentile vector {p:?} has {} entries for {d}-d agents",
                        p.len()
                    )));
                }
                if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::invalid(format!("percentile {bad} outside [0, 1]")));
                }
            }
        }
        if let Some(order) = &self.agent_order {
            check_permutation(order, profile.len())?;
        }
        match self.kind {
            K::Percentile1D if d != 1 => Err(Error::invalid(format!(
                "percentile_1d needs 1-d agents, got {d}-d"
            ))),
            K::OneCentre if d > 2 => Err(Error::invalid(format!(
                "one_centre needs 1-d or 2-d agents, got {d}-d"
            ))),
            _ => Ok(()),
        }?;
        if let Some(axes) = &self.axes {
            Axes::new(axes.clone(), d)?;
        }
        Ok(())
    }

    /// Facility locations chosen by this mechanism.
    pub fn locate(&self, profile: &AgentProfile, spec: &FacilitySpec) -> Result<Vec<Point>> {
        use MechanismKind as K;
        self.validate(profile, spec)?;
        let agents = profile.agents();
        let axes = self
            .axes
            .as_ref()
            .map(|a| Axes::new(a.clone(), profile.dim()))
            .transpose()?;
        match self.kind {
            K::Percentile1D => {
                let mut xs: Vec<f64> = agents.iter().map(|p| p.x()).collect();
                xs.sort_by(f64::total_cmp);
                let params: Vec<f64> = self.params().iter().map(|p| p[0]).collect();
                Ok(percentile_1d(&xs, &params)?
                    .into_iter()
                    .map(Point::x1)
                    .collect())
            }
            K::PercentileMultiD => percentile_multi_d(profile, self.params(), axes.as_ref()),
            K::MultiDimMedian => Ok(vec![multi_dim_median(
                profile,
                axes.as_ref(),
                self.tie_policy.even_median,
            )?]),
            K::SerialDictatorship => {
                let identity: Vec<usize> = (0..profile.len()).collect();
                let order = self.agent_order.as_deref().unwrap_or(&identity);
                serial_dictatorship(profile, order, spec.m)
            }
            K::OneCentre => Ok(vec![one_centre(profile)?]),
            K::CoordinateMax => Ok(vec![coordinate_extreme(profile, Extreme::Max)]),
            K::CoordinateMin => Ok(vec![coordinate_extreme(profile, Extreme::Min)]),
            K::LexicographicFirstAgent => Ok(lexicographic_walk(profile, spec.m)),
            K::GeometricMedian => Ok(vec![geometric_median_location(profile)?]),
        }
    }

    fn params(&self) -> &[Vec<f64>] {
        self.percentile_params.as_deref().unwrap_or(&[])
    }
}

/// Runs a mechanism and completes its output into a [`Solution`].
///
/// Uncapacitated specs serve each agent from its nearest facility. With
/// capacities, agents get a minimum-total-distance capacity-feasible
/// assignment to the chosen locations.
pub fn run_mechanism(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
) -> Result<Solution> {
    let locations = desc.locate(profile, spec)?;
    let assignment = match &spec.capacities {
        None => assign_nearest(&locations, profile)?,
        Some(caps) => {
            optimal_capacitated_assignment(profile, &locations, caps, WelfareObjective::Total)?.0
        }
    };
    Ok(Solution {
        locations,
        assignment,
    })
}

/// Index of the nearest location for each agent; ties go to the lowest index.
pub fn assign_nearest(locations: &[Point], profile: &AgentProfile) -> Result<Vec<usize>> {
    if locations.is_empty() {
        return Err(Error::invalid("no facility locations"));
    }
    for l in locations {
        l.check_dim(profile.dim())?;
    }
    Ok(profile
        .agents()
        .iter()
        .map(|a| nearest(locations, a, profile.metric()).0)
        .collect())
}

/// `(index, distance)` of the nearest location, lowest index on ties.
pub(crate) fn nearest(locations: &[Point], at: &Point, metric: Metric) -> (usize, f64) {
    let mut best = (0, distance_unchecked(&locations[0], at, metric));
    for (j, l) in locations.iter().enumerate().skip(1) {
        let d = distance_unchecked(l, at, metric);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}
