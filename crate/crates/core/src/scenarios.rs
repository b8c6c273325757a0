//! Named fixtures for the concrete instances used in the source proofs, each
//! bundled with its expected outcomes.
//!
//! Fixture names are stable identifiers used by the CLI.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::axioms::{
    check_anonymity, check_pareto, check_strategy_proofness, find_manipulation, multiset_shift,
    verify_certificate, Certificate, SearchBudget, Witness,
};
use crate::error::{Error, Result};
use crate::geometry::{geometric_median, total_distance, Metric, Point};
use crate::harness::format::{num, point as fmt_point, points as fmt_points};
use crate::mechanisms::{
    run_mechanism, AgentProfile, FacilitySpec, MechanismDescriptor, MechanismKind, Solution,
};
use crate::welfare::{
    evaluate, optimal_capacitated_assignment, optimal_welfare, Ratio, RatioReport, WelfareObjective,
};

pub const POSITION_TOLERANCE: f64 = 1e-6;
pub const WELFARE_TOLERANCE: f64 = 1e-9;

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Source {
    /// Stated in the literature; `anchor` locates the statement.
    Literature { anchor: &'static str },
    /// Established by an independent computation, e.g. dense sampling.
    Computed { method: &'static str },
    /// Follows directly from a definition.
    Definition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Expected {
    Value {
        value: f64,
        tolerance: f64,
    },
    Location {
        point: Point,
        tolerance: f64,
    },
    /// Facility multiset, order ignored.
    Locations {
        points: Vec<Point>,
        tolerance: f64,
    },
    /// Open interval.
    Between {
        low: f64,
        high: f64,
    },
    AtLeast {
        bound: f64,
    },
    Infinite,
    Flag {
        value: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Measured {
    Scalar(f64),
    Location(Point),
    Locations(Vec<Point>),
    Ratio(Ratio),
    Flag(bool),
}

impl Expected {
    fn accepts(&self, m: &Measured) -> bool {
        match (self, m) {
            (Expected::Value { value, tolerance }, Measured::Scalar(x)) => {
                (x - value).abs() <= *tolerance
            }
            (Expected::Value { value, tolerance }, Measured::Ratio(Ratio::Finite(x))) => {
                (x - value).abs() <= *tolerance
            }
            (Expected::Location { point, tolerance }, Measured::Location(p)) => {
                p.dim() == point.dim() && p.max_abs_diff(point) <= *tolerance
            }
            (Expected::Locations { points, tolerance }, Measured::Locations(ps)) => {
                multiset_shift(points, ps) <= *tolerance
            }
            (Expected::Between { low, high }, Measured::Scalar(x)) => low < x && x < high,
            (Expected::Between { low, high }, Measured::Ratio(Ratio::Finite(x))) => {
                low < x && x < high
            }
            (Expected::AtLeast { bound }, Measured::Scalar(x)) => x >= bound,
            (Expected::Infinite, Measured::Ratio(r)) => r.is_infinite(),
            (Expected::Flag { value }, Measured::Flag(b)) => value == b,
            _ => false,
        }
    }
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expected::Value { value, tolerance } => {
                write!(f, "{} ± {}", num(*value), num(*tolerance))
            }
            Expected::Location { point, tolerance } => {
                write!(f, "{} ± {}", fmt_point(point), num(*tolerance))
            }
            Expected::Locations { points, tolerance } => {
                write!(f, "{{{}}} ± {}", fmt_points(points), num(*tolerance))
            }
            Expected::Between { low, high } => write!(f, "in ({}, {})", num(*low), num(*high)),
            Expected::AtLeast { bound } => write!(f, ">= {}", num(*bound)),
            Expected::Infinite => f.write_str("inf"),
            Expected::Flag { value } => write!(f, "{value}"),
        }
    }
}

impl fmt::Display for Measured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measured::Scalar(x) => f.write_str(&num(*x)),
            Measured::Location(p) => f.write_str(&fmt_point(p)),
            Measured::Locations(ps) => write!(f, "{{{}}}", fmt_points(ps)),
            Measured::Ratio(r) => f.write_str(&num(r.value())),
            Measured::Flag(b) => write!(f, "{b}"),
        }
    }
}

type Measure = Box<dyn Fn() -> Result<Measured> + Send + Sync>;

pub struct Expectation {
    pub quantity: &'static str,
    pub expected: Expected,
    pub source: Source,
    measure: Measure,
}

impl Expectation {
    fn new(
        quantity: &'static str,
        expected: Expected,
        source: Source,
        measure: impl Fn() -> Result<Measured> + Send + Sync + 'static,
    ) -> Self {
        Expectation {
            quantity,
            expected,
            source,
            measure: Box::new(measure),
        }
    }

    pub fn evaluate(&self) -> Outcome {
        let (measured, error) = match (self.measure)() {
            Ok(m) => (Some(m), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let passed = measured.as_ref().is_some_and(|m| self.expected.accepts(m));
        Outcome {
            quantity: self.quantity,
            expected: self.expected.clone(),
            measured,
            error,
            passed,
            source: self.source,
        }
    }
}

pub struct Scenario {
    pub name: &'static str,
    pub anchor: &'static str,
    pub profile: AgentProfile,
    pub spec: FacilitySpec,
    pub mechanism: Option<MechanismDescriptor>,
    pub expectations: Vec<Expectation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub quantity: &'static str,
    pub expected: Expected,
    pub measured: Option<Measured>,
    pub error: Option<String>,
    pub passed: bool,
    pub source: Source,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: &'static str,
    pub anchor: &'static str,
    pub outcomes: Vec<Outcome>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

type Builder = fn() -> Result<Scenario>;

const REGISTRY: &[(&str, &str, Builder)] = &[
    ("thm1_manipulation", A_GM_LOWER_BOUND, thm1_manipulation),
    (
        "onecentre_manipulation",
        A_ONECENTRE,
        onecentre_manipulation,
    ),
    ("thm4_case1", A_PERCENTILE_UNBOUNDED, thm4_case1),
    ("thm4_case2", A_PERCENTILE_UNBOUNDED, thm4_case2),
    ("thm4_case3", A_PERCENTILE_UNBOUNDED, thm4_case3),
    ("thm3_construction", A_MULTI_FACILITY, thm3_construction),
    ("capacitated_even", A_CAPACITATED, capacitated_even),
    ("capacitated_odd", A_CAPACITATED, capacitated_odd),
    (
        "manhattan_2agent_max",
        A_MANHATTAN_SMALL,
        manhattan_2agent_max,
    ),
    (
        "manhattan_2agent_min",
        A_MANHATTAN_SMALL,
        manhattan_2agent_min,
    ),
    (
        "manhattan_3agent_median",
        A_MANHATTAN_SMALL,
        manhattan_3agent_median,
    ),
    (
        "manhattan_3agent_max_dominated",
        A_MANHATTAN_FOUR,
        manhattan_3agent_max_dominated,
    ),
    (
        "manhattan_4agent_min_dominated",
        A_MANHATTAN_FOUR,
        manhattan_4agent_min_dominated,
    ),
    (
        "manhattan_median_optimal_total",
        A_MANHATTAN_MEDIAN,
        manhattan_median_optimal_total,
    ),
    ("sd_anonymity_violation", A_SD, sd_anonymity_violation),
    (
        "lexicographic_vertical_lie",
        A_LEXICOGRAPHIC,
        lexicographic_vertical_lie,
    ),
];

const A_GM_LOWER_BOUND: &str =
    "single facility, total distance: lower bound argument on the four-corner instance";
const A_ONECENTRE: &str =
    "single facility, maximum distance: enclosing-circle mechanism manipulated by the top agent";
const A_PERCENTILE_UNBOUNDED: &str =
    "welfare bounds: percentile mechanisms have unbounded maximum-distance ratio";
const A_MULTI_FACILITY: &str =
    "multiple uncapacitated facilities: impossibility construction with clustered agents";
const A_CAPACITATED: &str = "capacitated facilities: impossibility construction";
const A_MANHATTAN_SMALL: &str =
    "Manhattan distances: coordinate-wise mechanisms for up to three agents";
const A_MANHATTAN_FOUR: &str = "Manhattan distances: impossibility for four or more agents";
const A_MANHATTAN_MEDIAN: &str =
    "Manhattan distances: median minimizes total and 2-approximates maximum distance";
const A_SD: &str = "formal background: serial dictatorship is not anonymous";
const A_LEXICOGRAPHIC: &str =
    "formal background: lexicographic first-agent rule is anonymous but not strategy proof";

/// `(name, anchor)` for every registered fixture.
pub fn list_scenarios() -> Vec<(&'static str, &'static str)> {
    REGISTRY.iter().map(|(n, a, _)| (*n, *a)).collect()
}

pub fn scenario(name: &str) -> Result<Scenario> {
    REGISTRY
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, build)| build())
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))?
}

pub fn run_scenario(name: &str) -> Result<ScenarioReport> {
    let s = scenario(name)?;
    Ok(ScenarioReport {
        name: s.name,
        anchor: s.anchor,
        outcomes: s
            .expectations
            .par_iter()
            .map(Expectation::evaluate)
            .collect(),
    })
}

/// Every fixture, in registry order.
pub fn run_all() -> Result<Vec<ScenarioReport>> {
    REGISTRY
        .par_iter()
        .map(|(name, _, _)| run_scenario(name))
        .collect()
}

// Measurement helpers. Each closure owns its inputs so a fixture can be
// evaluated in any order.

fn lit(anchor: &'static str) -> Source {
    Source::Literature { anchor }
}

fn value(v: f64) -> Expected {
    Expected::Value {
        value: v,
        tolerance: WELFARE_TOLERANCE,
    }
}

fn at(p: Point) -> Expected {
    Expected::Location {
        point: p,
        tolerance: POSITION_TOLERANCE,
    }
}

fn at_all(points: Vec<Point>) -> Expected {
    Expected::Locations {
        points,
        tolerance: POSITION_TOLERANCE,
    }
}

fn flag(value: bool) -> Expected {
    Expected::Flag { value }
}

fn locations_of(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
) -> impl Fn() -> Result<Measured> + Send + Sync + 'static {
    let (desc, profile, spec) = (desc.clone(), profile.clone(), spec.clone());
    move || {
        Ok(Measured::Locations(
            run_mechanism(&desc, &profile, &spec)?.locations,
        ))
    }
}

fn mechanism_welfare(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
    objective: WelfareObjective,
) -> impl Fn() -> Result<Measured> + Send + Sync + 'static {
    let (desc, profile, spec) = (desc.clone(), profile.clone(), spec.clone());
    move || {
        let s = run_mechanism(&desc, &profile, &spec)?;
        Ok(Measured::Scalar(evaluate(&profile, &s, objective)?))
    }
}

fn optimum(
    profile: &AgentProfile,
    spec: &FacilitySpec,
    objective: WelfareObjective,
) -> impl Fn() -> Result<Measured> + Send + Sync + 'static {
    let (profile, spec) = (profile.clone(), spec.clone());
    move || {
        Ok(Measured::Scalar(
            optimal_welfare(&profile, &spec, objective)?.0,
        ))
    }
}

fn ratio(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
    objective: WelfareObjective,
) -> impl Fn() -> Result<Measured> + Send + Sync + 'static {
    let (desc, profile, spec) = (desc.clone(), profile.clone(), spec.clone());
    move || {
        let r = crate::welfare::approximation_ratio(&desc, &profile, &spec, objective)?;
        Ok(Measured::Ratio(r.ratio))
    }
}

fn no_pareto_violation(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
    budget: SearchBudget,
) -> impl Fn() -> Result<Measured> + Send + Sync + 'static {
    let (desc, profile, spec) = (desc.clone(), profile.clone(), spec.clone());
    move || {
        let s = run_mechanism(&desc, &profile, &spec)?;
        Ok(Measured::Flag(
            check_pareto(&profile, &s, &budget)?.is_none(),
        ))
    }
}

fn no_manipulation(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
    budget: SearchBudget,
) -> impl Fn() -> Result<Measured> + Send + Sync + 'static {
    let (desc, profile, spec) = (desc.clone(), profile.clone(), spec.clone());
    move || {
        let c = check_strategy_proofness(&desc, &profile, &spec, &budget)?;
        Ok(Measured::Flag(c.is_none()))
    }
}

fn anonymous(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
) -> impl Fn() -> Result<Measured> + Send + Sync + 'static {
    let (desc, profile, spec) = (desc.clone(), profile.clone(), spec.clone());
    move || {
        Ok(Measured::Flag(
            check_anonymity(&desc, &profile, &spec)?.is_none(),
        ))
    }
}

/// Improvement of a certificate that replays, or an error if none was found
/// or it failed to replay.
fn verified_gain(cert: Option<Certificate>) -> Result<Measured> {
    let cert = cert.ok_or_else(|| Error::invalid("no certificate found"))?;
    if !verify_certificate(&cert)? {
        return Err(Error::invalid("certificate failed to replay"));
    }
    Ok(Measured::Scalar(cert.improvement))
}

/// Location the Pareto checker proposes in place of a single facility.
fn dominating_point(
    profile: &AgentProfile,
    facility: Point,
    budget: SearchBudget,
) -> impl Fn() -> Result<Measured> + Send + Sync + 'static {
    let profile = profile.clone();
    move || {
        let s = Solution {
            locations: vec![facility.clone()],
            assignment: vec![0; profile.len()],
        };
        let cert = check_pareto(&profile, &s, &budget)?
            .ok_or_else(|| Error::invalid("no dominating solution found"))?;
        if !verify_certificate(&cert)? {
            return Err(Error::invalid("certificate failed to replay"));
        }
        match cert.witness {
            Witness::Dominating { dominating, .. } => {
                Ok(Measured::Location(dominating.locations[0].clone()))
            }
            _ => Err(Error::invalid("unexpected witness")),
        }
    }
}

/// Minimum of `total_distance` over `samples` evenly spaced points of a circle.
pub fn circle_minimum_total(
    points: &[Point],
    center: &Point,
    radius: f64,
    samples: usize,
    metric: Metric,
) -> f64 {
    (0..samples)
        .into_par_iter()
        .map(|k| {
            let t = 2.0 * PI * k as f64 / samples as f64;
            let p = Point::xy(center.x() + radius * t.cos(), center.y() + radius * t.sin());
            total_distance(points, &p, metric)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

fn euclid(agents: &[(f64, f64)]) -> Result<AgentProfile> {
    AgentProfile::planar(agents, Metric::Euclidean)
}

fn manhattan(agents: &[(f64, f64)]) -> Result<AgentProfile> {
    AgentProfile::planar(agents, Metric::Manhattan)
}

fn thm1_manipulation() -> Result<Scenario> {
    let a = A_GM_LOWER_BOUND;
    let profile = euclid(&[(0., 0.), (0., 2.), (12., 0.), (12., 2.)])?;
    let spec = FacilitySpec::uncapacitated(1);
    let desc = MechanismDescriptor::new(MechanismKind::GeometricMedian);
    let lied = profile.with_report(2, Point::xy(12., 2.))?;
    let gm_total = 4.0 * 37f64.sqrt();
    let shifted_total = 2.0 * (50f64.sqrt() + 26f64.sqrt());

    let p = profile.clone();
    let q = profile.clone();
    let r = profile.clone();
    let l = lied.clone();
    let l2 = lied.clone();
    let l3 = lied.clone();
    let (d2, p2, s2) = (desc.clone(), profile.clone(), spec.clone());
    let expectations = vec![
        Expectation::new(
            "geometric median",
            at(Point::xy(6., 1.)),
            lit(a),
            move || Ok(Measured::Location(geometric_median(p.agents(), 1e-12)?)),
        ),
        Expectation::new(
            "total distance at the geometric median",
            value(gm_total),
            lit(a),
            mechanism_welfare(&desc, &profile, &spec, WelfareObjective::Total),
        ),
        Expectation::new(
            "total distance at (5,1)",
            value(shifted_total),
            lit(a),
            move || {
                Ok(Measured::Scalar(total_distance(
                    q.agents(),
                    &Point::xy(5., 1.),
                    Metric::Euclidean,
                )))
            },
        ),
        Expectation::new(
            "minimum total on the unit circle around the median",
            Expected::AtLeast {
                bound: shifted_total - WELFARE_TOLERANCE,
            },
            Source::Computed {
                method: "200000 evenly spaced samples",
            },
            move || {
                Ok(Measured::Scalar(circle_minimum_total(
                    r.agents(),
                    &Point::xy(6., 1.),
                    1.0,
                    200_000,
                    Metric::Euclidean,
                )))
            },
        ),
        Expectation::new(
            "ratio of unit-offset total to optimum",
            Expected::Between {
                low: 1.0003,
                high: 1.0004,
            },
            lit(a),
            move || {
                Ok(Measured::Ratio(
                    RatioReport::new(shifted_total, gm_total).ratio,
                ))
            },
        ),
        Expectation::new(
            "geometric median after the misreport",
            at(Point::xy(12., 2.)),
            lit(a),
            move || Ok(Measured::Location(geometric_median(l.agents(), 1e-12)?)),
        ),
        Expectation::new(
            "reported total after the misreport",
            Expected::Value {
                value: 12.0 + 2.0 * 37f64.sqrt(),
                tolerance: 1e-6,
            },
            lit(a),
            mechanism_welfare(&desc, &lied, &spec, WelfareObjective::Total),
        ),
        Expectation::new(
            "reported total is near 24.166",
            Expected::Value {
                value: 24.166,
                tolerance: 1e-3,
            },
            lit(a),
            mechanism_welfare(&desc, &l2, &spec, WelfareObjective::Total),
        ),
        Expectation::new(
            "minimum reported total two units from the new median",
            Expected::AtLeast { bound: 24.18 },
            Source::Computed {
                method: "200000 evenly spaced samples",
            },
            move || {
                Ok(Measured::Scalar(circle_minimum_total(
                    l3.agents(),
                    &Point::xy(12., 2.),
                    2.0,
                    200_000,
                    Metric::Euclidean,
                )))
            },
        ),
        Expectation::new(
            "agent at (12,0) gains by misreporting",
            Expected::AtLeast { bound: 4.0 },
            lit(a),
            move || {
                verified_gain(find_manipulation(
                    &d2,
                    &p2,
                    &s2,
                    &SearchBudget::default(),
                    2,
                )?)
            },
        ),
    ];
    Ok(Scenario {
        name: "thm1_manipulation",
        anchor: a,
        profile,
        spec,
        mechanism: Some(MechanismDescriptor::new(MechanismKind::GeometricMedian)),
        expectations,
    })
}

fn onecentre_manipulation() -> Result<Scenario> {
    let a = A_ONECENTRE;
    let profile = euclid(&[(0., 0.), (0., 0.), (0., 1.)])?;
    let spec = FacilitySpec::uncapacitated(1);
    let desc = MechanismDescriptor::new(MechanismKind::OneCentre);
    let lied = profile.with_report(2, Point::xy(0., 2.))?;
    let (d, p, s) = (desc.clone(), profile.clone(), spec.clone());
    let (d2, p2, s2) = (desc.clone(), profile.clone(), spec.clone());
    let expectations = vec![
        Expectation::new(
            "facility",
            at_all(vec![Point::xy(0., 0.5)]),
            lit(a),
            locations_of(&desc, &profile, &spec),
        ),
        Expectation::new(
            "facility after (0,1) reports (0,2)",
            at_all(vec![Point::xy(0., 1.)]),
            lit(a),
            locations_of(&desc, &lied, &spec),
        ),
        Expectation::new(
            "gain of the top agent",
            Expected::Value {
                value: 0.5,
                tolerance: WELFARE_TOLERANCE,
            },
            lit(a),
            move || verified_gain(find_manipulation(&d, &p, &s, &SearchBudget::default(), 2)?),
        ),
        Expectation::new(
            "best manipulation found by the checker",
            value(0.5),
            Source::Computed {
                method: "strategy-proofness search at resolution 0.5",
            },
            move || {
                verified_gain(check_strategy_proofness(
                    &d2,
                    &p2,
                    &s2,
                    &SearchBudget::default(),
                )?)
            },
        ),
        Expectation::new(
            "anonymous",
            flag(true),
            lit(a),
            anonymous(&desc, &profile, &spec),
        ),
    ];
    Ok(Scenario {
        name: "onecentre_manipulation",
        anchor: a,
        profile,
        spec,
        mechanism: Some(desc),
        expectations,
    })
}

/// Shared expectations for the unbounded-ratio cases.
fn unbounded_case(
    name: &'static str,
    profile: AgentProfile,
    desc: MechanismDescriptor,
    locations: Vec<Point>,
    mech_max: f64,
) -> Scenario {
    let a = A_PERCENTILE_UNBOUNDED;
    let spec = FacilitySpec::uncapacitated(2);
    let expectations = vec![
        Expectation::new(
            "mechanism facilities",
            at_all(locations),
            lit(a),
            locations_of(&desc, &profile, &spec),
        ),
        Expectation::new(
            "mechanism maximum distance",
            value(mech_max),
            lit(a),
            mechanism_welfare(&desc, &profile, &spec, WelfareObjective::Max),
        ),
        Expectation::new(
            "optimal maximum distance",
            value(0.0),
            lit(a),
            optimum(&profile, &spec, WelfareObjective::Max),
        ),
        Expectation::new(
            "maximum-distance ratio",
            Expected::Infinite,
            lit(a),
            ratio(&desc, &profile, &spec, WelfareObjective::Max),
        ),
        Expectation::new(
            "total-distance ratio",
            Expected::Infinite,
            lit(a),
            ratio(&desc, &profile, &spec, WelfareObjective::Total),
        ),
    ];
    Scenario {
        name,
        anchor: a,
        profile,
        spec,
        mechanism: Some(desc),
        expectations,
    }
}

/// `n` from the proof's ceiling formula.
fn agents_for(p: f64) -> usize {
    (3.0 / p).ceil() as usize
}

fn thm4_case1() -> Result<Scenario> {
    let p_max = 0.5;
    let n = agents_for(1.0 - p_max);
    let mut agents = vec![(0.0, 0.0); n - 1];
    agents.push((1.0, 1.0));
    let desc = MechanismDescriptor::percentile_multi_d(vec![vec![p_max, p_max], vec![0.0, 0.0]]);
    let mut s = unbounded_case(
        "thm4_case1",
        euclid(&agents)?,
        desc,
        vec![Point::xy(0., 0.), Point::xy(0., 0.)],
        SQRT_2,
    );
    s.expectations.push(Expectation::new(
        "agent count",
        value(6.0),
        Source::Literature {
            anchor: A_PERCENTILE_UNBOUNDED,
        },
        move || Ok(Measured::Scalar(n as f64)),
    ));
    Ok(s)
}

fn thm4_case2() -> Result<Scenario> {
    let p_max = 0.5;
    let n = agents_for(p_max);
    let mut agents = vec![(1.0, 1.0); n - 1];
    agents.push((0.0, 0.0));
    let desc = MechanismDescriptor::percentile_multi_d(vec![vec![1.0, 1.0], vec![p_max, p_max]]);
    let mut s = unbounded_case(
        "thm4_case2",
        euclid(&agents)?,
        desc,
        vec![Point::xy(1., 1.), Point::xy(1., 1.)],
        SQRT_2,
    );
    s.expectations.push(Expectation::new(
        "agent count",
        value(6.0),
        lit(A_PERCENTILE_UNBOUNDED),
        move || Ok(Measured::Scalar(n as f64)),
    ));
    Ok(s)
}

fn thm4_case3() -> Result<Scenario> {
    let desc = MechanismDescriptor::percentile_multi_d(vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
    Ok(unbounded_case(
        "thm4_case3",
        euclid(&[(0., 1.), (1., 0.)])?,
        desc,
        vec![Point::xy(0., 0.), Point::xy(1., 1.)],
        1.0,
    ))
}

fn endpoint() -> MechanismDescriptor {
    MechanismDescriptor::percentile_multi_d(vec![vec![0.0, 0.0], vec![1.0, 1.0]])
}

fn thm3_construction() -> Result<Scenario> {
    let a = A_MULTI_FACILITY;
    // n = 2k + 1 with k = 2
    let mut agents = vec![(0.0, 0.0); 4];
    agents.push((100.0, 100.0));
    let profile = euclid(&agents)?;
    let spec = FacilitySpec::uncapacitated(2);
    let desc = endpoint();
    let both_low = Solution {
        locations: vec![Point::xy(0., 0.), Point::xy(0., 0.)],
        assignment: vec![0; 5],
    };
    let p = profile.clone();
    let p2 = profile.clone();
    let expectations = vec![
        Expectation::new(
            "facilities of the endpoint placement",
            at_all(vec![Point::xy(0., 0.), Point::xy(100., 100.)]),
            lit(a),
            locations_of(&desc, &profile, &spec),
        ),
        Expectation::new(
            "optimal total distance",
            value(0.0),
            lit(a),
            optimum(&profile, &spec, WelfareObjective::Total),
        ),
        Expectation::new(
            "optimal facilities",
            at_all(vec![Point::xy(0., 0.), Point::xy(100., 100.)]),
            lit(a),
            move || {
                let (_, s) =
                    optimal_welfare(&p, &FacilitySpec::uncapacitated(2), WelfareObjective::Total)?;
                Ok(Measured::Locations(s.locations))
            },
        ),
        Expectation::new(
            "endpoint placement is undominated",
            flag(true),
            lit(a),
            no_pareto_violation(&desc, &profile, &spec, SearchBudget::with_resolution(5.0)),
        ),
        Expectation::new(
            "both facilities at (0,0) are dominated",
            flag(true),
            Source::Definition,
            move || {
                let c = check_pareto(&p2, &both_low, &SearchBudget::with_resolution(5.0))?;
                Ok(Measured::Flag(c.is_some()))
            },
        ),
    ];
    Ok(Scenario {
        name: "thm3_construction",
        anchor: a,
        profile,
        spec,
        mechanism: Some(desc),
        expectations,
    })
}

/// Number of agents assigned to each facility.
fn loads(solution: &Solution, m: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    for &j in &solution.assignment {
        out[j] += 1;
    }
    out
}

fn capacitated_even() -> Result<Scenario> {
    let a = A_CAPACITATED;
    // c = 2k with k = 2
    let mut agents = vec![(0.1, 0.2), (0.9, 0.3), (0.4, 0.8), (0.7, 0.6)];
    agents.extend([(100.0, 100.0); 4]);
    let profile = euclid(&agents)?;
    let spec = FacilitySpec::capacitated(vec![4, 4]);
    let desc = endpoint();
    let (d, p, s) = (desc.clone(), profile.clone(), spec.clone());
    let (d2, p2, s2) = (desc.clone(), profile.clone(), spec.clone());
    let expectations = vec![
        Expectation::new(
            "one facility in the unit box, one at (100,100)",
            flag(true),
            lit(a),
            move || {
                let sol = run_mechanism(&d, &p, &s)?;
                let inside =
                    |q: &Point| (0.0..=1.0).contains(&q.x()) && (0.0..=1.0).contains(&q.y());
                let l = &sol.locations;
                Ok(Measured::Flag(
                    inside(&l[0]) && l[1] == Point::xy(100., 100.),
                ))
            },
        ),
        Expectation::new("every facility is full", flag(true), lit(a), move || {
            let sol = run_mechanism(&d2, &p2, &s2)?;
            Ok(Measured::Flag(loads(&sol, 2) == vec![4, 4]))
        }),
        Expectation::new(
            "far agents travel nowhere",
            value(0.0),
            Source::Definition,
            {
                let (desc, profile, spec) = (desc.clone(), profile.clone(), spec.clone());
                move || {
                    let sol = run_mechanism(&desc, &profile, &spec)?;
                    let far = profile.agents()[4..]
                        .iter()
                        .zip(&sol.assignment[4..])
                        .map(|(q, &j)| {
                            crate::geometry::distance(q, &sol.locations[j], Metric::Euclidean)
                        })
                        .sum::<Result<f64>>()?;
                    Ok(Measured::Scalar(far))
                }
            },
        ),
    ];
    Ok(Scenario {
        name: "capacitated_even",
        anchor: a,
        profile,
        spec,
        mechanism: Some(desc),
        expectations,
    })
}

fn capacitated_odd() -> Result<Scenario> {
    let a = A_CAPACITATED;
    // c = 2k + 1 with k = 1
    let mut agents = vec![(0.0, 0.0); 3];
    agents.extend([(100.0, 100.0); 3]);
    let profile = euclid(&agents)?;
    let spec = FacilitySpec::capacitated(vec![3, 3]);
    let desc = MechanismDescriptor::new(MechanismKind::SerialDictatorship);
    let endpoints = endpoint();
    let fixed = vec![Point::xy(0., 0.), Point::xy(100., 100.)];

    let moved = profile.with_report(0, Point::xy(100., 100.))?;
    let halfway = profile.with_report(0, Point::xy(50., 50.))?;
    let (e, s) = (endpoints.clone(), spec.clone());
    let (m2, f2) = (moved.clone(), fixed.clone());
    let p3 = profile.clone();
    let expectations = vec![
        Expectation::new(
            "facilities",
            at_all(fixed.clone()),
            lit(a),
            locations_of(&endpoints, &profile, &spec),
        ),
        Expectation::new(
            "total distance",
            value(0.0),
            lit(a),
            mechanism_welfare(&endpoints, &profile, &spec, WelfareObjective::Total),
        ),
        Expectation::new("loads", flag(true), lit(a), move || {
            let sol = run_mechanism(&e, &p3, &s)?;
            Ok(Measured::Flag(loads(&sol, 2) == vec![3, 3]))
        }),
        Expectation::new(
            "facilities with one agent halfway along the diagonal",
            at_all(fixed.clone()),
            lit(a),
            locations_of(&endpoints, &halfway, &spec),
        ),
        Expectation::new(
            "cost of serving a moved agent from fixed facilities",
            value(100.0 * SQRT_2),
            Source::Computed {
                method: "exhaustive capacitated assignment",
            },
            move || {
                let (_, w) =
                    optimal_capacitated_assignment(&m2, &f2, &[3, 3], WelfareObjective::Total)?;
                Ok(Measured::Scalar(w))
            },
        ),
        Expectation::new(
            "dictatorship places a facility on each cluster",
            at_all(fixed),
            Source::Definition,
            locations_of(&desc, &profile, &spec),
        ),
    ];
    Ok(Scenario {
        name: "capacitated_odd",
        anchor: a,
        profile,
        spec,
        mechanism: Some(endpoints),
        expectations,
    })
}

/// Location, undominated, strategy proof and anonymous for a small Manhattan
/// profile.
fn manhattan_compliant(
    name: &'static str,
    profile: AgentProfile,
    desc: MechanismDescriptor,
    location: Point,
) -> Scenario {
    let a = A_MANHATTAN_SMALL;
    let spec = FacilitySpec::uncapacitated(1);
    let budget = SearchBudget::with_resolution(0.1);
    let expectations = vec![
        Expectation::new(
            "facility",
            at_all(vec![location]),
            lit(a),
            locations_of(&desc, &profile, &spec),
        ),
        Expectation::new(
            "undominated",
            flag(true),
            lit(a),
            no_pareto_violation(&desc, &profile, &spec, budget),
        ),
        Expectation::new(
            "no manipulation found",
            flag(true),
            lit(a),
            no_manipulation(&desc, &profile, &spec, budget),
        ),
        Expectation::new(
            "anonymous",
            flag(true),
            lit(a),
            anonymous(&desc, &profile, &spec),
        ),
    ];
    Scenario {
        name,
        anchor: a,
        profile,
        spec,
        mechanism: Some(desc),
        expectations,
    }
}

fn manhattan_2agent_max() -> Result<Scenario> {
    Ok(manhattan_compliant(
        "manhattan_2agent_max",
        manhattan(&[(0., 1.), (2., 0.)])?,
        MechanismDescriptor::new(MechanismKind::CoordinateMax),
        Point::xy(2., 1.),
    ))
}

fn manhattan_2agent_min() -> Result<Scenario> {
    Ok(manhattan_compliant(
        "manhattan_2agent_min",
        manhattan(&[(0., 1.), (2., 0.)])?,
        MechanismDescriptor::new(MechanismKind::CoordinateMin),
        Point::xy(0., 0.),
    ))
}

fn manhattan_3agent_median() -> Result<Scenario> {
    Ok(manhattan_compliant(
        "manhattan_3agent_median",
        manhattan(&[(0., 2.), (1., 0.), (2., 1.)])?,
        MechanismDescriptor::multi_dim_median(),
        Point::xy(1., 1.),
    ))
}

fn dominated_case(
    name: &'static str,
    profile: AgentProfile,
    desc: MechanismDescriptor,
    location: Point,
) -> Scenario {
    let a = A_MANHATTAN_FOUR;
    let spec = FacilitySpec::uncapacitated(1);
    let expectations = vec![
        Expectation::new(
            "facility",
            at_all(vec![location.clone()]),
            lit(a),
            locations_of(&desc, &profile, &spec),
        ),
        Expectation::new(
            "dominating facility",
            Expected::Location {
                point: Point::xy(1., 1.),
                tolerance: 0.5,
            },
            lit(a),
            dominating_point(&profile, location, SearchBudget::default()),
        ),
    ];
    Scenario {
        name,
        anchor: a,
        profile,
        spec,
        mechanism: Some(desc),
        expectations,
    }
}

fn manhattan_3agent_max_dominated() -> Result<Scenario> {
    Ok(dominated_case(
        "manhattan_3agent_max_dominated",
        manhattan(&[(0., 2.), (1., 0.), (2., 1.)])?,
        MechanismDescriptor::new(MechanismKind::CoordinateMax),
        Point::xy(2., 2.),
    ))
}

fn manhattan_4agent_min_dominated() -> Result<Scenario> {
    // Lowest x and second-lowest y of four reports.
    Ok(dominated_case(
        "manhattan_4agent_min_dominated",
        manhattan(&[(0., 2.), (1., 0.), (2., 1.), (3., 0.)])?,
        MechanismDescriptor::percentile_multi_d(vec![vec![0.0, 0.4]]),
        Point::xy(0., 0.),
    ))
}

fn manhattan_median_optimal_total() -> Result<Scenario> {
    let a = A_MANHATTAN_MEDIAN;
    let profile = manhattan(&[(0., 0.), (7., 1.), (3., 9.), (4., 4.), (10., 2.)])?;
    let spec = FacilitySpec::uncapacitated(1);
    let desc = MechanismDescriptor::multi_dim_median();
    let expectations = vec![
        Expectation::new(
            "facility",
            at_all(vec![Point::xy(4., 2.)]),
            Source::Definition,
            locations_of(&desc, &profile, &spec),
        ),
        Expectation::new(
            "total-distance ratio",
            value(1.0),
            lit(a),
            ratio(&desc, &profile, &spec, WelfareObjective::Total),
        ),
        Expectation::new(
            "maximum-distance ratio is at most 2",
            Expected::Between {
                low: 1.0 - 1e-12,
                high: 2.0 + 1e-6,
            },
            lit(a),
            ratio(&desc, &profile, &spec, WelfareObjective::Max),
        ),
    ];
    Ok(Scenario {
        name: "manhattan_median_optimal_total",
        anchor: a,
        profile,
        spec,
        mechanism: Some(desc),
        expectations,
    })
}

fn sd_anonymity_violation() -> Result<Scenario> {
    let a = A_SD;
    let profile = euclid(&[(0., 0.), (5., 5.)])?;
    let spec = FacilitySpec::uncapacitated(1);
    let desc = MechanismDescriptor::serial_dictatorship(None);
    let swapped = profile.permuted(&[1, 0])?;
    let (d, p, s) = (desc.clone(), profile.clone(), spec.clone());
    let expectations = vec![
        Expectation::new(
            "facility",
            at_all(vec![Point::xy(0., 0.)]),
            Source::Definition,
            locations_of(&desc, &profile, &spec),
        ),
        Expectation::new(
            "facility for the swapped profile",
            at_all(vec![Point::xy(5., 5.)]),
            lit(a),
            locations_of(&desc, &swapped, &spec),
        ),
        Expectation::new(
            "anonymity violation size",
            value(50f64.sqrt()),
            lit(a),
            move || verified_gain(check_anonymity(&d, &p, &s)?),
        ),
        Expectation::new(
            "undominated",
            flag(true),
            lit(a),
            no_pareto_violation(&desc, &profile, &spec, SearchBudget::default()),
        ),
    ];
    Ok(Scenario {
        name: "sd_anonymity_violation",
        anchor: a,
        profile,
        spec,
        mechanism: Some(desc),
        expectations,
    })
}

fn lexicographic_vertical_lie() -> Result<Scenario> {
    let a = A_LEXICOGRAPHIC;
    let profile = euclid(&[(0., 5.), (1., 0.)])?;
    let flat = euclid(&[(0., 0.), (1., 0.)])?;
    let spec = FacilitySpec::uncapacitated(1);
    let desc = MechanismDescriptor::new(MechanismKind::LexicographicFirstAgent);
    let lied = profile.with_report(1, Point::xy(0., 0.))?;
    let (d, p, s) = (desc.clone(), profile.clone(), spec.clone());
    let expectations = vec![
        Expectation::new(
            "facility after (1,0) reports (0,0)",
            at_all(vec![Point::xy(0., 0.)]),
            Source::Definition,
            locations_of(&desc, &lied, &spec),
        ),
        Expectation::new(
            "some manipulation exists",
            Expected::AtLeast { bound: 1.0 },
            lit(a),
            move || {
                verified_gain(check_strategy_proofness(
                    &d,
                    &p,
                    &s,
                    &SearchBudget::default(),
                )?)
            },
        ),
        Expectation::new(
            "no manipulation on a horizontal pair",
            flag(true),
            Source::Computed {
                method: "strategy-proofness search at resolution 0.5",
            },
            no_manipulation(&desc, &flat, &spec, SearchBudget::default()),
        ),
        Expectation::new(
            "anonymous",
            flag(true),
            lit(a),
            anonymous(&desc, &profile, &spec),
        ),
        Expectation::new(
            "undominated",
            flag(true),
            lit(a),
            no_pareto_violation(&desc, &profile, &spec, SearchBudget::default()),
        ),
    ];
    Ok(Scenario {
        name: "lexicographic_vertical_lie",
        anchor: a,
        profile,
        spec,
        mechanism: Some(desc),
        expectations,
    })
}
