//! Refutation-based axiom checkers.
//!
//! Each checker either returns a [`Certificate`] that replays through the
//! public operations, or `None`, meaning no violation exists among the
//! candidates it searched. `None` is not a proof of compliance.

mod anonymity;
mod candidates;
mod pareto;
mod strategy;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_unchecked, Point};
use crate::mechanisms::{
    check_permutation, nearest, run_mechanism, AgentProfile, FacilitySpec, MechanismDescriptor,
    Solution,
};

pub use anonymity::{check_anonymity, check_anonymity_with, EXHAUSTIVE_PERMUTATION_LIMIT};
pub use candidates::MAX_CANDIDATES;
pub use pareto::check_pareto;
pub use strategy::{check_strategy_proofness, find_manipulation};

/// Gains at or below this are numeric noise, not violations.
pub const STRICT_IMPROVEMENT: f64 = 1e-9;

/// How far a dominating solution may exceed an original distance and still
/// count as "no worse".
pub const NO_WORSE_SLACK: f64 = 1e-12;

/// Replay tolerance on a certificate's claimed margin.
const REPLAY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Spacing of the candidate grid.
    pub grid_resolution: f64,
    /// Extra uniformly random candidates drawn in the padded box.
    pub random_restarts: usize,
    pub seed: u64,
    /// Padding on each side of the bounding box, as a multiple of its
    /// diagonal (a degenerate box counts as diagonal 1).
    pub bounding_box_pad: f64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            grid_resolution: 0.5,
            random_restarts: 0,
            seed: 0,
            bounding_box_pad: 2.0,
        }
    }
}

impl SearchBudget {
    pub fn with_resolution(grid_resolution: f64) -> Self {
        SearchBudget {
            grid_resolution,
            ..SearchBudget::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.grid_resolution > 0.0 && self.grid_resolution.is_finite()) {
            return Err(Error::invalid("grid resolution must be positive"));
        }
        if !(self.bounding_box_pad >= 0.0 && self.bounding_box_pad.is_finite()) {
            return Err(Error::invalid("bounding box pad must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    AnonymityViolation,
    ParetoDomination,
    Manipulation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// Agent `k` of the permuted profile is agent `permutation[k]`.
    Permutation { permutation: Vec<usize> },
    /// `dominating` leaves nobody farther and somebody closer than `original`.
    Dominating {
        original: Solution,
        dominating: Solution,
    },
    /// Agent `agent` reports `report` instead of its true location.
    Misreport { agent: usize, report: Point },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub original_profile: AgentProfile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<MechanismDescriptor>,
    pub facilities: FacilitySpec,
    pub witness: Witness,
    /// Size of the violation: location shift, best distance saving, or
    /// manipulation gain.
    pub improvement: f64,
}

/// Replays a certificate through the public operations and confirms its
/// claimed margin.
pub fn verify_certificate(cert: &Certificate) -> Result<bool> {
    if !cert.improvement.is_finite() {
        return Err(Error::invalid("certificate improvement is not finite"));
    }
    let profile = &cert.original_profile;
    let spec = &cert.facilities;
    let replayed = match (&cert.kind, &cert.witness) {
        (CertificateKind::AnonymityViolation, Witness::Permutation { permutation }) => {
            let desc = mechanism_of(cert)?;
            check_permutation(permutation, profile.len())?;
            let before = run_mechanism(desc, profile, spec)?;
            let after = run_mechanism(desc, &profile.permuted(permutation)?, spec)?;
            multiset_shift(&before.locations, &after.locations)
        }
        (
            CertificateKind::ParetoDomination,
            Witness::Dominating {
                original,
                dominating,
            },
        ) => {
            check_locations(profile, &original.locations)?;
            check_locations(profile, &dominating.locations)?;
            if let Some(desc) = &cert.mechanism {
                let produced = run_mechanism(desc, profile, spec)?;
                if multiset_shift(&produced.locations, &original.locations) > STRICT_IMPROVEMENT {
                    return Ok(false);
                }
            }
            match domination_margin(
                &served_distances(profile, &original.locations),
                &served_distances(profile, &dominating.locations),
            ) {
                Some((best, _)) => best,
                None => return Ok(false),
            }
        }
        (CertificateKind::Manipulation, Witness::Misreport { agent, report }) => {
            let desc = mechanism_of(cert)?;
            if *agent >= profile.len() {
                return Err(Error::invalid(format!("agent {agent} out of range")));
            }
            let truth = &profile.agents()[*agent];
            let honest = run_mechanism(desc, profile, spec)?;
            let lied = run_mechanism(desc, &profile.with_report(*agent, report.clone())?, spec)?;
            served_distance(profile, truth, &honest.locations)
                - served_distance(profile, truth, &lied.locations)
        }
        (kind, _) => {
            return Err(Error::invalid(format!(
                "witness does not match certificate kind {kind:?}"
            )))
        }
    };
    Ok(cert.improvement > STRICT_IMPROVEMENT && replayed >= cert.improvement - REPLAY_SLACK)
}

fn mechanism_of(cert: &Certificate) -> Result<&MechanismDescriptor> {
    cert.mechanism
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("{:?} certificate needs a mechanism", cert.kind)))
}

fn check_locations(profile: &AgentProfile, locations: &[Point]) -> Result<()> {
    if locations.is_empty() {
        return Err(Error::invalid("solution has no facilities"));
    }
    locations
        .iter()
        .try_for_each(|l| l.check_dim(profile.dim()))
}

/// Distance from `at` to its nearest facility.
pub(crate) fn served_distance(profile: &AgentProfile, at: &Point, locations: &[Point]) -> f64 {
    nearest(locations, at, profile.metric()).1
}

pub(crate) fn served_distances(profile: &AgentProfile, locations: &[Point]) -> Vec<f64> {
    profile
        .agents()
        .iter()
        .map(|a| served_distance(profile, a, locations))
        .collect()
}

/// `(largest saving, total saving)` when `after` weakly improves every agent
/// and strictly improves one; `None` otherwise.
pub(crate) fn domination_margin(before: &[f64], after: &[f64]) -> Option<(f64, f64)> {
    let mut best = f64::NEG_INFINITY;
    let mut total = 0.0;
    for (b, a) in before.iter().zip(after) {
        if *a > b + NO_WORSE_SLACK {
            return None;
        }
        best = best.max(b - a);
        total += b - a;
    }
    (best > STRICT_IMPROVEMENT).then_some((best, total))
}

/// Bottleneck distance between two location multisets of equal size.
pub(crate) fn multiset_shift(a: &[Point], b: &[Point]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let cost =
        |i: usize, j: usize| distance_unchecked(&a[i], &b[j], crate::geometry::Metric::Euclidean);
    if a.len() <= 7 {
        let mut best = f64::INFINITY;
        for perm in itertools::Itertools::permutations(0..b.len(), b.len()) {
            let worst = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| cost(i, j))
                .fold(0.0, f64::max);
            best = best.min(worst);
        }
        best
    } else {
        let mut sa: Vec<&Point> = a.iter().collect();
        let mut sb: Vec<&Point> = b.iter().collect();
        let cmp = |x: &&Point, y: &&Point| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal);
        sa.sort_by(cmp);
        sb.sort_by(cmp);
        sa.iter()
            .zip(&sb)
            .map(|(x, y)| distance_unchecked(x, y, crate::geometry::Metric::Euclidean))
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Metric;
    use crate::mechanisms::MechanismKind;

    fn corners() -> AgentProfile {
        AgentProfile::planar(
            &[(0., 0.), (0., 2.), (12., 0.), (12., 2.)],
            Metric::Euclidean,
        )
        .unwrap()
    }

    fn manipulation_cert(improvement: f64) -> Certificate {
        Certificate {
            kind: CertificateKind::Manipulation,
            original_profile: corners(),
            mechanism: Some(MechanismDescriptor::new(MechanismKind::GeometricMedian)),
            facilities: FacilitySpec::uncapacitated(1),
            witness: Witness::Misreport {
                agent: 2,
                report: Point::xy(12., 2.),
            },
            improvement,
        }
    }

    #[test]
    fn hand_built_manipulation_replays() {
        let gain = 37f64.sqrt() - 2.0;
        assert!(verify_certificate(&manipulation_cert(gain - 1e-9)).unwrap());
        assert!(!verify_certificate(&manipulation_cert(gain + 1e-6)).unwrap());
    }

    #[test]
    fn zeroed_improvement_is_rejected() {
        assert!(!verify_certificate(&manipulation_cert(0.0)).unwrap());
    }

    #[test]
    fn fabricated_anonymity_claim_fails_replay() {
        let cert = Certificate {
            kind: CertificateKind::AnonymityViolation,
            original_profile: AgentProfile::planar(
                &[(0., 0.), (3., 1.), (1., 5.)],
                Metric::Euclidean,
            )
            .unwrap(),
            mechanism: Some(MechanismDescriptor::multi_dim_median()),
            facilities: FacilitySpec::uncapacitated(1),
            witness: Witness::Permutation {
                permutation: vec![2, 0, 1],
            },
            improvement: 1.0,
        };
        assert!(!verify_certificate(&cert).unwrap());
    }

    #[test]
    fn malformed_certificates_are_errors() {
        let mut bad = manipulation_cert(1.0);
        bad.mechanism = None;
        assert!(verify_certificate(&bad).is_err());

        let mut bad = manipulation_cert(1.0);
        bad.witness = Witness::Misreport {
            agent: 9,
            report: Point::xy(0., 0.),
        };
        assert!(verify_certificate(&bad).is_err());

        let mut bad = manipulation_cert(1.0);
        bad.kind = CertificateKind::AnonymityViolation;
        assert!(verify_certificate(&bad).is_err());

        let mut bad = manipulation_cert(1.0);
        bad.kind = CertificateKind::AnonymityViolation;
        bad.witness = Witness::Permutation {
            permutation: vec![0, 0, 1, 2],
        };
        assert!(verify_certificate(&bad).is_err());

        let mut bad = manipulation_cert(f64::NAN);
        bad.improvement = f64::NAN;
        assert!(verify_certificate(&bad).is_err());
    }

    #[test]
    fn domination_margin_rules() {
        assert_eq!(
            domination_margin(&[2., 3., 1.], &[2., 1., 1.]),
            Some((2.0, 2.0))
        );
        assert_eq!(domination_margin(&[1., 1.], &[0.5, 1.5]), None);
        assert_eq!(domination_margin(&[1., 1.], &[1., 1.]), None);
    }

    #[test]
    fn multiset_shift_ignores_order() {
        let a = vec![Point::xy(0., 0.), Point::xy(5., 5.)];
        let b = vec![Point::xy(5., 5.), Point::xy(0., 0.)];
        assert_eq!(multiset_shift(&a, &b), 0.0);
        let c = vec![Point::xy(5., 5.), Point::xy(5., 5.)];
        assert!((multiset_shift(&a, &c) - 50f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = manipulation_cert(1.5);
        let json = serde_json::to_string(&cert).unwrap();
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
    }
}
