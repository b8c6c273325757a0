use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::mechanisms::{run_mechanism, AgentProfile, FacilitySpec, MechanismDescriptor};

use super::{multiset_shift, Certificate, CertificateKind, Witness, STRICT_IMPROVEMENT};

/// Profiles up to this size are checked against every permutation.
pub const EXHAUSTIVE_PERMUTATION_LIMIT: usize = 8;

const DEFAULT_SAMPLES: usize = 2000;

/// Compares the mechanism's facility multiset on the profile and on
/// reorderings of it. Exhaustive for small `n`, sampled otherwise.
pub fn check_anonymity(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
) -> Result<Option<Certificate>> {
    check_anonymity_with(desc, profile, spec, DEFAULT_SAMPLES, 0)
}

/// As [`check_anonymity`], drawing `samples` seeded shuffles once `n`
/// exceeds [`EXHAUSTIVE_PERMUTATION_LIMIT`]. Reversal and rotation by one are
/// always tried first.
pub fn check_anonymity_with(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
    samples: usize,
    seed: u64,
) -> Result<Option<Certificate>> {
    desc.validate(profile, spec)?;
    let n = profile.len();
    let perms: Vec<Vec<usize>> = if n <= EXHAUSTIVE_PERMUTATION_LIMIT {
        (0..n).permutations(n).skip(1).collect()
    } else {
        let mut perms = vec![(0..n).rev().collect(), (1..n).chain([0]).collect()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            perms.push(p);
        }
        perms
    };

    let base = run_mechanism(desc, profile, spec)?;
    let hits: Vec<Option<f64>> = perms
        .par_iter()
        .map(|perm| {
            let moved = run_mechanism(desc, &profile.permuted(perm)?, spec)?;
            let shift = multiset_shift(&base.locations, &moved.locations);
            Ok((shift > STRICT_IMPROVEMENT).then_some(shift))
        })
        .collect::<Result<_>>()?;

    Ok(hits
        .into_iter()
        .zip(perms)
        .find_map(|(hit, perm)| hit.map(|shift| (shift, perm)))
        .map(|(shift, permutation)| Certificate {
            kind: CertificateKind::AnonymityViolation,
            original_profile: profile.clone(),
            mechanism: Some(desc.clone()),
            facilities: spec.clone(),
            witness: Witness::Permutation { permutation },
            improvement: shift,
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::verify_certificate;
    use crate::geometry::Metric;
    use crate::mechanisms::MechanismKind;

    #[test]
    fn dictatorship_is_not_anonymous() {
        let p = AgentProfile::planar(&[(0., 0.), (5., 5.)], Metric::Euclidean).unwrap();
        let spec = FacilitySpec::uncapacitated(1);
        let cert = check_anonymity(&MechanismDescriptor::serial_dictatorship(None), &p, &spec)
            .unwrap()
            .expect("violation");
        assert_eq!(
            cert.witness,
            Witness::Permutation {
                permutation: vec![1, 0]
            }
        );
        assert!((cert.improvement - 50f64.sqrt()).abs() < 1e-12);
        assert!(verify_certificate(&cert).unwrap());
    }

    #[test]
    fn symmetric_mechanisms_pass() {
        let p = AgentProfile::planar(&[(0., 0.), (3., 1.), (1., 5.), (2., 2.)], Metric::Euclidean)
            .unwrap();
        let spec = FacilitySpec::uncapacitated(1);
        for kind in [
            MechanismKind::MultiDimMedian,
            MechanismKind::OneCentre,
            MechanismKind::CoordinateMax,
            MechanismKind::GeometricMedian,
            MechanismKind::LexicographicFirstAgent,
        ] {
            let desc = MechanismDescriptor::new(kind);
            assert!(
                check_anonymity(&desc, &p, &spec).unwrap().is_none(),
                "{kind}"
            );
        }
    }

    #[test]
    fn sampled_permutations_for_large_profiles() {
        let agents: Vec<(f64, f64)> = (0..12).map(|i| (i as f64, (i * i % 7) as f64)).collect();
        let p = AgentProfile::planar(&agents, Metric::Euclidean).unwrap();
        let spec = FacilitySpec::uncapacitated(1);
        let sd = MechanismDescriptor::serial_dictatorship(None);
        let cert = check_anonymity_with(&sd, &p, &spec, 10, 3)
            .unwrap()
            .unwrap();
        assert!(verify_certificate(&cert).unwrap());
        let median = MechanismDescriptor::multi_dim_median();
        assert!(check_anonymity_with(&median, &p, &spec, 10, 3)
            .unwrap()
            .is_none());
    }
}
