use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mechanisms::{run_mechanism, AgentProfile, FacilitySpec, MechanismDescriptor};

use super::candidates::budget_candidates;
use super::{
    served_distance, Certificate, CertificateKind, SearchBudget, Witness, STRICT_IMPROVEMENT,
};

/// Searches every agent in index order and returns the best misreport of the
/// first agent that has a profitable one.
pub fn check_strategy_proofness(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
    budget: &SearchBudget,
) -> Result<Option<Certificate>> {
    desc.validate(profile, spec)?;
    let candidates = budget_candidates(profile.agents(), budget)?;
    for agent in 0..profile.len() {
        if let Some(cert) = search_agent(desc, profile, spec, &candidates, agent)? {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

/// Best misreport for one agent.
///
/// Candidates are the budget grid, the padded box corners, random restarts
/// and the other agents' locations. The agent is served by whichever
/// facility is nearest its true location. Equal gains go to the earliest
/// candidate in that order.
pub fn find_manipulation(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
    budget: &SearchBudget,
    agent: usize,
) -> Result<Option<Certificate>> {
    desc.validate(profile, spec)?;
    if agent >= profile.len() {
        return Err(Error::invalid(format!(
            "agent {agent} out of range for {} agents",
            profile.len()
        )));
    }
    let candidates = budget_candidates(profile.agents(), budget)?;
    search_agent(desc, profile, spec, &candidates, agent)
}

fn search_agent(
    desc: &MechanismDescriptor,
    profile: &AgentProfile,
    spec: &FacilitySpec,
    grid: &[crate::geometry::Point],
    agent: usize,
) -> Result<Option<Certificate>> {
    let truth = &profile.agents()[agent];
    let honest = served_distance(
        profile,
        truth,
        &run_mechanism(desc, profile, spec)?.locations,
    );

    let others = profile
        .agents()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != agent)
        .map(|(_, p)| p);
    let candidates: Vec<_> = grid.iter().chain(others).collect();

    let gains: Vec<f64> = candidates
        .par_iter()
        .map(|report| {
            let lied = profile.with_report(agent, (*report).clone())?;
            let locations = run_mechanism(desc, &lied, spec)?.locations;
            Ok(honest - served_distance(profile, truth, &locations))
        })
        .collect::<Result<_>>()?;

    let best = gains
        .iter()
        .enumerate()
        .filter(|(_, g)| **g > STRICT_IMPROVEMENT)
        .fold(None::<(usize, f64)>, |acc, (i, &g)| match acc {
            Some((_, b)) if b >= g => acc,
            _ => Some((i, g)),
        });

    Ok(best.map(|(i, gain)| Certificate {
        kind: CertificateKind::Manipulation,
        original_profile: profile.clone(),
        mechanism: Some(desc.clone()),
        facilities: spec.clone(),
        witness: Witness::Misreport {
            agent,
            report: candidates[i].clone(),
        },
        improvement: gain,
    }))
}
