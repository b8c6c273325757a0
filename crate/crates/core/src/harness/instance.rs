//! Versioned JSON instance files.
//!
//! ```json
//! {
//!   "version": 1,
//!   "agents": [[0, 0], [0, 2], [12, 0], [12, 2]],
//!   "metric": "euclidean",
//!   "facilities": 1,
//!   "mechanism": { "kind": "multi_dim_median" }
//! }
//! ```
//!
//! `capacities` is optional. `mechanism.params` is either one row per
//! facility or a flat list split into rows of the profile's dimension.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EvenMedian, Metric, Point};
use crate::mechanisms::{
    AgentProfile, FacilitySpec, MechanismDescriptor, MechanismKind, TiePolicy,
};

pub const INSTANCE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub version: u32,
    pub agents: Vec<Vec<f64>>,
    pub metric: String,
    pub facilities: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacities: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanism: Option<MechanismSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismSection {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axes: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent_order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub even_median: Option<EvenMedian>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Params {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl Params {
    /// Parses `0.5,0.5;0,0`: rows separated by `;`, entries by `,`.
    pub fn parse(s: &str) -> Result<Self> {
        let rows = s
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<f64>()
                            .map_err(|_| Error::invalid(format!("bad parameter `{}`", v.trim())))
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(if rows.len() == 1 {
            Params::Flat(rows.into_iter().next().unwrap_or_default())
        } else {
            Params::Rows(rows)
        })
    }

    fn rows(&self, dim: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            Params::Rows(r) => Ok(r.clone()),
            Params::Flat(v) => {
                if v.is_empty() || v.len() % dim != 0 {
                    return Err(Error::invalid(format!(
                        "{} parameters do not split into rows of {dim}",
                        v.len()
                    )));
                }
                Ok(v.chunks(dim).map(<[f64]>::to_vec).collect())
            }
        }
    }
}

impl MechanismSection {
    pub fn new(kind: &str) -> Self {
        MechanismSection {
            kind: kind.to_string(),
            params: None,
            axes: None,
            agent_order: None,
            even_median: None,
        }
    }

    pub fn descriptor(&self, dim: usize) -> Result<MechanismDescriptor> {
        let kind: MechanismKind = self.kind.parse()?;
        let percentile_params = match (&self.params, kind) {
            (Some(p), MechanismKind::Percentile1D) => Some(p.rows(1)?),
            (Some(p), _) => Some(p.rows(dim)?),
            (None, _) => None,
        };
        Ok(MechanismDescriptor {
            kind,
            percentile_params,
            axes: self.axes.clone(),
            agent_order: self.agent_order.clone(),
            tie_policy: TiePolicy {
                even_median: self.even_median.unwrap_or_default(),
            },
        })
    }
}

/// A parsed, validated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub profile: AgentProfile,
    pub spec: FacilitySpec,
    pub mechanism: Option<MechanismDescriptor>,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("instance file: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn instance(&self) -> Result<Instance> {
        if self.version != INSTANCE_VERSION {
            return Err(Error::invalid(format!(
                "unsupported instance version {} (expected {INSTANCE_VERSION})",
                self.version
            )));
        }
        let metric: Metric = self.metric.parse()?;
        let agents = self
            .agents
            .iter()
            .map(|a| Point::new(a.iter().copied()))
            .collect::<Result<Vec<_>>>()?;
        let profile = AgentProfile::new(agents, metric)?;
        let spec = match &self.capacities {
            Some(caps) => {
                if caps.len() != self.facilities {
                    return Err(Error::invalid(format!(
                        "{} capacities for {} facilities",
                        caps.len(),
                        self.facilities
                    )));
                }
                FacilitySpec::capacitated(caps.clone())
            }
            None => FacilitySpec::uncapacitated(self.facilities),
        };
        spec.validate(profile.len())?;
        let mechanism = self
            .mechanism
            .as_ref()
            .map(|m| m.descriptor(profile.dim()))
            .transpose()?;
        if let Some(m) = &mechanism {
            m.validate(&profile, &spec)?;
        }
        Ok(Instance {
            profile,
            spec,
            mechanism,
        })
    }
}
