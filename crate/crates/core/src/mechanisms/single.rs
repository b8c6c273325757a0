use crate::error::{Error, Result};
use crate::geometry::{geometric_median, smallest_enclosing_circle, Point, DEFAULT_TOLERANCE};

use super::AgentProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extreme {
    Max,
    Min,
}

/// Center of the smallest enclosing circle of the reports.
pub fn one_centre(profile: &AgentProfile) -> Result<Point> {
    Ok(smallest_enclosing_circle(profile.agents())?.center)
}

/// Per-coordinate maximum (or minimum) of the reports.
pub fn coordinate_extreme(profile: &AgentProfile, which: Extreme) -> Point {
    let agents = profile.agents();
    Point::from_raw((0..profile.dim()).map(|k| {
        let col = agents.iter().map(|p| p[k]);
        match which {
            Extreme::Max => col.fold(f64::NEG_INFINITY, f64::max),
            Extreme::Min => col.fold(f64::INFINITY, f64::min),
        }
    }))
}

/// Geometric median of the reports. An iteration that hits the cap still
/// yields its best iterate, so the mechanism is total.
pub fn geometric_median_location(profile: &AgentProfile) -> Result<Point> {
    match geometric_median(profile.agents(), DEFAULT_TOLERANCE) {
        Ok(p) => Ok(p),
        Err(Error::Convergence { best, .. }) => Ok(best),
        Err(e) => Err(e),
    }
}
