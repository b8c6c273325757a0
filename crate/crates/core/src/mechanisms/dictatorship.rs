use std::cmp::Ordering;

use crate::error::Result;
use crate::geometry::Point;

use super::{check_permutation, AgentProfile};

/// Walks agents in `order`, opening a facility at each location not already
/// hosting one, until `m` are open. Surplus facilities share the last
/// opened location.
pub fn serial_dictatorship(
    profile: &AgentProfile,
    order: &[usize],
    m: usize,
) -> Result<Vec<Point>> {
    check_permutation(order, profile.len())?;
    Ok(walk(order.iter().map(|&i| &profile.agents()[i]), m))
}

/// The facility at the lexicographically least reported location.
pub fn lexicographic_first_agent(profile: &AgentProfile) -> Point {
    lexicographic_walk(profile, 1).remove(0)
}

/// Serial dictatorship over agents sorted by `(x, y, ...)`.
pub fn lexicographic_walk(profile: &AgentProfile, m: usize) -> Vec<Point> {
    let mut sorted: Vec<&Point> = profile.agents().iter().collect();
    sorted.sort_by(|a, b| lex_cmp(a, b));
    walk(sorted.into_iter(), m)
}

fn lex_cmp(a: &Point, b: &Point) -> Ordering {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn walk<'a>(agents: impl Iterator<Item = &'a Point>, m: usize) -> Vec<Point> {
    let mut open: Vec<Point> = Vec::with_capacity(m);
    for p in agents {
        if open.len() == m {
            break;
        }
        if !open.contains(p) {
            open.push(p.clone());
        }
    }
    if let Some(last) = open.last().cloned() {
        open.resize(m, last);
    }
    open
}
