use crate::error::{Error, Result};
use crate::geometry::{median_of, EvenMedian, Point};

use super::AgentProfile;

/// Tolerance on the orthonormality check for user-supplied axes.
const ORTHONORMAL_TOL: f64 = 1e-9;

/// Orthonormal basis: row `k` is the `k`-th axis direction.
#[derive(Debug, Clone, PartialEq)]
pub struct Axes(Vec<Vec<f64>>);

impl Axes {
    pub fn new(rows: Vec<Vec<f64>>, dim: usize) -> Result<Self> {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid(format!("axes must be a {dim}x{dim} matrix")));
        }
        for (i, a) in rows.iter().enumerate() {
            for (j, b) in rows.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if !((dot - want).abs() <= ORTHONORMAL_TOL) {
                    return Err(Error::invalid(format!(
                        "axes are not orthonormal (row {i} . row {j} = {dot})"
                    )));
                }
            }
        }
        Ok(Axes(rows))
    }

    pub fn identity(dim: usize) -> Self {
        Axes(
            (0..dim)
                .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    fn project(&self, p: &Point, k: usize) -> f64 {
        self.0[k].iter().zip(p.coords()).map(|(a, x)| a * x).sum()
    }

    fn recombine(&self, along: &[f64]) -> Point {
        let d = along.len();
        Point::from_raw((0..d).map(|j| (0..d).map(|k| along[k] * self.0[k][j]).sum::<f64>()))
    }
}

/// Facility `j` at `xs[floor(p_j (n - 1))]` (0-based) of the sorted reports.
pub fn percentile_1d(xs: &[f64], params: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(Error::invalid("no agents"));
    }
    if xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("percentile_1d expects ascending reports"));
    }
    let last = (xs.len() - 1) as f64;
    params
        .iter()
        .map(|&p| {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("percentile {p} outside [0, 1]")));
            }
            Ok(xs[(p * last).floor() as usize])
        })
        .collect()
}

/// Applies a 1-d percentile mechanism along each axis and recombines.
/// `params[j][k]` is facility `j`'s percentile on axis `k`.
pub fn percentile_multi_d(
    profile: &AgentProfile,
    params: &[Vec<f64>],
    axes: Option<&Axes>,
) -> Result<Vec<Point>> {
    let d = profile.dim();
    let identity;
    let axes = match axes {
        Some(a) => a,
        None => {
            identity = Axes::identity(d);
            &identity
        }
    };
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let mut col: Vec<f64> = profile
                .agents()
                .iter()
                .map(|p| axes.project(p, k))
                .collect();
            col.sort_by(f64::total_cmp);
            col
        })
        .collect();
    params
        .iter()
        .map(|pj| {
            if pj.len() != d {
                return Err(Error::invalid(format!(
                    "percentile vector {pj:?} does not match {d}-d agents"
                )));
            }
            let along = (0..d)
                .map(|k| Ok(percentile_1d(&columns[k], &pj[k..=k])?[0]))
                .collect::<Result<Vec<f64>>>()?;
            Ok(axes.recombine(&along))
        })
        .collect()
}

/// Median along each axis.
pub fn multi_dim_median(
    profile: &AgentProfile,
    axes: Option<&Axes>,
    policy: EvenMedian,
) -> Result<Point> {
    let d = profile.dim();
    let Some(axes) = axes else {
        return crate::geometry::coordinate_median(profile.agents(), policy);
    };
    let along: Vec<f64> = (0..d)
        .map(|k| {
            let mut col: Vec<f64> = profile
                .agents()
                .iter()
                .map(|p| axes.project(p, k))
                .collect();
            median_of(&mut col, policy)
        })
        .collect();
    Ok(axes.recombine(&along))
}
