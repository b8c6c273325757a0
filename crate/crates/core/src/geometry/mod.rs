//! Metric kernels and the single-facility optimizers: coordinate medians,
//! the geometric median, the smallest enclosing circle and the Manhattan
//! one-centre.

mod circle;
mod manhattan;
mod point;
mod weiszfeld;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use circle::{smallest_enclosing_circle, smallest_enclosing_circle_seeded, Circle, SEC_SEED};
pub use manhattan::manhattan_one_center;
pub use point::{common_dim, Point};
pub use weiszfeld::{
    geometric_median, geometric_median_with, WeiszfeldOptions, DEFAULT_MAX_ITERATIONS,
    DEFAULT_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "manhattan" => Ok(Metric::Manhattan),
            other => Err(Error::invalid(format!(
                "unknown metric `{other}` (expected `euclidean` or `manhattan`)"
            ))),
        }
    }
}

/// Which element an even-sized median takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvenMedian {
    /// Element `1 + floor((n-1)/2)` in 1-based sorted order.
    #[default]
    Lower,
    Upper,
}

pub fn distance(a: &Point, b: &Point, metric: Metric) -> Result<f64> {
    b.check_dim(a.dim())?;
    Ok(distance_unchecked(a, b, metric))
}

/// Same as [`distance`] without the dimension check. Callers guarantee equal
/// dimensions.
#[inline]
pub(crate) fn distance_unchecked(a: &Point, b: &Point, metric: Metric) -> f64 {
    let pairs = a.coords().iter().zip(b.coords());
    match metric {
        Metric::Euclidean => {
            if a.dim() == 2 {
                (a[0] - b[0]).hypot(a[1] - b[1])
            } else {
                pairs.map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
        }
        Metric::Manhattan => pairs.map(|(x, y)| (x - y).abs()).sum(),
    }
}

/// Median of a list of reals under the even-count policy.
pub(crate) fn median_of(values: &mut [f64], policy: EvenMedian) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    match policy {
        EvenMedian::Lower => values[(n - 1) / 2],
        EvenMedian::Upper => values[n / 2],
    }
}

/// Per-axis median of `points`.
pub fn coordinate_median(points: &[Point], policy: EvenMedian) -> Result<Point> {
    let d = common_dim(points)?;
    let mut column = Vec::with_capacity(points.len());
    let coords = (0..d).map(|k| {
        column.clear();
        column.extend(points.iter().map(|p| p[k]));
        median_of(&mut column, policy)
    });
    Ok(Point::from_raw(coords.collect::<Vec<_>>()))
}

/// Sum of distances from `at` to every point.
pub fn total_distance(points: &[Point], at: &Point, metric: Metric) -> f64 {
    points
        .iter()
        .map(|p| distance_unchecked(p, at, metric))
        .sum()
}

/// Largest distance from `at` to any point.
pub fn max_distance(points: &[Point], at: &Point, metric: Metric) -> f64 {
    points
        .iter()
        .map(|p| distance_unchecked(p, at, metric))
        .fold(0.0, f64::max)
}

/// Axis-aligned bounding box `(min, max)` of a nonempty point set.
pub fn bounding_box(points: &[Point]) -> Result<(Point, Point)> {
    let d = common_dim(points)?;
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for k in 0..d {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    Ok((Point::from_raw(lo), Point::from_raw(hi)))
}
