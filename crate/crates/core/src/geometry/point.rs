use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// A location in `d`-dimensional space. All coordinates are finite.
#[derive(Clone, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(SmallVec<[f64; 3]>);

impl Point {
    pub fn new(coords: impl IntoIterator<Item = f64>) -> Result<Self> {
        let coords: SmallVec<[f64; 3]> = coords.into_iter().collect();
        if coords.is_empty() {
            return Err(Error::invalid("a point needs at least one coordinate"));
        }
        if let Some(bad) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid(format!("non-finite coordinate {bad}")));
        }
        Ok(Point(coords))
    }

    /// Builds a point from coordinates already known to be finite.
    pub(crate) fn from_raw(coords: impl IntoIterator<Item = f64>) -> Self {
        let p = Point(coords.into_iter().collect());
        debug_assert!(!p.0.is_empty() && p.0.iter().all(|c| c.is_finite()));
        p
    }

    pub fn xy(x: f64, y: f64) -> Self {
        Point::new([x, y]).expect("finite coordinates")
    }

    pub fn x1(x: f64) -> Self {
        Point::new([x]).expect("finite coordinate")
    }

    pub fn zeros(dim: usize) -> Self {
        Point(SmallVec::from_elem(0.0, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0.get(1).copied().unwrap_or(0.0)
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() == expected {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            })
        }
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Point::new(v)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0.into_vec()
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Checks that `points` is nonempty with a uniform dimension and returns it.
pub fn common_dim(points: &[Point]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::invalid("empty point list"))?;
    let d = first.dim();
    for p in &points[1..] {
        p.check_dim(d)?;
    }
    Ok(d)
}
