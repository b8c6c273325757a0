use crate::error::{Error, Result};

use super::point::{common_dim, Point};

/// A point minimizing the maximum Manhattan distance to `points`.
///
/// In 2-d the rotation `u = x + y, v = x - y` turns Manhattan distance into
/// Chebyshev distance, whose one-centre is the center of the bounding box in
/// `(u, v)`. In 1-d this is the midpoint of the extremes.
pub fn manhattan_one_center(points: &[Point]) -> Result<Point> {
    let d = common_dim(points)?;
    match d {
        1 => {
            let (lo, hi) = extent(points.iter().map(|p| p.x()));
            Ok(Point::from_raw([(lo + hi) / 2.0]))
        }
        2 => {
            let (ulo, uhi) = extent(points.iter().map(|p| p.x() + p.y()));
            let (vlo, vhi) = extent(points.iter().map(|p| p.x() - p.y()));
            let u = (ulo + uhi) / 2.0;
            let v = (vlo + vhi) / 2.0;
            Ok(Point::from_raw([(u + v) / 2.0, (u - v) / 2.0]))
        }
        _ => Err(Error::invalid(format!(
            "manhattan one-centre needs 1-d or 2-d points, got {d}-d"
        ))),
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}
