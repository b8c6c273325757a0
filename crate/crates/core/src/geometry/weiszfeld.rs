use crate::error::{Error, Result};

use super::point::{common_dim, Point};
use super::{distance_unchecked, total_distance, Metric};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// Iterates closer than this to a data point are treated as sitting on it.
const COINCIDENCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeiszfeldOptions {
    /// Stop once the Newton step, an estimate of the distance to the
    /// optimum, is shorter than this. Where the Hessian is singular the
    /// Weiszfeld step length is used instead.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for WeiszfeldOptions {
    fn default() -> Self {
        WeiszfeldOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        }
    }
}

/// Point minimizing the total Euclidean distance to `points`.
pub fn geometric_median(points: &[Point], tolerance: f64) -> Result<Point> {
    geometric_median_with(
        points,
        WeiszfeldOptions {
            tolerance,
            ..WeiszfeldOptions::default()
        },
    )
}

/// Weiszfeld iteration with the Vardi-Zhang step at data points.
///
/// Every distinct data point is first tested against the subgradient
/// optimality condition `|sum of unit vectors to the others| <= multiplicity`;
/// a point that passes is returned exactly. Otherwise the optimum is off the
/// data and the iteration starts from the centroid.
pub fn geometric_median_with(points: &[Point], opts: WeiszfeldOptions) -> Result<Point> {
    let d = common_dim(points)?;
    if !(opts.tolerance > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if points.len() == 1 {
        return Ok(points[0].clone());
    }

    if let Some(p) = optimal_data_point(points, d) {
        return Ok(p);
    }

    let n = points.len() as f64;
    let mut y: Vec<f64> = (0..d)
        .map(|k| points.iter().map(|p| p[k]).sum::<f64>() / n)
        .collect();
    let mut best = Point::from_raw(y.clone());
    let mut best_value = total_distance(points, &best, Metric::Euclidean);

    let mut num = vec![0.0; d];
    for _ in 0..opts.max_iterations {
        let here = Point::from_raw(y.iter().copied());
        num.iter_mut().for_each(|v| *v = 0.0);
        let mut denom = 0.0;
        let mut coincident = 0usize;
        for p in points {
            let dist = distance_unchecked(p, &here, Metric::Euclidean);
            if dist < COINCIDENCE {
                coincident += 1;
                continue;
            }
            let w = 1.0 / dist;
            denom += w;
            for k in 0..d {
                num[k] += w * p[k];
            }
        }

        let next: Vec<f64> = if coincident == 0 {
            num.iter().map(|v| v / denom).collect()
        } else {
            // R = sum of unit vectors from the iterate to the other points.
            let r: f64 = (0..d)
                .map(|k| {
                    let rk = num[k] - denom * y[k];
                    rk * rk
                })
                .sum::<f64>()
                .sqrt();
            if r <= coincident as f64 {
                return Ok(here);
            }
            let ratio = coincident as f64 / r;
            (0..d)
                .map(|k| (1.0 - ratio) * (num[k] / denom) + ratio * y[k])
                .collect()
        };

        let mut next = next;
        let mut moved = step_length(&next, &y);
        let mut value = total_distance(
            points,
            &Point::from_raw(next.iter().copied()),
            Metric::Euclidean,
        );
        // Newton polish: its step length estimates the distance to the optimum,
        // and near the optimum it converges where Weiszfeld crawls.
        let newton = newton_step(points, &next);
        if let Some(s) = &newton {
            // Backtrack along the Newton direction until the objective drops.
            let mut t = 1.0;
            for _ in 0..40 {
                let z: Vec<f64> = next.iter().zip(s).map(|(a, b)| a - t * b).collect();
                let z_value = total_distance(
                    points,
                    &Point::from_raw(z.iter().copied()),
                    Metric::Euclidean,
                );
                if z_value <= value {
                    moved = step_length(&z, &y);
                    next = z;
                    value = z_value;
                    break;
                }
                t *= 0.5;
            }
        }
        y = next;
        let candidate = Point::from_raw(y.iter().copied());
        if value <= best_value {
            best_value = value;
            best = candidate.clone();
        }
        let converged = match &newton {
            Some(s) => s.iter().map(|v| v * v).sum::<f64>().sqrt() < opts.tolerance,
            None => moved < opts.tolerance,
        };
        if converged || moved == 0.0 {
            return Ok(candidate);
        }
    }

    Err(Error::Convergence {
        iterations: opts.max_iterations,
        best,
    })
}

fn step_length(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// `H^-1 g` for the total-distance objective at `y`, or `None` at a data
/// point or where the Hessian is numerically singular.
fn newton_step(points: &[Point], y: &[f64]) -> Option<Vec<f64>> {
    let d = y.len();
    let mut g = vec![0.0; d];
    let mut h = vec![vec![0.0; d]; d];
    for p in points {
        let diff: Vec<f64> = (0..d).map(|k| y[k] - p[k]).collect();
        let dist = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dist < COINCIDENCE {
            return None;
        }
        for i in 0..d {
            let ui = diff[i] / dist;
            g[i] += ui;
            for j in 0..d {
                let uj = diff[j] / dist;
                h[i][j] += (if i == j { 1.0 } else { 0.0 } - ui * uj) / dist;
            }
        }
    }
    let scale = (0..d).map(|i| h[i][i]).fold(0.0, f64::max);
    // Gaussian elimination with partial pivoting on [h | g].
    for col in 0..d {
        let pivot = (col..d).max_by(|&a, &b| h[a][col].abs().total_cmp(&h[b][col].abs()))?;
        if h[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        h.swap(col, pivot);
        g.swap(col, pivot);
        for row in col + 1..d {
            let f = h[row][col] / h[col][col];
            for k in col..d {
                h[row][k] -= f * h[col][k];
            }
            g[row] -= f * g[col];
        }
    }
    let mut s = vec![0.0; d];
    for row in (0..d).rev() {
        let tail: f64 = (row + 1..d).map(|k| h[row][k] * s[k]).sum();
        s[row] = (g[row] - tail) / h[row][row];
    }
    s.iter().all(|v| v.is_finite()).then_some(s)
}

/// Returns the first distinct data point satisfying the optimality condition.
fn optimal_data_point(points: &[Point], d: usize) -> Option<Point> {
    let mut seen: Vec<&Point> = Vec::new();
    let mut pull = vec![0.0; d];
    for candidate in points {
        if seen.contains(&candidate) {
            continue;
        }
        seen.push(candidate);
        pull.iter_mut().for_each(|v| *v = 0.0);
        let mut multiplicity = 0usize;
        for p in points {
            let dist = distance_unchecked(p, candidate, Metric::Euclidean);
            if dist < COINCIDENCE {
                multiplicity += 1;
                continue;
            }
            for k in 0..d {
                pull[k] += (p[k] - candidate[k]) / dist;
            }
        }
        let norm = pull.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= multiplicity as f64 + 1e-12 {
            return Some(candidate.clone());
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::xy(x, y)).collect()
    }

    #[test]
    fn four_corner_instance() {
        let gm = geometric_median(&pts(&[(0., 0.), (0., 2.), (12., 0.), (12., 2.)]), 1e-9).unwrap();
        assert!(gm.max_abs_diff(&Point::xy(6.0, 1.0)) < 1e-6);
    }

    #[test]
    fn misreported_instance_lands_on_data_point() {
        let gm = geometric_median(&pts(&[(0., 0.), (0., 2.), (12., 2.), (12., 2.)]), 1e-9).unwrap();
        assert_eq!(gm, Point::xy(12.0, 2.0));
    }

    #[test]
    fn single_point() {
        let gm = geometric_median(&pts(&[(3., 4.)]), 1e-9).unwrap();
        assert_eq!(gm, Point::xy(3.0, 4.0));
    }

    #[test]
    fn equilateral_triangle_centroid() {
        let h = 3f64.sqrt() / 2.0;
        let gm = geometric_median(&pts(&[(0., 0.), (1., 0.), (0.5, h)]), 1e-12).unwrap();
        assert!(gm.max_abs_diff(&Point::xy(0.5, h / 3.0)) < 1e-8);
    }

    #[test]
    fn obtuse_triangle_vertex() {
        // angle at the origin exceeds 120 degrees
        let gm = geometric_median(&pts(&[(0., 0.), (1., 0.1), (-1., 0.1)]), 1e-9).unwrap();
        assert_eq!(gm, Point::xy(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_tolerance_and_empty() {
        assert!(geometric_median(&pts(&[(0., 0.)]), 0.0).is_err());
        assert!(geometric_median(&[], 1e-9).is_err());
    }

    #[test]
    fn iteration_cap_reports_best_iterate() {
        let p = pts(&[(0., 0.), (3., 0.), (0., 4.), (5., 5.)]);
        let err = geometric_median_with(
            &p,
            WeiszfeldOptions {
                tolerance: 1e-15,
                max_iterations: 2,
            },
        )
        .unwrap_err();
        match err {
            Error::Convergence { iterations, best } => {
                assert_eq!(iterations, 2);
                assert_eq!(best.dim(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn one_dimensional_median_interval() {
        let p: Vec<Point> = [0.0, 1.0, 5.0].iter().map(|&x| Point::x1(x)).collect();
        assert_eq!(geometric_median(&p, 1e-9).unwrap(), Point::x1(1.0));
    }
}
