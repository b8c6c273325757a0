use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::point::{common_dim, Point};

/// Seed used by [`smallest_enclosing_circle`].
pub const SEC_SEED: u64 = 0x005E_C02D;

const MULTIPLICATIVE_EPSILON: f64 = 1.0 + 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: &Point, slack: f64) -> bool {
        dist(&xy(&self.center), &xy(p)) <= self.radius + slack
    }
}

#[derive(Clone, Copy)]
struct C2 {
    c: [f64; 2],
    r: f64,
}

impl C2 {
    fn holds(&self, p: [f64; 2]) -> bool {
        dist(&self.c, &p) <= self.r * MULTIPLICATIVE_EPSILON
    }
}

fn xy(p: &Point) -> [f64; 2] {
    [p.x(), p.y()]
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Smallest circle enclosing a 1-d or 2-d point set, using a fixed seed.
pub fn smallest_enclosing_circle(points: &[Point]) -> Result<Circle> {
    smallest_enclosing_circle_seeded(points, SEC_SEED)
}

/// Welzl's randomized incremental algorithm (move-to-front free variant),
/// expected linear time. 1-d input is embedded on the x axis and the center
/// is returned in 1-d.
pub fn smallest_enclosing_circle_seeded(points: &[Point], seed: u64) -> Result<Circle> {
    let d = common_dim(points)?;
    if d > 2 {
        return Err(Error::invalid(format!(
            "smallest enclosing circle needs 1-d or 2-d points, got {d}-d"
        )));
    }
    let mut shuffled: Vec<[f64; 2]> = points.iter().map(xy).collect();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut c: Option<C2> = None;
    for i in 0..shuffled.len() {
        let p = shuffled[i];
        if c.is_none_or(|c| !c.holds(p)) {
            c = Some(with_one_boundary(&shuffled[..=i], p));
        }
    }
    let c = c.expect("nonempty input");

    // Tighten the radius to the farthest input so containment is exact.
    let radius = shuffled.iter().map(|p| dist(&c.c, p)).fold(0.0, f64::max);
    let center = if d == 1 {
        Point::from_raw([c.c[0]])
    } else {
        Point::from_raw(c.c)
    };
    Ok(Circle { center, radius })
}

fn with_one_boundary(points: &[[f64; 2]], p: [f64; 2]) -> C2 {
    let mut c = C2 { c: p, r: 0.0 };
    for i in 0..points.len() {
        let q = points[i];
        if !c.holds(q) {
            c = if c.r == 0.0 {
                diameter(p, q)
            } else {
                with_two_boundary(&points[..=i], p, q)
            };
        }
    }
    c
}

fn with_two_boundary(points: &[[f64; 2]], p: [f64; 2], q: [f64; 2]) -> C2 {
    let circ = diameter(p, q);
    let mut left: Option<C2> = None;
    let mut right: Option<C2> = None;
    let pq = [q[0] - p[0], q[1] - p[1]];
    let cross = |v: [f64; 2]| pq[0] * (v[1] - p[1]) - pq[1] * (v[0] - p[0]);

    for &r in points {
        if circ.holds(r) {
            continue;
        }
        let side = cross(r);
        let Some(c) = circumcircle(p, q, r) else {
            continue;
        };
        if side > 0.0 && left.is_none_or(|l| cross(c.c) > cross(l.c)) {
            left = Some(c);
        } else if side < 0.0 && right.is_none_or(|rt| cross(c.c) < cross(rt.c)) {
            right = Some(c);
        }
    }

    match (left, right) {
        (None, None) => circ,
        (Some(l), None) => l,
        (None, Some(r)) => r,
        (Some(l), Some(r)) => {
            if l.r <= r.r {
                l
            } else {
                r
            }
        }
    }
}

fn diameter(a: [f64; 2], b: [f64; 2]) -> C2 {
    let c = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    C2 {
        c,
        r: dist(&c, &a).max(dist(&c, &b)),
    }
}

fn circumcircle(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<C2> {
    // Translate to the bounding-box center for precision.
    let ox = (a[0].min(b[0]).min(c[0]) + a[0].max(b[0]).max(c[0])) / 2.0;
    let oy = (a[1].min(b[1]).min(c[1]) + a[1].max(b[1]).max(c[1])) / 2.0;
    let (ax, ay) = (a[0] - ox, a[1] - oy);
    let (bx, by) = (b[0] - ox, b[1] - oy);
    let (cx, cy) = (c[0] - ox, c[1] - oy);
    let d = (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by)) * 2.0;
    if d == 0.0 {
        return None;
    }
    let a2 = ax * ax + ay * ay;
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let x = ox + (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d;
    let y = oy + (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d;
    let center = [x, y];
    let r = dist(&center, &a)
        .max(dist(&center, &b))
        .max(dist(&center, &c));
    Some(C2 { c: center, r })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::xy(x, y)).collect()
    }

    #[test]
    fn duplicated_collinear_points() {
        let c = smallest_enclosing_circle(&pts(&[(0., 0.), (0., 0.), (0., 1.)])).unwrap();
        assert!(c.center.max_abs_diff(&Point::xy(0.0, 0.5)) < 1e-12);
        assert!((c.radius - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_point_has_zero_radius() {
        let c = smallest_enclosing_circle(&pts(&[(2., 2.)])).unwrap();
        assert_eq!(c.center, Point::xy(2.0, 2.0));
        assert_eq!(c.radius, 0.0);
    }

    #[test]
    fn rectangle_corners() {
        let c =
            smallest_enclosing_circle(&pts(&[(0., 0.), (0., 2.), (12., 0.), (12., 2.)])).unwrap();
        assert!(c.center.max_abs_diff(&Point::xy(6.0, 1.0)) < 1e-12);
        assert!((c.radius - 37f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_input() {
        let p: Vec<Point> = [4.0, -2.0, 1.0].iter().map(|&x| Point::x1(x)).collect();
        let c = smallest_enclosing_circle(&p).unwrap();
        assert_eq!(c.center, Point::x1(1.0));
        assert_eq!(c.radius, 3.0);
    }

    #[test]
    fn seed_does_not_change_the_circle() {
        let p = pts(&[(0., 0.), (3., 1.), (1., 4.), (2., 2.), (-1., 2.)]);
        let a = smallest_enclosing_circle_seeded(&p, 1).unwrap();
        let b = smallest_enclosing_circle_seeded(&p, 99).unwrap();
        assert!(a.center.max_abs_diff(&b.center) < 1e-12);
        assert!((a.radius - b.radius).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(smallest_enclosing_circle(&[]).is_err());
        let p3 = vec![Point::new([0.0, 0.0, 0.0]).unwrap()];
        assert!(smallest_enclosing_circle(&p3).is_err());
    }
}
