use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{bounding_box, Point};

use super::SearchBudget;

/// Ceiling on grid points per search, so a tiny resolution fails fast
/// instead of exhausting memory.
pub const MAX_CANDIDATES: usize = 4_000_000;

/// Axis-aligned region searched by the checkers.
pub(crate) struct SearchBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SearchBox {
    /// Bounding box of `points`, padded on every side by `pad` times its
    /// diagonal.
    pub fn around(points: &[Point], pad: f64) -> Result<Self> {
        let (lo, hi) = bounding_box(points)?;
        let diag = lo
            .coords()
            .iter()
            .zip(hi.coords())
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt();
        let margin = pad * if diag > 0.0 { diag } else { 1.0 };
        Ok(SearchBox {
            lo: lo.coords().iter().map(|v| v - margin).collect(),
            hi: hi.coords().iter().map(|v| v + margin).collect(),
        })
    }

    /// Lattice `lo + k * res` in every coordinate, up to `hi`.
    pub fn grid(&self, res: f64) -> Result<Vec<Point>> {
        let steps: Vec<usize> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(lo, hi)| ((hi - lo) / res + 1e-9).floor() as usize + 1)
            .collect();
        let count = steps
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .unwrap_or(usize::MAX);
        if count > MAX_CANDIDATES {
            return Err(Error::ResourceCap {
                what: "grid candidates",
                value: count,
                cap: MAX_CANDIDATES,
            });
        }
        let mut out = Vec::with_capacity(count);
        let mut idx = vec![0usize; steps.len()];
        loop {
            out.push(Point::from_raw(
                idx.iter().zip(&self.lo).map(|(&k, lo)| lo + k as f64 * res),
            ));
            let mut axis = 0;
            loop {
                if axis == idx.len() {
                    return Ok(out);
                }
                idx[axis] += 1;
                if idx[axis] < steps[axis] {
                    break;
                }
                idx[axis] = 0;
                axis += 1;
            }
        }
    }

    pub fn corners(&self) -> Vec<Point> {
        let d = self.lo.len();
        (0..1usize << d)
            .map(|mask| {
                Point::from_raw((0..d).map(|k| {
                    if mask >> k & 1 == 1 {
                        self.hi[k]
                    } else {
                        self.lo[k]
                    }
                }))
            })
            .collect()
    }

    pub fn random(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                Point::from_raw(
                    self.lo
                        .iter()
                        .zip(&self.hi)
                        .map(|(&lo, &hi)| {
                            if hi > lo {
                                rng.random_range(lo..hi)
                            } else {
                                lo
                            }
                        })
                        .collect::<Vec<_>>(),
                )
            })
            .collect()
    }
}

/// Grid, box corners and random restarts for `budget` around `points`.
pub(crate) fn budget_candidates(points: &[Point], budget: &SearchBudget) -> Result<Vec<Point>> {
    budget.validate()?;
    let b = SearchBox::around(points, budget.bounding_box_pad)?;
    let mut out = b.grid(budget.grid_resolution)?;
    out.extend(b.corners());
    out.extend(b.random(budget.random_restarts, budget.seed));
    Ok(out)
}
