use crate::error::{Error, Result};
use crate::geometry::{euclidean, norm};

/// Ambient open region U ⊆ ℝⁿ that a submanifold lives in.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Domain {
    #[default]
    Everywhere,
    /// Open ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Open box ∏ (lo_i, hi_i).
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    pub fn is_everywhere(&self) -> bool {
        matches!(self, Domain::Everywhere)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.distance_to_complement(x) > 0.0
    }

    /// Distance from `x` to ℝⁿ ∖ U; `+∞` for U = ℝⁿ and 0 outside U.
    pub fn distance_to_complement(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Everywhere => f64::INFINITY,
            Domain::Ball { center, radius } => (radius - euclidean(x, center)).max(0.0),
            Domain::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(&xi, (&l, &h))| (xi - l).min(h - xi))
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
        }
    }

    /// Truncation key max(‖x‖, 1/dist(x, ℝⁿ ∖ U)); reduces to ‖x‖ for U = ℝⁿ.
    pub fn exhaustion(&self, x: &[f64]) -> f64 {
        let d = self.distance_to_complement(x);
        norm(x).max(1.0 / d)
    }
}

/// Compact region K: a closed ball or a closed box.
#[derive(Debug, Clone, PartialEq)]
pub enum CompactRegion {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl CompactRegion {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius >= 0.0) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidRegion(format!("ball of radius {radius}")));
        }
        Ok(CompactRegion::Ball { center, radius })
    }

    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::boxed(vec![-half_width; dim], vec![half_width; dim])
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len()
            || lo
                .iter()
                .zip(&hi)
                .any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h))
        {
            return Err(Error::InvalidRegion("box corners must satisfy lo <= hi".into()));
        }
        Ok(CompactRegion::Box { lo, hi })
    }

    pub fn dim(&self) -> usize {
        match self {
            CompactRegion::Ball { center, .. } => center.len(),
            CompactRegion::Box { lo, .. } => lo.len(),
        }
    }

    /// Euclidean distance from `x` to the region (0 inside).
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            CompactRegion::Ball { center, radius } => (euclidean(x, center) - radius).max(0.0),
            CompactRegion::Box { lo, hi } => {
                let mut s = 0.0;
                for ((&xi, &l), &h) in x.iter().zip(lo).zip(hi) {
                    let e = if xi < l {
                        l - xi
                    } else if xi > h {
                        xi - h
                    } else {
                        0.0
                    };
                    s += e * e;
                }
                s.sqrt()
            }
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            CompactRegion::Ball { center, radius } => euclidean(x, center) <= *radius,
            CompactRegion::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(xi, (l, h))| l <= xi && xi <= h),
        }
    }

    /// Membership in the closed `margin`-neighbourhood K ⊕ B(margin).
    pub fn contains_dilated(&self, x: &[f64], margin: f64) -> bool {
        self.contains(x) || self.distance(x) <= margin
    }

    /// Whether `other` is contained in `self`.
    pub fn includes(&self, other: &CompactRegion) -> bool {
        match (self, other) {
            (CompactRegion::Box { lo, hi }, CompactRegion::Box { lo: l2, hi: h2 }) => lo
                .iter()
                .zip(hi)
                .zip(l2.iter().zip(h2))
                .all(|((a, b), (c, d))| a <= c && d <= b),
            (CompactRegion::Ball { center, radius }, CompactRegion::Ball { center: c2, radius: r2 }) => {
                euclidean(center, c2) + r2 <= *radius
            }
            _ => false,
        }
    }
}
