//! Ambient metric structures: the Grassmannian distance, the product distance on
//! ℝⁿ × Gr_d(ℝⁿ), its one-point compactification, and Hausdorff distance between
//! finite closed-set samples.

mod grassmann;
mod hausdorff;
pub mod kdtree;

pub use grassmann::{grassmann_distance, orthonormality_defect, GrassPlane, FRAME_TOLERANCE};
pub use hausdorff::{hausdorff_distance, hausdorff_distance_with, ClosedSetSample};

use crate::error::{Error, Result};

/// Euclidean distance. Squares are accumulated left to right; kd-tree pruning
/// relies on that order.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        s += d * d;
    }
    s.sqrt()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in a {
        s += x * x;
    }
    s.sqrt()
}

/// A point of a metric space carrying a Euclidean position.
///
/// `distance` must never be smaller than `euclidean(self.position(), other.position())`;
/// spatial indexing depends on it.
pub trait MetricPoint: Sync {
    fn position(&self) -> &[f64];

    fn distance(&self, other: &Self) -> f64;

    fn compatible(&self, other: &Self) -> bool {
        self.position().len() == other.position().len()
    }
}

impl MetricPoint for [f64; 2] {
    fn position(&self) -> &[f64] {
        self
    }

    fn distance(&self, other: &Self) -> f64 {
        euclidean(self, other)
    }
}

/// A pair (x, T) ∈ ℝⁿ × Gr_d(ℝⁿ).
#[derive(Debug, Clone, PartialEq)]
pub struct GaussPoint {
    pub position: Vec<f64>,
    pub plane: GrassPlane,
}

impl GaussPoint {
    pub fn new(position: Vec<f64>, plane: GrassPlane) -> Result<Self> {
        if position.len() != plane.ambient_dim() {
            return Err(Error::InvalidDimensions(format!(
                "position in R^{} with plane in R^{}",
                position.len(),
                plane.ambient_dim()
            )));
        }
        Ok(Self { position, plane })
    }
}

impl MetricPoint for GaussPoint {
    fn position(&self) -> &[f64] {
        &self.position
    }

    fn distance(&self, other: &Self) -> f64 {
        euclidean(&self.position, &other.position) + grassmann::principal_angle_unchecked(&self.plane, &other.plane)
    }

    fn compatible(&self, other: &Self) -> bool {
        self.position.len() == other.position.len()
            && self.plane.ambient_dim() == other.plane.ambient_dim()
            && self.plane.plane_dim() == other.plane.plane_dim()
    }
}

/// d = d₀ + d₁ on ℝⁿ × Gr_d(ℝⁿ).
pub fn gauss_distance(a: &GaussPoint, b: &GaussPoint) -> Result<f64> {
    if !a.compatible(b) {
        return Err(Error::IncompatiblePlanes(format!(
            "Gauss points in R^{} x Gr({}) and R^{} x Gr({})",
            a.position.len(),
            a.plane.plane_dim(),
            b.position.len(),
            b.plane.plane_dim()
        )));
    }
    Ok(a.distance(b))
}

/// Gauge of the compactification: positive, 1-Lipschitz for any distance that
/// dominates d₀, and vanishing at infinity.
pub type Gauge<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// g(p) = 1/(1 + ‖position(p)‖), measured from the origin.
pub fn origin_gauge(position: &[f64]) -> f64 {
    1.0 / (1.0 + norm(position))
}

/// A point of the one-point compactification.
#[derive(Debug, Clone, PartialEq)]
pub enum CompactifiedPoint<P> {
    Finite(P),
    Infinity,
}

/// Compactified metric with the origin gauge:
/// d̂(a, b) = min(d(a, b), g(a) + g(b)), d̂(a, ∞) = g(a), d̂(∞, ∞) = 0.
pub fn compactified_distance<P: MetricPoint>(a: &CompactifiedPoint<P>, b: &CompactifiedPoint<P>) -> f64 {
    compactified_distance_with(a, b, &origin_gauge)
}

pub fn compactified_distance_with<P: MetricPoint>(
    a: &CompactifiedPoint<P>,
    b: &CompactifiedPoint<P>,
    gauge: Gauge<'_>,
) -> f64 {
    use CompactifiedPoint::*;
    match (a, b) {
        (Infinity, Infinity) => 0.0,
        (Finite(p), Infinity) | (Infinity, Finite(p)) => gauge(p.position()),
        (Finite(p), Finite(q)) => p.distance(q).min(gauge(p.position()) + gauge(q.position())),
    }
}
