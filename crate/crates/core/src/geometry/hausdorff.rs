use rayon::prelude::*;

use super::kdtree::KdTree;
use super::{origin_gauge, CompactifiedPoint, Gauge, MetricPoint};
use crate::error::{Error, Result};

/// Finite sample of a closed subset of the compactified space. When
/// `contains_infinity` is set the sample stands for A ∪ {∞}.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedSetSample<P> {
    points: Vec<P>,
    contains_infinity: bool,
}

impl<P: MetricPoint> ClosedSetSample<P> {
    pub fn new(points: Vec<P>, contains_infinity: bool) -> Result<Self> {
        if points.is_empty() && !contains_infinity {
            return Err(Error::EmptySample);
        }
        if let Some(first) = points.first() {
            if points.iter().any(|p| !first.compatible(p)) {
                return Err(Error::InvalidDimensions("closed-set sample mixes dimensions".into()));
            }
        }
        Ok(Self {
            points,
            contains_infinity,
        })
    }

    /// Collects a list of compactified points; any ∞ entry sets the flag.
    pub fn from_compactified(points: Vec<CompactifiedPoint<P>>) -> Result<Self> {
        let mut finite = Vec::with_capacity(points.len());
        let mut inf = false;
        for p in points {
            match p {
                CompactifiedPoint::Finite(q) => finite.push(q),
                CompactifiedPoint::Infinity => inf = true,
            }
        }
        Self::new(finite, inf)
    }

    /// The sample {∞}.
    pub fn infinity_only() -> Self {
        Self {
            points: Vec::new(),
            contains_infinity: true,
        }
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn contains_infinity(&self) -> bool {
        self.contains_infinity
    }

    pub fn len(&self) -> usize {
        self.points.len() + usize::from(self.contains_infinity)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Hausdorff distance under the compactified metric with the origin gauge.
pub fn hausdorff_distance<P: MetricPoint>(a: &ClosedSetSample<P>, b: &ClosedSetSample<P>) -> Result<f64> {
    hausdorff_distance_with(a, b, &origin_gauge)
}

/// Hausdorff distance under d̂ = min(d, g(a) + g(b)) with the given gauge.
///
/// Nearest-neighbor queries go through a kd-tree on positions with an early break
/// once a query point can no longer raise the running maximum. All reductions are
/// exact max/min operations, so the result equals the brute-force value bit for bit
/// and does not depend on the number of worker threads.
pub fn hausdorff_distance_with<P: MetricPoint>(
    a: &ClosedSetSample<P>,
    b: &ClosedSetSample<P>,
    gauge: Gauge<'_>,
) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    if let (Some(p), Some(q)) = (a.points.first(), b.points.first()) {
        if !p.compatible(q) {
            return Err(Error::IncompatiblePlanes(
                "closed-set samples live in different spaces".into(),
            ));
        }
    }
    let ab = directed(a, b, gauge);
    let ba = directed(b, a, gauge);
    Ok(ab.max(ba))
}

const CHUNK: usize = 256;

fn directed<P: MetricPoint>(from: &ClosedSetSample<P>, to: &ClosedSetSample<P>, gauge: Gauge<'_>) -> f64 {
    let to_gauge_min = to
        .points
        .iter()
        .map(|p| gauge(p.position()))
        .fold(f64::INFINITY, f64::min);

    // Contribution of ∞ ∈ from.
    let mut start = 0.0f64;
    if from.contains_infinity {
        start = if to.contains_infinity { 0.0 } else { to_gauge_min };
    }
    if from.points.is_empty() {
        return start;
    }

    let dim = to.points.first().map_or(0, |p| p.position().len());
    let tree = KdTree::new(dim, to.points.iter().map(|p| p.position()));

    from.points
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut running = start;
            for p in chunk {
                let gp = gauge(p.position());
                let mut cap = f64::INFINITY;
                if to.contains_infinity {
                    cap = cap.min(gp);
                }
                if !to.points.is_empty() {
                    cap = cap.min(gp + to_gauge_min);
                }
                if cap <= running {
                    continue;
                }
                let value = match tree.nearest_by(p.position(), cap, running, |j| p.distance(&to.points[j])) {
                    Some((_, d)) => d.min(cap),
                    None => cap,
                };
                running = running.max(value);
            }
            running
        })
        .reduce(|| start, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{compactified_distance, GaussPoint, GrassPlane};

    fn line_point(x: f64, y: f64) -> GaussPoint {
        GaussPoint::new(vec![x, y], GrassPlane::coordinate(2, 1).unwrap()).unwrap()
    }

    #[test]
    fn identical_samples_are_at_distance_zero() {
        let a = ClosedSetSample::new(vec![line_point(0.0, 0.0), line_point(1.0, 2.0)], true).unwrap();
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn infinity_against_far_points() {
        let r = 3.0;
        let a: ClosedSetSample<GaussPoint> = ClosedSetSample::infinity_only();
        let b = ClosedSetSample::new(
            (0..8)
                .map(|k| {
                    let t = k as f64;
                    line_point(r * t.cos(), r * t.sin())
                })
                .collect(),
            true,
        )
        .unwrap();
        let d = hausdorff_distance(&a, &b).unwrap();
        assert!((d - 0.25).abs() < 1e-15);
    }

    #[test]
    fn empty_without_infinity_is_an_error() {
        let e = ClosedSetSample::<GaussPoint>::new(vec![], false);
        assert!(matches!(e, Err(Error::EmptySample)));
    }

    #[test]
    fn samples_without_infinity_use_the_gauge_branch() {
        let a = ClosedSetSample::new(vec![line_point(0.0, 0.0)], false).unwrap();
        let b = ClosedSetSample::new(vec![line_point(10.0, 0.0)], false).unwrap();
        let d = hausdorff_distance(&a, &b).unwrap();
        let brute = compactified_distance(
            &CompactifiedPoint::Finite(line_point(0.0, 0.0)),
            &CompactifiedPoint::Finite(line_point(10.0, 0.0)),
        );
        assert_eq!(d, brute);
    }
}
