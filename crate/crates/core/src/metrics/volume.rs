use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{hausdorff_distance_with, norm, ClosedSetSample};
use crate::manifolds::{restrict_to_radius, truncation_key, within, DiscretizedSubmanifold, TruncationMode};

/// A step of the grid is a jump when its growth exceeds this multiple of the median
/// step growth.
pub const JUMP_FACTOR: f64 = 3.0;

/// Scale of the gauge on ℝ₊ × ℝ₊ used by the volume pseudo-metric.
pub const NU_GAUGE_SCALE: f64 = 10.0;

/// Upper bound on the number of points used to sample one completed graph.
pub const MAX_GRAPH_POINTS: usize = 200_000;

/// Gauge of the compactification of ℝ₊ × ℝ₊: c/(c + ‖p‖) with c = [`NU_GAUGE_SCALE`].
pub fn nu_gauge(p: &[f64]) -> f64 {
    NU_GAUGE_SCALE / (NU_GAUGE_SCALE + norm(p))
}

/// `points` uniform radii on [0, r_max].
pub fn uniform_grid(points: usize, r_max: f64) -> Result<Vec<f64>> {
    if points < 2 {
        return Err(Error::NonpositiveCount("a radius grid needs at least 2 points".into()));
    }
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::InvalidParameter(format!("r_max must be positive, got {r_max}")));
    }
    let m = (points - 1) as f64;
    Ok((0..points).map(|i| r_max * i as f64 / m).collect())
}

/// A vertical segment of a completed graph: f jumps from `left` to `right` at `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub r: f64,
    pub left: f64,
    pub right: f64,
}

/// Completed graph {(r, v) : f(r⁻) ≤ v ≤ f(r⁺)} of a non-decreasing f with f(0⁻) = 0,
/// truncated to r ∈ [0, r_max].
///
/// Between consecutive breakpoints the graph is the straight segment from
/// `(rᵢ, rightᵢ)` to `(rᵢ₊₁, leftᵢ₊₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeGraph {
    grid: Vec<f64>,
    breakpoints: Vec<Breakpoint>,
    jumps: Vec<Breakpoint>,
}

impl VolumeGraph {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().expect("grid is never empty")
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    /// Detected jumps, in increasing r.
    pub fn jumps(&self) -> &[Breakpoint] {
        &self.jumps
    }

    /// Value f(r⁺) of the piecewise-linear interpolation at a grid radius or
    /// anywhere in between.
    pub fn value(&self, r: f64) -> f64 {
        let bp = &self.breakpoints;
        let k = bp.partition_point(|b| b.r <= r);
        if k == 0 {
            return 0.0;
        }
        let a = bp[k - 1];
        match bp.get(k) {
            None => a.right,
            Some(b) => {
                let t = (r - a.r) / (b.r - a.r);
                a.right + t * (b.left - a.right)
            }
        }
    }

    /// Vertices of the graph as a polyline starting at the origin.
    pub fn polyline(&self) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0, 0.0]];
        for b in &self.breakpoints {
            for v in [b.left, b.right] {
                let p = [b.r, v];
                if out.last() != Some(&p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Points along the polyline, no two consecutive ones farther apart than `eta`.
    pub fn dense_sample(&self, eta: f64) -> Vec<[f64; 2]> {
        let poly = self.polyline();
        let length: f64 = poly.windows(2).map(|w| seg_len(w[0], w[1])).sum();
        let eta = eta.max(length / MAX_GRAPH_POINTS as f64);
        let mut out = vec![poly[0]];
        for w in poly.windows(2) {
            let (p, q) = (w[0], w[1]);
            let m = (seg_len(p, q) / eta).ceil().max(1.0) as usize;
            for k in 1..=m {
                let t = k as f64 / m as f64;
                out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        out
    }
}

fn seg_len(p: [f64; 2], q: [f64; 2]) -> f64 {
    ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
}

/// Volume function r ↦ vol(W_r) on `grid`, with jumps located exactly.
///
/// Grid values come from [`restrict_to_radius`]. A step whose growth exceeds
/// [`JUMP_FACTOR`] times the median step growth is resolved into verticals at the
/// truncation keys of the samples entering in that step (keys equal to relative
/// precision 1e-9 form one vertical). All other steps are linear.
pub fn volume_function(w: &DiscretizedSubmanifold, grid: &[f64], mode: TruncationMode) -> Result<VolumeGraph> {
    if grid.len() < 2 || grid[0] != 0.0 || grid.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::GridMismatch(
            "radius grid must start at 0 and increase strictly".into(),
        ));
    }
    let values: Vec<f64> = grid.par_iter().map(|&r| restrict_to_radius(w, r, mode).1).collect();
    assert!(
        values.windows(2).all(|p| p[0] <= p[1]),
        "volume function must be monotone"
    );

    let mut steps: Vec<f64> = values.windows(2).map(|p| p[1] - p[0]).collect();
    steps.sort_by(f64::total_cmp);
    let mid = steps.len() / 2;
    let median = if steps.len() % 2 == 1 {
        steps[mid]
    } else {
        0.5 * (steps[mid - 1] + steps[mid])
    };
    let threshold = JUMP_FACTOR * median;

    let keys: Vec<(f64, f64)> = {
        let mut k: Vec<(f64, f64)> = w
            .samples()
            .iter()
            .map(|s| (truncation_key(w.domain(), mode, s.position()), s.weight))
            .collect();
        k.sort_by(|a, b| a.0.total_cmp(&b.0));
        k
    };

    let mut breakpoints = Vec::with_capacity(grid.len());
    let mut jumps = Vec::new();
    let origin = Breakpoint {
        r: 0.0,
        left: 0.0,
        right: values[0],
    };
    if values[0] > threshold {
        jumps.push(origin);
    }
    breakpoints.push(origin);
    for i in 0..grid.len() - 1 {
        let (lo, hi) = (values[i], values[i + 1]);
        if hi - lo > threshold {
            // Samples entering in (grid[i], grid[i + 1]], grouped by key.
            let start = keys.partition_point(|k| within(k.0, grid[i]));
            let end = keys.partition_point(|k| within(k.0, grid[i + 1]));
            let mut clusters: Vec<(f64, f64)> = Vec::new();
            for &(key, weight) in &keys[start..end] {
                match clusters.last_mut() {
                    Some((r, mass)) if key - *r <= 1e-9 * r.abs().max(1e-300) => *mass += weight,
                    _ => clusters.push((key, weight)),
                }
            }
            let mut current = lo;
            let count = clusters.len();
            for (c, (r, mass)) in clusters.into_iter().enumerate() {
                let right = if c + 1 == count { hi } else { (current + mass).min(hi) };
                if right > current {
                    let b = Breakpoint {
                        r: r.min(grid[i + 1]).max(grid[i]),
                        left: current,
                        right,
                    };
                    breakpoints.push(b);
                    jumps.push(b);
                    current = right;
                }
            }
        }
        breakpoints.push(Breakpoint {
            r: grid[i + 1],
            left: hi,
            right: hi,
        });
    }
    Ok(VolumeGraph {
        grid: grid.to_vec(),
        breakpoints,
        jumps,
    })
}

/// Compactified Hausdorff distance between the completed graphs, both with ∞
/// adjoined, under the gauge [`nu_gauge`]. Graphs are sampled at a quarter of the
/// smallest grid step.
pub fn volume_pseudodistance(a: &VolumeGraph, b: &VolumeGraph) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch(
            "volume graphs were computed on different radius grids".into(),
        ));
    }
    if a == b {
        return Ok(0.0);
    }
    let step = a.grid.windows(2).map(|p| p[1] - p[0]).fold(f64::INFINITY, f64::min);
    let eta = step / 4.0;
    let sa = ClosedSetSample::new(a.dense_sample(eta), true)?;
    let sb = ClosedSetSample::new(b.dense_sample(eta), true)?;
    hausdorff_distance_with(&sa, &sb, &nu_gauge)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{generate, GeneratorSpec};
    use std::f64::consts::PI;

    #[test]
    fn empty_manifold_has_the_zero_function() {
        let e = DiscretizedSubmanifold::empty(2, 1).unwrap();
        let g = volume_function(&e, &uniform_grid(64, 1.0).unwrap(), TruncationMode::OriginBall).unwrap();
        assert!(g.breakpoints().iter().all(|b| b.left == 0.0 && b.right == 0.0));
        assert!(g.jumps().is_empty());
    }

    #[test]
    fn unit_circle_has_one_jump() {
        let c = generate(&GeneratorSpec::circle(1.0, 512)).unwrap();
        let g = volume_function(&c, &uniform_grid(512, 1.5).unwrap(), TruncationMode::OriginBall).unwrap();
        assert_eq!(g.jumps().len(), 1);
        let j = g.jumps()[0];
        assert!((j.r - 1.0).abs() < 1e-12);
        assert!((j.right - j.left - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
        assert_eq!(g.value(0.99), 0.0);
    }

    #[test]
    fn x_axis_grows_linearly() {
        let line = generate(&GeneratorSpec::line(10.0, 1001)).unwrap();
        let grid = uniform_grid(512, 15.0).unwrap();
        let g = volume_function(&line, &grid, TruncationMode::OriginBall).unwrap();
        assert!(g.jumps().is_empty());
        for &r in grid.iter().filter(|&&r| (1.0..=10.0).contains(&r)) {
            assert!((g.value(r) - 2.0 * r).abs() / (2.0 * r) < 0.02, "r = {r}");
        }
    }

    #[test]
    fn graphs_on_different_grids_are_rejected() {
        let e = DiscretizedSubmanifold::empty(2, 1).unwrap();
        let a = volume_function(&e, &uniform_grid(16, 1.0).unwrap(), TruncationMode::OriginBall).unwrap();
        let b = volume_function(&e, &uniform_grid(17, 1.0).unwrap(), TruncationMode::OriginBall).unwrap();
        assert!(matches!(volume_pseudodistance(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn dense_sample_respects_the_spacing() {
        let c = generate(&GeneratorSpec::circle(1.0, 64)).unwrap();
        let g = volume_function(&c, &uniform_grid(32, 1.5).unwrap(), TruncationMode::OriginBall).unwrap();
        let pts = g.dense_sample(0.01);
        assert!(pts.windows(2).all(|w| seg_len(w[0], w[1]) <= 0.01 + 1e-12));
        assert_eq!(pts[0], [0.0, 0.0]);
        assert_eq!(*pts.last().unwrap(), [1.5, g.value(1.5)]);
    }
}
