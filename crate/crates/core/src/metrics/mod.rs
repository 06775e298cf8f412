//! The differential Fell metric `d_H`, the volume pseudo-metric `d_nu` and their
//! sum `d_psi` on discretized submanifolds.

mod volume;

pub use volume::{
    nu_gauge, uniform_grid, volume_function, volume_pseudodistance, Breakpoint, VolumeGraph, JUMP_FACTOR,
    MAX_GRAPH_POINTS, NU_GAUGE_SCALE,
};

use crate::error::{Error, Result};
use crate::geometry::{hausdorff_distance_with, origin_gauge, ClosedSetSample, GaussPoint};
use crate::manifolds::{truncation_key, DiscretizedSubmanifold, Domain, TruncationMode};

/// Default number of radii in the volume grid.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Gauss(W) ∪ {∞}: one Gauss point per sample, with ∞ adjoined.
pub fn gauss_map(w: &DiscretizedSubmanifold) -> ClosedSetSample<GaussPoint> {
    ClosedSetSample::new(w.samples().iter().map(|s| s.point.clone()).collect(), true)
        .expect("a sample with infinity is never empty")
}

fn check_pair(a: &DiscretizedSubmanifold, b: &DiscretizedSubmanifold) -> Result<()> {
    if !a.compatible(b) {
        return Err(Error::IncompatiblePlanes(format!(
            "dimension mismatch: {}-manifold in R^{} vs {}-manifold in R^{}",
            a.intrinsic_dim(),
            a.ambient_dim(),
            b.intrinsic_dim(),
            b.ambient_dim()
        )));
    }
    if a.domain() != b.domain() {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

/// Truncation mode implied by the common domain: origin balls on ℝⁿ, the
/// exhaustion max(‖x‖, 1/dist(x, ℝⁿ ∖ U)) on a proper U.
pub fn default_mode(domain: &Domain) -> TruncationMode {
    if domain.is_everywhere() {
        TruncationMode::OriginBall
    } else {
        TruncationMode::DomainAware
    }
}

/// Hausdorff distance between Gauss(W) ∪ {∞} and Gauss(W′) ∪ {∞} under the
/// compactified product metric. On a proper domain U the gauge is
/// 1/(1 + max(‖x‖, 1/dist(x, ℝⁿ ∖ U))), which is still 1-Lipschitz.
pub fn fell_hausdorff(a: &DiscretizedSubmanifold, b: &DiscretizedSubmanifold) -> Result<f64> {
    check_pair(a, b)?;
    let (ga, gb) = (gauss_map(a), gauss_map(b));
    let domain = a.domain().clone();
    if domain.is_everywhere() {
        hausdorff_distance_with(&ga, &gb, &origin_gauge)
    } else {
        let gauge = move |x: &[f64]| 1.0 / (1.0 + domain.exhaustion(x));
        hausdorff_distance_with(&ga, &gb, &gauge)
    }
}

/// Radius grid shared by both volume functions of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub points: usize,
    /// Fixed truncation radius; when `None` it is 1.5 × the largest truncation key
    /// over both manifolds, but at least 1.
    pub r_max: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            points: DEFAULT_GRID_POINTS,
            r_max: None,
        }
    }
}

impl GridConfig {
    pub fn resolve_r_max(&self, manifolds: &[&DiscretizedSubmanifold]) -> f64 {
        self.r_max.unwrap_or_else(|| {
            let largest = manifolds
                .iter()
                .flat_map(|w| {
                    let mode = default_mode(w.domain());
                    w.samples()
                        .iter()
                        .map(move |s| truncation_key(w.domain(), mode, s.position()))
                })
                .fold(0.0, f64::max);
            (1.5 * largest).max(1.0)
        })
    }

    pub fn grid(&self, manifolds: &[&DiscretizedSubmanifold]) -> Result<Vec<f64>> {
        uniform_grid(self.points, self.resolve_r_max(manifolds))
    }
}

/// d_nu(W, W′) on the grid chosen by `config`.
pub fn nu_distance(a: &DiscretizedSubmanifold, b: &DiscretizedSubmanifold, config: &GridConfig) -> Result<f64> {
    check_pair(a, b)?;
    let grid = config.grid(&[a, b])?;
    let mode = default_mode(a.domain());
    let ga = volume_function(a, &grid, mode)?;
    let gb = volume_function(b, &grid, mode)?;
    volume_pseudodistance(&ga, &gb)
}

/// The three distances of a pair, with the truncation error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub d_h: f64,
    pub d_nu: f64,
    pub d_psi: f64,
    /// 2·g(r_max), bounding the effect of cutting the volume graphs at r_max.
    pub truncation_bound: f64,
    pub n_a: usize,
    pub n_b: usize,
}

impl DistanceReport {
    pub const CSV_HEADER: &'static str = "d_H,d_nu,d_psi,truncation_bound,n_A,n_B";

    /// `d_H,d_nu,d_psi,truncation_bound,n_A,n_B` in shortest round-trip notation.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.d_h, self.d_nu, self.d_psi, self.truncation_bound, self.n_a, self.n_b
        )
    }
}

/// d_psi = d_H + d_nu.
pub fn gr_w_distance(
    a: &DiscretizedSubmanifold,
    b: &DiscretizedSubmanifold,
    config: &GridConfig,
) -> Result<DistanceReport> {
    check_pair(a, b)?;
    let r_max = config.resolve_r_max(&[a, b]);
    let fixed = GridConfig {
        points: config.points,
        r_max: Some(r_max),
    };
    let (d_h, d_nu) = rayon::join(|| fell_hausdorff(a, b), || nu_distance(a, b, &fixed));
    let (d_h, d_nu) = (d_h?, d_nu?);
    Ok(DistanceReport {
        d_h,
        d_nu,
        d_psi: d_h + d_nu,
        truncation_bound: 2.0 * nu_gauge(&[r_max]),
        n_a: a.len(),
        n_b: b.len(),
    })
}
