//! Scanning: the section p ↦ (affine tangent plane of W near p, or ∞) over a grid
//! of basepoints, and the metric it pulls back to submanifolds.
//!
//! The retraction onto the nearest tangent plane stands in for the exact scanning
//! construction. A basepoint maps to ∞ when its nearest sample is farther than the
//! scan radius ρ, or when the nearest point of W is ambiguous.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::kdtree::KdTree;
use crate::geometry::{compactified_distance_with, euclidean, norm, CompactifiedPoint, GaussPoint, GrassPlane};
use crate::manifolds::DiscretizedSubmanifold;

/// Default scan radius.
pub const DEFAULT_RHO: f64 = 1.0;

/// Relative slack under which a second, well-separated sample makes the nearest
/// point ambiguous.
pub const AMBIGUITY_FACTOR: f64 = 1.05;

/// Largest grid [`scan_section`] accepts.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// A point of the fiber over a basepoint p: the affine plane p + offset + T, with
/// the offset orthogonal to T, or the point at infinity.
#[derive(Debug, Clone, PartialEq)]
pub enum AffinePlaneOrInfinity {
    Plane { offset: Vec<f64>, plane: GrassPlane },
    Infinity,
}

impl AffinePlaneOrInfinity {
    pub fn is_infinite(&self) -> bool {
        matches!(self, AffinePlaneOrInfinity::Infinity)
    }

    fn compactified(&self) -> CompactifiedPoint<GaussPoint> {
        match self {
            AffinePlaneOrInfinity::Plane { offset, plane } => CompactifiedPoint::Finite(GaussPoint {
                position: offset.clone(),
                plane: plane.clone(),
            }),
            AffinePlaneOrInfinity::Infinity => CompactifiedPoint::Infinity,
        }
    }
}

/// Box grid ∏ [loᵢ, hiᵢ]. Each axis has round((hiᵢ − loᵢ)/sᵢ) intervals of equal
/// length, so both ends are grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub spacing: Vec<f64>,
}

impl GridSpec {
    /// The cube [a, b]ⁿ with spacing s on every axis.
    pub fn cube(dim: usize, a: f64, b: f64, s: f64) -> Self {
        Self {
            lo: vec![a; dim],
            hi: vec![b; dim],
            spacing: vec![s; dim],
        }
    }

    /// [−1.5, 1.5]ⁿ with spacing 0.1.
    pub fn default_for(dim: usize) -> Self {
        Self::cube(dim, -1.5, 1.5, 0.1)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn axes(&self) -> Result<Vec<Vec<f64>>> {
        if self.lo.is_empty() || self.hi.len() != self.lo.len() || self.spacing.len() != self.lo.len() {
            return Err(Error::InvalidDimensions("grid axes disagree".into()));
        }
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(&self.spacing)
            .map(|((&a, &b), &s)| {
                if !(a.is_finite() && b.is_finite() && a <= b && s > 0.0 && s.is_finite()) {
                    return Err(Error::InvalidParameter(format!("grid axis {a}:{b}:{s}")));
                }
                let m = ((b - a) / s).round();
                if m > MAX_GRID_POINTS as f64 {
                    return Err(Error::GridTooLarge {
                        points: usize::MAX,
                        limit: MAX_GRID_POINTS,
                    });
                }
                let m = m as usize;
                Ok(if m == 0 {
                    vec![a]
                } else {
                    (0..=m).map(|k| a + (b - a) * k as f64 / m as f64).collect()
                })
            })
            .collect()
    }

    /// Grid points, first axis slowest.
    pub fn points(&self) -> Result<Vec<Vec<f64>>> {
        let axes = self.axes()?;
        let total = axes
            .iter()
            .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
            .unwrap_or(usize::MAX);
        if total > MAX_GRID_POINTS {
            return Err(Error::GridTooLarge {
                points: total,
                limit: MAX_GRID_POINTS,
            });
        }
        let mut out = vec![Vec::with_capacity(axes.len())];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&c| {
                        let mut p = prefix.clone();
                        p.push(c);
                        p
                    })
                })
                .collect();
        }
        Ok(out)
    }
}

/// Evaluates the scanning section of one manifold.
pub struct Scanner<'a> {
    w: &'a DiscretizedSubmanifold,
    tree: KdTree,
    rho: f64,
}

impl<'a> Scanner<'a> {
    pub fn new(w: &'a DiscretizedSubmanifold, rho: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scan radius must be positive, got {rho}"
            )));
        }
        Ok(Self {
            w,
            tree: w.index(),
            rho,
        })
    }

    /// Nearest tangent plane, relative to p, or ∞.
    ///
    /// With x* the nearest sample, the value is ∞ when ‖x* − p‖ > ρ, or when some
    /// sample z farther than 3h from x* is nearly as close to p
    /// (‖z − p‖ ≤ 1.05·‖x* − p‖) and p lies nearly on its normal space
    /// (‖P_{T_z}(z − p)‖ ≤ h), i.e. p has a second, separate foot point.
    pub fn at(&self, p: &[f64]) -> AffinePlaneOrInfinity {
        let Some((i, d)) = self.tree.nearest(p) else {
            return AffinePlaneOrInfinity::Infinity;
        };
        if d > self.rho {
            return AffinePlaneOrInfinity::Infinity;
        }
        let h = self.w.resolution();
        let samples = self.w.samples();
        let x = &samples[i];
        for j in self.tree.within_radius(p, AMBIGUITY_FACTOR * d) {
            let z = &samples[j];
            if euclidean(z.position(), x.position()) <= 3.0 * h {
                continue;
            }
            let to_z: Vec<f64> = z.position().iter().zip(p).map(|(a, b)| a - b).collect();
            if norm(&z.tangent().project(&to_z)) <= h {
                return AffinePlaneOrInfinity::Infinity;
            }
        }
        let to_x: Vec<f64> = x.position().iter().zip(p).map(|(a, b)| a - b).collect();
        AffinePlaneOrInfinity::Plane {
            offset: x.tangent().reject(&to_x),
            plane: x.tangent().clone(),
        }
    }
}

/// [`Scanner::at`] for a single basepoint.
pub fn scan_at(w: &DiscretizedSubmanifold, p: &[f64], rho: f64) -> Result<AffinePlaneOrInfinity> {
    if p.len() != w.ambient_dim() {
        return Err(Error::InvalidDimensions("basepoint dimension".into()));
    }
    Ok(Scanner::new(w, rho)?.at(p))
}

/// The scanning section sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSection {
    pub grid: Vec<Vec<f64>>,
    pub values: Vec<AffinePlaneOrInfinity>,
    pub rho: f64,
}

impl ScanSection {
    /// CSV with header `p1..pn,value,o1..on,t1_1..td_n`. Rows at ∞ carry `inf` and
    /// empty offset and frame fields; frame entries are the tangent basis vectors in
    /// order.
    pub fn to_csv(&self, intrinsic_dim: usize) -> String {
        let n = self.grid.first().map_or(0, |p| p.len());
        let mut header: Vec<String> = (1..=n).map(|i| format!("p{i}")).collect();
        header.push("value".into());
        header.extend((1..=n).map(|i| format!("o{i}")));
        for j in 1..=intrinsic_dim {
            header.extend((1..=n).map(|i| format!("t{j}_{i}")));
        }
        let mut out = header.join(",");
        out.push('\n');
        for (p, v) in self.grid.iter().zip(&self.values) {
            let mut fields: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
            match v {
                AffinePlaneOrInfinity::Infinity => {
                    fields.push("inf".into());
                    fields.extend(std::iter::repeat_n(String::new(), n + intrinsic_dim * n));
                }
                AffinePlaneOrInfinity::Plane { offset, plane } => {
                    fields.push("finite".into());
                    fields.extend(offset.iter().map(|c| format!("{c}")));
                    for j in 0..plane.plane_dim() {
                        fields.extend(plane.basis_vector(j).iter().map(|c| format!("{c}")));
                    }
                }
            }
            let _ = writeln!(out, "{}", fields.join(","));
        }
        out
    }
}

/// Evaluates the scanning section on every grid point.
pub fn scan_section(w: &DiscretizedSubmanifold, grid: &GridSpec, rho: f64) -> Result<ScanSection> {
    if grid.dim() != w.ambient_dim() {
        return Err(Error::InvalidDimensions(format!(
            "grid in R^{} for a manifold in R^{}",
            grid.dim(),
            w.ambient_dim()
        )));
    }
    let points = grid.points()?;
    let scanner = Scanner::new(w, rho)?;
    let values = points.par_iter().map(|p| scanner.at(p)).collect();
    Ok(ScanSection {
        grid: points,
        values,
        rho,
    })
}

/// Fiber gauge min(1/(1 + ‖o‖), ρ − ‖o‖). The second term makes planes leaving
/// the scan ball approach ∞ continuously.
pub fn fiber_gauge(rho: f64, offset: &[f64]) -> f64 {
    let r = norm(offset);
    (1.0 / (1.0 + r)).min((rho - r).max(0.0))
}

/// Weighted sup over the grid of w(p)·d̂(s(p), s′(p)), with w(p) = 1/(1 + ‖p‖) and
/// d̂ the compactified fiber metric.
pub fn section_distance(s: &ScanSection, t: &ScanSection) -> Result<f64> {
    if s.grid != t.grid || s.rho != t.rho {
        return Err(Error::GridMismatch("sections live on different grids".into()));
    }
    let rho = s.rho;
    let gauge = move |o: &[f64]| fiber_gauge(rho, o);
    Ok(s.grid
        .par_iter()
        .zip(s.values.par_iter().zip(&t.values))
        .map(|(p, (a, b))| {
            if a == b {
                return 0.0;
            }
            compactified_distance_with(&a.compactified(), &b.compactified(), &gauge) / (1.0 + norm(p))
        })
        .reduce(|| 0.0, f64::max))
}

/// Pullback of [`section_distance`] along the scanning map.
pub fn scan_metric(a: &DiscretizedSubmanifold, b: &DiscretizedSubmanifold, grid: &GridSpec, rho: f64) -> Result<f64> {
    if !a.compatible(b) {
        return Err(Error::IncompatiblePlanes("dimension mismatch".into()));
    }
    section_distance(&scan_section(a, grid, rho)?, &scan_section(b, grid, rho)?)
}
