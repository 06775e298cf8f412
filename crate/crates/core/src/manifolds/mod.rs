//! Weighted, tangent-framed point samples of proper submanifolds, together with
//! fixture generators, normal perturbations, mesh ingestion, truncation to balls and
//! the MFD text format.

pub mod fixtures;
mod generate;
mod mesh;
mod mfd;
mod perturb;
mod region;

pub use generate::{generate, GeneratorSpec};
pub use mesh::{ingest_mesh, parse_mesh};
pub use mfd::{load, load_labeled, parse_mfd, read_mfd, save, save_labeled, write_mfd};
pub use perturb::{parallel_copies, perturb_normal, BumpMode};
pub use region::{CompactRegion, Domain};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::kdtree::KdTree;
use crate::geometry::{norm, GaussPoint, GrassPlane};

/// One sample: a Gauss point (x, TₓW) and the local d-volume element it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub point: GaussPoint,
    pub weight: f64,
}

impl Sample {
    pub fn position(&self) -> &[f64] {
        &self.point.position
    }

    pub fn tangent(&self) -> &GrassPlane {
        &self.point.plane
    }
}

/// A finite proxy for a proper d-submanifold W of an open U ⊆ ℝⁿ.
///
/// Generator-backed manifolds also carry a unit normal field and an injectivity
/// radius, which is what [`perturb_normal`] and [`parallel_copies`] act on.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedSubmanifold {
    ambient_dim: usize,
    intrinsic_dim: usize,
    samples: Vec<Sample>,
    resolution: f64,
    domain: Domain,
    normals: Option<Vec<Vec<f64>>>,
    injectivity_radius: Option<f64>,
}

impl DiscretizedSubmanifold {
    /// Validates the samples and computes the resolution.
    pub fn new(ambient_dim: usize, intrinsic_dim: usize, samples: Vec<Sample>) -> Result<Self> {
        if ambient_dim == 0 || intrinsic_dim >= ambient_dim {
            return Err(Error::InvalidDimensions(format!(
                "{intrinsic_dim}-manifold in R^{ambient_dim}"
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if s.point.position.len() != ambient_dim
                || s.point.plane.ambient_dim() != ambient_dim
                || s.point.plane.plane_dim() != intrinsic_dim
            {
                return Err(Error::InvalidDimensions(format!("sample {i} has the wrong shape")));
            }
            if !(s.weight.is_finite() && s.weight >= 0.0) {
                return Err(Error::InvalidParameter(format!("sample {i} has weight {}", s.weight)));
            }
            if s.point.position.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter(format!("sample {i} has a non-finite position")));
            }
        }
        let resolution = resolution_of(ambient_dim, &samples);
        Ok(Self {
            ambient_dim,
            intrinsic_dim,
            samples,
            resolution,
            domain: Domain::Everywhere,
            normals: None,
            injectivity_radius: None,
        })
    }

    /// The empty d-manifold in ℝⁿ.
    pub fn empty(ambient_dim: usize, intrinsic_dim: usize) -> Result<Self> {
        Self::new(ambient_dim, intrinsic_dim, Vec::new())
    }

    /// Attaches a unit normal field (one vector per sample).
    pub fn with_normals(mut self, normals: Vec<Vec<f64>>) -> Result<Self> {
        if normals.len() != self.samples.len() || normals.iter().any(|v| v.len() != self.ambient_dim) {
            return Err(Error::InvalidDimensions("normal field shape".into()));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_injectivity_radius(mut self, radius: f64) -> Self {
        self.injectivity_radius = Some(radius);
        self
    }

    pub fn with_domain(mut self, domain: Domain) -> Result<Self> {
        if let Some(i) = self.samples.iter().position(|s| !domain.contains(s.position())) {
            return Err(Error::InvalidRegion(format!("sample {i} lies outside the domain")));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Largest nearest-neighbour distance between samples (0 with fewer than two).
    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn normals(&self) -> Option<&[Vec<f64>]> {
        self.normals.as_deref()
    }

    pub fn injectivity_radius(&self) -> Option<f64> {
        self.injectivity_radius
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().fold(0.0, |acc, s| acc + s.weight)
    }

    pub fn max_norm(&self) -> f64 {
        self.samples.iter().map(|s| norm(s.position())).fold(0.0, f64::max)
    }

    /// Kd-tree over sample positions, indexed like [`samples`](Self::samples).
    pub fn index(&self) -> KdTree {
        KdTree::new(self.ambient_dim, self.samples.iter().map(|s| s.position()))
    }

    /// Same dimensions (n, d).
    pub fn compatible(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim && self.intrinsic_dim == other.intrinsic_dim
    }

    /// Image under an orthogonal matrix: positions, frames and normals are rotated,
    /// weights kept.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Result<Self> {
        let n = self.ambient_dim;
        if rotation.shape() != (n, n) {
            return Err(Error::InvalidDimensions("rotation shape".into()));
        }
        let apply = |v: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let mut s = 0.0;
                    for (j, vj) in v.iter().enumerate() {
                        s += rotation[(i, j)] * vj;
                    }
                    s
                })
                .collect()
        };
        let samples = self
            .samples
            .iter()
            .map(|s| Sample {
                point: GaussPoint {
                    position: apply(s.position()),
                    plane: s.tangent().rotated(rotation),
                },
                weight: s.weight,
            })
            .collect();
        let mut out = Self::new(n, self.intrinsic_dim, samples)?;
        out.normals = self.normals.as_ref().map(|ns| ns.iter().map(|v| apply(v)).collect());
        out.injectivity_radius = self.injectivity_radius;
        Ok(out)
    }

    /// Image under an invertible linear map. Frames are re-orthonormalized and
    /// weights scaled by the d-dimensional Jacobian sqrt(det((A·T)ᵀ(A·T))).
    pub fn linear_image(&self, linear: &DMatrix<f64>) -> Result<Self> {
        let n = self.ambient_dim;
        if linear.shape() != (n, n) {
            return Err(Error::InvalidDimensions("linear map shape".into()));
        }
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let x = nalgebra::DVector::from_column_slice(s.position());
                let image = linear * s.tangent().frame();
                let jac = (image.transpose() * &image).determinant().max(0.0).sqrt();
                Ok(Sample {
                    point: GaussPoint {
                        position: (linear * x).as_slice().to_vec(),
                        plane: GrassPlane::from_spanning(image)?,
                    },
                    weight: s.weight * jac,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, self.intrinsic_dim, samples)
    }

    /// Disjoint union of samples. Normal fields survive when both sides have one;
    /// the injectivity radius is dropped.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if !self.compatible(other) {
            return Err(Error::InvalidDimensions(
                "union of manifolds of different dimensions".into(),
            ));
        }
        let mut samples = self.samples.clone();
        samples.extend(other.samples.iter().cloned());
        let mut out = Self::new(self.ambient_dim, self.intrinsic_dim, samples)?;
        if let (Some(a), Some(b)) = (&self.normals, &other.normals) {
            out.normals = Some(a.iter().chain(b).cloned().collect());
        }
        Ok(out)
    }

    /// Keeps the samples for which `keep` holds (normals follow).
    pub fn filtered<F: FnMut(&Sample) -> bool>(&self, mut keep: F) -> Self {
        let mask: Vec<bool> = self.samples.iter().map(&mut keep).collect();
        let samples: Vec<Sample> = self
            .samples
            .iter()
            .zip(&mask)
            .filter(|(_, &k)| k)
            .map(|(s, _)| s.clone())
            .collect();
        let resolution = resolution_of(self.ambient_dim, &samples);
        Self {
            ambient_dim: self.ambient_dim,
            intrinsic_dim: self.intrinsic_dim,
            samples,
            resolution,
            domain: self.domain.clone(),
            normals: self.normals.as_ref().map(|ns| {
                ns.iter()
                    .zip(&mask)
                    .filter(|(_, &k)| k)
                    .map(|(v, _)| v.clone())
                    .collect()
            }),
            injectivity_radius: self.injectivity_radius,
        }
    }

    pub(crate) fn set_injectivity_radius(&mut self, radius: Option<f64>) {
        self.injectivity_radius = radius;
    }

    pub(crate) fn set_domain_unchecked(&mut self, domain: Domain) {
        self.domain = domain;
    }
}

fn resolution_of(dim: usize, samples: &[Sample]) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let tree = KdTree::new(dim, samples.iter().map(|s| s.position()));
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| tree.nearest_filtered(s.position(), |j| j != i).map_or(0.0, |(_, d)| d))
        .fold(0.0, f64::max)
}

/// A submanifold with one real label per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSubmanifold {
    base: DiscretizedSubmanifold,
    labels: Vec<f64>,
}

impl LabeledSubmanifold {
    pub fn new(base: DiscretizedSubmanifold, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != base.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} samples",
                labels.len(),
                base.len()
            )));
        }
        Ok(Self { base, labels })
    }

    pub fn base(&self) -> &DiscretizedSubmanifold {
        &self.base
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }
}

/// Truncation rule for W_r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncationMode {
    /// ‖x‖ ≤ r.
    #[default]
    OriginBall,
    /// max(‖x‖, 1/dist(x, ℝⁿ ∖ U)) ≤ r.
    DomainAware,
}

/// Relative slack on the truncation key so that samples lying on a sphere of radius
/// r up to rounding are kept by `restrict_to_radius(W, r)`.
pub const RADIUS_SLACK: f64 = 1e-12;

/// Truncation key of a position under `mode`.
pub fn truncation_key(domain: &Domain, mode: TruncationMode, x: &[f64]) -> f64 {
    match mode {
        TruncationMode::OriginBall => norm(x),
        TruncationMode::DomainAware => domain.exhaustion(x),
    }
}

/// Indices of samples in W_r (ascending) and their total weight, summed in index
/// order.
pub fn restrict_to_radius(w: &DiscretizedSubmanifold, r: f64, mode: TruncationMode) -> (Vec<usize>, f64) {
    let mut kept = Vec::new();
    let mut volume = 0.0;
    for (i, s) in w.samples.iter().enumerate() {
        if within(truncation_key(&w.domain, mode, s.position()), r) {
            kept.push(i);
            volume += s.weight;
        }
    }
    (kept, volume)
}

#[inline]
pub fn within(key: f64, r: f64) -> bool {
    key <= r * (1.0 + RADIUS_SLACK)
}
