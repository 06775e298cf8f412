//! Linear d-planes in ℝⁿ and the largest-principal-angle distance between them.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Orthonormality tolerance for frames handed to [`GrassPlane::from_frame`].
pub const FRAME_TOLERANCE: f64 = 1e-9;

/// A point of Gr_d(ℝⁿ), stored as an n×d matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassPlane {
    frame: DMatrix<f64>,
}

impl GrassPlane {
    /// Wraps an orthonormal frame. Fails when `frameᵀ·frame` is not the identity to
    /// [`FRAME_TOLERANCE`].
    pub fn from_frame(frame: DMatrix<f64>) -> Result<Self> {
        if frame.ncols() > frame.nrows() || frame.nrows() == 0 {
            return Err(Error::InvalidDimensions(format!(
                "frame of shape {}x{}",
                frame.nrows(),
                frame.ncols()
            )));
        }
        let deviation = orthonormality_defect(&frame);
        if deviation > FRAME_TOLERANCE {
            return Err(Error::FrameNotOrthonormal { deviation });
        }
        Ok(Self { frame })
    }

    /// Orthonormalizes the columns of `vectors` (modified Gram–Schmidt, two passes).
    pub fn from_spanning(vectors: DMatrix<f64>) -> Result<Self> {
        let (n, d) = vectors.shape();
        if d > n || n == 0 {
            return Err(Error::InvalidDimensions(format!("{d} vectors in R^{n}")));
        }
        let scale = vectors
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let mut frame = vectors;
        for j in 0..d {
            for _ in 0..2 {
                for k in 0..j {
                    let dot = frame.column(j).dot(&frame.column(k));
                    let basis = frame.column(k).clone_owned();
                    frame.column_mut(j).axpy(-dot, &basis, 1.0);
                }
            }
            let norm = frame.column(j).norm();
            if norm <= 1e-12 * scale {
                return Err(Error::InvalidDimensions(format!("spanning vectors have rank < {d}")));
            }
            frame.column_mut(j).unscale_mut(norm);
        }
        Ok(Self { frame })
    }

    /// Plane spanned by the given vectors (each of length n).
    pub fn span(vectors: &[&[f64]]) -> Result<Self> {
        let n = vectors.first().map_or(0, |v| v.len());
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidDimensions("ragged spanning set".into()));
        }
        let m = DMatrix::from_fn(n, vectors.len(), |i, j| vectors[j][i]);
        Self::from_spanning(m)
    }

    /// Span of the first `d` standard basis vectors of ℝⁿ.
    pub fn coordinate(ambient_dim: usize, plane_dim: usize) -> Result<Self> {
        if plane_dim > ambient_dim || ambient_dim == 0 {
            return Err(Error::InvalidDimensions(format!(
                "coordinate {plane_dim}-plane in R^{ambient_dim}"
            )));
        }
        Ok(Self {
            frame: DMatrix::from_fn(ambient_dim, plane_dim, |i, j| if i == j { 1.0 } else { 0.0 }),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn plane_dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Column `j` of the frame as a slice.
    pub fn basis_vector(&self, j: usize) -> &[f64] {
        let n = self.ambient_dim();
        &self.frame.as_slice()[j * n..(j + 1) * n]
    }

    /// Orthogonal projection of `v` onto the plane.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for j in 0..self.plane_dim() {
            let b = self.basis_vector(j);
            let c: f64 = b.iter().zip(v).map(|(x, y)| x * y).sum();
            for (o, x) in out.iter_mut().zip(b) {
                *o += c * x;
            }
        }
        out
    }

    /// Component of `v` orthogonal to the plane.
    pub fn reject(&self, v: &[f64]) -> Vec<f64> {
        let p = self.project(v);
        v.iter().zip(p).map(|(a, b)| a - b).collect()
    }

    /// Orthonormal basis (n×(n−d)) of the orthogonal complement, obtained by
    /// Gram–Schmidt of e₁,…,eₙ against the frame. Deterministic.
    pub fn orthonormal_complement(&self) -> DMatrix<f64> {
        let n = self.ambient_dim();
        let d = self.plane_dim();
        let mut basis: Vec<Vec<f64>> = (0..d).map(|j| self.basis_vector(j).to_vec()).collect();
        let mut extra = Vec::with_capacity(n - d);
        for i in 0..n {
            if basis.len() == n {
                break;
            }
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            for _ in 0..2 {
                for b in &basis {
                    let c: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= c * bi;
                    }
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 {
                v.iter_mut().for_each(|x| *x /= norm);
                basis.push(v.clone());
                extra.push(v);
            }
        }
        DMatrix::from_fn(n, extra.len(), |i, j| extra[j][i])
    }

    /// Image under a linear map (re-orthonormalized).
    pub fn mapped(&self, linear: &DMatrix<f64>) -> Result<Self> {
        if linear.ncols() != self.ambient_dim() || linear.nrows() != self.ambient_dim() {
            return Err(Error::InvalidDimensions("linear map shape".into()));
        }
        Self::from_spanning(linear * &self.frame)
    }

    /// Image under an orthogonal matrix; the frame stays orthonormal without
    /// re-orthonormalization.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Self {
        Self {
            frame: rotation * &self.frame,
        }
    }
}

/// max |frameᵀ·frame − I| entry-wise.
pub fn orthonormality_defect(frame: &DMatrix<f64>) -> f64 {
    let gram = frame.transpose() * frame;
    let mut worst = 0.0f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Largest principal angle between two planes of equal dimension, in [0, π/2].
///
/// The cosine of the angle is the smallest singular value of `Aᵀ·B`; its sine is
/// the largest singular value of the residual `A − B·Bᵀ·A`. Both are computed and
/// combined with `atan2`, which keeps small and near-right angles accurate.
pub fn grassmann_distance(a: &GrassPlane, b: &GrassPlane) -> Result<f64> {
    if a.ambient_dim() != b.ambient_dim() || a.plane_dim() != b.plane_dim() {
        return Err(Error::IncompatiblePlanes(format!(
            "Gr({}, R^{}) vs Gr({}, R^{})",
            a.plane_dim(),
            a.ambient_dim(),
            b.plane_dim(),
            b.ambient_dim()
        )));
    }
    Ok(principal_angle_unchecked(a, b))
}

pub(crate) fn principal_angle_unchecked(a: &GrassPlane, b: &GrassPlane) -> f64 {
    let n = a.ambient_dim();
    let d = a.plane_dim();
    if d == 0 || a.frame.as_slice() == b.frame.as_slice() {
        return 0.0;
    }
    if d == n {
        return 0.0;
    }
    // A fixed argument order makes the result exactly symmetric.
    let (a, b) = if frame_order(a, b).is_le() { (a, b) } else { (b, a) };
    let fa = a.frame.as_slice();
    let fb = b.frame.as_slice();
    match d {
        1 => line_angle(fa, fb),
        2 => plane_angle(n, fa, fb),
        _ => general_angle(&a.frame, &b.frame),
    }
}

fn frame_order(a: &GrassPlane, b: &GrassPlane) -> std::cmp::Ordering {
    a.frame
        .iter()
        .zip(b.frame.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn line_angle(u: &[f64], v: &[f64]) -> f64 {
    let cos: f64 = u.iter().zip(v).map(|(x, y)| x * y).sum::<f64>().abs();
    let mut wedge = 0.0;
    for i in 0..u.len() {
        for j in (i + 1)..u.len() {
            let w = u[i] * v[j] - u[j] * v[i];
            wedge += w * w;
        }
    }
    wedge.sqrt().atan2(cos).clamp(0.0, std::f64::consts::FRAC_PI_2)
}

fn plane_angle(n: usize, fa: &[f64], fb: &[f64]) -> f64 {
    let dot = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).map(|(p, q)| p * q).sum() };
    let (a0, a1) = (&fa[..n], &fa[n..2 * n]);
    let (b0, b1) = (&fb[..n], &fb[n..2 * n]);
    // m = Bᵀ A
    let m = [[dot(b0, a0), dot(b0, a1)], [dot(b1, a0), dot(b1, a1)]];
    // residual columns r_j = a_j − B m[:, j]
    let mut r0 = vec![0.0; n];
    let mut r1 = vec![0.0; n];
    for i in 0..n {
        r0[i] = a0[i] - (b0[i] * m[0][0] + b1[i] * m[1][0]);
        r1[i] = a1[i] - (b0[i] * m[0][1] + b1[i] * m[1][1]);
    }
    let rtr = [dot(&r0, &r0), dot(&r0, &r1), dot(&r1, &r1)];
    // mᵀ m
    let mtm = [
        m[0][0] * m[0][0] + m[1][0] * m[1][0],
        m[0][0] * m[0][1] + m[1][0] * m[1][1],
        m[0][1] * m[0][1] + m[1][1] * m[1][1],
    ];
    let sin2 = sym2_eigen(rtr).1;
    let cos2 = sym2_eigen(mtm).0;
    sin2.max(0.0)
        .sqrt()
        .atan2(cos2.max(0.0).sqrt())
        .clamp(0.0, std::f64::consts::FRAC_PI_2)
}

/// (λ_min, λ_max) of the symmetric matrix [[a, b], [b, c]] given as [a, b, c].
fn sym2_eigen([a, b, c]: [f64; 3]) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let radius = (0.5 * (a - c)).hypot(b);
    let max = mean + radius;
    let min = if max > 0.0 {
        ((a * c - b * b) / max).max(0.0)
    } else {
        0.0
    };
    (min.min(max), max)
}

fn general_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let m = b.transpose() * a;
    let residual = a - b * &m;
    let sin2 = SymmetricEigen::new(residual.transpose() * &residual).eigenvalues.max();
    let cos2 = SymmetricEigen::new(m.transpose() * &m).eigenvalues.min();
    sin2.max(0.0)
        .sqrt()
        .atan2(cos2.max(0.0).sqrt())
        .clamp(0.0, std::f64::consts::FRAC_PI_2)
}
