use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{DiscretizedSubmanifold, Sample};
use crate::error::{Error, Result};
use crate::geometry::{euclidean, norm, GaussPoint, GrassPlane};

/// Profile φ of the normal section x ↦ δ·φ(x)·ν(x).
#[derive(Debug, Clone, PartialEq, Default)]
pub enum BumpMode {
    /// φ ≡ 1.
    #[default]
    ConstantShift,
    /// φ(x) = exp(−‖x − center‖² / width²).
    SmoothBump { center: Vec<f64>, width: f64 },
}

impl BumpMode {
    fn profile(&self, x: &[f64]) -> f64 {
        match self {
            BumpMode::ConstantShift => 1.0,
            BumpMode::SmoothBump { center, width } => {
                let r = euclidean(x, center) / width;
                (-r * r).exp()
            }
        }
    }
}

/// Image of W under the normal section x ↦ δ·φ(x)·ν(x).
///
/// Tangent planes of a constant shift are kept when W is a hypersurface or an affine
/// plane, where they are unchanged analytically. Otherwise tangents, and in all
/// non-affine cases the weights, come from a least-squares fit of the displaced
/// neighbour offsets against the original tangent coordinates.
pub fn perturb_normal(w: &DiscretizedSubmanifold, delta: f64, mode: &BumpMode) -> Result<DiscretizedSubmanifold> {
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::InvalidParameter(format!("amplitude must be >= 0, got {delta}")));
    }
    if let BumpMode::SmoothBump { center, width } = mode {
        if center.len() != w.ambient_dim() || !(*width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter("bump center/width".into()));
        }
    }
    if delta == 0.0 {
        return Ok(w.clone());
    }
    shifted(w, delta, mode)
}

/// The disjoint union of the +δ and −δ constant normal shifts of W.
pub fn parallel_copies(w: &DiscretizedSubmanifold, delta: f64) -> Result<DiscretizedSubmanifold> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidParameter(format!("copy offset must be > 0, got {delta}")));
    }
    let plus = shifted(w, delta, &BumpMode::ConstantShift)?;
    let minus = shifted(w, -delta, &BumpMode::ConstantShift)?;
    let mut out = plus.union(&minus)?;
    out.set_injectivity_radius(Some(match w.injectivity_radius() {
        Some(r) => (r - delta).min(delta),
        None => delta,
    }));
    out.set_domain_unchecked(w.domain().clone());
    Ok(out)
}

/// Normal field of W: the generator's, or for hypersurfaces the unit normal
/// oriented away from the origin (positive last nonzero coordinate when x ⟂ ν).
pub fn normal_field(w: &DiscretizedSubmanifold) -> Result<Vec<Vec<f64>>> {
    if let Some(ns) = w.normals() {
        return Ok(ns.to_vec());
    }
    if w.ambient_dim() != w.intrinsic_dim() + 1 {
        return Err(Error::NoNormalField(format!(
            "codimension {} manifold without a generator normal field",
            w.ambient_dim() - w.intrinsic_dim()
        )));
    }
    Ok(w.samples()
        .iter()
        .map(|s| {
            let c = s.tangent().orthonormal_complement();
            let mut v: Vec<f64> = c.column(0).iter().copied().collect();
            let x = s.position();
            let dot: f64 = v.iter().zip(x).map(|(a, b)| a * b).sum();
            let flip = if dot.abs() > 1e-9 * norm(x) {
                dot < 0.0
            } else {
                v.iter().rev().find(|c| c.abs() > 1e-12).is_some_and(|&c| c < 0.0)
            };
            if flip {
                v.iter_mut().for_each(|c| *c = -*c);
            }
            v
        })
        .collect())
}

fn is_affine(w: &DiscretizedSubmanifold) -> bool {
    match w.samples().first() {
        None => true,
        Some(first) => w.samples().iter().all(|s| s.tangent() == first.tangent()),
    }
}

pub(crate) fn shifted(w: &DiscretizedSubmanifold, delta: f64, mode: &BumpMode) -> Result<DiscretizedSubmanifold> {
    if let Some(r) = w.injectivity_radius() {
        if delta.abs() >= r {
            return Err(Error::ExceedsTube {
                delta: delta.abs(),
                radius: r,
            });
        }
    }
    let n = w.ambient_dim();
    let d = w.intrinsic_dim();
    let normals = normal_field(w)?;
    let samples = w.samples();
    let moved: Vec<Vec<f64>> = samples
        .iter()
        .zip(&normals)
        .map(|(s, nu)| {
            let a = delta * mode.profile(s.position());
            s.position().iter().zip(nu).map(|(x, v)| x + a * v).collect()
        })
        .collect();

    let constant = matches!(mode, BumpMode::ConstantShift);
    let affine = is_affine(w);
    let keep_tangent = d == 0 || (constant && (affine || n == d + 1));
    let keep_weight = d == 0 || (constant && affine);

    let tree = w.index();
    let k = 2 * d + 2;
    let updated: Vec<(GrassPlane, f64, Vec<f64>)> = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let s = &samples[i];
            if keep_tangent && keep_weight {
                return Ok((s.tangent().clone(), s.weight, normals[i].clone()));
            }
            let neighbours: Vec<usize> = tree
                .k_nearest(s.position(), k + 1)
                .into_iter()
                .map(|(j, _)| j)
                .filter(|&j| j != i)
                .take(k)
                .collect();
            let fit = local_jacobian(s, &neighbours, samples, &moved, i);
            let (plane, ratio) = match fit {
                Some((j, j0)) => {
                    let vol = gram_volume(&j);
                    let vol0 = gram_volume(&j0);
                    let plane = if keep_tangent {
                        s.tangent().clone()
                    } else {
                        GrassPlane::from_spanning(j).unwrap_or_else(|_| s.tangent().clone())
                    };
                    let ratio = if keep_weight || vol0 <= 0.0 { 1.0 } else { vol / vol0 };
                    (plane, ratio)
                }
                None => (s.tangent().clone(), 1.0),
            };
            let nu = if keep_tangent {
                normals[i].clone()
            } else {
                let r = plane.reject(&normals[i]);
                let rn = norm(&r);
                if rn > 0.0 {
                    r.into_iter().map(|c| c / rn).collect()
                } else {
                    normals[i].clone()
                }
            };
            Ok((plane, s.weight * ratio, nu))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut new_samples = Vec::with_capacity(samples.len());
    let mut new_normals = Vec::with_capacity(samples.len());
    for (position, (plane, weight, nu)) in moved.into_iter().zip(updated) {
        new_samples.push(Sample {
            point: GaussPoint { position, plane },
            weight,
        });
        new_normals.push(nu);
    }
    let mut out = DiscretizedSubmanifold::new(n, d, new_samples)?.with_normals(new_normals)?;
    out.set_injectivity_radius(w.injectivity_radius().map(|r| r - delta.abs()));
    out.set_domain_unchecked(w.domain().clone());
    Ok(out)
}

/// Least-squares Jacobians (displaced and original) of the neighbour offsets with
/// respect to tangent coordinates at sample `i`.
fn local_jacobian(
    s: &Sample,
    neighbours: &[usize],
    samples: &[Sample],
    moved: &[Vec<f64>],
    i: usize,
) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
    let n = s.position().len();
    let t = s.tangent().frame();
    let d = t.ncols();
    let m = neighbours.len();
    if m < d {
        return None;
    }
    let mut a = DMatrix::zeros(d, m);
    let mut b = DMatrix::zeros(n, m);
    let mut b0 = DMatrix::zeros(n, m);
    for (col, &j) in neighbours.iter().enumerate() {
        for r in 0..n {
            b0[(r, col)] = samples[j].position()[r] - s.position()[r];
            b[(r, col)] = moved[j][r] - moved[i][r];
        }
    }
    a.gemm(1.0, &t.transpose(), &b0, 0.0);
    let gram = &a * a.transpose();
    let inv = gram.try_inverse()?;
    let pseudo = a.transpose() * inv;
    Some((&b * &pseudo, &b0 * &pseudo))
}

fn gram_volume(j: &DMatrix<f64>) -> f64 {
    (j.transpose() * j).determinant().max(0.0).sqrt()
}
