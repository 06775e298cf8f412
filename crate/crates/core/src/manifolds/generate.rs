use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DiscretizedSubmanifold, Sample};
use crate::error::{Error, Result};
use crate::geometry::{norm, GaussPoint, GrassPlane};

/// Analytic fixture descriptions.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    /// Equispaced circle in ℝ².
    Circle {
        radius: f64,
        center: [f64; 2],
        count: usize,
    },
    /// Round (n−1)-sphere about the origin of ℝⁿ. Fibonacci lattice for n = 3,
    /// seeded uniform placement for n ≥ 4, equispaced for n = 2.
    Sphere {
        ambient: usize,
        radius: f64,
        count: usize,
        seed: u64,
    },
    /// The part {basepoint + frame·t : ‖t‖ ≤ extent} of an affine d-plane.
    AffinePlane {
        ambient: usize,
        basepoint: Vec<f64>,
        plane: GrassPlane,
        extent: f64,
        count: usize,
        seed: u64,
    },
    /// Graph of a polynomial map over the d-disc of radius `extent`.
    ///
    /// For d = 1 there is one coefficient list per extra coordinate:
    /// x_{k+1} = Σ_j coefficients[k][j]·t^j, k = 1, …, n−1. For d = 2 (n = 3) the list
    /// is the quadratic [c, cₓ, c_y, cₓₓ, cₓ_y, c_yy].
    GraphOfFunction {
        ambient: usize,
        dim: usize,
        coefficients: Vec<Vec<f64>>,
        extent: f64,
        count: usize,
    },
    /// Torus of revolution in ℝ³ on a `counts.0 × counts.1` angle grid.
    Torus {
        major: f64,
        minor: f64,
        counts: (usize, usize),
    },
    Empty {
        ambient: usize,
        dim: usize,
    },
}

impl GeneratorSpec {
    /// Circle of the given radius about the origin.
    pub fn circle(radius: f64, count: usize) -> Self {
        GeneratorSpec::Circle {
            radius,
            center: [0.0, 0.0],
            count,
        }
    }

    /// The x-axis segment [−extent, extent] × {0} in ℝ².
    pub fn line(extent: f64, count: usize) -> Self {
        GeneratorSpec::AffinePlane {
            ambient: 2,
            basepoint: vec![0.0, 0.0],
            plane: GrassPlane::coordinate(2, 1).expect("valid coordinate line"),
            extent,
            count,
            seed: 0,
        }
    }
}

/// Builds the fixture described by `spec`, with exact positions and tangents, a
/// normal field and, where known, the injectivity radius of the normal exponential
/// map.
pub fn generate(spec: &GeneratorSpec) -> Result<DiscretizedSubmanifold> {
    match spec {
        GeneratorSpec::Circle { radius, center, count } => {
            positive(*radius, "radius")?;
            nonzero(*count)?;
            circle(*radius, center, *count)
        }
        GeneratorSpec::Sphere {
            ambient,
            radius,
            count,
            seed,
        } => {
            positive(*radius, "radius")?;
            nonzero(*count)?;
            if *ambient < 2 {
                return Err(Error::InvalidDimensions(format!("sphere in R^{ambient}")));
            }
            sphere(*ambient, *radius, *count, *seed)
        }
        GeneratorSpec::AffinePlane {
            ambient,
            basepoint,
            plane,
            extent,
            count,
            seed,
        } => {
            positive(*extent, "extent")?;
            nonzero(*count)?;
            if basepoint.len() != *ambient || plane.ambient_dim() != *ambient || plane.plane_dim() >= *ambient {
                return Err(Error::InvalidDimensions("affine plane shape".into()));
            }
            affine_plane(basepoint, plane, *extent, *count, *seed)
        }
        GeneratorSpec::GraphOfFunction {
            ambient,
            dim,
            coefficients,
            extent,
            count,
        } => {
            positive(*extent, "extent")?;
            nonzero(*count)?;
            graph(*ambient, *dim, coefficients, *extent, *count)
        }
        GeneratorSpec::Torus { major, minor, counts } => {
            positive(*minor, "minor radius")?;
            if *major <= *minor {
                return Err(Error::InvalidParameter("torus needs major > minor".into()));
            }
            nonzero(counts.0)?;
            nonzero(counts.1)?;
            torus(*major, *minor, *counts)
        }
        GeneratorSpec::Empty { ambient, dim } => DiscretizedSubmanifold::empty(*ambient, *dim),
    }
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{what} must be positive, got {x}")))
    }
}

fn nonzero(count: usize) -> Result<()> {
    if count == 0 {
        Err(Error::NonpositiveCount("sample count must be positive".into()))
    } else {
        Ok(())
    }
}

fn build(
    n: usize,
    d: usize,
    rows: Vec<(Vec<f64>, GrassPlane, f64, Vec<f64>)>,
    injectivity: Option<f64>,
) -> Result<DiscretizedSubmanifold> {
    let mut samples = Vec::with_capacity(rows.len());
    let mut normals = Vec::with_capacity(rows.len());
    for (position, plane, weight, normal) in rows {
        samples.push(Sample {
            point: GaussPoint { position, plane },
            weight,
        });
        normals.push(normal);
    }
    let mut w = DiscretizedSubmanifold::new(n, d, samples)?.with_normals(normals)?;
    w.set_injectivity_radius(injectivity);
    Ok(w)
}

fn circle(radius: f64, center: &[f64; 2], count: usize) -> Result<DiscretizedSubmanifold> {
    let weight = 2.0 * PI * radius / count as f64;
    let rows = (0..count)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / count as f64;
            let (s, c) = t.sin_cos();
            let plane = GrassPlane::from_frame(DMatrix::from_column_slice(2, 1, &[-s, c]))?;
            Ok((
                vec![center[0] + radius * c, center[1] + radius * s],
                plane,
                weight,
                vec![c, s],
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    build(2, 1, rows, Some(radius))
}

/// Tangent hyperplane with unit normal `u`, built from the complement.
fn hyperplane(u: &[f64]) -> Result<GrassPlane> {
    let line = GrassPlane::span(&[u])?;
    GrassPlane::from_frame(line.orthonormal_complement())
}

fn sphere_area(n: usize, radius: f64) -> f64 {
    // |S^{n-1}| = 2π^{n/2}/Γ(n/2), with Γ evaluated by the half-integer recursion.
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(n as f64 / 2.0) / gamma * radius.powi(n as i32 - 1)
}

fn ball_volume(d: usize, radius: f64) -> f64 {
    sphere_area(d, 1.0) / d as f64 * radius.powi(d as i32)
}

fn sphere(n: usize, radius: f64, count: usize, seed: u64) -> Result<DiscretizedSubmanifold> {
    if n == 2 {
        return circle(radius, &[0.0, 0.0], count);
    }
    let weight = sphere_area(n, radius) / count as f64;
    let directions: Vec<Vec<f64>> = if n == 3 {
        let golden = PI * (3.0 - 5f64.sqrt());
        (0..count)
            .map(|k| {
                let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                let rho = (1.0 - z * z).max(0.0).sqrt();
                let (s, c) = (golden * k as f64).sin_cos();
                vec![rho * c, rho * s, z]
            })
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| loop {
                let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let r = norm(&v);
                if r > 1e-6 {
                    break v.into_iter().map(|x| x / r).collect();
                }
            })
            .collect()
    };
    let rows = directions
        .into_iter()
        .map(|u| {
            let plane = hyperplane(&u)?;
            Ok((u.iter().map(|x| radius * x).collect(), plane, weight, u))
        })
        .collect::<Result<Vec<_>>>()?;
    build(n, n - 1, rows, Some(radius))
}

/// Parameter points in the closed d-ball of radius `extent` with quadrature weights.
fn disc_quadrature(d: usize, extent: f64, count: usize, seed: u64) -> Vec<(Vec<f64>, f64)> {
    match d {
        0 => vec![(Vec::new(), 1.0)],
        1 => {
            if count == 1 {
                return vec![(vec![0.0], 2.0 * extent)];
            }
            let m = (count - 1) as f64;
            let h = 2.0 * extent / m;
            (0..count)
                .map(|i| {
                    let t = extent * (2.0 * i as f64 - m) / m;
                    let w = if i == 0 || i == count - 1 { h / 2.0 } else { h };
                    (vec![t], w)
                })
                .collect()
        }
        2 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            let w = PI * extent * extent / count as f64;
            (0..count)
                .map(|k| {
                    let r = extent * ((k as f64 + 0.5) / count as f64).sqrt();
                    let (s, c) = (golden * k as f64).sin_cos();
                    (vec![r * c, r * s], w)
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = ball_volume(d, extent) / count as f64;
            (0..count)
                .map(|_| loop {
                    let v: Vec<f64> = (0..d)
                        .map(|_| rand::Rng::gen_range(&mut rng, -extent..=extent))
                        .collect();
                    if norm(&v) <= extent {
                        break (v, w);
                    }
                })
                .collect()
        }
    }
}

fn affine_plane(
    basepoint: &[f64],
    plane: &GrassPlane,
    extent: f64,
    count: usize,
    seed: u64,
) -> Result<DiscretizedSubmanifold> {
    let n = plane.ambient_dim();
    let d = plane.plane_dim();
    let normal: Vec<f64> = plane.orthonormal_complement().column(0).iter().copied().collect();
    let rows = disc_quadrature(d, extent, count, seed)
        .into_iter()
        .map(|(t, w)| {
            let mut x = basepoint.to_vec();
            for (j, tj) in t.iter().enumerate() {
                for (xi, bi) in x.iter_mut().zip(plane.basis_vector(j)) {
                    *xi += tj * bi;
                }
            }
            (x, plane.clone(), w, normal.clone())
        })
        .collect();
    build(n, d, rows, Some(f64::INFINITY))
}

fn poly(c: &[f64], t: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut dv = 0.0;
    for &a in c.iter().rev() {
        dv = dv * t + v;
        v = v * t + a;
    }
    (v, dv)
}

fn graph(n: usize, d: usize, coefficients: &[Vec<f64>], extent: f64, count: usize) -> Result<DiscretizedSubmanifold> {
    match (d, n) {
        (1, n) if n >= 2 => {
            if coefficients.len() != n - 1 {
                return Err(Error::InvalidParameter(format!(
                    "graph in R^{n} needs {} coefficient lists",
                    n - 1
                )));
            }
            let rows = disc_quadrature(1, extent, count, 0)
                .into_iter()
                .map(|(t, w)| {
                    let t = t[0];
                    let mut x = vec![t];
                    let mut tangent = vec![1.0];
                    for c in coefficients {
                        let (v, dv) = poly(c, t);
                        x.push(v);
                        tangent.push(dv);
                    }
                    let speed = norm(&tangent);
                    let plane = GrassPlane::span(&[&tangent])?;
                    let mut e = vec![0.0; n];
                    e[n - 1] = 1.0;
                    let r = plane.reject(&e);
                    let rn = norm(&r);
                    Ok((x, plane, w * speed, r.into_iter().map(|v| v / rn).collect()))
                })
                .collect::<Result<Vec<_>>>()?;
            build(n, 1, rows, None)
        }
        (2, 3) => {
            let c = match coefficients {
                [c] if c.len() == 6 => c,
                _ => {
                    return Err(Error::InvalidParameter(
                        "surface graph needs one list of 6 quadratic coefficients".into(),
                    ))
                }
            };
            let rows = disc_quadrature(2, extent, count, 0)
                .into_iter()
                .map(|(t, w)| {
                    let (x, y) = (t[0], t[1]);
                    let z = c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y;
                    let fx = c[1] + 2.0 * c[3] * x + c[4] * y;
                    let fy = c[2] + c[4] * x + 2.0 * c[5] * y;
                    let plane = GrassPlane::span(&[&[1.0, 0.0, fx], &[0.0, 1.0, fy]])?;
                    let area = (1.0 + fx * fx + fy * fy).sqrt();
                    let normal = vec![-fx / area, -fy / area, 1.0 / area];
                    Ok((vec![x, y, z], plane, w * area, normal))
                })
                .collect::<Result<Vec<_>>>()?;
            build(3, 2, rows, None)
        }
        _ => Err(Error::InvalidDimensions(format!(
            "graphs are supported for d = 1 in R^n and d = 2 in R^3, not d = {d} in R^{n}"
        ))),
    }
}

fn torus(major: f64, minor: f64, (nu, nv): (usize, usize)) -> Result<DiscretizedSubmanifold> {
    let du = 2.0 * PI / nu as f64;
    let dv = 2.0 * PI / nv as f64;
    let mut rows = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let (su, cu) = (i as f64 * du).sin_cos();
        for j in 0..nv {
            let (sv, cv) = (j as f64 * dv).sin_cos();
            let rho = major + minor * cv;
            let frame = DMatrix::from_column_slice(3, 2, &[-su, cu, 0.0, -sv * cu, -sv * su, cv]);
            rows.push((
                vec![rho * cu, rho * su, minor * sv],
                GrassPlane::from_frame(frame)?,
                rho * minor * du * dv,
                vec![cv * cu, cv * su, sv],
            ));
        }
    }
    build(3, 2, rows, Some(minor))
}
