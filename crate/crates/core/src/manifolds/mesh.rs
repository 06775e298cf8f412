//! Polyline and triangle-mesh ingestion.
//!
//! The text format has up to three sections, each introduced by a header line with
//! a count, followed by that many rows:
//!
//! ```text
//! PTS 3        # vertices, one coordinate row each (the row length fixes n)
//! 0 0 0
//! 1 0 0
//! 0 1 0
//! EDG 1        # polyline segments as vertex index pairs (0-based)
//! 0 1
//! TRI 1        # triangles as vertex index triples (0-based)
//! 0 1 2
//! ```
//!
//! `#` starts a comment. A 1-manifold is read from `EDG`, a 2-manifold from `TRI`.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{DiscretizedSubmanifold, Sample};
use crate::error::{Error, Result};
use crate::geometry::{euclidean, GaussPoint, GrassPlane};

/// Reads a mesh file; see [`parse_mesh`].
pub fn ingest_mesh(path: impl AsRef<Path>, dim: usize) -> Result<DiscretizedSubmanifold> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text, dim)
}

/// One sample per vertex. The tangent is the top-`dim` principal subspace of the
/// vertex's closed 1-ring; the weight is half the incident edge length (polylines)
/// or a third of the incident triangle area (triangle meshes).
pub fn parse_mesh(text: &str, dim: usize) -> Result<DiscretizedSubmanifold> {
    if !(dim == 1 || dim == 2) {
        return Err(Error::InvalidDimensions(format!(
            "meshes carry 1- or 2-manifolds, not {dim}"
        )));
    }
    let mesh = Mesh::parse(text)?;
    let n = mesh.ambient;
    if n <= dim {
        return Err(Error::InvalidDimensions(format!("{dim}-mesh in R^{n}")));
    }
    let count = mesh.points.len();
    let mut weights = vec![0.0; count];
    let mut ring: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); count];
    let mut link = |a: usize, b: usize| {
        ring[a].insert(b);
        ring[b].insert(a);
    };
    if dim == 1 {
        for &[a, b] in &mesh.edges {
            let len = euclidean(&mesh.points[a], &mesh.points[b]);
            weights[a] += len / 2.0;
            weights[b] += len / 2.0;
            link(a, b);
        }
    } else {
        for &[a, b, c] in &mesh.triangles {
            let area = triangle_area(&mesh.points[a], &mesh.points[b], &mesh.points[c]);
            for v in [a, b, c] {
                weights[v] += area / 3.0;
            }
            link(a, b);
            link(b, c);
            link(c, a);
        }
    }

    let mut samples = Vec::with_capacity(count);
    for (v, neighbours) in ring.iter().enumerate() {
        let plane = pca_plane(&mesh.points, v, neighbours, dim)?;
        samples.push(Sample {
            point: GaussPoint {
                position: mesh.points[v].clone(),
                plane,
            },
            weight: weights[v],
        });
    }
    DiscretizedSubmanifold::new(n, dim, samples)
}

fn triangle_area(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    let u: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let v: Vec<f64> = c.iter().zip(a).map(|(x, y)| x - y).collect();
    let uu: f64 = u.iter().map(|x| x * x).sum();
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let uv: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
    0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
}

fn pca_plane(points: &[Vec<f64>], v: usize, ring: &BTreeSet<usize>, dim: usize) -> Result<GrassPlane> {
    let n = points[v].len();
    let members: Vec<&Vec<f64>> = std::iter::once(v)
        .chain(ring.iter().copied())
        .map(|i| &points[i])
        .collect();
    let m = members.len() as f64;
    let mut mean = vec![0.0; n];
    for p in &members {
        for (a, b) in mean.iter_mut().zip(p.iter()) {
            *a += b / m;
        }
    }
    let mut cov: DMatrix<f64> = DMatrix::zeros(n, n);
    for p in &members {
        for i in 0..n {
            for j in 0..n {
                cov[(i, j)] += (p[i] - mean[i]) * (p[j] - mean[j]);
            }
        }
    }
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let rank = order
        .iter()
        .filter(|&&k| eig.eigenvalues[k] > 1e-12 * top && eig.eigenvalues[k] > 0.0)
        .count();
    if rank < dim {
        return Err(Error::DegenerateNeighborhood { vertex: v, rank, dim });
    }
    let frame = DMatrix::from_fn(n, dim, |i, j| eig.eigenvectors[(i, order[j])]);
    GrassPlane::from_spanning(frame)
}

struct Mesh {
    ambient: usize,
    points: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
}

impl Mesh {
    fn parse(text: &str) -> Result<Self> {
        let mut mesh = Mesh {
            ambient: 0,
            points: Vec::new(),
            edges: Vec::new(),
            triangles: Vec::new(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut cells: Vec<(usize, Vec<usize>, usize)> = Vec::new();
        while let Some((lineno, header)) = lines.next() {
            let mut parts = header.split_whitespace();
            let tag = parts.next().unwrap_or("");
            let count: usize = parts
                .next()
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| parse_err(lineno, format!("expected `<SECTION> <count>`, got `{header}`")))?;
            for _ in 0..count {
                let (ln, row) = lines
                    .next()
                    .ok_or_else(|| parse_err(lineno, format!("section {tag} ends early")))?;
                match tag {
                    "PTS" => {
                        let p = row
                            .split_whitespace()
                            .map(|t| t.parse::<f64>().map_err(|e| parse_err(ln, e.to_string())))
                            .collect::<Result<Vec<_>>>()?;
                        if mesh.ambient == 0 {
                            mesh.ambient = p.len();
                        }
                        if p.len() != mesh.ambient || p.is_empty() {
                            return Err(parse_err(ln, "vertex has the wrong number of coordinates"));
                        }
                        mesh.points.push(p);
                    }
                    "EDG" | "TRI" => {
                        let idx = row
                            .split_whitespace()
                            .map(|t| t.parse::<usize>().map_err(|e| parse_err(ln, e.to_string())))
                            .collect::<Result<Vec<_>>>()?;
                        let arity = if tag == "EDG" { 2 } else { 3 };
                        if idx.len() != arity {
                            return Err(parse_err(ln, format!("{tag} rows have {arity} indices")));
                        }
                        cells.push((ln, idx, arity));
                    }
                    other => return Err(parse_err(lineno, format!("unknown section `{other}`"))),
                }
            }
        }
        for (ln, idx, arity) in cells {
            if let Some(&bad) = idx.iter().find(|&&i| i >= mesh.points.len()) {
                return Err(parse_err(ln, format!("vertex index {bad} out of range")));
            }
            if arity == 2 {
                mesh.edges.push([idx[0], idx[1]]);
            } else {
                mesh.triangles.push([idx[0], idx[1], idx[2]]);
            }
        }
        Ok(mesh)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::grassmann_distance;
    use std::f64::consts::PI;
    use std::fmt::Write;

    #[test]
    fn single_segment() {
        let w = parse_mesh("PTS 2\n0 0\n1 0\nEDG 1\n0 1\n", 1).unwrap();
        let e1 = GrassPlane::coordinate(2, 1).unwrap();
        for s in w.samples() {
            assert!(grassmann_distance(s.tangent(), &e1).unwrap() < 1e-12);
            assert_eq!(s.weight, 0.5);
        }
    }

    #[test]
    fn polygon_approximates_the_circle() {
        let m = 64;
        let mut text = format!("PTS {m}\n");
        for k in 0..m {
            let t = 2.0 * PI * k as f64 / m as f64;
            writeln!(text, "{} {}", t.cos(), t.sin()).unwrap();
        }
        writeln!(text, "EDG {m}").unwrap();
        for k in 0..m {
            writeln!(text, "{} {}", k, (k + 1) % m).unwrap();
        }
        let w = parse_mesh(&text, 1).unwrap();
        assert!((w.total_weight() - 2.0 * PI).abs() / (2.0 * PI) < 0.02);
        for (k, s) in w.samples().iter().enumerate() {
            let t = 2.0 * PI * k as f64 / m as f64;
            let analytic = GrassPlane::span(&[&[-t.sin(), t.cos()]]).unwrap();
            assert!(grassmann_distance(s.tangent(), &analytic).unwrap() < 0.1);
        }
    }

    #[test]
    fn flat_square() {
        let text = "# unit square in the plane z = 2x
PTS 4
0 0 0
1 0 2
1 1 2
0 1 0
TRI 2
0 1 2
0 2 3
";
        let w = parse_mesh(text, 2).unwrap();
        let plane = GrassPlane::span(&[&[1.0, 0.0, 2.0], &[0.0, 1.0, 0.0]]).unwrap();
        for s in w.samples() {
            assert!(grassmann_distance(s.tangent(), &plane).unwrap() < 1e-6);
        }
        assert!((w.total_weight() - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn isolated_vertex_is_degenerate() {
        let err = parse_mesh("PTS 3\n0 0\n1 0\n5 5\nEDG 1\n0 1\n", 1).unwrap_err();
        assert!(matches!(err, Error::DegenerateNeighborhood { vertex: 2, .. }), "{err}");
    }

    #[test]
    fn malformed_rows_report_the_line() {
        let err = parse_mesh("PTS 2\n0 0\n1 x\n", 1).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }
}
