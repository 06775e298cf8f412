use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{euclidean, grassmann_distance, GaussPoint};
use crate::manifolds::{CompactRegion, DiscretizedSubmanifold};

/// Angles this close to π/2 count as orthogonal tangents.
pub const RIGHT_ANGLE_SLACK: f64 = 1e-12;

/// Size of the normal section and of its tangential derivative at a paired
/// sample: (‖x − y‖, tan d₁(TₓW, T_yW′)). The slope is `+∞` for orthogonal planes.
pub fn displacement(x: &GaussPoint, y: &GaussPoint) -> Result<(f64, f64)> {
    if x.position.len() != y.position.len() {
        return Err(Error::IncompatiblePlanes(format!(
            "points in R^{} and R^{}",
            x.position.len(),
            y.position.len()
        )));
    }
    let angle = grassmann_distance(&x.plane, &y.plane)?;
    let slope = if angle >= FRAC_PI_2 - RIGHT_ANGLE_SLACK {
        f64::INFINITY
    } else {
        angle.tan()
    };
    Ok((euclidean(&x.position, &y.position), slope))
}

/// A W′ sample paired with its nearest W sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    /// Index into W′.
    pub source: usize,
    /// Index into W.
    pub target: usize,
    pub norm: f64,
    pub slope: f64,
}

/// Nearest-point projection of W′ onto W near a compact region K.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetDecomposition {
    pub tube_radius: f64,
    /// Sorted by `source`.
    pub pairs: Vec<Pair>,
    /// Number of paired W′ samples per W sample.
    pub sheet_count: Vec<usize>,
    /// Every W sample in K has a preimage.
    pub coverage_ok: bool,
    /// The sheet count is constant on each connected component of W ∩ K.
    pub local_diffeo_ok: bool,
    /// W′ samples in K with no W sample within the tube radius.
    pub orphans: Vec<usize>,
    /// Samples of W lying in K.
    pub base_in_k: Vec<usize>,
    /// Linking scale of the adjacency graph on W ∩ K.
    pub link_scale: f64,
}

impl SheetDecomposition {
    /// The common sheet count on W ∩ K, if there is one.
    pub fn constant_sheet_count(&self) -> Option<usize> {
        let mut counts = self.base_in_k.iter().map(|&i| self.sheet_count[i]);
        let first = counts.next()?;
        counts.all(|c| c == first).then_some(first)
    }

    /// vol(W′ ∩ tube ∩ K) / vol(π(W′) ∩ K), which tracks the sheet count.
    pub fn volume_ratio(&self, w: &DiscretizedSubmanifold, w_prime: &DiscretizedSubmanifold, k: &CompactRegion) -> f64 {
        let upstairs: f64 = self
            .pairs
            .iter()
            .filter(|p| k.contains(w_prime.samples()[p.source].position()))
            .map(|p| w_prime.samples()[p.source].weight)
            .sum();
        let downstairs: f64 = self
            .base_in_k
            .iter()
            .filter(|&&i| self.sheet_count[i] > 0)
            .map(|&i| w.samples()[i].weight)
            .sum();
        upstairs / downstairs
    }
}

/// Pairs every W′ sample y with its nearest W sample x (lowest index on ties)
/// when ‖x − y‖ ≤ ρ and either y ∈ K or x lies within h of K, where h is the
/// resolution of W.
pub fn tubular_projection(
    w: &DiscretizedSubmanifold,
    w_prime: &DiscretizedSubmanifold,
    k: &CompactRegion,
    tube_radius: f64,
) -> Result<SheetDecomposition> {
    if !w.compatible(w_prime) {
        return Err(Error::IncompatiblePlanes("dimension mismatch".into()));
    }
    if k.dim() != w.ambient_dim() {
        return Err(Error::InvalidRegion(format!(
            "region in R^{} for manifolds in R^{}",
            k.dim(),
            w.ambient_dim()
        )));
    }
    if !(tube_radius > 0.0) {
        return Err(Error::InvalidParameter(format!("tube radius {tube_radius}")));
    }
    let h = w.resolution();
    let tree = w.index();

    enum Outcome {
        Paired(Pair),
        Orphan(usize),
        Ignored,
    }
    let outcomes: Vec<Outcome> = w_prime
        .samples()
        .par_iter()
        .enumerate()
        .map(|(j, y)| {
            let in_k = k.contains(y.position());
            match tree.nearest(y.position()) {
                Some((i, d)) if d <= tube_radius => {
                    let x = &w.samples()[i];
                    if in_k || k.contains_dilated(x.position(), h) {
                        let (norm, slope) = displacement(&x.point, &y.point).expect("compatible manifolds");
                        Outcome::Paired(Pair {
                            source: j,
                            target: i,
                            norm,
                            slope,
                        })
                    } else {
                        Outcome::Ignored
                    }
                }
                _ if in_k => Outcome::Orphan(j),
                _ => Outcome::Ignored,
            }
        })
        .collect();

    let mut pairs = Vec::new();
    let mut orphans = Vec::new();
    let mut sheet_count = vec![0usize; w.len()];
    for o in outcomes {
        match o {
            Outcome::Paired(p) => {
                sheet_count[p.target] += 1;
                pairs.push(p);
            }
            Outcome::Orphan(j) => orphans.push(j),
            Outcome::Ignored => {}
        }
    }

    let base_in_k: Vec<usize> = (0..w.len())
        .filter(|&i| k.contains(w.samples()[i].position()))
        .collect();
    let coverage_ok = base_in_k.iter().all(|&i| sheet_count[i] >= 1);

    let link_scale = 3.0 * h;
    let mut uf = UnionFind::new(w.len());
    for &i in &base_in_k {
        for j in tree.within_radius(w.samples()[i].position(), link_scale) {
            if j != i && k.contains(w.samples()[j].position()) {
                uf.union(i, j);
            }
        }
    }
    let mut component_count: std::collections::HashMap<usize, usize> = Default::default();
    let mut local_diffeo_ok = true;
    for &i in &base_in_k {
        let root = uf.find(i);
        let c = *component_count.entry(root).or_insert(sheet_count[i]);
        if c != sheet_count[i] {
            local_diffeo_ok = false;
        }
    }

    Ok(SheetDecomposition {
        tube_radius,
        pairs,
        sheet_count,
        coverage_ok,
        local_diffeo_ok,
        orphans,
        base_in_k,
        link_scale,
    })
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::GrassPlane;
    use crate::manifolds::{generate, parallel_copies, GeneratorSpec};

    fn gp(x: f64, y: f64, angle: f64) -> GaussPoint {
        GaussPoint::new(vec![x, y], GrassPlane::span(&[&[angle.cos(), angle.sin()]]).unwrap()).unwrap()
    }

    #[test]
    fn displacement_examples() {
        assert_eq!(
            displacement(&gp(1.0, 0.0, 0.0), &gp(1.0, 0.3, 0.0)).unwrap(),
            (0.3, 0.0)
        );
        let (n, s) = displacement(&gp(1.0, 0.0, 0.0), &gp(1.0, 0.0, 0.2)).unwrap();
        assert_eq!(n, 0.0);
        assert!((s - 0.2f64.tan()).abs() < 1e-15);
        let m: f64 = 0.1;
        let (n, s) = displacement(&gp(1.0, 0.0, 0.0), &gp(1.0, m, m.atan())).unwrap();
        assert!((n - 0.1).abs() < 1e-15 && (s - 0.1).abs() < 1e-15);
        let (_, s) = displacement(&gp(0.0, 0.0, 0.0), &gp(0.0, 0.0, FRAC_PI_2)).unwrap();
        assert_eq!(s, f64::INFINITY);
    }

    #[test]
    fn identity_projection() {
        let c = generate(&GeneratorSpec::circle(1.0, 128)).unwrap();
        let k = CompactRegion::ball(vec![0.0, 0.0], 2.0).unwrap();
        let sd = tubular_projection(&c, &c, &k, 0.1).unwrap();
        assert!(sd.pairs.iter().all(|p| p.source == p.target && p.norm == 0.0));
        assert!(sd.sheet_count.iter().all(|&c| c == 1));
        assert!(sd.coverage_ok && sd.local_diffeo_ok);
    }

    #[test]
    fn parallel_lines_have_two_sheets() {
        let line = generate(&GeneratorSpec::line(3.0, 301)).unwrap();
        let two = parallel_copies(&line, 0.1).unwrap();
        let k = CompactRegion::cube(2, 1.0).unwrap();
        let sd = tubular_projection(&line, &two, &k, 0.5).unwrap();
        assert_eq!(sd.constant_sheet_count(), Some(2));
        assert!(sd.local_diffeo_ok && sd.coverage_ok);
        assert!((sd.volume_ratio(&line, &two, &k) - 2.0).abs() < 0.1);
    }

    #[test]
    fn half_arc_does_not_cover() {
        let c = generate(&GeneratorSpec::circle(1.0, 128)).unwrap();
        let arc = c.filtered(|s| s.position()[1] >= 0.0);
        let k = CompactRegion::ball(vec![0.0, 0.0], 2.0).unwrap();
        let sd = tubular_projection(&c, &arc, &k, 0.1).unwrap();
        assert!(!sd.coverage_ok);
        assert!(!sd.local_diffeo_ok);
    }

    #[test]
    fn empty_base_leaves_orphans() {
        let e = DiscretizedSubmanifold::empty(2, 1).unwrap();
        let c = generate(&GeneratorSpec::circle(1.0, 16)).unwrap();
        let k = CompactRegion::ball(vec![0.0, 0.0], 2.0).unwrap();
        let sd = tubular_projection(&e, &c, &k, 0.1).unwrap();
        assert!(sd.coverage_ok);
        assert_eq!(sd.orphans.len(), 16);
    }
}
