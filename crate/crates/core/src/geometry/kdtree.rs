//! Static kd-tree over points of ℝⁿ with exact pruning.
//!
//! Pruning compares `sqrt(diff²)` against the running bound, where `diff` is the
//! offset to the splitting plane. Floating-point rounding is monotone, so that value
//! never exceeds [`euclidean`] for any point behind the plane, and any cost function
//! bounded below by [`euclidean`] gets exactly the brute-force minimum.
//! Ties are broken by the lowest point index.

use super::euclidean;

#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    perm: Vec<usize>,
    axes: Vec<u8>,
}

struct Search {
    best: f64,
    best_idx: usize,
    stop_below: f64,
    done: bool,
}

impl KdTree {
    /// Builds the tree over `points`, all of length `dim`.
    pub fn new<'a, I>(dim: usize, points: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut coords = Vec::new();
        for p in points {
            debug_assert_eq!(p.len(), dim);
            coords.extend_from_slice(p);
        }
        let len = coords.len().checked_div(dim).unwrap_or(0);
        let mut tree = Self {
            dim,
            coords,
            perm: (0..len).collect(),
            axes: vec![0; len],
        };
        if dim > 0 {
            tree.build(0, len);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi - lo <= 1 {
            return;
        }
        let dim = self.dim;
        let mut axis = 0;
        let mut spread = -1.0;
        for k in 0..dim {
            let (mut mn, mut mx) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.perm[lo..hi] {
                let c = self.coords[i * dim + k];
                mn = mn.min(c);
                mx = mx.max(c);
            }
            if mx - mn > spread {
                spread = mx - mn;
                axis = k;
            }
        }
        let mid = (lo + hi) / 2;
        let coords = &self.coords;
        self.perm[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
            coords[a * dim + axis]
                .total_cmp(&coords[b * dim + axis])
                .then(a.cmp(&b))
        });
        self.axes[mid] = axis as u8;
        self.build(lo, mid);
        self.build(mid + 1, hi);
    }

    /// Minimizes `cost(i)` over all points, where `cost(i) >= euclidean(query, point(i))`.
    ///
    /// Only costs not above `bound` are reported. The search stops early, returning
    /// the first candidate found, once some cost falls strictly below `stop_below`.
    pub fn nearest_by<F>(&self, query: &[f64], bound: f64, stop_below: f64, mut cost: F) -> Option<(usize, f64)>
    where
        F: FnMut(usize) -> f64,
    {
        let mut state = Search {
            best: bound,
            best_idx: usize::MAX,
            stop_below,
            done: false,
        };
        self.search(0, self.len(), query, &mut state, &mut cost);
        (state.best_idx != usize::MAX).then_some((state.best_idx, state.best))
    }

    fn search<F>(&self, lo: usize, hi: usize, q: &[f64], st: &mut Search, cost: &mut F)
    where
        F: FnMut(usize) -> f64,
    {
        if lo >= hi || st.done {
            return;
        }
        let mid = (lo + hi) / 2;
        let i = self.perm[mid];
        let axis = self.axes[mid] as usize;
        let c = cost(i);
        if c < st.best || (c == st.best && i < st.best_idx) {
            st.best = c;
            st.best_idx = i;
            if c < st.stop_below {
                st.done = true;
                return;
            }
        }
        let diff = q[axis] - self.coords[i * self.dim + axis];
        let (near, far) = if diff <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(near.0, near.1, q, st, cost);
        if st.done {
            return;
        }
        if (diff * diff).sqrt() <= st.best {
            self.search(far.0, far.1, q, st, cost);
        }
    }

    /// Nearest point in Euclidean distance (lowest index on ties).
    pub fn nearest(&self, query: &[f64]) -> Option<(usize, f64)> {
        self.nearest_by(query, f64::INFINITY, f64::NEG_INFINITY, |i| {
            euclidean(query, self.point(i))
        })
    }

    /// Nearest point among those accepted by `keep`.
    pub fn nearest_filtered<P>(&self, query: &[f64], mut keep: P) -> Option<(usize, f64)>
    where
        P: FnMut(usize) -> bool,
    {
        self.nearest_by(query, f64::INFINITY, f64::NEG_INFINITY, |i| {
            if keep(i) {
                euclidean(query, self.point(i))
            } else {
                f64::INFINITY
            }
        })
    }

    /// Indices of all points with `euclidean(query, p) <= radius`, ascending.
    pub fn within_radius(&self, query: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_radius(0, self.len(), query, radius, &mut out);
        out.sort_unstable();
        out
    }

    fn collect_radius(&self, lo: usize, hi: usize, q: &[f64], r: f64, out: &mut Vec<usize>) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let i = self.perm[mid];
        let axis = self.axes[mid] as usize;
        if euclidean(q, self.point(i)) <= r {
            out.push(i);
        }
        let diff = q[axis] - self.coords[i * self.dim + axis];
        let (near, far) = if diff <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.collect_radius(near.0, near.1, q, r, out);
        if (diff * diff).sqrt() <= r {
            self.collect_radius(far.0, far.1, q, r, out);
        }
    }

    /// The `k` nearest points sorted by (distance, index).
    pub fn k_nearest(&self, query: &[f64], k: usize) -> Vec<(usize, f64)> {
        let mut heap: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k > 0 {
            self.collect_knn(0, self.len(), query, k, &mut heap);
        }
        heap.into_iter().map(|(d, i)| (i, d)).collect()
    }

    // `found` is kept sorted by (distance, index); k is small.
    fn collect_knn(&self, lo: usize, hi: usize, q: &[f64], k: usize, found: &mut Vec<(f64, usize)>) {
        if lo >= hi {
            return;
        }
        let mid = (lo + hi) / 2;
        let i = self.perm[mid];
        let axis = self.axes[mid] as usize;
        let d = euclidean(q, self.point(i));
        let key = (d, i);
        let pos = found.partition_point(|e| (e.0, e.1) < key);
        if pos < k {
            found.insert(pos, key);
            found.truncate(k);
        }
        let diff = q[axis] - self.coords[i * self.dim + axis];
        let (near, far) = if diff <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.collect_knn(near.0, near.1, q, k, found);
        let worst = if found.len() < k { f64::INFINITY } else { found[k - 1].0 };
        if (diff * diff).sqrt() <= worst {
            self.collect_knn(far.0, far.1, q, k, found);
        }
    }
}
