//! Single-linkage agglomeration over the Euclidean minimum spanning tree with
//! a Gini-index guard on cluster sizes.
//!
//! Plain single linkage isolates outliers as singleton clusters. Here, once
//! the normalized Gini index of the current cluster sizes exceeds the
//! threshold, the next merge is forced to be the shortest remaining tree edge
//! touching one of the smallest clusters.

use std::collections::BTreeMap;

use crate::points::{coordinate_median, sq_dist, PointSet};

/// The full merge sequence for one data set; cutting it at any `k` is cheap.
#[derive(Debug, Clone)]
pub struct GenieTree {
    n: usize,
    /// Tree edges `(u, v)` in the order they are merged.
    merges: Vec<(usize, usize)>,
}

struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> (usize, usize, usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        debug_assert_ne!(ra, rb);
        let (big, small) = if self.size[ra] >= self.size[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        let (sa, sb) = (self.size[ra], self.size[rb]);
        self.parent[small] = big;
        self.size[big] += self.size[small];
        (sa, sb, self.size[big])
    }
}

/// Multiset of cluster sizes supporting the normalized Gini index.
struct SizeHistogram {
    counts: BTreeMap<usize, usize>,
    clusters: usize,
    total: usize,
}

impl SizeHistogram {
    fn singletons(n: usize) -> Self {
        let mut counts = BTreeMap::new();
        counts.insert(1, n);
        Self {
            counts,
            clusters: n,
            total: n,
        }
    }

    fn remove(&mut self, size: usize) {
        let c = self.counts.get_mut(&size).expect("size present");
        *c -= 1;
        if *c == 0 {
            self.counts.remove(&size);
        }
    }

    fn merge(&mut self, a: usize, b: usize, merged: usize) {
        self.remove(a);
        self.remove(b);
        *self.counts.entry(merged).or_insert(0) += 1;
        self.clusters -= 1;
    }

    fn smallest(&self) -> usize {
        *self.counts.keys().next().expect("nonempty")
    }

    /// `Σ_{i<j} |c_i − c_j| / ((K − 1) Σ c_i)`, in `[0, 1]`.
    fn gini(&self) -> f64 {
        if self.clusters <= 1 {
            return 0.0;
        }
        let mut before_count = 0.0;
        let mut before_sum = 0.0;
        let mut pairs = 0.0;
        for (&size, &count) in &self.counts {
            let (s, m) = (size as f64, count as f64);
            pairs += m * (s * before_count - before_sum);
            before_count += m;
            before_sum += m * s;
        }
        pairs / ((self.clusters - 1) as f64 * self.total as f64)
    }
}

/// Prim's algorithm on the implicit complete graph. Returns `(weight², u, v)`.
fn minimum_spanning_tree(points: &PointSet) -> Vec<(f64, usize, usize)> {
    let n = points.len();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n < 2 {
        return edges;
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let xc = points.row(current);
        let mut next = usize::MAX;
        let mut next_d = f64::INFINITY;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = sq_dist(xc, points.row(v));
            if d < best[v] {
                best[v] = d;
                parent[v] = current;
            }
            if best[v] < next_d || next == usize::MAX {
                next = v;
                next_d = best[v];
            }
        }
        in_tree[next] = true;
        edges.push((next_d, parent[next], next));
        current = next;
    }
    edges
}

impl GenieTree {
    pub fn build(points: &PointSet, gini_threshold: f64) -> Self {
        let n = points.len();
        let mut edges = minimum_spanning_tree(points);
        edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut sets = DisjointSets::new(n);
        let mut hist = SizeHistogram::singletons(n);
        let mut used = vec![false; edges.len()];
        let mut cursor = 0;
        let mut merges = Vec::with_capacity(edges.len());

        for _ in 0..edges.len() {
            let pick = if hist.gini() > gini_threshold {
                let smallest = hist.smallest();
                (0..edges.len()).find(|&e| {
                    if used[e] {
                        return false;
                    }
                    let (_, u, v) = edges[e];
                    let (ru, rv) = (sets.find(u), sets.find(v));
                    sets.size[ru] == smallest || sets.size[rv] == smallest
                })
            } else {
                None
            };
            let e = match pick {
                Some(e) => e,
                None => {
                    while used[cursor] {
                        cursor += 1;
                    }
                    cursor
                }
            };
            used[e] = true;
            let (_, u, v) = edges[e];
            let (a, b, merged) = sets.union(u, v);
            hist.merge(a, b, merged);
            merges.push((u, v));
        }
        Self { n, merges }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Cluster labels after stopping at `k` clusters, numbered by the
    /// smallest point index they contain.
    pub fn labels(&self, k: usize) -> Vec<usize> {
        assert!(k >= 1 && k <= self.n, "k out of range");
        let mut sets = DisjointSets::new(self.n);
        for &(u, v) in &self.merges[..self.n - k] {
            sets.union(u, v);
        }
        let mut id = vec![usize::MAX; self.n];
        let mut next = 0;
        (0..self.n)
            .map(|i| {
                let r = sets.find(i);
                if id[r] == usize::MAX {
                    id[r] = next;
                    next += 1;
                }
                id[r]
            })
            .collect()
    }

    /// Coordinate-wise median of each of the `k` clusters.
    pub fn centers(&self, points: &PointSet, k: usize) -> Vec<Vec<f64>> {
        let labels = self.labels(k);
        let mut members = vec![Vec::new(); k];
        for (i, &l) in labels.iter().enumerate() {
            members[l].push(points.row(i));
        }
        members
            .iter()
            .map(|rows| coordinate_median(rows.iter().copied(), points.dim()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_of_sizes() {
        let mut h = SizeHistogram::singletons(4);
        assert_eq!(h.gini(), 0.0);
        // sizes {2, 1, 1}: pairs |2-1|+|2-1|+0 = 2, / (2 * 4)
        h.merge(1, 1, 2);
        assert!((h.gini() - 0.25).abs() < 1e-12);
        // sizes {3, 1}: 2 / (1 * 4)
        h.merge(2, 1, 3);
        assert!((h.gini() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mst_of_collinear_points() {
        let p = PointSet::from_scalars(&[0.0, 3.0, 1.0, 10.0]).unwrap();
        let mut w: Vec<f64> = minimum_spanning_tree(&p).iter().map(|e| e.0.sqrt()).collect();
        w.sort_by(f64::total_cmp);
        assert_eq!(w, vec![1.0, 2.0, 7.0]);
    }

    #[test]
    fn single_linkage_cut_without_guard() {
        // threshold 1 never forces a merge: plain single linkage
        let p = PointSet::from_scalars(&[0.0, 0.1, 0.2, 5.0, 5.1, 20.0]).unwrap();
        let t = GenieTree::build(&p, 1.0);
        assert_eq!(t.labels(3), vec![0, 0, 0, 1, 1, 2]);
        assert_eq!(t.labels(1), vec![0; 6]);
        assert_eq!(t.labels(6), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn guard_absorbs_outlier() {
        // Two blobs of 20 plus one far outlier. Single linkage at k = 2 splits
        // off the outlier; the size guard merges it first instead.
        let mut xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.01).collect();
        xs.extend((0..20).map(|i| 10.0 + i as f64 * 0.01));
        xs.push(1000.0);
        let p = PointSet::from_scalars(&xs).unwrap();

        let plain = GenieTree::build(&p, 1.0).labels(2);
        assert_eq!(plain.iter().filter(|&&l| l == 1).count(), 1);

        let guarded = GenieTree::build(&p, 0.3).labels(2);
        assert_eq!(guarded[0], 0);
        assert!(guarded[..20].iter().all(|&l| l == 0));
        assert!(guarded[20..40].iter().all(|&l| l == 1));
    }
}
