use crate::{Real, Vec3};

const LEAF_SIZE: usize = 12;

#[derive(Clone, Debug)]
enum Node<T> {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: T,
        left: usize,
        right: usize,
    },
}

/// Balanced kd-tree over a fixed point set.
///
/// Every split is taken at the median along the axis of largest extent, so
/// the depth is `O(log n)` regardless of the input distribution. Query results
/// are returned in ascending point-index order.
#[derive(Clone, Debug)]
pub struct KdTree<T> {
    nodes: Vec<Node<T>>,
    /// Points in tree order.
    points: Vec<Vec3<T>>,
    /// Original index of each point in tree order.
    ids: Vec<usize>,
    root: usize,
}

impl<T: Real> KdTree<T> {
    pub fn new(points: impl Into<Vec<Vec3<T>>>) -> Self {
        let points: Vec<Vec3<T>> = points.into();
        let mut ids: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        let root = build(&points, &mut ids, 0, points.len(), &mut nodes);
        let points = ids.iter().map(|&i| points[i]).collect();
        Self {
            nodes,
            points,
            ids,
            root,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Indices of every point `p` with `‖p - center‖ ≤ radius`, with squared distances.
    pub fn radius_search_with_distances(&self, center: Vec3<T>, radius: T) -> Vec<(usize, T)> {
        let mut out = Vec::new();
        if self.is_empty() || !(radius >= T::zero()) {
            return out;
        }
        let r2 = radius * radius;
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            match &self.nodes[n] {
                Node::Leaf { start, end } => {
                    for k in *start..*end {
                        let d2 = self.points[k].distance_squared(center);
                        if d2 <= r2 {
                            out.push((self.ids[k], d2));
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let c = center[*axis];
                    if c - radius <= *value {
                        stack.push(*left);
                    }
                    if c + radius >= *value {
                        stack.push(*right);
                    }
                }
            }
        }
        out.sort_unstable_by_key(|&(i, _)| i);
        out
    }

    /// Indices of every point within `radius` of `center` (inclusive).
    pub fn radius_search(&self, center: Vec3<T>, radius: T) -> Vec<usize> {
        self.radius_search_with_distances(center, radius)
            .into_iter()
            .map(|(i, _)| i)
            .collect()
    }

    /// Nearest point as `(index, distance)`; ties go to the smaller index.
    pub fn nearest(&self, query: Vec3<T>) -> Option<(usize, T)> {
        self.nearest_excluding(query, None)
    }

    /// Nearest point other than `exclude`.
    pub fn nearest_excluding(&self, query: Vec3<T>, exclude: Option<usize>) -> Option<(usize, T)> {
        self.knn_excluding(query, 1, exclude)
            .into_iter()
            .next()
            .map(|(i, d2)| (i, d2.sqrt()))
    }

    /// The `k` nearest points as `(index, squared distance)`, closest first.
    pub fn knn(&self, query: Vec3<T>, k: usize) -> Vec<(usize, T)> {
        self.knn_excluding(query, k, None)
    }

    fn knn_excluding(&self, query: Vec3<T>, k: usize, exclude: Option<usize>) -> Vec<(usize, T)> {
        let mut best: Vec<(T, usize)> = Vec::with_capacity(k + 1);
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let better = |a: (T, usize), b: (T, usize)| a.0 < b.0 || (a.0 == b.0 && a.1 < b.1);
        let mut stack: Vec<(usize, T)> = vec![(self.root, T::zero())];
        while let Some((n, bound)) = stack.pop() {
            if best.len() == k && bound > best[k - 1].0 {
                continue;
            }
            match &self.nodes[n] {
                Node::Leaf { start, end } => {
                    for j in *start..*end {
                        let id = self.ids[j];
                        if Some(id) == exclude {
                            continue;
                        }
                        let cand = (self.points[j].distance_squared(query), id);
                        if best.len() < k || better(cand, best[k - 1]) {
                            let pos = best
                                .iter()
                                .position(|&b| better(cand, b))
                                .unwrap_or(best.len());
                            best.insert(pos, cand);
                            best.truncate(k);
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let diff = query[*axis] - *value;
                    let (near, far) = if diff <= T::zero() {
                        (*left, *right)
                    } else {
                        (*right, *left)
                    };
                    stack.push((far, bound.max(diff * diff)));
                    stack.push((near, bound));
                }
            }
        }
        best.into_iter().map(|(d2, i)| (i, d2)).collect()
    }
}

fn build<T: Real>(
    points: &[Vec3<T>],
    ids: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node<T>>,
) -> usize {
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return nodes.len() - 1;
    }
    let slice = &mut ids[start..end];
    let (lo, hi) = slice.iter().fold(
        (points[slice[0]], points[slice[0]]),
        |(lo, hi), &i| (lo.inf(points[i]), hi.sup(points[i])),
    );
    let extent = hi - lo;
    let axis = if extent.x >= extent.y && extent.x >= extent.z {
        0
    } else if extent.y >= extent.z {
        1
    } else {
        2
    };
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        points[a][axis]
            .partial_cmp(&points[b][axis])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let value = points[slice[mid]][axis];
    let slot = nodes.len();
    nodes.push(Node::Leaf { start, end });
    let left = build(points, ids, start, start + mid, nodes);
    let right = build(points, ids, start + mid, end, nodes);
    nodes[slot] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    slot
}

/// Points within `radius` of `center`, excluding points that coincide with `center` exactly.
pub fn radius_neighbors<T: Real>(index: &KdTree<T>, center: Vec3<T>, radius: T) -> Vec<usize> {
    if !(radius > T::zero()) {
        return Vec::new();
    }
    index
        .radius_search_with_distances(center, radius)
        .into_iter()
        .filter(|&(_, d2)| d2 > T::zero())
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_radius(points: &[Vec3<f64>], c: Vec3<f64>, r: f64) -> Vec<usize> {
        (0..points.len())
            .filter(|&i| {
                let d = ((points[i].x - c.x).powi(2)
                    + (points[i].y - c.y).powi(2)
                    + (points[i].z - c.z).powi(2))
                .sqrt();
                d <= r && d > 0.0
            })
            .collect()
    }

    fn random_cloud(n: usize, seed: u64) -> Vec<Vec3<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()))
            .collect()
    }

    #[test]
    fn grid_interior_has_six_axis_neighbors() {
        let mut pts = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                for k in 0..5 {
                    pts.push(Vec3::new(i as f64, j as f64, k as f64));
                }
            }
        }
        let tree = KdTree::new(pts.clone());
        let center = Vec3::new(2.0, 2.0, 2.0);
        let n = radius_neighbors(&tree, center, 1.05);
        assert_eq!(n.len(), 6);
        for i in n {
            assert!((pts[i].distance(center) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn tiny_radius_is_empty() {
        let pts = random_cloud(200, 3);
        let tree = KdTree::new(pts.clone());
        assert!(radius_neighbors(&tree, pts[7], 1e-9).is_empty());
    }

    #[test]
    fn ten_thousand_points_match_linear_scan() {
        let pts = random_cloud(10_000, 11);
        let tree = KdTree::new(pts.clone());
        let queries = random_cloud(50, 12);
        for q in queries.iter().chain(pts.iter().take(50)) {
            assert_eq!(radius_neighbors(&tree, *q, 0.2), brute_radius(&pts, *q, 0.2));
        }
    }

    #[test]
    fn knn_matches_sorted_scan() {
        let pts = random_cloud(2000, 5);
        let tree = KdTree::new(pts.clone());
        for q in random_cloud(20, 6) {
            let mut all: Vec<(f64, usize)> =
                pts.iter().enumerate().map(|(i, p)| (p.distance_squared(q), i)).collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let got: Vec<usize> = tree.knn(q, 7).into_iter().map(|(i, _)| i).collect();
            let want: Vec<usize> = all[..7].iter().map(|&(_, i)| i).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn nearest_excluding_self() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(3.0, 0.0, 0.0),
        ];
        let tree = KdTree::new(pts);
        assert_eq!(tree.nearest_excluding(Vec3::zeros(), Some(0)), Some((1, 1.0)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn radius_query_equals_brute_force(seed in 0u64..10_000, n in 1usize..400, r in 0.01f64..0.8) {
            let pts = random_cloud(n, seed);
            let tree = KdTree::new(pts.clone());
            let q = random_cloud(1, seed ^ 0xdead)[0];
            prop_assert_eq!(radius_neighbors(&tree, q, r), brute_radius(&pts, q, r));
            prop_assert_eq!(radius_neighbors(&tree, pts[0], r), brute_radius(&pts, pts[0], r));
        }
    }
}
