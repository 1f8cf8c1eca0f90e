//! In-place kd-tree over 3D points with k-nearest-neighbor queries.
//!
//! The tree is the point array itself, recursively partitioned around the
//! median of the widest axis; no per-node storage beyond one axis byte.
//! Construction and queries are deterministic for a given input order, which
//! the renderer relies on for bit-exact output.

/// Implicit kd-tree. Each entry keeps the index it had in the caller's
/// point set, so deposits can carry arbitrary payloads.
#[derive(Debug, Clone)]
pub struct KdTree3 {
    /// (position, original index), reordered into tree layout.
    data: Vec<([f64; 3], u32)>,
    /// Split axis per tree slot (leaf ranges ignore it).
    axes: Vec<u8>,
}

const LEAF_SIZE: usize = 12;

impl KdTree3 {
    pub fn build(points: Vec<[f64; 3]>) -> Self {
        let n = points.len();
        assert!(n <= u32::MAX as usize, "too many points for kd-tree");
        let data = points
            .into_iter()
            .enumerate()
            .map(|(i, p)| (p, i as u32))
            .collect();
        let mut tree = Self {
            data,
            axes: vec![0; n],
        };
        if n > 0 {
            tree.split(0, n);
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn split(&mut self, lo: usize, hi: usize) {
        if hi - lo <= LEAF_SIZE {
            return;
        }
        // Widest axis of the bounding box.
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for (p, _) in &self.data[lo..hi] {
            for a in 0..3 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| {
                (max[a] - min[a])
                    .partial_cmp(&(max[b] - min[b]))
                    .expect("finite extents")
            })
            .unwrap();

        let mid = lo + (hi - lo) / 2;
        self.data[lo..hi].select_nth_unstable_by(mid - lo, |a, b| {
            a.0[axis]
                .partial_cmp(&b.0[axis])
                .expect("finite coordinates")
                .then(a.1.cmp(&b.1))
        });

        self.axes[mid] = axis as u8;
        self.split(lo, mid);
        self.split(mid + 1, hi);
    }

    /// Indices (into the original point set) and squared distances of the
    /// `k` points nearest to `query`, sorted by ascending distance. Returns
    /// fewer when the tree holds fewer than `k` points.
    pub fn nearest_k(&self, query: [f64; 3], k: usize) -> Vec<(u32, f64)> {
        if k == 0 || self.is_empty() {
            return Vec::new();
        }
        let mut heap = BoundedHeap::new(k);
        self.search(0, self.data.len(), query, &mut heap);
        heap.into_sorted()
    }

    fn search(&self, lo: usize, hi: usize, query: [f64; 3], heap: &mut BoundedHeap) {
        if hi - lo <= LEAF_SIZE {
            for &(p, id) in &self.data[lo..hi] {
                heap.offer(id, dist2(p, query));
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let axis = self.axes[mid] as usize;
        let (p, id) = self.data[mid];
        heap.offer(id, dist2(p, query));

        let delta = query[axis] - p[axis];
        let (near_lo, near_hi, far_lo, far_hi) = if delta < 0.0 {
            (lo, mid, mid + 1, hi)
        } else {
            (mid + 1, hi, lo, mid)
        };
        self.search(near_lo, near_hi, query, heap);
        if delta * delta < heap.bound() {
            self.search(far_lo, far_hi, query, heap);
        }
    }
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Max-heap keeping the k smallest squared distances seen so far.
struct BoundedHeap {
    k: usize,
    /// (squared distance, id) pairs in binary max-heap order.
    items: Vec<(f64, u32)>,
}

impl BoundedHeap {
    fn new(k: usize) -> Self {
        Self {
            k,
            items: Vec::with_capacity(k),
        }
    }

    /// Current cutoff: squared distance a candidate must beat.
    fn bound(&self) -> f64 {
        if self.items.len() < self.k {
            f64::INFINITY
        } else {
            self.items[0].0
        }
    }

    fn offer(&mut self, id: u32, d2: f64) {
        if self.items.len() < self.k {
            self.items.push((d2, id));
            let mut i = self.items.len() - 1;
            while i > 0 {
                let parent = (i - 1) / 2;
                if self.items[parent].0 < self.items[i].0 {
                    self.items.swap(parent, i);
                    i = parent;
                } else {
                    break;
                }
            }
        } else if d2 < self.items[0].0 {
            self.items[0] = (d2, id);
            let mut i = 0;
            loop {
                let (l, r) = (2 * i + 1, 2 * i + 2);
                let mut largest = i;
                if l < self.items.len() && self.items[l].0 > self.items[largest].0 {
                    largest = l;
                }
                if r < self.items.len() && self.items[r].0 > self.items[largest].0 {
                    largest = r;
                }
                if largest == i {
                    break;
                }
                self.items.swap(i, largest);
                i = largest;
            }
        }
    }

    fn into_sorted(self) -> Vec<(u32, f64)> {
        let mut out: Vec<(u32, f64)> = self.items.into_iter().map(|(d, id)| (id, d)).collect();
        out.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distances").then(a.0.cmp(&b.0)));
        out
    }
}
