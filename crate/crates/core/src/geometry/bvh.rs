//! Median-split bounding volume hierarchy.

use super::{Aabb, Element, GeometryError, HitRecord, Ray, Vec3};

const LEAF_SIZE: usize = 4;
const MAX_DEPTH: usize = 48;

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    /// Leaf: first index into `items`. Interior: index of the right child
    /// (the left child immediately follows its parent).
    offset: u32,
    /// Number of items in a leaf; zero for interior nodes.
    count: u32,
}

/// Binary tree of bounding boxes over a list of items, stored depth-first.
#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    items: Vec<u32>,
}

impl Bvh {
    /// Builds a tree over item bounds. Errors on an empty list.
    pub fn build(bounds: &[Aabb]) -> Result<Bvh, GeometryError> {
        if bounds.is_empty() {
            return Err(GeometryError::EmptyBvh);
        }
        let centroids: Vec<Vec3> = bounds.iter().map(Aabb::center).collect();
        let mut items: Vec<u32> = (0..bounds.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * bounds.len() / LEAF_SIZE + 1);
        build_node(bounds, &centroids, &mut items, 0, &mut nodes, 0);
        Ok(Bvh { nodes, items })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Maximum root-to-leaf depth (root has depth 1).
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            let n = &nodes[i];
            if n.count > 0 {
                1
            } else {
                1 + walk(nodes, i + 1).max(walk(nodes, n.offset as usize))
            }
        }
        walk(&self.nodes, 0)
    }

    /// Leaf bounds with the items they hold.
    pub fn leaves(&self) -> impl Iterator<Item = (&Aabb, &[u32])> {
        self.nodes.iter().filter(|n| n.count > 0).map(|n| {
            let s = n.offset as usize;
            (&n.bounds, &self.items[s..s + n.count as usize])
        })
    }

    /// Nearest hit over all items; `hit(item, t_max)` intersects one item.
    /// Equal distances resolve to the lower item index.
    pub fn nearest<F>(&self, ray: &Ray, mut hit: F) -> Option<HitRecord>
    where
        F: FnMut(u32, f64) -> Option<HitRecord>,
    {
        let d = ray.direction;
        let inv = Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z);
        let mut best: Option<HitRecord> = None;
        let mut best_t = f64::INFINITY;
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if node.bounds.hit(ray.origin, inv, best_t).is_none() {
                continue;
            }
            if node.count > 0 {
                let s = node.offset as usize;
                for &item in &self.items[s..s + node.count as usize] {
                    if let Some(h) = hit(item, best_t) {
                        let better = match &best {
                            None => true,
                            Some(b) => h.t < b.t || (h.t == b.t && h.element < b.element),
                        };
                        if better {
                            best_t = h.t;
                            best = Some(h);
                        }
                    }
                }
            } else {
                let left = i + 1;
                let right = node.offset as usize;
                let tl = self.nodes[left].bounds.hit(ray.origin, inv, best_t);
                let tr = self.nodes[right].bounds.hit(ray.origin, inv, best_t);
                match (tl, tr) {
                    (Some(a), Some(b)) if a <= b => {
                        stack.push(right);
                        stack.push(left);
                    }
                    (Some(_), Some(_)) => {
                        stack.push(left);
                        stack.push(right);
                    }
                    (Some(_), None) => stack.push(left),
                    (None, Some(_)) => stack.push(right),
                    (None, None) => {}
                }
            }
        }
        best
    }
}

fn build_node(
    bounds: &[Aabb],
    centroids: &[Vec3],
    items: &mut [u32],
    first: usize,
    nodes: &mut Vec<Node>,
    depth: usize,
) {
    let node_bounds = items
        .iter()
        .fold(Aabb::EMPTY, |b, &i| b.union(&bounds[i as usize]));
    let centroid_bounds = items
        .iter()
        .fold(Aabb::EMPTY, |b, &i| b.include(centroids[i as usize]));
    let axis = centroid_bounds.extent().max_axis();
    let spread = centroid_bounds.extent()[axis];
    let me = nodes.len();
    nodes.push(Node {
        bounds: node_bounds,
        offset: first as u32,
        count: items.len() as u32,
    });
    if items.len() <= LEAF_SIZE || depth >= MAX_DEPTH || !(spread > 0.0) {
        return;
    }
    items.sort_unstable_by(|&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let mid = items.len() / 2;
    let (left, right) = items.split_at_mut(mid);
    nodes[me].count = 0;
    build_node(bounds, centroids, left, first, nodes, depth + 1);
    nodes[me].offset = nodes.len() as u32;
    build_node(bounds, centroids, right, first + mid, nodes, depth + 1);
}

/// World-space elements with an optional acceleration tree.
#[derive(Debug, Clone, Default)]
pub struct Geometry {
    elements: Vec<Element>,
    bvh: Option<Bvh>,
}

impl Geometry {
    pub fn new(elements: Vec<Element>) -> Self {
        let bounds: Vec<Aabb> = elements.iter().map(Element::bounds).collect();
        let bvh = Bvh::build(&bounds).ok();
        Geometry { elements, bvh }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn bvh(&self) -> Option<&Bvh> {
        self.bvh.as_ref()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Nearest hit past the self-intersection bound of each element.
    pub fn intersect(&self, ray: &Ray) -> Option<HitRecord> {
        let bvh = self.bvh.as_ref()?;
        bvh.nearest(ray, |i, t_max| {
            self.elements[i as usize].hit(ray, t_max, i)
        })
    }

    /// Brute-force nearest hit; same tie rule as [`Geometry::intersect`].
    pub fn intersect_brute(&self, ray: &Ray) -> Option<HitRecord> {
        let mut best: Option<HitRecord> = None;
        for (i, e) in self.elements.iter().enumerate() {
            let t_max = best.as_ref().map_or(f64::INFINITY, |b| b.t);
            if let Some(h) = e.hit(ray, t_max, i as u32) {
                if best.as_ref().is_none_or(|b| h.t < b.t) {
                    best = Some(h);
                }
            }
        }
        best
    }

    /// Whether any surface lies strictly between the ray origin and `t_max`.
    pub fn occluded(&self, ray: &Ray, t_max: f64) -> bool {
        self.intersect(ray).is_some_and(|h| h.t < t_max)
    }
}

/// Builds a tree over primitive elements.
pub fn build_bvh(elements: &[Element]) -> Result<Bvh, GeometryError> {
    let bounds: Vec<Aabb> = elements.iter().map(Element::bounds).collect();
    Bvh::build(&bounds)
}
