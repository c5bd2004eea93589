//! Minimal static kd-tree for axis-aligned box queries over a point set.

use nalgebra::Vector3;

const LEAF_SIZE: usize = 24;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

/// Balanced kd-tree over indices into an external point slice. The tree never
/// stores the points themselves, so the owning cloud stays the single source
/// of truth.
#[derive(Debug, Clone)]
pub(crate) struct KdTree {
    nodes: Vec<Node>,
    order: Vec<u32>,
    root: usize,
}

impl KdTree {
    pub fn build(points: &[Vector3<f64>]) -> Self {
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        let n = order.len();
        let root = build_rec(points, &mut order, &mut nodes, 0, n, 0);
        Self { nodes, order, root }
    }

    /// Visits every point inside the closed box `[lo, hi]`.
    pub fn box_query<F: FnMut(Vector3<f64>)>(
        &self,
        points: &[Vector3<f64>],
        lo: Vector3<f64>,
        hi: Vector3<f64>,
        visit: &mut F,
    ) {
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { start, end } => {
                    for &i in &self.order[start..end] {
                        let p = points[i as usize];
                        if p.x >= lo.x
                            && p.x <= hi.x
                            && p.y >= lo.y
                            && p.y <= hi.y
                            && p.z >= lo.z
                            && p.z <= hi.z
                        {
                            visit(p);
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    if lo[axis] <= value {
                        stack.push(left);
                    }
                    if hi[axis] >= value {
                        stack.push(right);
                    }
                }
            }
        }
    }
}

fn build_rec(
    points: &[Vector3<f64>],
    order: &mut [u32],
    nodes: &mut Vec<Node>,
    start: usize,
    end: usize,
    depth: usize,
) -> usize {
    let len = end - start;
    if len <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return nodes.len() - 1;
    }
    let axis = depth % 3;
    let mid = start + len / 2;
    order[start..end].select_nth_unstable_by(len / 2, |&a, &b| {
        points[a as usize][axis]
            .partial_cmp(&points[b as usize][axis])
            .unwrap()
    });
    let value = points[order[mid] as usize][axis];
    let left = build_rec(points, order, nodes, start, mid, depth + 1);
    let right = build_rec(points, order, nodes, mid, end, depth + 1);
    nodes.push(Node::Split {
        axis,
        value,
        left,
        right,
    });
    nodes.len() - 1
}
