//! Static kd-tree over vertex ids for fixed-radius neighbour queries.
//!
//! Points live in a caller-owned flat coordinate buffer (`dim` values per
//! id); the tree only stores ids. It is rebuilt once per batch.

const LEAF_SIZE: usize = 8;

#[derive(Clone, Debug)]
enum Node {
    Leaf {
        start: u32,
        end: u32,
    },
    Split {
        axis: u32,
        value: f64,
        left: u32,
        right: u32,
    },
}

#[derive(Clone, Debug, Default)]
pub struct KdTree {
    dim: usize,
    ids: Vec<u32>,
    nodes: Vec<Node>,
}

#[inline]
fn point(coords: &[f64], dim: usize, id: u32) -> &[f64] {
    let s = id as usize * dim;
    &coords[s..s + dim]
}

impl KdTree {
    pub fn build(coords: &[f64], dim: usize, mut ids: Vec<u32>) -> Self {
        let mut nodes = Vec::new();
        if !ids.is_empty() {
            let len = ids.len();
            build_node(coords, dim, &mut ids, 0, len, &mut nodes);
        }
        KdTree { dim, ids, nodes }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Appends to `out` every id within distance `radius` (inclusive) of `x`.
    pub fn within(&self, coords: &[f64], x: &[f64], radius: f64, out: &mut Vec<u32>) {
        if self.nodes.is_empty() {
            return;
        }
        let r2 = radius * radius;
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            match self.nodes[n as usize] {
                Node::Leaf { start, end } => {
                    for &id in &self.ids[start as usize..end as usize] {
                        let p = point(coords, self.dim, id);
                        let mut d2 = 0.0;
                        for (a, b) in p.iter().zip(x) {
                            d2 += (a - b) * (a - b);
                            if d2 > r2 {
                                break;
                            }
                        }
                        if d2 <= r2 {
                            out.push(id);
                        }
                    }
                }
                Node::Split {
                    axis,
                    value,
                    left,
                    right,
                } => {
                    let c = x[axis as usize];
                    if c - radius <= value {
                        stack.push(left);
                    }
                    if c + radius >= value {
                        stack.push(right);
                    }
                }
            }
        }
    }
}

fn build_node(
    coords: &[f64],
    dim: usize,
    ids: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let index = nodes.len() as u32;
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: start as u32,
            end: end as u32,
        });
        return index;
    }
    // split on the axis of largest spread
    let slice = &mut ids[start..end];
    let mut best_axis = 0;
    let mut best_spread = -1.0;
    for axis in 0..dim {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &id in slice.iter() {
            let c = point(coords, dim, id)[axis];
            lo = lo.min(c);
            hi = hi.max(c);
        }
        if hi - lo > best_spread {
            best_spread = hi - lo;
            best_axis = axis;
        }
    }
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |a, b| {
        point(coords, dim, *a)[best_axis].total_cmp(&point(coords, dim, *b)[best_axis])
    });
    let value = point(coords, dim, slice[mid])[best_axis];
    nodes.push(Node::Split {
        axis: best_axis as u32,
        value,
        left: 0,
        right: 0,
    });
    let left = build_node(coords, dim, ids, start, start + mid, nodes);
    let right = build_node(coords, dim, ids, start + mid, end, nodes);
    if let Node::Split {
        left: l, right: r, ..
    } = &mut nodes[index as usize]
    {
        *l = left;
        *r = right;
    }
    index
}
