use super::{MergeTree, NodeRecord};
use crate::{Error, Result, TOLERANCE};

/// Row-major scalar field on a regular 2D grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarGrid {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument("grid dimensions must be positive".into()));
        }
        if values.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "grid {}x{} needs {} values, got {}",
                width,
                height,
                width * height,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid value {i} is not finite")));
        }
        Ok(ScalarGrid {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Negated field; its split tree is the join tree of the original.
    pub fn negated(&self) -> ScalarGrid {
        ScalarGrid {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    fn neighbors(&self, i: usize, conn: Connectivity, out: &mut Vec<usize>) {
        out.clear();
        let (x, y) = ((i % self.width) as isize, (i / self.width) as isize);
        let offsets: &[(isize, isize)] = match conn {
            Connectivity::Four => &[(-1, 0), (1, 0), (0, -1), (0, 1)],
            Connectivity::Eight => &[
                (-1, -1),
                (0, -1),
                (1, -1),
                (-1, 0),
                (1, 0),
                (-1, 1),
                (0, 1),
                (1, 1),
            ],
        };
        for (dx, dy) in offsets {
            let (nx, ny) = (x + dx, y + dy);
            if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                out.push(ny as usize * self.width + nx as usize);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Builds the split tree (superlevel set merge tree) of a grid.
///
/// Equal values are ordered by linear index, higher index counting as the
/// higher value. Features of zero persistence produced by plateaus are
/// removed. A constant field yields the single-node tree
/// ([`MergeTree::is_empty`]).
pub fn build_split_tree(grid: &ScalarGrid, connectivity: Connectivity) -> Result<MergeTree> {
    let n = grid.values.len();
    if n < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 cells".into()));
    }
    let vals = &grid.values;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(b.cmp(&a)));

    let mut uf = UnionFind::new(n);
    let mut processed = vec![false; n];
    let mut head = vec![usize::MAX; n];
    let mut raw: Vec<(Option<usize>, f64)> = Vec::new();
    let mut nbrs = Vec::with_capacity(8);
    let mut comps: Vec<usize> = Vec::with_capacity(8);

    for (step, &v) in order.iter().enumerate() {
        grid.neighbors(v, connectivity, &mut nbrs);
        comps.clear();
        for &u in &nbrs {
            if processed[u] {
                let r = uf.find(u);
                if !comps.contains(&r) {
                    comps.push(r);
                }
            }
        }
        processed[v] = true;
        match comps.len() {
            0 => {
                raw.push((None, vals[v]));
                head[v] = raw.len() - 1;
            }
            1 => {
                uf.parent[v] = comps[0];
            }
            _ => {
                if step == n - 1 {
                    return Err(Error::InvalidArgument(format!(
                        "global minimum at cell {v} merges {} components; \
                         the split tree would have a branching root",
                        comps.len()
                    )));
                }
                comps.sort_by_key(|&r| head[r]);
                let saddle = raw.len();
                raw.push((None, vals[v]));
                for &r in &comps {
                    raw[head[r]].0 = Some(saddle);
                    uf.parent[r] = v;
                }
                head[v] = saddle;
            }
        }
    }

    let min_cell = *order.last().unwrap();
    let last_head = head[uf.find(min_cell)];
    let root = raw.len();
    raw.push((None, vals[min_cell]));
    raw[last_head].0 = Some(root);

    // Renumber in preorder from the root.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); raw.len()];
    for (i, (p, _)) in raw.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(i);
        }
    }
    let mut preorder = Vec::with_capacity(raw.len());
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        preorder.push(v);
        for &c in children[v].iter().rev() {
            stack.push(c);
        }
    }
    let mut map = vec![0; raw.len()];
    for (new, &old) in preorder.iter().enumerate() {
        map[old] = new;
    }
    let mut nodes = vec![
        NodeRecord {
            parent: None,
            children: Vec::new(),
            length: 0.0,
            scalar: None,
        };
        raw.len()
    ];
    for (old, (p, s)) in raw.iter().enumerate() {
        let new = map[old];
        nodes[new].scalar = Some(*s);
        if let Some(p) = p {
            nodes[new].parent = Some(map[*p]);
            nodes[new].length = s - raw[*p].1;
            nodes[map[*p]].children.push(new);
        }
    }
    for n in &mut nodes {
        n.children.sort_unstable();
    }
    let tree = MergeTree::from_raw(nodes, map[root]);
    drop_zero_persistence(tree)
}

fn drop_zero_persistence(mut tree: MergeTree) -> Result<MergeTree> {
    loop {
        let Some(top) = tree.top() else {
            return Ok(tree);
        };
        if tree.length(top) <= TOLERANCE && tree.is_leaf(top) {
            let mut single = MergeTree::empty();
            single.nodes[0].scalar = tree.scalar(tree.root());
            return Ok(single);
        }
        let zero = (0..tree.len()).find(|&v| {
            v != tree.root() && v != top && tree.length(v) <= TOLERANCE
        });
        match zero {
            Some(v) => tree = tree.contract_edge(v)?,
            None => return Ok(tree),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(w: usize, h: usize, v: &[f64]) -> ScalarGrid {
        ScalarGrid::new(w, h, v.to_vec()).unwrap()
    }

    /// Independent reference: sweep thresholds over the sorted values and
    /// count superlevel components with a fresh flood fill at every level.
    fn component_count(g: &ScalarGrid, conn: Connectivity, level_rank: usize) -> usize {
        let n = g.values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| g.values[b].total_cmp(&g.values[a]).then(b.cmp(&a)));
        let mut inside = vec![false; n];
        for &v in &order[..=level_rank] {
            inside[v] = true;
        }
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut nb = Vec::new();
        for s in 0..n {
            if !inside[s] || seen[s] {
                continue;
            }
            count += 1;
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(u) = stack.pop() {
                g.neighbors(u, conn, &mut nb);
                for &w in &nb.clone() {
                    if inside[w] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    #[test]
    fn five_cell_fixture() {
        let g = grid(5, 1, &[0.0, 5.0, 2.0, 6.0, 1.0]);
        let t = build_split_tree(&g, Connectivity::Four).unwrap();
        assert!(t.is_valid(), "{:?}", t.validate());
        assert_eq!(t.len(), 4);
        let top = t.top().unwrap();
        assert_eq!(t.scalar(t.root()), Some(0.0));
        assert_eq!(t.scalar(top), Some(2.0));
        assert_eq!(t.length(top), 2.0);
        let mut leaf: Vec<(f64, f64)> = t
            .children(top)
            .iter()
            .map(|&c| (t.scalar(c).unwrap(), t.length(c)))
            .collect();
        leaf.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(leaf, vec![(5.0, 3.0), (6.0, 4.0)]);

        // Brute-force component counts agree with the tree: two maxima
        // until the level reaches the saddle at 2.
        let counts: Vec<usize> = (0..5)
            .map(|k| component_count(&g, Connectivity::Four, k))
            .collect();
        assert_eq!(counts, vec![1, 2, 1, 1, 1]);
    }

    #[test]
    fn monotone_grid_is_single_edge() {
        let g = grid(6, 1, &[1.0, 2.0, 4.0, 4.5, 7.0, 9.0]);
        let t = build_split_tree(&g, Connectivity::Four).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.length(t.top().unwrap()), 8.0);
    }

    #[test]
    fn constant_grid_is_degenerate() {
        let g = grid(3, 3, &[2.0; 9]);
        let t = build_split_tree(&g, Connectivity::Eight).unwrap();
        assert!(t.is_empty());
        assert!(!t.is_valid());
    }

    #[test]
    fn too_small_grid() {
        assert!(build_split_tree(&grid(1, 1, &[1.0]), Connectivity::Four).is_err());
    }

    #[test]
    fn interior_minimum_is_rejected() {
        let g = grid(3, 1, &[5.0, 0.0, 6.0]);
        assert!(build_split_tree(&g, Connectivity::Four).is_err());
    }

    #[test]
    fn connectivity_matters_on_diagonals() {
        // Two maxima touching only diagonally.
        let g = grid(3, 3, &[9.0, 1.0, 0.5, 1.0, 8.0, 1.0, 0.0, 1.0, 0.2]);
        let four = build_split_tree(&g, Connectivity::Four).unwrap();
        let eight = build_split_tree(&g, Connectivity::Eight).unwrap();
        assert_eq!(four.leaves().len(), 2);
        assert_eq!(eight.leaves().len(), 1);
        assert!(four.is_valid() && eight.is_valid());
    }

    #[test]
    fn plateau_ties_are_resolved() {
        let g = grid(4, 2, &[3.0, 3.0, 3.0, 3.0, 1.0, 3.0, 0.0, 3.0]);
        let t = build_split_tree(&g, Connectivity::Four).unwrap();
        assert!(t.is_valid() || t.is_empty(), "{:?}", t.validate());
        let again = build_split_tree(&g, Connectivity::Four).unwrap();
        assert_eq!(t, again);
    }
}
