//! Small graph utilities shared by the forest and spanning-tree code.

use alloc::vec::Vec;

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: alloc::vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// False if `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            core::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Component labels for `n` nodes, numbered in order of each component's
/// smallest node. `None` if the edges contain a cycle.
pub fn forest_components(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Option<(usize, Vec<usize>)> {
    let mut uf = UnionFind::new(n);
    for (a, b) in edges {
        if !uf.union(a, b) {
            return None;
        }
    }
    let mut label = alloc::vec![usize::MAX; n];
    let mut root_label = alloc::vec![usize::MAX; n];
    let mut count = 0;
    for v in 0..n {
        let r = uf.find(v);
        if root_label[r] == usize::MAX {
            root_label[r] = count;
            count += 1;
        }
        label[v] = root_label[r];
    }
    Some((count, label))
}
