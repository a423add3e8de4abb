//! Spanning trees of small multigraphs by branching on edges.

use alloc::vec::Vec;

use crate::graph::UnionFind;

fn connected(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut uf = UnionFind::new(n);
    let mut parts = n;
    for (a, b) in edges {
        if uf.union(a, b) {
            parts -= 1;
        }
    }
    parts <= 1
}

/// Calls `f` with the edge indices of every spanning tree of the multigraph
/// on `n` nodes. Parallel edges give distinct trees.
pub fn for_each_spanning_tree(n: usize, edges: &[(usize, usize)], mut f: impl FnMut(&[usize])) {
    if n == 0 || !connected(n, edges.iter().copied()) {
        return;
    }
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    let labels: Vec<usize> = (0..n).collect();
    branch(n, edges, 0, &labels, &mut chosen, &mut f);
}

fn branch(
    n: usize,
    edges: &[(usize, usize)],
    i: usize,
    labels: &[usize],
    chosen: &mut Vec<usize>,
    f: &mut impl FnMut(&[usize]),
) {
    if chosen.len() + 1 == n {
        f(chosen);
        return;
    }
    if i == edges.len() {
        return;
    }
    let (a, b) = edges[i];
    let (la, lb) = (labels[a], labels[b]);
    if la != lb {
        let merged: Vec<usize> = labels.iter().map(|&l| if l == lb { la } else { l }).collect();
        chosen.push(i);
        branch(n, edges, i + 1, &merged, chosen, f);
        chosen.pop();
    }
    let rest = chosen
        .iter()
        .map(|&j| edges[j])
        .chain(edges[i + 1..].iter().copied());
    if connected(n, rest) {
        branch(n, edges, i + 1, labels, chosen, f);
    }
}

pub fn count_spanning_trees(n: usize, edges: &[(usize, usize)]) -> u64 {
    let mut c = 0;
    for_each_spanning_tree(n, edges, |_| c += 1);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_counts() {
        assert_eq!(count_spanning_trees(3, &[(0, 1), (1, 2), (0, 2)]), 3);
        let k4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        assert_eq!(count_spanning_trees(4, &k4), 16);
        assert_eq!(count_spanning_trees(2, &[(0, 1), (0, 1)]), 2);
        assert_eq!(count_spanning_trees(3, &[(0, 1)]), 0);
    }

    #[test]
    fn trees_are_distinct() {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)];
        let mut all = Vec::new();
        for_each_spanning_tree(4, &edges, |t| all.push(t.to_vec()));
        let n = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), n);
        assert_eq!(n, 8);
    }
}
