//! Undirected simple graphs, maximum-cardinality matching and the
//! alternating structures formed by two matchings.
//!
//! Edge indices are the identity of an edge everywhere in the crate:
//! probabilities, realizations and query logs are all keyed by them.

use std::collections::VecDeque;

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// Largest edge count accepted by [`max_matching_oracle`].
pub const ORACLE_EDGE_LIMIT: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Adj {
    pub to: u32,
    pub edge: u32,
}

/// Immutable undirected simple graph with CSR adjacency.
///
/// Each vertex's adjacency list is sorted by edge index, so every scan in
/// this module visits edges in ascending index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<[u32; 2]>,
    offsets: Vec<usize>,
    adj: Vec<Adj>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicate edges and
    /// out-of-range endpoints.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n >= NONE as usize {
            return Err(Error::InvalidGraph(format!("too many vertices: {n}")));
        }
        let mut list = Vec::new();
        for (i, (u, v)) in edges.into_iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} ({u},{v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("edge {i} is a self-loop at {u}")));
            }
            list.push([u as u32, v as u32]);
        }
        if list.len() >= NONE as usize {
            return Err(Error::InvalidGraph("too many edges".into()));
        }

        let mut keys: Vec<(u32, u32, usize)> = list
            .iter()
            .enumerate()
            .map(|(i, &[u, v])| (u.min(v), u.max(v), i))
            .collect();
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 == w[1].1) {
            return Err(Error::InvalidGraph(format!(
                "edges {} and {} both join {} and {}",
                w[0].2, w[1].2, w[0].0, w[0].1
            )));
        }

        let mut degree = vec![0usize; n + 1];
        for &[u, v] in &list {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + degree[v];
        }
        let mut fill = offsets.clone();
        let mut adj = vec![Adj { to: 0, edge: 0 }; offsets[n]];
        for (e, &[u, v]) in list.iter().enumerate() {
            adj[fill[u as usize]] = Adj { to: v, edge: e as u32 };
            fill[u as usize] += 1;
            adj[fill[v as usize]] = Adj { to: u, edge: e as u32 };
            fill[v as usize] += 1;
        }

        Ok(Graph {
            n,
            edges: list,
            offsets,
            adj,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let [u, v] = self.edges[e];
        (u as usize, v as usize)
    }

    pub fn edge_list(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().map(|&[u, v]| (u as usize, v as usize))
    }

    pub(crate) fn raw_endpoints(&self, e: usize) -> &[u32] {
        &self.edges[e]
    }

    pub fn neighbors(&self, v: usize) -> &[Adj] {
        &self.adj[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Index of the edge joining `u` and `v`, if any.
    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        if u >= self.n || v >= self.n {
            return None;
        }
        let (a, b) = if self.degree(u) <= self.degree(v) { (u, v) } else { (v, u) };
        self.neighbors(a)
            .iter()
            .find(|adj| adj.to as usize == b)
            .map(|adj| adj.edge as usize)
    }

    pub fn other(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.endpoints(e);
        if a == v {
            b
        } else {
            a
        }
    }
}

/// A set of pairwise vertex-disjoint edges, stored as sorted edge indices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    edges: Vec<usize>,
}

impl Matching {
    pub fn empty() -> Self {
        Matching::default()
    }

    /// Validates that `edges` are in range and share no vertex in `g`.
    pub fn new(g: &Graph, edges: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut edges: Vec<usize> = edges.into_iter().collect();
        edges.sort_unstable();
        edges.dedup();
        let mut used = vec![false; g.n()];
        for &e in &edges {
            if e >= g.m() {
                return Err(Error::IndexOutOfRange { index: e, len: g.m() });
            }
            let (u, v) = g.endpoints(e);
            if used[u] || used[v] {
                return Err(Error::InvalidMatching(format!(
                    "edge {e} shares a vertex with another member"
                )));
            }
            used[u] = true;
            used[v] = true;
        }
        Ok(Matching { edges })
    }

    fn from_sorted_unchecked(edges: Vec<usize>) -> Self {
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        Matching { edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Vertex -> matched edge index.
    pub fn mate_edges(&self, g: &Graph) -> Vec<Option<usize>> {
        let mut mate = vec![None; g.n()];
        for &e in &self.edges {
            let (u, v) = g.endpoints(e);
            mate[u] = Some(e);
            mate[v] = Some(e);
        }
        mate
    }

    /// Flips membership of every edge on `path`. The result must still be a
    /// matching of `g`.
    pub fn apply(&mut self, g: &Graph, path: &AltPath) -> Result<()> {
        let mut next: Vec<usize> = self.edges.clone();
        for &e in &path.edges {
            match next.binary_search(&e) {
                Ok(i) => {
                    next.remove(i);
                }
                Err(i) => next.insert(i, e),
            }
        }
        *self = Matching::new(g, next)?;
        Ok(())
    }
}

/// Which of the two input matchings an augmenting path enlarges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathKind {
    /// Odd-length path whose two end edges belong to the other matching.
    Augmenting { augments: Side },
    /// Even-length path.
    Alternating,
    Cycle,
}

/// A connected component of the symmetric difference of two matchings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AltPath {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub kind: PathKind,
}

impl AltPath {
    /// Number of edges.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn augments(&self, side: Side) -> bool {
        self.kind == PathKind::Augmenting { augments: side }
    }
}

pub fn max_matching(g: &Graph) -> Matching {
    max_matching_with(g, |_| true, None)
}

/// Maximum matching of the subgraph formed by edges with `allowed(e)`.
///
/// `warm` must be a matching made of allowed edges; the search extends it
/// instead of starting from scratch. Scans are in ascending vertex/edge
/// order, so the output is a pure function of the inputs.
pub fn max_matching_with<F>(g: &Graph, allowed: F, warm: Option<&Matching>) -> Matching
where
    F: Fn(usize) -> bool,
{
    let mut solver = Blossom::new(g, allowed);
    if let Some(w) = warm {
        solver.seed(w);
    }
    solver.greedy();
    solver.augment_all();
    solver.into_matching()
}

/// Edmonds' blossom search, one BFS tree per exposed root.
///
/// A root whose search fails can never be augmented later; the vertices of
/// its frustrated tree are dropped for the rest of the run, which keeps the
/// total cost of failed searches linear in the graph size.
struct Blossom<'g, F> {
    g: &'g Graph,
    allowed: F,
    mate: Vec<u32>,
    mate_edge: Vec<u32>,
    dead: Vec<bool>,
    parent: Vec<u32>,
    parent_edge: Vec<u32>,
    base: Vec<u32>,
    even: Vec<u32>,
    mark: Vec<u32>,
    in_blossom: Vec<u32>,
    epoch: u32,
    tree: Vec<u32>,
    queue: VecDeque<u32>,
}

impl<'g, F: Fn(usize) -> bool> Blossom<'g, F> {
    fn new(g: &'g Graph, allowed: F) -> Self {
        let n = g.n();
        Blossom {
            g,
            allowed,
            mate: vec![NONE; n],
            mate_edge: vec![NONE; n],
            dead: vec![false; n],
            parent: vec![NONE; n],
            parent_edge: vec![NONE; n],
            base: (0..n as u32).collect(),
            even: vec![0; n],
            mark: vec![0; n],
            in_blossom: vec![0; n],
            epoch: 0,
            tree: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn link(&mut self, e: usize) {
        let [u, v] = self.g.edges[e];
        self.mate[u as usize] = v;
        self.mate[v as usize] = u;
        self.mate_edge[u as usize] = e as u32;
        self.mate_edge[v as usize] = e as u32;
    }

    fn seed(&mut self, warm: &Matching) {
        for &e in warm.edges() {
            debug_assert!((self.allowed)(e), "warm start edge {e} is not allowed");
            self.link(e);
        }
    }

    fn greedy(&mut self) {
        for e in 0..self.g.m() {
            let [u, v] = self.g.edges[e];
            if self.mate[u as usize] == NONE && self.mate[v as usize] == NONE && (self.allowed)(e) {
                self.link(e);
            }
        }
    }

    fn augment_all(&mut self) {
        for root in 0..self.g.n() {
            if self.mate[root] != NONE || self.dead[root] {
                continue;
            }
            match self.search(root as u32) {
                Some(end) => self.augment(end),
                None => {
                    for &v in &self.tree {
                        self.dead[v as usize] = true;
                    }
                }
            }
        }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.even.fill(0);
            self.mark.fill(0);
            self.in_blossom.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }

    fn lca(&mut self, a: u32, b: u32) -> u32 {
        let stamp = self.next_epoch();
        let mut a = a;
        loop {
            a = self.base[a as usize];
            self.mark[a as usize] = stamp;
            let m = self.mate[a as usize];
            if m == NONE {
                break;
            }
            a = self.parent[m as usize];
        }
        let mut b = b;
        loop {
            b = self.base[b as usize];
            if self.mark[b as usize] == stamp {
                return b;
            }
            b = self.parent[self.mate[b as usize] as usize];
        }
    }

    fn mark_path(&mut self, mut v: u32, b: u32, mut x: u32, mut xe: u32, stamp: u32) {
        while self.base[v as usize] != b {
            let m = self.mate[v as usize];
            self.in_blossom[self.base[v as usize] as usize] = stamp;
            self.in_blossom[self.base[m as usize] as usize] = stamp;
            self.parent[v as usize] = x;
            self.parent_edge[v as usize] = xe;
            x = m;
            xe = self.parent_edge[m as usize];
            v = self.parent[m as usize];
        }
    }

    fn search(&mut self, root: u32) -> Option<u32> {
        for &v in &self.tree {
            self.parent[v as usize] = NONE;
            self.parent_edge[v as usize] = NONE;
            self.base[v as usize] = v;
        }
        self.tree.clear();
        self.queue.clear();
        let even_stamp = self.next_epoch();

        self.even[root as usize] = even_stamp;
        self.tree.push(root);
        self.queue.push_back(root);

        while let Some(v) = self.queue.pop_front() {
            let g = self.g;
            for adj in g.neighbors(v as usize) {
                let to = adj.to;
                if self.dead[to as usize] || !(self.allowed)(adj.edge as usize) {
                    continue;
                }
                if self.base[v as usize] == self.base[to as usize] || self.mate[v as usize] == to {
                    continue;
                }
                let to_mate = self.mate[to as usize];
                if to == root || (to_mate != NONE && self.parent[to_mate as usize] != NONE) {
                    let b = self.lca(v, to);
                    let stamp = self.next_epoch();
                    self.mark_path(v, b, to, adj.edge, stamp);
                    self.mark_path(to, b, v, adj.edge, stamp);
                    for i in 0..self.tree.len() {
                        let w = self.tree[i];
                        if self.in_blossom[self.base[w as usize] as usize] == stamp {
                            self.base[w as usize] = b;
                            if self.even[w as usize] != even_stamp {
                                self.even[w as usize] = even_stamp;
                                self.queue.push_back(w);
                            }
                        }
                    }
                } else if self.parent[to as usize] == NONE {
                    self.parent[to as usize] = v;
                    self.parent_edge[to as usize] = adj.edge;
                    self.tree.push(to);
                    if to_mate == NONE {
                        return Some(to);
                    }
                    self.even[to_mate as usize] = even_stamp;
                    self.tree.push(to_mate);
                    self.queue.push_back(to_mate);
                }
            }
        }
        None
    }

    fn augment(&mut self, end: u32) {
        let mut v = end;
        while v != NONE {
            let pv = self.parent[v as usize];
            let e = self.parent_edge[v as usize];
            let next = self.mate[pv as usize];
            self.mate[v as usize] = pv;
            self.mate[pv as usize] = v;
            self.mate_edge[v as usize] = e;
            self.mate_edge[pv as usize] = e;
            v = next;
        }
    }

    fn into_matching(self) -> Matching {
        let mut edges: Vec<usize> = (0..self.g.n())
            .filter(|&v| self.mate[v] != NONE && (v as u32) < self.mate[v])
            .map(|v| self.mate_edge[v] as usize)
            .collect();
        edges.sort_unstable();
        Matching::from_sorted_unchecked(edges)
    }
}

/// Exact maximum matching by exhaustive enumeration: the lowest free
/// vertex is either left unmatched or matched to each free neighbour in
/// turn. Test oracle only; limited to [`ORACLE_EDGE_LIMIT`] edges.
pub fn max_matching_oracle(g: &Graph) -> Result<Matching> {
    if g.m() > ORACLE_EDGE_LIMIT {
        return Err(Error::InstanceTooLarge {
            limit: ORACLE_EDGE_LIMIT,
            actual: g.m(),
        });
    }
    fn go(g: &Graph, v: usize, used: &mut [bool], cur: &mut Vec<usize>, best: &mut Vec<usize>) {
        let Some(v) = (v..g.n()).find(|&x| !used[x]) else {
            if cur.len() > best.len() {
                *best = cur.clone();
            }
            return;
        };
        let free = used.iter().filter(|&&u| !u).count();
        if cur.len() + free / 2 <= best.len() {
            return;
        }
        used[v] = true;
        for a in g.neighbors(v) {
            let w = a.to as usize;
            if !used[w] {
                used[w] = true;
                cur.push(a.edge as usize);
                go(g, v + 1, used, cur, best);
                cur.pop();
                used[w] = false;
            }
        }
        go(g, v + 1, used, cur, best);
        used[v] = false;
    }
    let mut best = Vec::new();
    go(g, 0, &mut vec![false; g.n()], &mut Vec::new(), &mut best);
    Matching::new(g, best)
}

/// Connected components of `m1 ⊗ m2`, each classified.
///
/// Paths are listed first (by their lower-indexed end vertex), then cycles
/// (by their lowest vertex). Path vertex order starts at the lower-indexed
/// end; cycles start at their lowest vertex.
pub fn symmetric_difference(m1: &Matching, m2: &Matching, g: &Graph) -> Vec<AltPath> {
    let mut in1 = vec![NONE; g.n()];
    let mut in2 = vec![NONE; g.n()];
    for &e in m1.edges() {
        if m2.contains(e) {
            continue;
        }
        let (u, v) = g.endpoints(e);
        in1[u] = e as u32;
        in1[v] = e as u32;
    }
    for &e in m2.edges() {
        if m1.contains(e) {
            continue;
        }
        let (u, v) = g.endpoints(e);
        in2[u] = e as u32;
        in2[v] = e as u32;
    }
    let degree = |v: usize| (in1[v] != NONE) as usize + (in2[v] != NONE) as usize;

    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();

    let walk = |start: usize, first: u32, seen: &mut Vec<bool>| -> (Vec<usize>, Vec<usize>) {
        let mut vertices = vec![start];
        let mut edges = Vec::new();
        seen[start] = true;
        let mut v = start;
        let mut e = first;
        while e != NONE {
            let w = g.other(e as usize, v);
            edges.push(e as usize);
            if seen[w] {
                break;
            }
            seen[w] = true;
            vertices.push(w);
            e = if in1[w] == e { in2[w] } else { in1[w] };
            v = w;
        }
        (vertices, edges)
    };

    for v in 0..g.n() {
        if seen[v] || degree(v) != 1 {
            continue;
        }
        let first = if in1[v] != NONE { in1[v] } else { in2[v] };
        let (vertices, edges) = walk(v, first, &mut seen);
        let kind = if edges.len() % 2 == 1 {
            let augments = if m1.contains(edges[0]) { Side::Second } else { Side::First };
            PathKind::Augmenting { augments }
        } else {
            PathKind::Alternating
        };
        out.push(AltPath { vertices, edges, kind });
    }
    for v in 0..g.n() {
        if seen[v] || degree(v) != 2 {
            continue;
        }
        let first = in1[v].min(in2[v]);
        let (vertices, edges) = walk(v, first, &mut seen);
        out.push(AltPath {
            vertices,
            edges,
            kind: PathKind::Cycle,
        });
    }
    out
}

/// Augmenting paths of `m1` inside `m1 ⊗ m2` with at most `max_len` edges.
pub fn short_augmenting_paths(
    m1: &Matching,
    m2: &Matching,
    g: &Graph,
    max_len: usize,
) -> Result<Vec<AltPath>> {
    if max_len == 0 || max_len % 2 == 0 {
        return Err(Error::InvalidLength(max_len));
    }
    Ok(symmetric_difference(m1, m2, g)
        .into_iter()
        .filter(|p| p.augments(Side::First) && p.len() <= max_len)
        .collect())
}

/// Lower bound on the number of short augmenting paths:
/// `|m2| - (1 + 2/(L+1)) |m1|`.
pub fn short_path_bound(m1_len: usize, m2_len: usize, max_len: usize) -> f64 {
    m2_len as f64 - (1.0 + 2.0 / (max_len as f64 + 1.0)) * m1_len as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn petersen() -> Graph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        Graph::new(10, edges).unwrap()
    }

    fn p4() -> Graph {
        Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn rejects_loops_and_duplicates() {
        assert!(matches!(Graph::new(3, [(1, 1)]), Err(Error::InvalidGraph(_))));
        assert!(matches!(Graph::new(3, [(0, 1), (1, 0)]), Err(Error::InvalidGraph(_))));
        assert!(matches!(Graph::new(3, [(0, 3)]), Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn adjacency_is_sorted_by_edge() {
        let g = petersen();
        for v in 0..g.n() {
            let adj = g.neighbors(v);
            assert!(adj.windows(2).all(|w| w[0].edge < w[1].edge));
            for a in adj {
                let (x, y) = g.endpoints(a.edge as usize);
                assert!(x == v || y == v);
            }
        }
    }

    #[test]
    fn small_cases() {
        let empty = Graph::new(3, []).unwrap();
        assert!(max_matching(&empty).is_empty());

        let k3 = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(max_matching(&k3).len(), 1);

        assert_eq!(max_matching(&petersen()).len(), 5);
        assert_eq!(max_matching_oracle(&petersen()).unwrap().len(), 5);
    }

    #[test]
    fn oracle_examples_and_cap() {
        let k4 = Graph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert_eq!(max_matching_oracle(&k4).unwrap().len(), 2);
        let p3 = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(max_matching_oracle(&p3).unwrap().len(), 1);

        let big = Graph::new(50, (0..25).map(|i| (2 * i, 2 * i + 1))).unwrap();
        assert!(matches!(
            max_matching_oracle(&big),
            Err(Error::InstanceTooLarge { limit: 24, actual: 25 })
        ));
    }

    #[test]
    fn odd_cycle_needs_blossom() {
        // Triangle 0-1-2 with pendant edges 2-3 and 0-4: greedy takes (0,1),
        // the optimum of 2 needs an augmenting path through the blossom.
        let g = Graph::new(5, [(0, 1), (1, 2), (0, 2), (2, 3), (0, 4)]).unwrap();
        assert_eq!(max_matching(&g).len(), 2);
    }

    #[test]
    fn deterministic() {
        let g = petersen();
        assert_eq!(max_matching(&g), max_matching(&g));
    }

    #[test]
    fn warm_start_and_filter() {
        let g = p4();
        let warm = Matching::new(&g, [1]).unwrap();
        let m = max_matching_with(&g, |_| true, Some(&warm));
        assert_eq!(m.edges(), &[0, 2]);
        let m = max_matching_with(&g, |e| e != 0, None);
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn symdiff_examples() {
        let g = p4();
        let m1 = Matching::new(&g, [1]).unwrap();
        let m2 = Matching::new(&g, [0, 2]).unwrap();
        assert!(symmetric_difference(&m1, &m1, &g).is_empty());

        let comps = symmetric_difference(&m1, &m2, &g);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].vertices, vec![0, 1, 2, 3]);
        assert_eq!(comps[0].len(), 3);
        assert!(comps[0].augments(Side::First));

        let rev = symmetric_difference(&m2, &m1, &g);
        assert!(rev[0].augments(Side::Second));

        let c4 = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let a = Matching::new(&c4, [0, 2]).unwrap();
        let b = Matching::new(&c4, [1, 3]).unwrap();
        let comps = symmetric_difference(&a, &b, &c4);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].kind, PathKind::Cycle);
        assert_eq!(comps[0].len(), 4);
    }

    #[test]
    fn short_paths_examples() {
        let g = p4();
        let m1 = Matching::new(&g, [1]).unwrap();
        let m2 = Matching::new(&g, [0, 2]).unwrap();
        assert_eq!(short_augmenting_paths(&m1, &m2, &g, 3).unwrap().len(), 1);
        assert!(short_augmenting_paths(&m1, &m2, &g, 1).unwrap().is_empty());
        assert_eq!(short_path_bound(1, 2, 3), 0.5);
        assert_eq!(short_augmenting_paths(&m1, &m2, &g, 2), Err(Error::InvalidLength(2)));
        assert_eq!(short_augmenting_paths(&m1, &m2, &g, 0), Err(Error::InvalidLength(0)));

        let disjoint = Graph::new(8, (0..4).map(|i| (2 * i, 2 * i + 1))).unwrap();
        let all = Matching::new(&disjoint, 0..4).unwrap();
        let paths = short_augmenting_paths(&Matching::empty(), &all, &disjoint, 1).unwrap();
        assert_eq!(paths.len(), 4);
        assert!(paths.iter().all(|p| p.len() == 1));
    }

    #[test]
    fn apply_path_grows_matching() {
        let g = p4();
        let mut m1 = Matching::new(&g, [1]).unwrap();
        let m2 = Matching::new(&g, [0, 2]).unwrap();
        let path = &short_augmenting_paths(&m1, &m2, &g, 3).unwrap()[0];
        m1.apply(&g, path).unwrap();
        assert_eq!(m1.edges(), &[0, 2]);
    }

    #[test]
    fn find_edge_both_directions() {
        let g = petersen();
        for e in 0..g.m() {
            let (u, v) = g.endpoints(e);
            assert_eq!(g.find_edge(u, v), Some(e));
            assert_eq!(g.find_edge(v, u), Some(e));
        }
        assert_eq!(g.find_edge(0, 2), None);
    }
}
