//! Simple undirected graphs with stable vertex ids.
//!
//! Vertex ids survive every operation in the crate (contraction keeps the
//! smaller endpoint, division keeps both sides' ids), so certificates and
//! reports can always refer back to the ids of the input file. Kernels that
//! want dense indices go through [`DenseGraph`].

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;

/// Undirected edge, always stored with the smaller id first.
pub type Edge = (VertexId, VertexId);

/// First id reserved for vertices that do not belong to a face graph
/// (discus poles, interior vertices of explicit blocks).
pub const POLE_BASE: VertexId = 1 << 30;

/// Normalises an unordered pair.
#[inline]
pub fn edge(u: VertexId, v: VertexId) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph from an edge list. Duplicate edges collapse; loops are rejected.
    pub fn from_edges<I>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut g = Graph::new();
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Complete graph on ids `0..n`.
    pub fn complete(n: u32) -> Self {
        let mut g = Graph::new();
        for v in 0..n {
            g.add_vertex(v);
        }
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v).expect("distinct endpoints");
            }
        }
        g
    }

    /// Path graph on ids `0..n`.
    pub fn path(n: u32) -> Self {
        let mut g = Graph::new();
        for v in 0..n {
            g.add_vertex(v);
        }
        for v in 1..n {
            g.add_edge(v - 1, v).expect("distinct endpoints");
        }
        g
    }

    /// Cycle graph on ids `0..n`, `n >= 3`.
    pub fn cycle(n: u32) -> Self {
        let mut g = Graph::path(n);
        g.add_edge(n - 1, 0).expect("distinct endpoints");
        g
    }

    pub fn add_vertex(&mut self, v: VertexId) -> bool {
        if self.adj.contains_key(&v) {
            return false;
        }
        self.adj.insert(v, BTreeSet::new());
        true
    }

    /// Inserts `uv`; returns `false` if it was already present.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<bool> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        let fresh = self.adj.entry(u).or_default().insert(v);
        self.adj.entry(v).or_default().insert(u);
        Ok(fresh)
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> bool {
        let had = self.adj.get_mut(&u).is_some_and(|s| s.remove(&v));
        if let Some(s) = self.adj.get_mut(&v) {
            s.remove(&u);
        }
        had
    }

    pub fn remove_vertex(&mut self, v: VertexId) -> bool {
        match self.adj.remove(&v) {
            Some(nbrs) => {
                for w in nbrs {
                    if let Some(s) = self.adj.get_mut(&w) {
                        s.remove(&v);
                    }
                }
                true
            }
            None => false,
        }
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj.get(&u).is_some_and(|s| s.contains(&v))
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, s)| s.range(u + 1..).map(move |&v| (u, v)))
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.get(&v).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn neighbor_set(&self, v: VertexId) -> Option<&BTreeSet<VertexId>> {
        self.adj.get(&v)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn common_neighbors(&self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        match (self.adj.get(&u), self.adj.get(&v)) {
            (Some(a), Some(b)) => a.intersection(b).copied().collect(),
            _ => Vec::new(),
        }
    }

    pub fn max_vertex(&self) -> Option<VertexId> {
        self.adj.keys().next_back().copied()
    }

    /// Freedom number `3|V| - |E|`.
    pub fn freedom(&self) -> i64 {
        3 * self.num_vertices() as i64 - self.num_edges() as i64
    }

    /// Maxwell count `f = 6`.
    pub fn satisfies_maxwell(&self) -> bool {
        self.freedom() == 6
    }

    /// Induced subgraph on the given vertices (unknown ids ignored).
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> Graph {
        let adj = self
            .adj
            .iter()
            .filter(|(v, _)| keep.contains(v))
            .map(|(&v, s)| (v, s.intersection(keep).copied().collect()))
            .collect();
        Graph { adj }
    }

    /// Number of edges of the subgraph induced by `keep`.
    pub fn induced_edge_count(&self, keep: &BTreeSet<VertexId>) -> usize {
        keep.iter()
            .filter_map(|v| self.adj.get(v))
            .map(|s| s.intersection(keep).count())
            .sum::<usize>()
            / 2
    }

    /// Union of two graphs on the shared id space.
    pub fn union(&self, other: &Graph) -> Graph {
        let mut g = self.clone();
        for v in other.vertices() {
            g.add_vertex(v);
        }
        for (u, v) in other.edges() {
            g.add_edge(u, v).expect("no loops in a graph");
        }
        g
    }

    /// Edges present in both graphs.
    pub fn common_edges(&self, other: &Graph) -> Vec<Edge> {
        self.edges().filter(|&(u, v)| other.has_edge(u, v)).collect()
    }

    /// Intersection graph (common vertices, common edges).
    pub fn intersection(&self, other: &Graph) -> Graph {
        let mut g = Graph::new();
        for v in self.vertices().filter(|&v| other.contains_vertex(v)) {
            g.add_vertex(v);
        }
        for (u, v) in self.common_edges(other) {
            g.add_edge(u, v).expect("no loops in a graph");
        }
        g
    }

    /// Connected components as sorted vertex lists, ordered by smallest id.
    pub fn components(&self) -> Vec<Vec<VertexId>> {
        self.components_avoiding(&BTreeSet::new())
    }

    fn components_avoiding(&self, removed: &BTreeSet<VertexId>) -> Vec<Vec<VertexId>> {
        let mut seen: BTreeSet<VertexId> = removed.clone();
        let mut out = Vec::new();
        for s in self.vertices() {
            if seen.contains(&s) {
                continue;
            }
            seen.insert(s);
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for w in self.neighbors(u) {
                    if seen.insert(w) {
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Dense re-indexing used by the numeric and flow kernels.
    pub fn to_dense(&self) -> DenseGraph {
        let ids: Vec<VertexId> = self.vertices().collect();
        let index: BTreeMap<VertexId, usize> =
            ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let edges: Vec<(usize, usize)> = self.edges().map(|(u, v)| (index[&u], index[&v])).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for &(a, b) in &edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        DenseGraph { ids, adj, edges }
    }
}

/// Index-based view of a [`Graph`]; `ids[i]` is the original id of vertex `i`.
#[derive(Clone, Debug)]
pub struct DenseGraph {
    pub ids: Vec<VertexId>,
    pub adj: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

/// Outcome of [`is_3_connected`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Connectivity {
    ThreeConnected,
    /// Removing `pair` leaves `parts` (two or more components).
    Separated {
        pair: (VertexId, VertexId),
        parts: Vec<Vec<VertexId>>,
    },
}

impl Connectivity {
    pub fn is_three_connected(&self) -> bool {
        matches!(self, Connectivity::ThreeConnected)
    }
}

/// Decides 3-connectivity by trying every vertex pair.
///
/// A disconnected graph or one with a cut vertex is reported through the
/// first pair whose removal leaves more than one component.
pub fn is_3_connected(g: &Graph) -> Result<Connectivity> {
    let n = g.num_vertices();
    if n < 4 {
        return Err(Error::TooSmall {
            actual: n,
            required: 4,
        });
    }
    let ids: Vec<VertexId> = g.vertices().collect();
    for (i, &x) in ids.iter().enumerate() {
        for &y in &ids[i + 1..] {
            let removed = BTreeSet::from([x, y]);
            let parts = g.components_avoiding(&removed);
            if parts.len() > 1 {
                return Ok(Connectivity::Separated {
                    pair: (x, y),
                    parts,
                });
            }
        }
    }
    Ok(Connectivity::ThreeConnected)
}

/// Graph isomorphism by backtracking over colour-refined candidate classes.
///
/// Intended for the small graphs that appear in certificates and fixtures.
pub fn is_isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.num_vertices() != b.num_vertices() || a.num_edges() != b.num_edges() {
        return false;
    }
    let da = a.to_dense();
    let db = b.to_dense();
    let ca = refine_colours(&da);
    let cb = refine_colours(&db);
    let mut ha: Vec<u64> = ca.clone();
    let mut hb: Vec<u64> = cb.clone();
    ha.sort_unstable();
    hb.sort_unstable();
    if ha != hb {
        return false;
    }
    let n = da.ids.len();
    // Visit vertices of `a` in BFS order so that each new vertex has mapped neighbours.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &w in &da.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let adj_a: Vec<BTreeSet<usize>> = da.adj.iter().map(|v| v.iter().copied().collect()).collect();
    let adj_b: Vec<BTreeSet<usize>> = db.adj.iter().map(|v| v.iter().copied().collect()).collect();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];

    #[allow(clippy::too_many_arguments)]
    fn extend(
        k: usize,
        order: &[usize],
        ca: &[u64],
        cb: &[u64],
        adj_a: &[BTreeSet<usize>],
        adj_b: &[BTreeSet<usize>],
        map: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let u = order[k];
        for cand in 0..cb.len() {
            if used[cand] || cb[cand] != ca[u] {
                continue;
            }
            let consistent = order[..k]
                .iter()
                .all(|&w| adj_a[u].contains(&w) == adj_b[cand].contains(&map[w]));
            if !consistent {
                continue;
            }
            map[u] = cand;
            used[cand] = true;
            if extend(k + 1, order, ca, cb, adj_a, adj_b, map, used) {
                return true;
            }
            used[cand] = false;
            map[u] = usize::MAX;
        }
        false
    }

    extend(0, &order, &ca, &cb, &adj_a, &adj_b, &mut map, &mut used)
}

fn refine_colours(g: &DenseGraph) -> Vec<u64> {
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};
    let mut colour: Vec<u64> = g.adj.iter().map(|n| n.len() as u64).collect();
    for _ in 0..3 {
        colour = (0..g.adj.len())
            .map(|v| {
                let mut nb: Vec<u64> = g.adj[v].iter().map(|&w| colour[w]).collect();
                nb.sort_unstable();
                let mut h = DefaultHasher::new();
                colour[v].hash(&mut h);
                nb.hash(&mut h);
                h.finish()
            })
            .collect();
    }
    colour
}

#[cfg(test)]
mod tests {
    use super::*;

    fn octahedron() -> Graph {
        let mut edges = Vec::new();
        for u in 0..6u32 {
            for v in u + 1..6 {
                if v != u + 3 {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(edges).unwrap()
    }

    #[test]
    fn freedom_numbers() {
        assert_eq!(Graph::complete(3).freedom(), 6);
        assert_eq!(Graph::complete(4).freedom(), 6);
        assert_eq!(Graph::complete(5).freedom(), 5);
    }

    #[test]
    fn three_connectivity() {
        assert!(is_3_connected(&Graph::complete(4)).unwrap().is_three_connected());
        assert!(is_3_connected(&octahedron()).unwrap().is_three_connected());
        // Two triangles glued along {0,1}.
        let g = Graph::from_edges([(0, 1), (0, 2), (1, 2), (0, 3), (1, 3)]).unwrap();
        match is_3_connected(&g).unwrap() {
            Connectivity::Separated { pair, parts } => {
                assert_eq!(pair, (0, 1));
                assert_eq!(parts, vec![vec![2], vec![3]]);
            }
            other => panic!("expected separation, got {other:?}"),
        }
        assert!(matches!(
            is_3_connected(&Graph::complete(3)),
            Err(Error::TooSmall { .. })
        ));
    }

    #[test]
    fn loops_rejected() {
        assert_eq!(Graph::from_edges([(1, 1)]), Err(Error::SelfLoop(1)));
    }

    #[test]
    fn isomorphism() {
        let oct = octahedron();
        let relabelled = Graph::from_edges(oct.edges().map(|(u, v)| (10 + 5 * u, 10 + 5 * v))).unwrap();
        assert!(is_isomorphic(&oct, &relabelled));
        let k33 = Graph::from_edges([(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5)]).unwrap();
        let prism =
            Graph::from_edges([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)]).unwrap();
        assert!(!is_isomorphic(&k33, &prism));
    }
}
