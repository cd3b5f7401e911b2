//! Freedom numbers and the (3,6)-sparsity decision procedure.
//!
//! A graph is (3,6)-sparse when every subgraph with at least two edges has
//! freedom `3|V| - |E| >= 6`. The decision kernel is a densest-subgraph
//! computation: for a forced vertex set `F`, the maximum of
//! `|E(G[S])| - 3|S|` over `S ⊇ F` is a minimum cut in a project-selection
//! network (edges are unit-profit projects, vertices cost 3).
//!
//! A smallest violating subgraph is connected and has at least two edges, so
//! it contains two adjacent edges. Forcing the three vertices of every 2-path
//! `u - w - v` therefore finds a violation whenever one exists, and every
//! forced set already spans two edges.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::flow::{FlowNetwork, INF};
use crate::graph::{Graph, VertexId};

/// Default vertex bound for [`brute_force_sparse_oracle`].
pub const ORACLE_BOUND: usize = 12;

pub fn freedom(g: &Graph) -> i64 {
    g.freedom()
}

/// Result of [`max_subgraph_excess`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Excess {
    /// `max |E(G[S])| - 3|S|` over `S ⊇ forced`.
    pub value: i64,
    /// The largest maximiser.
    pub witness: BTreeSet<VertexId>,
}

/// Maximum of `|E(G[S])| - 3|S|` over vertex sets `S` containing `forced`.
pub fn max_subgraph_excess(g: &Graph, forced: &BTreeSet<VertexId>) -> Result<Excess> {
    if let Some(&v) = forced.iter().find(|&&v| !g.contains_vertex(v)) {
        return Err(Error::UnknownVertex(v));
    }
    let dense = g.to_dense();
    let n = dense.ids.len();
    let m = dense.edges.len();
    let (s, t) = (0, 1);
    let vnode = |i: usize| 2 + i;
    let enode = |j: usize| 2 + n + j;
    let mut net = FlowNetwork::new(2 + n + m);
    for (j, &(a, b)) in dense.edges.iter().enumerate() {
        net.add_arc(s, enode(j), 1);
        net.add_arc(enode(j), vnode(a), INF);
        net.add_arc(enode(j), vnode(b), INF);
    }
    for (i, id) in dense.ids.iter().enumerate() {
        net.add_arc(vnode(i), t, 3);
        if forced.contains(id) {
            net.add_arc(s, vnode(i), INF);
        }
    }
    let cut = net.max_flow(s, t);
    let side = net.maximal_source_side(t);
    let witness = (0..n).filter(|&i| side[vnode(i)]).map(|i| dense.ids[i]).collect();
    Ok(Excess {
        value: m as i64 - cut,
        witness,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsityVerdict {
    Sparse,
    Tight,
    Violation,
}

/// A subgraph with at least two edges and freedom below 6.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub vertices: BTreeSet<VertexId>,
    pub edges: usize,
}

impl Violation {
    pub fn freedom(&self) -> i64 {
        3 * self.vertices.len() as i64 - self.edges as i64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparsityReport {
    pub verdict: SparsityVerdict,
    pub witness: Option<Violation>,
    pub freedom_of_whole: i64,
}

impl SparsityReport {
    pub fn is_sparse(&self) -> bool {
        self.verdict != SparsityVerdict::Violation
    }

    pub fn is_tight(&self) -> bool {
        self.verdict == SparsityVerdict::Tight
    }
}

/// Vertex sets `{u, w, v}` of all 2-paths, sorted and deduplicated.
fn two_path_sets(g: &Graph) -> Vec<BTreeSet<VertexId>> {
    let mut sets = BTreeSet::new();
    for w in g.vertices() {
        let nbrs: Vec<VertexId> = g.neighbors(w).collect();
        for (i, &u) in nbrs.iter().enumerate() {
            for &v in &nbrs[i + 1..] {
                sets.insert(BTreeSet::from([u, w, v]));
            }
        }
    }
    sets.into_iter().collect()
}

pub fn is_36_sparse(g: &Graph) -> SparsityReport {
    is_36_sparse_with(g, Execution::default())
}

/// As [`is_36_sparse`] with an explicit execution policy. The witness is
/// the one found for the first violating 2-path in sorted order, so it does
/// not depend on the policy.
pub fn is_36_sparse_with(g: &Graph, exec: Execution) -> SparsityReport {
    let freedom_of_whole = g.freedom();
    let forced = two_path_sets(g);
    let witness = exec.find_first(&forced, |f| {
        let ex = max_subgraph_excess(g, f).expect("forced vertices come from g");
        (ex.value > -6).then(|| Violation {
            edges: g.induced_edge_count(&ex.witness),
            vertices: ex.witness,
        })
    });
    let verdict = match (&witness, freedom_of_whole) {
        (Some(_), _) => SparsityVerdict::Violation,
        (None, 6) => SparsityVerdict::Tight,
        (None, _) => SparsityVerdict::Sparse,
    };
    SparsityReport {
        verdict,
        witness,
        freedom_of_whole,
    }
}

/// A violating subgraph through `v`, if any. When `g - v` is known to be
/// sparse this decides sparsity of `g` with far fewer flow runs.
pub fn violation_through(g: &Graph, v: VertexId) -> Option<Violation> {
    let mut forced = BTreeSet::new();
    let nbrs: Vec<VertexId> = g.neighbors(v).collect();
    for (i, &a) in nbrs.iter().enumerate() {
        for &b in &nbrs[i + 1..] {
            forced.insert(BTreeSet::from([a, v, b]));
        }
        for b in g.neighbors(a).filter(|&b| b != v) {
            forced.insert(BTreeSet::from([v, a, b]));
        }
    }
    forced.into_iter().find_map(|f| {
        let ex = max_subgraph_excess(g, &f).expect("forced vertices come from g");
        (ex.value > -6).then(|| Violation {
            edges: g.induced_edge_count(&ex.witness),
            vertices: ex.witness,
        })
    })
}

pub fn is_36_tight(g: &Graph) -> bool {
    g.freedom() == 6 && is_36_sparse(g).is_sparse()
}

pub fn is_36_tight_with(g: &Graph, exec: Execution) -> bool {
    g.freedom() == 6 && is_36_sparse_with(g, exec).is_sparse()
}

/// Exhaustive check over all induced subgraphs. Errors above `max_vertices`.
pub fn brute_force_sparse_oracle(g: &Graph, max_vertices: usize) -> Result<bool> {
    let n = g.num_vertices();
    if n > max_vertices {
        return Err(Error::TooLarge {
            actual: n,
            bound: max_vertices,
        });
    }
    let dense = g.to_dense();
    let masks: Vec<u64> = dense
        .edges
        .iter()
        .map(|&(a, b)| (1u64 << a) | (1u64 << b))
        .collect();
    for subset in 0u64..(1u64 << n) {
        let edges = masks.iter().filter(|&&m| m & subset == m).count() as i64;
        if edges >= 2 && 3 * subset.count_ones() as i64 - edges < 6 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge;
    use crate::planar::fixtures::octahedron;
    use proptest::prelude::*;

    fn k33() -> Graph {
        Graph::from_edges((0..3).flat_map(|a| (3..6).map(move |b| (a, b)))).unwrap()
    }

    #[test]
    fn freedom_numbers() {
        assert_eq!(freedom(&Graph::complete(3)), 6);
        assert_eq!(freedom(&Graph::complete(4)), 6);
        assert_eq!(freedom(&Graph::complete(5)), 5);
    }

    #[test]
    fn excess_examples() {
        let k5 = Graph::complete(5);
        let ex = max_subgraph_excess(&k5, &BTreeSet::from([0, 1])).unwrap();
        assert_eq!(ex.value, -5);
        assert_eq!(ex.witness.len(), 5);
        let single = Graph::path(2);
        let ex = max_subgraph_excess(&single, &BTreeSet::from([0, 1])).unwrap();
        assert_eq!(ex.value, -5);
        let oct = octahedron().graph();
        for (a, b) in oct.edges().collect::<Vec<_>>() {
            for (c, d) in oct.edges().collect::<Vec<_>>() {
                if edge(a, b) < edge(c, d) {
                    let forced = BTreeSet::from([a, b, c, d]);
                    let ex = max_subgraph_excess(&oct, &forced).unwrap();
                    assert_eq!(ex.value, -6, "forced {forced:?}");
                }
            }
        }
    }

    #[test]
    fn sparsity_examples() {
        let r = is_36_sparse(&Graph::complete(5));
        assert_eq!(r.verdict, SparsityVerdict::Violation);
        assert_eq!(r.witness.unwrap().vertices.len(), 5);
        assert!(is_36_tight(&octahedron().graph()));
        assert!(is_36_tight(&Graph::complete(4)));
        assert!(!is_36_tight(&k33()));
        assert!(is_36_sparse(&k33()).is_sparse());
        let mut pendant = Graph::complete(4);
        pendant.add_edge(4, 0).unwrap();
        pendant.add_edge(4, 1).unwrap();
        let r = is_36_sparse(&pendant);
        assert_eq!(r.verdict, SparsityVerdict::Sparse);
        assert_eq!(r.freedom_of_whole, 7);
    }

    #[test]
    fn oracle_examples() {
        assert!(!brute_force_sparse_oracle(&Graph::complete(5), ORACLE_BOUND).unwrap());
        assert!(brute_force_sparse_oracle(&Graph::new(), ORACLE_BOUND).unwrap());
        assert!(matches!(
            brute_force_sparse_oracle(&Graph::path(13), ORACLE_BOUND),
            Err(Error::TooLarge { .. })
        ));
    }

    fn graph_from_mask(n: u32, mask: u64) -> Graph {
        let mut g = Graph::new();
        let mut bit = 0;
        for v in 0..n {
            g.add_vertex(v);
        }
        for u in 0..n {
            for v in u + 1..n {
                if mask >> bit & 1 == 1 {
                    g.add_edge(u, v).unwrap();
                }
                bit += 1;
            }
        }
        g
    }

    proptest! {
        #[test]
        fn agrees_with_oracle(n in 2u32..9, mask in any::<u64>()) {
            let g = graph_from_mask(n, mask);
            let fast = is_36_sparse(&g);
            prop_assert_eq!(fast.is_sparse(), brute_force_sparse_oracle(&g, ORACLE_BOUND).unwrap());
            if let Some(w) = fast.witness {
                prop_assert!(w.edges >= 2 && w.freedom() < 6);
                prop_assert_eq!(w.edges, g.induced_edge_count(&w.vertices));
            }
        }

        #[test]
        fn edge_removal_keeps_sparsity(n in 2u32..9, mask in any::<u64>(), pick in any::<usize>()) {
            let g = graph_from_mask(n, mask);
            let edges: Vec<_> = g.edges().collect();
            prop_assume!(!edges.is_empty() && is_36_sparse(&g).is_sparse());
            let (u, v) = edges[pick % edges.len()];
            let mut h = g.clone();
            h.remove_edge(u, v);
            prop_assert!(is_36_sparse(&h).is_sparse());
        }

        #[test]
        fn gluing_formula(n in 3u32..10, mask in any::<u64>(), split in any::<u64>()) {
            let g = graph_from_mask(n, mask);
            let mut a = Graph::new();
            let mut b = Graph::new();
            for (i, (u, v)) in g.edges().enumerate() {
                let target = if split >> (i % 64) & 1 == 1 { &mut a } else { &mut b };
                target.add_edge(u, v).unwrap();
            }
            let union = a.union(&b);
            let meet = a.intersection(&b);
            prop_assert_eq!(union.freedom(), a.freedom() + b.freedom() - meet.freedom());
        }

        #[test]
        fn local_check_matches(n in 2u32..9, mask in any::<u64>(), v in 0u32..9) {
            let g = graph_from_mask(n, mask);
            let v = v % n;
            let mut rest = g.clone();
            rest.remove_vertex(v);
            prop_assume!(is_36_sparse(&rest).is_sparse());
            prop_assert_eq!(violation_through(&g, v).is_none(), is_36_sparse(&g).is_sparse());
        }

        #[test]
        fn policies_agree(n in 2u32..9, mask in any::<u64>()) {
            let g = graph_from_mask(n, mask);
            prop_assert_eq!(
                is_36_sparse_with(&g, Execution::Sequential),
                is_36_sparse_with(&g, Execution::Parallel)
            );
        }
    }
}
