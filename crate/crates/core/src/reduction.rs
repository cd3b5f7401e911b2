//! Edge contractions, critical separating cycles, cycle division, reduction
//! trees and their replay by vertex splitting and block substitution.
//!
//! Contractions keep the smaller endpoint of the edge, so a contraction
//! `(s, r)` with `s < r` is undone by splitting `s` and recreating `r`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::constructions::{discus_and_hole, is_triangulated_sphere, pole_ids, substitute_block, ChordPolicy};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::girth::critical_length_bound;
use crate::graph::{edge, is_isomorphic, Edge, Graph, VertexId};
use crate::planar::{
    cycle_sides, proper_cycles_from, split_faces, Dart, EdgeType, EmbeddedGraph, FaceGraph, Label, ProperCycle,
};
use crate::rigidity::{is_minimally_3_rigid_with, vertex_split, RankOptions};
use crate::sparsity::{is_36_sparse, is_36_tight, violation_through, SparsityReport};

/// The discus-and-hole graph `G†` as a plain graph.
pub fn dagger(fg: &FaceGraph) -> Graph {
    discus_and_hole(fg).graph().clone()
}

/// Membership in `G(m,n)`: the discus-and-hole graph is (3,6)-tight.
pub fn in_class(fg: &FaceGraph) -> bool {
    is_36_tight(&dagger(fg))
}

/// A labelled face, other than `except`, whose boundary holds both ends of `e`.
fn pinched_face(fg: &FaceGraph, (u, v): Edge, except: &[usize]) -> Option<usize> {
    fg.labelled_faces().into_iter().filter(|f| !except.contains(f)).find(|&f| {
        let b = fg.boundary(f);
        b.contains(&u) && b.contains(&v)
    })
}

/// TT edges lying on two triangular faces and no other 3-cycle.
///
/// Edges whose ends both lie on one labelled face are left out, since
/// contracting them pinches that face.
pub fn contractible_tt_edges(fg: &FaceGraph) -> Vec<Edge> {
    let g = fg.graph();
    fg.embedding()
        .edges()
        .filter(|&e| {
            fg.classify_edge(e).ok() == Some(EdgeType::TT)
                && g.common_neighbors(e.0, e.1).len() == 2
                && pinched_face(fg, e, &[]).is_none()
        })
        .collect()
}

/// BH edges in no 3-cycle (pinching edges left out as for TT).
pub fn contractible_bh_edges(fg: &FaceGraph) -> Vec<Edge> {
    let g = fg.graph();
    fg.embedding()
        .edges()
        .filter(|&e| {
            if fg.classify_edge(e).ok() != Some(EdgeType::BH) || !g.common_neighbors(e.0, e.1).is_empty() {
                return false;
            }
            let (a, b) = fg.faces_of_edge(e).expect("edge of the graph");
            pinched_face(fg, e, &[a, b]).is_none()
        })
        .collect()
}

/// Contractible BH edges lying on a path of at least three edges shared by
/// the two adjacent labelled boundaries; the admissible moves when there are
/// several blocks.
pub fn admissible_multiblock_bh_edges(fg: &FaceGraph) -> Vec<Edge> {
    contractible_bh_edges(fg)
        .into_iter()
        .filter(|&e| {
            let (f1, f2) = fg.faces_of_edge(e).expect("edge of the graph");
            let (bf, hf) = if fg.label(f1) == Some(Label::B) { (f1, f2) } else { (f2, f1) };
            let hb = fg.boundary(hf);
            let k = hb.len();
            let h_edges: BTreeSet<Edge> = (0..k).map(|j| edge(hb[j], hb[(j + 1) % k])).collect();
            let b = fg.boundary(bf);
            let k = b.len();
            let shared = |j: usize| h_edges.contains(&edge(b[j % k], b[(j + 1) % k]));
            let p = (0..k).find(|&j| edge(b[j], b[(j + 1) % k]) == e).expect("edge on boundary");
            let mut len = 1;
            let mut q = p + 1;
            while len < k && shared(q) {
                len += 1;
                q += 1;
            }
            let mut q = p + k - 1;
            while len < k && shared(q) {
                len += 1;
                q -= 1;
            }
            len >= 3
        })
        .collect()
}

/// Contracts `e` in the embedding and carries the labels across.
fn contract_face_graph(fg: &FaceGraph, e: Edge) -> Result<FaceGraph> {
    let (s, r) = edge(e.0, e.1);
    let emb = fg.embedding().contract_edge((s, r))?;
    let map = |x: VertexId| if x == r { s } else { x };
    let pick = |f: usize| -> Dart {
        let b = fg.boundary(f);
        let k = b.len();
        (0..k)
            .map(|j| (b[j], b[(j + 1) % k]))
            .find(|&(a, c)| edge(a, c) != (s, r))
            .map(|(a, c)| (map(a), map(c)))
            .expect("a face has at least three edges")
    };
    let labelled: Vec<(Dart, Label)> = fg
        .labelled_faces()
        .into_iter()
        .map(|f| (pick(f), fg.label(f).expect("labelled")))
        .collect();
    let outer = fg.label(fg.outer_face()).map(|_| pick(fg.outer_face()));
    FaceGraph::from_darts(emb, &labelled, outer)
}

fn require_listed(fg: &FaceGraph, e: Edge, listed: Vec<Edge>) -> Result<Edge> {
    let e = edge(e.0, e.1);
    if listed.contains(&e) {
        return Ok(e);
    }
    if let Some(f) = pinched_face(fg, e, &[]) {
        if fg.boundary(f).windows(2).all(|w| edge(w[0], w[1]) != e) {
            return Err(Error::PinchedFace {
                edge: e,
                face: fg.boundary(f).to_vec(),
            });
        }
    }
    Err(Error::NotContractible(e))
}

/// TT edge contraction; labelled boundaries are unchanged.
pub fn tt_contract(fg: &FaceGraph, e: Edge) -> Result<FaceGraph> {
    let e = require_listed(fg, e, contractible_tt_edges(fg))?;
    contract_face_graph(fg, e)
}

/// BH edge contraction; both adjacent boundaries shorten by one and a
/// boundary of length three loses its label.
pub fn bh_contract(fg: &FaceGraph, e: Edge) -> Result<FaceGraph> {
    let e = require_listed(fg, e, contractible_bh_edges(fg))?;
    contract_face_graph(fg, e)
}

/// Contracts a contractible TT edge of a graph in its class and returns the
/// result if it stays in the class.
///
/// The contraction keeps the freedom number, and a violation in the new
/// `G†` must use the merged vertex, so only subgraphs through it are checked.
pub fn tt_contract_in_class(fg: &FaceGraph, e: Edge) -> Result<Option<FaceGraph>> {
    let child = tt_contract(fg, e)?;
    let d = dagger(&child);
    if d.freedom() != 6 {
        return Err(Error::Internal("TT contraction changed the freedom number".into()));
    }
    Ok(violation_through(&d, edge(e.0, e.1).0).is_none().then_some(child))
}

/// `Ext(c)` and `Int(c)`: the discus-and-hole graphs of the outside and
/// inside face graphs of `c`. The face bounded by `c` carries a hole label
/// (or none when `|c| = 3`), which adds nothing to either graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtIntPair {
    pub cycle: ProperCycle,
    pub ext: Graph,
    pub int: Graph,
}

pub fn ext_int(fg: &FaceGraph, c: &ProperCycle) -> Result<ExtIntPair> {
    let sides = cycle_sides(fg, c)?;
    let bh = discus_and_hole(fg);
    let build = |verts: &BTreeSet<VertexId>, edges: &BTreeSet<Edge>, faces: &BTreeSet<usize>| {
        let mut g = Graph::new();
        for &v in verts.iter().chain(c.vertices()) {
            g.add_vertex(v);
        }
        for (u, v) in edges.iter().copied().chain(c.edges()) {
            g.add_edge(u, v).expect("edge of a simple graph");
        }
        for b in bh.blocks().iter().filter(|b| faces.contains(&b.face)) {
            for (u, v) in b.graph.edges() {
                g.add_edge(u, v).expect("block edge");
            }
        }
        g
    };
    Ok(ExtIntPair {
        cycle: c.clone(),
        ext: build(&sides.outside_vertices, &sides.outside_edges, &sides.outside_faces),
        int: build(&sides.inside_vertices, &sides.inside_edges, &sides.inside_faces),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CriticalCycle {
    pub cycle: ProperCycle,
    pub facial: bool,
    pub ext_tight: bool,
    pub int_tight: bool,
}

/// Freedom of the discus-and-hole graph of one side of `c`, from the index
/// of its labelled faces and the hole over `c`.
fn side_freedom(fg: &FaceGraph, c: &ProperCycle, side: &BTreeSet<usize>) -> i64 {
    let labelled: Vec<usize> = side.iter().copied().filter(|&f| fg.label(f).is_some()).collect();
    let hole = c.len() as i64 - 3;
    6 - fg.index_of(&labelled) + hole
}

pub fn critical_separating_cycles(fg: &FaceGraph) -> Vec<CriticalCycle> {
    critical_separating_cycles_with(fg, Execution::default())
}

/// Proper cycles `c` with `Ext(c)` or `Int(c)` (3,6)-tight, ordered by
/// length and then lexicographically. Only cycles meeting the Maxwell count
/// on a side are built and tested.
pub fn critical_separating_cycles_with(fg: &FaceGraph, exec: Execution) -> Vec<CriticalCycle> {
    let g = fg.graph();
    let bound = critical_length_bound(fg);
    let starts: Vec<VertexId> = g.vertices().collect();
    let mut out: Vec<CriticalCycle> = exec
        .map(&starts, |&s| {
            let mut found = Vec::new();
            proper_cycles_from(&g, s, Some(bound), &mut |c| {
                let (inside, outside, _) = split_faces(fg, &c).expect("cycle of the graph");
                let ext_maxwell = side_freedom(fg, &c, &outside) == 6;
                let int_maxwell = side_freedom(fg, &c, &inside) == 6;
                if !ext_maxwell && !int_maxwell {
                    return;
                }
                let pair = ext_int(fg, &c).expect("cycle of the graph");
                let ext_tight = ext_maxwell && is_36_sparse(&pair.ext).is_sparse();
                let int_tight = int_maxwell && is_36_sparse(&pair.int).is_sparse();
                if ext_tight || int_tight {
                    found.push(CriticalCycle {
                        facial: fg.is_facial(&c),
                        cycle: c,
                        ext_tight,
                        int_tight,
                    });
                }
            });
            found
        })
        .into_iter()
        .flatten()
        .collect();
    out.sort_by(|a, b| (a.cycle.len(), &a.cycle).cmp(&(b.cycle.len(), &b.cycle)));
    out
}

/// Whether `c` is critical; for a single block only `Ext(c)` is tested.
pub fn is_critical(fg: &FaceGraph, c: &ProperCycle) -> Result<bool> {
    let pair = ext_int(fg, c)?;
    let single_block = fg.face_type().0 == 1;
    Ok(is_36_tight(&pair.ext) || (!single_block && is_36_tight(&pair.int)))
}

/// The two face graphs of a separating cycle division.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Division {
    /// `G1`: the outside of `c`, with a hole over `c` when `|c| >= 4`.
    pub exterior: FaceGraph,
    /// `G2`: the inside of `c`, with `c` bounding the outer block face when `|c| >= 4`.
    pub interior: FaceGraph,
}

fn require_single_block_outer(fg: &FaceGraph) -> Result<()> {
    let (m, n) = fg.face_type();
    if m != 1 || fg.label(fg.outer_face()) != Some(Label::B) {
        return Err(Error::WrongType {
            expected: "(1,n) with the block face outer".into(),
            blocks: m,
            holes: n,
        });
    }
    Ok(())
}

/// Separating cycle division at a critical cycle, with the class law
/// checked on both parts.
pub fn divide(fg: &FaceGraph, c: &ProperCycle) -> Result<Division> {
    require_single_block_outer(fg)?;
    if !is_critical(fg, c)? {
        return Err(Error::NotCritical(c.vertices().to_vec()));
    }
    let sides = cycle_sides(fg, c)?;
    let emb = fg.embedding();
    let cycle_vertices: BTreeSet<VertexId> = c.vertices().iter().copied().collect();
    let long = c.len() >= 4;

    let keep: BTreeSet<VertexId> = sides.outside_vertices.union(&cycle_vertices).copied().collect();
    let emb1 = EmbeddedGraph::new(emb.restrict(&keep, &sides.inside_edges).rotations().clone())?;
    let mut labels1: Vec<(Dart, Label)> = sides
        .outside_faces
        .iter()
        .map(|&f| ((fg.boundary(f)[0], fg.boundary(f)[1]), fg.label(f).expect("labelled")))
        .collect();
    labels1.push((sides.inside_dart, Label::H));
    let outer_dart = fg.outer_dart();
    let exterior = FaceGraph::from_darts(emb1, &labels1, Some(outer_dart))?;

    let keep: BTreeSet<VertexId> = sides.inside_vertices.union(&cycle_vertices).copied().collect();
    let emb2 = EmbeddedGraph::new(emb.restrict(&keep, &sides.outside_edges).rotations().clone())?;
    let mut labels2: Vec<(Dart, Label)> = sides
        .inside_faces
        .iter()
        .map(|&f| ((fg.boundary(f)[0], fg.boundary(f)[1]), fg.label(f).expect("labelled")))
        .collect();
    let (a, b) = sides.inside_dart;
    labels2.push(((b, a), Label::B));
    let interior = FaceGraph::from_darts(emb2, &labels2, Some((b, a)))?;

    let n = fg.face_type().1;
    let l = sides.inside_faces.iter().filter(|&&f| fg.label(f) == Some(Label::H)).count();
    let (t1, t2) = if long { ((1, n - l + 1), (1, l)) } else { ((1, n), (0, 0)) };
    if exterior.face_type() != t1 || interior.face_type() != t2 || !in_class(&exterior) || !in_class(&interior) {
        return Err(Error::Internal(format!(
            "division at {:?} gave types {:?}/{:?}, expected {t1:?}/{t2:?} in class",
            c.vertices(),
            exterior.face_type(),
            interior.face_type()
        )));
    }
    Ok(Division { exterior, interior })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Status {
    pub terminal: bool,
    pub indivisible: bool,
    pub bh_reduced: bool,
}

pub fn status(fg: &FaceGraph) -> Result<Status> {
    if !in_class(fg) {
        return Err(Error::NotTight);
    }
    let mut terminal = true;
    for e in contractible_tt_edges(fg) {
        if tt_contract_in_class(fg, e)?.is_some() {
            terminal = false;
            break;
        }
    }
    Ok(Status {
        terminal,
        indivisible: critical_separating_cycles(fg).iter().all(|c| c.facial),
        bh_reduced: contractible_bh_edges(fg).is_empty(),
    })
}

/// Contractions of a triangulated sphere down to K3, one vertex per step.
/// Each step takes the smallest edge lying in exactly two triangles.
pub fn gluck_sequence(s: &EmbeddedGraph) -> Result<Vec<Edge>> {
    if !is_triangulated_sphere(s) {
        return Err(Error::NotASphere("some face is not a triangle".into()));
    }
    let mut cur = s.clone();
    let mut steps = Vec::new();
    while cur.num_vertices() > 3 {
        let g = cur.graph();
        let e = g
            .edges()
            .find(|&(u, v)| g.common_neighbors(u, v).len() == 2)
            .ok_or_else(|| Error::Internal("triangulated sphere without a contractible edge".into()))?;
        cur = cur.contract_edge(e)?;
        steps.push(e);
    }
    Ok(steps)
}

/// Checks a contraction sequence on a sphere; returns every intermediate
/// embedding, ending at K3.
fn gluck_states(s: &EmbeddedGraph, steps: &[Edge]) -> Result<Vec<EmbeddedGraph>> {
    if !is_triangulated_sphere(s) {
        return Err(Error::NotASphere("some face is not a triangle".into()));
    }
    let mut states = vec![s.clone()];
    for &e in steps {
        let cur = states.last().expect("non-empty");
        let g = cur.graph();
        let e = edge(e.0, e.1);
        if !g.has_edge(e.0, e.1) || g.common_neighbors(e.0, e.1).len() != 2 {
            return Err(Error::NotContractible(e));
        }
        states.push(cur.contract_edge(e)?);
    }
    let last = states.last().expect("non-empty");
    if last.num_vertices() != 3 {
        return Err(Error::InvalidParameter(format!(
            "contraction sequence ends with {} vertices",
            last.num_vertices()
        )));
    }
    Ok(states)
}

/// One node of a reduction tree and how its children arise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Step {
    TtContraction { edge: Edge, child: usize },
    BhContraction { edge: Edge, child: usize },
    Division { cycle: ProperCycle, exterior: usize, interior: usize },
    Leaf { gluck: Vec<Edge> },
}

impl Step {
    pub fn children(&self) -> Vec<usize> {
        match self {
            Step::TtContraction { child, .. } | Step::BhContraction { child, .. } => vec![*child],
            Step::Division { exterior, interior, .. } => vec![*exterior, *interior],
            Step::Leaf { .. } => vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub graph: FaceGraph,
    pub step: Step,
}

/// Node 0 is the root; children always have larger indices than parents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionTree {
    pub nodes: Vec<TreeNode>,
    /// The root is the transpose of the input, which had a single hole.
    pub transposed: bool,
}

impl ReductionTree {
    pub fn root(&self) -> &FaceGraph {
        &self.nodes[0].graph
    }

    pub fn leaves(&self) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(|n| matches!(n.step, Step::Leaf { .. }))
    }

    pub fn steps(&self) -> Vec<Step> {
        self.nodes.iter().map(|n| n.step.clone()).collect()
    }

    /// Every node is a non-leaf of type `(1,m)` with `m` at most the root's
    /// hole count, or a `(0,0)` leaf.
    pub fn check_shape(&self) -> Result<()> {
        let n = self.root().face_type().1;
        for (i, node) in self.nodes.iter().enumerate() {
            let (b, h) = node.graph.face_type();
            let leaf = matches!(node.step, Step::Leaf { .. });
            let ok = if leaf { (b, h) == (0, 0) } else { b == 1 && h <= n };
            if !ok {
                return Err(Error::Rejected {
                    node: i,
                    reason: format!("type ({b},{h}) on a {} node", if leaf { "leaf" } else { "inner" }),
                });
            }
        }
        Ok(())
    }

    /// Re-derives a tree from its root and steps, validating every step.
    pub fn from_steps(root: FaceGraph, steps: &[Step], transposed: bool) -> Result<ReductionTree> {
        if steps.is_empty() {
            return Err(Error::Rejected {
                node: 0,
                reason: "no steps".into(),
            });
        }
        if !in_class(&root) {
            return Err(Error::Rejected {
                node: 0,
                reason: "root is not in its class".into(),
            });
        }
        let mut graphs: Vec<Option<FaceGraph>> = vec![None; steps.len()];
        graphs[0] = Some(root);
        let mut nodes = Vec::with_capacity(steps.len());
        for (i, step) in steps.iter().enumerate() {
            let reject = |reason: String| Error::Rejected { node: i, reason };
            let graph = graphs[i].take().ok_or_else(|| reject("node is not reached from the root".into()))?;
            let children = apply_step(&graph, step).map_err(|e| reject(e.to_string()))?;
            for (&j, child) in step.children().iter().zip(children) {
                if j <= i || j >= steps.len() || graphs[j].is_some() {
                    return Err(reject(format!("bad child index {j}")));
                }
                graphs[j] = Some(child);
            }
            nodes.push(TreeNode {
                graph,
                step: step.clone(),
            });
        }
        let tree = ReductionTree { nodes, transposed };
        tree.check_shape()?;
        Ok(tree)
    }
}

/// Validates `step` on `fg` (assumed in its class) and returns the children.
fn apply_step(fg: &FaceGraph, step: &Step) -> Result<Vec<FaceGraph>> {
    match step {
        Step::TtContraction { edge: e, .. } => match tt_contract_in_class(fg, *e)? {
            Some(child) => Ok(vec![child]),
            None => Err(Error::NotTight),
        },
        Step::BhContraction { edge: e, .. } => {
            let child = bh_contract(fg, *e)?;
            let (_, n) = fg.face_type();
            let t = child.face_type();
            let allowed = t == (1, n) || (n >= 1 && t == (1, n - 1)) || t == (0, 0);
            if !allowed || !in_class(&child) {
                return Err(Error::Internal(format!("BH contraction of {e:?} left the class: type {t:?}")));
            }
            Ok(vec![child])
        }
        Step::Division { cycle, .. } => {
            if fg.is_facial(cycle) {
                return Err(Error::InvalidParameter(format!("division at facial cycle {:?}", cycle.vertices())));
            }
            let d = divide(fg, cycle)?;
            Ok(vec![d.exterior, d.interior])
        }
        Step::Leaf { gluck } => {
            if fg.face_type() != (0, 0) {
                return Err(Error::InvalidParameter("leaf is not a triangulated sphere".into()));
            }
            gluck_states(fg.embedding(), gluck)?;
            Ok(vec![])
        }
    }
}

/// Picks the next step for a node in `G(1,m)`: a class-preserving TT
/// contraction, then a BH contraction, then division at a non-facial
/// critical separating cycle; the smallest candidate in each class.
fn choose_step(fg: &FaceGraph, next: usize) -> Result<(Step, Vec<FaceGraph>)> {
    if fg.face_type() == (0, 0) {
        let gluck = gluck_sequence(fg.embedding())?;
        return Ok((Step::Leaf { gluck }, vec![]));
    }
    for e in contractible_tt_edges(fg) {
        if let Some(child) = tt_contract_in_class(fg, e)? {
            return Ok((Step::TtContraction { edge: e, child: next }, vec![child]));
        }
    }
    if let Some(&e) = contractible_bh_edges(fg).first() {
        let step = Step::BhContraction { edge: e, child: next };
        let children = apply_step(fg, &step)?;
        return Ok((step, children));
    }
    if let Some(c) = critical_separating_cycles(fg).into_iter().find(|c| !c.facial) {
        let step = Step::Division {
            cycle: c.cycle,
            exterior: next,
            interior: next + 1,
        };
        let children = apply_step(fg, &step)?;
        return Ok((step, children));
    }
    Err(Error::Internal(format!(
        "no reduction step on a graph of type {:?} in its class",
        fg.face_type()
    )))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduction {
    Certified(ReductionTree),
    /// The discus-and-hole graph is not (3,6)-tight, so no tree exists.
    Refused { transposed: bool, sparsity: SparsityReport },
}

/// Puts a single-hole graph into single-block form and the block face outside.
pub fn normalize_single_block(fg: &FaceGraph) -> Result<(FaceGraph, bool)> {
    let (m, n) = fg.face_type();
    let (g, transposed) = match (m, n) {
        (0, 0) | (1, _) => (fg.clone(), false),
        (_, 1) => (fg.transpose_labels(), true),
        _ => {
            return Err(Error::WrongType {
                expected: "(1,n), (n,1) or (0,0)".into(),
                blocks: m,
                holes: n,
            })
        }
    };
    Ok(match g.faces_with_label(Label::B).first() {
        Some(&b) if g.outer_face() != b => (g.with_outer(b), transposed),
        _ => (g, transposed),
    })
}

pub fn reduce_to_tree(fg: &FaceGraph) -> Result<Reduction> {
    let (root, transposed) = normalize_single_block(fg)?;
    let sparsity = is_36_sparse(&dagger(&root));
    if !sparsity.is_tight() {
        return Ok(Reduction::Refused { transposed, sparsity });
    }
    let mut graphs = vec![root];
    let mut steps: Vec<Option<Step>> = vec![None];
    let mut i = 0;
    while i < graphs.len() {
        let (step, children) = choose_step(&graphs[i], graphs.len())?;
        for c in children {
            graphs.push(c);
            steps.push(None);
        }
        steps[i] = Some(step);
        i += 1;
    }
    let nodes = graphs
        .into_iter()
        .zip(steps)
        .map(|(graph, step)| TreeNode {
            graph,
            step: step.expect("every node was visited"),
        })
        .collect();
    let tree = ReductionTree { nodes, transposed };
    tree.check_shape()?;
    Ok(Reduction::Certified(tree))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "action")]
pub enum ReplayAction {
    Base,
    VertexSplit { vertex: VertexId, new: VertexId },
    /// Replaces the triangle that was a block face by a discus over it.
    AttachDiscus { triangle: Vec<VertexId> },
    /// Glues the exterior graph into the interior one in place of its block.
    Substitute { cycle: Vec<VertexId> },
    RootBlock,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub node: usize,
    #[serde(flatten)]
    pub action: ReplayAction,
    pub vertices: usize,
    pub edges: usize,
    pub rank: usize,
    pub target: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ReplayOptions {
    pub rank: RankOptions,
    /// An isostatic block to put on the root's block face instead of the discus.
    pub root_block: Option<Graph>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub graph: Graph,
    pub log: Vec<ReplayEntry>,
    /// The rebuilt graph equals the root's `G†` (vertex ids included).
    pub equals_dagger: bool,
    pub isomorphic_to_dagger: bool,
}

struct Replayer<'a> {
    opts: &'a ReplayOptions,
    log: Vec<ReplayEntry>,
}

impl Replayer<'_> {
    fn record(&mut self, node: usize, action: ReplayAction, g: &Graph) -> Result<()> {
        let report = is_minimally_3_rigid_with(g, &self.opts.rank);
        self.log.push(ReplayEntry {
            node,
            action,
            vertices: g.num_vertices(),
            edges: g.num_edges(),
            rank: report.max_rank,
            target: report.target,
        });
        if !report.is_isostatic() {
            return Err(Error::Rejected {
                node,
                reason: format!(
                    "intermediate graph on {} vertices has rank {} of {} with {} edges",
                    g.num_vertices(),
                    report.max_rank,
                    report.target,
                    g.num_edges()
                ),
            });
        }
        Ok(())
    }

    /// Undoes the contraction `(s, r)` of `pre` by splitting `s` in `g`.
    fn split(&mut self, node: usize, g: &Graph, pre: &Graph, (s, r): Edge) -> Result<Graph> {
        let common = pre.common_neighbors(s, r);
        let reject = |reason: String| Error::Rejected { node, reason };
        if common.len() != 2 {
            return Err(reject(format!("edge {:?} has {} common neighbours", (s, r), common.len())));
        }
        let to_new: BTreeSet<VertexId> = pre
            .neighbors(r)
            .filter(|&x| x != s && !common.contains(&x))
            .collect();
        let h = vertex_split(g, s, common[0], common[1], &to_new, r).map_err(|e| reject(e.to_string()))?;
        self.record(node, ReplayAction::VertexSplit { vertex: s, new: r }, &h)?;
        Ok(h)
    }
}

fn expect_equal(node: usize, got: &Graph, want: &Graph) -> Result<()> {
    if got != want {
        return Err(Error::Rejected {
            node,
            reason: "rebuilt graph differs from the node's discus-and-hole graph".into(),
        });
    }
    Ok(())
}

/// Rebuilds the root's block-and-hole graph bottom-up: leaves from K3 by
/// vertex splits, contractions undone by vertex splits, divisions undone by
/// putting the exterior graph in place of the interior's block. Every
/// intermediate graph is rank-checked.
pub fn replay(tree: &ReductionTree, opts: &ReplayOptions) -> Result<ReplayOutcome> {
    let mut rp = Replayer { opts, log: Vec::new() };
    let mut built: Vec<Option<Graph>> = vec![None; tree.nodes.len()];
    for i in (0..tree.nodes.len()).rev() {
        let node = &tree.nodes[i];
        let want = dagger(&node.graph);
        let take = |built: &mut Vec<Option<Graph>>, j: usize| {
            built.get_mut(j).and_then(Option::take).ok_or(Error::Rejected {
                node: i,
                reason: format!("child {j} was not rebuilt"),
            })
        };
        let g = match &node.step {
            Step::Leaf { gluck } => {
                let states = gluck_states(node.graph.embedding(), gluck).map_err(|e| Error::Rejected {
                    node: i,
                    reason: e.to_string(),
                })?;
                let mut g = states.last().expect("non-empty").graph();
                rp.record(i, ReplayAction::Base, &g)?;
                for (k, &e) in gluck.iter().enumerate().rev() {
                    g = rp.split(i, &g, &states[k].graph(), edge(e.0, e.1))?;
                }
                g
            }
            Step::TtContraction { edge: e, child } | Step::BhContraction { edge: e, child } => {
                let (s, r) = edge(e.0, e.1);
                let mut g = take(&mut built, *child)?;
                let child_graph = &tree.nodes[*child].graph;
                if node.graph.face_type().0 == 1 && child_graph.face_type().0 == 0 {
                    let b = node.graph.faces_with_label(Label::B)[0];
                    let triangle: BTreeSet<VertexId> = node
                        .graph
                        .boundary(b)
                        .iter()
                        .map(|&x| if x == r { s } else { x })
                        .collect();
                    let (x, y) = pole_ids(0);
                    for &v in &triangle {
                        g.add_edge(x, v)?;
                        g.add_edge(y, v)?;
                    }
                    let triangle: Vec<VertexId> = triangle.into_iter().collect();
                    rp.record(i, ReplayAction::AttachDiscus { triangle }, &g)?;
                }
                rp.split(i, &g, &want, (s, r))?
            }
            Step::Division {
                cycle,
                exterior,
                interior,
            } => {
                let g1 = take(&mut built, *exterior)?;
                let mut g2 = take(&mut built, *interior)?;
                if cycle.len() >= 4 {
                    let (x, y) = pole_ids(0);
                    g2.remove_vertex(x);
                    g2.remove_vertex(y);
                }
                let g = g2.union(&g1);
                rp.record(
                    i,
                    ReplayAction::Substitute {
                        cycle: cycle.vertices().to_vec(),
                    },
                    &g,
                )?;
                g
            }
        };
        expect_equal(i, &g, &want)?;
        built[i] = Some(g);
    }
    let mut graph = built[0].take().expect("root rebuilt");
    let want = dagger(tree.root());
    let equals_dagger = graph == want;
    let isomorphic_to_dagger = equals_dagger || is_isomorphic(&graph, &want);
    if let Some(block) = &opts.root_block {
        let bh = discus_and_hole(tree.root());
        let sub = substitute_block(&bh, 0, block, ChordPolicy::Strict).map_err(|e| Error::Rejected {
            node: 0,
            reason: e.to_string(),
        })?;
        graph = sub.graph().clone();
        rp.record(0, ReplayAction::RootBlock, &graph)?;
    }
    Ok(ReplayOutcome {
        graph,
        log: rp.log,
        equals_dagger,
        isomorphic_to_dagger,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HennebergReduction {
    pub residue: Graph,
    /// Removed vertices in order.
    pub removed: Vec<VertexId>,
}

/// Repeatedly deletes the smallest vertex of degree 3 until none is left.
pub fn inverse_henneberg_reduce(g: &Graph) -> HennebergReduction {
    let mut residue = g.clone();
    let mut removed = Vec::new();
    loop {
        let Some(v) = residue.vertices().find(|&v| residue.degree(v) == 3) else { break };
        residue.remove_vertex(v);
        removed.push(v);
    }
    HennebergReduction { residue, removed }
}
