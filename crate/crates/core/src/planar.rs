//! Embedded planar graphs and face graphs.
//!
//! An [`EmbeddedGraph`] is a simple graph together with a rotation system:
//! for every vertex the counterclockwise cyclic order of its neighbours.
//! Faces are traced by the rule: the dart after `u -> v` is `v -> w` where
//! `w` is the counterclockwise successor of `u` around `v`. This keeps the
//! face on the right of each dart, so bounded faces of a straight-line
//! drawing come out clockwise. "The face of a dart" always means the face
//! traced from it.
//!
//! A [`FaceGraph`] adds `B`/`H` labels to the non-triangular faces and fixes
//! one face as the outer face of the planar realisation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge, Edge, Graph, VertexId};

/// Directed edge `(tail, head)`.
pub type Dart = (VertexId, VertexId);

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EmbeddedGraph {
    rotation: BTreeMap<VertexId, Vec<VertexId>>,
}

impl EmbeddedGraph {
    /// Validates and wraps a rotation system.
    ///
    /// Rejects loops, repeated neighbours, asymmetric adjacency, disconnected
    /// graphs and rotation systems whose traced faces fail Euler's formula.
    pub fn new(rotation: BTreeMap<VertexId, Vec<VertexId>>) -> Result<Self> {
        for (&v, nbrs) in &rotation {
            let mut seen = BTreeSet::new();
            for &w in nbrs {
                if w == v {
                    return Err(Error::SelfLoop(v));
                }
                if !seen.insert(w) {
                    return Err(Error::RepeatedNeighbor { vertex: v, neighbor: w });
                }
                if !rotation.get(&w).is_some_and(|r| r.contains(&v)) {
                    return Err(Error::AsymmetricRotation(edge(v, w)));
                }
            }
        }
        let emb = EmbeddedGraph { rotation };
        if !emb.graph().is_connected() {
            return Err(Error::Disconnected);
        }
        let euler = emb.euler_characteristic();
        if euler != 2 {
            return Err(Error::NonPlanar { euler });
        }
        Ok(emb)
    }

    /// Rebuilds the rotation system from face walks traced with [`Self::trace_faces`].
    pub fn from_faces(faces: &[Vec<VertexId>]) -> Result<Self> {
        // Face walk u -> v -> w means succ(v, u) = w.
        let mut succ: BTreeMap<VertexId, BTreeMap<VertexId, VertexId>> = BTreeMap::new();
        for f in faces {
            let k = f.len();
            for i in 0..k {
                let (u, v, w) = (f[i], f[(i + 1) % k], f[(i + 2) % k]);
                succ.entry(v).or_default().insert(u, w);
            }
        }
        let mut rotation = BTreeMap::new();
        for (v, map) in succ {
            let start = *map.keys().next().expect("non-empty successor map");
            let mut order = vec![start];
            let mut cur = map[&start];
            while cur != start {
                order.push(cur);
                cur = *map
                    .get(&cur)
                    .ok_or_else(|| Error::Internal(format!("broken successor cycle at {v}")))?;
                if order.len() > map.len() {
                    return Err(Error::Internal(format!("successor map at {v} is not a cycle")));
                }
            }
            if order.len() != map.len() {
                return Err(Error::Internal(format!("successor map at {v} has several cycles")));
            }
            rotation.insert(v, order);
        }
        EmbeddedGraph::new(rotation)
    }

    pub fn rotation(&self, v: VertexId) -> &[VertexId] {
        self.rotation.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn rotations(&self) -> &BTreeMap<VertexId, Vec<VertexId>> {
        &self.rotation
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.rotation.keys().copied()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.rotation.contains_key(&v)
    }

    pub fn num_vertices(&self) -> usize {
        self.rotation.len()
    }

    pub fn num_edges(&self) -> usize {
        self.rotation.values().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.rotation.get(&u).is_some_and(|r| r.contains(&v))
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.rotation
            .iter()
            .flat_map(|(&u, r)| r.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn darts(&self) -> impl Iterator<Item = Dart> + '_ {
        self.rotation.iter().flat_map(|(&u, r)| r.iter().map(move |&v| (u, v)))
    }

    /// Underlying abstract graph.
    pub fn graph(&self) -> Graph {
        let mut g = Graph::new();
        for v in self.vertices() {
            g.add_vertex(v);
        }
        for (u, v) in self.edges() {
            g.add_edge(u, v).expect("validated rotation has no loops");
        }
        g
    }

    /// Counterclockwise successor of `w` around `v`.
    pub fn succ(&self, v: VertexId, w: VertexId) -> VertexId {
        let r = &self.rotation[&v];
        let i = r.iter().position(|&x| x == w).expect("w is a neighbour of v");
        r[(i + 1) % r.len()]
    }

    /// Counterclockwise predecessor of `w` around `v`.
    pub fn pred(&self, v: VertexId, w: VertexId) -> VertexId {
        let r = &self.rotation[&v];
        let i = r.iter().position(|&x| x == w).expect("w is a neighbour of v");
        r[(i + r.len() - 1) % r.len()]
    }

    /// Next dart along the face traced from `(u, v)`.
    pub fn next_dart(&self, (u, v): Dart) -> Dart {
        (v, self.succ(v, u))
    }

    /// Walk (vertex sequence) of the face traced from `d`, starting at `d`.
    pub fn face_walk(&self, d: Dart) -> Vec<VertexId> {
        let mut walk = vec![d.0];
        let mut cur = self.next_dart(d);
        while cur != d {
            walk.push(cur.0);
            cur = self.next_dart(cur);
        }
        walk
    }

    /// All face walks, each rotated to start at its lexicographically
    /// smallest dart, sorted. Every dart is used by exactly one walk.
    pub fn trace_faces(&self) -> Vec<Vec<VertexId>> {
        let mut used: BTreeSet<Dart> = BTreeSet::new();
        let mut faces = Vec::new();
        for d in self.darts() {
            if used.contains(&d) {
                continue;
            }
            let walk = self.face_walk(d);
            let k = walk.len();
            for i in 0..k {
                used.insert((walk[i], walk[(i + 1) % k]));
            }
            faces.push(canonical_walk(&walk));
        }
        faces.sort();
        faces
    }

    pub fn euler_characteristic(&self) -> i64 {
        let v = self.num_vertices() as i64;
        let e = self.num_edges() as i64;
        let f = if e == 0 { 1 } else { self.trace_faces().len() as i64 };
        v - e + f
    }

    /// Global reflection: reverses every cyclic order.
    pub fn mirrored(&self) -> EmbeddedGraph {
        let rotation = self
            .rotation
            .iter()
            .map(|(&v, r)| (v, r.iter().rev().copied().collect()))
            .collect();
        EmbeddedGraph { rotation }
    }

    /// Sub-embedding keeping `keep` vertices and dropping `drop_edges`.
    /// The result is not revalidated.
    pub(crate) fn restrict(&self, keep: &BTreeSet<VertexId>, drop_edges: &BTreeSet<Edge>) -> EmbeddedGraph {
        let rotation = self
            .rotation
            .iter()
            .filter(|(v, _)| keep.contains(v))
            .map(|(&v, r)| {
                let kept = r
                    .iter()
                    .copied()
                    .filter(|&w| keep.contains(&w) && !drop_edges.contains(&edge(v, w)))
                    .collect();
                (v, kept)
            })
            .collect();
        EmbeddedGraph { rotation }
    }

    /// Contracts `e`, keeping the smaller endpoint.
    ///
    /// The merged rotation splices the two cyclic orders at the deleted dart.
    /// Each facial triangle on `e` collapses one pair of parallel edges; any
    /// other common neighbour would leave a parallel edge and is an error.
    pub fn contract_edge(&self, e: Edge) -> Result<EmbeddedGraph> {
        let (s, r) = edge(e.0, e.1);
        if !self.has_edge(s, r) {
            return Err(Error::UnknownEdge((s, r)));
        }
        let after = |v: VertexId, skip: VertexId| -> Vec<VertexId> {
            let rot = &self.rotation[&v];
            let i = rot.iter().position(|&x| x == skip).expect("edge endpoint");
            (1..rot.len()).map(|k| rot[(i + k) % rot.len()]).collect()
        };
        let mut a = after(s, r);
        let mut b = after(r, s);
        if let (Some(&ak), Some(&b1)) = (a.last(), b.first()) {
            if ak == b1 {
                b.remove(0);
            }
        }
        if let (Some(&a1), Some(&bl)) = (a.first(), b.last()) {
            if a1 == bl {
                b.pop();
            }
        }
        let mut seen = BTreeSet::new();
        for &w in a.iter().chain(&b) {
            if !seen.insert(w) {
                return Err(Error::ParallelEdge {
                    edge: (s, r),
                    shared: w,
                });
            }
        }
        a.extend(b);
        let mut rotation = self.rotation.clone();
        rotation.remove(&r);
        for &w in &self.rotation[&r] {
            if w == s {
                continue;
            }
            let rot = rotation.get_mut(&w).expect("neighbour present");
            if rot.contains(&s) {
                rot.retain(|&x| x != r);
            } else {
                for x in rot.iter_mut() {
                    if *x == r {
                        *x = s;
                    }
                }
            }
        }
        rotation.insert(s, a);
        Ok(EmbeddedGraph { rotation })
    }
}

/// Rotates a closed walk so that it starts at its smallest dart.
pub fn canonical_walk(walk: &[VertexId]) -> Vec<VertexId> {
    let k = walk.len();
    if k == 0 {
        return Vec::new();
    }
    let best = (0..k)
        .min_by_key(|&i| (walk[i], walk[(i + 1) % k]))
        .expect("non-empty walk");
    (0..k).map(|j| walk[(best + j) % k]).collect()
}

/// Faces of an embedded graph. See [`EmbeddedGraph::trace_faces`].
pub fn trace_faces(g: &EmbeddedGraph) -> Vec<Vec<VertexId>> {
    g.trace_faces()
}

/// Contracts an edge of an embedded graph. See [`EmbeddedGraph::contract_edge`].
pub fn contract_edge_embedded(g: &EmbeddedGraph, e: Edge) -> Result<EmbeddedGraph> {
    g.contract_edge(e)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    B,
    H,
}

impl Label {
    pub fn transposed(self) -> Label {
        match self {
            Label::B => Label::H,
            Label::H => Label::B,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::B => "B",
            Label::H => "H",
        })
    }
}

/// Type of an edge according to the labels of its two faces (`T` = triangle).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeType {
    BB,
    BH,
    HH,
    BT,
    HT,
    TT,
}

impl EdgeType {
    fn from_labels(a: Option<Label>, b: Option<Label>) -> EdgeType {
        use Label::*;
        match (a, b) {
            (Some(B), Some(B)) => EdgeType::BB,
            (Some(H), Some(H)) => EdgeType::HH,
            (Some(B), Some(H)) | (Some(H), Some(B)) => EdgeType::BH,
            (Some(B), None) | (None, Some(B)) => EdgeType::BT,
            (Some(H), None) | (None, Some(H)) => EdgeType::HT,
            (None, None) => EdgeType::TT,
        }
    }
}

/// A cycle of edges with distinct vertices, stored canonically: it starts at
/// its smallest vertex and the second vertex is smaller than the last.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProperCycle(Vec<VertexId>);

impl ProperCycle {
    /// Canonicalises a vertex sequence; checks distinctness and length only.
    pub fn new(vertices: &[VertexId]) -> Result<Self> {
        let k = vertices.len();
        let distinct: BTreeSet<_> = vertices.iter().collect();
        if k < 3 || distinct.len() != k {
            return Err(Error::NotACycle(vertices.to_vec()));
        }
        let start = (0..k).min_by_key(|&i| vertices[i]).expect("non-empty");
        let fwd: Vec<VertexId> = (0..k).map(|j| vertices[(start + j) % k]).collect();
        if fwd[1] < fwd[k - 1] {
            Ok(ProperCycle(fwd))
        } else {
            let mut rev = vec![fwd[0]];
            rev.extend(fwd[1..].iter().rev());
            Ok(ProperCycle(rev))
        }
    }

    /// As [`ProperCycle::new`], additionally requiring every consecutive pair to be an edge of `g`.
    pub fn in_graph(g: &Graph, vertices: &[VertexId]) -> Result<Self> {
        let c = ProperCycle::new(vertices)?;
        if c.edges().all(|(u, v)| g.has_edge(u, v)) {
            Ok(c)
        } else {
            Err(Error::NotACycle(vertices.to_vec()))
        }
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        let k = self.0.len();
        (0..k).map(move |i| edge(self.0[i], self.0[(i + 1) % k]))
    }

    pub fn darts(&self) -> impl Iterator<Item = Dart> + '_ {
        let k = self.0.len();
        (0..k).map(move |i| (self.0[i], self.0[(i + 1) % k]))
    }

    pub fn contains_edge(&self, e: Edge) -> bool {
        let e = edge(e.0, e.1);
        self.edges().any(|f| f == e)
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.0.contains(&v)
    }
}

/// Calls `visit` once per proper cycle of `g` of length at most `max_len`.
///
/// Depth-first search from each start vertex through larger ids only; a
/// cycle is reported from its smallest vertex in the direction whose second
/// vertex is smaller than its last, so rotations and reflections never repeat.
pub fn for_each_proper_cycle<F>(g: &Graph, max_len: Option<usize>, mut visit: F)
where
    F: FnMut(ProperCycle),
{
    for s in g.vertices().collect::<Vec<_>>() {
        proper_cycles_from(g, s, max_len, &mut visit);
    }
}

/// Proper cycles whose smallest vertex is `start`; the unit of parallel sharding.
pub fn proper_cycles_from<F>(g: &Graph, start: VertexId, max_len: Option<usize>, visit: &mut F)
where
    F: FnMut(ProperCycle),
{
    let limit = max_len.unwrap_or(usize::MAX);
    if limit < 3 {
        return;
    }
    let mut path = vec![start];
    let mut on_path: BTreeSet<VertexId> = BTreeSet::from([start]);

    fn dfs<F: FnMut(ProperCycle)>(
        g: &Graph,
        start: VertexId,
        limit: usize,
        path: &mut Vec<VertexId>,
        on_path: &mut BTreeSet<VertexId>,
        visit: &mut F,
    ) {
        let last = *path.last().expect("path starts non-empty");
        for w in g.neighbors(last).collect::<Vec<_>>() {
            if w == start {
                if path.len() >= 3 && path[1] < last {
                    visit(ProperCycle(path.clone()));
                }
            } else if w > start && !on_path.contains(&w) && path.len() < limit {
                path.push(w);
                on_path.insert(w);
                dfs(g, start, limit, path, on_path, visit);
                on_path.remove(&w);
                path.pop();
            }
        }
    }

    dfs(g, start, limit, &mut path, &mut on_path, visit);
}

/// Collects every proper cycle of length at most `max_len` (all if `None`).
pub fn enumerate_proper_cycles(g: &Graph, max_len: Option<usize>) -> Vec<ProperCycle> {
    let mut out = Vec::new();
    for_each_proper_cycle(g, max_len, |c| out.push(c));
    out
}

/// An embedded planar graph whose non-triangular faces carry `B`/`H` labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceGraph {
    emb: EmbeddedGraph,
    faces: Vec<Vec<VertexId>>,
    dart_face: BTreeMap<Dart, usize>,
    labels: Vec<Option<Label>>,
    outer: usize,
}

impl FaceGraph {
    /// Builds a face graph whose labelled faces are identified by one of their darts.
    ///
    /// Labelled faces of length three are normalised to unlabelled triangles.
    /// `outer` defaults to the first `B` face, or the first face if there is none.
    pub fn from_darts(emb: EmbeddedGraph, labelled: &[(Dart, Label)], outer: Option<Dart>) -> Result<Self> {
        let faces = emb.trace_faces();
        let mut dart_face = BTreeMap::new();
        for (i, f) in faces.iter().enumerate() {
            let k = f.len();
            let distinct: BTreeSet<_> = f.iter().collect();
            if k < 3 || distinct.len() != k {
                return Err(Error::ImproperFace(f.clone()));
            }
            for j in 0..k {
                dart_face.insert((f[j], f[(j + 1) % k]), i);
            }
        }
        let mut labels = vec![None; faces.len()];
        for &(d, l) in labelled {
            let &i = dart_face.get(&d).ok_or(Error::UnknownEdge(edge(d.0, d.1)))?;
            if labels[i].is_some() {
                return Err(Error::DuplicateLabel(faces[i].clone()));
            }
            if faces[i].len() > 3 {
                labels[i] = Some(l);
            }
        }
        for (i, f) in faces.iter().enumerate() {
            if f.len() > 3 && labels[i].is_none() {
                return Err(Error::UnlabelledFace(f.clone()));
            }
        }
        let outer = match outer {
            Some(d) => *dart_face.get(&d).ok_or(Error::UnknownEdge(edge(d.0, d.1)))?,
            None => labels
                .iter()
                .position(|l| *l == Some(Label::B))
                .unwrap_or(0),
        };
        Ok(FaceGraph {
            emb,
            faces,
            dart_face,
            labels,
            outer,
        })
    }

    /// Builds a face graph from labelled boundary cycles.
    ///
    /// A boundary is matched against the traced faces in the given
    /// orientation first and in the reverse orientation otherwise.
    pub fn from_boundaries(
        emb: EmbeddedGraph,
        labelled: &[(Vec<VertexId>, Label)],
        outer: Option<&[VertexId]>,
    ) -> Result<Self> {
        let darts = labelled
            .iter()
            .map(|(b, l)| Ok((boundary_dart(&emb, b)?, *l)))
            .collect::<Result<Vec<_>>>()?;
        let outer = outer.map(|b| boundary_dart(&emb, b)).transpose()?;
        FaceGraph::from_darts(emb, &darts, outer)
    }

    /// Unlabelled face graph; every face must be a triangle.
    pub fn sphere(emb: EmbeddedGraph) -> Result<Self> {
        FaceGraph::from_darts(emb, &[], None)
    }

    pub fn embedding(&self) -> &EmbeddedGraph {
        &self.emb
    }

    pub fn graph(&self) -> Graph {
        self.emb.graph()
    }

    pub fn num_vertices(&self) -> usize {
        self.emb.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.emb.num_edges()
    }

    /// Canonical face walks; face ids index this slice.
    pub fn faces(&self) -> &[Vec<VertexId>] {
        &self.faces
    }

    pub fn boundary(&self, face: usize) -> &[VertexId] {
        &self.faces[face]
    }

    pub fn label(&self, face: usize) -> Option<Label> {
        self.labels[face]
    }

    pub fn outer_face(&self) -> usize {
        self.outer
    }

    /// Face traced from the dart.
    pub fn face_of_dart(&self, d: Dart) -> Option<usize> {
        self.dart_face.get(&d).copied()
    }

    /// Ids of labelled faces in increasing order.
    pub fn labelled_faces(&self) -> Vec<usize> {
        (0..self.faces.len()).filter(|&i| self.labels[i].is_some()).collect()
    }

    pub fn faces_with_label(&self, l: Label) -> Vec<usize> {
        (0..self.faces.len()).filter(|&i| self.labels[i] == Some(l)).collect()
    }

    /// `(m, n)`: number of `B` faces and of `H` faces.
    pub fn face_type(&self) -> (usize, usize) {
        (
            self.faces_with_label(Label::B).len(),
            self.faces_with_label(Label::H).len(),
        )
    }

    /// Labelled faces as `(first dart, label)` pairs, the inverse of [`FaceGraph::from_darts`].
    pub fn labelled_darts(&self) -> Vec<(Dart, Label)> {
        self.labelled_faces()
            .into_iter()
            .map(|i| ((self.faces[i][0], self.faces[i][1]), self.labels[i].expect("labelled")))
            .collect()
    }

    pub fn outer_dart(&self) -> Dart {
        let f = &self.faces[self.outer];
        (f[0], f[1])
    }

    /// Same face graph with a different outer face.
    pub fn with_outer(&self, face: usize) -> FaceGraph {
        let mut g = self.clone();
        g.outer = face;
        g
    }

    /// Labels swapped `B <-> H`; a single-hole graph is re-rooted at its `B` face.
    pub fn transpose_labels(&self) -> FaceGraph {
        let mut g = self.clone();
        g.labels = g.labels.iter().map(|l| l.map(Label::transposed)).collect();
        g
    }

    /// The two faces on either side of an edge.
    pub fn faces_of_edge(&self, e: Edge) -> Result<(usize, usize)> {
        let (u, v) = e;
        match (self.face_of_dart((u, v)), self.face_of_dart((v, u))) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::UnknownEdge(edge(u, v))),
        }
    }

    pub fn classify_edge(&self, e: Edge) -> Result<EdgeType> {
        let (a, b) = self.faces_of_edge(e)?;
        Ok(EdgeType::from_labels(self.labels[a], self.labels[b]))
    }

    /// Vertex set of the boundary of `face`.
    pub fn boundary_set(&self, face: usize) -> BTreeSet<VertexId> {
        self.faces[face].iter().copied().collect()
    }

    /// Index of a collection of labelled faces: `sum_B (|dB|-3) - sum_H (|dH|-3)`.
    pub fn index_of<'a, I>(&self, faces: I) -> i64
    where
        I: IntoIterator<Item = &'a usize>,
    {
        faces
            .into_iter()
            .map(|&f| {
                let excess = self.faces[f].len() as i64 - 3;
                match self.labels[f] {
                    Some(Label::B) => excess,
                    Some(Label::H) => -excess,
                    None => 0,
                }
            })
            .sum()
    }

    /// Whether `c` is the boundary of some face.
    pub fn is_facial(&self, c: &ProperCycle) -> bool {
        let first = c.darts().next().expect("cycle has darts");
        [first, (first.1, first.0)].iter().any(|&d| {
            self.face_of_dart(d).is_some_and(|f| {
                self.faces[f].len() == c.len() && self.faces[f].iter().all(|&v| c.contains_vertex(v))
            })
        })
    }
}

fn boundary_dart(emb: &EmbeddedGraph, boundary: &[VertexId]) -> Result<Dart> {
    if boundary.len() < 3 {
        return Err(Error::NoSuchFace(boundary.to_vec()));
    }
    let fwd = (boundary[0], boundary[1]);
    let rev = (boundary[1], boundary[0]);
    let matches = |d: Dart, expect: Vec<VertexId>| {
        emb.has_edge(d.0, d.1) && canonical_walk(&emb.face_walk(d)) == canonical_walk(&expect)
    };
    if matches(fwd, boundary.to_vec()) {
        return Ok(fwd);
    }
    let mut reversed = vec![boundary[1], boundary[0]];
    reversed.extend(boundary[2..].iter().rev());
    if matches(rev, reversed) {
        return Ok(rev);
    }
    Err(Error::NoSuchFace(boundary.to_vec()))
}

/// The partition of a face graph by a proper cycle.
///
/// "Inside" is the side not containing the outer face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleSides {
    pub cycle: ProperCycle,
    /// All faces (labelled or not) strictly inside.
    pub inside_region: BTreeSet<usize>,
    pub inside_faces: BTreeSet<usize>,
    pub outside_faces: BTreeSet<usize>,
    pub inside_vertices: BTreeSet<VertexId>,
    pub inside_edges: BTreeSet<Edge>,
    pub outside_vertices: BTreeSet<VertexId>,
    pub outside_edges: BTreeSet<Edge>,
    /// A dart of the cycle whose face lies inside.
    pub inside_dart: Dart,
}

/// Faces inside and outside a proper cycle, plus a dart of the cycle whose
/// face lies inside.
pub fn split_faces(fg: &FaceGraph, c: &ProperCycle) -> Result<(BTreeSet<usize>, BTreeSet<usize>, Dart)> {
    let emb = fg.embedding();
    if !c.edges().all(|(u, v)| emb.has_edge(u, v)) {
        return Err(Error::NotACycle(c.vertices().to_vec()));
    }
    let on_cycle: BTreeSet<Edge> = c.edges().collect();
    let left_seeds: BTreeSet<usize> = c.darts().map(|d| fg.face_of_dart(d).expect("dart")).collect();
    let right_seeds: BTreeSet<usize> = c
        .darts()
        .map(|(u, v)| fg.face_of_dart((v, u)).expect("dart"))
        .collect();
    // Flood the left side through edges not on the cycle.
    let mut left = left_seeds.clone();
    let mut stack: Vec<usize> = left_seeds.into_iter().collect();
    while let Some(f) = stack.pop() {
        let walk = &fg.faces[f];
        let k = walk.len();
        for j in 0..k {
            let (u, v) = (walk[j], walk[(j + 1) % k]);
            if on_cycle.contains(&edge(u, v)) {
                continue;
            }
            let g = fg.face_of_dart((v, u)).expect("dart");
            if left.insert(g) {
                stack.push(g);
            }
        }
    }
    if !left.is_disjoint(&right_seeds) {
        return Err(Error::NotACycle(c.vertices().to_vec()));
    }
    let right: BTreeSet<usize> = (0..fg.faces.len()).filter(|f| !left.contains(f)).collect();
    let first = c.darts().next().expect("cycle has darts");
    Ok(if left.contains(&fg.outer) {
        (right, left, (first.1, first.0))
    } else {
        (left, right, first)
    })
}

/// Splits the faces, vertices and edges of `fg` by the proper cycle `c`.
pub fn cycle_sides(fg: &FaceGraph, c: &ProperCycle) -> Result<CycleSides> {
    let (inside_region, outside_region, inside_dart) = split_faces(fg, c)?;
    let on_cycle: BTreeSet<Edge> = c.edges().collect();
    let region_content = |region: &BTreeSet<usize>| {
        let mut verts = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for &f in region {
            let walk = &fg.faces[f];
            let k = walk.len();
            for j in 0..k {
                let (u, v) = (walk[j], walk[(j + 1) % k]);
                if !c.contains_vertex(u) {
                    verts.insert(u);
                }
                if !on_cycle.contains(&edge(u, v)) {
                    edges.insert(edge(u, v));
                }
            }
        }
        (verts, edges)
    };
    let labelled = |region: &BTreeSet<usize>| -> BTreeSet<usize> {
        region.iter().copied().filter(|&f| fg.labels[f].is_some()).collect()
    };
    let (inside_vertices, inside_edges) = region_content(&inside_region);
    let (outside_vertices, outside_edges) = region_content(&outside_region);
    Ok(CycleSides {
        cycle: c.clone(),
        inside_faces: labelled(&inside_region),
        outside_faces: labelled(&outside_region),
        inside_region,
        inside_vertices,
        inside_edges,
        outside_vertices,
        outside_edges,
        inside_dart,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn rotation(spec: &[(VertexId, &[VertexId])]) -> BTreeMap<VertexId, Vec<VertexId>> {
        spec.iter().map(|&(v, r)| (v, r.to_vec())).collect()
    }

    /// K4: triangle 0,1,2 counterclockwise with 3 at the centre.
    pub fn k4() -> EmbeddedGraph {
        EmbeddedGraph::new(rotation(&[
            (0, &[1, 3, 2]),
            (1, &[2, 3, 0]),
            (2, &[0, 3, 1]),
            (3, &[0, 1, 2]),
        ]))
        .unwrap()
    }

    /// Octahedron: outer triangle 0,1,2, inner triangle 3,4,5 (3 opposite 0, etc.).
    pub fn octahedron() -> EmbeddedGraph {
        EmbeddedGraph::new(rotation(&[
            (0, &[1, 5, 4, 2]),
            (1, &[2, 3, 5, 0]),
            (2, &[0, 4, 3, 1]),
            (3, &[1, 2, 4, 5]),
            (4, &[2, 0, 5, 3]),
            (5, &[0, 1, 3, 4]),
        ]))
        .unwrap()
    }

    pub fn cycle(n: u32) -> EmbeddedGraph {
        EmbeddedGraph::new(
            (0..n)
                .map(|v| (v, vec![(v + 1) % n, (v + n - 1) % n]))
                .collect(),
        )
        .unwrap()
    }

    /// The smallest (1,1) face graph: a 4-cycle with outer face B and inner face H.
    pub fn four_cycle_bh() -> FaceGraph {
        let emb = cycle(4);
        FaceGraph::from_boundaries(emb, &[(vec![0, 1, 2, 3], Label::B), (vec![0, 3, 2, 1], Label::H)], None)
            .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn face_counts() {
        assert_eq!(k4().trace_faces().len(), 4);
        assert_eq!(octahedron().trace_faces().len(), 8);
        let c4 = cycle(4).trace_faces();
        assert_eq!(c4.len(), 2);
        assert!(c4.iter().all(|f| f.len() == 4));
        assert!(k4().trace_faces().iter().all(|f| f.len() == 3));
    }

    #[test]
    fn nonplanar_rotation_rejected() {
        // K4 with one rotation flipped has a single extra face: genus 1.
        let bad = EmbeddedGraph::new(rotation(&[
            (0, &[1, 2, 3]),
            (1, &[2, 3, 0]),
            (2, &[0, 3, 1]),
            (3, &[0, 1, 2]),
        ]));
        assert!(matches!(bad, Err(Error::NonPlanar { .. })));
        let asym = EmbeddedGraph::new(rotation(&[(0, &[1]), (1, &[])]));
        assert!(matches!(asym, Err(Error::AsymmetricRotation(_))));
    }

    #[test]
    fn faces_rebuild_rotation() {
        for emb in [k4(), octahedron(), cycle(5)] {
            let rebuilt = EmbeddedGraph::from_faces(&emb.trace_faces()).unwrap();
            assert_eq!(rebuilt.trace_faces(), emb.trace_faces());
        }
    }

    #[test]
    fn every_dart_used_once() {
        let emb = octahedron();
        let mut used = BTreeSet::new();
        for f in emb.trace_faces() {
            for j in 0..f.len() {
                assert!(used.insert((f[j], f[(j + 1) % f.len()])));
            }
        }
        assert_eq!(used.len(), 2 * emb.num_edges());
    }

    #[test]
    fn edge_types() {
        let fg = four_cycle_bh();
        for (u, v) in fg.embedding().edges().collect::<Vec<_>>() {
            assert_eq!(fg.classify_edge((u, v)).unwrap(), EdgeType::BH);
        }
        let sphere = FaceGraph::sphere(octahedron()).unwrap();
        for e in sphere.embedding().edges().collect::<Vec<_>>() {
            assert_eq!(sphere.classify_edge(e).unwrap(), EdgeType::TT);
        }
        assert!(fg.classify_edge((0, 2)).is_err());
    }

    #[test]
    fn cycle_enumeration_counts() {
        assert_eq!(enumerate_proper_cycles(&Graph::complete(4), None).len(), 7);
        assert_eq!(enumerate_proper_cycles(&Graph::complete(3), None).len(), 1);
        assert_eq!(enumerate_proper_cycles(&Graph::cycle(4), None).len(), 1);
        assert!(enumerate_proper_cycles(&Graph::path(6), None).is_empty());
        assert_eq!(enumerate_proper_cycles(&Graph::complete(4), Some(3)).len(), 4);
    }

    #[test]
    fn sides_of_face_boundaries() {
        let fg = four_cycle_bh();
        let (b, h) = (fg.faces_with_label(Label::B)[0], fg.faces_with_label(Label::H)[0]);
        assert_eq!(fg.outer_face(), b);
        let c = ProperCycle::new(&[0, 1, 2, 3]).unwrap();
        let s = cycle_sides(&fg, &c).unwrap();
        assert_eq!(s.inside_faces, BTreeSet::from([h]));
        assert_eq!(s.outside_faces, BTreeSet::from([b]));
        assert!(s.inside_vertices.is_empty() && s.inside_edges.is_empty());

        let oct = FaceGraph::sphere(octahedron()).unwrap();
        let tri = ProperCycle::new(&[3, 4, 5]).unwrap();
        let s = cycle_sides(&oct, &tri).unwrap();
        assert!(s.inside_faces.is_empty() && s.outside_faces.is_empty());
        assert_eq!(s.inside_region.len() + s.outside_faces.len(), s.inside_region.len());
        assert_eq!(s.inside_region.len(), 1);
    }

    #[test]
    fn swapping_outer_face_swaps_sides() {
        let oct = FaceGraph::sphere(octahedron()).unwrap();
        let c = ProperCycle::new(&[0, 1, 3, 4]).unwrap();
        let s = cycle_sides(&oct, &c).unwrap();
        let other = *s.inside_region.iter().next().unwrap();
        let flipped = cycle_sides(&oct.with_outer(other), &c).unwrap();
        assert_eq!(flipped.inside_vertices, s.outside_vertices);
        assert_eq!(flipped.inside_edges, s.outside_edges);
    }

    #[test]
    fn contraction_counts() {
        let k3 = k4().contract_edge((0, 3)).unwrap();
        assert_eq!((k3.num_vertices(), k3.num_edges()), (3, 3));
        assert_eq!(k3.euler_characteristic(), 2);
        let oct = octahedron();
        let c = oct.contract_edge((0, 1)).unwrap();
        assert_eq!((c.num_vertices(), c.num_edges()), (5, 9));
        assert_eq!(c.euler_characteristic(), 2);
        assert!(c.trace_faces().iter().all(|f| f.len() == 3));
    }

    #[test]
    fn contraction_through_separating_triangle_fails() {
        // Octahedron with an extra vertex 6 stellating face 3,4,5: the
        // triangle 3,4,5 is no longer facial.
        let emb = EmbeddedGraph::new(rotation(&[
            (0, &[1, 5, 4, 2]),
            (1, &[2, 3, 5, 0]),
            (2, &[0, 4, 3, 1]),
            (3, &[1, 2, 4, 6, 5]),
            (4, &[2, 0, 5, 6, 3]),
            (5, &[0, 1, 3, 6, 4]),
            (6, &[3, 4, 5]),
        ]))
        .unwrap();
        assert!(emb.trace_faces().iter().all(|f| f.len() == 3));
        // Edge 3-4 lies in facial triangles 2,4,3 and 3,4,6 and in the non-facial 3,4,5.
        assert!(matches!(
            emb.contract_edge((3, 4)),
            Err(Error::ParallelEdge { shared: 5, .. })
        ));
    }
}
