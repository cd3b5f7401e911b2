//! Builders for triangulated spheres, face graphs and block-and-hole graphs.
//!
//! Pole vertices of the discus over the `i`-th `B` face (in face-id order)
//! get ids `POLE_BASE + 2i` and `POLE_BASE + 2i + 1`, so graphs built from
//! the same face graph compare equal by label.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge, Edge, Graph, VertexId, POLE_BASE};
use crate::planar::{canonical_walk, Dart, EmbeddedGraph, FaceGraph, Label};
use crate::rigidity::is_minimally_3_rigid;
use crate::sparsity::is_36_tight;

pub fn k4() -> EmbeddedGraph {
    rotation_graph(&[(0, &[1, 3, 2]), (1, &[2, 3, 0]), (2, &[0, 3, 1]), (3, &[0, 1, 2])])
}

/// Outer triangle 0,1,2 and inner triangle 3,4,5 with vertex `i + 3` opposite `i`.
pub fn octahedron() -> EmbeddedGraph {
    rotation_graph(&[
        (0, &[1, 5, 4, 2]),
        (1, &[2, 3, 5, 0]),
        (2, &[0, 4, 3, 1]),
        (3, &[1, 2, 4, 5]),
        (4, &[2, 0, 5, 3]),
        (5, &[0, 1, 3, 4]),
    ])
}

fn rotation_graph(spec: &[(VertexId, &[VertexId])]) -> EmbeddedGraph {
    EmbeddedGraph::new(spec.iter().map(|&(v, r)| (v, r.to_vec())).collect()).expect("fixture rotation is planar")
}

/// Whether every face is a triangle (K3 counts, with its two faces).
pub fn is_triangulated_sphere(s: &EmbeddedGraph) -> bool {
    s.num_vertices() >= 3 && s.trace_faces().iter().all(|f| f.len() == 3)
}

/// One planar vertex split of a triangulation: `v` keeps the rotation arc
/// from position `i` to `j` and the new vertex `w` takes the arc from `j`
/// back to `i`. Both endpoints of the arcs end up adjacent to `v` and `w`.
pub fn split_triangulation(s: &EmbeddedGraph, v: VertexId, i: usize, j: usize, w: VertexId) -> Result<EmbeddedGraph> {
    let r = s.rotation(v).to_vec();
    let d = r.len();
    if i == j || i >= d || j >= d || s.contains_vertex(w) {
        return Err(Error::InvalidSplit(format!("bad split positions {i},{j} at {v}")));
    }
    let arc1: Vec<VertexId> = (0..=(j + d - i) % d).map(|k| r[(i + k) % d]).collect();
    let arc2: Vec<VertexId> = (0..=(i + d - j) % d).map(|k| r[(j + k) % d]).collect();
    let (a, b) = (r[i], r[j]);
    let (before_a, after_b) = (r[(i + d - 1) % d], r[(j + 1) % d]);
    let mut rot = s.rotations().clone();
    for &x in &arc2[1..arc2.len() - 1] {
        for y in rot.get_mut(&x).expect("neighbour").iter_mut() {
            if *y == v {
                *y = w;
            }
        }
    }
    insert_between(rot.get_mut(&a).expect("a"), v, before_a, w);
    insert_between(rot.get_mut(&b).expect("b"), v, after_b, w);
    let mut rv = arc1;
    rv.push(w);
    let mut rw = arc2;
    rw.push(v);
    rot.insert(v, rv);
    rot.insert(w, rw);
    EmbeddedGraph::new(rot)
}

fn insert_between(rot: &mut Vec<VertexId>, p: VertexId, q: VertexId, w: VertexId) {
    let n = rot.len();
    let pi = rot.iter().position(|&x| x == p).expect("p present");
    let qi = rot.iter().position(|&x| x == q).expect("q present");
    if (pi + 1) % n == qi {
        rot.insert(pi + 1, w);
    } else {
        debug_assert_eq!((qi + 1) % n, pi);
        rot.insert(qi + 1, w);
    }
}

/// Random triangulated sphere on `n >= 4` vertices grown from K4 by planar
/// vertex splits. Vertex ids are `0..n`.
pub fn random_triangulated_sphere(n: usize, seed: u64) -> Result<EmbeddedGraph> {
    if n < 4 {
        return Err(Error::TooSmall { actual: n, required: 4 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = k4();
    for w in 4..n as VertexId {
        let v = rng.gen_range(0..w);
        let d = s.rotation(v).len();
        let i = rng.gen_range(0..d);
        let j = (i + rng.gen_range(1..d)) % d;
        s = split_triangulation(&s, v, i, j, w)?;
    }
    Ok(s)
}

/// A union of sphere triangles forming a disc with boundary length at least 4.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialDisc {
    faces: BTreeSet<Vec<VertexId>>,
    /// Boundary walk traced on the side of the disc.
    boundary: Vec<VertexId>,
    edge_interior: BTreeSet<Edge>,
    interior_vertices: BTreeSet<VertexId>,
}

impl SimplicialDisc {
    pub fn new(s: &EmbeddedGraph, faces: &[Vec<VertexId>]) -> Result<Self> {
        let disc = SimplicialDisc::validate(s, faces)?;
        if disc.boundary.len() < 4 {
            return Err(Error::NotADisc(format!("boundary {:?} is shorter than 4", disc.boundary)));
        }
        Ok(disc)
    }

    /// Disc check without the boundary length bound.
    fn validate(s: &EmbeddedGraph, faces: &[Vec<VertexId>]) -> Result<Self> {
        let all: BTreeSet<Vec<VertexId>> = s.trace_faces().into_iter().collect();
        let mut set = BTreeSet::new();
        for f in faces {
            let c = canonical_walk(f);
            if c.len() != 3 || !all.contains(&c) {
                return Err(Error::NotADisc(format!("{f:?} is not a triangle of the sphere")));
            }
            set.insert(c);
        }
        if set.is_empty() || set.len() == all.len() {
            return Err(Error::NotADisc("empty or whole sphere".into()));
        }
        let darts: BTreeSet<Dart> = set
            .iter()
            .flat_map(|f| (0..3).map(move |k| (f[k], f[(k + 1) % 3])))
            .collect();
        let mut succ: BTreeMap<VertexId, VertexId> = BTreeMap::new();
        let mut edge_interior = BTreeSet::new();
        for &(u, v) in &darts {
            if darts.contains(&(v, u)) {
                edge_interior.insert(edge(u, v));
            } else if succ.insert(u, v).is_some() {
                return Err(Error::NotADisc(format!("boundary pinches at {u}")));
            }
        }
        let start = *succ.keys().next().ok_or_else(|| Error::NotADisc("no boundary".into()))?;
        let mut boundary = vec![start];
        let mut cur = succ[&start];
        while cur != start {
            boundary.push(cur);
            cur = *succ.get(&cur).ok_or_else(|| Error::NotADisc("open boundary".into()))?;
        }
        if boundary.len() != succ.len() {
            return Err(Error::NotADisc("boundary has several components".into()));
        }
        let vertices: BTreeSet<VertexId> = set.iter().flatten().copied().collect();
        let edges = edge_interior.len() + boundary.len();
        if vertices.len() as i64 - edges as i64 + set.len() as i64 != 1 {
            return Err(Error::NotADisc("Euler characteristic is not 1".into()));
        }
        let on_boundary: BTreeSet<VertexId> = boundary.iter().copied().collect();
        let interior_vertices = vertices.difference(&on_boundary).copied().collect();
        Ok(SimplicialDisc {
            faces: set,
            boundary,
            edge_interior,
            interior_vertices,
        })
    }

    pub fn faces(&self) -> &BTreeSet<Vec<VertexId>> {
        &self.faces
    }

    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    pub fn edge_interior(&self) -> &BTreeSet<Edge> {
        &self.edge_interior
    }

    pub fn interior_vertices(&self) -> &BTreeSet<VertexId> {
        &self.interior_vertices
    }

    fn boundary_dart(&self) -> Dart {
        (self.boundary[0], self.boundary[1])
    }
}

/// Removes the edge interiors of the discs and labels the new faces.
pub fn carve_face_graph(s: &EmbeddedGraph, discs: &[SimplicialDisc], labels: &[Label]) -> Result<FaceGraph> {
    if discs.len() != labels.len() {
        return Err(Error::InvalidParameter(format!(
            "{} discs but {} labels",
            discs.len(),
            labels.len()
        )));
    }
    let mut faces = BTreeSet::new();
    let mut drop = BTreeSet::new();
    let mut interior = BTreeSet::new();
    for d in discs {
        for f in &d.faces {
            if !faces.insert(f.clone()) {
                return Err(Error::OverlappingDiscs(f.clone()));
            }
        }
        for &e in &d.edge_interior {
            if !drop.insert(e) {
                return Err(Error::OverlappingDiscs(vec![e.0, e.1]));
            }
        }
        interior.extend(d.interior_vertices.iter().copied());
    }
    let keep: BTreeSet<VertexId> = s.vertices().filter(|v| !interior.contains(v)).collect();
    let emb = EmbeddedGraph::new(s.restrict(&keep, &drop).rotations().clone())?;
    let darts: Vec<(Dart, Label)> = discs.iter().map(|d| d.boundary_dart()).zip(labels.iter().copied()).collect();
    FaceGraph::from_darts(emb, &darts, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockKind {
    Discus,
    DoubleDisc,
    Custom,
}

/// An isostatic block glued onto the boundary of a `B` face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub face: usize,
    pub kind: BlockKind,
    /// Block graph on the face graph's id space: boundary vertices keep their ids.
    pub graph: Graph,
}

impl Block {
    /// Block vertices not on the attached boundary.
    pub fn private_vertices(&self, fg: &FaceGraph) -> BTreeSet<VertexId> {
        let b = fg.boundary_set(self.face);
        self.graph.vertices().filter(|v| !b.contains(v)).collect()
    }

    /// Block edges other than the boundary cycle.
    pub fn extra_edges(&self, fg: &FaceGraph) -> Vec<Edge> {
        let cycle = boundary_edges(fg.boundary(self.face));
        self.graph.edges().filter(|e| !cycle.contains(e)).collect()
    }
}

/// Relabels a block given with its own ids. `attachment` maps block ids to
/// face-graph ids; every other block vertex gets a fresh id from `next_free` upwards.
pub fn attach_block(
    face: usize,
    kind: BlockKind,
    local: &Graph,
    attachment: &BTreeMap<VertexId, VertexId>,
    next_free: &mut VertexId,
) -> Result<Block> {
    let mut map = BTreeMap::new();
    for v in local.vertices() {
        let id = match attachment.get(&v) {
            Some(&g) => g,
            None => {
                let id = *next_free;
                *next_free += 1;
                id
            }
        };
        map.insert(v, id);
    }
    let mut graph = Graph::new();
    for v in local.vertices() {
        graph.add_vertex(map[&v]);
    }
    for (u, v) in local.edges() {
        graph.add_edge(map[&u], map[&v])?;
    }
    Ok(Block { face, kind, graph })
}

fn boundary_edges(b: &[VertexId]) -> BTreeSet<Edge> {
    (0..b.len()).map(|i| edge(b[i], b[(i + 1) % b.len()])).collect()
}

/// Whether custom blocks are checked for minimal 3-rigidity on construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Certify {
    /// Run the rank test on custom blocks.
    Rank,
    /// Trust the caller.
    Trusted,
}

/// A face graph together with one block per `B` face.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockHoleGraph {
    base: FaceGraph,
    blocks: Vec<Block>,
    union: Graph,
}

impl BlockHoleGraph {
    pub fn new(base: FaceGraph, mut blocks: Vec<Block>, certify: Certify) -> Result<Self> {
        blocks.sort_by_key(|b| b.face);
        let b_faces = base.faces_with_label(Label::B);
        if blocks.iter().map(|b| b.face).collect::<Vec<_>>() != b_faces {
            return Err(Error::InvalidParameter("need exactly one block per B face".into()));
        }
        let g = base.graph();
        let mut union = g.clone();
        let mut private_seen = BTreeSet::new();
        let mut parallel = Vec::new();
        for block in &blocks {
            let boundary = base.boundary_set(block.face);
            let cycle = boundary_edges(base.boundary(block.face));
            let mismatch = || Error::AttachmentMismatch(base.boundary(block.face).to_vec());
            let shared: BTreeSet<VertexId> = block.graph.vertices().filter(|&v| g.contains_vertex(v)).collect();
            if shared != boundary || !cycle.iter().all(|&(u, v)| block.graph.has_edge(u, v)) {
                return Err(mismatch());
            }
            for v in block.private_vertices(&base) {
                if !private_seen.insert(v) {
                    return Err(Error::InvalidParameter(format!("vertex {v} is private to two blocks")));
                }
            }
            for e in block.extra_edges(&base) {
                if union.has_edge(e.0, e.1) {
                    parallel.push(e);
                } else {
                    union.add_edge(e.0, e.1)?;
                }
            }
            for v in block.graph.vertices() {
                union.add_vertex(v);
            }
            if block.kind == BlockKind::Custom && certify == Certify::Rank {
                let report = is_minimally_3_rigid(&block.graph);
                if !report.is_isostatic() {
                    return Err(Error::NonIsostaticBlock(format!(
                        "block on face {:?}: rank {} of {}",
                        base.boundary(block.face),
                        report.max_rank,
                        report.target
                    )));
                }
            }
        }
        if !parallel.is_empty() {
            return Err(Error::Multigraph(parallel));
        }
        Ok(BlockHoleGraph { base, blocks, union })
    }

    pub fn base(&self) -> &FaceGraph {
        &self.base
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    /// The abstract graph `G ∪ blocks`.
    pub fn graph(&self) -> &Graph {
        &self.union
    }
}

/// Pole ids of the discus over the `i`-th `B` face.
pub fn pole_ids(i: usize) -> (VertexId, VertexId) {
    let base = POLE_BASE + 2 * i as VertexId;
    (base, base + 1)
}

pub fn discus_block(fg: &FaceGraph, face: usize, ordinal: usize) -> Block {
    let (x, y) = pole_ids(ordinal);
    let b = fg.boundary(face);
    let mut graph = Graph::new();
    for (u, v) in boundary_edges(b) {
        graph.add_edge(u, v).expect("proper cycle");
    }
    for &v in b {
        graph.add_edge(x, v).expect("pole differs");
        graph.add_edge(y, v).expect("pole differs");
    }
    Block {
        face,
        kind: BlockKind::Discus,
        graph,
    }
}

/// `G†`: a discus on every `B` face.
pub fn discus_and_hole(fg: &FaceGraph) -> BlockHoleGraph {
    let blocks = fg
        .faces_with_label(Label::B)
        .into_iter()
        .enumerate()
        .map(|(i, f)| discus_block(fg, f, i))
        .collect();
    BlockHoleGraph::new(fg.clone(), blocks, Certify::Trusted).expect("discus blocks always attach")
}

/// Feasibility table for triangulating the polygon `0..r` with allowed diagonals.
struct PolygonTriangulator<'a> {
    r: usize,
    allowed: &'a dyn Fn(usize, usize) -> bool,
    feasible: Vec<Vec<bool>>,
}

impl<'a> PolygonTriangulator<'a> {
    fn new(r: usize, allowed: &'a dyn Fn(usize, usize) -> bool) -> Self {
        let mut t = PolygonTriangulator {
            r,
            allowed,
            feasible: vec![vec![false; r]; r],
        };
        for len in 1..r {
            for i in 0..r - len {
                let j = i + len;
                t.feasible[i][j] = len == 1 || (i + 1..j).any(|k| t.split_ok(i, k, j));
            }
        }
        t
    }

    fn side_ok(&self, a: usize, b: usize) -> bool {
        b - a == 1 || (a == 0 && b == self.r - 1) || (self.allowed)(a, b)
    }

    fn split_ok(&self, i: usize, k: usize, j: usize) -> bool {
        self.side_ok(i, k) && self.side_ok(k, j) && self.feasible[i][k] && self.feasible[k][j]
    }

    fn possible(&self) -> bool {
        self.feasible[0][self.r - 1]
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut stack = vec![(0, self.r - 1)];
        while let Some((i, j)) = stack.pop() {
            if j - i < 2 {
                continue;
            }
            let ks: Vec<usize> = (i + 1..j).filter(|&k| self.split_ok(i, k, j)).collect();
            let k = *ks.choose(rng).expect("feasible interval");
            for (a, b) in [(i, k), (k, j)] {
                if b - a > 1 {
                    out.push((a, b));
                }
                stack.push((a, b));
            }
        }
        out.sort();
        out
    }

    fn all(&self, i: usize, j: usize) -> Vec<Vec<(usize, usize)>> {
        if j - i < 2 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for k in (i + 1..j).filter(|&k| self.split_ok(i, k, j)) {
            for left in self.all(i, k) {
                for right in self.all(k, j) {
                    let mut t = left.clone();
                    t.extend(right.iter().copied());
                    for (a, b) in [(i, k), (k, j)] {
                        if b - a > 1 {
                            t.push((a, b));
                        }
                    }
                    t.sort();
                    out.push(t);
                }
            }
        }
        out
    }
}

/// Exhaustive search is used for polygons up to this length.
const EXHAUSTIVE_POLYGON: usize = 10;
const RANDOM_POLYGON_ATTEMPTS: usize = 64;

/// Two triangulations of the polygon `b` with disjoint diagonal sets, none in `forbidden`.
fn double_disc_diagonals<R: Rng>(b: &[VertexId], forbidden: &BTreeSet<Edge>, rng: &mut R) -> Option<Vec<Edge>> {
    let r = b.len();
    let diag = |a: usize, c: usize| edge(b[a], b[c]);
    let first_ok = |a: usize, c: usize| !forbidden.contains(&diag(a, c));
    let t1 = PolygonTriangulator::new(r, &first_ok);
    if !t1.possible() {
        return None;
    }
    let try_second = |t: &[(usize, usize)], rng: &mut R| {
        let used: BTreeSet<(usize, usize)> = t.iter().copied().collect();
        let second_ok = |a: usize, c: usize| first_ok(a, c) && !used.contains(&(a, c));
        let t2 = PolygonTriangulator::new(r, &second_ok);
        t2.possible().then(|| {
            let mut d: Vec<Edge> = t.iter().chain(&t2.sample(rng)).map(|&(a, c)| diag(a, c)).collect();
            d.sort();
            d
        })
    };
    for _ in 0..RANDOM_POLYGON_ATTEMPTS {
        let t = t1.sample(rng);
        if let Some(d) = try_second(&t, rng) {
            return Some(d);
        }
    }
    if r <= EXHAUSTIVE_POLYGON {
        let mut all = t1.all(0, r - 1);
        all.shuffle(rng);
        for t in all {
            if let Some(d) = try_second(&t, rng) {
                return Some(d);
            }
        }
    }
    None
}

/// `G°`: every `B` face filled by two triangulated discs on its boundary.
///
/// Diagonals avoid edges of `G` and diagonals of earlier blocks; when no
/// choice exists the result would be a multigraph and the blocking edges
/// are reported.
pub fn double_disc_blocks(fg: &FaceGraph, seed: u64) -> Result<BlockHoleGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = fg.graph();
    let b_faces = fg.faces_with_label(Label::B);
    let mut forbidden: BTreeSet<Edge> = g.edges().collect();
    let mut blocks = Vec::new();
    for &f in &b_faces {
        let b = fg.boundary(f);
        // Prefer diagonals whose endpoints are not both on another B face:
        // such a pair is where two blocks would over-brace each other.
        let mut avoid = forbidden.clone();
        for &other in b_faces.iter().filter(|&&o| o != f) {
            let ob = fg.boundary_set(other);
            for (i, &u) in b.iter().enumerate() {
                for &v in &b[i + 1..] {
                    if ob.contains(&u) && ob.contains(&v) {
                        avoid.insert(edge(u, v));
                    }
                }
            }
        }
        let found = double_disc_diagonals(b, &avoid, &mut rng).or_else(|| double_disc_diagonals(b, &forbidden, &mut rng));
        let Some(diagonals) = found else {
            let cycle = boundary_edges(b);
            let mut witnesses: Vec<Edge> = forbidden
                .iter()
                .copied()
                .filter(|&(u, v)| b.contains(&u) && b.contains(&v) && !cycle.contains(&(u, v)))
                .collect();
            witnesses.sort();
            return Err(Error::Multigraph(witnesses));
        };
        let mut graph = Graph::new();
        for (u, v) in boundary_edges(b).into_iter().chain(diagonals.iter().copied()) {
            graph.add_edge(u, v)?;
        }
        forbidden.extend(diagonals);
        blocks.push(Block {
            face: f,
            kind: BlockKind::DoubleDisc,
            graph,
        });
    }
    BlockHoleGraph::new(fg.clone(), blocks, Certify::Trusted)
}

/// How [`substitute_block`] treats replacement edges between boundary vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChordPolicy {
    /// Every replacement edge joining two boundary vertices must already be in `G`.
    Strict,
    /// Such edges are allowed; only the freedom number is guaranteed to be preserved.
    MaxwellOnly,
}

/// Replaces block `i` by `replacement`, which must attach along the same boundary.
pub fn substitute_block(
    bh: &BlockHoleGraph,
    i: usize,
    replacement: &Graph,
    policy: ChordPolicy,
) -> Result<BlockHoleGraph> {
    let old = bh
        .blocks
        .get(i)
        .ok_or_else(|| Error::InvalidParameter(format!("no block {i}")))?;
    let fg = &bh.base;
    let boundary = fg.boundary_set(old.face);
    let g = fg.graph();
    let shared: BTreeSet<VertexId> = replacement.vertices().filter(|&v| g.contains_vertex(v)).collect();
    if shared != boundary {
        return Err(Error::AttachmentMismatch(fg.boundary(old.face).to_vec()));
    }
    if policy == ChordPolicy::Strict {
        if let Some(e) = replacement
            .edges()
            .find(|&(u, v)| boundary.contains(&u) && boundary.contains(&v) && !g.has_edge(u, v))
        {
            return Err(Error::ChordViolation(e));
        }
    }
    if !is_36_tight(replacement) {
        return Err(Error::NonIsostaticBlock("replacement is not (3,6)-tight".into()));
    }
    let mut blocks = bh.blocks.clone();
    blocks[i] = Block {
        face: old.face,
        kind: BlockKind::Custom,
        graph: replacement.clone(),
    };
    BlockHoleGraph::new(fg.clone(), blocks, Certify::Rank)
}

/// Swaps `B` and `H` labels.
pub fn transpose_labels(fg: &FaceGraph) -> FaceGraph {
    fg.transpose_labels()
}

/// Parameters for [`random_face_graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceGraphParams {
    /// Vertices of the underlying sphere (at least 4).
    pub sphere_vertices: usize,
    pub blocks: usize,
    pub holes: usize,
    /// Aim for index zero: the `B` boundary excesses sum to the `H` ones.
    pub balanced: bool,
    /// Upper bound on the number of triangles merged into one disc.
    pub max_disc_faces: usize,
}

impl FaceGraphParams {
    pub fn new(sphere_vertices: usize, blocks: usize, holes: usize) -> Self {
        FaceGraphParams {
            sphere_vertices,
            blocks,
            holes,
            balanced: true,
            max_disc_faces: 2 * sphere_vertices / (blocks + holes).max(1),
        }
    }
}

const DISC_ATTEMPTS: usize = 40;
const FACE_GRAPH_ATTEMPTS: usize = 20;

struct DiscGrower<'a> {
    s: &'a EmbeddedGraph,
    faces: Vec<Vec<VertexId>>,
    face_of_dart: BTreeMap<Dart, usize>,
    used: BTreeSet<usize>,
}

impl<'a> DiscGrower<'a> {
    fn new(s: &'a EmbeddedGraph) -> Self {
        let faces = s.trace_faces();
        let mut face_of_dart = BTreeMap::new();
        for (i, f) in faces.iter().enumerate() {
            for k in 0..3 {
                face_of_dart.insert((f[k], f[(k + 1) % 3]), i);
            }
        }
        DiscGrower {
            s,
            faces,
            face_of_dart,
            used: BTreeSet::new(),
        }
    }

    fn neighbours(&self, region: &BTreeSet<usize>) -> Vec<usize> {
        let mut out = BTreeSet::new();
        for &f in region {
            let w = &self.faces[f];
            for k in 0..3 {
                let g = self.face_of_dart[&(w[(k + 1) % 3], w[k])];
                if !region.contains(&g) && !self.used.contains(&g) {
                    out.insert(g);
                }
            }
        }
        out.into_iter().collect()
    }

    fn disc(&self, region: &BTreeSet<usize>) -> Option<SimplicialDisc> {
        let faces: Vec<Vec<VertexId>> = region.iter().map(|&f| self.faces[f].clone()).collect();
        SimplicialDisc::validate(self.s, &faces).ok()
    }

    /// Grows one disc; `target_len` pins the boundary length when given.
    fn grow<R: Rng>(&mut self, rng: &mut R, area: usize, target_len: Option<usize>) -> Option<SimplicialDisc> {
        let free: Vec<usize> = (0..self.faces.len()).filter(|f| !self.used.contains(f)).collect();
        let &start = free.choose(rng)?;
        let mut region = BTreeSet::from([start]);
        let mut disc = self.disc(&region)?;
        for _ in 0..4 * self.faces.len() {
            let len = disc.boundary.len();
            let done = match target_len {
                Some(t) => len == t && region.len() >= area,
                None => len >= 4 && region.len() >= area,
            };
            if done {
                self.used.extend(region.iter().copied());
                return Some(disc);
            }
            let mut candidates = self.neighbours(&region);
            candidates.shuffle(rng);
            let mut next = None;
            for f in candidates {
                let mut trial = region.clone();
                trial.insert(f);
                let Some(d) = self.disc(&trial) else { continue };
                let approaching = match target_len {
                    Some(t) if region.len() >= area => d.boundary.len().abs_diff(t) < len.abs_diff(t),
                    _ => true,
                };
                if approaching {
                    next = Some((trial, d));
                    break;
                }
            }
            let (r, d) = next?;
            region = r;
            disc = d;
        }
        None
    }
}

/// Random face graph of type `(blocks, holes)` carved from a random sphere.
///
/// Holes are grown first; in balanced mode the blocks then get boundary
/// lengths whose excesses over 3 sum to the holes' total. Returns `None`
/// when the attempts run out, which happens when the sphere is too small
/// for the requested discs.
pub fn random_face_graph(params: &FaceGraphParams, seed: u64) -> Result<Option<FaceGraph>> {
    if params.sphere_vertices < 4 {
        return Err(Error::TooSmall {
            actual: params.sphere_vertices,
            required: 4,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = random_triangulated_sphere(params.sphere_vertices, rng.gen())?;
    let max_area = params.max_disc_faces.max(2);
    'attempt: for _ in 0..FACE_GRAPH_ATTEMPTS {
        let mut grower = DiscGrower::new(&s);
        let mut discs = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..params.holes {
            let area = rng.gen_range(2..=max_area);
            let Some(d) = (0..DISC_ATTEMPTS).find_map(|_| grower.grow(&mut rng, area, None)) else {
                continue 'attempt;
            };
            discs.push(d);
            labels.push(Label::H);
        }
        let hole_excess: usize = discs.iter().map(|d| d.boundary.len() - 3).sum();
        let targets: Vec<Option<usize>> = if params.balanced && params.blocks > 0 {
            if hole_excess < params.blocks {
                continue 'attempt;
            }
            split_excess(hole_excess, params.blocks, &mut rng)
                .into_iter()
                .map(|e| Some(e + 3))
                .collect()
        } else {
            vec![None; params.blocks]
        };
        for t in targets {
            let area = rng.gen_range(2..=max_area);
            let Some(d) = (0..DISC_ATTEMPTS).find_map(|_| grower.grow(&mut rng, area, t)) else {
                continue 'attempt;
            };
            discs.push(d);
            labels.push(Label::B);
        }
        match carve_face_graph(&s, &discs, &labels) {
            Ok(fg) => return Ok(Some(fg)),
            Err(_) => continue 'attempt,
        }
    }
    Ok(None)
}

/// Random composition of `total` into `parts` positive summands.
fn split_excess<R: Rng>(total: usize, parts: usize, rng: &mut R) -> Vec<usize> {
    let mut cuts: Vec<usize> = (1..total).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain([total]) {
        out.push(c - prev);
        prev = c;
    }
    out
}

/// Instance `k` of the seeded single-block corpus: type `(1, n)` with
/// `n` in `1..=3` on at most `max_vertices` face-graph vertices.
pub fn single_block_instance(seed: u64, k: u64, max_vertices: usize) -> Option<FaceGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ k.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    for _ in 0..FACE_GRAPH_ATTEMPTS {
        let n = rng.gen_range(7..=max_vertices.max(7));
        let holes = rng.gen_range(1..=3);
        let mut params = FaceGraphParams::new(n, 1, holes);
        params.balanced = rng.gen_bool(0.85);
        if let Ok(Some(fg)) = random_face_graph(&params, rng.gen()) {
            if fg.num_vertices() <= max_vertices && fg.face_type() == (1, holes) {
                return Some(fg);
            }
        }
    }
    None
}

/// Seeded draws per tight corpus instance.
pub const TIGHT_DRAWS: u64 = 200;

/// Like [`single_block_instance`] but keeps the first draw whose `G†` is
/// (3,6)-tight.
pub fn tight_single_block_instance(seed: u64, k: u64, max_vertices: usize) -> Option<FaceGraph> {
    (0..TIGHT_DRAWS)
        .filter_map(|j| single_block_instance(seed ^ 0x5eed_0000_0000 ^ j, k, max_vertices))
        .find(|fg| is_36_tight(discus_and_hole(fg).graph()))
}

/// Hand-built fixtures.
pub mod fixtures {
    use super::*;

    /// The smallest `(1,1)` face graph: a 4-cycle carved from K4, outer face `B`.
    pub fn four_cycle() -> FaceGraph {
        let s = k4();
        let d1 = SimplicialDisc::new(&s, &faces_on_edge(&s, 0, 2)).expect("disc");
        let d2 = SimplicialDisc::new(&s, &faces_on_edge(&s, 1, 3)).expect("disc");
        carve_face_graph(&s, &[d1, d2], &[Label::B, Label::H]).expect("fixture")
    }

    /// Triangular faces containing the edge `u-v`.
    pub fn faces_on_edge(s: &EmbeddedGraph, u: VertexId, v: VertexId) -> Vec<Vec<VertexId>> {
        s.trace_faces()
            .into_iter()
            .filter(|f| f.contains(&u) && f.contains(&v))
            .collect()
    }

    /// `(1,2)`: pentagon `B` around a vertex `5` joined to `0, 2, 4`; two
    /// quadrilateral holes and one triangle. Index zero and tight.
    pub fn pentagon_two_holes() -> FaceGraph {
        let emb = EmbeddedGraph::from_faces(&[
            vec![0, 4, 3, 2, 1],
            vec![0, 1, 2, 5],
            vec![2, 3, 4, 5],
            vec![4, 0, 5],
        ])
        .expect("fixture");
        FaceGraph::from_boundaries(
            emb,
            &[
                (vec![0, 4, 3, 2, 1], Label::B),
                (vec![0, 1, 2, 5], Label::H),
                (vec![2, 3, 4, 5], Label::H),
            ],
            Some(&[0, 4, 3, 2, 1]),
        )
        .expect("fixture")
    }

    /// `(1,1)` with a pentagonal block and a quadrilateral hole cut off by the
    /// chord `0-3`; index 1.
    pub fn imbalanced_pentagon() -> FaceGraph {
        let emb = EmbeddedGraph::from_faces(&[vec![0, 4, 3, 2, 1], vec![0, 1, 2, 3], vec![3, 4, 0]]).expect("fixture");
        FaceGraph::from_boundaries(
            emb,
            &[(vec![0, 4, 3, 2, 1], Label::B), (vec![0, 1, 2, 3], Label::H)],
            Some(&[0, 4, 3, 2, 1]),
        )
        .expect("fixture")
    }

    /// `(1,2)`: hexagonal block split by the chord `0-3` into two quadrilateral holes.
    pub fn chorded_hexagon() -> FaceGraph {
        let emb = EmbeddedGraph::from_faces(&[vec![0, 5, 4, 3, 2, 1], vec![0, 1, 2, 3], vec![3, 4, 5, 0]])
            .expect("fixture");
        FaceGraph::from_boundaries(
            emb,
            &[
                (vec![0, 5, 4, 3, 2, 1], Label::B),
                (vec![0, 1, 2, 3], Label::H),
                (vec![3, 4, 5, 0], Label::H),
            ],
            Some(&[0, 5, 4, 3, 2, 1]),
        )
        .expect("fixture")
    }

    /// Two copies of K5 minus an edge sharing the endpoints `0, 1` of the missing edge.
    pub fn double_banana() -> Graph {
        let mut g = Graph::new();
        for side in [[2, 3, 4], [5, 6, 7]] {
            let verts = [0, 1, side[0], side[1], side[2]];
            for (i, &a) in verts.iter().enumerate() {
                for &b in &verts[i + 1..] {
                    if (a, b) != (0, 1) {
                        g.add_edge(a, b).expect("distinct");
                    }
                }
            }
        }
        g
    }

    /// `(2,2)`: the octahedron on poles `0, 1` and equator `2, 3, 4, 5` with
    /// the equator removed; the four quadrilaterals alternate `B, H, B, H`.
    /// Its discus-and-hole graph is two octahedra sharing two vertices.
    pub fn double_banana_face_graph() -> FaceGraph {
        let quads = [[0, 2, 1, 3], [0, 3, 1, 4], [0, 4, 1, 5], [0, 5, 1, 2]];
        let emb = EmbeddedGraph::from_faces(&quads.map(|q| q.to_vec())).expect("fixture");
        let labels = [Label::B, Label::H, Label::B, Label::H];
        FaceGraph::from_boundaries(
            emb,
            &quads.iter().zip(labels).map(|(q, l)| (q.to_vec(), l)).collect::<Vec<_>>(),
            Some(&quads[0]),
        )
        .expect("fixture")
    }

    /// `(2,2)` face graph on ten vertices whose `G°` is (3,6)-tight and
    /// satisfies the girth and separation conditions, yet is flexible:
    /// deleting the degree-3 vertices `8, 9` leaves two blocks sharing only `0, 1`.
    pub fn two_block_counterexample() -> FaceGraph {
        // x=0 y=1 a1=2 a2=3 a3=4 c1=5 c2=6 c3=7 v=8 w=9
        let b1 = vec![0, 2, 1, 3, 4];
        let b2 = vec![0, 7, 6, 1, 5];
        let h1 = vec![0, 5, 1, 8];
        let h2 = vec![4, 3, 1, 6, 7, 9];
        let emb = EmbeddedGraph::from_faces(&[
            b1.clone(),
            b2.clone(),
            h1.clone(),
            h2.clone(),
            vec![2, 0, 8],
            vec![1, 2, 8],
            vec![0, 4, 9],
            vec![0, 9, 7],
        ])
        .expect("fixture");
        FaceGraph::from_boundaries(
            emb,
            &[(b1.clone(), Label::B), (b2, Label::B), (h1, Label::H), (h2, Label::H)],
            Some(&b1),
        )
        .expect("fixture")
    }
}
