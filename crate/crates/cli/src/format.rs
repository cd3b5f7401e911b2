//! Versioned JSON formats for face graphs and reduction certificates.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rigidlab::constructions::{attach_block, BlockHoleGraph, BlockKind, Certify};
use rigidlab::reduction::{ReductionTree, Step};
use rigidlab::{Edge, EmbeddedGraph, FaceGraph, Graph, Label, ProperCycle, VertexId, POLE_BASE};

pub const GRAPH_FORMAT: &str = "rigidlab/1";
pub const CERT_FORMAT: &str = "rigidlab-cert/1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format {found:?}, expected {expected:?}")]
    Version { found: String, expected: &'static str },
    #[error("vertex list does not match rotation keys")]
    VertexMismatch,
    #[error("vertex id {0} is in the range reserved for discus poles")]
    ReservedId(VertexId),
    #[error("block face {0:?} is not a B face of the graph")]
    NoBlockFace(Vec<VertexId>),
    #[error(transparent)]
    Graph(#[from] rigidlab::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceSpec {
    pub boundary: Vec<VertexId>,
    pub label: Label,
}

/// A block given on its own ids; `attachment` maps block ids onto boundary ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub face: Vec<VertexId>,
    pub edges: Vec<Edge>,
    pub attachment: BTreeMap<VertexId, VertexId>,
}

/// On-disk face graph. The rotation lists each vertex's neighbours in
/// counter-clockwise order and fully determines the embedding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub format: String,
    pub vertices: Vec<VertexId>,
    pub rotation: BTreeMap<VertexId, Vec<VertexId>>,
    pub outer_face: Vec<VertexId>,
    pub faces: Vec<FaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<BlockSpec>>,
}

/// A parsed graph file: the face graph and, if present, its explicit blocks.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub face_graph: FaceGraph,
    pub block_hole: Option<BlockHoleGraph>,
}

impl GraphFile {
    pub fn from_face_graph(fg: &FaceGraph) -> Self {
        let emb = fg.embedding();
        let faces = fg
            .labelled_faces()
            .into_iter()
            .map(|f| FaceSpec {
                boundary: fg.boundary(f).to_vec(),
                label: fg.label(f).expect("labelled"),
            })
            .collect();
        GraphFile {
            format: GRAPH_FORMAT.into(),
            vertices: emb.vertices().collect(),
            rotation: emb.rotations().clone(),
            outer_face: fg.boundary(fg.outer_face()).to_vec(),
            faces,
            blocks: None,
        }
    }

    /// Blocks are written on face-graph ids with the identity attachment.
    pub fn from_block_hole(bh: &BlockHoleGraph) -> Self {
        let fg = bh.base();
        let mut file = GraphFile::from_face_graph(fg);
        let blocks = bh
            .blocks()
            .iter()
            .map(|b| BlockSpec {
                face: fg.boundary(b.face).to_vec(),
                edges: b.graph.edges().collect(),
                attachment: fg.boundary(b.face).iter().map(|&v| (v, v)).collect(),
            })
            .collect();
        file.blocks = Some(blocks);
        file
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let file: GraphFile = serde_json::from_str(text)?;
        if file.format != GRAPH_FORMAT {
            return Err(FormatError::Version {
                found: file.format,
                expected: GRAPH_FORMAT,
            });
        }
        Ok(file)
    }

    pub fn load(&self) -> Result<Loaded, FormatError> {
        let keys: Vec<VertexId> = self.rotation.keys().copied().collect();
        let mut listed = self.vertices.clone();
        listed.sort_unstable();
        if listed != keys {
            return Err(FormatError::VertexMismatch);
        }
        if let Some(&v) = keys.iter().find(|&&v| v >= POLE_BASE) {
            return Err(FormatError::ReservedId(v));
        }
        let emb = EmbeddedGraph::new(self.rotation.clone())?;
        let labelled: Vec<(Vec<VertexId>, Label)> = self.faces.iter().map(|f| (f.boundary.clone(), f.label)).collect();
        let fg = FaceGraph::from_boundaries(emb, &labelled, Some(&self.outer_face))?;
        let block_hole = match &self.blocks {
            None => None,
            Some(specs) => Some(attach_blocks(&fg, specs)?),
        };
        Ok(Loaded {
            face_graph: fg,
            block_hole,
        })
    }

    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

fn attach_blocks(fg: &FaceGraph, specs: &[BlockSpec]) -> Result<BlockHoleGraph, FormatError> {
    let mut next_free = fg.embedding().vertices().max().map_or(0, |v| v + 1);
    let mut blocks = Vec::new();
    for spec in specs {
        let want: BTreeSet<VertexId> = spec.face.iter().copied().collect();
        let face = fg
            .faces_with_label(Label::B)
            .into_iter()
            .find(|&f| fg.boundary_set(f) == want)
            .ok_or_else(|| FormatError::NoBlockFace(spec.face.clone()))?;
        let local = Graph::from_edges(spec.edges.iter().copied())?;
        blocks.push(attach_block(face, BlockKind::Custom, &local, &spec.attachment, &mut next_free)?);
    }
    Ok(BlockHoleGraph::new(fg.clone(), blocks, Certify::Rank)?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Digest of the compact serialization of a face graph without blocks.
pub fn digest(fg: &FaceGraph) -> String {
    let bytes = serde_json::to_vec(&GraphFile::from_face_graph(fg)).expect("serializable");
    sha256_hex(&bytes)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CertStep {
    TtContraction { edge: Edge },
    BhContraction { edge: Edge },
    Division { cycle: Vec<VertexId> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertInner {
    pub node: usize,
    #[serde(flatten)]
    pub step: CertStep,
    pub children: Vec<usize>,
    pub child_digests: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertLeaf {
    pub node: usize,
    pub gluck: Vec<Edge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub format: String,
    pub root: String,
    pub steps: Vec<CertInner>,
    pub leaves: Vec<CertLeaf>,
    pub transposed: bool,
}

/// Why a certificate could not be accepted.
#[derive(Debug, thiserror::Error)]
pub enum CertError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("root digest {found} does not match the input ({expected})")]
    RootMismatch { found: String, expected: String },
    #[error("certificate says transposed={cert}, input normalises with transposed={input}")]
    Transposition { cert: bool, input: bool },
    #[error("rejected at node {node}: {reason}")]
    Rejected { node: usize, reason: String },
}

impl CertificateFile {
    pub fn from_tree(tree: &ReductionTree) -> Self {
        let digests: Vec<String> = tree.nodes.iter().map(|n| digest(&n.graph)).collect();
        let mut steps = Vec::new();
        let mut leaves = Vec::new();
        for (i, node) in tree.nodes.iter().enumerate() {
            let children = node.step.children();
            let step = match &node.step {
                Step::TtContraction { edge, .. } => CertStep::TtContraction { edge: *edge },
                Step::BhContraction { edge, .. } => CertStep::BhContraction { edge: *edge },
                Step::Division { cycle, .. } => CertStep::Division {
                    cycle: cycle.vertices().to_vec(),
                },
                Step::Leaf { gluck } => {
                    leaves.push(CertLeaf {
                        node: i,
                        gluck: gluck.clone(),
                    });
                    continue;
                }
            };
            steps.push(CertInner {
                node: i,
                step,
                child_digests: children.iter().map(|&c| digests[c].clone()).collect(),
                children,
            });
        }
        CertificateFile {
            format: CERT_FORMAT.into(),
            root: digests[0].clone(),
            steps,
            leaves,
            transposed: tree.transposed,
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let cert: CertificateFile = serde_json::from_str(text)?;
        if cert.format != CERT_FORMAT {
            return Err(FormatError::Version {
                found: cert.format,
                expected: CERT_FORMAT,
            });
        }
        Ok(cert)
    }

    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Rebuilds the tree over `root` (already normalised), re-validating every
    /// step and every recorded digest. Failures name the first bad node.
    pub fn rebuild(&self, root: &FaceGraph, transposed: bool) -> Result<ReductionTree, CertError> {
        let expected = digest(root);
        if self.root != expected {
            return Err(CertError::RootMismatch {
                found: self.root.clone(),
                expected,
            });
        }
        if self.transposed != transposed {
            return Err(CertError::Transposition {
                cert: self.transposed,
                input: transposed,
            });
        }
        let total = self.steps.len() + self.leaves.len();
        let mut slots: Vec<Option<Step>> = vec![None; total];
        let mut place = |node: usize, step: Step| -> Result<(), CertError> {
            let rejected = |reason: &str| CertError::Rejected {
                node,
                reason: reason.into(),
            };
            let slot = slots.get_mut(node).ok_or_else(|| rejected("node index out of range"))?;
            if slot.is_some() {
                return Err(rejected("node listed twice"));
            }
            *slot = Some(step);
            Ok(())
        };
        for s in &self.steps {
            let bad_arity = || CertError::Rejected {
                node: s.node,
                reason: format!("{} children listed", s.children.len()),
            };
            let step = match &s.step {
                CertStep::TtContraction { edge } => Step::TtContraction {
                    edge: *edge,
                    child: *s.children.first().filter(|_| s.children.len() == 1).ok_or_else(bad_arity)?,
                },
                CertStep::BhContraction { edge } => Step::BhContraction {
                    edge: *edge,
                    child: *s.children.first().filter(|_| s.children.len() == 1).ok_or_else(bad_arity)?,
                },
                CertStep::Division { cycle } => {
                    let [exterior, interior] = s.children[..] else {
                        return Err(bad_arity());
                    };
                    let cycle = ProperCycle::new(cycle).map_err(|e| CertError::Rejected {
                        node: s.node,
                        reason: e.to_string(),
                    })?;
                    Step::Division {
                        cycle,
                        exterior,
                        interior,
                    }
                }
            };
            place(s.node, step)?;
        }
        for l in &self.leaves {
            place(l.node, Step::Leaf { gluck: l.gluck.clone() })?;
        }
        let steps = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                s.ok_or_else(|| CertError::Rejected {
                    node: i,
                    reason: "node has no step".into(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tree = ReductionTree::from_steps(root.clone(), &steps, transposed).map_err(|e| match e {
            rigidlab::Error::Rejected { node, reason } => CertError::Rejected { node, reason },
            other => CertError::Rejected {
                node: 0,
                reason: other.to_string(),
            },
        })?;
        for s in &self.steps {
            for (&c, d) in s.children.iter().zip(&s.child_digests) {
                if digest(&tree.nodes[c].graph) != *d {
                    return Err(CertError::Rejected {
                        node: s.node,
                        reason: format!("child {c} digest mismatch"),
                    });
                }
            }
        }
        Ok(tree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rigidlab::constructions::fixtures::{four_cycle, two_block_counterexample};
    use rigidlab::constructions::{double_disc_blocks, tight_single_block_instance};
    use rigidlab::reduction::{reduce_to_tree, Reduction};

    #[test]
    fn graph_file_round_trip() {
        for fg in [four_cycle(), two_block_counterexample()] {
            let file = GraphFile::from_face_graph(&fg);
            let text = file.to_pretty();
            let back = GraphFile::parse(&text).unwrap();
            assert_eq!(back, file);
            let loaded = back.load().unwrap();
            assert_eq!(loaded.face_graph, fg);
            assert_eq!(digest(&loaded.face_graph), digest(&fg));
        }
    }

    #[test]
    fn blocks_round_trip() {
        let bh = double_disc_blocks(&two_block_counterexample(), 0).unwrap();
        let file = GraphFile::from_block_hole(&bh);
        let loaded = GraphFile::parse(&file.to_pretty()).unwrap().load().unwrap();
        assert_eq!(loaded.block_hole.unwrap().graph(), bh.graph());
    }

    #[test]
    fn pole_ids_rejected() {
        let mut file = GraphFile::from_face_graph(&four_cycle());
        let rot = file.rotation.remove(&3).unwrap();
        let big = POLE_BASE + 7;
        for list in file.rotation.values_mut() {
            for v in list.iter_mut().filter(|v| **v == 3) {
                *v = big;
            }
        }
        file.rotation.insert(big, rot);
        file.vertices = file.rotation.keys().copied().collect();
        assert!(matches!(file.load(), Err(FormatError::ReservedId(v)) if v == big));
    }

    #[test]
    fn wrong_version_rejected() {
        let mut file = GraphFile::from_face_graph(&four_cycle());
        file.format = "rigidlab/0".into();
        let err = GraphFile::parse(&serde_json::to_string(&file).unwrap()).unwrap_err();
        assert!(matches!(err, FormatError::Version { .. }));
    }

    #[test]
    fn certificate_round_trip_and_tamper() {
        let fg = tight_single_block_instance(5, 1, 14).unwrap();
        let Reduction::Certified(tree) = reduce_to_tree(&fg).unwrap() else {
            panic!("tight instance refused")
        };
        let cert = CertificateFile::from_tree(&tree);
        let back = CertificateFile::parse(&cert.to_pretty()).unwrap();
        let rebuilt = back.rebuild(tree.root(), tree.transposed).unwrap();
        assert_eq!(rebuilt, tree);

        let Some(k) = cert.steps.iter().position(|s| !matches!(s.step, CertStep::Division { .. })) else {
            return;
        };
        let mut bad = cert.clone();
        match &mut bad.steps[k].step {
            CertStep::TtContraction { edge } | CertStep::BhContraction { edge } => edge.1 += 1000,
            CertStep::Division { .. } => unreachable!(),
        }
        match bad.rebuild(tree.root(), tree.transposed) {
            Err(CertError::Rejected { node, .. }) => assert_eq!(node, cert.steps[k].node),
            other => panic!("tampered certificate accepted: {other:?}"),
        }
    }
}
