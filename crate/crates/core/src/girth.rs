//! Index arithmetic, girth inequalities, critical girth cycles and the
//! separation conditions.
//!
//! For a proper cycle `c` and the labelled faces `C` on one of its sides,
//! the girth inequality reads `|c| >= |ind(C)| + 3`. Every planar
//! realisation of the face graph is covered by testing both sides.
//!
//! A cycle can only violate or meet the bound if `|c| <= M + 3` where `M`
//! is the larger of the total `B` excess and the total `H` excess, so the
//! enumeration is cut off there.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::flow::{FlowNetwork, INF};
use crate::graph::{edge, Edge, VertexId};
use crate::planar::{proper_cycles_from, split_faces, FaceGraph, Label, ProperCycle};

/// A set of labelled face ids.
pub type FaceCollection = BTreeSet<usize>;

/// Signed index of a collection of labelled faces.
pub fn index(fg: &FaceGraph, c: &FaceCollection) -> Result<i64> {
    for &f in c {
        if f >= fg.faces().len() || fg.label(f).is_none() {
            return Err(Error::InvalidParameter(format!("face {f} is not a labelled face")));
        }
    }
    Ok(fg.index_of(c))
}

/// Index of all labelled faces.
pub fn total_index(fg: &FaceGraph) -> i64 {
    fg.index_of(&fg.labelled_faces())
}

fn excess_total(fg: &FaceGraph, l: Label) -> usize {
    fg.faces_with_label(l).iter().map(|&f| fg.boundary(f).len() - 3).sum()
}

/// Longest cycle that can meet `|c| = |ind(C)| + 3` for some side `C`.
pub fn critical_length_bound(fg: &FaceGraph) -> usize {
    excess_total(fg, Label::B).max(excess_total(fg, Label::H)) + 3
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Inside,
    Outside,
}

/// A proper cycle with one of its sides.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SidedCycle {
    pub cycle: ProperCycle,
    pub side: Side,
    pub faces: FaceCollection,
    pub index: i64,
    /// Whether the cycle bounds a face of the graph.
    pub facial: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GirthVerdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GirthReport {
    pub verdict: GirthVerdict,
    /// Shortest violating cycle, lexicographically first among those.
    pub violating: Option<SidedCycle>,
    /// Cycles with `|c| = |ind(C)| + 3` on some side, facial ones flagged.
    pub critical_cycles: Vec<SidedCycle>,
    pub length_bound: usize,
    pub cycles_examined: usize,
}

impl GirthReport {
    pub fn passes(&self) -> bool {
        self.verdict == GirthVerdict::Pass
    }

    pub fn non_facial_critical(&self) -> impl Iterator<Item = &SidedCycle> {
        self.critical_cycles.iter().filter(|c| !c.facial)
    }
}

#[derive(Default)]
struct Shard {
    violations: Vec<SidedCycle>,
    critical: Vec<SidedCycle>,
    examined: usize,
}

fn examine(fg: &FaceGraph, labelled: &FaceCollection, c: ProperCycle, shard: &mut Shard) {
    shard.examined += 1;
    let (inside, outside, _) = split_faces(fg, &c).expect("enumerated cycles are cycles of the graph");
    let keep = |r: BTreeSet<usize>| -> FaceCollection { r.into_iter().filter(|f| labelled.contains(f)).collect() };
    let facial = fg.is_facial(&c);
    let len = c.len() as i64;
    let mut critical = None;
    for (side, faces) in [(Side::Inside, keep(inside)), (Side::Outside, keep(outside))] {
        let index = fg.index_of(&faces);
        let sided = SidedCycle {
            cycle: c.clone(),
            side,
            faces,
            index,
            facial,
        };
        if len < index.abs() + 3 {
            shard.violations.push(sided);
            return;
        }
        if len == index.abs() + 3 && critical.is_none() {
            critical = Some(sided);
        }
    }
    if let Some(s) = critical {
        shard.critical.push(s);
    }
}

pub fn girth_check(fg: &FaceGraph) -> GirthReport {
    girth_check_with(fg, Execution::default())
}

/// Exhaustive girth check, sharded by the smallest vertex of each cycle.
pub fn girth_check_with(fg: &FaceGraph, exec: Execution) -> GirthReport {
    let g = fg.graph();
    let bound = critical_length_bound(fg);
    let labelled: FaceCollection = fg.labelled_faces().into_iter().collect();
    let starts: Vec<VertexId> = g.vertices().collect();
    let shards = exec.map(&starts, |&s| {
        let mut shard = Shard::default();
        proper_cycles_from(&g, s, Some(bound), &mut |c| examine(fg, &labelled, c, &mut shard));
        shard
    });
    let mut violations = Vec::new();
    let mut critical = Vec::new();
    let mut examined = 0;
    for s in shards {
        violations.extend(s.violations);
        critical.extend(s.critical);
        examined += s.examined;
    }
    let violating = violations
        .into_iter()
        .min_by(|a, b| (a.cycle.len(), &a.cycle).cmp(&(b.cycle.len(), &b.cycle)));
    critical.sort_by(|a, b| (a.cycle.len(), &a.cycle).cmp(&(b.cycle.len(), &b.cycle)));
    GirthReport {
        verdict: if violating.is_some() {
            GirthVerdict::Fail
        } else {
            GirthVerdict::Pass
        },
        violating,
        critical_cycles: critical,
        length_bound: bound,
        cycles_examined: examined,
    }
}

/// Given that the girth inequalities hold, the total index is zero and so
/// the double-disc graph meets the Maxwell count.
pub fn maxwell_from_girth(fg: &FaceGraph) -> Result<bool> {
    if !girth_check(fg).passes() {
        return Err(Error::GirthFailed);
    }
    Ok(total_index(fg) == 0)
}

/// Critical girth cycles; only meaningful when the girth check passes.
pub fn critical_girth_cycles(fg: &FaceGraph) -> Vec<SidedCycle> {
    girth_check(fg).critical_cycles
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SeparationWitness {
    /// An edge joining two non-consecutive vertices of a labelled boundary.
    Chord { face: Vec<VertexId>, edge: Edge },
    /// Two holes sharing more than two vertices, or two non-adjacent ones.
    SharedVertices {
        faces: (Vec<VertexId>, Vec<VertexId>),
        shared: Vec<VertexId>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub passes: bool,
    pub witness: Option<SeparationWitness>,
}

pub fn separation_check(fg: &FaceGraph) -> SeparationReport {
    let g = fg.graph();
    let fail = |w| SeparationReport {
        passes: false,
        witness: Some(w),
    };
    for f in fg.labelled_faces() {
        let b = fg.boundary(f);
        let k = b.len();
        for i in 0..k {
            for j in i + 2..k {
                if i == 0 && j == k - 1 {
                    continue;
                }
                if g.has_edge(b[i], b[j]) {
                    return fail(SeparationWitness::Chord {
                        face: b.to_vec(),
                        edge: edge(b[i], b[j]),
                    });
                }
            }
        }
    }
    let holes = fg.faces_with_label(Label::H);
    for (i, &h1) in holes.iter().enumerate() {
        for &h2 in &holes[i + 1..] {
            let shared: Vec<VertexId> = fg.boundary_set(h1).intersection(&fg.boundary_set(h2)).copied().collect();
            let bad = shared.len() > 2 || (shared.len() == 2 && !g.has_edge(shared[0], shared[1]));
            if bad {
                return fail(SeparationWitness::SharedVertices {
                    faces: (fg.boundary(h1).to_vec(), fg.boundary(h2).to_vec()),
                    shared,
                });
            }
        }
    }
    SeparationReport {
        passes: true,
        witness: None,
    }
}

/// Largest number of labelled faces the dual accelerator will handle.
pub const DUAL_MAX_LABELLED: usize = 12;

/// Minimum number of primal edges separating face set `a` from face set `z`,
/// computed as a minimum cut in the planar dual.
pub fn dual_min_cut(fg: &FaceGraph, a: &BTreeSet<usize>, z: &BTreeSet<usize>) -> i64 {
    let nf = fg.faces().len();
    let (s, t) = (nf, nf + 1);
    let mut net = FlowNetwork::new(nf + 2);
    for (u, v) in fg.embedding().edges() {
        let (f1, f2) = fg.faces_of_edge((u, v)).expect("edge of the graph");
        if f1 != f2 {
            net.add_edge(f1, f2, 1);
        }
    }
    for &f in a {
        net.add_arc(s, f, INF);
    }
    for &f in z {
        net.add_arc(f, t, INF);
    }
    net.max_flow(s, t)
}

/// Sufficient test for the girth inequalities via dual minimum cuts.
///
/// Every cycle splits the labelled faces into some `C` and its complement
/// and costs at least the dual cut between them, so meeting
/// `cut(C, rest) >= max(|ind C|, |ind rest|) + 3` for every split, and
/// `cut(t, all) >= |ind all| + 3` for every triangle `t`, proves the check
/// passes. `Ok(false)` means only "not certified"; a cut is not always a
/// single proper cycle.
pub fn dual_girth_certificate(fg: &FaceGraph) -> Result<bool> {
    let labelled = fg.labelled_faces();
    let l = labelled.len();
    if l > DUAL_MAX_LABELLED {
        return Err(Error::TooLarge {
            actual: l,
            bound: DUAL_MAX_LABELLED,
        });
    }
    let all: BTreeSet<usize> = labelled.iter().copied().collect();
    let total = fg.index_of(&all);
    for mask in 1u32..(1 << l).max(1) - 1 {
        let c: BTreeSet<usize> = (0..l).filter(|i| mask >> i & 1 == 1).map(|i| labelled[i]).collect();
        let rest: BTreeSet<usize> = all.difference(&c).copied().collect();
        let need = fg.index_of(&c).abs().max(fg.index_of(&rest).abs()) + 3;
        if dual_min_cut(fg, &c, &rest) < need {
            return Ok(false);
        }
    }
    if total != 0 {
        for t in (0..fg.faces().len()).filter(|&f| fg.label(f).is_none()) {
            if dual_min_cut(fg, &BTreeSet::from([t]), &all) < total.abs() + 3 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Runs the exhaustive check and, when applicable, the dual certificate;
/// a certified pass contradicted by the exhaustive check is an error.
pub fn girth_check_cross(fg: &FaceGraph, exec: Execution) -> Result<GirthReport> {
    let report = girth_check_with(fg, exec);
    if let Ok(true) = dual_girth_certificate(fg) {
        if !report.passes() {
            return Err(Error::Internal(format!(
                "dual cut certificate passes but cycle {:?} violates the girth inequality",
                report.violating.as_ref().map(|v| v.cycle.vertices().to_vec())
            )));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::fixtures::*;
    use crate::constructions::{discus_and_hole, double_disc_blocks, octahedron, random_face_graph, FaceGraphParams};
    use crate::planar::FaceGraph;
    use crate::sparsity::{is_36_sparse, is_36_tight};
    use proptest::prelude::*;

    #[test]
    fn index_examples() {
        let fg = pentagon_two_holes();
        let b = fg.faces_with_label(Label::B)[0];
        let hs = fg.faces_with_label(Label::H);
        assert_eq!(index(&fg, &BTreeSet::from([b])).unwrap(), 2);
        assert_eq!(index(&fg, &BTreeSet::from([b, hs[0]])).unwrap(), 1);
        assert_eq!(total_index(&fg), 0);
        let tri = (0..fg.faces().len()).find(|&f| fg.label(f).is_none()).unwrap();
        assert!(index(&fg, &BTreeSet::from([tri])).is_err());
        let c4 = four_cycle();
        assert_eq!(total_index(&c4), 0);
    }

    #[test]
    fn four_cycle_passes() {
        let r = girth_check(&four_cycle());
        assert!(r.passes());
        assert!(r.non_facial_critical().next().is_none());
        assert!(maxwell_from_girth(&four_cycle()).unwrap());
    }

    #[test]
    fn chord_fails() {
        let fg = chorded_hexagon();
        let r = girth_check(&fg);
        assert!(!r.passes());
        assert_eq!(r.violating.unwrap().cycle.len(), 4);
        let s = separation_check(&fg);
        assert!(matches!(s.witness, Some(SeparationWitness::Chord { edge: (0, 3), .. })));
        assert!(matches!(maxwell_from_girth(&fg), Err(Error::GirthFailed)));
    }

    #[test]
    fn imbalanced_fails() {
        let fg = imbalanced_pentagon();
        assert_eq!(total_index(&fg), 1);
        assert!(!girth_check(&fg).passes());
        let circ = double_disc_blocks(&fg, 0).unwrap();
        assert_eq!(circ.graph().freedom(), 5);
    }

    #[test]
    fn sphere_passes_vacuously() {
        let fg = FaceGraph::sphere(octahedron()).unwrap();
        let r = girth_check(&fg);
        assert!(r.passes());
        assert!(r.critical_cycles.iter().all(|c| c.cycle.len() == 3));
        assert_eq!(dual_girth_certificate(&fg), Ok(true));
    }

    #[test]
    fn boundaries_are_critical() {
        let fg = pentagon_two_holes();
        let r = girth_check(&fg);
        assert!(r.passes());
        for f in fg.labelled_faces() {
            let c = ProperCycle::new(fg.boundary(f)).unwrap();
            assert!(r.critical_cycles.iter().any(|s| s.cycle == c && s.facial));
        }
    }

    #[test]
    fn separation_examples() {
        assert!(separation_check(&four_cycle()).passes);
        assert!(separation_check(&two_block_counterexample()).passes);
        let db = double_banana_face_graph();
        // The holes share the poles 0 and 1, which are not adjacent.
        assert!(matches!(
            separation_check(&db).witness,
            Some(SeparationWitness::SharedVertices { shared, .. }) if shared == vec![0, 1]
        ));
    }

    #[test]
    fn counterexample_passes_girth() {
        let fg = two_block_counterexample();
        assert!(girth_check(&fg).passes());
        assert_eq!(total_index(&fg), 0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn corpus_properties(seed in any::<u64>(), holes in 1usize..4, n in 8usize..15) {
            let Some(fg) = random_face_graph(&FaceGraphParams::new(n, 1, holes), seed).unwrap() else {
                return Ok(());
            };
            let r = girth_check(&fg);
            prop_assert_eq!(&r, &girth_check_with(&fg, Execution::Sequential));
            prop_assert_eq!(r.passes(), girth_check(&fg.transpose_labels()).passes());
            if dual_girth_certificate(&fg).unwrap() {
                prop_assert!(r.passes());
            }
            let dagger = discus_and_hole(&fg);
            if is_36_tight(dagger.graph()) {
                prop_assert!(r.passes());
            }
            if let Ok(circ) = double_disc_blocks(&fg, seed) {
                if is_36_sparse(circ.graph()).is_sparse() {
                    for s in r.violating.iter() {
                        prop_assert!(s.cycle.len() as i64 >= s.index + 3);
                    }
                }
                if circ.graph().freedom() == 6 {
                    // Opposite sides carry opposite indices.
                    let all: FaceCollection = fg.labelled_faces().into_iter().collect();
                    for c in &r.critical_cycles {
                        let rest: FaceCollection = all.difference(&c.faces).copied().collect();
                        prop_assert_eq!(fg.index_of(&rest), -c.index);
                    }
                }
            }
        }
    }
}
