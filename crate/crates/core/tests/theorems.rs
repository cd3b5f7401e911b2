use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rigidlab::constructions::fixtures::{double_banana, double_banana_face_graph, two_block_counterexample};
use rigidlab::constructions::{
    discus_and_hole, double_disc_blocks, random_triangulated_sphere, single_block_instance,
    tight_single_block_instance,
};
use rigidlab::girth::{girth_check, separation_check, total_index};
use rigidlab::graph::is_3_connected;
use rigidlab::reduction::{
    contractible_tt_edges, critical_separating_cycles, gluck_sequence, in_class, inverse_henneberg_reduce,
    reduce_to_tree, replay, tt_contract, Reduction, ReplayOptions,
};
use rigidlab::rigidity::{
    flex_basis, generic_rank, is_minimally_3_rigid, random_vertex_split, rank_target, RealPlacement,
};
use rigidlab::sparsity::{brute_force_sparse_oracle, is_36_sparse, is_36_tight};
use rigidlab::{FaceGraph, Graph};

fn corpus(n: u64) -> Vec<FaceGraph> {
    (0..n)
        .filter_map(|k| {
            if k % 2 == 0 {
                single_block_instance(3, k, 16)
            } else {
                tight_single_block_instance(3, k, 16)
            }
        })
        .collect()
}

fn isostatic(g: &Graph) -> bool {
    g.num_edges() == rank_target(g.num_vertices()) && generic_rank(g, 3, 1) == rank_target(g.num_vertices())
}

#[test]
fn one_block_predicates_agree() {
    let instances = corpus(40);
    assert!(instances.len() >= 30);
    let mut tight = 0;
    for fg in &instances {
        for g in [fg.clone(), fg.transpose_labels()] {
            let dagger = discus_and_hole(&g);
            let combinatorial = is_36_tight(dagger.graph());
            let girth = girth_check(&g).passes() && total_index(&g) == 0;
            let tree = matches!(reduce_to_tree(&g).unwrap(), Reduction::Certified(_));
            let rank = isostatic(dagger.graph());
            if let Ok(circ) = double_disc_blocks(&g, 9) {
                assert_eq!(combinatorial, is_36_tight(circ.graph()));
                assert_eq!(combinatorial, isostatic(circ.graph()));
            }
            assert_eq!(combinatorial, girth, "girth disagrees on {:?}", g.faces());
            assert_eq!(combinatorial, tree, "reduction disagrees on {:?}", g.faces());
            assert_eq!(combinatorial, rank, "rank disagrees on {:?}", g.faces());
            tight += combinatorial as usize;
        }
    }
    assert!(tight > 0 && tight < 2 * instances.len());
}

#[test]
fn round_trip_and_critical_equivalence() {
    for fg in corpus(30).iter().filter(|fg| in_class(fg)) {
        let Reduction::Certified(tree) = reduce_to_tree(fg).unwrap() else {
            panic!("tight instance refused")
        };
        let out = replay(&tree, &ReplayOptions::default()).unwrap();
        assert!(out.isomorphic_to_dagger);
        assert!(out.log.iter().all(|e| e.rank == e.target));
        let crit = critical_separating_cycles(fg);
        for e in contractible_tt_edges(fg) {
            let leaves = !in_class(&tt_contract(fg, e).unwrap());
            let on_critical = crit.iter().any(|c| !c.facial && c.cycle.contains_edge(e));
            assert_eq!(leaves, on_critical, "edge {e:?}");
        }
    }
}

#[test]
fn index_law() {
    for fg in corpus(30) {
        let Ok(circ) = double_disc_blocks(&fg, 2) else { continue };
        assert_eq!(circ.graph().freedom(), 6 - total_index(&fg));
        assert_eq!(discus_and_hole(&fg).graph().freedom(), 6 - total_index(&fg));
    }
}

#[test]
fn gluck_on_spheres() {
    for seed in 0..12 {
        let n = 4 + (seed as usize * 7) % 47;
        let s = random_triangulated_sphere(n, seed).unwrap();
        assert_eq!(gluck_sequence(&s).unwrap().len(), n - 3);
        assert_eq!(generic_rank(&s.graph(), 3, seed), rank_target(n));
    }
}

#[test]
fn splits_and_edge_removal() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut g = random_triangulated_sphere(10, 4).unwrap().graph();
    for _ in 0..15 {
        g = random_vertex_split(&g, &mut rng).unwrap().0;
        assert!(is_minimally_3_rigid(&g).is_isostatic());
    }
    let r = generic_rank(&g, 3, 0);
    for (u, v) in g.edges().take(10).collect::<Vec<_>>() {
        let mut h = g.clone();
        h.remove_edge(u, v);
        assert_eq!(generic_rank(&h, 3, 0), r - 1);
    }
}

#[test]
fn sparsity_matches_oracle_on_sphere_minors() {
    for seed in 0..6 {
        let g = random_triangulated_sphere(9, seed).unwrap().graph();
        let mut h = g.clone();
        h.add_edge(0, 100).unwrap();
        h.add_edge(1, 100).unwrap();
        for x in [&g, &h] {
            assert_eq!(is_36_sparse(x).is_sparse(), brute_force_sparse_oracle(x, 12).unwrap());
        }
    }
}

#[test]
fn counterexample_and_double_banana() {
    let fg = two_block_counterexample();
    assert!(girth_check(&fg).passes());
    assert!(separation_check(&fg).passes);
    let circ = double_disc_blocks(&fg, 0).unwrap();
    assert!(is_36_tight(circ.graph()));
    assert!(generic_rank(circ.graph(), 3, 0) < rank_target(circ.graph().num_vertices()));
    let residue = inverse_henneberg_reduce(circ.graph()).residue;
    assert!(!is_3_connected(&residue).unwrap().is_three_connected());

    let db = double_banana();
    assert_eq!(db.num_edges(), 18);
    assert_eq!(generic_rank(&db, 3, 0), 17);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let flex = flex_basis(&db, &RealPlacement::random(&db, &mut rng)).unwrap();
    assert_eq!(flex.vectors.len(), 1);
    assert!(!separation_check(&double_banana_face_graph()).passes);
}
