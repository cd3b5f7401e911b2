//! Rigidity matrices, randomized generic rank, infinitesimal flexes and the
//! vertex splitting move.
//!
//! Generic rank is computed exactly over the prime field of order
//! `2^61 - 1` at uniformly random placements. A single trial can only
//! underestimate the generic rank, and does so with probability at most
//! `deg / p` for the relevant minor, so a few trials are plenty. Real
//! arithmetic (SVD with a relative threshold) is kept as an independent
//! oracle and for extracting flex vectors.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{edge, Graph, VertexId};

/// Mersenne prime `2^61 - 1`.
pub const MODULUS: u64 = (1 << 61) - 1;
pub const DEFAULT_TRIALS: usize = 3;
/// Singular values below this fraction of the largest count as zero.
pub const SVD_REL_THRESHOLD: f64 = 1e-9;

pub mod fp {
    use super::MODULUS;

    pub fn add(a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= MODULUS {
            s - MODULUS
        } else {
            s
        }
    }

    pub fn sub(a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + MODULUS - b
        }
    }

    pub fn mul(a: u64, b: u64) -> u64 {
        let p = a as u128 * b as u128;
        // 2^61 = 1 mod p
        let lo = (p as u64) & MODULUS;
        let hi = (p >> 61) as u64;
        add(lo, hi)
    }

    pub fn pow(mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(a: u64) -> u64 {
        assert!(a != 0, "zero has no inverse");
        pow(a, MODULUS - 2)
    }
}

/// Coordinates for each vertex. `u64` entries are field elements.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement<T> {
    pub coords: BTreeMap<VertexId, [T; 3]>,
}

pub type FieldPlacement = Placement<u64>;
pub type RealPlacement = Placement<f64>;

impl FieldPlacement {
    pub fn random<R: Rng>(g: &Graph, rng: &mut R) -> Self {
        let coords = g
            .vertices()
            .map(|v| (v, [0; 3].map(|_: u64| rng.gen_range(0..MODULUS))))
            .collect();
        Placement { coords }
    }
}

impl RealPlacement {
    /// Coordinates uniform in `[-1, 1)`.
    pub fn random<R: Rng>(g: &Graph, rng: &mut R) -> Self {
        let coords = g
            .vertices()
            .map(|v| (v, [0.0; 3].map(|_: f64| rng.gen_range(-1.0..1.0))))
            .collect();
        Placement { coords }
    }
}

impl<T: Copy + PartialEq> Placement<T> {
    fn point(&self, v: VertexId) -> Result<[T; 3]> {
        self.coords.get(&v).copied().ok_or(Error::UnknownVertex(v))
    }

    /// Checks `p(u) != p(v)` on every edge.
    pub fn check(&self, g: &Graph) -> Result<()> {
        for (u, v) in g.edges() {
            if self.point(u)? == self.point(v)? {
                return Err(Error::DegeneratePlacement(format!("edge {u}-{v} has coincident endpoints")));
            }
        }
        Ok(())
    }
}

fn column_index(g: &Graph) -> BTreeMap<VertexId, usize> {
    g.vertices().enumerate().map(|(i, v)| (v, 3 * i)).collect()
}

/// `|E| x 3|V|` real rigidity matrix; rows follow `g.edges()`, column blocks follow `g.vertices()`.
pub fn rigidity_matrix(g: &Graph, p: &RealPlacement) -> Result<DMatrix<f64>> {
    p.check(g)?;
    let col = column_index(g);
    let mut m = DMatrix::zeros(g.num_edges(), 3 * g.num_vertices());
    for (r, (u, v)) in g.edges().enumerate() {
        let (pu, pv) = (p.point(u)?, p.point(v)?);
        for k in 0..3 {
            m[(r, col[&u] + k)] = pu[k] - pv[k];
            m[(r, col[&v] + k)] = pv[k] - pu[k];
        }
    }
    Ok(m)
}

/// Rigidity matrix over the prime field, row-major.
pub fn rigidity_matrix_fp(g: &Graph, p: &FieldPlacement) -> Result<Vec<Vec<u64>>> {
    p.check(g)?;
    let col = column_index(g);
    let width = 3 * g.num_vertices();
    let mut rows = Vec::with_capacity(g.num_edges());
    for (u, v) in g.edges() {
        let (pu, pv) = (p.point(u)?, p.point(v)?);
        let mut row = vec![0; width];
        for k in 0..3 {
            row[col[&u] + k] = fp::sub(pu[k], pv[k]);
            row[col[&v] + k] = fp::sub(pv[k], pu[k]);
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Rank by Gaussian elimination over the prime field.
pub fn rank_fp(mut rows: Vec<Vec<u64>>) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..width {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = fp::inv(rows[rank][c]);
        for x in rows[rank][c..].iter_mut() {
            *x = fp::mul(*x, inv);
        }
        let pivot_row = rows[rank].clone();
        for row in rows[rank + 1..].iter_mut() {
            let factor = row[c];
            if factor != 0 {
                for (x, &y) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                    *x = fp::sub(*x, fp::mul(factor, y));
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// Singular values of `m`, padding with zero rows so that there are as many as columns.
fn padded_svd(m: &DMatrix<f64>) -> nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    let rows = m.nrows().max(m.ncols());
    let mut padded = DMatrix::zeros(rows, m.ncols());
    padded.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    padded.svd(false, true)
}

fn numeric_rank(singular: &DVector<f64>) -> usize {
    let max = singular.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0;
    }
    singular.iter().filter(|&&s| s > SVD_REL_THRESHOLD * max).count()
}

/// Rank by singular value thresholding.
pub fn real_rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    numeric_rank(&m.singular_values())
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64))
}

/// Field rank at the placement of trial `trial`; resamples the rare degenerate draw.
pub fn trial_rank(g: &Graph, seed: u64, trial: usize) -> usize {
    let mut rng = trial_rng(seed, trial);
    loop {
        let p = FieldPlacement::random(g, &mut rng);
        if let Ok(rows) = rigidity_matrix_fp(g, &p) {
            return rank_fp(rows);
        }
    }
}

/// Maximum field rank over `trials` random placements. Trial `i` draws from
/// the seed `seed + i`, so adding trials never lowers the result.
pub fn generic_rank(g: &Graph, trials: usize, seed: u64) -> usize {
    generic_rank_with(g, trials, seed, Execution::default())
}

pub fn generic_rank_with(g: &Graph, trials: usize, seed: u64, exec: Execution) -> usize {
    if g.num_edges() == 0 {
        return 0;
    }
    exec.map_range(trials.max(1), |i| trial_rank(g, seed, i))
        .into_iter()
        .max()
        .unwrap_or(0)
}

/// Rank of a real rigidity matrix at a random placement from `seed`.
pub fn real_generic_rank(g: &Graph, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = RealPlacement::random(g, &mut rng);
    rigidity_matrix(g, &p).map(|m| real_rank(&m)).unwrap_or(0)
}

/// Maximum possible rank: `3|V| - 6` for three or more vertices.
pub fn rank_target(vertices: usize) -> usize {
    match vertices {
        0 | 1 => 0,
        2 => 1,
        n => 3 * n - 6,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RigidityVerdict {
    Isostatic,
    RigidWithRedundancy,
    /// Rank below target in every trial: flexible, or every trial was unlucky.
    FlexibleOrUnlucky,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub vertices: usize,
    pub edges: usize,
    pub trials: usize,
    pub seed: u64,
    pub modulus: u64,
    pub max_rank: usize,
    pub target: usize,
    pub verdict: RigidityVerdict,
    /// A nontrivial real infinitesimal flex, indexed like the matrix columns.
    pub flex_witness: Option<Vec<f64>>,
}

impl RankReport {
    pub fn is_isostatic(&self) -> bool {
        self.verdict == RigidityVerdict::Isostatic
    }

    pub fn is_rigid(&self) -> bool {
        self.verdict != RigidityVerdict::FlexibleOrUnlucky
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankOptions {
    pub trials: usize,
    pub seed: u64,
    pub exec: Execution,
    /// Compute a flex vector when the verdict is flexible.
    pub flex_witness: bool,
}

impl Default for RankOptions {
    fn default() -> Self {
        RankOptions {
            trials: DEFAULT_TRIALS,
            seed: 0,
            exec: Execution::default(),
            flex_witness: false,
        }
    }
}

pub fn is_minimally_3_rigid(g: &Graph) -> RankReport {
    is_minimally_3_rigid_with(g, &RankOptions::default())
}

pub fn is_minimally_3_rigid_with(g: &Graph, opts: &RankOptions) -> RankReport {
    let target = rank_target(g.num_vertices());
    let max_rank = generic_rank_with(g, opts.trials, opts.seed, opts.exec);
    let verdict = if max_rank < target {
        RigidityVerdict::FlexibleOrUnlucky
    } else if g.num_edges() == target {
        RigidityVerdict::Isostatic
    } else {
        RigidityVerdict::RigidWithRedundancy
    };
    let flex_witness = (opts.flex_witness && verdict == RigidityVerdict::FlexibleOrUnlucky)
        .then(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let p = RealPlacement::random(g, &mut rng);
            flex_basis(g, &p)
                .ok()
                .and_then(|b| b.vectors.into_iter().next())
                .map(|v| v.iter().copied().collect())
        })
        .flatten();
    RankReport {
        vertices: g.num_vertices(),
        edges: g.num_edges(),
        trials: opts.trials.max(1),
        seed: opts.seed,
        modulus: MODULUS,
        max_rank,
        target,
        verdict,
        flex_witness,
    }
}

/// Trivial flexes (three translations, three rotations) at a real placement.
pub fn trivial_flexes(g: &Graph, p: &RealPlacement) -> Result<Vec<DVector<f64>>> {
    let col = column_index(g);
    let n = 3 * g.num_vertices();
    let mut out = Vec::with_capacity(6);
    for axis in 0..3 {
        let mut t = DVector::zeros(n);
        for &c in col.values() {
            t[c + axis] = 1.0;
        }
        out.push(t);
    }
    for axis in 0..3 {
        let mut omega = [0.0; 3];
        omega[axis] = 1.0;
        let mut r = DVector::zeros(n);
        for (&v, &c) in &col {
            let q = p.point(v)?;
            let cross = [
                omega[1] * q[2] - omega[2] * q[1],
                omega[2] * q[0] - omega[0] * q[2],
                omega[0] * q[1] - omega[1] * q[0],
            ];
            for k in 0..3 {
                r[c + k] = cross[k];
            }
        }
        out.push(r);
    }
    Ok(out)
}

/// Orthonormal basis of the column span of `vectors`. Singular values below
/// `floor` are dropped as well as relatively small ones.
fn orthonormal_span(vectors: &[DVector<f64>], dim: usize, floor: f64) -> Vec<DVector<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = DMatrix::from_columns(vectors);
    let svd = m.svd(true, false);
    let u = svd.u.expect("requested U");
    let rank = numeric_rank(&svd.singular_values.map(|s| if s < floor { 0.0 } else { s }));
    debug_assert_eq!(u.nrows(), dim);
    (0..rank).map(|i| u.column(i).into_owned()).collect()
}

#[derive(Clone, Debug)]
pub struct FlexBasis {
    /// Orthonormal nontrivial flexes, orthogonal to the trivial ones.
    pub vectors: Vec<DVector<f64>>,
    pub kernel_dimension: usize,
    pub trivial_dimension: usize,
}

/// Basis of the infinitesimal flexes at `p` modulo the trivial ones.
pub fn flex_basis(g: &Graph, p: &RealPlacement) -> Result<FlexBasis> {
    let m = rigidity_matrix(g, p)?;
    let n = m.ncols();
    let trivial = orthonormal_span(&trivial_flexes(g, p)?, n, 0.0);
    if g.num_vertices() >= 3 && trivial.len() < 6 {
        return Err(Error::DegeneratePlacement(format!(
            "trivial flex space has dimension {}",
            trivial.len()
        )));
    }
    let svd = padded_svd(&m);
    let vt = svd.v_t.expect("requested V^T");
    let rank = numeric_rank(&svd.singular_values);
    // Singular values come sorted in decreasing order.
    let kernel: Vec<DVector<f64>> = (rank..n).map(|i| vt.row(i).transpose()).collect();
    let projected: Vec<DVector<f64>> = kernel
        .iter()
        .map(|k| {
            let mut v = k.clone();
            for t in &trivial {
                v -= t * t.dot(k);
            }
            v
        })
        .collect();
    Ok(FlexBasis {
        // Kernel vectors have unit norm, so an absolute floor is meaningful.
        vectors: orthonormal_span(&projected, n, SVD_REL_THRESHOLD),
        kernel_dimension: kernel.len(),
        trivial_dimension: trivial.len(),
    })
}

/// Checks that `u` is an infinitesimal flex at `p`, up to `tol` per edge.
pub fn is_flex(g: &Graph, p: &RealPlacement, u: &DVector<f64>, tol: f64) -> Result<bool> {
    let m = rigidity_matrix(g, p)?;
    Ok((m * u).amax() <= tol)
}

/// Splits `v` into `v` (playing `w1`) and `new`, which both become adjacent
/// to `v1` and `v2` and to each other. Neighbours in `to_new` move to `new`;
/// the rest stay with `v`.
pub fn vertex_split(
    g: &Graph,
    v: VertexId,
    v1: VertexId,
    v2: VertexId,
    to_new: &BTreeSet<VertexId>,
    new: VertexId,
) -> Result<Graph> {
    if !g.contains_vertex(v) {
        return Err(Error::UnknownVertex(v));
    }
    if g.contains_vertex(new) {
        return Err(Error::InvalidSplit(format!("vertex {new} already exists")));
    }
    if v1 == v2 || !g.has_edge(v, v1) || !g.has_edge(v, v2) {
        return Err(Error::InvalidSplit(format!("{v1} and {v2} must be distinct neighbours of {v}")));
    }
    for &u in to_new {
        if u == v1 || u == v2 || !g.has_edge(v, u) {
            return Err(Error::InvalidSplit(format!("{u} is not a free neighbour of {v}")));
        }
    }
    let mut h = g.clone();
    for &u in to_new {
        h.remove_edge(v, u);
        h.add_edge(new, u)?;
    }
    h.add_edge(new, v)?;
    h.add_edge(new, v1)?;
    h.add_edge(new, v2)?;
    Ok(h)
}

/// [`vertex_split`] with the next unused id.
pub fn vertex_split_fresh(
    g: &Graph,
    v: VertexId,
    v1: VertexId,
    v2: VertexId,
    to_new: &BTreeSet<VertexId>,
) -> Result<(Graph, VertexId)> {
    let new = g.max_vertex().map_or(0, |m| m + 1);
    Ok((vertex_split(g, v, v1, v2, to_new, new)?, new))
}

/// Uniformly random valid split of a random vertex of degree at least 2.
pub fn random_vertex_split<R: Rng>(g: &Graph, rng: &mut R) -> Result<(Graph, VertexId)> {
    let candidates: Vec<VertexId> = g.vertices().filter(|&v| g.degree(v) >= 2).collect();
    if candidates.is_empty() {
        return Err(Error::InvalidSplit("no vertex of degree 2 or more".into()));
    }
    let v = candidates[rng.gen_range(0..candidates.len())];
    let mut nbrs: Vec<VertexId> = g.neighbors(v).collect();
    let i = rng.gen_range(0..nbrs.len());
    let v1 = nbrs.swap_remove(i);
    let j = rng.gen_range(0..nbrs.len());
    let v2 = nbrs.swap_remove(j);
    let to_new: BTreeSet<VertexId> = nbrs.into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    vertex_split_fresh(g, v, v1, v2, &to_new)
}

/// Edge contraction in an abstract graph, keeping `keep`; the inverse of a split.
pub fn contract_abstract(g: &Graph, keep: VertexId, gone: VertexId) -> Result<Graph> {
    if !g.has_edge(keep, gone) {
        return Err(Error::UnknownEdge(edge(keep, gone)));
    }
    let mut h = g.clone();
    let moved: Vec<VertexId> = g.neighbors(gone).filter(|&u| u != keep).collect();
    h.remove_vertex(gone);
    for u in moved {
        h.add_edge(keep, u)?;
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::fixtures::octahedron;
    use proptest::prelude::*;

    fn double_banana() -> Graph {
        let mut g = Graph::new();
        for side in [[2, 3, 4], [5, 6, 7]] {
            let verts = [0, 1, side[0], side[1], side[2]];
            for (i, &a) in verts.iter().enumerate() {
                for &b in &verts[i + 1..] {
                    if (a, b) != (0, 1) {
                        g.add_edge(a, b).unwrap();
                    }
                }
            }
        }
        g
    }

    #[test]
    fn field_arithmetic() {
        assert_eq!(fp::mul(MODULUS - 1, MODULUS - 1), 1);
        for a in [1u64, 2, 12345, MODULUS - 2] {
            assert_eq!(fp::mul(a, fp::inv(a)), 1);
        }
        assert_eq!(fp::sub(0, 1), MODULUS - 1);
    }

    #[test]
    fn small_matrices() {
        let edge_graph = Graph::path(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = RealPlacement::random(&edge_graph, &mut rng);
        let m = rigidity_matrix(&edge_graph, &p).unwrap();
        assert_eq!((m.nrows(), m.ncols()), (1, 6));
        assert_eq!(real_rank(&m), 1);

        let k3 = Graph::complete(3);
        let p = RealPlacement::random(&k3, &mut rng);
        assert_eq!(real_rank(&rigidity_matrix(&k3, &p).unwrap()), 3);
        let collinear = Placement {
            coords: BTreeMap::from([(0, [0.0, 0.0, 0.0]), (1, [1.0, 0.0, 0.0]), (2, [3.0, 0.0, 0.0])]),
        };
        assert_eq!(real_rank(&rigidity_matrix(&k3, &collinear).unwrap()), 2);
        let coincident = Placement {
            coords: BTreeMap::from([(0, [0.0; 3]), (1, [0.0; 3]), (2, [1.0, 0.0, 0.0])]),
        };
        assert!(matches!(rigidity_matrix(&k3, &coincident), Err(Error::DegeneratePlacement(_))));
    }

    #[test]
    fn generic_ranks() {
        assert_eq!(generic_rank(&Graph::complete(4), 3, 0), 6);
        let oct = octahedron().graph();
        assert_eq!(generic_rank(&oct, 3, 0), 12);
        assert_eq!(real_generic_rank(&oct, 9), 12);
        let db = double_banana();
        assert_eq!((db.num_vertices(), db.num_edges()), (8, 18));
        assert_eq!(generic_rank(&db, 3, 0), 17);
        assert_eq!(real_generic_rank(&db, 9), 17);
    }

    #[test]
    fn verdicts() {
        assert!(is_minimally_3_rigid(&octahedron().graph()).is_isostatic());
        assert_eq!(
            is_minimally_3_rigid(&Graph::complete(5)).verdict,
            RigidityVerdict::RigidWithRedundancy
        );
        let opts = RankOptions {
            flex_witness: true,
            ..RankOptions::default()
        };
        let r = is_minimally_3_rigid_with(&Graph::path(5), &opts);
        assert_eq!(r.verdict, RigidityVerdict::FlexibleOrUnlucky);
        assert!(r.flex_witness.is_some());
    }

    #[test]
    fn flex_bases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k4 = Graph::complete(4);
        let p = RealPlacement::random(&k4, &mut rng);
        let b = flex_basis(&k4, &p).unwrap();
        assert!(b.vectors.is_empty());
        assert_eq!((b.kernel_dimension, b.trivial_dimension), (6, 6));

        let c4 = Graph::cycle(4);
        let p = RealPlacement::random(&c4, &mut rng);
        assert!(!flex_basis(&c4, &p).unwrap().vectors.is_empty());

        let db = double_banana();
        let p = RealPlacement::random(&db, &mut rng);
        let b = flex_basis(&db, &p).unwrap();
        assert_eq!(b.vectors.len(), 1);
        assert!(is_flex(&db, &p, &b.vectors[0], 1e-9).unwrap());
    }

    #[test]
    fn split_counts() {
        let k3 = Graph::complete(3);
        let (k4, new) = vertex_split_fresh(&k3, 0, 1, 2, &BTreeSet::new()).unwrap();
        assert_eq!(new, 3);
        assert_eq!(k4, Graph::complete(4));
        assert!(vertex_split(&k3, 0, 1, 1, &BTreeSet::new(), 9).is_err());
        assert!(vertex_split(&k3, 0, 1, 2, &BTreeSet::from([2]), 9).is_err());
        let back = contract_abstract(&k4, 0, 3).unwrap();
        assert_eq!(back, k3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn splits_preserve_isostatic(seed in any::<u64>(), steps in 1usize..8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = Graph::complete(3);
            for _ in 0..steps {
                let (h, _) = random_vertex_split(&g, &mut rng).unwrap();
                prop_assert_eq!(h.num_edges(), g.num_edges() + 3);
                g = h;
            }
            prop_assert!(is_minimally_3_rigid(&g).is_isostatic());
        }

        #[test]
        fn more_trials_never_lower_rank(n in 3u32..8, seed in any::<u64>()) {
            let g = Graph::complete(n);
            prop_assert!(generic_rank(&g, 1, seed) <= generic_rank(&g, 3, seed));
        }

        #[test]
        fn rank_bound_and_field_real_agreement(seed in any::<u64>(), n in 3u32..9, mask in any::<u32>()) {
            let mut g = Graph::new();
            let mut bit = 0;
            for v in 0..n { g.add_vertex(v); }
            for u in 0..n { for v in u + 1..n {
                if mask >> (bit % 32) & 1 == 1 { g.add_edge(u, v).unwrap(); }
                bit += 1;
            } }
            let r = generic_rank(&g, 3, seed);
            prop_assert!(r <= g.num_edges().min(rank_target(g.num_vertices())));
            prop_assert_eq!(r, real_generic_rank(&g, seed));
        }
    }
}
