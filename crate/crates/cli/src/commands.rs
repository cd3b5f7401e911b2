use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use rigidlab::constructions::{double_disc_blocks, fixtures, random_face_graph, random_triangulated_sphere, FaceGraphParams};
use rigidlab::girth::{girth_check_cross, girth_check_with, separation_check, total_index};
use rigidlab::graph::is_3_connected;
use rigidlab::reduction::{
    dagger, normalize_single_block, reduce_to_tree, replay, Reduction, ReductionTree, ReplayOptions, Step,
};
use rigidlab::rigidity::{is_minimally_3_rigid_with, rank_target, RankOptions};
use rigidlab::sparsity::{brute_force_sparse_oracle, is_36_sparse_with, ORACLE_BOUND};
use rigidlab::{Error, Execution, FaceGraph, Graph};

use crate::format::{sha256_hex, CertError, CertificateFile, GraphFile, Loaded};
use crate::report::{CheckName, CheckOutcome, CheckVerdict, Fault, Report, RunConfig, Verdict};

/// Reads and parses the input graph, recording its digest. Failures mark the report invalid.
pub fn load_input(cfg: &RunConfig, report: &mut Report) -> Option<Loaded> {
    let Some(path) = &cfg.input else {
        report.error = Some("no input file".into());
        report.escalate(Verdict::Invalid);
        return None;
    };
    let loaded = fs::read(path)
        .map_err(|e| format!("{}: {e}", path.display()))
        .and_then(|bytes| {
            report.input_digest = Some(sha256_hex(&bytes));
            let text = String::from_utf8(bytes).map_err(|e| e.to_string())?;
            GraphFile::parse(&text)
                .and_then(|f| f.load())
                .map_err(|e| e.to_string())
        });
    match loaded {
        Ok(l) => Some(l),
        Err(e) => {
            report.error = Some(e);
            report.escalate(Verdict::Invalid);
            None
        }
    }
}

fn rank_options(cfg: &RunConfig, exec: Execution) -> RankOptions {
    RankOptions {
        trials: cfg.trials,
        seed: cfg.seed,
        exec,
        flex_witness: false,
    }
}

/// `(1,n)`, `(n,1)` and `(0,0)` inputs are covered by the one-block equivalences.
pub fn theorem_scope(fg: &FaceGraph) -> (bool, String) {
    match fg.face_type() {
        (0, 0) => (true, "sphere".into()),
        (1, _) => (true, "single block".into()),
        (_, 1) => (true, "single hole".into()),
        (m, n) => (false, format!("outside theorem scope (m,n)=({m},{n})")),
    }
}

struct Timer {
    on: bool,
    laps: BTreeMap<String, f64>,
}

impl Timer {
    fn run<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        if self.on {
            self.laps.insert(name.into(), t.elapsed().as_secs_f64() * 1e3);
        }
        out
    }
}

fn outcome(check: CheckName, pass: bool, detail: Value) -> CheckOutcome {
    CheckOutcome {
        check,
        verdict: if pass { CheckVerdict::Pass } else { CheckVerdict::Fail },
        detail,
    }
}

fn skipped(check: CheckName, why: &str) -> CheckOutcome {
    CheckOutcome {
        check,
        verdict: CheckVerdict::Skipped,
        detail: json!({ "reason": why }),
    }
}

pub fn cmd_check(cfg: &RunConfig) -> Report {
    let mut report = Report::new(cfg.clone());
    if let Some(loaded) = load_input(cfg, &mut report) {
        check_loaded(&loaded, cfg, &mut report);
    }
    report
}

/// Runs the selected checks on an already parsed graph.
pub fn check_loaded(loaded: &Loaded, cfg: &RunConfig, report: &mut Report) {
    let exec = Execution::default();
    let fg = &loaded.face_graph;
    let mut timer = Timer {
        on: cfg.timing,
        laps: BTreeMap::new(),
    };
    let (in_scope, scope) = theorem_scope(fg);
    report.face_type = Some(fg.face_type());
    report.scope = Some(scope);
    let hat: Graph = match &loaded.block_hole {
        Some(bh) => bh.graph().clone(),
        None => dagger(fg),
    };
    let index = total_index(fg);
    let mut predicates = BTreeMap::new();

    let double_disc = if fg.face_type().0 == 0 {
        Value::Null
    } else {
        match double_disc_blocks(fg, cfg.seed) {
            Ok(bh) => json!({
                "simple": true,
                "vertices": bh.graph().num_vertices(),
                "edges": bh.graph().num_edges(),
                "freedom": bh.graph().freedom(),
            }),
            Err(e) => json!({ "simple": false, "error": e.to_string() }),
        }
    };

    if cfg.selected(CheckName::Maxwell) {
        let f = hat.freedom();
        report.checks.push(outcome(
            CheckName::Maxwell,
            f == 6,
            json!({
                "vertices": hat.num_vertices(),
                "edges": hat.num_edges(),
                "freedom": f,
                "index": index,
                "explicit_blocks": loaded.block_hole.is_some(),
            }),
        ));
    }
    if cfg.selected(CheckName::Sparsity) {
        let s = timer.run("sparsity", || is_36_sparse_with(&hat, exec));
        let mut detail = serde_json::to_value(&s).expect("serializable");
        if cfg.oracle {
            match timer.run("sparsity_oracle", || brute_force_sparse_oracle(&hat, ORACLE_BOUND)) {
                Ok(o) => {
                    detail["oracle"] = json!(o);
                    if o != s.is_sparse() {
                        report.faults.push(Fault {
                            message: "max-flow sparsity disagrees with the brute-force oracle".into(),
                            predicates: BTreeMap::from([("flow".into(), s.is_sparse()), ("oracle".into(), o)]),
                        });
                    }
                }
                Err(e) => detail["oracle"] = json!(format!("skipped: {e}")),
            }
        }
        predicates.insert("sparsity_tight".to_string(), s.is_tight());
        report.checks.push(outcome(CheckName::Sparsity, s.is_tight(), detail));
    }
    if cfg.selected(CheckName::Girth) {
        let g = if cfg.oracle {
            timer.run("girth", || girth_check_cross(fg, exec))
        } else {
            Ok(timer.run("girth", || girth_check_with(fg, exec)))
        };
        match g {
            Ok(g) => {
                let non_facial: Vec<_> = g.non_facial_critical().cloned().collect();
                predicates.insert("girth_with_maxwell".to_string(), g.passes() && index == 0);
                report.checks.push(outcome(
                    CheckName::Girth,
                    g.passes(),
                    json!({
                        "verdict": g.verdict,
                        "violating": g.violating,
                        "length_bound": g.length_bound,
                        "cycles_examined": g.cycles_examined,
                        "critical_cycles": g.critical_cycles.len(),
                        "non_facial_critical": non_facial,
                        // Only a 3-connected graph has a unique embedding; otherwise the
                        // verdict is for the supplied rotation system.
                        "embedding_unique": is_3_connected(&fg.graph()).is_ok_and(|c| c.is_three_connected()),
                    }),
                ));
            }
            Err(e) => {
                report.faults.push(Fault {
                    message: e.to_string(),
                    predicates: BTreeMap::new(),
                });
            }
        }
    }
    if cfg.selected(CheckName::Separation) {
        let s = separation_check(fg);
        report.checks.push(outcome(CheckName::Separation, s.passes, json!(s)));
    }
    if cfg.selected(CheckName::Connectivity) {
        let c = timer.run("connectivity", || is_3_connected(&hat));
        let (pass, detail) = match c {
            Ok(c) => (c.is_three_connected(), json!(c)),
            Err(e) => (false, json!({ "error": e.to_string() })),
        };
        report.checks.push(outcome(CheckName::Connectivity, pass, detail));
    }
    if cfg.selected(CheckName::Rank) {
        let mut opts = rank_options(cfg, exec);
        opts.flex_witness = hat.num_vertices() <= 200;
        let r = timer.run("rank", || is_minimally_3_rigid_with(&hat, &opts));
        predicates.insert("rank_isostatic".to_string(), r.is_isostatic());
        report.checks.push(outcome(CheckName::Rank, r.is_isostatic(), json!(r)));
    }
    if cfg.selected(CheckName::Reduction) {
        if !in_scope {
            report.checks.push(skipped(CheckName::Reduction, "needs a single block or a single hole"));
        } else {
            match timer.run("reduction", || reduce_to_tree(fg)) {
                Ok(Reduction::Certified(tree)) => {
                    predicates.insert("reduction_certified".to_string(), true);
                    report.checks.push(outcome(CheckName::Reduction, true, tree_summary(&tree)));
                }
                Ok(Reduction::Refused { transposed, sparsity }) => {
                    predicates.insert("reduction_certified".to_string(), false);
                    report.checks.push(outcome(
                        CheckName::Reduction,
                        false,
                        json!({ "refused": true, "transposed": transposed, "sparsity": sparsity }),
                    ));
                }
                Err(e) => report.faults.push(Fault {
                    message: format!("reduction failed on a single-block input: {e}"),
                    predicates: BTreeMap::new(),
                }),
            }
        }
    }

    if in_scope && predicates.len() > 1 {
        let first = *predicates.values().next().expect("non-empty");
        if predicates.values().any(|&p| p != first) {
            report.faults.push(Fault {
                message: "one-block equivalence breached".into(),
                predicates,
            });
        }
    }
    report.result = json!({ "double_disc": double_disc });
    if report.checks.iter().any(|c| c.verdict == CheckVerdict::Fail) {
        report.escalate(Verdict::Fail);
    }
    if !report.faults.is_empty() {
        report.escalate(Verdict::Fault);
    }
    if cfg.timing {
        report.timing_ms = Some(timer.laps);
    }
}

pub fn tree_summary(tree: &ReductionTree) -> Value {
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    for n in &tree.nodes {
        let k = match n.step {
            Step::TtContraction { .. } => "tt_contraction",
            Step::BhContraction { .. } => "bh_contraction",
            Step::Division { .. } => "division",
            Step::Leaf { .. } => "leaf",
        };
        *kinds.entry(k).or_default() += 1;
    }
    json!({ "nodes": tree.nodes.len(), "steps": kinds, "transposed": tree.transposed })
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    fs::write(path, contents).map_err(|e| format!("{}: {e}", path.display()))
}

/// Reduces the input; the certificate goes to `--cert` or inline into the report.
pub fn cmd_reduce(cfg: &RunConfig) -> Report {
    let mut report = Report::new(cfg.clone());
    if let Some(loaded) = load_input(cfg, &mut report) {
        if let Some(tree) = reduce_into(&loaded, cfg, &mut report) {
            emit_certificate(&tree, cfg, &mut report, json!({}));
        }
    }
    report
}

fn reduce_into(loaded: &Loaded, cfg: &RunConfig, report: &mut Report) -> Option<ReductionTree> {
    let fg = &loaded.face_graph;
    report.face_type = Some(fg.face_type());
    report.scope = Some(theorem_scope(fg).1);
    let t = Instant::now();
    let out = reduce_to_tree(fg);
    if cfg.timing {
        report.timing_ms = Some(BTreeMap::from([("reduction".into(), t.elapsed().as_secs_f64() * 1e3)]));
    }
    match out {
        Ok(Reduction::Certified(tree)) => Some(tree),
        Ok(Reduction::Refused { transposed, sparsity }) => {
            report.result = json!({ "refused": true, "transposed": transposed, "sparsity": sparsity });
            report.escalate(Verdict::Fail);
            None
        }
        Err(e @ Error::WrongType { .. }) => {
            report.error = Some(e.to_string());
            report.escalate(Verdict::Invalid);
            None
        }
        Err(e) => {
            report.faults.push(Fault {
                message: e.to_string(),
                predicates: BTreeMap::new(),
            });
            report.escalate(Verdict::Fault);
            None
        }
    }
}

fn emit_certificate(tree: &ReductionTree, cfg: &RunConfig, report: &mut Report, mut result: Value) {
    let cert = CertificateFile::from_tree(tree);
    result["tree"] = tree_summary(tree);
    match &cfg.certificate {
        Some(path) => {
            if let Err(e) = write_file(path, &cert.to_pretty()) {
                report.error = Some(e);
                report.escalate(Verdict::Invalid);
            }
            result["certificate"] = json!(path);
        }
        None => result["certificate"] = json!(cert),
    }
    report.result = result;
}

/// Reduces, replays with rank checks at every stage, and writes the certificate.
pub fn cmd_certify(cfg: &RunConfig) -> Report {
    let mut report = Report::new(cfg.clone());
    let Some(loaded) = load_input(cfg, &mut report) else {
        return report;
    };
    let Some(tree) = reduce_into(&loaded, cfg, &mut report) else {
        return report;
    };
    let root_block = match &loaded.block_hole {
        Some(bh) if !tree.transposed && bh.blocks().len() == 1 => Some(bh.blocks()[0].graph.clone()),
        _ => None,
    };
    let opts = ReplayOptions {
        rank: rank_options(cfg, Execution::default()),
        root_block,
    };
    let result = match replay(&tree, &opts) {
        Ok(out) => {
            if !(out.isomorphic_to_dagger && out.log.iter().all(|e| e.rank == e.target)) {
                report.faults.push(Fault {
                    message: "replay of a fresh reduction did not certify the input".into(),
                    predicates: BTreeMap::from([
                        ("isomorphic".into(), out.isomorphic_to_dagger),
                        ("ranks_full".into(), out.log.iter().all(|e| e.rank == e.target)),
                    ]),
                });
                report.escalate(Verdict::Fault);
            }
            replay_summary(&out)
        }
        Err(e) => {
            report.error = Some(e.to_string());
            report.escalate(Verdict::Fail);
            json!({ "replay_error": e.to_string() })
        }
    };
    emit_certificate(&tree, cfg, &mut report, result);
    report
}

fn replay_summary(out: &rigidlab::reduction::ReplayOutcome) -> Value {
    json!({
        "vertices": out.graph.num_vertices(),
        "edges": out.graph.num_edges(),
        "target": rank_target(out.graph.num_vertices()),
        "equals_dagger": out.equals_dagger,
        "isomorphic_to_dagger": out.isomorphic_to_dagger,
        "log": out.log,
    })
}

/// Checks a certificate against the input graph and replays it.
pub fn cmd_replay(cfg: &RunConfig) -> Report {
    let mut report = Report::new(cfg.clone());
    let Some(loaded) = load_input(cfg, &mut report) else {
        return report;
    };
    let fg = &loaded.face_graph;
    report.face_type = Some(fg.face_type());
    report.scope = Some(theorem_scope(fg).1);
    let cert = match &cfg.certificate {
        None => Err("no certificate file".to_string()),
        Some(p) => fs::read_to_string(p)
            .map_err(|e| format!("{}: {e}", p.display()))
            .and_then(|t| CertificateFile::parse(&t).map_err(|e| e.to_string())),
    };
    let (cert, (root, transposed)) = match cert.and_then(|c| Ok((c, normalize_single_block(fg).map_err(|e| e.to_string())?))) {
        Ok(x) => x,
        Err(e) => {
            report.error = Some(e);
            report.escalate(Verdict::Invalid);
            return report;
        }
    };
    let reject = |report: &mut Report, node: Option<usize>, reason: String| {
        report.result = json!({ "accepted": false, "rejected_at": node, "reason": reason });
        report.escalate(Verdict::Fail);
    };
    let tree = match cert.rebuild(&root, transposed) {
        Ok(t) => t,
        Err(CertError::Rejected { node, reason }) => {
            reject(&mut report, Some(node), reason);
            return report;
        }
        Err(e) => {
            reject(&mut report, None, e.to_string());
            return report;
        }
    };
    let opts = ReplayOptions {
        rank: rank_options(cfg, Execution::default()),
        root_block: None,
    };
    match replay(&tree, &opts) {
        Ok(out) => {
            let mut summary = replay_summary(&out);
            summary["accepted"] = json!(true);
            if !out.isomorphic_to_dagger || out.log.iter().any(|e| e.rank != e.target) {
                report.escalate(Verdict::Fail);
            }
            report.result = summary;
        }
        Err(Error::Rejected { node, reason }) => reject(&mut report, Some(node), reason),
        Err(e) => reject(&mut report, None, e.to_string()),
    }
    report
}

/// What `gen` should produce.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenKind {
    Sphere { vertices: usize },
    FaceGraph { vertices: usize, blocks: usize, holes: usize, balanced: bool },
    BlockHole { vertices: usize, blocks: usize, holes: usize },
    Fixture(String),
}

pub const FIXTURES: [&str; 6] = [
    "four-cycle",
    "pentagon-two-holes",
    "imbalanced-pentagon",
    "chorded-hexagon",
    "double-banana",
    "counterexample",
];

/// Seeded draws per `gen` call before giving up.
pub const GEN_ATTEMPTS: u64 = 1000;

pub fn draw_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(k)
}

fn random_of_type(vertices: usize, blocks: usize, holes: usize, balanced: bool, seed: u64) -> Result<FaceGraph, String> {
    let mut params = FaceGraphParams::new(vertices, blocks, holes);
    params.balanced = balanced;
    for k in 0..GEN_ATTEMPTS {
        if let Some(fg) = random_face_graph(&params, draw_seed(seed, k)).map_err(|e| e.to_string())? {
            return Ok(fg);
        }
    }
    Err(format!("no ({blocks},{holes}) face graph on {vertices} vertices in {GEN_ATTEMPTS} draws"))
}

pub fn cmd_gen(kind: &GenKind, seed: u64) -> Result<GraphFile, String> {
    Ok(match kind {
        GenKind::Sphere { vertices } => {
            let s = random_triangulated_sphere(*vertices, seed).map_err(|e| e.to_string())?;
            GraphFile::from_face_graph(&FaceGraph::sphere(s).map_err(|e| e.to_string())?)
        }
        GenKind::FaceGraph {
            vertices,
            blocks,
            holes,
            balanced,
        } => GraphFile::from_face_graph(&random_of_type(*vertices, *blocks, *holes, *balanced, seed)?),
        GenKind::BlockHole { vertices, blocks, holes } => {
            let mut last = String::new();
            for k in 0..GEN_ATTEMPTS {
                let fg = random_of_type(*vertices, *blocks, *holes, true, draw_seed(seed, k))?;
                match double_disc_blocks(&fg, seed) {
                    Ok(bh) => return Ok(GraphFile::from_block_hole(&bh)),
                    Err(e) => last = e.to_string(),
                }
            }
            return Err(last);
        }
        GenKind::Fixture(name) => GraphFile::from_face_graph(&match name.as_str() {
            "four-cycle" => fixtures::four_cycle(),
            "pentagon-two-holes" => fixtures::pentagon_two_holes(),
            "imbalanced-pentagon" => fixtures::imbalanced_pentagon(),
            "chorded-hexagon" => fixtures::chorded_hexagon(),
            "double-banana" => fixtures::double_banana_face_graph(),
            "counterexample" => fixtures::two_block_counterexample(),
            other => return Err(format!("unknown fixture {other:?}; known: {}", FIXTURES.join(", "))),
        }),
    })
}
