use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const TOOL: &str = concat!("rigidlab ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Maxwell,
    Sparsity,
    Girth,
    Separation,
    Connectivity,
    Rank,
    Reduction,
}

impl CheckName {
    pub const ALL: [CheckName; 7] = [
        CheckName::Maxwell,
        CheckName::Sparsity,
        CheckName::Girth,
        CheckName::Separation,
        CheckName::Connectivity,
        CheckName::Rank,
        CheckName::Reduction,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckVerdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Invalid,
    Fault,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
            Verdict::Invalid => 3,
            Verdict::Fault => 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Check,
    Reduce,
    Certify,
    Replay,
    Mine,
}

/// Everything that determines a run; echoed verbatim into its report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub certificate: Option<PathBuf>,
    pub seed: u64,
    pub trials: usize,
    pub max_vertices: usize,
    pub checks: Vec<CheckName>,
    pub oracle: bool,
    pub jobs: Option<usize>,
    pub timing: bool,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            input: None,
            output: None,
            certificate: None,
            seed: 0,
            trials: rigidlab::rigidity::DEFAULT_TRIALS,
            max_vertices: 20,
            checks: CheckName::ALL.to_vec(),
            oracle: false,
            jobs: None,
            timing: false,
        }
    }

    pub fn selected(&self, c: CheckName) -> bool {
        self.checks.contains(&c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub check: CheckName,
    pub verdict: CheckVerdict,
    pub detail: Value,
}

/// A disagreement between predicates that must coincide.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub message: String,
    pub predicates: BTreeMap<String, bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub face_type: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    pub checks: Vec<CheckOutcome>,
    pub faults: Vec<Fault>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Command-specific payload.
    #[serde(skip_serializing_if = "Value::is_null")]
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<String, f64>>,
    pub verdict: Verdict,
}

impl Report {
    pub fn new(config: RunConfig) -> Self {
        Report {
            tool: TOOL.into(),
            config,
            input_digest: None,
            face_type: None,
            scope: None,
            checks: Vec::new(),
            faults: Vec::new(),
            error: None,
            result: Value::Null,
            timing_ms: None,
            verdict: Verdict::Pass,
        }
    }

    pub fn invalid(config: RunConfig, error: impl ToString) -> Self {
        let mut r = Report::new(config);
        r.error = Some(error.to_string());
        r.verdict = Verdict::Invalid;
        r
    }

    pub fn check(&self, c: CheckName) -> Option<&CheckOutcome> {
        self.checks.iter().find(|o| o.check == c)
    }

    /// Raises the verdict; a worse outcome is never downgraded.
    pub fn escalate(&mut self, v: Verdict) {
        self.verdict = self.verdict.max(v);
    }

    pub fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}
