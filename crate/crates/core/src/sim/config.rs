// Copyright 2026 The twobit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Simulation configuration. A [`SimConfig`] fully determines a run.
//!
//! JSON schema (version 1), all keys except `n` and `t` optional:
//!
//! ```json
//! {
//!   "version": 1,
//!   "n": 5, "t": 2, "writer": 1, "seed": 7,
//!   "v0": 0, "value_mode": "u64",
//!   "algorithm": "twobit",
//!   "delay": {"kind": "fixed", "delta": "1"},
//!   "crashes": [{"proc": 3, "at": "5/2"}],
//!   "random_crashes": {"max": 2, "horizon": "40"},
//!   "workload": {
//!     "writes": 10, "value_seed": 1,
//!     "readers": [2, 3, 4], "reads_per_reader": 10,
//!     "think": {"lo": "0", "hi": "3"},
//!     "script": [{"at": "0", "proc": 2, "op": "read"}]
//!   },
//!   "writer_reads": "fast",
//!   "step_budget": 1000000,
//!   "monitors": true,
//!   "fingerprints": true,
//!   "hooks": {"muted": [[1, 2]], "corrupt": null}
//! }
//! ```
//!
//! Delay kinds: `fixed` (`delta`), `uniform` (`lo`, `hi`),
//! `adversarial_reorder` (`max`). When `workload` is absent the default is 10
//! writes, every non-writer reading 10 times, think time uniform in
//! `[0, 3Δ]`. A non-empty `script` replaces the generated plan.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::protocol::{check_model, check_pid, ProtocolError};
use crate::sim::time::Time;
use crate::sim::trace::OpKind;
use crate::types::{ProcessId, Value, ValueMode};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_STEP_BUDGET: u64 = 1_000_000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error(transparent)]
    Model(#[from] ProtocolError),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("unsupported config version {0} (expected {CONFIG_VERSION})")]
    Version(u32),
    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Twobit,
    Abd,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Twobit => "twobit",
            Algorithm::Abd => "abd",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "twobit" => Ok(Algorithm::Twobit),
            "abd" => Ok(Algorithm::Abd),
            other => invalid(format!("unknown algorithm {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelayModel {
    Fixed {
        delta: Time,
    },
    Uniform {
        lo: Time,
        hi: Time,
    },
    /// Per-message delays in `(0, max]`, biased towards the extremes so that
    /// messages on the same channel overtake each other often.
    AdversarialReorder {
        max: Time,
    },
}

impl Default for DelayModel {
    fn default() -> Self {
        DelayModel::Fixed {
            delta: Time::from_int(1),
        }
    }
}

impl DelayModel {
    /// The bound Δ used as the latency unit.
    pub fn delta(&self) -> Time {
        match *self {
            DelayModel::Fixed { delta } => delta,
            DelayModel::Uniform { hi, .. } => hi,
            DelayModel::AdversarialReorder { max } => max,
        }
    }

    /// The same bound with maximal reordering.
    pub fn adversarial(&self) -> DelayModel {
        DelayModel::AdversarialReorder { max: self.delta() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrashSpec {
    pub proc: ProcessId,
    pub at: Time,
}

/// Crashes drawn from the run seed: up to `max` distinct processes, each at
/// a time uniform in `[0, horizon]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomCrashes {
    pub max: usize,
    pub horizon: Time,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThinkTime {
    pub lo: Time,
    pub hi: Time,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub writes: u64,
    /// Seed for written values; defaults to the run seed.
    #[serde(default)]
    pub value_seed: Option<u64>,
    #[serde(default)]
    pub readers: Vec<ProcessId>,
    #[serde(default)]
    pub reads_per_reader: u64,
    pub think: ThinkTime,
    /// Explicit operations. When non-empty, replaces the generated plan:
    /// each process runs its scripted ops in order, each one starting at
    /// its `at` time or when the previous one returns, whichever is later.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub script: Vec<ScriptedOp>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedOp {
    pub at: Time,
    pub proc: ProcessId,
    pub op: OpKind,
}

impl WorkloadSpec {
    /// 10 writes, each non-writer reads 10 times, think time `[0, 3Δ]`.
    pub fn default_for(n: usize, writer: ProcessId, delta: Time) -> WorkloadSpec {
        WorkloadSpec {
            writes: 10,
            value_seed: None,
            readers: ProcessId::all(n).filter(|&p| p != writer).collect(),
            reads_per_reader: 10,
            think: ThinkTime {
                lo: Time::ZERO,
                hi: delta * 3,
            },
            script: Vec::new(),
        }
    }

    pub fn empty() -> WorkloadSpec {
        WorkloadSpec {
            writes: 0,
            value_seed: None,
            readers: Vec::new(),
            reads_per_reader: 0,
            think: ThinkTime {
                lo: Time::ZERO,
                hi: Time::ZERO,
            },
            script: Vec::new(),
        }
    }

    /// A scripted workload.
    pub fn scripted(script: Vec<ScriptedOp>) -> WorkloadSpec {
        WorkloadSpec {
            script,
            ..WorkloadSpec::empty()
        }
    }
}

/// How the writer performs its reads when it is listed as a reader.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WriterReads {
    /// Return the local last-written value without messages.
    #[default]
    Fast,
    /// Run the full read protocol.
    Protocol,
}

/// Test-only fault injection. Both hooks break the model on purpose and
/// exist to check that the monitors and the liveness checker notice.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultHooks {
    /// Channels `(from, to)` whose messages are silently lost.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub muted: Vec<(ProcessId, ProcessId)>,
    /// Raise `w_sync_proc[peer]` by `bump` after `after_step` events.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupt: Option<Corruption>,
}

impl FaultHooks {
    pub fn is_empty(&self) -> bool {
        self.muted.is_empty() && self.corrupt.is_none()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corruption {
    pub after_step: u64,
    pub proc: ProcessId,
    pub peer: ProcessId,
    pub bump: u64,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}
fn default_writer() -> ProcessId {
    ProcessId(1)
}
fn default_budget() -> u64 {
    DEFAULT_STEP_BUDGET
}
fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub n: usize,
    pub t: usize,
    #[serde(default = "default_writer")]
    pub writer: ProcessId,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub v0: Value,
    #[serde(default)]
    pub value_mode: ValueMode,
    #[serde(default)]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub delay: DelayModel,
    #[serde(default)]
    pub crashes: Vec<CrashSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_crashes: Option<RandomCrashes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workload: Option<WorkloadSpec>,
    #[serde(default)]
    pub writer_reads: WriterReads,
    #[serde(default = "default_budget")]
    pub step_budget: u64,
    #[serde(default = "yes")]
    pub monitors: bool,
    #[serde(default = "yes")]
    pub fingerprints: bool,
    #[serde(default, skip_serializing_if = "FaultHooks::is_empty")]
    pub hooks: FaultHooks,
}

impl SimConfig {
    /// Failure-free configuration with fixed unit delays and the default
    /// workload.
    pub fn new(n: usize, t: usize) -> SimConfig {
        SimConfig {
            version: CONFIG_VERSION,
            n,
            t,
            writer: ProcessId(1),
            seed: 0,
            v0: Value::Int(0),
            value_mode: ValueMode::U64,
            algorithm: Algorithm::Twobit,
            delay: DelayModel::default(),
            crashes: Vec::new(),
            random_crashes: None,
            workload: None,
            writer_reads: WriterReads::Fast,
            step_budget: DEFAULT_STEP_BUDGET,
            monitors: true,
            fingerprints: true,
            hooks: FaultHooks::default(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_delay(mut self, delay: DelayModel) -> Self {
        self.delay = delay;
        self
    }

    pub fn with_workload(mut self, workload: WorkloadSpec) -> Self {
        self.workload = Some(workload);
        self
    }

    pub fn delta(&self) -> Time {
        self.delay.delta()
    }

    pub fn effective_workload(&self) -> WorkloadSpec {
        self.workload
            .clone()
            .unwrap_or_else(|| WorkloadSpec::default_for(self.n, self.writer, self.delta()))
    }

    pub fn from_json(text: &str) -> Result<SimConfig, ConfigError> {
        let cfg: SimConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<SimConfig, ConfigError> {
        SimConfig::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::Version(self.version));
        }
        check_model(self.n, self.t)?;
        check_pid(self.writer, self.n)?;
        if self.v0.mode() != self.value_mode {
            return invalid("v0 does not match value_mode");
        }
        match self.delay {
            DelayModel::Fixed { delta } if delta.is_zero() => return invalid("fixed delta must be > 0"),
            DelayModel::Uniform { lo, hi } if lo > hi || hi.is_zero() => {
                return invalid("uniform delay needs lo <= hi and hi > 0")
            }
            DelayModel::AdversarialReorder { max } if max.is_zero() => {
                return invalid("adversarial max delay must be > 0")
            }
            _ => {}
        }
        let mut crashed = BTreeSet::new();
        for c in &self.crashes {
            check_pid(c.proc, self.n)?;
            crashed.insert(c.proc);
        }
        let random = self.random_crashes.map_or(0, |r| r.max);
        if crashed.len() + random > self.t {
            return invalid(format!(
                "{} scheduled plus up to {random} random crashes exceed t = {}",
                crashed.len(),
                self.t
            ));
        }
        if let Some(w) = &self.workload {
            for r in &w.readers {
                check_pid(*r, self.n)?;
            }
            if w.think.lo > w.think.hi {
                return invalid("think time needs lo <= hi");
            }
            for op in &w.script {
                check_pid(op.proc, self.n)?;
                if op.op == OpKind::Write && op.proc != self.writer {
                    return invalid(format!("scripted write at {} which is not the writer", op.proc));
                }
            }
        }
        if self.step_budget == 0 {
            return invalid("step_budget must be >= 1");
        }
        for (a, b) in &self.hooks.muted {
            check_pid(*a, self.n)?;
            check_pid(*b, self.n)?;
        }
        if let Some(c) = &self.hooks.corrupt {
            check_pid(c.proc, self.n)?;
            check_pid(c.peer, self.n)?;
            if c.proc == c.peer {
                return invalid("corruption must target a peer entry");
            }
        }
        Ok(())
    }
}
