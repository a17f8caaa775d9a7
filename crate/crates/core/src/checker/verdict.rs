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

use std::fmt;

use serde::{Deserialize, Serialize};

/// Machine-readable violation codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Code {
    /// A read returned a value that was not yet written.
    C1,
    /// A read returned a value older than a write that finished before it.
    C2,
    /// New/old inversion between two reads.
    C3,
    /// A read returned a value different from the one written at its index.
    VAL,
    /// A `w_sync` entry changed by something other than +1.
    L1,
    /// `w_sync_i[i] < w_sync_j[i]`.
    L2,
    /// `w_sync_i[i]` is not the local maximum.
    L3,
    /// A history is not a prefix of the writer's.
    L4,
    /// Per-channel WRITE count breaks the send rules.
    L5,
    /// More than one buffered WRITE per sender, or more than two WRITEs
    /// outstanding on a channel.
    P1,
    /// `|w_sync_i[j] - w_sync_j[i]| > 1`.
    P2,
    /// A WRITE carried the wrong parity or value for its channel position.
    PAR,
    /// An operation of a never-crashed process did not return.
    LIVE,
    /// The network broke reliability, creation, or crash rules.
    NET,
    /// The automaton rejected an input.
    PROTO,
    /// No linearization exists.
    LIN,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub code: Code,
    /// Offending operation ids, if the violation is about operations.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ops: Vec<u64>,
    /// State dump, if the violation is about a snapshot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<serde_json::Value>,
    pub explanation: String,
}

impl Violation {
    pub fn new(code: Code, explanation: impl Into<String>) -> Violation {
        Violation {
            code,
            ops: Vec::new(),
            snapshot: None,
            explanation: explanation.into(),
        }
    }

    pub fn with_ops(mut self, ops: impl IntoIterator<Item = u64>) -> Violation {
        self.ops = ops.into_iter().collect();
        self
    }

    pub fn with_snapshot(mut self, snapshot: serde_json::Value) -> Violation {
        self.snapshot = Some(snapshot);
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.explanation)?;
        if !self.ops.is_empty() {
            write!(f, " (ops {:?})", self.ops)?;
        }
        Ok(())
    }
}

/// `accepted` holds exactly when `violations` is empty.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub accepted: bool,
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn ok() -> Verdict {
        Verdict {
            accepted: true,
            violations: Vec::new(),
        }
    }

    pub fn from_violations(violations: Vec<Violation>) -> Verdict {
        Verdict {
            accepted: violations.is_empty(),
            violations,
        }
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
        self.accepted = false;
    }

    pub fn merge(&mut self, other: Verdict) {
        for v in other.violations {
            self.push(v);
        }
    }

    pub fn has(&self, code: Code) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }

    pub fn codes(&self) -> Vec<Code> {
        let mut c: Vec<Code> = self.violations.iter().map(|v| v.code).collect();
        c.sort();
        c.dedup();
        c
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.accepted {
            return f.write_str("accepted");
        }
        write!(f, "rejected with {} violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}
