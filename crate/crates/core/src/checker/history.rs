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

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::sim::time::Time;
use crate::sim::trace::{Dir, OpKind, Trace};
use crate::types::{ProcessId, SeqNum, Value};

/// One read or write operation as seen in a trace.
///
/// `invoke_seq` and `return_seq` are positions in the trace. Operation `a`
/// precedes `b` in real time when `a.return_seq < b.invoke_seq`; for events
/// at equal virtual time the trace order is the order in which they
/// happened.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpRecord {
    pub op_id: u64,
    pub proc: ProcessId,
    pub kind: OpKind,
    pub invoke_time: Time,
    pub return_time: Option<Time>,
    pub invoke_seq: usize,
    pub return_seq: Option<usize>,
    /// Written value, or the value returned by a completed read.
    pub value: Option<Value>,
    /// Sequence number of a write, or index returned by a completed read.
    pub sn: Option<SeqNum>,
}

impl OpRecord {
    pub fn is_complete(&self) -> bool {
        self.return_seq.is_some()
    }

    /// `self` returned before `other` was invoked.
    pub fn precedes(&self, other: &OpRecord) -> bool {
        self.return_seq.is_some_and(|r| r < other.invoke_seq)
    }

    pub fn latency(&self) -> Option<Time> {
        self.return_time.map(|r| r - self.invoke_time)
    }
}

/// Pairs invoke and return records by `op_id`. Operations without a return
/// record are kept with `return_seq = None`. Sorted by invocation.
pub fn extract_ops(trace: &Trace) -> Vec<OpRecord> {
    let mut ops: BTreeMap<u64, OpRecord> = BTreeMap::new();
    for (i, r) in trace.records.iter().enumerate() {
        let (Some(op_id), Some(kind)) = (r.op_id, r.op) else {
            continue;
        };
        match r.dir {
            Dir::Invoke => {
                ops.insert(
                    op_id,
                    OpRecord {
                        op_id,
                        proc: r.proc,
                        kind,
                        invoke_time: r.t,
                        return_time: None,
                        invoke_seq: i,
                        return_seq: None,
                        value: if kind == OpKind::Write { r.val.clone() } else { None },
                        sn: if kind == OpKind::Write { r.sn.map(SeqNum) } else { None },
                    },
                );
            }
            Dir::Return => {
                if let Some(op) = ops.get_mut(&op_id) {
                    op.return_time = Some(r.t);
                    op.return_seq = Some(i);
                    if kind == OpKind::Read {
                        op.value = r.val.clone();
                        op.sn = r.sn.map(SeqNum);
                    }
                }
            }
            _ => {}
        }
    }
    let mut out: Vec<OpRecord> = ops.into_values().collect();
    out.sort_by_key(|o| o.invoke_seq);
    out
}
