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

//! Sequence-number based atomicity check for single-writer histories.
//!
//! With `read[x]` a read returning index `x` and `write[y]` the write of
//! index `y`:
//!
//! * C1: if `read[x]` returns before `write[y]` is invoked then `x < y`.
//! * C2: if `write[x]` returns before `read[y]` is invoked then `x <= y`.
//! * C3: if `read[x]` returns before `read[y]` is invoked then `x <= y`.
//! * VAL: each read returns the value written at its index (`v0` at 0).
//!
//! A read of an index that no write ever took is reported as C1.

use std::collections::BTreeMap;

use crate::checker::history::OpRecord;
use crate::checker::verdict::{Code, Verdict, Violation};
use crate::sim::trace::OpKind;
use crate::types::{ProcessId, SeqNum, Value};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HistoryError {
    #[error("history has writes from {0} and {1}; only single-writer histories are checked")]
    MultiWriter(ProcessId, ProcessId),
    #[error("write op {op_id} has no sequence number")]
    MissingSn { op_id: u64 },
    #[error("writes are not numbered 1, 2, ... in invocation order (op {op_id} has {sn})")]
    BadNumbering { op_id: u64, sn: SeqNum },
    #[error("{0} operations exceed the brute-force bound of {1}")]
    TooLarge(usize, usize),
}

pub fn check_atomicity(ops: &[OpRecord], v0: &Value) -> Result<Verdict, HistoryError> {
    let mut writer = None;
    let mut writes: BTreeMap<SeqNum, &OpRecord> = BTreeMap::new();
    let mut ordered: Vec<&OpRecord> = ops.iter().filter(|o| o.kind == OpKind::Write).collect();
    ordered.sort_by_key(|o| o.invoke_seq);
    for (k, w) in ordered.iter().enumerate() {
        match writer {
            None => writer = Some(w.proc),
            Some(p) if p != w.proc => return Err(HistoryError::MultiWriter(p, w.proc)),
            _ => {}
        }
        let sn = w.sn.ok_or(HistoryError::MissingSn { op_id: w.op_id })?;
        if sn != SeqNum(k as u64 + 1) {
            return Err(HistoryError::BadNumbering { op_id: w.op_id, sn });
        }
        writes.insert(sn, w);
    }
    let reads: Vec<&OpRecord> = ops
        .iter()
        .filter(|o| o.kind == OpKind::Read && o.is_complete())
        .collect();

    let mut verdict = Verdict::ok();
    for r in &reads {
        let Some(x) = r.sn else {
            verdict.push(Violation::new(Code::VAL, format!("read {} returned no index", r.op_id)).with_ops([r.op_id]));
            continue;
        };
        let expected = if x == SeqNum::ZERO {
            Some(v0)
        } else {
            writes.get(&x).and_then(|w| w.value.as_ref())
        };
        match expected {
            None => verdict.push(
                Violation::new(
                    Code::C1,
                    format!("read {} returned index {x} that was never written", r.op_id),
                )
                .with_ops([r.op_id]),
            ),
            Some(v) if r.value.as_ref() != Some(v) => verdict.push(
                Violation::new(
                    Code::VAL,
                    format!(
                        "read {} returned {:?} at index {x}, written value is {v}",
                        r.op_id, r.value
                    ),
                )
                .with_ops([r.op_id]),
            ),
            _ => {}
        }
        for (&y, w) in &writes {
            if r.precedes(w) && x >= y {
                verdict.push(
                    Violation::new(
                        Code::C1,
                        format!("read {} returned {x} before write {y} was invoked", r.op_id),
                    )
                    .with_ops([r.op_id, w.op_id]),
                );
            }
            if w.precedes(r) && y > x {
                verdict.push(
                    Violation::new(
                        Code::C2,
                        format!("write {y} returned before read {} started, which returned {x}", r.op_id),
                    )
                    .with_ops([w.op_id, r.op_id]),
                );
            }
        }
    }
    for a in &reads {
        for b in &reads {
            if let (Some(x), Some(y)) = (a.sn, b.sn) {
                if a.precedes(b) && x > y {
                    verdict.push(
                        Violation::new(
                            Code::C3,
                            format!(
                                "read {} returned {x} before read {} started, which returned {y}",
                                a.op_id, b.op_id
                            ),
                        )
                        .with_ops([a.op_id, b.op_id]),
                    );
                }
            }
        }
    }
    Ok(verdict)
}
