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

//! Exhaustive linearizability search over values only. Sequence numbers in
//! the records are ignored.

use std::collections::HashSet;

use crate::checker::atomicity::HistoryError;
use crate::checker::history::OpRecord;
use crate::sim::trace::OpKind;
use crate::types::Value;

pub const DEFAULT_BOUND: usize = 8;

/// True iff some total order of the operations respects real-time order and
/// the sequential register semantics starting from `v0`.
///
/// Incomplete reads are dropped. Incomplete writes may take effect at any
/// point after their invocation, or not at all. Refuses histories with more
/// than `bound` complete operations.
pub fn brute_force_linearize(ops: &[OpRecord], v0: &Value, bound: usize) -> Result<bool, HistoryError> {
    let ops: Vec<&OpRecord> = ops
        .iter()
        .filter(|o| o.kind == OpKind::Write || o.is_complete())
        .collect();
    let complete = ops.iter().filter(|o| o.is_complete()).count();
    if complete > bound {
        return Err(HistoryError::TooLarge(complete, bound));
    }
    if ops.len() > 63 {
        return Err(HistoryError::TooLarge(ops.len(), 63));
    }
    // Value ids: 0 is v0, then one id per distinct value seen.
    let mut values: Vec<&Value> = vec![v0];
    let mut vals: Vec<Option<usize>> = Vec::with_capacity(ops.len());
    for o in &ops {
        vals.push(o.value.as_ref().map(|v| match values.iter().position(|x| *x == v) {
            Some(i) => i,
            None => {
                values.push(v);
                values.len() - 1
            }
        }));
    }
    let n = ops.len();
    // preds[i]: ops that must be linearized before i.
    let preds: Vec<u64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| ops[j].precedes(ops[i]))
                .fold(0u64, |m, j| m | (1 << j))
        })
        .collect();
    let required: u64 = (0..n).filter(|&i| ops[i].is_complete()).fold(0u64, |m, i| m | (1 << i));

    let mut search = Search {
        ops: &ops,
        vals: &vals,
        preds: &preds,
        required,
        failed: HashSet::new(),
    };
    Ok(search.dfs(0, 0))
}

struct Search<'a> {
    ops: &'a [&'a OpRecord],
    vals: &'a [Option<usize>],
    preds: &'a [u64],
    required: u64,
    failed: HashSet<(u64, usize)>,
}

impl Search<'_> {
    fn dfs(&mut self, done: u64, current: usize) -> bool {
        if done & self.required == self.required {
            return true;
        }
        if self.failed.contains(&(done, current)) {
            return false;
        }
        for i in 0..self.ops.len() {
            let bit = 1 << i;
            if done & bit != 0 || self.preds[i] & !done != 0 {
                continue;
            }
            let next = match self.ops[i].kind {
                OpKind::Write => match self.vals[i] {
                    Some(v) => v,
                    None => continue,
                },
                OpKind::Read => {
                    if self.vals[i] != Some(current) {
                        continue;
                    }
                    current
                }
            };
            if self.dfs(done | bit, next) {
                return true;
            }
        }
        self.failed.insert((done, current));
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::time::Time;
    use crate::types::{ProcessId, SeqNum};

    fn op(kind: OpKind, inv: usize, ret: Option<usize>, val: u64) -> OpRecord {
        OpRecord {
            op_id: inv as u64,
            proc: ProcessId(if kind == OpKind::Write { 1 } else { 2 }),
            kind,
            invoke_time: Time::from_int(inv as u64),
            return_time: ret.map(|r| Time::from_int(r as u64)),
            invoke_seq: inv,
            return_seq: ret,
            value: Some(Value::Int(val)),
            sn: Some(SeqNum(0)),
        }
    }

    const V0: Value = Value::Int(0);

    #[test]
    fn sequential_write_then_read() {
        let ops = [op(OpKind::Write, 0, Some(1), 5), op(OpKind::Read, 2, Some(3), 5)];
        assert!(brute_force_linearize(&ops, &V0, 8).unwrap());
    }

    #[test]
    fn stale_read_after_write_fails() {
        let ops = [op(OpKind::Write, 0, Some(1), 5), op(OpKind::Read, 2, Some(3), 0)];
        assert!(!brute_force_linearize(&ops, &V0, 8).unwrap());
    }

    #[test]
    fn incomplete_write_is_optional() {
        let pending = op(OpKind::Write, 0, None, 5);
        let saw_it = [pending.clone(), op(OpKind::Read, 1, Some(2), 5)];
        let missed_it = [pending.clone(), op(OpKind::Read, 1, Some(2), 0)];
        assert!(brute_force_linearize(&saw_it, &V0, 8).unwrap());
        assert!(brute_force_linearize(&missed_it, &V0, 8).unwrap());
        let inverted = [
            pending,
            op(OpKind::Read, 1, Some(2), 5),
            op(OpKind::Read, 3, Some(4), 0),
        ];
        assert!(!brute_force_linearize(&inverted, &V0, 8).unwrap());
    }

    #[test]
    fn refuses_large_histories() {
        let ops: Vec<OpRecord> = (0..9).map(|i| op(OpKind::Read, 2 * i, Some(2 * i + 1), 0)).collect();
        assert_eq!(brute_force_linearize(&ops, &V0, 8), Err(HistoryError::TooLarge(9, 8)));
        assert!(brute_force_linearize(&ops, &V0, 9).unwrap());
    }
}
