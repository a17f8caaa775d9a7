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

//! Checks a hand-written history with both checkers: the sequence-number
//! rules and the exhaustive search.
//!
//! ```bash
//! cargo run --example check_history
//! ```

use twobit::checker::{brute_force_linearize, check_atomicity, OpRecord, DEFAULT_BOUND};
use twobit::sim::{OpKind, Time};
use twobit::{ProcessId, SeqNum, Value};

fn op(id: u64, proc: u32, kind: OpKind, span: (usize, usize), v: u64, sn: u64) -> OpRecord {
    OpRecord {
        op_id: id,
        proc: ProcessId(proc),
        kind,
        invoke_time: Time::from_int(span.0 as u64),
        return_time: Some(Time::from_int(span.1 as u64)),
        invoke_seq: span.0,
        return_seq: Some(span.1),
        value: Some(Value::Int(v)),
        sn: Some(SeqNum(sn)),
    }
}

fn report(name: &str, ops: &[OpRecord]) {
    let v0 = Value::Int(0);
    let verdict = check_atomicity(ops, &v0).expect("well-formed");
    let lin = brute_force_linearize(ops, &v0, DEFAULT_BOUND).expect("small");
    println!("{name}: linearizable: {lin}; {verdict}");
}

fn main() {
    let good = [
        op(0, 1, OpKind::Write, (0, 4), 10, 1),
        op(1, 2, OpKind::Read, (1, 2), 0, 0),
        op(2, 3, OpKind::Read, (3, 6), 10, 1),
        op(3, 2, OpKind::Read, (7, 8), 10, 1),
    ];
    report("concurrent read may miss the write", &good);

    let inversion = [
        op(0, 1, OpKind::Write, (0, 9), 10, 1),
        op(1, 2, OpKind::Read, (1, 2), 10, 1),
        op(2, 3, OpKind::Read, (3, 4), 0, 0),
    ];
    report("new-old inversion", &inversion);

    let stale = [
        op(0, 1, OpKind::Write, (0, 1), 10, 1),
        op(1, 2, OpKind::Read, (2, 3), 0, 0),
    ];
    report("stale read", &stale);
}
