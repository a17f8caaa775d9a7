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

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use twobit::checker::{brute_force_linearize, check_atomicity, extract_ops, Code, OpRecord, DEFAULT_BOUND};
use twobit::sim::{run, OpKind, SimConfig, Time};
use twobit::{ProcessId, SeqNum, Value};

fn agree(ops: &[OpRecord]) -> (bool, bool) {
    let v0 = Value::Int(0);
    let sn = check_atomicity(ops, &v0)
        .expect("generated histories are in model")
        .accepted;
    let lin = brute_force_linearize(ops, &v0, DEFAULT_BOUND).expect("within bound");
    (sn, lin)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]
    #[test]
    fn checkers_agree_on_random_histories(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ops = common::random_history(&mut rng, DEFAULT_BOUND);
        let (sn, lin) = agree(&ops);
        prop_assert_eq!(sn, lin, "history {:#?}", ops);
    }
}

#[test]
fn generator_produces_both_outcomes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..2000 {
        let ops = common::random_history(&mut rng, DEFAULT_BOUND);
        match agree(&ops) {
            (true, true) => yes += 1,
            (false, false) => no += 1,
            other => panic!("disagreement {other:?} on {ops:#?}"),
        }
    }
    assert!(yes > 200 && no > 200, "accepted {yes}, rejected {no}");
}

fn op(id: u64, proc: u32, kind: OpKind, inv: usize, ret: Option<usize>, sn: u64) -> OpRecord {
    OpRecord {
        op_id: id,
        proc: ProcessId(proc),
        kind,
        invoke_time: Time::from_int(inv as u64),
        return_time: ret.map(|r| Time::from_int(r as u64)),
        invoke_seq: inv,
        return_seq: ret,
        value: (kind == OpKind::Write || ret.is_some()).then(|| Value::Int(if sn == 0 { 0 } else { 100 + sn })),
        sn: (kind == OpKind::Write || ret.is_some()).then_some(SeqNum(sn)),
    }
}

#[test]
fn crafted_violations_are_rejected_by_both() {
    use OpKind::{Read, Write};
    let cases: Vec<(Code, Vec<OpRecord>)> = vec![
        (
            Code::C1,
            vec![op(0, 2, Read, 0, Some(1), 1), op(1, 1, Write, 2, Some(3), 1)],
        ),
        (
            Code::C2,
            vec![op(0, 1, Write, 0, Some(10), 1), op(1, 2, Read, 12, Some(13), 0)],
        ),
        (
            Code::C3,
            vec![
                op(0, 1, Write, 0, Some(9), 1),
                op(1, 1, Write, 10, None, 2),
                op(2, 2, Read, 11, Some(12), 2),
                op(3, 3, Read, 13, Some(14), 1),
            ],
        ),
        (
            Code::C1,
            vec![op(0, 1, Write, 0, Some(1), 1), op(1, 2, Read, 2, Some(3), 2)],
        ),
    ];
    for (code, ops) in cases {
        let v = check_atomicity(&ops, &Value::Int(0)).unwrap();
        assert!(v.has(code), "expected {code:?}: {v}");
        assert_eq!(agree(&ops), (false, false));
    }
}

#[test]
fn six_op_simulated_history_agrees() {
    let mut cfg = SimConfig::new(3, 1).with_seed(9);
    let mut w = cfg.effective_workload();
    w.writes = 2;
    w.reads_per_reader = 2;
    cfg = cfg.with_workload(w);
    let trace = run(&cfg).unwrap().trace;
    let ops = extract_ops(&trace);
    assert_eq!(ops.len(), 6);
    assert_eq!(agree(&ops), (true, true));
}
