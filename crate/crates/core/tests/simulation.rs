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

use twobit::checker::{extract_ops, Code, TwobitMonitor};
use twobit::sim::config::Corruption;
use twobit::sim::{
    run, run_until_quiescent, CrashSpec, DelayModel, Dir, OpKind, ScriptedOp, SimConfig, Simulation, Time, Trace,
    WorkloadSpec,
};
use twobit::{ProcessId, RegisterState};

fn script(ops: &[(&str, u32, OpKind)]) -> WorkloadSpec {
    WorkloadSpec::scripted(
        ops.iter()
            .map(|&(at, p, op)| ScriptedOp {
                at: at.parse().unwrap(),
                proc: ProcessId(p),
                op,
            })
            .collect(),
    )
}

fn latency_of(trace: &Trace, kind: OpKind) -> Vec<Time> {
    extract_ops(trace)
        .iter()
        .filter(|o| o.kind == kind)
        .filter_map(|o| o.latency())
        .collect()
}

#[test]
fn single_write_returns_at_two_delta() {
    let cfg = SimConfig::new(3, 1).with_workload(script(&[("0", 1, OpKind::Write)]));
    let out = run(&cfg).unwrap();
    assert!(out.verdict.accepted);
    assert_eq!(latency_of(&out.trace, OpKind::Write), vec![Time::from_int(2)]);
}

#[test]
fn writer_crash_before_delivery_leaves_write_pending() {
    let mut cfg = SimConfig::new(3, 1).with_workload(script(&[
        ("0", 1, OpKind::Write),
        ("0", 2, OpKind::Read),
        ("3", 2, OpKind::Read),
        ("0", 3, OpKind::Read),
    ]));
    cfg.crashes.push(CrashSpec {
        proc: ProcessId(1),
        at: Time::new(1, 2),
    });
    let out = run(&cfg).unwrap();
    assert!(out.verdict.accepted, "{}", out.verdict);
    let ops = extract_ops(&out.trace);
    let write = ops.iter().find(|o| o.kind == OpKind::Write).unwrap();
    assert!(!write.is_complete());
    assert!(ops.iter().filter(|o| o.kind == OpKind::Read).all(|o| o.is_complete()));
}

#[test]
fn same_seed_gives_byte_identical_traces() {
    let cfg = SimConfig::new(5, 2).with_seed(99).with_delay(DelayModel::Uniform {
        lo: Time::new(1, 3),
        hi: Time::from_int(3),
    });
    assert_eq!(run(&cfg).unwrap().trace.to_jsonl(), run(&cfg).unwrap().trace.to_jsonl());
    let other = cfg.clone().with_seed(100);
    assert_ne!(
        run(&cfg).unwrap().trace.to_jsonl(),
        run(&other).unwrap().trace.to_jsonl()
    );
}

#[test]
fn one_crash_still_converges_all_correct_histories() {
    let mut cfg = SimConfig::new(5, 2).with_workload(script(&[("0", 1, OpKind::Write)]));
    cfg.crashes.push(CrashSpec {
        proc: ProcessId(4),
        at: Time::new(1, 2),
    });
    let mut sim = Simulation::<RegisterState>::new(&cfg, Box::new(TwobitMonitor::new(cfg.writer))).unwrap();
    sim.run_to_end();
    assert!(sim.is_quiescent());
    let alive: Vec<&RegisterState> = sim
        .procs()
        .iter()
        .zip(sim.crashed())
        .filter(|(_, &c)| !c)
        .map(|(p, _)| p)
        .collect();
    assert_eq!(alive.len(), 4);
    assert!(alive
        .iter()
        .all(|p| p.history() == alive[0].history() && p.history().len() == 2));
    assert!(sim.finish().verdict.accepted);
}

#[test]
fn empty_workload_is_immediately_quiescent() {
    let cfg = SimConfig::new(3, 1).with_workload(WorkloadSpec::empty());
    let out = run_until_quiescent(&cfg).unwrap();
    assert_eq!(out.steps, 0);
    assert!(out.trace.is_empty());
}

#[test]
fn concurrent_read_and_write_both_return() {
    let cfg = SimConfig::new(3, 1).with_workload(script(&[("0", 1, OpKind::Write), ("0", 2, OpKind::Read)]));
    let out = run_until_quiescent(&cfg).unwrap();
    assert!(out.verdict.accepted);
    assert!(extract_ops(&out.trace).iter().all(|o| o.is_complete()));
}

#[test]
fn t_crashes_among_idle_processes_keep_liveness() {
    let mut cfg = SimConfig::new(7, 3).with_seed(4);
    let mut w = cfg.effective_workload();
    w.readers = vec![ProcessId(2), ProcessId(3), ProcessId(4)];
    cfg = cfg.with_workload(w);
    for (p, at) in [(5, "0"), (6, "3/2"), (7, "4")] {
        cfg.crashes.push(CrashSpec {
            proc: ProcessId(p),
            at: at.parse().unwrap(),
        });
    }
    let out = run_until_quiescent(&cfg).unwrap();
    assert!(out.verdict.accepted, "{}", out.verdict);
}

#[test]
fn muted_channels_are_reported_as_liveness_failures() {
    let mut cfg = SimConfig::new(3, 1).with_workload(script(&[("0", 2, OpKind::Read)]));
    cfg.hooks.muted = vec![(ProcessId(1), ProcessId(2)), (ProcessId(3), ProcessId(2))];
    let out = run(&cfg).unwrap();
    assert!(out.verdict.has(Code::LIVE), "{}", out.verdict);
}

#[test]
fn exhausted_budget_with_pending_ops_fails() {
    let mut cfg = SimConfig::new(5, 2);
    cfg.step_budget = 50;
    let out = run(&cfg).unwrap();
    assert!(out.budget_exhausted);
    assert!(out.verdict.has(Code::LIVE));
    assert!(run_until_quiescent(&cfg).is_err());
}

#[test]
fn corrupted_view_is_caught_by_the_monitors() {
    let mut cfg = SimConfig::new(3, 1).with_seed(1);
    cfg.hooks.corrupt = Some(Corruption {
        after_step: 5,
        proc: ProcessId(2),
        peer: ProcessId(3),
        bump: 2,
    });
    let out = run(&cfg).unwrap();
    assert!(!out.verdict.accepted);
    let codes = out.verdict.codes();
    assert!(
        codes.iter().any(|c| matches!(c, Code::P2 | Code::L2 | Code::L5)),
        "{codes:?}"
    );
    let v = out.verdict.violations.iter().find(|v| v.snapshot.is_some());
    assert!(v.is_some(), "violations carry a state dump");
}

#[test]
fn monitors_do_not_change_the_trace() {
    for seed in 0..20 {
        let cfg = twobit::sim::fuzz::standard_fuzz_config(seed);
        let mut off = cfg.clone();
        off.monitors = false;
        assert_eq!(run(&cfg).unwrap().trace, run(&off).unwrap().trace);
    }
}

#[test]
fn history_extraction_examples() {
    let cfg = SimConfig::new(3, 1).with_workload(script(&[("0", 1, OpKind::Write), ("5", 2, OpKind::Read)]));
    let ops = extract_ops(&run(&cfg).unwrap().trace);
    assert_eq!(ops.len(), 2);
    assert!(ops.iter().all(|o| o.is_complete()));

    let mut crash = cfg.clone();
    crash.crashes.push(CrashSpec {
        proc: ProcessId(1),
        at: Time::new(1, 2),
    });
    let ops = extract_ops(&run(&crash).unwrap().trace);
    assert!(!ops[0].is_complete() && ops[0].kind == OpKind::Write);

    let empty = run(&SimConfig::new(3, 1).with_workload(WorkloadSpec::empty()))
        .unwrap()
        .trace;
    assert!(extract_ops(&empty).is_empty());
}

#[test]
fn deliveries_to_crashed_processes_are_drops() {
    let mut cfg = SimConfig::new(3, 1).with_workload(script(&[("0", 1, OpKind::Write)]));
    cfg.crashes.push(CrashSpec {
        proc: ProcessId(3),
        at: Time::ZERO,
    });
    let out = run(&cfg).unwrap();
    let drops = out.trace.records.iter().filter(|r| r.dir == Dir::Drop).count();
    assert!(drops >= 1);
    assert!(out.verdict.accepted);
}

/// Under random delays bounded by Δ and back-to-back writes, reads stay
/// within 4Δ.
#[test]
fn reads_under_heavy_writes_stay_within_four_delta() {
    let mut worst = Time::ZERO;
    for seed in 0..200 {
        let mut cfg = SimConfig::new(5, 2).with_seed(seed).with_delay(DelayModel::Uniform {
            lo: Time::new(1, 1000),
            hi: Time::from_int(1),
        });
        let mut w = cfg.effective_workload();
        w.writes = 40;
        w.think.hi = Time::ZERO;
        cfg = cfg.with_workload(w);
        let out = run(&cfg).unwrap();
        assert!(out.verdict.accepted);
        for l in latency_of(&out.trace, OpKind::Read) {
            worst = worst.max(l);
        }
    }
    println!("worst read latency {worst}");
    assert!(worst <= Time::from_int(4), "worst read {worst}");
}
