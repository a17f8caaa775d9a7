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

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::checker::history::extract_ops;
use crate::checker::verdict::{Code, Verdict, Violation};
use crate::sim::config::SimConfig;
use crate::sim::trace::{Dir, Trace};
use crate::types::ProcessId;

fn crashed(trace: &Trace) -> BTreeSet<ProcessId> {
    trace
        .records
        .iter()
        .filter(|r| r.dir == Dir::Crash)
        .map(|r| r.proc)
        .collect()
}

/// Number of operations the workload of `cfg` gives each process.
pub fn planned_ops(cfg: &SimConfig) -> BTreeMap<ProcessId, u64> {
    let w = cfg.effective_workload();
    let mut out = BTreeMap::new();
    if !w.script.is_empty() {
        for op in &w.script {
            *out.entry(op.proc).or_insert(0) += 1;
        }
        return out;
    }
    if w.writes > 0 {
        out.insert(cfg.writer, w.writes);
    }
    let readers: BTreeSet<ProcessId> = w.readers.iter().copied().collect();
    for r in readers {
        if w.reads_per_reader > 0 {
            *out.entry(r).or_insert(0) += w.reads_per_reader;
        }
    }
    out
}

/// Every operation of a never-crashed process returned, and every such
/// process invoked all operations its workload planned.
pub fn check_liveness(trace: &Trace, cfg: &SimConfig) -> Verdict {
    let dead = crashed(trace);
    let mut v = Verdict::ok();
    let ops = extract_ops(trace);
    let mut invoked: HashMap<ProcessId, u64> = HashMap::new();
    for op in &ops {
        *invoked.entry(op.proc).or_insert(0) += 1;
        if !op.is_complete() && !dead.contains(&op.proc) {
            v.push(
                Violation::new(
                    Code::LIVE,
                    format!(
                        "{:?} op {} of correct process {} never returned",
                        op.kind, op.op_id, op.proc
                    ),
                )
                .with_ops([op.op_id]),
            );
        }
    }
    for (p, want) in planned_ops(cfg) {
        let got = invoked.get(&p).copied().unwrap_or(0);
        if !dead.contains(&p) && got < want {
            v.push(Violation::new(
                Code::LIVE,
                format!("correct process {p} invoked only {got} of {want} planned operations"),
            ));
        }
    }
    v
}

/// Channel rules: every deliver or drop matches exactly one earlier send on
/// the same channel, and no process acts after its crash. When `complete`
/// is set the run is over and every message sent to a never-crashed process
/// must have been delivered.
pub fn check_network(trace: &Trace, complete: bool) -> Verdict {
    let mut v = Verdict::ok();
    let mut sends: HashMap<u64, (ProcessId, ProcessId, bool)> = HashMap::new();
    let mut down: BTreeSet<ProcessId> = BTreeSet::new();
    for (i, r) in trace.records.iter().enumerate() {
        match r.dir {
            Dir::Crash => {
                down.insert(r.proc);
                continue;
            }
            Dir::Drop => {}
            _ if down.contains(&r.proc) => {
                v.push(Violation::new(
                    Code::NET,
                    format!("record {i}: {} acts after crashing", r.proc),
                ));
            }
            _ => {}
        }
        match (r.dir, r.msg) {
            (Dir::Send, Some(id)) => {
                let Some(to) = r.peer else {
                    v.push(Violation::new(
                        Code::NET,
                        format!("record {i}: send without destination"),
                    ));
                    continue;
                };
                if sends.insert(id, (r.proc, to, false)).is_some() {
                    v.push(Violation::new(
                        Code::NET,
                        format!("record {i}: message id {id} sent twice"),
                    ));
                }
            }
            (Dir::Deliver | Dir::Drop, Some(id)) => match sends.get_mut(&id) {
                Some((from, to, seen)) if Some(*from) == r.peer && *to == r.proc && !*seen => {
                    *seen = true;
                    if r.dir == Dir::Drop && !down.contains(&r.proc) {
                        v.push(Violation::new(
                            Code::NET,
                            format!("record {i}: drop at live process {}", r.proc),
                        ));
                    }
                    if r.dir == Dir::Deliver && down.contains(&r.proc) {
                        v.push(Violation::new(
                            Code::NET,
                            format!("record {i}: delivery to crashed {}", r.proc),
                        ));
                    }
                }
                _ => v.push(Violation::new(
                    Code::NET,
                    format!("record {i}: message {id} arrives without a matching unique send"),
                )),
            },
            (Dir::Send | Dir::Deliver | Dir::Drop, None) => {
                v.push(Violation::new(
                    Code::NET,
                    format!("record {i}: message record without id"),
                ));
            }
            _ => {}
        }
    }
    if complete {
        let mut lost: Vec<u64> = sends
            .iter()
            .filter(|(_, (_, to, seen))| !seen && !down.contains(to))
            .map(|(id, _)| *id)
            .collect();
        lost.sort_unstable();
        if let Some(first) = lost.first() {
            v.push(Violation::new(
                Code::NET,
                format!(
                    "{} message(s) to correct processes never delivered, first id {first}",
                    lost.len()
                ),
            ));
        }
    }
    v
}
