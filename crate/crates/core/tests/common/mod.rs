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

//! Test-side oracles shared by the integration suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;

use twobit::checker::OpRecord;
use twobit::sim::{Dir, OpKind, Time, Trace};
use twobit::{ProcessId, SeqNum, Value};

/// Counter-only model of the two forwarding rules, driven by the arrival
/// order recorded in a trace. It never looks at values, tags or sequence
/// numbers in the trace: message k on a channel is identified by counting
/// sends on that channel.
///
/// Per process it keeps how many values it knows and how many values it
/// believes each peer knows. On receiving value x from p_j:
/// - knowing exactly x-1 values, forward x to every peer believed to know
///   exactly x-1 (p_j included);
/// - knowing y > x values, send value x+1 to p_j only;
/// - otherwise send nothing.
///
/// Arrivals ahead of their turn wait until the earlier value on the same
/// channel has been received.
pub struct SendRuleModel {
    n: usize,
    writer: usize,
    know: Vec<u64>,
    view: Vec<Vec<u64>>,
    taken: Vec<Vec<u64>>,
    early: BTreeSet<(usize, usize, u64)>,
}

#[derive(Debug, Default)]
pub struct SendRuleReport {
    /// WRITE messages per channel `(from, to)`, 1-based process ids.
    pub per_channel: BTreeMap<(u32, u32), u64>,
    /// WRITE messages carrying the k-th written value, keyed by k.
    pub per_value: BTreeMap<u64, u64>,
    /// `(from, to, value)` triples seen more than once.
    pub duplicates: Vec<(u32, u32, Value)>,
}

impl SendRuleModel {
    pub fn new(n: usize, writer: ProcessId) -> Self {
        SendRuleModel {
            n,
            writer: writer.get() as usize - 1,
            know: vec![0; n],
            view: vec![vec![0; n]; n],
            taken: vec![vec![0; n]; n],
            early: BTreeSet::new(),
        }
    }

    fn write(&mut self) -> Vec<(usize, u64)> {
        let w = self.writer;
        self.know[w] += 1;
        let x = self.know[w];
        (0..self.n)
            .filter(|&j| j != w && self.view[w][j] == x - 1)
            .map(|j| (j, x))
            .collect()
    }

    fn receive(&mut self, i: usize, j: usize, x: u64) -> Vec<(usize, u64)> {
        let mut out = Vec::new();
        if self.know[i] + 1 == x {
            self.know[i] = x;
            for l in (0..self.n).filter(|&l| l != i) {
                if self.view[i][l] == x - 1 {
                    out.push((l, x));
                }
            }
        } else if self.know[i] > x {
            out.push((j, x + 1));
        }
        self.view[i][j] = x;
        out
    }

    fn arrive(&mut self, i: usize, j: usize, k: u64) -> Vec<(usize, u64)> {
        self.early.insert((i, j, k));
        let mut out = Vec::new();
        while self.early.remove(&(i, j, self.taken[i][j] + 1)) {
            self.taken[i][j] += 1;
            let x = self.taken[i][j];
            out.extend(self.receive(i, j, x));
        }
        out
    }

    /// Replays the trace through the model. Fails on the first step whose
    /// WRITE sends differ from the prediction, or whose values are not the
    /// writer's values at the predicted positions.
    pub fn check(trace: &Trace) -> Result<SendRuleReport, String> {
        let n = trace.header.n;
        let mut m = SendRuleModel::new(n, trace.header.writer);
        let mut written: Vec<Value> = Vec::new();
        let mut ordinal: HashMap<u64, u64> = HashMap::new();
        let mut sent_on: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        let mut report = SendRuleReport::default();
        let mut seen: BTreeSet<(u32, u32, Value)> = BTreeSet::new();

        let recs = &trace.records;
        let mut i = 0;
        while i < recs.len() {
            let r = &recs[i];
            let me = r.proc.get() as usize - 1;
            let predicted = match r.dir {
                Dir::Invoke if r.op == Some(OpKind::Write) => {
                    written.push(r.val.clone().ok_or("write without value")?);
                    m.write()
                }
                Dir::Deliver if is_write(r.tag.as_deref()) => {
                    let id = r.msg.ok_or("deliver without id")?;
                    let k = *ordinal.get(&id).ok_or(format!("record {i}: unknown message {id}"))?;
                    let from = r.peer.ok_or("deliver without sender")?.get() as usize - 1;
                    m.arrive(me, from, k)
                }
                _ => Vec::new(),
            };
            let mut actual = Vec::new();
            let mut j = i + 1;
            while j < recs.len() && recs[j].dir == Dir::Send && recs[j].proc == r.proc {
                let s = &recs[j];
                if is_write(s.tag.as_deref()) {
                    let to = s.peer.ok_or("send without peer")?.get() as usize - 1;
                    let c = sent_on.entry((me, to)).or_insert(0);
                    *c += 1;
                    ordinal.insert(s.msg.ok_or("send without id")?, *c);
                    actual.push((to, *c));
                    let val = s.val.clone().ok_or("WRITE without value")?;
                    let expect = written.get(*c as usize - 1);
                    if expect != Some(&val) {
                        return Err(format!("record {j}: WRITE #{c} carries {val:?}, expected {expect:?}"));
                    }
                    if !seen.insert((me as u32 + 1, to as u32 + 1, val.clone())) {
                        report.duplicates.push((me as u32 + 1, to as u32 + 1, val));
                    }
                    *report.per_channel.entry((me as u32 + 1, to as u32 + 1)).or_insert(0) += 1;
                    *report.per_value.entry(*c).or_insert(0) += 1;
                }
                j += 1;
            }
            let mut predicted = predicted;
            predicted.sort();
            actual.sort();
            if predicted != actual {
                return Err(format!(
                    "record {i}: predicted WRITE sends {predicted:?}, trace has {actual:?}"
                ));
            }
            i = j;
        }
        Ok(report)
    }
}

fn is_write(tag: Option<&str>) -> bool {
    matches!(tag, Some("WRITE0") | Some("WRITE1"))
}

/// Random small SWMR history over distinct values. The writer is p1 and
/// writes value 100 + k as its k-th write; readers return a value together
/// with the matching index. Reads pick a plausible index most of the time
/// and an arbitrary one otherwise, so both valid and invalid histories
/// come out.
pub fn random_history<R: Rng>(rng: &mut R, max_complete: usize) -> Vec<OpRecord> {
    let procs = rng.gen_range(2..=4u32);
    let total = rng.gen_range(1..=max_complete);
    let mut per_proc: Vec<usize> = vec![0; procs as usize];
    for _ in 0..total {
        per_proc[rng.gen_range(0..procs as usize)] += 1;
    }
    // Each process is a queue of ops; each op is an invoke then a return.
    let mut remaining: Vec<usize> = per_proc.iter().map(|&c| 2 * c).collect();
    let mut open: Vec<Option<usize>> = vec![None; procs as usize];
    let mut ops: Vec<OpRecord> = Vec::new();
    let mut writes: Vec<(usize, Option<usize>)> = Vec::new();
    let mut seq = 0;
    while remaining.iter().any(|&r| r > 0) {
        let live: Vec<usize> = (0..procs as usize).filter(|&p| remaining[p] > 0).collect();
        let p = live[rng.gen_range(0..live.len())];
        remaining[p] -= 1;
        match open[p].take() {
            None => {
                let kind = if p == 0 { OpKind::Write } else { OpKind::Read };
                let mut rec = OpRecord {
                    op_id: ops.len() as u64,
                    proc: ProcessId(p as u32 + 1),
                    kind,
                    invoke_time: Time::from_int(seq as u64),
                    return_time: None,
                    invoke_seq: seq,
                    return_seq: None,
                    value: None,
                    sn: None,
                };
                if kind == OpKind::Write {
                    writes.push((seq, None));
                    let k = writes.len() as u64;
                    rec.value = Some(Value::Int(100 + k));
                    rec.sn = Some(SeqNum(k));
                }
                open[p] = Some(ops.len());
                ops.push(rec);
            }
            Some(idx) => {
                let rec = &mut ops[idx];
                rec.return_seq = Some(seq);
                rec.return_time = Some(Time::from_int(seq as u64));
                if let Some(k) = rec.sn.filter(|_| rec.kind == OpKind::Write) {
                    writes[k.get() as usize - 1].1 = Some(seq);
                }
            }
        }
        seq += 1;
    }
    // Reads choose their results once the write timeline is known.
    let nw = writes.len() as u64;
    for rec in ops.iter_mut().filter(|o| o.kind == OpKind::Read) {
        let inv = rec.invoke_seq;
        let ret = rec.return_seq.expect("generated ops are complete");
        let lo = writes.iter().filter(|w| w.1.is_some_and(|r| r < inv)).count() as u64;
        let hi = writes.iter().filter(|w| w.0 < ret).count() as u64;
        let k = if rng.gen_bool(0.75) {
            rng.gen_range(lo..=hi)
        } else {
            rng.gen_range(0..=nw + 1)
        };
        rec.sn = Some(SeqNum(k));
        rec.value = Some(Value::Int(if k == 0 { 0 } else { 100 + k }));
    }
    // Occasionally leave the last operation of a process without a return.
    if rng.gen_bool(0.3) {
        let p = rng.gen_range(0..procs);
        if let Some(last) = ops.iter_mut().filter(|o| o.proc.get() == p + 1).last() {
            last.return_seq = None;
            last.return_time = None;
            if last.kind == OpKind::Read {
                last.value = None;
                last.sn = None;
            }
        }
    }
    ops
}
