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

//! Message, control-bit and latency accounting, and the side-by-side cost
//! table for the two algorithms.
//!
//! Messages are charged to operations through the `op_id` the simulator
//! puts on every send record: a WRITE to the write whose value it carries,
//! a READ to the sender's read, a PROCEED to the read it answers. ABD
//! messages are charged by sequence number (write traffic) or by the
//! reader's read id (read traffic).
//!
//! Control bits: 2 per two-bit message (the tag; payload bytes are data).
//! For ABD, the 3-bit tag plus the bytes of its varint `rid`/`sn` fields.
//!
//! CSV columns of [`Table1::to_csv`]:
//! `algo, n, t, write_msgs_avg, write_msgs_max, read_msgs_avg,
//! read_msgs_max, control_bits_max, control_bits_avg, write_time_max,
//! read_time_max, conforms`. Times are in units of Δ.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::abd::AbdMessage;
use crate::checker::history::extract_ops;
use crate::message::CONTROL_BITS;
use crate::sim::automaton::MemoryProxy;
use crate::sim::config::{Algorithm, ConfigError, DelayModel, SimConfig};
use crate::sim::engine::run;
use crate::sim::time::Time;
use crate::sim::trace::{Dir, OpKind, Trace};
use crate::types::{ProcessId, SeqNum};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot pair configurations: {0}")]
    Pairing(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpCost {
    pub op_id: u64,
    pub proc: ProcessId,
    pub kind: OpKind,
    pub complete: bool,
    /// A writer read served locally, without messages.
    pub local: bool,
    pub messages: u64,
    pub by_tag: BTreeMap<String, u64>,
    pub latency: Option<Time>,
    /// `latency / Δ`.
    pub latency_delta: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: u64,
    pub min: u64,
    pub max: u64,
    pub avg: f64,
}

impl Summary {
    fn of(xs: impl Iterator<Item = u64>) -> Summary {
        let xs: Vec<u64> = xs.collect();
        if xs.is_empty() {
            return Summary::default();
        }
        Summary {
            count: xs.len() as u64,
            min: *xs.iter().min().expect("non-empty"),
            max: *xs.iter().max().expect("non-empty"),
            avg: xs.iter().sum::<u64>() as f64 / xs.len() as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub algorithm: Algorithm,
    pub n: usize,
    pub t: usize,
    pub delta: Time,
    pub sends: u64,
    pub delivers: u64,
    pub drops: u64,
    /// Sent but neither delivered nor dropped when the trace ends.
    pub in_flight: u64,
    pub messages_by_tag: BTreeMap<String, u64>,
    pub control_bits_total: u64,
    pub control_bits_max: u32,
    pub control_bits_avg: f64,
    /// Sends not charged to any operation.
    pub unattributed: u64,
    pub ops: Vec<OpCost>,
    /// Messages per completed write.
    pub write_msgs: Summary,
    /// Messages per completed protocol read.
    pub read_msgs: Summary,
    pub write_latency_max: Option<Time>,
    pub read_latency_max: Option<Time>,
    /// Peak per-process memory figures; filled in by the simulator.
    #[serde(default)]
    pub memory: Vec<MemoryProxy>,
}

impl MetricsReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn op(&self, op_id: u64) -> Option<&OpCost> {
        self.ops.iter().find(|o| o.op_id == op_id)
    }

    /// One row per operation. Columns: `op_id, proc, kind, complete, local,
    /// messages, latency, latency_delta`.
    pub fn ops_to_csv(&self) -> Result<String, MetricsError> {
        #[derive(Serialize)]
        struct Row<'a> {
            op_id: u64,
            proc: u32,
            kind: OpKind,
            complete: bool,
            local: bool,
            messages: u64,
            latency: Option<&'a Time>,
            latency_delta: Option<f64>,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for o in &self.ops {
            w.serialize(Row {
                op_id: o.op_id,
                proc: o.proc.get(),
                kind: o.kind,
                complete: o.complete,
                local: o.local,
                messages: o.messages,
                latency: o.latency.as_ref(),
                latency_delta: o.latency_delta,
            })?;
        }
        let bytes = w.into_inner().map_err(|e| MetricsError::Pairing(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is UTF-8"))
    }
}

fn control_bits(alg: Algorithm, rec: &crate::sim::trace::TraceRecord) -> u32 {
    match alg {
        Algorithm::Twobit => CONTROL_BITS,
        Algorithm::Abd => AbdMessage::from_parts(
            rec.tag.as_deref().unwrap_or(""),
            rec.rid,
            rec.sn.map(SeqNum),
            rec.val.clone(),
        )
        .map(|m| m.control_bits())
        .unwrap_or(0),
    }
}

fn in_delta(t: Time, delta: Time) -> f64 {
    let r: Ratio<u64> = t.in_units_of(delta);
    *r.numer() as f64 / *r.denom() as f64
}

/// Exact counts over one trace.
pub fn aggregate(trace: &Trace) -> MetricsReport {
    let h = &trace.header;
    let mut by_tag: BTreeMap<String, u64> = BTreeMap::new();
    let mut per_op: HashMap<u64, BTreeMap<String, u64>> = HashMap::new();
    let (mut sends, mut delivers, mut drops, mut unattributed) = (0, 0, 0, 0);
    let (mut bits_total, mut bits_max) = (0u64, 0u32);
    for r in &trace.records {
        match r.dir {
            Dir::Send => {
                sends += 1;
                let tag = r.tag.clone().unwrap_or_default();
                *by_tag.entry(tag.clone()).or_insert(0) += 1;
                let bits = control_bits(h.algorithm, r);
                bits_total += u64::from(bits);
                bits_max = bits_max.max(bits);
                match r.op_id {
                    Some(id) => *per_op.entry(id).or_default().entry(tag).or_insert(0) += 1,
                    None => unattributed += 1,
                }
            }
            Dir::Deliver => delivers += 1,
            Dir::Drop => drops += 1,
            _ => {}
        }
    }
    let ops: Vec<OpCost> = extract_ops(trace)
        .into_iter()
        .map(|o| {
            let tags = per_op.remove(&o.op_id).unwrap_or_default();
            let messages = tags.values().sum();
            let latency = o.latency();
            OpCost {
                op_id: o.op_id,
                proc: o.proc,
                kind: o.kind,
                complete: o.is_complete(),
                local: o.kind == OpKind::Read && o.proc == h.writer && messages == 0 && latency == Some(Time::ZERO),
                messages,
                by_tag: tags,
                latency,
                latency_delta: latency.map(|l| in_delta(l, h.delta)),
            }
        })
        .collect();
    let done = |k: OpKind| ops.iter().filter(move |o| o.kind == k && o.complete && !o.local);
    MetricsReport {
        algorithm: h.algorithm,
        n: h.n,
        t: h.t,
        delta: h.delta,
        sends,
        delivers,
        drops,
        in_flight: sends - delivers - drops,
        messages_by_tag: by_tag,
        control_bits_total: bits_total,
        control_bits_max: bits_max,
        control_bits_avg: if sends == 0 {
            0.0
        } else {
            bits_total as f64 / sends as f64
        },
        unattributed,
        write_msgs: Summary::of(done(OpKind::Write).map(|o| o.messages)),
        read_msgs: Summary::of(done(OpKind::Read).map(|o| o.messages)),
        write_latency_max: done(OpKind::Write).filter_map(|o| o.latency).max(),
        read_latency_max: done(OpKind::Read).filter_map(|o| o.latency).max(),
        ops,
        memory: Vec::new(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Row {
    pub algo: Algorithm,
    pub n: usize,
    pub t: usize,
    pub write_msgs_avg: f64,
    pub write_msgs_max: u64,
    pub read_msgs_avg: f64,
    pub read_msgs_max: u64,
    pub control_bits_max: u32,
    pub control_bits_avg: f64,
    pub write_time_max: f64,
    pub read_time_max: f64,
    /// Twobit: every write takes 2Δ and every read at most 4Δ. ABD: every
    /// write takes 2Δ and every read 4Δ.
    pub conforms: bool,
}

impl Table1Row {
    pub fn from_report(m: &MetricsReport) -> Table1Row {
        let two = m.delta * 2;
        let four = m.delta * 4;
        let timed = |k: OpKind| m.ops.iter().filter(move |o| o.kind == k && o.complete && !o.local);
        let writes_ok = timed(OpKind::Write).all(|o| o.latency == Some(two));
        let reads_ok = match m.algorithm {
            Algorithm::Twobit => timed(OpKind::Read).all(|o| o.latency.is_some_and(|l| l <= four)),
            Algorithm::Abd => timed(OpKind::Read).all(|o| o.latency == Some(four)),
        };
        let all_done = m.ops.iter().all(|o| o.complete);
        Table1Row {
            algo: m.algorithm,
            n: m.n,
            t: m.t,
            write_msgs_avg: m.write_msgs.avg,
            write_msgs_max: m.write_msgs.max,
            read_msgs_avg: m.read_msgs.avg,
            read_msgs_max: m.read_msgs.max,
            control_bits_max: m.control_bits_max,
            control_bits_avg: m.control_bits_avg,
            write_time_max: m.write_latency_max.map_or(0.0, |l| in_delta(l, m.delta)),
            read_time_max: m.read_latency_max.map_or(0.0, |l| in_delta(l, m.delta)),
            conforms: writes_ok && reads_ok && all_done,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
}

impl Table1 {
    pub fn to_csv(&self) -> Result<String, MetricsError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| MetricsError::Pairing(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is UTF-8"))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serializes")
    }

    pub fn row(&self, algo: Algorithm, n: usize) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.algo == algo && r.n == n)
    }

    pub fn all_conform(&self) -> bool {
        self.rows.iter().all(|r| r.conforms)
    }
}

/// Runs paired configurations (one twobit and one ABD per `n`, same
/// workload, fixed delays) and builds the comparison table, ordered by `n`
/// then algorithm.
pub fn compare_table1(configs: &[SimConfig]) -> Result<Table1, MetricsError> {
    let mut groups: BTreeMap<usize, Vec<&SimConfig>> = BTreeMap::new();
    for c in configs {
        if !matches!(c.delay, DelayModel::Fixed { .. }) {
            return Err(MetricsError::Pairing(format!("n = {} does not use fixed delays", c.n)));
        }
        groups.entry(c.n).or_default().push(c);
    }
    let mut rows = Vec::new();
    for (n, group) in groups {
        let [a, b] = group.as_slice() else {
            return Err(MetricsError::Pairing(format!(
                "n = {n} has {} configurations, expected 2",
                group.len()
            )));
        };
        let (tb, abd) = match (a.algorithm, b.algorithm) {
            (Algorithm::Twobit, Algorithm::Abd) => (*a, *b),
            (Algorithm::Abd, Algorithm::Twobit) => (*b, *a),
            _ => {
                return Err(MetricsError::Pairing(format!(
                    "n = {n} needs one twobit and one abd configuration"
                )))
            }
        };
        let same = tb.t == abd.t
            && tb.delay == abd.delay
            && tb.effective_workload() == abd.effective_workload()
            && tb.seed == abd.seed
            && tb.crashes == abd.crashes
            && tb.writer == abd.writer;
        if !same {
            return Err(MetricsError::Pairing(format!(
                "n = {n}: configurations differ beyond the algorithm"
            )));
        }
        for c in [tb, abd] {
            rows.push(Table1Row::from_report(&run(c)?.metrics));
        }
    }
    Ok(Table1 { rows })
}

/// Paired bench configurations for each `n`, with `t = (n - 1) / 2`.
pub fn bench_configs(
    ns: &[usize],
    algos: &[Algorithm],
    writes: u64,
    reads_per_reader: u64,
    seed: u64,
) -> Vec<SimConfig> {
    let mut out = Vec::new();
    for &n in ns {
        for &a in algos {
            let mut c = SimConfig::new(n, (n.max(1) - 1) / 2).with_seed(seed).with_algorithm(a);
            let mut w = c.effective_workload();
            w.writes = writes;
            w.reads_per_reader = reads_per_reader;
            c.workload = Some(w);
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::config::{ScriptedOp, WorkloadSpec};

    fn single(n: usize, op: OpKind, proc: u32) -> SimConfig {
        SimConfig::new(n, (n - 1) / 2).with_workload(WorkloadSpec::scripted(vec![ScriptedOp {
            at: Time::ZERO,
            proc: ProcessId(proc),
            op,
        }]))
    }

    #[test]
    fn single_write_message_bounds() {
        let m = run(&single(3, OpKind::Write, 1)).unwrap().metrics;
        let w = &m.ops[0];
        assert!((2..=6).contains(&w.messages), "{}", w.messages);
        assert_eq!(m.unattributed, 0);
        assert_eq!(m.sends, m.delivers + m.drops + m.in_flight);
        assert_eq!(m.control_bits_max, 2);
    }

    #[test]
    fn single_read_costs_two_per_peer() {
        let m = run(&single(3, OpKind::Read, 2)).unwrap().metrics;
        assert_eq!(m.ops[0].messages, 4);
        assert_eq!(m.ops[0].by_tag.get("READ"), Some(&2));
        assert_eq!(m.ops[0].by_tag.get("PROCEED"), Some(&2));
    }

    #[test]
    fn pairing_is_checked() {
        let cfgs = bench_configs(&[3], &[Algorithm::Twobit], 1, 1, 0);
        assert!(matches!(compare_table1(&cfgs), Err(MetricsError::Pairing(_))));
        let mut both = bench_configs(&[3], &[Algorithm::Twobit, Algorithm::Abd], 2, 1, 0);
        assert_eq!(compare_table1(&both).unwrap().rows.len(), 2);
        both[1].delay = DelayModel::AdversarialReorder { max: Time::from_int(1) };
        assert!(compare_table1(&both).is_err());
    }
}
