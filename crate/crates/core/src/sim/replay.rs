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

//! Trace replay in two passes.
//!
//! 1. Re-execution: the invoke, deliver and crash records are fed, in trace
//!    order, to fresh automata. After each input the state fingerprint must
//!    equal the recorded one and the records that follow must be exactly
//!    the sends and returns the automaton produced.
//! 2. Regeneration: the configuration is run again and the new trace must
//!    equal the given one record for record.
//!
//! The report points at the earliest divergent record of either pass.

use serde::{Deserialize, Serialize};

use crate::abd::AbdState;
use crate::fingerprint::Fingerprint;
use crate::protocol::{Action, RegisterState};
use crate::sim::automaton::{Automaton, WireMessage};
use crate::sim::config::{Algorithm, ConfigError, SimConfig, WriterReads};
use crate::sim::engine::run;
use crate::sim::trace::{Dir, OpKind, Trace, TraceRecord};
use crate::types::ProcessId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    /// Index of the first divergent record; `None` when the headers differ.
    pub record: Option<usize>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub matched: bool,
    pub records: usize,
    /// Fingerprints after each re-executed input, in trace order.
    pub fingerprints: Vec<Fingerprint>,
    pub mismatch: Option<Mismatch>,
}

fn at(i: usize, reason: impl Into<String>) -> Mismatch {
    Mismatch {
        record: Some(i),
        reason: reason.into(),
    }
}

fn matches_action<M: WireMessage>(rec: &TraceRecord, p: ProcessId, a: &Action<M>) -> bool {
    if rec.proc != p {
        return false;
    }
    match a {
        Action::Send { to, msg } => {
            rec.dir == Dir::Send
                && rec.peer == Some(*to)
                && rec.tag.as_deref() == Some(msg.tag_name())
                && rec.val.as_ref() == msg.value()
                && rec.rid == msg.rid()
        }
        Action::WriteReturn => rec.dir == Dir::Return && rec.op == Some(OpKind::Write),
        Action::ReadReturn { value, sn } => {
            rec.dir == Dir::Return
                && rec.op == Some(OpKind::Read)
                && rec.val.as_ref() == Some(value)
                && rec.sn == Some(sn.get())
        }
    }
}

fn reexecute<A: Automaton>(
    trace: &Trace,
    cfg: &SimConfig,
) -> Result<(Vec<Fingerprint>, Option<Mismatch>), ConfigError> {
    let mut procs = ProcessId::all(cfg.n)
        .map(|p| A::init(cfg.n, cfg.t, p, cfg.writer, cfg.v0.clone()))
        .collect::<Result<Vec<A>, _>>()?;
    let mut crashed = vec![false; cfg.n];
    let mut fps = Vec::new();
    let recs = &trace.records;
    let mut i = 0;
    while i < recs.len() {
        let r = &recs[i];
        if r.proc.get() == 0 || r.proc.slot() >= cfg.n {
            return Ok((fps, Some(at(i, format!("unknown process {}", r.proc)))));
        }
        let p = r.proc;
        let actions: Vec<Action<A::Msg>> = match r.dir {
            Dir::Crash => {
                crashed[p.slot()] = true;
                i += 1;
                continue;
            }
            Dir::Drop => {
                if !crashed[p.slot()] {
                    return Ok((fps, Some(at(i, format!("drop at live process {p}")))));
                }
                i += 1;
                continue;
            }
            Dir::Send | Dir::Return => {
                return Ok((fps, Some(at(i, "record not produced by any input"))));
            }
            _ if crashed[p.slot()] => {
                return Ok((fps, Some(at(i, format!("{p} acts after crashing")))));
            }
            Dir::Deliver => {
                let (Some(from), Some(tag)) = (r.peer, r.tag.as_deref()) else {
                    return Ok((fps, Some(at(i, "deliver without sender or tag"))));
                };
                let msg = match A::Msg::from_summary(tag, r.rid, r.sn, r.val.clone()) {
                    Ok(m) => m,
                    Err(e) => return Ok((fps, Some(at(i, format!("bad message: {e}"))))),
                };
                match procs[p.slot()].on_deliver(from, msg) {
                    Ok(a) => a,
                    Err(e) => return Ok((fps, Some(at(i, format!("automaton rejected input: {e}"))))),
                }
            }
            Dir::Invoke => {
                let fast = cfg.writer_reads == WriterReads::Fast && p == cfg.writer;
                let res = match (r.op, &r.val) {
                    (Some(OpKind::Write), Some(v)) => procs[p.slot()].invoke_write(v.clone()),
                    (Some(OpKind::Read), _) if fast => procs[p.slot()]
                        .writer_fast_read()
                        .map(|(value, sn)| vec![Action::ReadReturn { value, sn }]),
                    (Some(OpKind::Read), _) => procs[p.slot()].invoke_read(),
                    _ => return Ok((fps, Some(at(i, "invoke without operation")))),
                };
                match res {
                    Ok(a) => a,
                    Err(e) => return Ok((fps, Some(at(i, format!("automaton rejected input: {e}"))))),
                }
            }
        };
        let fp = procs[p.slot()].fingerprint();
        if let Some(want) = r.fp {
            if want != fp {
                return Ok((
                    fps,
                    Some(at(i, format!("fingerprint {fp} differs from recorded {want}"))),
                ));
            }
        }
        fps.push(fp);
        let mut j = i + 1;
        for a in &actions {
            match recs.get(j) {
                Some(next) if matches_action(next, p, a) => j += 1,
                Some(_) => return Ok((fps, Some(at(j, "record differs from the produced action")))),
                None => return Ok((fps, Some(at(j, "trace ends before a produced action")))),
            }
        }
        i = j;
    }
    Ok((fps, None))
}

/// Replays `trace` against `cfg`.
pub fn replay(trace: &Trace, cfg: &SimConfig) -> Result<ReplayReport, ConfigError> {
    cfg.validate()?;
    let (fingerprints, first) = match cfg.algorithm {
        Algorithm::Twobit => reexecute::<RegisterState>(trace, cfg)?,
        Algorithm::Abd => reexecute::<AbdState>(trace, cfg)?,
    };
    let fresh = run(cfg)?.trace;
    let second = if fresh.header != trace.header {
        Some(Mismatch {
            record: None,
            reason: "trace header does not match the configuration".into(),
        })
    } else {
        let k = fresh
            .records
            .iter()
            .zip(&trace.records)
            .position(|(a, b)| a != b)
            .or_else(|| (fresh.len() != trace.len()).then(|| fresh.len().min(trace.len())));
        k.map(|k| {
            at(
                k,
                if k >= trace.len() {
                    "trace is shorter than the regenerated run".to_string()
                } else if k >= fresh.len() {
                    "trace is longer than the regenerated run".to_string()
                } else {
                    "record differs from the regenerated run".to_string()
                },
            )
        })
    };
    let mismatch = match (first, second) {
        (a, None) => a,
        (None, b) => b,
        (Some(a), Some(b)) => match (a.record, b.record) {
            (_, None) => Some(b),
            (Some(x), Some(y)) if y < x => Some(b),
            _ => Some(a),
        },
    };
    Ok(ReplayReport {
        matched: mismatch.is_none(),
        records: trace.len(),
        fingerprints,
        mismatch,
    })
}
