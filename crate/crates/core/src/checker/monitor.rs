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

//! Structural invariants of the two-bit register, checked on global
//! snapshots between events.

use serde_json::json;

use crate::checker::verdict::{Code, Verdict, Violation};
use crate::protocol::RegisterState;
use crate::sim::engine::{ChannelLedger, StepMonitor, StepView};
use crate::types::ProcessId;

/// JSON dump of every process state plus the channel counters.
pub fn dump(states: &[RegisterState], ledger: &ChannelLedger) -> serde_json::Value {
    let ids: Vec<ProcessId> = ProcessId::all(states.len()).collect();
    let channels: Vec<serde_json::Value> = ids
        .iter()
        .flat_map(|&i| ids.iter().map(move |&j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| json!({"from": i, "to": j, "sent": ledger.sent(i, j), "in_flight": ledger.in_flight(i, j)}))
        .collect();
    json!({
        "states": states.iter().map(RegisterState::snapshot).collect::<Vec<_>>(),
        "write_channels": channels,
    })
}

/// Checks L2, L3, L4, L5, P1 and P2 on one global snapshot.
///
/// `states` holds one state per process in id order; `ledger` counts the
/// WRITE messages sent and in flight per channel.
pub fn monitor_snapshot(states: &[RegisterState], ledger: &ChannelLedger) -> Verdict {
    let mut v = Verdict::ok();
    let Some(writer) = states.first().map(|s| s.writer()) else {
        return v;
    };
    let ids: Vec<ProcessId> = ProcessId::all(states.len()).collect();
    let wh = states[writer.slot()].history();
    for &i in &ids {
        let si = &states[i.slot()];
        let own = si.w_sync(i);
        let max = si.w_sync_all().iter().copied().max().unwrap_or_default();
        if own != max {
            v.push(Violation::new(
                Code::L3,
                format!("w_sync_{i}[{i}] = {own} but max is {max}"),
            ));
        }
        if si.history().len() > wh.len() || si.history() != &wh[..si.history().len()] {
            v.push(Violation::new(
                Code::L4,
                format!("history of {i} is not a prefix of the writer's"),
            ));
        }
        for &j in &ids {
            if i == j {
                continue;
            }
            let sj = &states[j.slot()];
            if own < sj.w_sync(i) {
                v.push(Violation::new(
                    Code::L2,
                    format!("w_sync_{i}[{i}] = {own} < w_sync_{j}[{i}] = {}", sj.w_sync(i)),
                ));
            }
            let (a, b) = (si.w_sync(j).get(), sj.w_sync(i).get());
            if a.abs_diff(b) > 1 {
                v.push(Violation::new(
                    Code::P2,
                    format!("w_sync_{i}[{j}] = {a} and w_sync_{j}[{i}] = {b} differ by more than 1"),
                ));
            }
            let x = si.w_sync(j).get();
            let want = if own.get() == x { x } else { x + 1 };
            let sent = ledger.sent(i, j);
            if sent != want {
                v.push(Violation::new(
                    Code::L5,
                    format!("{i} sent {sent} WRITEs to {j}, expected {want} (w_sync_{i}[{i}] = {own}, w_sync_{i}[{j}] = {x})"),
                ));
            }
            let outstanding = ledger.in_flight(i, j) + u64::from(sj.buffered(i).is_some());
            if outstanding > 2 {
                v.push(Violation::new(
                    Code::P1,
                    format!("{outstanding} WRITEs from {i} outstanding at {j}"),
                ));
            }
        }
    }
    if !v.accepted {
        let snap = dump(states, ledger);
        for x in &mut v.violations {
            x.snapshot = Some(snap.clone());
        }
    }
    v
}

/// Step monitor for the simulator: the snapshot checks plus L1 (every
/// `w_sync` entry that moves grows by one per applied WRITE) and PAR (the
/// k-th WRITE on a channel has parity `k mod 2` and carries the writer's
/// k-th value).
pub struct TwobitMonitor {
    writer: ProcessId,
}

impl TwobitMonitor {
    pub fn new(writer: ProcessId) -> TwobitMonitor {
        TwobitMonitor { writer }
    }
}

impl StepMonitor<RegisterState> for TwobitMonitor {
    fn check(&mut self, view: &StepView<'_, RegisterState>) -> Vec<Violation> {
        let mut out = monitor_snapshot(view.procs, view.ledger).violations;
        if let Some((p, before)) = view.actor {
            let after = &view.procs[p.slot()];
            let drained = view
                .delivered
                .is_some_and(|(f, m)| m.is_write() && before.buffered(f).is_some() && after.buffered(f).is_none());
            let allowed = 1 + u64::from(drained);
            for j in ProcessId::all(after.n()) {
                let (b, a) = (before.w_sync(j).get(), after.w_sync(j).get());
                if a < b || a - b > allowed {
                    out.push(Violation::new(
                        Code::L1,
                        format!("step {}: w_sync_{p}[{j}] went from {b} to {a}", view.step),
                    ));
                }
                let (b, a) = (before.r_sync(j).get(), after.r_sync(j).get());
                if a < b || a - b > 1 {
                    out.push(Violation::new(
                        Code::L1,
                        format!("step {}: r_sync_{p}[{j}] went from {b} to {a}", view.step),
                    ));
                }
            }
        }
        let wh = view.procs[self.writer.slot()].history();
        for s in view.sent {
            let Some(parity) = s.msg.parity() else {
                continue;
            };
            let k = s.ordinal;
            let value_ok = usize::try_from(k)
                .ok()
                .and_then(|k| wh.get(k))
                .is_some_and(|v| Some(v) == s.msg.value());
            if u64::from(parity) != k % 2 || !value_ok {
                out.push(Violation::new(
                    Code::PAR,
                    format!(
                        "step {}: WRITE #{k} from {} to {} is {}",
                        view.step, s.from, s.to, s.msg
                    ),
                ));
            }
        }
        if !out.is_empty() {
            let snap = json!({"step": view.step, "time": view.time, "dump": dump(view.procs, view.ledger)});
            for v in &mut out {
                v.snapshot = Some(snap.clone());
            }
        }
        out
    }
}
