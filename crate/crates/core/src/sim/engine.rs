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

//! Discrete-event simulation of `n` processes over reliable, non-FIFO
//! channels with crash failures.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abd::AbdState;
use crate::checker::monitor::TwobitMonitor;
use crate::checker::{check_atomicity, check_liveness, check_network, extract_ops, Code, Verdict, Violation};
use crate::metrics::{aggregate, MetricsReport};
use crate::protocol::{Action, ProtocolError, RegisterState};
use crate::sim::automaton::{Attribution, Automaton, MemoryProxy, WireMessage};
use crate::sim::config::{Algorithm, ConfigError, CrashSpec, DelayModel, SimConfig, WriterReads};
use crate::sim::time::Time;
use crate::sim::trace::{Dir, OpKind, Trace, TraceHeader, TraceRecord};
use crate::types::{ProcessId, SeqNum, Value, ValueMode};

const GRID: u64 = 1000;

const STREAM_DELAY: u64 = 1;
const STREAM_THINK: u64 = 2;
const STREAM_VALUES: u64 = 3;
const STREAM_CRASH: u64 = 4;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Per-channel WRITE bookkeeping of the two-bit algorithm.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelLedger {
    n: usize,
    sent: Vec<u64>,
    in_flight: Vec<u64>,
}

impl ChannelLedger {
    pub fn new(n: usize) -> ChannelLedger {
        ChannelLedger {
            n,
            sent: vec![0; n * n],
            in_flight: vec![0; n * n],
        }
    }

    fn idx(&self, from: ProcessId, to: ProcessId) -> usize {
        from.slot() * self.n + to.slot()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// WRITE messages sent so far on `from -> to`.
    pub fn sent(&self, from: ProcessId, to: ProcessId) -> u64 {
        self.sent[self.idx(from, to)]
    }

    /// WRITE messages sent on `from -> to` and not yet delivered or dropped.
    pub fn in_flight(&self, from: ProcessId, to: ProcessId) -> u64 {
        self.in_flight[self.idx(from, to)]
    }

    pub fn record_send(&mut self, from: ProcessId, to: ProcessId) {
        let i = self.idx(from, to);
        self.sent[i] += 1;
        self.in_flight[i] += 1;
    }

    pub fn record_arrival(&mut self, from: ProcessId, to: ProcessId) {
        let i = self.idx(from, to);
        self.in_flight[i] -= 1;
    }
}

/// A message emitted during the current step.
#[derive(Clone, Debug)]
pub struct SentMessage<M> {
    pub from: ProcessId,
    pub to: ProcessId,
    pub ordinal: u64,
    pub msg: M,
}

/// What a [`StepMonitor`] sees after each event.
pub struct StepView<'a, A: Automaton> {
    pub step: u64,
    pub time: Time,
    pub procs: &'a [A],
    pub crashed: &'a [bool],
    pub ledger: &'a ChannelLedger,
    /// Process that took the step, with its state before the step.
    pub actor: Option<(ProcessId, &'a A)>,
    /// Delivered message and its sender.
    pub delivered: Option<(ProcessId, &'a A::Msg)>,
    pub sent: &'a [SentMessage<A::Msg>],
}

pub trait StepMonitor<A: Automaton> {
    fn check(&mut self, view: &StepView<'_, A>) -> Vec<Violation>;
}

/// Accepts everything.
pub struct NoMonitor;

impl<A: Automaton> StepMonitor<A> for NoMonitor {
    fn check(&mut self, _view: &StepView<'_, A>) -> Vec<Violation> {
        Vec::new()
    }
}

#[derive(Clone, Debug)]
enum Event<M> {
    Deliver {
        from: ProcessId,
        to: ProcessId,
        msg: M,
        id: u64,
        trace_sn: Option<u64>,
        op_id: Option<u64>,
    },
    Invoke {
        proc: ProcessId,
    },
    Crash {
        proc: ProcessId,
    },
}

#[derive(Clone, Copy, Debug)]
struct PlannedOp {
    kind: OpKind,
    at: Option<Time>,
}

#[derive(Clone, Copy, Debug)]
struct CurrentOp {
    op_id: u64,
    kind: OpKind,
    sn: Option<SeqNum>,
}

/// Crash schedule after resolving `random_crashes` from the seed.
pub fn resolved_crashes(cfg: &SimConfig) -> Vec<CrashSpec> {
    let mut out = cfg.crashes.clone();
    if let Some(rc) = cfg.random_crashes {
        let mut rng = stream(cfg.seed, STREAM_CRASH);
        let taken: BTreeSet<ProcessId> = out.iter().map(|c| c.proc).collect();
        let mut free: Vec<ProcessId> = ProcessId::all(cfg.n).filter(|p| !taken.contains(p)).collect();
        free.shuffle(&mut rng);
        let k = rng.gen_range(0..=rc.max.min(free.len()));
        for proc in free.into_iter().take(k) {
            let at = Time::lerp(Time::ZERO, rc.horizon, rng.gen_range(0..=GRID), GRID);
            out.push(CrashSpec { proc, at });
        }
    }
    out
}

fn draw_delay(model: &DelayModel, rng: &mut ChaCha8Rng) -> Time {
    match *model {
        DelayModel::Fixed { delta } => delta,
        DelayModel::Uniform { lo, hi } => Time::lerp(lo, hi, rng.gen_range(0..=GRID), GRID),
        DelayModel::AdversarialReorder { max } => {
            let k = match rng.gen_range(0..3u8) {
                0 => rng.gen_range(1..=GRID / 100),
                1 => rng.gen_range(1..=GRID),
                _ => rng.gen_range(GRID - GRID / 100..=GRID),
            };
            Time::lerp(Time::ZERO, max, k, GRID)
        }
    }
}

struct ValueSource {
    rng: ChaCha8Rng,
    mode: ValueMode,
    used: HashSet<Value>,
}

impl ValueSource {
    fn new(seed: u64, mode: ValueMode, v0: &Value) -> ValueSource {
        ValueSource {
            rng: stream(seed, STREAM_VALUES),
            mode,
            used: HashSet::from([v0.clone()]),
        }
    }

    /// Values are pairwise distinct and distinct from `v0`.
    fn next(&mut self) -> Value {
        loop {
            let v = match self.mode {
                ValueMode::U64 => Value::Int(self.rng.gen_range(1..1_000_000)),
                ValueMode::Bytes => Value::Bytes(self.rng.gen::<[u8; 8]>().to_vec()),
            };
            if self.used.insert(v.clone()) {
                return v;
            }
        }
    }
}

/// A simulation in progress. Most callers use [`run`].
pub struct Simulation<A: Automaton> {
    cfg: SimConfig,
    now: Time,
    seq: u64,
    queue: BTreeMap<(Time, u64), Event<A::Msg>>,
    procs: Vec<A>,
    crashed: Vec<bool>,
    plans: Vec<VecDeque<PlannedOp>>,
    current: Vec<Option<CurrentOp>>,
    protocol_reads: Vec<Vec<u64>>,
    writes_by_sn: HashMap<u64, u64>,
    class_counts: HashMap<(ProcessId, ProcessId, &'static str), u64>,
    ledger: ChannelLedger,
    memory: Vec<MemoryProxy>,
    delay_rng: ChaCha8Rng,
    think_rng: ChaCha8Rng,
    values: ValueSource,
    muted: HashSet<(ProcessId, ProcessId)>,
    next_op: u64,
    next_msg: u64,
    steps: u64,
    trace: Trace,
    monitor: Box<dyn StepMonitor<A>>,
    violations: Vec<Violation>,
    halted: bool,
}

impl<A: Automaton> Simulation<A> {
    pub fn new(cfg: &SimConfig, monitor: Box<dyn StepMonitor<A>>) -> Result<Self, ConfigError> {
        cfg.validate()?;
        let n = cfg.n;
        let procs = ProcessId::all(n)
            .map(|p| A::init(n, cfg.t, p, cfg.writer, cfg.v0.clone()))
            .collect::<Result<Vec<A>, ProtocolError>>()?;
        let memory = procs.iter().map(A::memory).collect();
        let mut sim = Simulation {
            cfg: cfg.clone(),
            now: Time::ZERO,
            seq: 0,
            queue: BTreeMap::new(),
            procs,
            crashed: vec![false; n],
            plans: vec![VecDeque::new(); n],
            current: vec![None; n],
            protocol_reads: vec![Vec::new(); n],
            writes_by_sn: HashMap::new(),
            class_counts: HashMap::new(),
            ledger: ChannelLedger::new(n),
            memory,
            delay_rng: stream(cfg.seed, STREAM_DELAY),
            think_rng: stream(cfg.seed, STREAM_THINK),
            values: ValueSource::new(
                cfg.workload.as_ref().and_then(|w| w.value_seed).unwrap_or(cfg.seed),
                cfg.value_mode,
                &cfg.v0,
            ),
            muted: cfg.hooks.muted.iter().copied().collect(),
            next_op: 0,
            next_msg: 0,
            steps: 0,
            trace: Trace::new(TraceHeader::for_config(cfg)),
            monitor,
            violations: Vec::new(),
            halted: false,
        };
        for c in resolved_crashes(cfg) {
            sim.schedule(c.at, Event::Crash { proc: c.proc });
        }
        sim.build_plans();
        for p in ProcessId::all(n) {
            if let Some(op) = sim.plans[p.slot()].front().copied() {
                let at = match op.at {
                    Some(at) => at,
                    None => sim.think(),
                };
                sim.schedule(at, Event::Invoke { proc: p });
            }
        }
        Ok(sim)
    }

    fn build_plans(&mut self) {
        let w = self.cfg.effective_workload();
        if !w.script.is_empty() {
            let mut script = w.script.clone();
            script.sort_by_key(|o| o.at);
            for o in script {
                self.plans[o.proc.slot()].push_back(PlannedOp {
                    kind: o.op,
                    at: Some(o.at),
                });
            }
            return;
        }
        let op = |kind| PlannedOp { kind, at: None };
        let writer = self.cfg.writer;
        let readers: BTreeSet<ProcessId> = w.readers.iter().copied().collect();
        for r in &readers {
            if *r != writer {
                self.plans[r.slot()].extend((0..w.reads_per_reader).map(|_| op(OpKind::Read)));
            }
        }
        let (nw, nr) = (
            w.writes,
            if readers.contains(&writer) {
                w.reads_per_reader
            } else {
                0
            },
        );
        let plan = &mut self.plans[writer.slot()];
        for k in 0..nw.max(nr) {
            if k < nw {
                plan.push_back(op(OpKind::Write));
            }
            if k < nr {
                plan.push_back(op(OpKind::Read));
            }
        }
    }

    fn think(&mut self) -> Time {
        let th = self.cfg.effective_workload().think;
        Time::lerp(th.lo, th.hi, self.think_rng.gen_range(0..=GRID), GRID)
    }

    fn schedule(&mut self, at: Time, ev: Event<A::Msg>) {
        self.queue.insert((at, self.seq), ev);
        self.seq += 1;
    }

    pub fn now(&self) -> Time {
        self.now
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn procs(&self) -> &[A] {
        &self.procs
    }

    pub fn crashed(&self) -> &[bool] {
        &self.crashed
    }

    pub fn ledger(&self) -> &ChannelLedger {
        &self.ledger
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty() || self.halted
    }

    /// No queued events and no pending operation at a live process.
    pub fn is_quiescent(&self) -> bool {
        self.queue.is_empty()
            && self
                .current
                .iter()
                .zip(&self.crashed)
                .all(|(c, crashed)| *crashed || c.is_none())
    }

    fn record(&mut self, rec: TraceRecord) -> usize {
        self.trace.records.push(rec);
        self.trace.records.len() - 1
    }

    fn fault(&mut self, p: ProcessId, err: ProtocolError) {
        let code = match err {
            ProtocolError::BufferOccupied { .. } => Code::P1,
            _ => Code::PROTO,
        };
        self.violations
            .push(Violation::new(code, format!("{p} at step {}: {err}", self.steps)));
        self.halted = true;
    }

    /// Executes one event. Returns false when nothing is left to do.
    pub fn step(&mut self) -> bool {
        if self.halted {
            return false;
        }
        let Some(((time, _), ev)) = self.queue.pop_first() else {
            return false;
        };
        self.now = time;
        self.steps += 1;
        let mut sent = Vec::new();
        let mut actor = None;
        let mut delivered = None;
        match ev {
            Event::Crash { proc } => {
                if !self.crashed[proc.slot()] {
                    self.crashed[proc.slot()] = true;
                    self.plans[proc.slot()].clear();
                    self.record(TraceRecord::new(time, proc, Dir::Crash));
                }
            }
            Event::Invoke { proc } => {
                if !self.crashed[proc.slot()] {
                    let before = self.procs[proc.slot()].clone();
                    self.invoke(proc, &mut sent);
                    actor = Some((proc, before));
                }
            }
            Event::Deliver {
                from,
                to,
                msg,
                id,
                trace_sn,
                op_id,
            } => {
                if msg.class() == "WRITE" {
                    self.ledger.record_arrival(from, to);
                }
                let mut rec = TraceRecord::new(time, to, Dir::Deliver);
                rec.peer = Some(from);
                rec.tag = Some(msg.tag_name().to_string());
                rec.val = msg.value().cloned();
                rec.sn = trace_sn;
                rec.rid = msg.rid();
                rec.msg = Some(id);
                rec.op_id = op_id;
                if self.crashed[to.slot()] {
                    rec.dir = Dir::Drop;
                    self.record(rec);
                } else {
                    let before = self.procs[to.slot()].clone();
                    let at = self.record(rec);
                    match self.procs[to.slot()].on_deliver(from, msg.clone()) {
                        Ok(actions) => {
                            self.stamp(at, to);
                            self.apply(to, actions, &mut sent);
                        }
                        Err(e) => self.fault(to, e),
                    }
                    actor = Some((to, before));
                    delivered = Some((from, msg));
                }
            }
        }
        if let Some((p, _)) = &actor {
            let m = self.procs[p.slot()].memory();
            self.memory[p.slot()] = self.memory[p.slot()].max(m);
        }
        if self.cfg.monitors && !self.halted {
            let view = StepView {
                step: self.steps,
                time,
                procs: &self.procs,
                crashed: &self.crashed,
                ledger: &self.ledger,
                actor: actor.as_ref().map(|(p, a)| (*p, a)),
                delivered: delivered.as_ref().map(|(f, m)| (*f, m)),
                sent: &sent,
            };
            let found = self.monitor.check(&view);
            if !found.is_empty() {
                self.violations.extend(found);
                self.halted = true;
            }
        }
        if let Some(c) = self.cfg.hooks.corrupt {
            if c.after_step == self.steps && !self.crashed[c.proc.slot()] {
                self.procs[c.proc.slot()].corrupt(c.peer, c.bump);
            }
        }
        true
    }

    fn stamp(&mut self, at: usize, p: ProcessId) {
        if self.cfg.fingerprints {
            self.trace.records[at].fp = Some(self.procs[p.slot()].fingerprint());
        }
    }

    fn invoke(&mut self, p: ProcessId, sent: &mut Vec<SentMessage<A::Msg>>) {
        let Some(op) = self.plans[p.slot()].pop_front() else {
            return;
        };
        let op_id = self.next_op;
        self.next_op += 1;
        let mut rec = TraceRecord::new(self.now, p, Dir::Invoke);
        rec.op = Some(op.kind);
        rec.op_id = Some(op_id);
        let fast = op.kind == OpKind::Read && p == self.cfg.writer && self.cfg.writer_reads == WriterReads::Fast;
        let result = match op.kind {
            OpKind::Write => {
                let v = self.values.next();
                rec.val = Some(v.clone());
                self.procs[p.slot()].invoke_write(v)
            }
            OpKind::Read if fast => {
                let at = self.record(rec);
                self.stamp(at, p);
                match self.procs[p.slot()].writer_fast_read() {
                    Ok((value, sn)) => {
                        let mut ret = TraceRecord::new(self.now, p, Dir::Return);
                        ret.op = Some(OpKind::Read);
                        ret.op_id = Some(op_id);
                        ret.val = Some(value);
                        ret.sn = Some(sn.get());
                        self.record(ret);
                        self.schedule_next(p);
                    }
                    Err(e) => self.fault(p, e),
                }
                return;
            }
            OpKind::Read => {
                self.protocol_reads[p.slot()].push(op_id);
                self.procs[p.slot()].invoke_read()
            }
        };
        let mut current = CurrentOp {
            op_id,
            kind: op.kind,
            sn: None,
        };
        if op.kind == OpKind::Write {
            let sn = self.procs[p.slot()].latest_sn();
            self.writes_by_sn.insert(sn.get(), op_id);
            current.sn = Some(sn);
            rec.sn = Some(sn.get());
        }
        self.current[p.slot()] = Some(current);
        let at = self.record(rec);
        match result {
            Ok(actions) => {
                self.stamp(at, p);
                self.apply(p, actions, sent);
            }
            Err(e) => self.fault(p, e),
        }
    }

    fn schedule_next(&mut self, p: ProcessId) {
        if let Some(op) = self.plans[p.slot()].front().copied() {
            let at = match op.at {
                Some(at) if at > self.now => at,
                Some(_) => self.now,
                None => self.now + self.think(),
            };
            self.schedule(at, Event::Invoke { proc: p });
        }
    }

    fn attribute(&self, from: ProcessId, to: ProcessId, how: Attribution) -> Option<u64> {
        match how {
            Attribution::Write(sn) => self.writes_by_sn.get(&sn.get()).copied(),
            Attribution::SenderOp => self.current[from.slot()].map(|c| c.op_id),
            Attribution::RecipientRead(k) => {
                let k = usize::try_from(k).ok()?.checked_sub(1)?;
                self.protocol_reads[to.slot()].get(k).copied()
            }
        }
    }

    fn apply(&mut self, p: ProcessId, actions: Vec<Action<A::Msg>>, sent: &mut Vec<SentMessage<A::Msg>>) {
        for a in actions {
            match a {
                Action::Send { to, msg } => {
                    let class = msg.class();
                    let ordinal = {
                        let c = self.class_counts.entry((p, to, class)).or_insert(0);
                        *c += 1;
                        *c
                    };
                    if class == "WRITE" {
                        self.ledger.record_send(p, to);
                    }
                    let op_id = self.attribute(p, to, msg.attribution(ordinal));
                    let id = self.next_msg;
                    self.next_msg += 1;
                    let trace_sn = msg.trace_sn(ordinal);
                    let mut rec = TraceRecord::new(self.now, p, Dir::Send);
                    rec.peer = Some(to);
                    rec.tag = Some(msg.tag_name().to_string());
                    rec.val = msg.value().cloned();
                    rec.sn = trace_sn;
                    rec.rid = msg.rid();
                    rec.msg = Some(id);
                    rec.op_id = op_id;
                    self.record(rec);
                    if !self.muted.contains(&(p, to)) {
                        let at = self.now + draw_delay(&self.cfg.delay, &mut self.delay_rng);
                        self.schedule(
                            at,
                            Event::Deliver {
                                from: p,
                                to,
                                msg: msg.clone(),
                                id,
                                trace_sn,
                                op_id,
                            },
                        );
                    }
                    sent.push(SentMessage {
                        from: p,
                        to,
                        ordinal,
                        msg,
                    });
                }
                Action::WriteReturn | Action::ReadReturn { .. } => {
                    let Some(cur) = self.current[p.slot()].take() else {
                        self.fault(p, ProtocolError::Snapshot("return without operation".into()));
                        return;
                    };
                    let mut rec = TraceRecord::new(self.now, p, Dir::Return);
                    rec.op = Some(cur.kind);
                    rec.op_id = Some(cur.op_id);
                    match a {
                        Action::ReadReturn { value, sn } => {
                            rec.val = Some(value);
                            rec.sn = Some(sn.get());
                        }
                        _ => rec.sn = cur.sn.map(SeqNum::get),
                    }
                    self.record(rec);
                    self.schedule_next(p);
                }
            }
        }
    }

    /// Runs until no events remain, the step budget is spent, or a monitor
    /// fires.
    pub fn run_to_end(&mut self) {
        while self.steps < self.cfg.step_budget && self.step() {}
    }

    pub fn finish(self) -> RunOutcome {
        let quiescent = self.is_quiescent();
        let budget_exhausted = !self.queue.is_empty() && !self.halted;
        let mut verdict = Verdict::from_violations(self.violations);
        verdict.merge(check_network(&self.trace, self.queue.is_empty() && !self.halted));
        verdict.merge(check_liveness(&self.trace, &self.cfg));
        match check_atomicity(&extract_ops(&self.trace), &self.cfg.v0) {
            Ok(v) => verdict.merge(v),
            Err(e) => verdict.push(Violation::new(Code::PROTO, e.to_string())),
        }
        let mut metrics = aggregate(&self.trace);
        metrics.memory = self.memory;
        RunOutcome {
            trace: self.trace,
            metrics,
            verdict,
            steps: self.steps,
            quiescent,
            budget_exhausted,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub trace: Trace,
    pub metrics: MetricsReport,
    pub verdict: Verdict,
    pub steps: u64,
    pub quiescent: bool,
    pub budget_exhausted: bool,
}

fn drive<A: Automaton>(cfg: &SimConfig, monitor: Box<dyn StepMonitor<A>>) -> Result<RunOutcome, ConfigError> {
    let mut sim = Simulation::<A>::new(cfg, monitor)?;
    sim.run_to_end();
    Ok(sim.finish())
}

/// Runs a configuration to completion and checks the result.
pub fn run(cfg: &SimConfig) -> Result<RunOutcome, ConfigError> {
    match cfg.algorithm {
        Algorithm::Twobit => drive::<RegisterState>(cfg, Box::new(TwobitMonitor::new(cfg.writer))),
        Algorithm::Abd => drive::<AbdState>(cfg, Box::new(NoMonitor)),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum QuiescenceError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("step budget of {budget} exhausted before quiescence")]
    Budget { budget: u64, outcome: Box<RunOutcome> },
    #[error("run halted: {0}")]
    Halted(Verdict),
}

/// Like [`run`] but fails unless the run ends quiescent.
pub fn run_until_quiescent(cfg: &SimConfig) -> Result<RunOutcome, QuiescenceError> {
    let out = run(cfg)?;
    if out.budget_exhausted {
        return Err(QuiescenceError::Budget {
            budget: cfg.step_budget,
            outcome: Box::new(out),
        });
    }
    if !out.quiescent {
        return Err(QuiescenceError::Halted(out.verdict));
    }
    Ok(out)
}
