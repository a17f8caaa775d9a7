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

//! The two-bit SWMR register as a pure, event-driven state machine.
//!
//! One [`RegisterState`] per process. Inputs are operation invocations and
//! message deliveries; outputs are ordered lists of [`Action`]s. There are no
//! clocks, no I/O and no randomness here, so the same inputs always produce
//! the same outputs and successor state.
//!
//! Every blocking `wait` of the algorithm is turned into state that is
//! re-examined after each input:
//!
//! * the parity wait of a WRITE reception becomes a one-slot buffer per
//!   sender ([`RegisterState::buffered`]);
//! * the wait before answering a READ becomes a [`ReadGuard`];
//! * the quorum waits of `write()` and `read()` become [`PendingOp`].
//!
//! After a single input, actions are emitted in this order: WRITE sends
//! produced by processing messages (destinations ascending), PROCEED sends
//! from guards that became true (in the order the READs arrived), and
//! finally the operation return if the pending operation completed.

use serde::{Deserialize, Serialize};

use crate::fingerprint::{Fingerprint, FingerprintBuilder};
use crate::message::Message;
use crate::types::{ProcessId, SeqNum, Value};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error("t = {t} violates t < n/2 for n = {n}")]
    Resilience { n: usize, t: usize },
    #[error("at least two processes are required, got n = {0}")]
    TooFewProcesses(usize),
    #[error("{pid} is not a process of a system with n = {n}")]
    UnknownProcess { pid: ProcessId, n: usize },
    #[error("{0} is not the writer")]
    NotWriter(ProcessId),
    #[error("{0} already has an operation in progress")]
    OperationPending(ProcessId),
    #[error("{0} received a message from itself")]
    SelfMessage(ProcessId),
    #[error("WRITE from {from} has parity {got}, expected {expected}")]
    ParityMismatch { from: ProcessId, expected: u8, got: u8 },
    #[error("second out-of-order WRITE from {from} while one is already buffered")]
    BufferOccupied { from: ProcessId },
    #[error("WRITE from {from} would carry #{wsn} while local history ends at #{local}")]
    AheadOfLocal {
        from: ProcessId,
        wsn: SeqNum,
        local: SeqNum,
    },
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
}

/// Output of an automaton for one input event. The message type defaults to
/// the two-bit [`Message`]; the ABD baseline reuses the same shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Action<M = Message> {
    Send { to: ProcessId, msg: M },
    WriteReturn,
    ReadReturn { value: Value, sn: SeqNum },
}

/// The operation a process is currently executing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PendingOp {
    #[default]
    Idle,
    /// Waiting for `n - t` processes with `w_sync[j] = wsn`.
    Write { wsn: SeqNum },
    /// Waiting for `n - t` processes with `r_sync[j] = rsn`.
    ReadPhase1 { rsn: SeqNum },
    /// Waiting for `n - t` processes with `w_sync[j] >= sn`.
    ReadPhase2 { sn: SeqNum },
}

/// A READ that cannot be answered yet: PROCEED goes out once
/// `w_sync[requester] >= sn`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadGuard {
    pub requester: ProcessId,
    pub sn: SeqNum,
}

/// A WRITE that arrived with the wrong parity and waits for its predecessor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Buffered {
    pub parity: u8,
    pub value: Value,
}

/// Plain, fully public view of a [`RegisterState`], used for dumps and for
/// building arbitrary states in tests.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterSnapshot {
    pub me: ProcessId,
    pub writer: ProcessId,
    pub n: usize,
    pub t: usize,
    pub history: Vec<Value>,
    pub w_sync: Vec<SeqNum>,
    pub r_sync: Vec<SeqNum>,
    pub write_buffer: Vec<Option<Buffered>>,
    pub read_guards: Vec<ReadGuard>,
    pub pending: PendingOp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterState {
    me: ProcessId,
    writer: ProcessId,
    n: usize,
    t: usize,
    history: Vec<Value>,
    w_sync: Vec<SeqNum>,
    r_sync: Vec<SeqNum>,
    write_buffer: Vec<Option<Buffered>>,
    read_guards: Vec<ReadGuard>,
    pending: PendingOp,
}

pub(crate) fn check_model(n: usize, t: usize) -> Result<(), ProtocolError> {
    if n < 2 {
        return Err(ProtocolError::TooFewProcesses(n));
    }
    if 2 * t >= n {
        return Err(ProtocolError::Resilience { n, t });
    }
    Ok(())
}

pub(crate) fn check_pid(pid: ProcessId, n: usize) -> Result<(), ProtocolError> {
    if pid.0 == 0 || pid.0 as usize > n {
        return Err(ProtocolError::UnknownProcess { pid, n });
    }
    Ok(())
}

impl RegisterState {
    pub fn new(n: usize, t: usize, me: ProcessId, writer: ProcessId, v0: Value) -> Result<Self, ProtocolError> {
        check_model(n, t)?;
        check_pid(me, n)?;
        check_pid(writer, n)?;
        Ok(RegisterState {
            me,
            writer,
            n,
            t,
            history: vec![v0],
            w_sync: vec![SeqNum::ZERO; n],
            r_sync: vec![SeqNum::ZERO; n],
            write_buffer: vec![None; n],
            read_guards: Vec::new(),
            pending: PendingOp::Idle,
        })
    }

    pub fn from_snapshot(s: RegisterSnapshot) -> Result<Self, ProtocolError> {
        check_model(s.n, s.t)?;
        check_pid(s.me, s.n)?;
        check_pid(s.writer, s.n)?;
        let bad = |m: &str| Err(ProtocolError::Snapshot(m.to_string()));
        if s.w_sync.len() != s.n || s.r_sync.len() != s.n || s.write_buffer.len() != s.n {
            return bad("per-process arrays must have n entries");
        }
        if s.history.len() as u64 != s.w_sync[s.me.slot()].0 + 1 {
            return bad("history length must be w_sync[self] + 1");
        }
        for g in &s.read_guards {
            check_pid(g.requester, s.n)?;
        }
        Ok(RegisterState {
            me: s.me,
            writer: s.writer,
            n: s.n,
            t: s.t,
            history: s.history,
            w_sync: s.w_sync,
            r_sync: s.r_sync,
            write_buffer: s.write_buffer,
            read_guards: s.read_guards,
            pending: s.pending,
        })
    }

    pub fn snapshot(&self) -> RegisterSnapshot {
        RegisterSnapshot {
            me: self.me,
            writer: self.writer,
            n: self.n,
            t: self.t,
            history: self.history.clone(),
            w_sync: self.w_sync.clone(),
            r_sync: self.r_sync.clone(),
            write_buffer: self.write_buffer.clone(),
            read_guards: self.read_guards.clone(),
            pending: self.pending,
        }
    }

    pub fn me(&self) -> ProcessId {
        self.me
    }

    pub fn writer(&self) -> ProcessId {
        self.writer
    }

    pub fn is_writer(&self) -> bool {
        self.me == self.writer
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Quorum size `n - t`.
    pub fn quorum(&self) -> usize {
        self.n - self.t
    }

    pub fn history(&self) -> &[Value] {
        &self.history
    }

    pub fn w_sync(&self, j: ProcessId) -> SeqNum {
        self.w_sync[j.slot()]
    }

    pub fn w_sync_all(&self) -> &[SeqNum] {
        &self.w_sync
    }

    pub fn r_sync(&self, j: ProcessId) -> SeqNum {
        self.r_sync[j.slot()]
    }

    pub fn r_sync_all(&self) -> &[SeqNum] {
        &self.r_sync
    }

    /// Sequence number of the most recent value known locally.
    pub fn known(&self) -> SeqNum {
        self.w_sync[self.me.slot()]
    }

    pub fn buffered(&self, from: ProcessId) -> Option<&Buffered> {
        self.write_buffer[from.slot()].as_ref()
    }

    pub fn buffered_count(&self) -> usize {
        self.write_buffer.iter().filter(|b| b.is_some()).count()
    }

    pub fn read_guards(&self) -> &[ReadGuard] {
        &self.read_guards
    }

    pub fn pending(&self) -> PendingOp {
        self.pending
    }

    fn others(&self) -> impl Iterator<Item = ProcessId> + '_ {
        let me = self.me;
        ProcessId::all(self.n).filter(move |&j| j != me)
    }

    fn ensure_idle(&self) -> Result<(), ProtocolError> {
        if self.pending != PendingOp::Idle {
            return Err(ProtocolError::OperationPending(self.me));
        }
        Ok(())
    }

    fn expected_parity(&self, from: ProcessId) -> u8 {
        self.w_sync[from.slot()].next().parity()
    }

    /// `write(v)`, invoked by the writer.
    pub fn invoke_write(&mut self, v: Value) -> Result<Vec<Action>, ProtocolError> {
        if !self.is_writer() {
            return Err(ProtocolError::NotWriter(self.me));
        }
        self.ensure_idle()?;
        let me = self.me.slot();
        let wsn = self.w_sync[me].next();
        self.w_sync[me] = wsn;
        self.history.push(v.clone());
        let prev = SeqNum(wsn.0 - 1);
        let mut out: Vec<Action> = self
            .others()
            .filter(|j| self.w_sync[j.slot()] == prev)
            .map(|to| Action::Send {
                to,
                msg: Message::write(wsn.parity(), v.clone()),
            })
            .collect();
        self.pending = PendingOp::Write { wsn };
        self.settle(&mut out);
        Ok(out)
    }

    /// `read()` through the full protocol. The writer may call this too.
    pub fn invoke_read(&mut self) -> Result<Vec<Action>, ProtocolError> {
        self.ensure_idle()?;
        let me = self.me.slot();
        let rsn = self.r_sync[me].next();
        self.r_sync[me] = rsn;
        let mut out: Vec<Action> = self
            .others()
            .map(|to| Action::Send { to, msg: Message::Read })
            .collect();
        self.pending = PendingOp::ReadPhase1 { rsn };
        self.settle(&mut out);
        Ok(out)
    }

    /// Local read available to the writer only: returns the last value it
    /// wrote, with no messages.
    pub fn writer_fast_read(&self) -> Result<(Value, SeqNum), ProtocolError> {
        if !self.is_writer() {
            return Err(ProtocolError::NotWriter(self.me));
        }
        let sn = self.known();
        Ok((self.history[sn.as_index()].clone(), sn))
    }

    pub fn on_deliver(&mut self, from: ProcessId, msg: Message) -> Result<Vec<Action>, ProtocolError> {
        check_pid(from, self.n)?;
        if from == self.me {
            return Err(ProtocolError::SelfMessage(self.me));
        }
        let mut out = Vec::new();
        match msg {
            Message::Write0(v) => self.receive_write(from, 0, v, &mut out)?,
            Message::Write1(v) => self.receive_write(from, 1, v, &mut out)?,
            Message::Read => self.apply_read(from, &mut out),
            Message::Proceed => self.apply_proceed(from),
        }
        self.settle(&mut out);
        Ok(out)
    }

    fn receive_write(
        &mut self,
        from: ProcessId,
        parity: u8,
        value: Value,
        out: &mut Vec<Action>,
    ) -> Result<(), ProtocolError> {
        if parity != self.expected_parity(from) {
            let slot = &mut self.write_buffer[from.slot()];
            if slot.is_some() {
                return Err(ProtocolError::BufferOccupied { from });
            }
            *slot = Some(Buffered { parity, value });
            return Ok(());
        }
        self.apply_write(from, parity, value, out)?;
        // The stashed successor, if any, now has the expected parity.
        while self.write_buffer[from.slot()]
            .as_ref()
            .is_some_and(|b| b.parity == self.expected_parity(from))
        {
            let b = self.write_buffer[from.slot()].take().expect("checked above");
            self.apply_write(from, b.parity, b.value, out)?;
        }
        Ok(())
    }

    /// Processes an in-order `WRITE(b, v)` from `from`, then re-evaluates
    /// guards and the pending operation.
    pub fn handle_write(&mut self, from: ProcessId, parity: u8, value: Value) -> Result<Vec<Action>, ProtocolError> {
        check_pid(from, self.n)?;
        if from == self.me {
            return Err(ProtocolError::SelfMessage(self.me));
        }
        let mut out = Vec::new();
        self.apply_write(from, parity, value, &mut out)?;
        self.settle(&mut out);
        Ok(out)
    }

    fn apply_write(
        &mut self,
        from: ProcessId,
        parity: u8,
        value: Value,
        out: &mut Vec<Action>,
    ) -> Result<(), ProtocolError> {
        let expected = self.expected_parity(from);
        if parity != expected {
            return Err(ProtocolError::ParityMismatch {
                from,
                expected,
                got: parity,
            });
        }
        let me = self.me.slot();
        let wsn = self.w_sync[from.slot()].next();
        let local = self.w_sync[me];
        if wsn == local.next() {
            // New value: extend history and forward to everyone at wsn - 1.
            // `from` is still at wsn - 1 here, so it gets the echo.
            self.w_sync[me] = wsn;
            self.history.push(value.clone());
            let prev = local;
            for to in ProcessId::all(self.n) {
                if to != self.me && self.w_sync[to.slot()] == prev {
                    out.push(Action::Send {
                        to,
                        msg: Message::write(wsn.parity(), value.clone()),
                    });
                }
            }
        } else if wsn < local {
            // `from` lags: send it the next value of its history only.
            let next = wsn.next();
            out.push(Action::Send {
                to: from,
                msg: Message::write(next.parity(), self.history[next.as_index()].clone()),
            });
        } else if wsn > local {
            return Err(ProtocolError::AheadOfLocal { from, wsn, local });
        }
        self.w_sync[from.slot()] = wsn;
        Ok(())
    }

    /// Processes `READ()` from `from`.
    pub fn handle_read(&mut self, from: ProcessId) -> Result<Vec<Action>, ProtocolError> {
        check_pid(from, self.n)?;
        if from == self.me {
            return Err(ProtocolError::SelfMessage(self.me));
        }
        let mut out = Vec::new();
        self.apply_read(from, &mut out);
        self.settle(&mut out);
        Ok(out)
    }

    fn apply_read(&mut self, from: ProcessId, out: &mut Vec<Action>) {
        let sn = self.known();
        if self.w_sync[from.slot()] >= sn {
            out.push(Action::Send {
                to: from,
                msg: Message::Proceed,
            });
        } else {
            self.read_guards.push(ReadGuard { requester: from, sn });
        }
    }

    /// Processes `PROCEED()` from `from`.
    pub fn handle_proceed(&mut self, from: ProcessId) -> Result<Vec<Action>, ProtocolError> {
        check_pid(from, self.n)?;
        if from == self.me {
            return Err(ProtocolError::SelfMessage(self.me));
        }
        self.apply_proceed(from);
        let mut out = Vec::new();
        self.settle(&mut out);
        Ok(out)
    }

    fn apply_proceed(&mut self, from: ProcessId) {
        self.r_sync[from.slot()] = self.r_sync[from.slot()].next();
    }

    fn count_w_sync(&self, pred: impl Fn(SeqNum) -> bool) -> usize {
        self.w_sync.iter().filter(|&&s| pred(s)).count()
    }

    /// Fires satisfied guards and advances the pending operation.
    fn settle(&mut self, out: &mut Vec<Action>) {
        if !self.read_guards.is_empty() {
            let w_sync = &self.w_sync;
            self.read_guards.retain(|g| {
                if w_sync[g.requester.slot()] >= g.sn {
                    out.push(Action::Send {
                        to: g.requester,
                        msg: Message::Proceed,
                    });
                    false
                } else {
                    true
                }
            });
        }

        let q = self.quorum();
        if let PendingOp::Write { wsn } = self.pending {
            if self.count_w_sync(|s| s == wsn) >= q {
                self.pending = PendingOp::Idle;
                out.push(Action::WriteReturn);
            }
        }
        if let PendingOp::ReadPhase1 { rsn } = self.pending {
            if self.r_sync.iter().filter(|&&r| r == rsn).count() >= q {
                self.pending = PendingOp::ReadPhase2 { sn: self.known() };
            }
        }
        if let PendingOp::ReadPhase2 { sn } = self.pending {
            if self.count_w_sync(|s| s >= sn) >= q {
                self.pending = PendingOp::Idle;
                out.push(Action::ReadReturn {
                    value: self.history[sn.as_index()].clone(),
                    sn,
                });
            }
        }
    }

    pub fn fingerprint(&self) -> Fingerprint {
        let mut b = FingerprintBuilder::new("twobit.register.v1");
        b.u64(self.me.0 as u64)
            .u64(self.writer.0 as u64)
            .u64(self.n as u64)
            .u64(self.t as u64)
            .u64(self.history.len() as u64);
        for v in &self.history {
            b.value(v);
        }
        for s in self.w_sync.iter().chain(self.r_sync.iter()) {
            b.u64(s.0);
        }
        for slot in &self.write_buffer {
            match slot {
                None => {
                    b.u8(0);
                }
                Some(buf) => {
                    b.u8(1).u8(buf.parity).value(&buf.value);
                }
            }
        }
        b.u64(self.read_guards.len() as u64);
        for g in &self.read_guards {
            b.u64(g.requester.0 as u64).u64(g.sn.0);
        }
        match self.pending {
            PendingOp::Idle => b.u8(0),
            PendingOp::Write { wsn } => b.u8(1).u64(wsn.0),
            PendingOp::ReadPhase1 { rsn } => b.u8(2).u64(rsn.0),
            PendingOp::ReadPhase2 { sn } => b.u8(3).u64(sn.0),
        };
        b.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: u32) -> ProcessId {
        ProcessId(i)
    }

    fn sn(v: &[u64]) -> Vec<SeqNum> {
        v.iter().map(|&x| SeqNum(x)).collect()
    }

    fn send(to: u32, msg: Message) -> Action {
        Action::Send { to: p(to), msg }
    }

    fn w(v: u64) -> Value {
        Value::Int(v)
    }

    /// State with the given w_sync vector; history filled with 100 + index.
    fn state_with(n: usize, t: usize, me: u32, writer: u32, w_sync: &[u64]) -> RegisterState {
        let known = w_sync[(me - 1) as usize];
        RegisterState::from_snapshot(RegisterSnapshot {
            me: p(me),
            writer: p(writer),
            n,
            t,
            history: (0..=known).map(|i| w(100 + i)).collect(),
            w_sync: sn(w_sync),
            r_sync: vec![SeqNum::ZERO; n],
            write_buffer: vec![None; n],
            read_guards: vec![],
            pending: PendingOp::Idle,
        })
        .unwrap()
    }

    #[test]
    fn init_examples() {
        let s = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        assert_eq!(s.history(), &[w(0)]);
        assert_eq!(s.w_sync_all(), sn(&[0, 0, 0]).as_slice());
        assert_eq!(s.r_sync_all(), sn(&[0, 0, 0]).as_slice());
        assert_eq!(s.pending(), PendingOp::Idle);
        assert_eq!(s.buffered_count(), 0);

        assert_eq!(
            RegisterState::new(3, 2, p(1), p(1), w(0)),
            Err(ProtocolError::Resilience { n: 3, t: 2 })
        );

        let s = RegisterState::new(5, 2, p(5), p(1), w(7)).unwrap();
        assert_eq!(s.history(), &[w(7)]);
        assert_eq!(s.w_sync_all(), sn(&[0; 5]).as_slice());
        assert_eq!(s.r_sync_all(), sn(&[0; 5]).as_slice());
    }

    #[test]
    fn init_rejects_out_of_range_and_degenerate() {
        assert!(matches!(
            RegisterState::new(3, 1, p(4), p(1), w(0)),
            Err(ProtocolError::UnknownProcess { .. })
        ));
        assert!(matches!(
            RegisterState::new(3, 1, p(1), p(0), w(0)),
            Err(ProtocolError::UnknownProcess { .. })
        ));
        assert_eq!(
            RegisterState::new(1, 0, p(1), p(1), w(0)),
            Err(ProtocolError::TooFewProcesses(1))
        );
        assert_eq!(
            RegisterState::new(4, 2, p(1), p(1), w(0)),
            Err(ProtocolError::Resilience { n: 4, t: 2 })
        );
    }

    #[test]
    fn write_from_fresh_writer() {
        let mut s = RegisterState::new(3, 1, p(1), p(1), w(0)).unwrap();
        let out = s.invoke_write(w(42)).unwrap();
        assert_eq!(s.w_sync_all(), sn(&[1, 0, 0]).as_slice());
        assert_eq!(s.history(), &[w(0), w(42)]);
        assert_eq!(
            out,
            vec![send(2, Message::Write1(w(42))), send(3, Message::Write1(w(42)))]
        );
        assert_eq!(s.pending(), PendingOp::Write { wsn: SeqNum(1) });
    }

    #[test]
    fn write_only_reaches_peers_at_previous_index() {
        let mut s = state_with(3, 1, 1, 1, &[4, 4, 2]);
        let out = s.invoke_write(w(9)).unwrap();
        assert_eq!(s.known(), SeqNum(5));
        assert_eq!(out, vec![send(2, Message::Write1(w(9)))]);
    }

    #[test]
    fn write_rejects_bad_invocations() {
        let mut r = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        assert_eq!(r.invoke_write(w(1)), Err(ProtocolError::NotWriter(p(2))));
        let mut s = RegisterState::new(3, 1, p(1), p(1), w(0)).unwrap();
        s.invoke_write(w(1)).unwrap();
        assert_eq!(s.invoke_write(w(2)), Err(ProtocolError::OperationPending(p(1))));
        assert_eq!(s.invoke_read(), Err(ProtocolError::OperationPending(p(1))));
    }

    #[test]
    fn write_returns_on_quorum_of_echoes() {
        let mut s = RegisterState::new(3, 1, p(1), p(1), w(0)).unwrap();
        s.invoke_write(w(42)).unwrap();
        let out = s.on_deliver(p(2), Message::Write1(w(42))).unwrap();
        // wsn = 1 = w_sync[self]: no catch-up, quorum {p1, p2} reached.
        assert_eq!(out, vec![Action::WriteReturn]);
        assert_eq!(s.pending(), PendingOp::Idle);
        let out = s.on_deliver(p(3), Message::Write1(w(42))).unwrap();
        assert!(out.is_empty());
        assert_eq!(s.w_sync_all(), sn(&[1, 1, 1]).as_slice());
    }

    #[test]
    fn read_invocation() {
        let mut s = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        let out = s.invoke_read().unwrap();
        assert_eq!(s.r_sync_all(), sn(&[0, 1, 0]).as_slice());
        assert_eq!(out, vec![send(1, Message::Read), send(3, Message::Read)]);
        assert_eq!(s.pending(), PendingOp::ReadPhase1 { rsn: SeqNum(1) });
        assert_eq!(s.invoke_read(), Err(ProtocolError::OperationPending(p(2))));

        let out = s.on_deliver(p(1), Message::Proceed).unwrap();
        assert_eq!(
            out,
            vec![Action::ReadReturn {
                value: w(0),
                sn: SeqNum(0)
            }]
        );
        let out = s.invoke_read().unwrap();
        assert_eq!(s.r_sync(p(2)), SeqNum(2));
        assert_eq!(out, vec![send(1, Message::Read), send(3, Message::Read)]);
        assert_eq!(s.pending(), PendingOp::ReadPhase1 { rsn: SeqNum(2) });
    }

    #[test]
    fn fast_read() {
        let mut s = RegisterState::new(3, 1, p(1), p(1), w(5)).unwrap();
        assert_eq!(s.writer_fast_read().unwrap(), (w(5), SeqNum(0)));
        s.invoke_write(w(42)).unwrap();
        assert_eq!(s.writer_fast_read().unwrap(), (w(42), SeqNum(1)));
        let r = RegisterState::new(3, 1, p(2), p(1), w(5)).unwrap();
        assert_eq!(r.writer_fast_read(), Err(ProtocolError::NotWriter(p(2))));
    }

    #[test]
    fn out_of_order_write_is_buffered_then_drained() {
        let mut s = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        let out = s.on_deliver(p(1), Message::Write0(w(22))).unwrap();
        assert!(out.is_empty());
        assert_eq!(s.buffered(p(1)).unwrap().value, w(22));
        assert_eq!(s.history(), &[w(0)]);

        let out = s.on_deliver(p(1), Message::Write1(w(11))).unwrap();
        assert_eq!(s.history(), &[w(0), w(11), w(22)]);
        assert_eq!(s.buffered_count(), 0);
        assert_eq!(s.w_sync_all(), sn(&[2, 2, 0]).as_slice());
        // v1 forwarded to p1 (echo) and p3; v2 forwarded to p1 only since
        // p3 is still at #0 from p2's point of view.
        assert_eq!(
            out,
            vec![
                send(1, Message::Write1(w(11))),
                send(3, Message::Write1(w(11))),
                send(1, Message::Write0(w(22))),
            ]
        );
    }

    #[test]
    fn second_stash_from_same_sender_is_an_error() {
        let mut s = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        s.on_deliver(p(1), Message::Write0(w(2))).unwrap();
        assert_eq!(
            s.on_deliver(p(1), Message::Write0(w(4))),
            Err(ProtocolError::BufferOccupied { from: p(1) })
        );
    }

    #[test]
    fn handle_write_new_value_forwards_including_sender() {
        let mut s = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        let out = s.handle_write(p(1), 1, w(7)).unwrap();
        assert_eq!(s.history(), &[w(0), w(7)]);
        assert_eq!(s.w_sync_all(), sn(&[1, 1, 0]).as_slice());
        assert_eq!(
            out,
            vec![send(1, Message::Write1(w(7))), send(3, Message::Write1(w(7)))]
        );
    }

    #[test]
    fn handle_write_catch_up() {
        let mut s = state_with(3, 1, 1, 2, &[3, 0, 3]);
        let out = s.handle_write(p(2), 1, w(999)).unwrap();
        assert_eq!(out, vec![send(2, Message::Write0(w(102)))]);
        assert_eq!(s.w_sync(p(2)), SeqNum(1));
        assert_eq!(s.history().len(), 4);
    }

    #[test]
    fn handle_write_already_known() {
        let mut s = state_with(3, 1, 1, 2, &[1, 0, 1]);
        let out = s.handle_write(p(2), 1, w(101)).unwrap();
        assert!(out.is_empty());
        assert_eq!(s.w_sync(p(2)), SeqNum(1));
    }

    #[test]
    fn handle_write_parity_contract() {
        let mut s = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        assert_eq!(
            s.handle_write(p(1), 0, w(1)),
            Err(ProtocolError::ParityMismatch {
                from: p(1),
                expected: 1,
                got: 0
            })
        );
    }

    #[test]
    fn handle_read_immediate_and_guarded() {
        let mut s = state_with(3, 1, 2, 1, &[5, 5, 5]);
        assert_eq!(s.handle_read(p(3)).unwrap(), vec![send(3, Message::Proceed)]);

        let mut s = state_with(3, 1, 2, 1, &[5, 5, 3]);
        assert!(s.handle_read(p(3)).unwrap().is_empty());
        assert_eq!(
            s.read_guards(),
            &[ReadGuard {
                requester: p(3),
                sn: SeqNum(5)
            }]
        );
        // p3 is two values behind: each of its WRITEs is answered with a
        // catch-up, and the guard fires when w_sync[p3] reaches 5.
        let out = s.on_deliver(p(3), Message::Write0(w(104))).unwrap();
        assert_eq!(out, vec![send(3, Message::Write1(w(105)))]);
        assert_eq!(s.read_guards().len(), 1);
        let out = s.on_deliver(p(3), Message::Write1(w(105))).unwrap();
        assert_eq!(out, vec![send(3, Message::Proceed)]);
        assert!(s.read_guards().is_empty());

        let mut s = RegisterState::new(3, 1, p(1), p(1), w(0)).unwrap();
        assert_eq!(
            s.on_deliver(p(3), Message::Read).unwrap(),
            vec![send(3, Message::Proceed)]
        );
    }

    #[test]
    fn proceed_counts_and_completes_phase_one() {
        let mut s = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        assert!(s.handle_proceed(p(1)).unwrap().is_empty());
        assert_eq!(s.r_sync(p(1)), SeqNum(1));

        // n=3, t=1, phase 1 of read #1 with r_sync = [0,1,0].
        let mut s = state_with(3, 1, 2, 1, &[1, 1, 0]);
        s.invoke_read().unwrap();
        assert_eq!(s.r_sync_all(), sn(&[0, 1, 0]).as_slice());
        let out = s.handle_proceed(p(1)).unwrap();
        // Phase 2 with sn = 1: p1 and p2 both at >= 1, so it returns.
        assert_eq!(
            out,
            vec![Action::ReadReturn {
                value: w(101),
                sn: SeqNum(1)
            }]
        );

        // Phase 2 that has to wait for WRITE traffic.
        let mut s = state_with(5, 2, 2, 1, &[1, 1, 0, 0, 0]);
        s.invoke_read().unwrap();
        s.on_deliver(p(3), Message::Proceed).unwrap();
        assert!(s.on_deliver(p(4), Message::Proceed).unwrap().is_empty());
        assert_eq!(s.pending(), PendingOp::ReadPhase2 { sn: SeqNum(1) });
        // p3's WRITE1 brings a third process to #1.
        let out = s.on_deliver(p(3), Message::Write1(w(101))).unwrap();
        assert_eq!(
            out,
            vec![Action::ReadReturn {
                value: w(101),
                sn: SeqNum(1)
            }]
        );
    }

    #[test]
    fn late_proceed_only_counts() {
        let mut s = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        s.invoke_read().unwrap();
        s.on_deliver(p(1), Message::Proceed).unwrap();
        assert_eq!(s.pending(), PendingOp::Idle);
        let out = s.on_deliver(p(3), Message::Proceed).unwrap();
        assert!(out.is_empty());
        assert_eq!(s.r_sync_all(), sn(&[1, 1, 1]).as_slice());
        assert_eq!(s.pending(), PendingOp::Idle);
    }

    #[test]
    fn self_messages_rejected() {
        let mut s = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        assert_eq!(s.on_deliver(p(2), Message::Read), Err(ProtocolError::SelfMessage(p(2))));
    }

    #[test]
    fn fingerprint_tracks_state() {
        let a = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        let b = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap();
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = state_with(3, 1, 2, 1, &[0, 0, 0]);
        let c0 = RegisterState::new(3, 1, p(2), p(1), w(100)).unwrap();
        assert_eq!(c.fingerprint(), c0.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
        let mut snap = a.snapshot();
        snap.w_sync[2] = SeqNum(1);
        let d = RegisterState::from_snapshot(snap).unwrap();
        assert_ne!(a.fingerprint(), d.fingerprint());
    }

    #[test]
    fn snapshot_validation() {
        let mut snap = RegisterState::new(3, 1, p(2), p(1), w(0)).unwrap().snapshot();
        snap.history.push(w(1));
        assert!(matches!(
            RegisterState::from_snapshot(snap),
            Err(ProtocolError::Snapshot(_))
        ));
    }
}
