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

//! The interface the simulator drives. Both register algorithms implement
//! [`Automaton`].

use std::fmt::Debug;

use crate::abd::{AbdMessage, AbdState};
use crate::fingerprint::Fingerprint;
use crate::message::{CodecError, Message, Tag, CONTROL_BITS};
use crate::protocol::{Action, ProtocolError, RegisterState};
use crate::types::{ProcessId, SeqNum, Value};

/// Which operation a message belongs to, for cost accounting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attribution {
    /// The write with this sequence number.
    Write(SeqNum),
    /// The operation currently pending at the sender.
    SenderOp,
    /// The k-th (1-based) protocol read of the recipient.
    RecipientRead(u64),
}

pub trait WireMessage: Clone + Debug + PartialEq {
    fn tag_name(&self) -> &'static str;

    fn value(&self) -> Option<&Value>;

    /// Sequence number carried on the wire, if any.
    fn wire_sn(&self) -> Option<SeqNum>;

    fn rid(&self) -> Option<u64>;

    fn control_bits(&self) -> u32;

    /// Messages are counted per channel and per class; `ordinal` below is
    /// the 1-based position of this message within its class.
    fn class(&self) -> &'static str;

    fn attribution(&self, ordinal: u64) -> Attribution;

    /// Sequence number to put on trace records.
    fn trace_sn(&self, ordinal: u64) -> Option<u64>;

    /// Rebuilds a message from a trace record.
    fn from_summary(tag: &str, rid: Option<u64>, sn: Option<u64>, value: Option<Value>) -> Result<Self, CodecError>;
}

impl WireMessage for Message {
    fn tag_name(&self) -> &'static str {
        self.tag().name()
    }

    fn value(&self) -> Option<&Value> {
        Message::value(self)
    }

    fn wire_sn(&self) -> Option<SeqNum> {
        None
    }

    fn rid(&self) -> Option<u64> {
        None
    }

    fn control_bits(&self) -> u32 {
        CONTROL_BITS
    }

    fn class(&self) -> &'static str {
        match self {
            Message::Write0(_) | Message::Write1(_) => "WRITE",
            Message::Read => "READ",
            Message::Proceed => "PROCEED",
        }
    }

    fn attribution(&self, ordinal: u64) -> Attribution {
        match self {
            Message::Write0(_) | Message::Write1(_) => Attribution::Write(SeqNum(ordinal)),
            Message::Read => Attribution::SenderOp,
            Message::Proceed => Attribution::RecipientRead(ordinal),
        }
    }

    fn trace_sn(&self, ordinal: u64) -> Option<u64> {
        self.is_write().then_some(ordinal)
    }

    fn from_summary(tag: &str, _rid: Option<u64>, _sn: Option<u64>, value: Option<Value>) -> Result<Self, CodecError> {
        Message::from_parts(Tag::parse(tag)?, value)
    }
}

impl WireMessage for AbdMessage {
    fn tag_name(&self) -> &'static str {
        AbdMessage::tag_name(self)
    }

    fn value(&self) -> Option<&Value> {
        AbdMessage::value(self)
    }

    fn wire_sn(&self) -> Option<SeqNum> {
        self.sn()
    }

    fn rid(&self) -> Option<u64> {
        AbdMessage::rid(self)
    }

    fn control_bits(&self) -> u32 {
        AbdMessage::control_bits(self)
    }

    fn class(&self) -> &'static str {
        self.tag_name()
    }

    fn attribution(&self, _ordinal: u64) -> Attribution {
        match self {
            AbdMessage::WriteReq { sn, .. } | AbdMessage::WriteAck { sn } => Attribution::Write(*sn),
            AbdMessage::ReadReq { .. } | AbdMessage::WriteBack { .. } => Attribution::SenderOp,
            AbdMessage::ReadReply { rid, .. } | AbdMessage::WriteBackAck { rid } => Attribution::RecipientRead(*rid),
        }
    }

    fn trace_sn(&self, _ordinal: u64) -> Option<u64> {
        self.sn().map(SeqNum::get)
    }

    fn from_summary(tag: &str, rid: Option<u64>, sn: Option<u64>, value: Option<Value>) -> Result<Self, CodecError> {
        AbdMessage::from_parts(tag, rid, sn.map(SeqNum), value)
    }
}

/// Per-process memory figures, reported as counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MemoryProxy {
    pub history_len: usize,
    pub guards: usize,
    pub buffered: usize,
}

impl MemoryProxy {
    pub fn max(self, o: MemoryProxy) -> MemoryProxy {
        MemoryProxy {
            history_len: self.history_len.max(o.history_len),
            guards: self.guards.max(o.guards),
            buffered: self.buffered.max(o.buffered),
        }
    }
}

pub trait Automaton: Clone + Debug {
    type Msg: WireMessage;

    fn init(n: usize, t: usize, me: ProcessId, writer: ProcessId, v0: Value) -> Result<Self, ProtocolError>;

    fn invoke_write(&mut self, v: Value) -> Result<Vec<Action<Self::Msg>>, ProtocolError>;

    fn invoke_read(&mut self) -> Result<Vec<Action<Self::Msg>>, ProtocolError>;

    fn writer_fast_read(&self) -> Result<(Value, SeqNum), ProtocolError>;

    fn on_deliver(&mut self, from: ProcessId, msg: Self::Msg) -> Result<Vec<Action<Self::Msg>>, ProtocolError>;

    fn fingerprint(&self) -> Fingerprint;

    /// Sequence number of the most recent write known locally.
    fn latest_sn(&self) -> SeqNum;

    fn memory(&self) -> MemoryProxy;

    /// Fault hook: raise this process's knowledge of `peer` by `bump`.
    /// Returns false when the automaton has no such notion.
    fn corrupt(&mut self, _peer: ProcessId, _bump: u64) -> bool {
        false
    }
}

impl Automaton for RegisterState {
    type Msg = Message;

    fn init(n: usize, t: usize, me: ProcessId, writer: ProcessId, v0: Value) -> Result<Self, ProtocolError> {
        RegisterState::new(n, t, me, writer, v0)
    }

    fn invoke_write(&mut self, v: Value) -> Result<Vec<Action>, ProtocolError> {
        RegisterState::invoke_write(self, v)
    }

    fn invoke_read(&mut self) -> Result<Vec<Action>, ProtocolError> {
        RegisterState::invoke_read(self)
    }

    fn writer_fast_read(&self) -> Result<(Value, SeqNum), ProtocolError> {
        RegisterState::writer_fast_read(self)
    }

    fn on_deliver(&mut self, from: ProcessId, msg: Message) -> Result<Vec<Action>, ProtocolError> {
        RegisterState::on_deliver(self, from, msg)
    }

    fn fingerprint(&self) -> Fingerprint {
        RegisterState::fingerprint(self)
    }

    fn latest_sn(&self) -> SeqNum {
        self.known()
    }

    fn memory(&self) -> MemoryProxy {
        MemoryProxy {
            history_len: self.history().len(),
            guards: self.read_guards().len(),
            buffered: self.buffered_count(),
        }
    }

    fn corrupt(&mut self, peer: ProcessId, bump: u64) -> bool {
        let mut s = self.snapshot();
        let Some(entry) = s.w_sync.get_mut(peer.slot()) else {
            return false;
        };
        entry.0 += bump;
        match RegisterState::from_snapshot(s) {
            Ok(next) => {
                *self = next;
                true
            }
            Err(_) => false,
        }
    }
}

impl Automaton for AbdState {
    type Msg = AbdMessage;

    fn init(n: usize, t: usize, me: ProcessId, writer: ProcessId, v0: Value) -> Result<Self, ProtocolError> {
        AbdState::new(n, t, me, writer, v0)
    }

    fn invoke_write(&mut self, v: Value) -> Result<Vec<Action<AbdMessage>>, ProtocolError> {
        AbdState::invoke_write(self, v)
    }

    fn invoke_read(&mut self) -> Result<Vec<Action<AbdMessage>>, ProtocolError> {
        AbdState::invoke_read(self)
    }

    fn writer_fast_read(&self) -> Result<(Value, SeqNum), ProtocolError> {
        AbdState::writer_fast_read(self)
    }

    fn on_deliver(&mut self, from: ProcessId, msg: AbdMessage) -> Result<Vec<Action<AbdMessage>>, ProtocolError> {
        AbdState::on_deliver(self, from, msg)
    }

    fn fingerprint(&self) -> Fingerprint {
        AbdState::fingerprint(self)
    }

    fn latest_sn(&self) -> SeqNum {
        self.current().0
    }

    fn memory(&self) -> MemoryProxy {
        MemoryProxy {
            history_len: 1,
            guards: 0,
            buffered: 0,
        }
    }
}
