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

//! Single-writer ABD with unbounded sequence numbers, used as the cost and
//! differential baseline.
//!
//! Writes are one broadcast/ack round. Reads are a query round followed by a
//! write-back round of the freshest pair. Self replies and self acks are
//! counted locally, so no process ever messages itself.
//!
//! Wire format: the three low-order bits of the first byte hold the tag,
//! followed by LEB128 varints for the fields in declaration order (`rid`
//! before `sn`), followed by the value payload where one is present (same
//! payload layout as the two-bit codec).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::fingerprint::{Fingerprint, FingerprintBuilder};
use crate::message::{decode_value, encode_value, CodecError};
use crate::protocol::{check_model, check_pid, Action, ProtocolError};
use crate::types::{ProcessId, SeqNum, Value, ValueMode};

/// Bits used by the ABD tag.
pub const TAG_BITS: u32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AbdMessage {
    WriteReq { sn: SeqNum, value: Value },
    WriteAck { sn: SeqNum },
    ReadReq { rid: u64 },
    ReadReply { rid: u64, sn: SeqNum, value: Value },
    WriteBack { rid: u64, sn: SeqNum, value: Value },
    WriteBackAck { rid: u64 },
}

impl AbdMessage {
    pub const TAG_NAMES: [&'static str; 6] = [
        "WRITE_REQ",
        "WRITE_ACK",
        "READ_REQ",
        "READ_REPLY",
        "WRITE_BACK",
        "WRITE_BACK_ACK",
    ];

    pub fn tag_code(&self) -> u8 {
        match self {
            AbdMessage::WriteReq { .. } => 0,
            AbdMessage::WriteAck { .. } => 1,
            AbdMessage::ReadReq { .. } => 2,
            AbdMessage::ReadReply { .. } => 3,
            AbdMessage::WriteBack { .. } => 4,
            AbdMessage::WriteBackAck { .. } => 5,
        }
    }

    pub fn tag_name(&self) -> &'static str {
        Self::TAG_NAMES[self.tag_code() as usize]
    }

    pub fn sn(&self) -> Option<SeqNum> {
        match self {
            AbdMessage::WriteReq { sn, .. }
            | AbdMessage::WriteAck { sn }
            | AbdMessage::ReadReply { sn, .. }
            | AbdMessage::WriteBack { sn, .. } => Some(*sn),
            _ => None,
        }
    }

    pub fn rid(&self) -> Option<u64> {
        match self {
            AbdMessage::ReadReq { rid }
            | AbdMessage::ReadReply { rid, .. }
            | AbdMessage::WriteBack { rid, .. }
            | AbdMessage::WriteBackAck { rid } => Some(*rid),
            _ => None,
        }
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            AbdMessage::WriteReq { value, .. }
            | AbdMessage::ReadReply { value, .. }
            | AbdMessage::WriteBack { value, .. } => Some(value),
            _ => None,
        }
    }

    /// Rebuilds a message from its trace summary.
    pub fn from_parts(
        tag: &str,
        rid: Option<u64>,
        sn: Option<SeqNum>,
        value: Option<Value>,
    ) -> Result<AbdMessage, CodecError> {
        let missing = || CodecError::Truncated { need: 1, have: 0 };
        let msg = match tag {
            "WRITE_REQ" => AbdMessage::WriteReq {
                sn: sn.ok_or_else(missing)?,
                value: value.ok_or_else(missing)?,
            },
            "WRITE_ACK" => AbdMessage::WriteAck {
                sn: sn.ok_or_else(missing)?,
            },
            "READ_REQ" => AbdMessage::ReadReq {
                rid: rid.ok_or_else(missing)?,
            },
            "READ_REPLY" => AbdMessage::ReadReply {
                rid: rid.ok_or_else(missing)?,
                sn: sn.ok_or_else(missing)?,
                value: value.ok_or_else(missing)?,
            },
            "WRITE_BACK" => AbdMessage::WriteBack {
                rid: rid.ok_or_else(missing)?,
                sn: sn.ok_or_else(missing)?,
                value: value.ok_or_else(missing)?,
            },
            "WRITE_BACK_ACK" => AbdMessage::WriteBackAck {
                rid: rid.ok_or_else(missing)?,
            },
            other => return Err(CodecError::UnknownTag(other.to_string())),
        };
        Ok(msg)
    }

    fn control_fields(&self) -> (Option<u64>, Option<u64>) {
        (self.rid(), self.sn().map(|s| s.0))
    }

    /// Control bits on the wire: tag plus the encoded varint fields.
    pub fn control_bits(&self) -> u32 {
        let (rid, sn) = self.control_fields();
        TAG_BITS + 8 * (rid.map_or(0, varint_len) + sn.map_or(0, varint_len)) as u32
    }

    pub fn encode(&self, mode: ValueMode) -> Result<Vec<u8>, CodecError> {
        let mut out = vec![self.tag_code()];
        let (rid, sn) = self.control_fields();
        for f in [rid, sn].into_iter().flatten() {
            put_varint(f, &mut out);
        }
        if let Some(v) = self.value() {
            encode_value(mode, v, &mut out)?;
        }
        Ok(out)
    }

    pub fn decode(buf: &[u8], mode: ValueMode) -> Result<AbdMessage, CodecError> {
        let head = *buf.first().ok_or(CodecError::Empty)?;
        if head & !0b111 != 0 || head > 5 {
            return Err(CodecError::ReservedBits(head));
        }
        let mut pos = 1;
        let take = |pos: &mut usize| get_varint(buf, pos);
        let value = |pos: &mut usize| -> Result<Value, CodecError> {
            let (v, used) = decode_value(&buf[*pos..], mode)?;
            *pos += used;
            Ok(v)
        };
        let msg = match head {
            0 => {
                let sn = SeqNum(take(&mut pos)?);
                AbdMessage::WriteReq {
                    sn,
                    value: value(&mut pos)?,
                }
            }
            1 => AbdMessage::WriteAck {
                sn: SeqNum(take(&mut pos)?),
            },
            2 => AbdMessage::ReadReq { rid: take(&mut pos)? },
            3 | 4 => {
                let rid = take(&mut pos)?;
                let sn = SeqNum(take(&mut pos)?);
                let value = value(&mut pos)?;
                if head == 3 {
                    AbdMessage::ReadReply { rid, sn, value }
                } else {
                    AbdMessage::WriteBack { rid, sn, value }
                }
            }
            _ => AbdMessage::WriteBackAck { rid: take(&mut pos)? },
        };
        if pos != buf.len() {
            return Err(CodecError::Trailing(buf.len() - pos));
        }
        Ok(msg)
    }
}

impl fmt::Display for AbdMessage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag_name())?;
        if let Some(r) = self.rid() {
            write!(f, " rid={r}")?;
        }
        if let Some(s) = self.sn() {
            write!(f, " sn={}", s.0)?;
        }
        if let Some(v) = self.value() {
            write!(f, " v={v}")?;
        }
        Ok(())
    }
}

fn varint_len(mut v: u64) -> usize {
    let mut len = 1;
    while v >= 0x80 {
        v >>= 7;
        len += 1;
    }
    len
}

fn put_varint(mut v: u64, out: &mut Vec<u8>) {
    while v >= 0x80 {
        out.push((v as u8 & 0x7f) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn get_varint(buf: &[u8], pos: &mut usize) -> Result<u64, CodecError> {
    let mut v = 0u64;
    let mut shift = 0;
    loop {
        let b = *buf.get(*pos).ok_or(CodecError::Truncated {
            need: *pos + 1,
            have: buf.len(),
        })?;
        *pos += 1;
        v |= u64::from(b & 0x7f) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
        if shift > 63 {
            return Err(CodecError::ReservedBits(b));
        }
    }
}

pub type AbdAction = Action<AbdMessage>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbdPending {
    Idle,
    Write {
        sn: SeqNum,
        acks: BTreeSet<ProcessId>,
    },
    Query {
        rid: u64,
        replies: BTreeMap<ProcessId, (SeqNum, Value)>,
    },
    WriteBack {
        rid: u64,
        chosen: (SeqNum, Value),
        acks: BTreeSet<ProcessId>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbdState {
    me: ProcessId,
    writer: ProcessId,
    n: usize,
    t: usize,
    current: (SeqNum, Value),
    next_rid: u64,
    pending: AbdPending,
}

impl AbdState {
    pub fn new(n: usize, t: usize, me: ProcessId, writer: ProcessId, v0: Value) -> Result<Self, ProtocolError> {
        check_model(n, t)?;
        check_pid(me, n)?;
        check_pid(writer, n)?;
        Ok(AbdState {
            me,
            writer,
            n,
            t,
            current: (SeqNum::ZERO, v0),
            next_rid: 0,
            pending: AbdPending::Idle,
        })
    }

    pub fn me(&self) -> ProcessId {
        self.me
    }

    pub fn is_writer(&self) -> bool {
        self.me == self.writer
    }

    pub fn current(&self) -> &(SeqNum, Value) {
        &self.current
    }

    pub fn pending(&self) -> &AbdPending {
        &self.pending
    }

    fn quorum(&self) -> usize {
        self.n - self.t
    }

    fn broadcast(&self, msg: AbdMessage) -> Vec<AbdAction> {
        ProcessId::all(self.n)
            .filter(|&j| j != self.me)
            .map(|to| AbdAction::Send { to, msg: msg.clone() })
            .collect()
    }

    fn adopt(&mut self, sn: SeqNum, value: &Value) {
        if sn > self.current.0 {
            self.current = (sn, value.clone());
        }
    }

    pub fn invoke_write(&mut self, v: Value) -> Result<Vec<AbdAction>, ProtocolError> {
        if !self.is_writer() {
            return Err(ProtocolError::NotWriter(self.me));
        }
        if self.pending != AbdPending::Idle {
            return Err(ProtocolError::OperationPending(self.me));
        }
        let sn = self.current.0.next();
        self.current = (sn, v.clone());
        let mut out = self.broadcast(AbdMessage::WriteReq { sn, value: v });
        self.pending = AbdPending::Write {
            sn,
            acks: BTreeSet::from([self.me]),
        };
        self.progress(&mut out);
        Ok(out)
    }

    pub fn invoke_read(&mut self) -> Result<Vec<AbdAction>, ProtocolError> {
        if self.pending != AbdPending::Idle {
            return Err(ProtocolError::OperationPending(self.me));
        }
        self.next_rid += 1;
        let rid = self.next_rid;
        let mut out = self.broadcast(AbdMessage::ReadReq { rid });
        self.pending = AbdPending::Query {
            rid,
            replies: BTreeMap::from([(self.me, self.current.clone())]),
        };
        self.progress(&mut out);
        Ok(out)
    }

    /// Writer-local read of the last written pair.
    pub fn writer_fast_read(&self) -> Result<(Value, SeqNum), ProtocolError> {
        if !self.is_writer() {
            return Err(ProtocolError::NotWriter(self.me));
        }
        Ok((self.current.1.clone(), self.current.0))
    }

    pub fn on_deliver(&mut self, from: ProcessId, msg: AbdMessage) -> Result<Vec<AbdAction>, ProtocolError> {
        check_pid(from, self.n)?;
        if from == self.me {
            return Err(ProtocolError::SelfMessage(self.me));
        }
        let mut out = Vec::new();
        match msg {
            AbdMessage::WriteReq { sn, value } => {
                self.adopt(sn, &value);
                out.push(AbdAction::Send {
                    to: from,
                    msg: AbdMessage::WriteAck { sn },
                });
            }
            AbdMessage::ReadReq { rid } => out.push(AbdAction::Send {
                to: from,
                msg: AbdMessage::ReadReply {
                    rid,
                    sn: self.current.0,
                    value: self.current.1.clone(),
                },
            }),
            AbdMessage::WriteBack { rid, sn, value } => {
                self.adopt(sn, &value);
                out.push(AbdAction::Send {
                    to: from,
                    msg: AbdMessage::WriteBackAck { rid },
                });
            }
            AbdMessage::WriteAck { sn } => {
                if let AbdPending::Write { sn: want, acks } = &mut self.pending {
                    if *want == sn {
                        acks.insert(from);
                    }
                }
            }
            AbdMessage::ReadReply { rid, sn, value } => {
                if let AbdPending::Query { rid: want, replies } = &mut self.pending {
                    if *want == rid {
                        replies.insert(from, (sn, value));
                    }
                }
            }
            AbdMessage::WriteBackAck { rid } => {
                if let AbdPending::WriteBack { rid: want, acks, .. } = &mut self.pending {
                    if *want == rid {
                        acks.insert(from);
                    }
                }
            }
        }
        self.progress(&mut out);
        Ok(out)
    }

    fn progress(&mut self, out: &mut Vec<AbdAction>) {
        let q = self.quorum();
        match &self.pending {
            AbdPending::Write { acks, .. } if acks.len() >= q => {
                self.pending = AbdPending::Idle;
                out.push(AbdAction::WriteReturn);
            }
            AbdPending::Query { rid, replies } if replies.len() >= q => {
                let rid = *rid;
                let chosen = replies
                    .values()
                    .max_by_key(|(sn, _)| *sn)
                    .cloned()
                    .expect("quorum is non-empty");
                self.adopt(chosen.0, &chosen.1);
                out.extend(self.broadcast(AbdMessage::WriteBack {
                    rid,
                    sn: chosen.0,
                    value: chosen.1.clone(),
                }));
                self.pending = AbdPending::WriteBack {
                    rid,
                    chosen,
                    acks: BTreeSet::from([self.me]),
                };
                self.progress(out);
            }
            AbdPending::WriteBack { chosen, acks, .. } if acks.len() >= q => {
                let (sn, value) = chosen.clone();
                self.pending = AbdPending::Idle;
                out.push(AbdAction::ReadReturn { value, sn });
            }
            _ => {}
        }
    }

    pub fn fingerprint(&self) -> Fingerprint {
        let mut b = FingerprintBuilder::new("twobit.abd.v1");
        b.u64(self.me.0 as u64)
            .u64(self.writer.0 as u64)
            .u64(self.n as u64)
            .u64(self.t as u64)
            .u64(self.current.0 .0)
            .value(&self.current.1)
            .u64(self.next_rid);
        let set = |b: &mut FingerprintBuilder, s: &BTreeSet<ProcessId>| {
            b.u64(s.len() as u64);
            for p in s {
                b.u64(p.0 as u64);
            }
        };
        match &self.pending {
            AbdPending::Idle => {
                b.u8(0);
            }
            AbdPending::Write { sn, acks } => {
                b.u8(1).u64(sn.0);
                set(&mut b, acks);
            }
            AbdPending::Query { rid, replies } => {
                b.u8(2).u64(*rid).u64(replies.len() as u64);
                for (p, (sn, v)) in replies {
                    b.u64(p.0 as u64).u64(sn.0).value(v);
                }
            }
            AbdPending::WriteBack { rid, chosen, acks } => {
                b.u8(3).u64(*rid).u64(chosen.0 .0).value(&chosen.1);
                set(&mut b, acks);
            }
        }
        b.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(i: u32) -> ProcessId {
        ProcessId(i)
    }

    fn v(x: u64) -> Value {
        Value::Int(x)
    }

    #[test]
    fn init_examples() {
        let s = AbdState::new(3, 1, p(1), p(1), v(0)).unwrap();
        assert_eq!(s.current(), &(SeqNum(0), v(0)));
        assert!(AbdState::new(3, 2, p(1), p(1), v(0)).is_err());
        let s = AbdState::new(5, 2, p(3), p(1), v(9)).unwrap();
        assert_eq!(s.current(), &(SeqNum(0), v(9)));
    }

    #[test]
    fn write_needs_one_ack_with_three_processes() {
        let mut w = AbdState::new(3, 1, p(1), p(1), v(0)).unwrap();
        let out = w.invoke_write(v(5)).unwrap();
        let req = AbdMessage::WriteReq {
            sn: SeqNum(1),
            value: v(5),
        };
        assert_eq!(
            out,
            vec![
                AbdAction::Send {
                    to: p(2),
                    msg: req.clone()
                },
                AbdAction::Send { to: p(3), msg: req }
            ]
        );
        let out = w.on_deliver(p(2), AbdMessage::WriteAck { sn: SeqNum(1) }).unwrap();
        assert_eq!(out, vec![AbdAction::WriteReturn]);

        let out = w.invoke_write(v(6)).unwrap();
        assert!(matches!(
            &out[0],
            AbdAction::Send {
                msg: AbdMessage::WriteReq { sn: SeqNum(2), .. },
                ..
            }
        ));
        let mut r = AbdState::new(3, 1, p(2), p(1), v(0)).unwrap();
        assert_eq!(r.invoke_write(v(1)), Err(ProtocolError::NotWriter(p(2))));
    }

    #[test]
    fn server_rules() {
        let mut s = AbdState::new(3, 1, p(2), p(1), v(0)).unwrap();
        s.on_deliver(
            p(1),
            AbdMessage::WriteReq {
                sn: SeqNum(1),
                value: v(5),
            },
        )
        .unwrap();
        let out = s
            .on_deliver(
                p(1),
                AbdMessage::WriteReq {
                    sn: SeqNum(2),
                    value: v(9),
                },
            )
            .unwrap();
        assert_eq!(s.current(), &(SeqNum(2), v(9)));
        assert_eq!(
            out,
            vec![AbdAction::Send {
                to: p(1),
                msg: AbdMessage::WriteAck { sn: SeqNum(2) }
            }]
        );
        let out = s
            .on_deliver(
                p(3),
                AbdMessage::WriteBack {
                    rid: 4,
                    sn: SeqNum(1),
                    value: v(5),
                },
            )
            .unwrap();
        assert_eq!(s.current(), &(SeqNum(2), v(9)));
        assert_eq!(
            out,
            vec![AbdAction::Send {
                to: p(3),
                msg: AbdMessage::WriteBackAck { rid: 4 }
            }]
        );
        let out = s.on_deliver(p(3), AbdMessage::ReadReq { rid: 7 }).unwrap();
        assert_eq!(
            out,
            vec![AbdAction::Send {
                to: p(3),
                msg: AbdMessage::ReadReply {
                    rid: 7,
                    sn: SeqNum(2),
                    value: v(9)
                }
            }]
        );
    }

    #[test]
    fn read_selects_max_and_writes_back() {
        let mut r = AbdState::new(3, 1, p(2), p(1), v(0)).unwrap();
        r.invoke_read().unwrap();
        let out = r
            .on_deliver(
                p(1),
                AbdMessage::ReadReply {
                    rid: 1,
                    sn: SeqNum(1),
                    value: v(5),
                },
            )
            .unwrap();
        let wb = AbdMessage::WriteBack {
            rid: 1,
            sn: SeqNum(1),
            value: v(5),
        };
        assert_eq!(
            out,
            vec![
                AbdAction::Send {
                    to: p(1),
                    msg: wb.clone()
                },
                AbdAction::Send { to: p(3), msg: wb }
            ]
        );
        // Stale reply for an old rid is ignored.
        assert!(r
            .on_deliver(p(3), AbdMessage::WriteBackAck { rid: 0 })
            .unwrap()
            .is_empty());
        let out = r.on_deliver(p(3), AbdMessage::WriteBackAck { rid: 1 }).unwrap();
        assert_eq!(
            out,
            vec![AbdAction::ReadReturn {
                value: v(5),
                sn: SeqNum(1)
            }]
        );
        assert_eq!(r.current(), &(SeqNum(1), v(5)));
    }

    #[test]
    fn fresh_read_returns_initial() {
        let mut r = AbdState::new(3, 1, p(3), p(1), v(8)).unwrap();
        r.invoke_read().unwrap();
        r.on_deliver(
            p(1),
            AbdMessage::ReadReply {
                rid: 1,
                sn: SeqNum(0),
                value: v(8),
            },
        )
        .unwrap();
        let out = r.on_deliver(p(2), AbdMessage::WriteBackAck { rid: 1 }).unwrap();
        assert_eq!(
            out,
            vec![AbdAction::ReadReturn {
                value: v(8),
                sn: SeqNum(0)
            }]
        );
    }

    #[test]
    fn codec_round_trip_and_control_bits() {
        let msgs = [
            AbdMessage::WriteReq {
                sn: SeqNum(300),
                value: v(1),
            },
            AbdMessage::WriteAck { sn: SeqNum(1) },
            AbdMessage::ReadReq { rid: 127 },
            AbdMessage::ReadReply {
                rid: 128,
                sn: SeqNum(0),
                value: v(2),
            },
            AbdMessage::WriteBack {
                rid: 1,
                sn: SeqNum(u64::MAX),
                value: v(3),
            },
            AbdMessage::WriteBackAck { rid: 9 },
        ];
        for m in msgs {
            let enc = m.encode(ValueMode::U64).unwrap();
            assert_eq!(AbdMessage::decode(&enc, ValueMode::U64).unwrap(), m);
        }
        assert_eq!(AbdMessage::WriteAck { sn: SeqNum(1) }.control_bits(), 11);
        assert_eq!(AbdMessage::WriteAck { sn: SeqNum(200) }.control_bits(), 19);
        assert_eq!(
            AbdMessage::ReadReply {
                rid: 1,
                sn: SeqNum(1),
                value: v(0)
            }
            .control_bits(),
            19
        );
    }
}
