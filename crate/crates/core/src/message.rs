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

//! The four message types of the two-bit register and their wire format.
//!
//! Layout: the two low-order bits of the first byte hold the tag
//! (`00` WRITE0, `01` WRITE1, `10` READ, `11` PROCEED) and the upper six
//! bits are zero. WRITE0/WRITE1 are followed by the payload: 8 big-endian
//! bytes in integer mode, or a 4-byte big-endian length and the raw bytes in
//! byte-string mode. READ and PROCEED are exactly one byte.

use std::fmt;

use crate::types::{Value, ValueMode};

/// Number of control bits carried by every message.
pub const CONTROL_BITS: u32 = 2;

const TAG_MASK: u8 = 0b11;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("empty buffer")]
    Empty,
    #[error("reserved header bits set: {0:#010b}")]
    ReservedBits(u8),
    #[error("truncated payload: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("{0} trailing bytes after message")]
    Trailing(usize),
    #[error("value of mode {found:?} cannot be encoded in {expected:?} mode")]
    ModeMismatch { expected: ValueMode, found: ValueMode },
    #[error("unknown message tag {0:?}")]
    UnknownTag(String),
}

/// Message tag, i.e. the entire control information of a message.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    Write0 = 0b00,
    Write1 = 0b01,
    Read = 0b10,
    Proceed = 0b11,
}

impl Tag {
    pub const ALL: [Tag; 4] = [Tag::Write0, Tag::Write1, Tag::Read, Tag::Proceed];

    pub fn bits(self) -> u8 {
        self as u8
    }

    pub fn from_bits(bits: u8) -> Tag {
        match bits & TAG_MASK {
            0b00 => Tag::Write0,
            0b01 => Tag::Write1,
            0b10 => Tag::Read,
            _ => Tag::Proceed,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tag::Write0 => "WRITE0",
            Tag::Write1 => "WRITE1",
            Tag::Read => "READ",
            Tag::Proceed => "PROCEED",
        }
    }

    pub fn parse(name: &str) -> Result<Tag, CodecError> {
        Tag::ALL
            .into_iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| CodecError::UnknownTag(name.to_string()))
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Message {
    Write0(Value),
    Write1(Value),
    Read,
    Proceed,
}

impl Message {
    /// `WRITE(b, v)` with `b = parity`.
    pub fn write(parity: u8, value: Value) -> Message {
        if parity.is_multiple_of(2) {
            Message::Write0(value)
        } else {
            Message::Write1(value)
        }
    }

    pub fn tag(&self) -> Tag {
        match self {
            Message::Write0(_) => Tag::Write0,
            Message::Write1(_) => Tag::Write1,
            Message::Read => Tag::Read,
            Message::Proceed => Tag::Proceed,
        }
    }

    pub fn value(&self) -> Option<&Value> {
        match self {
            Message::Write0(v) | Message::Write1(v) => Some(v),
            _ => None,
        }
    }

    /// Parity bit for WRITE messages.
    pub fn parity(&self) -> Option<u8> {
        match self {
            Message::Write0(_) => Some(0),
            Message::Write1(_) => Some(1),
            _ => None,
        }
    }

    pub fn is_write(&self) -> bool {
        self.parity().is_some()
    }

    /// Rebuilds a message from a tag and optional value.
    pub fn from_parts(tag: Tag, value: Option<Value>) -> Result<Message, CodecError> {
        match (tag, value) {
            (Tag::Write0, Some(v)) => Ok(Message::Write0(v)),
            (Tag::Write1, Some(v)) => Ok(Message::Write1(v)),
            (Tag::Read, None) => Ok(Message::Read),
            (Tag::Proceed, None) => Ok(Message::Proceed),
            (Tag::Write0 | Tag::Write1, None) => Err(CodecError::Truncated { need: 1, have: 0 }),
            (_, Some(_)) => Err(CodecError::Trailing(1)),
        }
    }

    pub fn encode(&self, mode: ValueMode) -> Result<Vec<u8>, CodecError> {
        let mut out = Vec::with_capacity(9);
        self.encode_into(mode, &mut out)?;
        Ok(out)
    }

    pub fn encode_into(&self, mode: ValueMode, out: &mut Vec<u8>) -> Result<(), CodecError> {
        out.push(self.tag().bits());
        if let Some(v) = self.value() {
            encode_value(mode, v, out)?;
        }
        Ok(())
    }

    /// Decodes exactly one message occupying all of `buf`.
    pub fn decode(buf: &[u8], mode: ValueMode) -> Result<Message, CodecError> {
        let (msg, used) = Message::decode_prefix(buf, mode)?;
        if used != buf.len() {
            return Err(CodecError::Trailing(buf.len() - used));
        }
        Ok(msg)
    }

    /// Decodes one message from the front of `buf`, returning the bytes used.
    pub fn decode_prefix(buf: &[u8], mode: ValueMode) -> Result<(Message, usize), CodecError> {
        let head = *buf.first().ok_or(CodecError::Empty)?;
        if head & !TAG_MASK != 0 {
            return Err(CodecError::ReservedBits(head));
        }
        let tag = Tag::from_bits(head);
        let (value, used) = match tag {
            Tag::Read | Tag::Proceed => (None, 0),
            Tag::Write0 | Tag::Write1 => {
                let (v, used) = decode_value(&buf[1..], mode)?;
                (Some(v), used)
            }
        };
        Ok((Message::from_parts(tag, value)?, 1 + used))
    }
}

/// Appends a value payload in the layout of `mode`.
pub(crate) fn encode_value(mode: ValueMode, v: &Value, out: &mut Vec<u8>) -> Result<(), CodecError> {
    match (mode, v) {
        (ValueMode::U64, Value::Int(x)) => out.extend_from_slice(&x.to_be_bytes()),
        (ValueMode::Bytes, Value::Bytes(b)) => {
            out.extend_from_slice(&(b.len() as u32).to_be_bytes());
            out.extend_from_slice(b);
        }
        (expected, v) => {
            return Err(CodecError::ModeMismatch {
                expected,
                found: v.mode(),
            })
        }
    }
    Ok(())
}

/// Reads a value payload from the front of `buf`, returning the bytes used.
pub(crate) fn decode_value(buf: &[u8], mode: ValueMode) -> Result<(Value, usize), CodecError> {
    let need = |n: usize| {
        if buf.len() < n {
            Err(CodecError::Truncated {
                need: n,
                have: buf.len(),
            })
        } else {
            Ok(())
        }
    };
    match mode {
        ValueMode::U64 => {
            need(8)?;
            let mut b = [0u8; 8];
            b.copy_from_slice(&buf[..8]);
            Ok((Value::Int(u64::from_be_bytes(b)), 8))
        }
        ValueMode::Bytes => {
            need(4)?;
            let mut l = [0u8; 4];
            l.copy_from_slice(&buf[..4]);
            let len = u32::from_be_bytes(l) as usize;
            need(4 + len)?;
            Ok((Value::Bytes(buf[4..4 + len].to_vec()), 4 + len))
        }
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{}({})", self.tag(), v),
            None => write!(f, "{}()", self.tag()),
        }
    }
}
