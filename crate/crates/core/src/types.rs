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

//! Identifiers and values shared by every automaton in the crate.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A process identifier, 1-based as in `p_1 .. p_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProcessId(pub u32);

impl ProcessId {
    pub fn new(index: u32) -> Self {
        ProcessId(index)
    }

    /// Zero-based slot for array indexing.
    #[inline]
    pub fn slot(self) -> usize {
        (self.0 as usize) - 1
    }

    #[inline]
    pub fn from_slot(slot: usize) -> Self {
        ProcessId(slot as u32 + 1)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// All process ids `1..=n` in ascending order.
    pub fn all(n: usize) -> impl Iterator<Item = ProcessId> {
        (0..n).map(ProcessId::from_slot)
    }
}

impl fmt::Display for ProcessId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// An unbounded local sequence number. Never travels on the wire in the
/// two-bit algorithm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeqNum(pub u64);

impl SeqNum {
    pub const ZERO: SeqNum = SeqNum(0);

    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn next(self) -> SeqNum {
        SeqNum(self.0 + 1)
    }

    /// Parity bit of this sequence number.
    #[inline]
    pub fn parity(self) -> u8 {
        (self.0 % 2) as u8
    }

    pub fn as_index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SeqNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Register payload. Integer mode is the default; the byte-string mode
/// exists for payloads that are not machine words.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(u64),
    Bytes(Vec<u8>),
}

impl Default for Value {
    fn default() -> Self {
        Value::Int(0)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v)
    }
}

impl From<Vec<u8>> for Value {
    fn from(v: Vec<u8>) -> Self {
        Value::Bytes(v)
    }
}

impl Value {
    pub fn mode(&self) -> ValueMode {
        match self {
            Value::Int(_) => ValueMode::U64,
            Value::Bytes(_) => ValueMode::Bytes,
        }
    }

    /// Feeds a canonical byte representation into `out`.
    pub(crate) fn canonical_bytes(&self, out: &mut Vec<u8>) {
        match self {
            Value::Int(v) => {
                out.push(0);
                out.extend_from_slice(&v.to_be_bytes());
            }
            Value::Bytes(b) => {
                out.push(1);
                out.extend_from_slice(&(b.len() as u64).to_be_bytes());
                out.extend_from_slice(b);
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bytes(b) => write!(f, "0x{}", hex::encode(b)),
        }
    }
}

// Integers serialize as JSON numbers, byte strings as "0x..." hex strings.
impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => s.serialize_u64(*v),
            Value::Bytes(b) => s.serialize_str(&format!("0x{}", hex::encode(b))),
        }
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Value::Int(v)),
            Raw::Str(s) => {
                let body = s
                    .strip_prefix("0x")
                    .ok_or_else(|| serde::de::Error::custom("byte values must be written as 0x-prefixed hex"))?;
                hex::decode(body).map(Value::Bytes).map_err(serde::de::Error::custom)
            }
        }
    }
}

/// Which payload representation the codec expects.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueMode {
    #[default]
    U64,
    Bytes,
}
