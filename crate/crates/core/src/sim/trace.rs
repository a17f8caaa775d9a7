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

//! Trace records and the JSON Lines file format.
//!
//! Line 1 is a [`TraceHeader`]; every further line is one [`TraceRecord`].
//! Record fields:
//!
//! | field   | meaning                                                        |
//! |---------|----------------------------------------------------------------|
//! | `t`     | virtual time (`"p"` or `"p/q"`)                                 |
//! | `proc`  | process at which the event happens                             |
//! | `dir`   | `send`, `deliver`, `drop`, `invoke`, `return`, `crash`          |
//! | `peer`  | destination of a send, source of a deliver or drop             |
//! | `tag`   | message tag, e.g. `WRITE1`, `PROCEED`, `READ_REPLY`            |
//! | `val`   | value carried by a message, written by a write, or read         |
//! | `sn`    | sequence number, see below                                      |
//! | `op_id` | operation the record belongs to                                |
//! | `op`    | `write` or `read` on invoke and return records                 |
//! | `rid`   | ABD read id                                                     |
//! | `msg`   | message instance id shared by a send and its deliver or drop   |
//! | `fp`    | state fingerprint of `proc` after an invoke or deliver          |
//!
//! `sn` on a two-bit WRITE record is the ordinal of that WRITE on its
//! channel, which equals the index of the value it carries. On ABD messages
//! it is the sequence number field. On a write invoke or return it is the
//! sequence number of the write; on a read return, the index of the value
//! returned.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fingerprint::Fingerprint;
use crate::sim::config::{Algorithm, SimConfig};
use crate::sim::time::Time;
use crate::types::{ProcessId, Value, ValueMode};

pub const TRACE_FORMAT: &str = "twobit-trace";
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("trace line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("trace is empty")]
    Empty,
    #[error("unsupported trace header: format {format:?}, version {version}")]
    Header { format: String, version: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    Send,
    Deliver,
    Drop,
    Invoke,
    Return,
    Crash,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Write,
    Read,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub version: u32,
    pub algorithm: Algorithm,
    pub n: usize,
    pub t: usize,
    pub writer: ProcessId,
    pub seed: u64,
    pub v0: Value,
    pub value_mode: ValueMode,
    pub delta: Time,
}

impl TraceHeader {
    pub fn for_config(cfg: &SimConfig) -> TraceHeader {
        TraceHeader {
            format: TRACE_FORMAT.to_string(),
            version: TRACE_VERSION,
            algorithm: cfg.algorithm,
            n: cfg.n,
            t: cfg.t,
            writer: cfg.writer,
            seed: cfg.seed,
            v0: cfg.v0.clone(),
            value_mode: cfg.value_mode,
            delta: cfg.delta(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: Time,
    pub proc: ProcessId,
    pub dir: Dir,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peer: Option<ProcessId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sn: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub op: Option<OpKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rid: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub msg: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fp: Option<Fingerprint>,
}

impl TraceRecord {
    pub fn new(t: Time, proc: ProcessId, dir: Dir) -> TraceRecord {
        TraceRecord {
            t,
            proc,
            dir,
            peer: None,
            tag: None,
            val: None,
            sn: None,
            op_id: None,
            op: None,
            rid: None,
            msg: None,
            fp: None,
        }
    }

    pub fn is_message(&self) -> bool {
        matches!(self.dir, Dir::Send | Dir::Deliver | Dir::Drop)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub header: TraceHeader,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new(header: TraceHeader) -> Trace {
        Trace {
            header,
            records: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Trace, TraceError> {
        let mut lines = r
            .lines()
            .enumerate()
            .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let (_, first) = lines.next().ok_or(TraceError::Empty)?;
        let header: TraceHeader =
            serde_json::from_str(&first?).map_err(|source| TraceError::Json { line: 1, source })?;
        if header.format != TRACE_FORMAT || header.version != TRACE_VERSION {
            return Err(TraceError::Header {
                format: header.format,
                version: header.version,
            });
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            let rec = serde_json::from_str(&line?).map_err(|source| TraceError::Json { line: i + 1, source })?;
            records.push(rec);
        }
        Ok(Trace { header, records })
    }

    pub fn from_jsonl(text: &str) -> Result<Trace, TraceError> {
        Trace::read_jsonl(text.as_bytes())
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_jsonl(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Trace, TraceError> {
        let f = std::fs::File::open(path)?;
        Trace::read_jsonl(std::io::BufReader::new(f))
    }
}
