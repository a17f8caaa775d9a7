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

//! A single-writer multi-reader atomic register for crash-prone
//! asynchronous message-passing systems whose messages carry two control
//! bits, together with an ABD baseline, a deterministic simulator, checkers
//! and cost accounting.
//!
//! * [`protocol`]: the register automaton, one [`RegisterState`] per process.
//! * [`abd`]: the classic ABD register with unbounded sequence numbers.
//! * [`sim`]: seeded discrete-event simulation, fuzzing and replay.
//! * [`checker`]: atomicity, liveness and invariant checks.
//! * [`metrics`]: message, control-bit and latency accounting.
//! * [`cli`]: the `twobit` command-line tool.

pub mod abd;
pub mod checker;
pub mod cli;
pub mod fingerprint;
pub mod message;
pub mod metrics;
pub mod protocol;
pub mod sim;
pub mod types;

pub use abd::{AbdMessage, AbdState};
pub use fingerprint::Fingerprint;
pub use message::{Message, Tag, CONTROL_BITS};
pub use protocol::{Action, PendingOp, ProtocolError, RegisterState};
pub use sim::{run, SimConfig, Time, Trace};
pub use types::{ProcessId, SeqNum, Value, ValueMode};
