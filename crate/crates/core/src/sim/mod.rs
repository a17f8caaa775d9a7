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

//! Deterministic seeded simulation of crash-prone asynchronous
//! message passing.
//!
//! Everything in a run derives from its [`SimConfig`]: the same
//! configuration always yields the same [`Trace`].

pub mod automaton;
pub mod config;
pub mod engine;
pub mod fuzz;
pub mod replay;
pub mod time;
pub mod trace;

pub use automaton::{Automaton, MemoryProxy, WireMessage};
pub use config::{
    Algorithm, ConfigError, CrashSpec, DelayModel, FaultHooks, RandomCrashes, ScriptedOp, SimConfig, ThinkTime,
    WorkloadSpec, WriterReads,
};
pub use engine::{run, run_until_quiescent, ChannelLedger, RunOutcome, Simulation};
pub use fuzz::{adversarial_schedules, child_config};
pub use replay::{replay, ReplayReport};
pub use time::Time;
pub use trace::{Dir, OpKind, Trace, TraceHeader, TraceRecord};
