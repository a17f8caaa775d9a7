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

//! Safety, liveness and invariant checks over traces and snapshots.

pub mod atomicity;
pub mod brute;
pub mod history;
pub mod liveness;
pub mod monitor;
pub mod verdict;

pub use atomicity::{check_atomicity, HistoryError};
pub use brute::{brute_force_linearize, DEFAULT_BOUND};
pub use history::{extract_ops, OpRecord};
pub use liveness::{check_liveness, check_network, planned_ops};
pub use monitor::{monitor_snapshot, TwobitMonitor};
pub use verdict::{Code, Verdict, Violation};
