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

//! One seeded simulation with random delays and a crash, then its metrics.
//!
//! ```bash
//! cargo run --example simulate_run -- 7
//! ```

use twobit::sim::{run, CrashSpec, DelayModel, SimConfig, Time};
use twobit::ProcessId;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(7);
    let mut cfg = SimConfig::new(5, 2).with_seed(seed).with_delay(DelayModel::Uniform {
        lo: Time::new(1, 2),
        hi: Time::from_int(2),
    });
    cfg.crashes.push(CrashSpec {
        proc: ProcessId(4),
        at: Time::new(7, 2),
    });

    let out = run(&cfg)?;
    let m = &out.metrics;
    println!("verdict      {}", out.verdict);
    println!("steps        {} (quiescent: {})", out.steps, out.quiescent);
    println!(
        "messages     {} sent, {} delivered, {} dropped",
        m.sends, m.delivers, m.drops
    );
    println!("by tag       {:?}", m.messages_by_tag);
    println!("control bits max {}", m.control_bits_max);
    println!("write msgs   {:?}", m.write_msgs);
    println!("read msgs    {:?}", m.read_msgs);
    println!(
        "slowest write {:?}, slowest read {:?}",
        m.write_latency_max, m.read_latency_max
    );
    Ok(())
}
