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

//! Runs adversarially reordered schedules with random crashes and checks
//! every one for atomicity, invariants and liveness.
//!
//! ```bash
//! cargo run --release --example fuzz_atomicity -- 1000
//! ```

use std::time::Instant;

use twobit::sim::adversarial_schedules;
use twobit::sim::fuzz::standard_fuzz_config;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let count: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(200);
    let master = standard_fuzz_config(2026);
    let start = Instant::now();
    let (mut failed, mut crashes, mut ops) = (0, 0, 0);
    for r in adversarial_schedules(&master, count)? {
        crashes += r
            .outcome
            .trace
            .records
            .iter()
            .filter(|x| x.dir == twobit::sim::Dir::Crash)
            .count();
        ops += r.outcome.metrics.ops.len();
        if !r.outcome.verdict.accepted {
            failed += 1;
            println!("run {} (seed {}): {}", r.index, r.config.seed, r.outcome.verdict);
        }
    }
    println!(
        "{count} schedules, {ops} operations, {crashes} crashes, {failed} rejected, {:?}",
        start.elapsed()
    );
    Ok(())
}
