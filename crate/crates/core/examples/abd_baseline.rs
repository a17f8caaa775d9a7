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

//! The ABD baseline on the same workload as the two-bit register.
//!
//! ```bash
//! cargo run --example abd_baseline
//! ```

use twobit::sim::{run, Algorithm, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for algo in [Algorithm::Twobit, Algorithm::Abd] {
        let cfg = SimConfig::new(5, 2).with_seed(3).with_algorithm(algo);
        let out = run(&cfg)?;
        let m = &out.metrics;
        println!(
            "{:>6}: {} | writes {:.1} msgs, reads {:.1} msgs, control bits avg {:.2} max {}",
            algo.name(),
            out.verdict,
            m.write_msgs.avg,
            m.read_msgs.avg,
            m.control_bits_avg,
            m.control_bits_max
        );
    }
    Ok(())
}
