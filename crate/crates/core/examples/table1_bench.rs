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

//! Side-by-side costs of the two-bit register and ABD for several system
//! sizes, printed as CSV.
//!
//! ```bash
//! cargo run --release --example table1_bench
//! ```

use twobit::metrics::{bench_configs, compare_table1};
use twobit::sim::Algorithm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfgs = bench_configs(&[3, 5, 7, 9], &[Algorithm::Twobit, Algorithm::Abd], 150, 10, 0);
    let table = compare_table1(&cfgs)?;
    print!("{}", table.to_csv()?);
    for n in [3, 5, 7, 9] {
        let (a, b) = (table.row(Algorithm::Twobit, n), table.row(Algorithm::Abd, n));
        if let (Some(a), Some(b)) = (a, b) {
            println!(
                "n={n}: write msgs {:.0} vs {:.0}, read msgs {:.0} vs {:.0}, max control bits {} vs {}",
                a.write_msgs_avg,
                b.write_msgs_avg,
                a.read_msgs_avg,
                b.read_msgs_avg,
                a.control_bits_max,
                b.control_bits_max
            );
        }
    }
    Ok(())
}
