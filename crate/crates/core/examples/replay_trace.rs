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

//! Saves a trace, replays it, then tampers with it and replays again.
//!
//! ```bash
//! cargo run --example replay_trace
//! ```

use twobit::sim::{replay, run, Dir, SimConfig, Trace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimConfig::new(3, 1).with_seed(11);
    let trace = run(&cfg)?.trace;
    let text = trace.to_jsonl();
    println!("trace: {} records, {} bytes", trace.len(), text.len());

    let loaded = Trace::from_jsonl(&text)?;
    let report = replay(&loaded, &cfg)?;
    println!(
        "intact: matched={} fingerprints={}",
        report.matched,
        report.fingerprints.len()
    );

    let mut tampered = loaded.clone();
    let k = tampered
        .records
        .iter()
        .position(|r| r.dir == Dir::Deliver)
        .expect("a delivery");
    tampered.records.remove(k);
    let report = replay(&tampered, &cfg)?;
    let mm = report.mismatch.expect("tampering is detected");
    println!("removed record {k}: mismatch at {:?}: {}", mm.record, mm.reason);

    let other = cfg.clone().with_seed(12);
    let report = replay(&loaded, &other)?;
    println!("wrong seed: matched={}", report.matched);
    Ok(())
}
