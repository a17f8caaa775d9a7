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

//! Seeded schedule fuzzing. Child `i` of a master configuration keeps
//! everything but the seed, which is derived from the master seed and `i`,
//! and the delay model, which becomes adversarial reordering under the same
//! bound.

use sha2::{Digest, Sha256};

use crate::sim::config::{ConfigError, DelayModel, RandomCrashes, SimConfig, ThinkTime, WorkloadSpec};
use crate::sim::engine::{run, RunOutcome};
use crate::sim::time::Time;
use crate::types::ProcessId;

pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"twobit.fuzz.v1");
    h.update(master.to_be_bytes());
    h.update(index.to_be_bytes());
    let d = h.finalize();
    u64::from_be_bytes(d[..8].try_into().expect("digest has 32 bytes"))
}

pub fn child_config(master: &SimConfig, index: u64) -> SimConfig {
    let mut c = master.clone();
    c.seed = child_seed(master.seed, index);
    if !matches!(c.delay, DelayModel::AdversarialReorder { .. }) {
        c.delay = c.delay.adversarial();
    }
    c
}

pub struct FuzzRun {
    pub index: u64,
    pub config: SimConfig,
    pub outcome: RunOutcome,
}

/// Lazily runs `count` child schedules of `master`.
pub fn adversarial_schedules(
    master: &SimConfig,
    count: u64,
) -> Result<impl Iterator<Item = FuzzRun> + '_, ConfigError> {
    if count == 0 {
        return Err(ConfigError::Invalid("fuzz count must be >= 1".into()));
    }
    master.validate()?;
    Ok((0..count).map(move |index| {
        let config = child_config(master, index);
        let outcome = run(&config).expect("child of a valid config is valid");
        FuzzRun { index, config, outcome }
    }))
}

/// `n = 5, t = 2`, up to two crashes at random times, 10 writes, readers
/// p2..p4 with 10 reads each, delays up to 10 time units.
pub fn standard_fuzz_config(seed: u64) -> SimConfig {
    let delta = Time::from_int(10);
    let mut c = SimConfig::new(5, 2)
        .with_seed(seed)
        .with_delay(DelayModel::AdversarialReorder { max: delta })
        .with_workload(WorkloadSpec {
            writes: 10,
            value_seed: None,
            readers: (2..=4).map(ProcessId).collect(),
            reads_per_reader: 10,
            think: ThinkTime {
                lo: Time::ZERO,
                hi: delta * 3,
            },
            script: Vec::new(),
        });
    c.random_crashes = Some(RandomCrashes {
        max: 2,
        horizon: delta * 40,
    });
    c
}
