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

//! Drives three register automata by hand: the writer stores a value, then
//! p3 reads it. Messages are delivered from a plain queue.
//!
//! ```bash
//! cargo run --example basic_register
//! ```

use std::collections::VecDeque;

use twobit::{Action, Message, ProcessId, RegisterState, Value};

fn main() -> Result<(), twobit::ProtocolError> {
    let (n, t) = (3, 1);
    let writer = ProcessId(1);
    let mut procs: Vec<RegisterState> = ProcessId::all(n)
        .map(|p| RegisterState::new(n, t, p, writer, Value::Int(0)))
        .collect::<Result<_, _>>()?;
    let mut net: VecDeque<(ProcessId, ProcessId, Message)> = VecDeque::new();

    let push = |from: ProcessId, actions: Vec<Action>, net: &mut VecDeque<_>| {
        for a in actions {
            match a {
                Action::Send { to, msg } => net.push_back((from, to, msg)),
                Action::WriteReturn => println!("{from}: write returned"),
                Action::ReadReturn { value, sn } => println!("{from}: read returned {value:?} (sn {})", sn.get()),
            }
        }
    };

    let acts = procs[0].invoke_write(Value::Int(42))?;
    push(writer, acts, &mut net);
    while let Some((from, to, msg)) = net.pop_front() {
        let acts = procs[to.slot()].on_deliver(from, msg)?;
        push(to, acts, &mut net);
    }

    let reader = ProcessId(3);
    let acts = procs[reader.slot()].invoke_read()?;
    push(reader, acts, &mut net);
    let mut delivered = 0;
    while let Some((from, to, msg)) = net.pop_front() {
        delivered += 1;
        let acts = procs[to.slot()].on_deliver(from, msg)?;
        push(to, acts, &mut net);
    }
    println!("read used {delivered} messages");

    for p in &procs {
        println!("{}: history {:?}, fingerprint {}", p.me(), p.history(), p.fingerprint());
    }
    Ok(())
}
