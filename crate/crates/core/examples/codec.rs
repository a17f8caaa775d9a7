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

//! Wire encodings of both protocols.
//!
//! ```bash
//! cargo run --example codec
//! ```

use twobit::{AbdMessage, Message, SeqNum, Value, ValueMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let msgs = [
        Message::write(0, Value::Int(7)),
        Message::write(1, Value::Int(7)),
        Message::Read,
        Message::Proceed,
    ];
    for m in &msgs {
        let bytes = m.encode(ValueMode::U64)?;
        assert_eq!(&Message::decode(&bytes, ValueMode::U64)?, m);
        println!(
            "{:<8} {:>2} bytes  {}",
            m.tag().name(),
            bytes.len(),
            hex::encode(&bytes)
        );
    }
    let b = Message::write(1, Value::Bytes(b"hello".to_vec())).encode(ValueMode::Bytes)?;
    println!("WRITE1 with bytes payload: {}", hex::encode(&b));

    for sn in [1, 1000, 1_000_000] {
        let m = AbdMessage::WriteReq {
            sn: SeqNum(sn),
            value: Value::Int(7),
        };
        let bytes = m.encode(ValueMode::U64)?;
        assert_eq!(AbdMessage::decode(&bytes, ValueMode::U64)?, m);
        println!(
            "ABD {} sn={sn}: {} control bits, {} bytes",
            m.tag_name(),
            m.control_bits(),
            bytes.len()
        );
    }
    Ok(())
}
