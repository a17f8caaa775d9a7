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

use proptest::prelude::*;

use twobit::{AbdMessage, Message, SeqNum, Tag, Value, ValueMode, CONTROL_BITS};

fn int_message() -> impl Strategy<Value = Message> {
    prop_oneof![
        any::<u64>().prop_map(|v| Message::Write0(Value::Int(v))),
        any::<u64>().prop_map(|v| Message::Write1(Value::Int(v))),
        Just(Message::Read),
        Just(Message::Proceed),
    ]
}

fn bytes_message() -> impl Strategy<Value = Message> {
    let payload = proptest::collection::vec(any::<u8>(), 0..64);
    prop_oneof![
        payload.clone().prop_map(|b| Message::Write0(Value::Bytes(b))),
        payload.prop_map(|b| Message::Write1(Value::Bytes(b))),
        Just(Message::Read),
        Just(Message::Proceed),
    ]
}

proptest! {
    #[test]
    fn integer_mode_round_trips(m in int_message()) {
        let bytes = m.encode(ValueMode::U64).unwrap();
        prop_assert_eq!(bytes[0] >> CONTROL_BITS, 0);
        prop_assert_eq!(Tag::from_bits(bytes[0]), m.tag());
        prop_assert_eq!(bytes.len(), if m.is_write() { 9 } else { 1 });
        prop_assert_eq!(Message::decode(&bytes, ValueMode::U64).unwrap(), m);
    }

    #[test]
    fn byte_mode_round_trips(m in bytes_message()) {
        let bytes = m.encode(ValueMode::Bytes).unwrap();
        prop_assert_eq!(bytes[0] >> CONTROL_BITS, 0);
        prop_assert_eq!(Message::decode(&bytes, ValueMode::Bytes).unwrap(), m);
    }

    #[test]
    fn concatenated_frames_split_back(ms in proptest::collection::vec(int_message(), 1..20)) {
        let mut buf = Vec::new();
        for m in &ms {
            m.encode_into(ValueMode::U64, &mut buf).unwrap();
        }
        let mut rest = &buf[..];
        let mut out = Vec::new();
        while !rest.is_empty() {
            let (m, used) = Message::decode_prefix(rest, ValueMode::U64).unwrap();
            out.push(m);
            rest = &rest[used..];
        }
        prop_assert_eq!(out, ms);
    }

    #[test]
    fn set_high_bits_are_rejected(m in int_message(), high in 1u8..64) {
        let mut bytes = m.encode(ValueMode::U64).unwrap();
        bytes[0] |= high << CONTROL_BITS;
        prop_assert!(Message::decode(&bytes, ValueMode::U64).is_err());
    }

    #[test]
    fn abd_round_trips(sn in any::<u64>(), rid in any::<u64>(), v in any::<u64>()) {
        let (sn, v) = (SeqNum(sn), Value::Int(v));
        let all = [
            AbdMessage::WriteReq { sn, value: v.clone() },
            AbdMessage::WriteAck { sn },
            AbdMessage::ReadReq { rid },
            AbdMessage::ReadReply { rid, sn, value: v.clone() },
            AbdMessage::WriteBack { rid, sn, value: v },
            AbdMessage::WriteBackAck { rid },
        ];
        for m in all {
            let bytes = m.encode(ValueMode::U64).unwrap();
            prop_assert_eq!(AbdMessage::decode(&bytes, ValueMode::U64).unwrap(), m);
        }
    }
}

#[test]
fn all_four_tags_use_distinct_two_bit_codes() {
    let codes: Vec<u8> = [
        Message::Write0(Value::Int(1)),
        Message::Write1(Value::Int(1)),
        Message::Read,
        Message::Proceed,
    ]
    .iter()
    .map(|m| m.encode(ValueMode::U64).unwrap()[0])
    .collect();
    assert_eq!(codes, vec![0b00, 0b01, 0b10, 0b11]);
    assert_eq!(CONTROL_BITS, 2);
}

#[test]
fn abd_control_bits_grow_with_sequence_numbers() {
    let bits = |sn: u64| AbdMessage::WriteAck { sn: SeqNum(sn) }.control_bits();
    assert!(bits(1) < bits(1 << 10));
    assert!(bits(1 << 10) < bits(1 << 30));
    assert!(bits(1 << 30) < bits(u64::MAX));
}
