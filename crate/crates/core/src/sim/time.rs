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

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Non-negative rational virtual time.
///
/// Serialized as a string, `"7"` or `"7/2"`; integers are also accepted on
/// input.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Time(Ratio<u64>);

impl Time {
    pub const ZERO: Time = Time(Ratio::new_raw(0, 1));

    pub fn new(numer: u64, denom: u64) -> Time {
        Time(Ratio::new(numer, denom))
    }

    pub fn from_int(v: u64) -> Time {
        Time(Ratio::from_integer(v))
    }

    pub fn ratio(self) -> Ratio<u64> {
        self.0
    }

    pub fn numer(self) -> u64 {
        *self.0.numer()
    }

    pub fn denom(self) -> u64 {
        *self.0.denom()
    }

    pub fn is_zero(self) -> bool {
        *self.0.numer() == 0
    }

    pub fn as_f64(self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }

    /// `self / unit` as an exact ratio. `unit` must be non-zero.
    pub fn in_units_of(self, unit: Time) -> Ratio<u64> {
        self.0 / unit.0
    }

    /// Returns `lo + (hi - lo) * k / steps`.
    pub fn lerp(lo: Time, hi: Time, k: u64, steps: u64) -> Time {
        let span = hi.0 - lo.0;
        Time(lo.0 + span * Ratio::new(k, steps))
    }
}

impl Default for Time {
    fn default() -> Self {
        Time::ZERO
    }
}

impl Add for Time {
    type Output = Time;
    fn add(self, rhs: Time) -> Time {
        Time(self.0 + rhs.0)
    }
}

impl Sub for Time {
    type Output = Time;
    fn sub(self, rhs: Time) -> Time {
        Time(self.0 - rhs.0)
    }
}

impl Mul<u64> for Time {
    type Output = Time;
    fn mul(self, rhs: u64) -> Time {
        Time(self.0 * Ratio::from_integer(rhs))
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self.0.denom() == 1 {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Time({self})")
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid time {0:?}: expected \"p\" or \"p/q\" with q > 0")]
pub struct ParseTimeError(String);

impl FromStr for Time {
    type Err = ParseTimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseTimeError(s.to_string());
        let s = s.trim();
        match s.split_once('/') {
            None => s.parse::<u64>().map(Time::from_int).map_err(|_| err()),
            Some((p, q)) => {
                let p = p.trim().parse::<u64>().map_err(|_| err())?;
                let q = q.trim().parse::<u64>().map_err(|_| err())?;
                if q == 0 {
                    return Err(err());
                }
                Ok(Time::new(p, q))
            }
        }
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Time::from_int(v)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
