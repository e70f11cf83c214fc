//! Encodes non-finite ratios as `-1` so they survive JSON and CSV exports.

use serde::{Deserialize, Deserializer, Serializer};

/// Stand-in for an infinite (or undefined) suboptimality ratio.
pub const INFINITE_RATIO: f64 = -1.0;

pub fn encode(x: f64) -> f64 {
    if x.is_finite() {
        x
    } else {
        INFINITE_RATIO
    }
}

pub fn decode(x: f64) -> f64 {
    if x < 0.0 {
        f64::INFINITY
    } else {
        x
    }
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(encode(*x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    f64::deserialize(d).map(decode)
}
