//! Text rendering shared by every persisted record.
//!
//! Floating-point values in tree records, energy reports and CSV tables are
//! written with 17 significant digits, which is enough for any `f64` to
//! parse back to the identical bit pattern.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Renders `x` with 17 significant digits in scientific notation.
///
/// Non-finite values are rendered as `NaN`, `inf` and `-inf`, which Rust's
/// float parser accepts.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// Serializes an `f64` as a raw JSON number with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_f64(self.0);
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

/// `serialize_with` adapter for plain `f64` fields.
pub fn ser_f64<S: Serializer>(x: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    Sig17(*x).serialize(serializer)
}
