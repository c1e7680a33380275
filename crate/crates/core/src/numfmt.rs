//! Fixed-precision number rendering for JSON and CSV artifacts.
//!
//! JSON carries 17 significant digits (enough to round-trip any `f64`), CSV
//! carries 9. Both use `.` as the decimal separator independent of locale.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// Render with `digits` significant digits in scientific notation.
pub fn sig(value: f64, digits: usize) -> String {
    if !value.is_finite() {
        return if value.is_nan() {
            "NaN".to_string()
        } else if value > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    format!("{:.*e}", digits.saturating_sub(1), value)
}

/// 9 significant digits, for CSV cells.
pub fn csv(value: f64) -> String {
    sig(value, 9)
}

/// A float that serializes as a JSON number with 17 significant digits.
///
/// Non-finite values serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(sig(self.0, 17)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

/// Map a slice into serializable 17-digit values.
pub fn sig17_vec(values: &[f64]) -> Vec<Sig17> {
    values.iter().copied().map(Sig17).collect()
}
