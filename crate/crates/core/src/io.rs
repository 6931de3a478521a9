//! Serialization helpers shared by the matrix, kernel and report formats.

use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};

/// A double written with 17 significant digits (`1.2345678901234567e-3`).
/// Non-finite values serialize as `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dec17(pub f64);

impl Serialize for Dec17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let n = serde_json::Number::from_str(&format!("{:.16e}", self.0))
            .map_err(serde::ser::Error::custom)?;
        n.serialize(s)
    }
}

pub fn dec(x: f64) -> Dec17 {
    Dec17(x)
}

pub fn dec_pair(c: Complex64) -> [Dec17; 2] {
    [Dec17(c.re), Dec17(c.im)]
}

pub fn dec_vec(v: &[f64]) -> Vec<Dec17> {
    v.iter().copied().map(Dec17).collect()
}

/// Formats a double for CSV output with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

pub(crate) fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Format(format!("missing field `{key}`")))
}

pub(crate) fn as_f64(v: &Value) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| Error::Format(format!("expected a number, found {v}")))
}

pub(crate) fn as_usize(v: &Value) -> Result<usize> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::Format(format!("expected a nonnegative integer, found {v}")))
}

pub(crate) fn as_rows(v: &Value) -> Result<Vec<Vec<f64>>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Format("expected an array of rows".into()))?;
    rows.iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| Error::Format("expected a row array".into()))?
                .iter()
                .map(as_f64)
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0, -0.0] {
            let s = serde_json::to_string(&Dec17(x)).unwrap();
            let back: f64 = parse_json(&s).unwrap().as_f64().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(
            serde_json::to_string(&Dec17(0.5)).unwrap(),
            "5.0000000000000000e-1"
        );
        assert_eq!(serde_json::to_string(&Dec17(f64::NAN)).unwrap(), "null");
    }
}
