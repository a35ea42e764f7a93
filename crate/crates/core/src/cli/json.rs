//! JSON output with every float written to 17 significant digits.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Value};

use crate::geom::Vector;

/// Compact formatter writing floats as `d.dddddddddddddddde±x`.
struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a value on one line.
pub fn to_line<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    value.serialize(&mut ser).expect("JSON values always serialize");
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

/// A float, or `null` when it is not finite.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn vec(v: &Vector) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

pub fn vecs(vs: &[Vector]) -> Value {
    Value::Array(vs.iter().map(vec).collect())
}

/// Zero-based indices shifted to the one-based numbering used in reports.
pub fn one_based(ix: &[usize]) -> Value {
    json!(ix.iter().map(|k| k + 1).collect::<Vec<_>>())
}
